#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

namespace fs = std::filesystem;

namespace {

struct RunResult {
    int exit_code;
    std::string out;
    std::string err;
};

std::string slurp(const fs::path& p) {
    std::ifstream in(p, std::ios::binary);
    std::ostringstream os;
    os << in.rdbuf();
    return os.str();
}

RunResult run_twave(const std::string& args) {
    static int counter = 0;
    const fs::path dir(TEST_TMP_DIR);
    fs::create_directories(dir);
    const fs::path out = dir / ("out" + std::to_string(counter) + ".txt");
    const fs::path err = dir / ("err" + std::to_string(counter) + ".txt");
    ++counter;
    const std::string cmd = std::string(TWAVE_BIN) + " " + args + " > " +
                            out.string() + " 2> " + err.string();
    const int status = std::system(cmd.c_str());
    RunResult r;
    r.exit_code = WIFEXITED(status) ? WEXITSTATUS(status) : -1;
    r.out = slurp(out);
    r.err = slurp(err);
    return r;
}

std::vector<std::vector<std::string>> parse_csv(const std::string& text) {
    std::vector<std::vector<std::string>> rows;
    std::istringstream is(text);
    std::string line;
    while (std::getline(is, line)) {
        if (line.empty()) continue;
        std::vector<std::string> cells;
        std::istringstream ls(line);
        std::string cell;
        while (std::getline(ls, cell, ',')) cells.push_back(cell);
        rows.push_back(std::move(cells));
    }
    return rows;
}

double to_d(const std::string& s) { return std::strtod(s.c_str(), nullptr); }

} // namespace

TEST_CASE("trajectory: CSV matches the k=0 closed form") {
    const auto r = run_twave(
        "trajectory --m 2 --p 1 --beta 0.5 --b 1 --k 0 --theta-max 10 "
        "--theta-min 0.01 --grid-points 31");
    REQUIRE(r.exit_code == 0);
    const auto rows = parse_csv(r.out);
    REQUIRE(rows.size() == 32);
    CHECK(rows[0] == std::vector<std::string>{"theta", "upsilon", "rhs"});
    bool seen_one = false;
    for (std::size_t i = 1; i < rows.size(); ++i) {
        const double th = to_d(rows[i][0]);
        const double up = to_d(rows[i][1]);
        const double want = std::sqrt(1.6) * std::pow(th, 1.25);
        CHECK(std::fabs(up - want) / want < 1e-8);
        if (std::fabs(th - 1.0) < 1e-12) {
            seen_one = true;
            CHECK(std::fabs(up - 1.2649110640673518) < 1e-6);
        }
    }
    CHECK(seen_one); // 31 log-spaced points over [1e-2, 10] include theta = 1
}

TEST_CASE("trajectory: validation failures exit 1 with a machine line") {
    auto r = run_twave("trajectory --m 2 --p 1 --beta 0.5 --b 1");
    CHECK(r.exit_code == 1);
    CHECK(r.err.find("error: [validation]") != std::string::npos);

    r = run_twave("trajectory --m 0.5 --p 1 --beta 0.5 --b 1 --k 0");
    CHECK(r.exit_code == 1);
    CHECK(r.err.find("mp") != std::string::npos);
}

TEST_CASE("profile: worked rows, zero extension, speed frame") {
    const auto r = run_twave(
        "profile --m 2 --p 1 --beta 0.5 --b 1 --k 0 --theta-max 100 "
        "--z-min 1 --z-max 1 --grid-points 1 --zero-extend --speed-frame 2");
    REQUIRE(r.exit_code == 0);
    const auto rows = parse_csv(r.out);
    REQUIRE(rows.size() >= 4); // header, -1, 0, 1
    CHECK(rows[0] == std::vector<std::string>{"z", "phi", "flux", "x", "u"});
    bool saw_neg = false, saw_zero = false, saw_one = false;
    for (std::size_t i = 1; i < rows.size(); ++i) {
        const double z = to_d(rows[i][0]);
        const double phi = to_d(rows[i][1]);
        const double flux = to_d(rows[i][2]);
        CHECK(to_d(rows[i][3]) == -z); // x = k*t - z with k = 0
        if (z < 0.0) {
            saw_neg = true;
            CHECK(phi == 0.0);
            CHECK(flux == 0.0);
        } else if (z == 0.0) {
            saw_zero = true;
            CHECK(phi == 0.0);
            CHECK(flux == 0.0);
        } else if (std::fabs(z - 1.0) < 1e-12) {
            saw_one = true;
            CHECK(std::fabs(phi - 0.3699318111495705) < 1e-6);
        }
    }
    CHECK(saw_neg);
    CHECK(saw_zero);
    CHECK(saw_one);
}

TEST_CASE("profile: unreachable z range exits 4") {
    const auto r = run_twave(
        "profile --m 2 --p 1 --beta 0.5 --b 1 --k 0 --theta-max 10 --z-max 1e9");
    CHECK(r.exit_code == 4);
    CHECK(r.err.find("error: [range]") != std::string::npos);
}

TEST_CASE("verify: k=0 reference passes with exit 0 and stable keys") {
    const auto r = run_twave(
        "verify --m 2 --p 1 --beta 0.5 --b 1 --k 0 --theta-max 100");
    REQUIRE(r.exit_code == 0);
    CHECK(r.out.find("pass = 1") != std::string::npos);
    CHECK(r.out.find("oracle.deviation") != std::string::npos);
    // oracle.deviation <= 1e-6 on the exact case
    std::istringstream is(r.out);
    std::string line;
    while (std::getline(is, line)) {
        if (line.rfind("oracle.deviation", 0) == 0)
            CHECK(to_d(line.substr(line.find('=') + 1)) <= 1e-6);
    }
}

TEST_CASE("verify: near-critical balance is rejected at validation") {
    const auto r = run_twave(
        "verify --m 1 --p 2 --beta 0.50000000000005 --b 1 --k 0");
    CHECK(r.exit_code == 1);
    CHECK(r.err.find("critical balance") != std::string::npos);
}

TEST_CASE("verify: k=1 report lists 2+2 asymptote entries") {
    const auto r = run_twave(
        "verify --m 2 --p 1 --beta 0.5 --b 1 --k 1 --theta-max 1e7");
    // Full-range run passes every check.
    CHECK(r.exit_code == 0);
    int traj = 0, prof = 0;
    std::istringstream is(r.out);
    std::string line;
    while (std::getline(is, line)) {
        if (line.find("].target = trajectory") != std::string::npos) ++traj;
        if (line.find("].target = profile") != std::string::npos) ++prof;
    }
    CHECK(traj == 2);
    CHECK(prof == 2);
}

TEST_CASE("config file provides defaults that flags override") {
    const fs::path dir(TEST_TMP_DIR);
    fs::create_directories(dir);
    const fs::path cfg = dir / "sweep.cfg";
    {
        std::ofstream f(cfg);
        f << "m=2\np=1\nbeta=0.5\nb=1\nk=0\ntheta-max=10\ntheta-min=0.01\n"
          << "grid-points=31\n";
    }
    const auto base = run_twave("trajectory --config " + cfg.string());
    REQUIRE(base.exit_code == 0);
    const auto rows = parse_csv(base.out);
    REQUIRE(rows.size() == 32);

    // A flag overrides the config value.
    const auto overridden =
        run_twave("trajectory --config " + cfg.string() + " --grid-points 11");
    const auto rows2 = parse_csv(overridden.out);
    REQUIRE(rows2.size() == 12);
}

TEST_CASE("sweep: grid order, per-cell isolation, determinism") {
    const std::string args =
        "sweep --m 2 --p 1 --beta 0.3,0.5 --b 1 --k -1,1 "
        "--theta-max 1e4 --workers 4";
    const auto r1 = run_twave(args);
    REQUIRE(r1.exit_code == 0);
    const auto rows = parse_csv(r1.out);
    REQUIRE(rows.size() == 5); // header + 4 cells
    CHECK(rows[0] == std::vector<std::string>{"m", "p", "beta", "b", "k",
                                              "regime", "c_star", "status"});
    for (std::size_t i = 1; i < rows.size(); ++i) {
        CHECK(rows[i][5].find("super") != std::string::npos);
        const std::string status = rows[i][7];
        CHECK((status == "pass" || status == "fail" || status == "inconclusive"));
    }
    // Deterministic row order: beta-major then k (flag order m,p,beta,b,k).
    CHECK(to_d(rows[1][2]) == 0.3);
    CHECK(to_d(rows[1][4]) == -1.0);
    CHECK(to_d(rows[2][4]) == 1.0);
    CHECK(to_d(rows[3][2]) == 0.5);

    // Byte-identical on repeat.
    const auto r2 = run_twave(args);
    CHECK(r1.out == r2.out);

    // An invalid cell reports invalid without disturbing the others.
    const auto r3 = run_twave(
        "sweep --m 0.5,2 --p 1 --beta 0.5 --b 1 --k 1 --theta-max 1e4");
    const auto rows3 = parse_csv(r3.out);
    REQUIRE(r3.exit_code == 0);
    REQUIRE(rows3.size() == 3);
    CHECK(rows3[1][7] == "invalid");
    CHECK(rows3[2][7] != "invalid");
}

TEST_CASE("numbers round-trip at 17 significant digits") {
    const auto r = run_twave(
        "trajectory --m 2 --p 1 --beta 0.5 --b 1 --k 1 --theta-max 10 "
        "--grid-points 16");
    REQUIRE(r.exit_code == 0);
    const auto rows = parse_csv(r.out);
    for (std::size_t i = 1; i < rows.size(); ++i) {
        for (const auto& cell : rows[i]) {
            const double v = to_d(cell);
            char buf[40];
            std::snprintf(buf, sizeof buf, "%.17e", v);
            CHECK(cell == buf);
        }
    }
}
