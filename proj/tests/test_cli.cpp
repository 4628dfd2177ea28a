#include <doctest.h>

#include <algorithm>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <map>
#include <sstream>
#include <string>
#include <sys/wait.h>

namespace {

const std::string kCli = GWP_CLI_PATH;
const std::string kDataDir = GWP_TEST_DATA_DIR;

struct CmdResult {
    int code = -1;
    std::string out;
};

CmdResult run_cmd(const std::string& args) {
    const std::string capture = "cli_capture.txt";
    const std::string cmd = kCli + " " + args + " > " + capture + " 2>&1";
    const int rc = std::system(cmd.c_str());
    CmdResult r;
    r.code = WIFEXITED(rc) ? WEXITSTATUS(rc) : -1;
    std::ifstream in(capture, std::ios::binary);
    std::ostringstream os;
    os << in.rdbuf();
    r.out = os.str();
    std::remove(capture.c_str());
    return r;
}

std::string slurp(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    std::ostringstream os;
    os << in.rdbuf();
    return os.str();
}

void write_file(const std::string& path, const std::string& content) {
    std::ofstream out(path, std::ios::binary);
    out << content;
}

std::map<std::string, std::string> parse_kv(const std::string& text) {
    std::map<std::string, std::string> kv;
    std::istringstream in(text);
    std::string line;
    while (std::getline(in, line)) {
        const auto eq = line.find(" = ");
        if (eq == std::string::npos) continue;
        kv[line.substr(0, eq)] = line.substr(eq + 3);
    }
    return kv;
}

const std::string kAnalyzeArgs =
    " --arm-col arm --cluster-col cluster --id-col id"
    " --endpoint score:score:higher:1 --endpoint activity:activity:lower:1";

} // namespace

TEST_CASE("cli analyze runs end to end on the clean fixture") {
    const CmdResult r = run_cmd("analyze --input " + kDataDir + "/clean6.tsv" + kAnalyzeArgs);
    CHECK(r.code == 0);
    CHECK(r.out.find("global win probability") != std::string::npos);
    CHECK(r.out.find("theta = ") != std::string::npos);
    CHECK(r.out.find("win odds") != std::string::npos);
}

TEST_CASE("cli analyze machine output round-trips numerics at full precision") {
    const CmdResult r =
        run_cmd("analyze --machine --input " + kDataDir + "/clean6.tsv" + kAnalyzeArgs);
    REQUIRE(r.code == 0);
    const auto kv = parse_kv(r.out);
    REQUIRE(kv.count("theta_hat") == 1);
    REQUIRE(kv.count("se") == 1);
    // full-precision round trip: parse and re-format reproduces the token
    const double theta = std::strtod(kv.at("theta_hat").c_str(), nullptr);
    char buf[40];
    std::snprintf(buf, sizeof(buf), "%.17g", theta);
    CHECK(kv.at("theta_hat") == buf);
    CHECK(kv.count("ci.identity.lower") == 1);
    CHECK(kv.count("ci.logit.lower") == 1);
    CHECK(kv.count("input_digest") == 1);
}

TEST_CASE("cli analyze honors --out") {
    const std::string out_path = "cli_report_out.txt";
    const CmdResult r = run_cmd("analyze --input " + kDataDir + "/clean6.tsv" + kAnalyzeArgs +
                                " --machine --out " + out_path);
    REQUIRE(r.code == 0);
    CHECK(slurp(out_path) == r.out);
    std::remove(out_path.c_str());
}

TEST_CASE("cli analyze exit codes distinguish failure classes") {
    SUBCASE("missing input file -> io error") {
        const CmdResult r = run_cmd("analyze --input nope.tsv" + kAnalyzeArgs);
        CHECK(r.code == 2);
    }
    SUBCASE("invalid content -> validation error") {
        write_file("cli_badarm.tsv",
                   "arm\tcluster\tid\tscore\tactivity\n5\tA\t1\t1\t0\n1\tB\t2\t1\t0\n");
        const CmdResult r = run_cmd("analyze --input cli_badarm.tsv" + kAnalyzeArgs);
        CHECK(r.code == 3);
        std::remove("cli_badarm.tsv");
    }
    SUBCASE("two clusters -> df configuration error") {
        write_file("cli_df0.tsv",
                   "arm\tcluster\tid\tscore\tactivity\n"
                   "0\tA\t1\t1\t0\n0\tA\t2\t3\t1\n0\tA\t3\t2\t0\n"
                   "1\tB\t4\t2\t1\n1\tB\t5\t4\t0\n1\tB\t6\t3\t1\n");
        const CmdResult r = run_cmd("analyze --input cli_df0.tsv" + kAnalyzeArgs);
        CHECK(r.code == 3);
        CHECK(r.out.find("df") != std::string::npos);
        std::remove("cli_df0.tsv");
    }
    SUBCASE("degenerate responses -> convergence error") {
        write_file("cli_const.tsv",
                   "arm\tcluster\tid\tscore\tactivity\n"
                   "0\tA\t1\t1\t0\n0\tB\t2\t1\t0\n0\tC\t3\t1\t0\n"
                   "1\tD\t4\t1\t0\n1\tE\t5\t1\t0\n1\tF\t6\t1\t0\n");
        const CmdResult r = run_cmd("analyze --input cli_const.tsv" + kAnalyzeArgs);
        CHECK(r.code == 4);
        std::remove("cli_const.tsv");
    }
}

TEST_CASE("cli simulate: smoke run, grid, and byte-identical determinism") {
    write_file("cli_sim.cfg",
               "clusters = 4\n"
               "cluster_size = 6\n"
               "theta_targets = 0.5\n"
               "omega12 = 0.3\n"
               "reps = 5\n"
               "seed = 42\n");

    SUBCASE("smoke run emits one row") {
        const CmdResult r = run_cmd("simulate --config cli_sim.cfg --out cli_rows.txt");
        REQUIRE(r.code == 0);
        const std::string rows = slurp("cli_rows.txt");
        CHECK(std::count(rows.begin(), rows.end(), '\n') == 1);
        CHECK(rows.find("identity.ecp=") != std::string::npos);
        std::remove("cli_rows.txt");
    }
    SUBCASE("identical config and seed produce byte-identical metrics files") {
        const CmdResult a =
            run_cmd("simulate --config cli_sim.cfg --threads 1 --out cli_rows_a.txt");
        const CmdResult b =
            run_cmd("simulate --config cli_sim.cfg --threads 4 --out cli_rows_b.txt");
        REQUIRE(a.code == 0);
        REQUIRE(b.code == 0);
        CHECK(slurp("cli_rows_a.txt") == slurp("cli_rows_b.txt"));
        std::remove("cli_rows_a.txt");
        std::remove("cli_rows_b.txt");
    }
    SUBCASE("seed override changes the rows") {
        const CmdResult a =
            run_cmd("simulate --config cli_sim.cfg --seed 1 --out cli_rows_a.txt");
        const CmdResult b =
            run_cmd("simulate --config cli_sim.cfg --seed 2 --out cli_rows_b.txt");
        REQUIRE(a.code == 0);
        REQUIRE(b.code == 0);
        CHECK(slurp("cli_rows_a.txt") != slurp("cli_rows_b.txt"));
        std::remove("cli_rows_a.txt");
        std::remove("cli_rows_b.txt");
    }
    std::remove("cli_sim.cfg");
}

TEST_CASE("cli simulate --grid expands theta lists in deterministic order") {
    write_file("cli_grid.cfg",
               "clusters = 4\n"
               "cluster_size = 5\n"
               "theta_targets = 0.5; 0.56; 0.64; 0.71\n"
               "reps = 2\n"
               "seed = 9\n");
    const CmdResult r = run_cmd("simulate --grid --config cli_grid.cfg --out cli_grid_rows.txt");
    REQUIRE(r.code == 0);
    const std::string rows = slurp("cli_grid_rows.txt");
    CHECK(std::count(rows.begin(), rows.end(), '\n') == 4);
    // rows arrive in list order (full precision: 0.71 prints as 0.709...)
    const auto p50 = rows.find("theta_true=0.5 ");
    const auto p71 = rows.find("theta_true=0.70999");
    CHECK(p50 != std::string::npos);
    CHECK(p71 != std::string::npos);
    CHECK(p50 < p71);
    std::remove("cli_grid.cfg");
    std::remove("cli_grid_rows.txt");
}

TEST_CASE("cli simulate config errors") {
    SUBCASE("missing file -> io error") {
        const CmdResult r = run_cmd("simulate --config nope.cfg");
        CHECK(r.code == 2);
    }
    SUBCASE("bad key -> validation error") {
        write_file("cli_bad.cfg", "clusters = 4\nwibble = 2\n");
        const CmdResult r = run_cmd("simulate --config cli_bad.cfg");
        CHECK(r.code == 3);
        std::remove("cli_bad.cfg");
    }
}

TEST_CASE("cli oracle-check") {
    SUBCASE("default run passes every suite") {
        const CmdResult r = run_cmd("oracle-check --datasets 15 --seed 7");
        CHECK(r.code == 0);
        CHECK(r.out.find("PASS rank_vs_bruteforce") != std::string::npos);
        CHECK(r.out.find("PASS plugin_identity") != std::string::npos);
        CHECK(r.out.find("PASS rank_sum_identity") != std::string::npos);
        CHECK(r.out.find("PASS reml_vs_anova") != std::string::npos);
        CHECK(r.out.find("PASS transform_consistency") != std::string::npos);
        CHECK(r.out.find("FAIL") == std::string::npos);
    }
    SUBCASE("repeat runs with the same seed are identical") {
        const CmdResult a = run_cmd("oracle-check --datasets 10 --seed 123");
        const CmdResult b = run_cmd("oracle-check --datasets 10 --seed 123");
        CHECK(a.out == b.out);
    }
    SUBCASE("fault injection is reported with the seed") {
        const CmdResult r = run_cmd("oracle-check --datasets 10 --seed 5 --fail-inject");
        CHECK(r.code != 0);
        CHECK(r.out.find("FAIL rank_vs_bruteforce") != std::string::npos);
        CHECK(r.out.find("seed 5") != std::string::npos);
    }
}
