#include <doctest.h>

#include "kinising/io.hpp"

#include <algorithm>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <unistd.h>
#include <vector>

namespace fs = std::filesystem;

namespace {

struct TempDir {
    fs::path path;
    TempDir() {
        path = fs::temp_directory_path() /
               ("kinising-cli-test-" + std::to_string(::getpid()));
        fs::create_directories(path);
    }
    ~TempDir() { fs::remove_all(path); }
    std::string file(const std::string& name) const { return (path / name).string(); }
};

int run_cli(const std::string& args, const std::string& log) {
    const std::string cmd = std::string(KINISING_BIN) + " " + args + " > " + log + " 2>&1";
    const int status = std::system(cmd.c_str());
    return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
}

std::string slurp(const std::string& path) {
    std::ifstream in(path);
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

bool same_bytes(const std::string& a, const std::string& b) { return slurp(a) == slurp(b); }

std::vector<std::vector<double>> read_csv(const std::string& path) {
    std::ifstream in(path);
    std::string line;
    std::getline(in, line);  // header
    std::vector<std::vector<double>> rows;
    while (std::getline(in, line)) {
        std::vector<double> row;
        std::stringstream ss(line);
        std::string cell;
        while (std::getline(ss, cell, ',')) row.push_back(std::stod(cell));
        rows.push_back(row);
    }
    return rows;
}

}  // namespace

TEST_SUITE("cli") {

TEST_CASE("usage and validation errors exit 1 with one diagnostic line") {
    TempDir dir;
    const std::string log = dir.file("log.txt");
    CHECK(run_cli("generate --no-such-flag", log) == 1);
    std::string text = slurp(log);
    CHECK(text.find("error:") != std::string::npos);
    CHECK(std::count(text.begin(), text.end(), '\n') == 1);

    CHECK(run_cli("fit-em --traj " + dir.file("absent.json") + " --gamma 10 --out " +
                      dir.file("o.json"),
                  log) == 1);
    text = slurp(log);
    CHECK(text.find("error:") != std::string::npos);
}

TEST_CASE("generate is deterministic and the pipeline surfaces em monotonicity") {
    TempDir dir;
    const std::string log = dir.file("log.txt");
    const std::string gen_args =
        "generate --n 5 --t-end 10 --g 0.3 --gamma 100 --seed 1 --out-model ";
    REQUIRE(run_cli(gen_args + dir.file("m1.json") + " --out-traj " + dir.file("t1.json"),
                    log) == 0);
    REQUIRE(run_cli(gen_args + dir.file("m2.json") + " --out-traj " + dir.file("t2.json"),
                    log) == 0);
    CHECK(same_bytes(dir.file("m1.json"), dir.file("m2.json")));
    CHECK(same_bytes(dir.file("t1.json"), dir.file("t2.json")));

    REQUIRE(run_cli("fit-em --traj " + dir.file("t1.json") + " --out " +
                        dir.file("est.json") + " --trace " + dir.file("trace.csv"),
                    log) == 0);
    const auto trace = read_csv(dir.file("trace.csv"));
    REQUIRE(trace.size() >= 2);
    for (std::size_t k = 1; k < trace.size(); ++k)
        CHECK(trace[k][1] >= trace[k - 1][1] - 1e-9);

    // manifest replay reproduces the fit byte-for-byte
    const std::string est_copy = dir.file("est.json") + ".bak";
    fs::copy_file(dir.file("est.json"), est_copy);
    REQUIRE(run_cli("rerun --manifest " + dir.file("est.json") + ".manifest.json", log) == 0);
    CHECK(same_bytes(dir.file("est.json"), est_copy));
}

TEST_CASE("eval subcommands emit machine-readable results") {
    TempDir dir;
    const std::string log = dir.file("log.txt");
    REQUIRE(run_cli("generate --n 6 --t-end 20 --g 0.4 --gamma 50 --p-sparse 0.5 --seed 3"
                    " --out-model " +
                        dir.file("m.json") + " --out-traj " + dir.file("t.json"),
                    log) == 0);
    REQUIRE(run_cli("fit-em --traj " + dir.file("t.json") + " --lambda 5 --out " +
                        dir.file("est.json"),
                    log) == 0);

    REQUIRE(run_cli("eval mse --true " + dir.file("m.json") + " --est " + dir.file("est.json"),
                    log) == 0);
    CHECK(std::stod(slurp(log)) >= 0.0);

    REQUIRE(run_cli("eval roc --true " + dir.file("m.json") + " --est " + dir.file("est.json") +
                        " --out " + dir.file("roc.csv"),
                    log) == 0);
    const double auc = std::stod(slurp(log));
    CHECK(auc >= 0.0);
    CHECK(auc <= 1.0);
    const auto roc = read_csv(dir.file("roc.csv"));
    REQUIRE(roc.size() >= 2);
    CHECK(roc.back()[1] == 1.0);
    CHECK(roc.back()[2] == 1.0);

    REQUIRE(run_cli("eval stats --traj " + dir.file("t.json") + " --order 3 --budget 10"
                    " --out " +
                        dir.file("stats.csv"),
                    log) == 0);
    const auto stats = read_csv(dir.file("stats.csv"));
    CHECK(stats.size() == 6 + 36 + 10);
}

TEST_CASE("sweep-lambda emits the requested grid") {
    TempDir dir;
    const std::string log = dir.file("log.txt");
    REQUIRE(run_cli("generate --n 4 --t-end 10 --g 0.4 --gamma 50 --p-sparse 0.5 --seed 5"
                    " --out-model " +
                        dir.file("m.json") + " --out-traj " + dir.file("t.json"),
                    log) == 0);
    REQUIRE(run_cli("sweep-lambda --traj " + dir.file("t.json") +
                        " --grid 2:50:3log --tol 1e-4 --out " + dir.file("sweep.csv"),
                    log) == 0);
    const auto sweep = read_csv(dir.file("sweep.csv"));
    REQUIRE(sweep.size() == 3);
    CHECK(sweep[0][0] == doctest::Approx(2.0));
    CHECK(sweep[2][0] == doctest::Approx(50.0));
    CHECK(sweep[1][0] == doctest::Approx(10.0));
}

}  // TEST_SUITE
