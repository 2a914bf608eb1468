#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <cstdlib>
#include <filesystem>
#include <fstream>

#include "doctest.h"
#include "dsde/csv.hpp"

using namespace dsde;
namespace fs = std::filesystem;

namespace {

std::string binary() {
    const char* bin = std::getenv("DSDE_BIN");
    REQUIRE_MESSAGE(bin != nullptr, "DSDE_BIN must point at the CLI binary");
    return bin;
}

int run(const std::string& args) {
    const std::string cmd = binary() + " " + args + " > /dev/null 2>&1";
    const int status = std::system(cmd.c_str());
    return WEXITSTATUS(status);
}

struct TempDir {
    fs::path dir;
    TempDir() {
        dir = fs::temp_directory_path() / ("dsde_cli_" + std::to_string(::getpid()));
        fs::remove_all(dir);
        fs::create_directories(dir);
    }
    ~TempDir() { fs::remove_all(dir); }
    std::string sub(const std::string& name) const { return (dir / name).string(); }
};

}  // namespace

TEST_CASE("simulate writes paths and a manifest, byte-identical across reruns") {
    TempDir tmp;
    const std::string common =
        " --grid.tau 4 --grid.horizon 30 --grid.dt 1 --n-paths 3 --seed 9";
    CHECK(run("simulate --out-dir " + tmp.sub("a") + common) == 0);
    CHECK(run("simulate --out-dir " + tmp.sub("b") + common + " --threads 3") == 0);
    const auto a = read_text_file(tmp.sub("a") + "/paths.csv");
    const auto b = read_text_file(tmp.sub("b") + "/paths.csv");
    CHECK(a == b);
    CHECK(fs::exists(tmp.sub("a") + "/manifest.json"));

    const PathSet paths = read_paths_csv(tmp.sub("a") + "/paths.csv");
    CHECK(paths.paths.size() == 3);
    CHECK(paths.grid.step_count == 30);
}

TEST_CASE("train then predict round trip") {
    TempDir tmp;
    CHECK(run("simulate --out-dir " + tmp.sub("sim") +
              " --grid.tau 4 --grid.horizon 120 --grid.dt 1 --n-paths 12 --seed 4") == 0);
    CHECK(run("train --out-dir " + tmp.sub("model") + " --data " + tmp.sub("sim") +
              "/paths.csv --lags 4 --horizon 1 --net.width 6"
              " --sgd.drift-iters 40 --sgd.aleatoric-iters 30 --sgd.epistemic-iters 5"
              " --sbo.count 100 --seed 4") == 0);
    CHECK(fs::exists(tmp.sub("model") + "/model.json"));
    CHECK(fs::exists(tmp.sub("model") + "/train_log.csv"));

    // history file: last rows of the simulated set
    std::ofstream hist(tmp.sub("history.csv"));
    hist << "t,x1,x2\n1,0.5,0.2\n2,0.6,0.1\n3,0.4,0.0\n4,0.55,0.05\n";
    hist.close();
    CHECK(run("predict --out-dir " + tmp.sub("pred") + " --model " + tmp.sub("model") +
              "/model.json --history " + tmp.sub("history.csv") + " --steps 3") == 0);
    const CsvTable pred = read_csv(tmp.sub("pred") + "/prediction.csv");
    CHECK(pred.rows == 3);
    CHECK(pred.columns.size() == 7);  // t,truth,mean,std_a,std_e,ci_lo,ci_hi
}

TEST_CASE("exit codes") {
    TempDir tmp;
    SUBCASE("bad config is exit 1") {
        CHECK(run("simulate --grid.dt 0 --out-dir " + tmp.sub("x")) == 1);
        CHECK(run("nosuchcommand") == 1);
    }
    SUBCASE("insufficient history is exit 4") {
        CHECK(run("simulate --out-dir " + tmp.sub("sim") +
                  " --grid.tau 4 --grid.horizon 60 --grid.dt 1 --n-paths 6 --seed 1") == 0);
        CHECK(run("train --out-dir " + tmp.sub("m") + " --data " + tmp.sub("sim") +
                  "/paths.csv --lags 4 --horizon 1 --net.width 4 --sgd.drift-iters 10"
                  " --sgd.aleatoric-iters 5 --sgd.epistemic-iters 2 --sbo.count 50"
                  " --seed 1") == 0);
        std::ofstream hist(tmp.sub("short.csv"));
        hist << "t,x1,x2\n1,0.5,0.2\n";
        hist.close();
        CHECK(run("predict --out-dir " + tmp.sub("p") + " --model " + tmp.sub("m") +
                  "/model.json --history " + tmp.sub("short.csv") + " --steps 2") == 4);
    }
}

TEST_CASE("ood command generates labeled windows") {
    TempDir tmp;
    CHECK(run("simulate --out-dir " + tmp.sub("sim") +
              " --grid.tau 4 --grid.horizon 80 --grid.dt 1 --n-paths 4 --seed 2") == 0);
    CHECK(run("ood --out-dir " + tmp.sub("ood") + " --data " + tmp.sub("sim") +
              "/paths.csv --lags 4 --count 50 --seed 2") == 0);
    const WindowSet windows = read_windows_csv(tmp.sub("ood") + "/ood_windows.csv");
    CHECK(windows.rows() == 50);
    for (auto m : windows.ood_mask) CHECK(m == 1);
}
