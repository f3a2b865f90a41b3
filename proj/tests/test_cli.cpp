#include "doctest.h"

#include "qdsim/config.hpp"
#include "qdsim/experiment.hpp"

#include <sys/wait.h>
#include <unistd.h>

#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <string>

#ifndef QDSIM_CLI_PATH
#error "QDSIM_CLI_PATH must be defined to the built binary"
#endif

namespace fs = std::filesystem;

namespace {

const std::string kBin = QDSIM_CLI_PATH;

struct TempDir {
    fs::path path;
    TempDir() {
        path = fs::temp_directory_path() /
               ("qdsim_cli_test_" + std::to_string(::getpid()) + "_" +
                std::to_string(counter()++));
        fs::create_directories(path);
    }
    ~TempDir() {
        std::error_code ec;
        fs::remove_all(path, ec);
    }
    static int& counter() {
        static int n = 0;
        return n;
    }
    std::string str(const std::string& name = "") const { return (path / name).string(); }
};

int run(const std::string& cmd) {
    const int status = std::system(cmd.c_str());
    REQUIRE(status != -1);
    REQUIRE(WIFEXITED(status));
    return WEXITSTATUS(status);
}

std::string slurp(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

void write_file(const std::string& path, const std::string& text) {
    std::ofstream out(path);
    out << text;
}

// small but fit-able workload
std::string quick_config() {
    return "drive.n_pulses = 20000\n"
           "drive.rep_rate_mhz = 20\n"
           "experiment.seed = 5\n";
}

}  // namespace

TEST_CASE("cli: --print-default-config emits a parseable, loadable document") {
    TempDir dir;
    const std::string out = dir.str("defaults.cfg");
    CHECK(run(kBin + " --print-default-config > " + out) == 0);
    const std::string text = slurp(out);
    REQUIRE(!text.empty());
    const auto cfg = qdsim::Config::parse(text);
    CHECK_NOTHROW(qdsim::load_experiment(cfg));
    CHECK(text.find("drive.rep_rate_mhz") != std::string::npos);
    CHECK(text.find("experiment.seed") != std::string::npos);
}

TEST_CASE("cli: no subcommand is an error") {
    CHECK(run(kBin + " > /dev/null 2>&1") == 1);
}

TEST_CASE("cli: budget subcommand prints the report and writes the table") {
    TempDir dir;
    const std::string out = dir.str("report.txt");
    CHECK(run(kBin + " budget --out " + dir.str() + " > " + out) == 0);
    const std::string report = slurp(out);
    CHECK(report.find("26%") != std::string::npos);
    const std::string csv = slurp(dir.str("budget.csv"));
    CHECK(csv.find("0.2583") != std::string::npos);
    CHECK(csv.find("0.4934") != std::string::npos);
}

TEST_CASE("cli: unknown configuration key exits with the config code") {
    TempDir dir;
    const std::string cfg = dir.str("bad.cfg");
    write_file(cfg, quick_config() + "experiment.no_such_knob = 1\n");
    CHECK(run(kBin + " --config " + cfg + " --out " + dir.str() +
              " budget > /dev/null 2>&1") == 2);
}

TEST_CASE("cli: invalid parameter value exits with the config code") {
    TempDir dir;
    const std::string cfg = dir.str("bad.cfg");
    write_file(cfg, "emitter.capture_rate_per_ns = -3\n");
    CHECK(run(kBin + " --config " + cfg + " --out " + dir.str() +
              " trpl > /dev/null 2>&1") == 2);
}

TEST_CASE("cli: unwritable output directory exits with the I/O code") {
    TempDir dir;
    const std::string blocker = dir.str("not_a_dir");
    write_file(blocker, "plain file\n");
    CHECK(run(kBin + " --out " + blocker + "/sub budget > /dev/null 2>&1") == 3);
}

TEST_CASE("cli: far too little data exits with the fit code") {
    TempDir dir;
    const std::string cfg = dir.str("tiny.cfg");
    write_file(cfg, "drive.n_pulses = 200\n"
                    "drive.rep_rate_mhz = 20\n");
    CHECK(run(kBin + " --config " + cfg + " --out " + dir.str() +
              " g2 > /dev/null 2>&1") == 4);
}

TEST_CASE("cli: identical config and seed give byte-identical outputs") {
    TempDir a, b;
    const std::string cfg = a.str("run.cfg");
    write_file(cfg, quick_config());
    CHECK(run(kBin + " --config " + cfg + " --out " + a.str() + " g2 > /dev/null") == 0);
    CHECK(run(kBin + " --config " + cfg + " --out " + b.str() + " g2 > /dev/null") == 0);
    for (const std::string name : {"g2_hist.csv", "trpl_hist.csv", "g2_fit.csv",
                                   "trpl_fit.csv"}) {
        const std::string left = slurp(a.str(name));
        REQUIRE(!left.empty());
        CHECK(left == slurp(b.str(name)));
    }
}

TEST_CASE("cli: --seed overrides the configured seed") {
    TempDir a, b;
    const std::string cfg = a.str("run.cfg");
    write_file(cfg, quick_config());
    CHECK(run(kBin + " --config " + cfg + " --seed 9 --out " + a.str() +
              " simulate > /dev/null") == 0);
    CHECK(run(kBin + " --config " + cfg + " --out " + b.str() +
              " simulate > /dev/null") == 0);
    const std::string left = slurp(a.str("stream.csv"));
    REQUIRE(!left.empty());
    CHECK(left != slurp(b.str("stream.csv")));
}

TEST_CASE("cli: waveguide sweep writes the dispersion table") {
    TempDir dir;
    const std::string cfg = dir.str("wg.cfg");
    write_file(cfg, "waveguide.diameters_nm = 310\n"
                    "waveguide.lambda_min_nm = 1300\n"
                    "waveguide.lambda_max_nm = 1320\n"
                    "waveguide.lambda_step_nm = 10\n");
    CHECK(run(kBin + " --config " + cfg + " --out " + dir.str() +
              " waveguide > /dev/null") == 0);
    const std::string csv = slurp(dir.str("waveguide.csv"));
    CHECK(csv.find("diameter_nm,wavelength_nm,n_eff,v_number,confinement,se_rate_relative") !=
          std::string::npos);
    // three wavelength rows plus the header
    int lines = 0;
    for (char ch : csv)
        if (ch == '\n') ++lines;
    CHECK(lines == 4);
}
