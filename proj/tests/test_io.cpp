#include "doctest.h"

#include "qdsim/io.hpp"

#include <cstdio>
#include <fstream>
#include <string>

using namespace qdsim;

namespace {

struct TempFile {
    std::string path;
    explicit TempFile(const std::string& name) {
        path = std::string(std::getenv("TMPDIR") ? std::getenv("TMPDIR") : "/tmp") + "/" + name;
    }
    ~TempFile() { std::remove(path.c_str()); }
};

std::string slurp(const std::string& path) {
    std::ifstream in(path);
    std::string all((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
    return all;
}

}  // namespace

TEST_CASE("io: photon stream round-trips records and metadata") {
    PhotonStream s;
    s.meta = {123, 456, 789, 77.0};
    s.records = {{100.5, Line::XX, 1301.40123456789},
                 {250.25, Line::X, 1301.28},
                 {90000.0, Line::PShell, 1234.5}};
    TempFile f("stream_roundtrip.csv");
    write_photon_stream(f.path, s);
    const auto r = read_photon_stream(f.path);
    REQUIRE(r.records.size() == s.records.size());
    for (std::size_t i = 0; i < s.records.size(); ++i) {
        CHECK(r.records[i].time_ps == s.records[i].time_ps);
        CHECK(r.records[i].line == s.records[i].line);
        CHECK(r.records[i].wavelength_nm == s.records[i].wavelength_nm);
    }
    CHECK(r.meta.seed == 123);
    CHECK(r.meta.emitter_digest == 456);
    CHECK(r.meta.drive_digest == 789);
    CHECK(r.meta.temperature_K == 77.0);

    const auto text = slurp(f.path);
    CHECK(text.find("# seed = 123") != std::string::npos);
    CHECK(text.find("time_ps,line,wavelength_nm") != std::string::npos);
}

TEST_CASE("io: histogram round-trips counts, kind and geometry") {
    Histogram h;
    h.bin_width_ps = 25.0;
    h.origin_ps = -500.0;
    h.kind = HistKind::Coincidence;
    h.counts = {1, 0, 7, 42, 0, 3};
    TempFile f("hist_roundtrip.csv");
    write_histogram(f.path, h);
    const auto r = read_histogram(f.path);
    CHECK(r.bin_width_ps == 25.0);
    CHECK(r.origin_ps == -500.0);
    CHECK(r.kind == HistKind::Coincidence);
    CHECK(r.counts == h.counts);
    CHECK(slurp(f.path).find("tau_ps,counts") != std::string::npos);

    h.kind = HistKind::Decay;
    h.origin_ps = 0.0;
    write_histogram(f.path, h);
    const auto d = read_histogram(f.path);
    CHECK(d.kind == HistKind::Decay);
    CHECK(slurp(f.path).find("t_ps,counts") != std::string::npos);
}

TEST_CASE("io: click stream file carries both channels") {
    ClickStream a, b;
    a.channel = 0;
    b.channel = 1;
    a.times_ps = {1.0, 2.0};
    b.times_ps = {1.5};
    TempFile f("clicks.csv");
    write_click_streams(f.path, a, b);
    const auto text = slurp(f.path);
    CHECK(text.find("channel,time_ps") != std::string::npos);
    CHECK(text.find("0,1\n") != std::string::npos);
    CHECK(text.find("1,1.5\n") != std::string::npos);
}

TEST_CASE("io: sweep rows serialize with the documented header") {
    SweepRow row;
    row.temperature_K = 220.0;
    row.power_ratio = 0.25;
    row.g2_zero = 0.34;
    SweepRow failed;
    failed.temperature_K = 300.0;
    failed.error = "fit did not converge";
    TempFile f("sweep.csv");
    write_sweep_rows(f.path, {row, failed});
    const auto text = slurp(f.path);
    CHECK(text.find("T_K,power_ratio,wavelength_nm,linewidth_uev,filter_width_nm,"
                    "lifetime_ns,g2_zero,g2_integrated,background,residual,error") !=
          std::string::npos);
    CHECK(text.find("fit did not converge") != std::string::npos);
}

TEST_CASE("io: unreadable and malformed files raise IoError") {
    CHECK_THROWS_AS(read_photon_stream("/nonexistent/dir/file.csv"), IoError);
    CHECK_THROWS_AS(read_histogram("/nonexistent/dir/file.csv"), IoError);

    TempFile f("bad_header.csv");
    {
        std::ofstream out(f.path);
        out << "wrong,header\n1,2,3\n";
    }
    CHECK_THROWS_AS(read_photon_stream(f.path), IoError);

    TempFile g("no_meta.csv");
    {
        std::ofstream out(g.path);
        out << "tau_ps,counts\n0,1\n";  // histogram without geometry metadata
    }
    CHECK_THROWS_AS(read_histogram(g.path), IoError);
}
