#include "qdsim/io.hpp"

#include <cinttypes>
#include <cstdio>
#include <fstream>
#include <sstream>

namespace qdsim {

namespace {

std::ofstream open_out(const std::string& path) {
    std::ofstream out(path);
    if (!out) throw IoError("cannot write file: " + path);
    return out;
}

std::ifstream open_in(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw IoError("cannot read file: " + path);
    return in;
}

void write_meta(std::ofstream& out, const MetaBlock& meta) {
    for (const auto& [k, v] : meta) out << "# " << k << " = " << v << "\n";
}

std::string fmt(double v) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

}  // namespace

MetaBlock stream_meta_block(const StreamMeta& meta) {
    return {
        {"seed", std::to_string(meta.seed)},
        {"emitter_digest", std::to_string(meta.emitter_digest)},
        {"drive_digest", std::to_string(meta.drive_digest)},
        {"temperature_K", fmt(meta.temperature_K)},
    };
}

void write_photon_stream(const std::string& path, const PhotonStream& stream,
                         const MetaBlock& extra) {
    auto out = open_out(path);
    write_meta(out, stream_meta_block(stream.meta));
    write_meta(out, extra);
    out << "time_ps,line,wavelength_nm\n";
    for (const auto& r : stream.records)
        out << fmt(r.time_ps) << ',' << to_string(r.line) << ',' << fmt(r.wavelength_nm) << "\n";
    if (!out) throw IoError("write failed: " + path);
}

PhotonStream read_photon_stream(const std::string& path) {
    auto in = open_in(path);
    PhotonStream stream;
    std::string line;
    bool saw_header = false;
    while (std::getline(in, line)) {
        if (line.empty()) continue;
        if (line[0] == '#') {
            std::istringstream meta(line.substr(1));
            std::string key, eq, value;
            if (meta >> key >> eq >> value && eq == "=") {
                if (key == "seed") stream.meta.seed = std::stoull(value);
                else if (key == "emitter_digest") stream.meta.emitter_digest = std::stoull(value);
                else if (key == "drive_digest") stream.meta.drive_digest = std::stoull(value);
                else if (key == "temperature_K") stream.meta.temperature_K = std::stod(value);
            }
            continue;
        }
        if (!saw_header) {
            if (line != "time_ps,line,wavelength_nm")
                throw IoError("unexpected stream header in " + path + ": " + line);
            saw_header = true;
            continue;
        }
        std::istringstream row(line);
        std::string t, l, w;
        if (!std::getline(row, t, ',') || !std::getline(row, l, ',') || !std::getline(row, w))
            throw IoError("malformed stream row in " + path + ": " + line);
        PhotonRecord rec;
        rec.time_ps = std::stod(t);
        rec.line = line_from_string(l);
        rec.wavelength_nm = std::stod(w);
        stream.records.push_back(rec);
    }
    if (!saw_header) throw IoError("missing stream header in " + path);
    return stream;
}

void write_click_streams(const std::string& path, const ClickStream& a, const ClickStream& b,
                         const MetaBlock& extra) {
    auto out = open_out(path);
    write_meta(out, stream_meta_block(a.meta));
    write_meta(out, extra);
    out << "channel,time_ps\n";
    for (const ClickStream* ch : {&a, &b})
        for (double t : ch->times_ps) out << ch->channel << ',' << fmt(t) << "\n";
    if (!out) throw IoError("write failed: " + path);
}

void write_histogram(const std::string& path, const Histogram& hist, const MetaBlock& extra) {
    auto out = open_out(path);
    MetaBlock meta = {
        {"kind", hist.kind == HistKind::Coincidence ? "coincidence" : "decay"},
        {"bin_width_ps", fmt(hist.bin_width_ps)},
        {"origin_ps", fmt(hist.origin_ps)},
    };
    write_meta(out, meta);
    write_meta(out, extra);
    out << (hist.kind == HistKind::Coincidence ? "tau_ps,counts\n" : "t_ps,counts\n");
    for (std::size_t i = 0; i < hist.counts.size(); ++i)
        out << fmt(hist.bin_center(i)) << ',' << hist.counts[i] << "\n";
    if (!out) throw IoError("write failed: " + path);
}

Histogram read_histogram(const std::string& path) {
    auto in = open_in(path);
    Histogram h;
    std::string line;
    bool saw_header = false;
    bool have_kind = false, have_bw = false, have_origin = false;
    while (std::getline(in, line)) {
        if (line.empty()) continue;
        if (line[0] == '#') {
            std::istringstream meta(line.substr(1));
            std::string key, eq, value;
            if (meta >> key >> eq >> value && eq == "=") {
                if (key == "kind") {
                    h.kind = value == "decay" ? HistKind::Decay : HistKind::Coincidence;
                    have_kind = true;
                } else if (key == "bin_width_ps") {
                    h.bin_width_ps = std::stod(value);
                    have_bw = true;
                } else if (key == "origin_ps") {
                    h.origin_ps = std::stod(value);
                    have_origin = true;
                }
            }
            continue;
        }
        if (!saw_header) {
            saw_header = true;
            continue;
        }
        const auto comma = line.find(',');
        if (comma == std::string::npos)
            throw IoError("malformed histogram row in " + path + ": " + line);
        h.counts.push_back(std::stoull(line.substr(comma + 1)));
    }
    if (!saw_header || !have_kind || !have_bw || !have_origin)
        throw IoError("incomplete histogram file: " + path);
    return h;
}

void write_sweep_rows(const std::string& path, const std::vector<SweepRow>& rows,
                      const MetaBlock& extra) {
    auto out = open_out(path);
    write_meta(out, extra);
    out << "T_K,power_ratio,wavelength_nm,linewidth_uev,filter_width_nm,lifetime_ns,"
           "g2_zero,g2_integrated,background,residual,error\n";
    for (const auto& r : rows) {
        out << fmt(r.temperature_K) << ',' << fmt(r.power_ratio) << ','
            << fmt(r.wavelength_nm) << ',' << fmt(r.linewidth_uev) << ','
            << fmt(r.filter_width_nm) << ',' << fmt(r.lifetime_ns) << ',' << fmt(r.g2_zero)
            << ',' << fmt(r.g2_int) << ',' << fmt(r.background) << ',' << fmt(r.residual)
            << ',' << r.error << "\n";
    }
    if (!out) throw IoError("write failed: " + path);
}

void write_power_rows(const std::string& path, const std::vector<PowerRow>& rows,
                      const MetaBlock& extra) {
    auto out = open_out(path);
    write_meta(out, extra);
    out << "power_ratio,detected_rate_mcps,g2_zero,g2_integrated,error\n";
    for (const auto& r : rows)
        out << fmt(r.power_ratio) << ',' << fmt(r.detected_rate_mcps) << ',' << fmt(r.g2_zero)
            << ',' << fmt(r.g2_int) << ',' << r.error << "\n";
    if (!out) throw IoError("write failed: " + path);
}

void write_table(const std::string& path, const MetaBlock& meta, const std::string& header,
                 const std::vector<std::string>& rows) {
    auto out = open_out(path);
    write_meta(out, meta);
    out << header << "\n";
    for (const auto& r : rows) out << r << "\n";
    if (!out) throw IoError("write failed: " + path);
}

}  // namespace qdsim
