#pragma once

#include <map>
#include <stdexcept>
#include <string>
#include <vector>

#include "qdsim/detection.hpp"
#include "qdsim/emitter.hpp"
#include "qdsim/experiment.hpp"

namespace qdsim {

struct IoError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// Ordered key -> value pairs emitted as "# key = value" header lines.
using MetaBlock = std::vector<std::pair<std::string, std::string>>;

MetaBlock stream_meta_block(const StreamMeta& meta);

// CSV columns: time_ps,line,wavelength_nm
void write_photon_stream(const std::string& path, const PhotonStream& stream,
                         const MetaBlock& extra = {});
PhotonStream read_photon_stream(const std::string& path);

// CSV columns: channel,time_ps (both HBT arms interleaved by time per channel)
void write_click_streams(const std::string& path, const ClickStream& a, const ClickStream& b,
                         const MetaBlock& extra = {});

// CSV columns: tau_ps,counts (coincidence) or t_ps,counts (decay)
void write_histogram(const std::string& path, const Histogram& hist,
                     const MetaBlock& extra = {});
Histogram read_histogram(const std::string& path);

void write_sweep_rows(const std::string& path, const std::vector<SweepRow>& rows,
                      const MetaBlock& extra = {});
void write_power_rows(const std::string& path, const std::vector<PowerRow>& rows,
                      const MetaBlock& extra = {});

// Generic small-table writer used by the report commands.
void write_table(const std::string& path, const MetaBlock& meta, const std::string& header,
                 const std::vector<std::string>& rows);

}  // namespace qdsim
