// Persistence: binary symbol-batch files, text model serialization, run
// configuration loading, and the results CSV. All formats are versioned;
// round trips are lossless.
//
// Batch file layout (all integers little-endian):
//   magic "AIRBATCH", u32 version, u32 d, u32 m4, u64 n, u64 seed,
//   u32 batch_id, then three length-prefixed strings (constellation name,
//   scenario text, split tag), then n records of u16 tx index followed by
//   four f64 coordinates.
#pragma once

#include <cstdint>
#include <iosfwd>
#include <span>
#include <string>
#include <vector>

#include "airkit/batch.hpp"
#include "airkit/channel_models.hpp"
#include "airkit/channel_sim.hpp"
#include "airkit/constellation.hpp"
#include "airkit/rate_estimators.hpp"

namespace airkit {

struct LoadedBatch {
    SymbolBatch batch;
    Constellation constellation;
};

// "QPSK" or "<order>QAM", e.g. "16QAM".
Constellation constellation_from_name(const std::string& name);

void write_batch(const SymbolBatch& batch, const Constellation& c, const std::string& path);

// Rejects bad magic, unknown versions, out-of-range indices, and files whose
// length disagrees with the header (naming the byte offset).
LoadedBatch read_batch(const std::string& path);

// Documented lab-capture fallback: CSV with a "tx_index,y1,y2,y3,y4" header
// line and one sample per row.
LoadedBatch read_batch_csv(const std::string& path, const Constellation& c);

// Self-describing text serialization of a fitted model; decimal fields use
// shortest round-trip formatting, so write/read/write is byte-identical.
std::string model_to_text(const AuxChannelModel& model);
void write_model(const AuxChannelModel& model, const std::string& path);
AuxChannelModel model_from_text(const std::string& text);
AuxChannelModel read_model(const std::string& path);

struct RunConfig {
    std::string constellation = "16QAM";
    std::vector<ChannelScenario> scenarios;
    std::vector<std::string> inputs;          // batch files
    std::vector<ModelKind> models;            // empty means the five canonical kinds
    bool estimate_mi = true;
    bool estimate_gmi = true;
    std::string gmi_means = "static";         // static | adaptive | both
    double split_ratio = 0.5;
    std::uint64_t split_seed = 17;
    int batches = 4;
    std::string output_csv;
};

// Strict key=value format, '#' comments. Unknown keys are errors; referenced
// input files must exist at load time.
RunConfig load_config(const std::string& path);

// Results CSV: '#'-prefixed config echo, a header line, then one row per
// estimate. Field values never contain commas.
std::string results_to_csv(std::span<const ResultRow> rows,
                           std::span<const std::string> config_echo);
void write_results_csv(std::span<const ResultRow> rows,
                       std::span<const std::string> config_echo, const std::string& path);

}  // namespace airkit
