// Achievable-rate estimators: the mismatched-decoding mutual-information
// lower bound evaluated sample-wise under a fitted Gaussian auxiliary
// channel, and the bit-wise generalized mutual information computed from
// LLRs, plus the train/eval-split estimation protocol and sweep driver.
//
// All rates are reported in bit per 4D symbol; a model of dimension d
// contributes the sum of its 4/d sub-channel rates. Per-sample terms are
// accumulated in natural log with compensated summation in fixed sample
// order and converted to bits once at aggregation.
#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "airkit/batch.hpp"
#include "airkit/channel_models.hpp"
#include "airkit/channel_sim.hpp"
#include "airkit/constellation.hpp"
#include "airkit/mathutil.hpp"

namespace airkit {

enum class Estimator { Mi, Gmi };

std::string to_string(Estimator e);

struct RateEstimate {
    double rate_bit_per_4d = 0.0;   // mean of per_batch_rates
    std::vector<double> per_batch_rates;
    std::vector<std::size_t> eval_counts;
    std::vector<std::size_t> train_counts;
    Estimator estimator = Estimator::Mi;
    ModelKind kind;
    MeanMode mean_mode_used = MeanMode::Static;
    double stderr_rate = 0.0;       // cross-batch; split-half for one batch
    bool negative = false;          // a mismatched model can go below zero
    // Per sub-channel contribution, averaged over batches; sums to the rate.
    std::vector<double> per_subchannel_rates;
    std::uint64_t split_seed = 0;
};

// Symbol-wise rate (1/N) sum log2 q(y|x)/q(y) summed over sub-channels.
// Refuses to evaluate on the model's own training data unless
// allow_overlap is set.
RateEstimate mi_rate(const SymbolBatch& eval, const AuxChannelModel& model,
                     bool allow_overlap = false);

// Per-bit log-likelihood ratios of one received 4D vector; positive values
// favor bit 1. Output has bits_per_4d() entries, X-polarization bits first.
// The model dimension must be 2 or 4.
std::vector<double> compute_llrs(std::span<const double> y4, const AuxChannelModel& model,
                                 const Constellation& c);

// Per-bit penalty of the bit-wise decoder in bits: log2(1 + e^{+-LLR}) with
// the sign selected by the transmitted bit.
inline double gmi_bit_penalty_bits(double llr, int transmitted_bit) {
    return log1pexp(transmitted_bit ? -llr : llr) * kLog2E;
}

// Bit-wise rate m - (1/N) sum_k sum_i log2(1 + e^{(-1)^{b_ki} LLR_ki}).
RateEstimate gmi_rate(const SymbolBatch& eval, const AuxChannelModel& model,
                      const Constellation& c, bool allow_overlap = false);

struct EstimateOptions {
    double split_ratio = 0.5;       // train fraction of each batch
    std::uint64_t split_seed = 17;  // per-batch seed is split_seed + batch_id
    bool train_equals_eval = false; // diagnostic override: fit and evaluate on
                                    // the full batch (overestimates the rate)
    FitOptions fit;
};

// The estimation protocol: per batch, a seeded disjoint train/eval split,
// fit on the training half, evaluate on the held-out half; the final rate
// is the mean over batches.
RateEstimate double_monte_carlo(std::span<const SymbolBatch> batches, const ModelKind& kind,
                                Estimator estimator, const Constellation& c,
                                const EstimateOptions& options = {});

struct ResultRow {
    std::string scenario;
    std::string model;
    std::string estimator;
    std::string mean_mode;
    std::size_t n_train = 0;
    std::size_t n_eval = 0;
    double rate = 0.0;
    double stderr_rate = 0.0;
    std::uint64_t seed = 0;
};

struct SweepSpec {
    std::vector<ChannelScenario> scenarios;
    std::vector<ModelKind> mi_kinds;
    // GMI variants as (dimension, mean mode); the canonical pair is
    // {2, static} and {4, static}.
    std::vector<std::pair<int, MeanMode>> gmi_variants;
    int n_batches = 4;
    EstimateOptions options;
    bool parallel = true;
};

// Evaluate the full scenario x estimator cross-product. All estimators of
// one scenario see identical generated batches and identical splits; rows
// come out in declared order regardless of completion order.
std::vector<ResultRow> rate_sweep(const Constellation& c, const SweepSpec& spec);

ResultRow to_row(const RateEstimate& est, const std::string& scenario_text,
                 std::size_t n_train, std::size_t n_eval, std::uint64_t seed);

}  // namespace airkit
