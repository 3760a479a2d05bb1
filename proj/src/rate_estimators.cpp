#include "airkit/rate_estimators.hpp"

#include <cmath>
#include <future>
#include <numeric>
#include <stdexcept>

namespace airkit {

namespace {

void check_eval_inputs(const SymbolBatch& eval, const AuxChannelModel& model,
                       bool allow_overlap) {
    eval.validate(model.constellation().size_4d());
    if (!allow_overlap && model.trained_on().overlaps(eval.meta))
        throw std::runtime_error(
            "rate estimation: evaluation data overlaps the model's training data (" +
            eval.meta.scenario + ", batch " + std::to_string(eval.meta.batch_id) +
            "); pass allow_overlap to force");
}

void finalize(RateEstimate& est, int m_bits) {
    est.rate_bit_per_4d =
        std::accumulate(est.per_batch_rates.begin(), est.per_batch_rates.end(), 0.0) /
        static_cast<double>(est.per_batch_rates.size());
    est.negative = est.rate_bit_per_4d < 0.0;
    (void)m_bits;
}

// Sample standard deviation of per-batch rates over sqrt(count).
double cross_batch_stderr(std::span<const double> rates) {
    const std::size_t b = rates.size();
    const double mean = std::accumulate(rates.begin(), rates.end(), 0.0) / static_cast<double>(b);
    double ss = 0.0;
    for (double r : rates) ss += (r - mean) * (r - mean);
    return std::sqrt(ss / static_cast<double>(b - 1) / static_cast<double>(b));
}

}  // namespace

std::string to_string(Estimator e) { return e == Estimator::Mi ? "MI" : "GMI"; }

RateEstimate mi_rate(const SymbolBatch& eval, const AuxChannelModel& model,
                     bool allow_overlap) {
    check_eval_inputs(eval, model, allow_overlap);
    const SymbolView& view = model.view();
    const int d = model.d();
    const int mp = view.point_count;
    const std::size_t n = eval.size();
    const double log_mp = std::log(static_cast<double>(mp));

    std::vector<KahanSum> sub_sums(static_cast<std::size_t>(view.n_sub));
    std::vector<double> lp(static_cast<std::size_t>(mp));
    for (std::size_t i = 0; i < n; ++i) {
        const double* y = eval.rx.data() + 4 * i;
        for (int t = 0; t < view.n_sub; ++t) {
            model.logpdf_all(t, y + t * d, lp.data());
            const int xj = view.sub_index(eval.tx[i], t);
            const double info = lp[static_cast<std::size_t>(xj)] - (logsumexp(lp) - log_mp);
            sub_sums[static_cast<std::size_t>(t)].add(info);
        }
    }

    RateEstimate est;
    est.estimator = Estimator::Mi;
    est.kind = model.kind();
    est.mean_mode_used = model.mean_mode();
    est.eval_counts = {n};
    est.per_subchannel_rates.resize(static_cast<std::size_t>(view.n_sub));
    double total = 0.0;
    for (int t = 0; t < view.n_sub; ++t) {
        const double r = sub_sums[static_cast<std::size_t>(t)].value() /
                         static_cast<double>(n) * kLog2E;
        est.per_subchannel_rates[static_cast<std::size_t>(t)] = r;
        total += r;
    }
    est.per_batch_rates = {total};
    finalize(est, model.constellation().bits_per_4d());
    return est;
}

namespace {

// Bit partition of one sub-channel's constellation: for every bit of the
// sub-label, the point indices carrying 1 and 0.
struct BitSets {
    int bits = 0;
    std::vector<std::vector<int>> ones;
    std::vector<std::vector<int>> zeros;
};

BitSets make_bit_sets(const SymbolView& view) {
    if (view.d != 2 && view.d != 4)
        throw std::invalid_argument("LLR computation requires a 2D or 4D model");
    BitSets sets;
    sets.bits = view.bits_per_point();
    sets.ones.resize(static_cast<std::size_t>(sets.bits));
    sets.zeros.resize(static_cast<std::size_t>(sets.bits));
    for (int j = 0; j < view.point_count; ++j) {
        const std::uint32_t lab = view.sub_labels[static_cast<std::size_t>(j)];
        for (int k = 0; k < sets.bits; ++k) {
            if ((lab >> (sets.bits - 1 - k)) & 1u)
                sets.ones[static_cast<std::size_t>(k)].push_back(j);
            else
                sets.zeros[static_cast<std::size_t>(k)].push_back(j);
        }
    }
    for (int k = 0; k < sets.bits; ++k) {
        if (sets.ones[static_cast<std::size_t>(k)].empty() ||
            sets.zeros[static_cast<std::size_t>(k)].empty())
            throw std::logic_error("LLR computation: bit " + std::to_string(k) +
                                   " has an empty constellation subset");
    }
    return sets;
}

double set_logsumexp(std::span<const double> lp, std::span<const int> idx,
                     std::vector<double>& scratch) {
    scratch.clear();
    for (int j : idx) scratch.push_back(lp[static_cast<std::size_t>(j)]);
    return logsumexp(scratch);
}

}  // namespace

std::vector<double> compute_llrs(std::span<const double> y4, const AuxChannelModel& model,
                                 const Constellation& c) {
    if (y4.size() != 4)
        throw std::invalid_argument("compute_llrs: expected a 4D received vector");
    const SymbolView& view = model.view();
    const BitSets sets = make_bit_sets(view);
    const int d = model.d();

    std::vector<double> llrs(static_cast<std::size_t>(c.bits_per_4d()));
    std::vector<double> lp(static_cast<std::size_t>(view.point_count));
    std::vector<double> scratch;
    for (int t = 0; t < view.n_sub; ++t) {
        model.logpdf_all(t, y4.data() + t * d, lp.data());
        for (int k = 0; k < sets.bits; ++k) {
            llrs[static_cast<std::size_t>(t * sets.bits + k)] =
                set_logsumexp(lp, sets.ones[static_cast<std::size_t>(k)], scratch) -
                set_logsumexp(lp, sets.zeros[static_cast<std::size_t>(k)], scratch);
        }
    }
    return llrs;
}

RateEstimate gmi_rate(const SymbolBatch& eval, const AuxChannelModel& model,
                      const Constellation& c, bool allow_overlap) {
    check_eval_inputs(eval, model, allow_overlap);
    if (c.size_2d() != model.constellation().size_2d())
        throw std::invalid_argument("gmi_rate: constellation does not match the model");
    const SymbolView& view = model.view();
    const BitSets sets = make_bit_sets(view);
    const int d = model.d();
    const std::size_t n = eval.size();

    std::vector<KahanSum> sub_penalties(static_cast<std::size_t>(view.n_sub));
    std::vector<double> lp(static_cast<std::size_t>(view.point_count));
    std::vector<double> scratch;
    for (std::size_t i = 0; i < n; ++i) {
        const double* y = eval.rx.data() + 4 * i;
        for (int t = 0; t < view.n_sub; ++t) {
            model.logpdf_all(t, y + t * d, lp.data());
            const int xj = view.sub_index(eval.tx[i], t);
            const std::uint32_t lab = view.sub_labels[static_cast<std::size_t>(xj)];
            for (int k = 0; k < sets.bits; ++k) {
                const double llr =
                    set_logsumexp(lp, sets.ones[static_cast<std::size_t>(k)], scratch) -
                    set_logsumexp(lp, sets.zeros[static_cast<std::size_t>(k)], scratch);
                const int bit = (lab >> (sets.bits - 1 - k)) & 1u;
                sub_penalties[static_cast<std::size_t>(t)].add(log1pexp(bit ? -llr : llr));
            }
        }
    }

    RateEstimate est;
    est.estimator = Estimator::Gmi;
    est.kind = model.kind();
    est.mean_mode_used = model.mean_mode();
    est.eval_counts = {n};
    est.per_subchannel_rates.resize(static_cast<std::size_t>(view.n_sub));
    double total = 0.0;
    for (int t = 0; t < view.n_sub; ++t) {
        const double r = sets.bits - sub_penalties[static_cast<std::size_t>(t)].value() /
                                         static_cast<double>(n) * kLog2E;
        est.per_subchannel_rates[static_cast<std::size_t>(t)] = r;
        total += r;
    }
    est.per_batch_rates = {total};
    finalize(est, c.bits_per_4d());
    return est;
}

namespace {

RateEstimate evaluate_once(const SymbolBatch& eval, const AuxChannelModel& model,
                           Estimator estimator, const Constellation& c,
                           bool allow_overlap) {
    return estimator == Estimator::Mi ? mi_rate(eval, model, allow_overlap)
                                      : gmi_rate(eval, model, c, allow_overlap);
}

// Standard error fallback for a single batch: evaluate the two halves of
// the eval set separately.
double split_half_stderr(const SymbolBatch& eval, const AuxChannelModel& model,
                         Estimator estimator, const Constellation& c) {
    const std::size_t n = eval.size();
    if (n < 4) return 0.0;
    std::vector<std::uint32_t> idx(n);
    std::iota(idx.begin(), idx.end(), 0u);
    const SymbolBatch first =
        eval.take({idx.data(), n / 2}, eval.meta.split + ":half0");
    const SymbolBatch second =
        eval.take({idx.data() + n / 2, n - n / 2}, eval.meta.split + ":half1");
    const double r0 = evaluate_once(first, model, estimator, c, true).rate_bit_per_4d;
    const double r1 = evaluate_once(second, model, estimator, c, true).rate_bit_per_4d;
    return std::abs(r0 - r1) / 2.0;
}

}  // namespace

RateEstimate double_monte_carlo(std::span<const SymbolBatch> batches, const ModelKind& kind,
                                Estimator estimator, const Constellation& c,
                                const EstimateOptions& options) {
    if (batches.empty())
        throw std::invalid_argument("double_monte_carlo: need at least one batch");

    RateEstimate out;
    out.estimator = estimator;
    out.split_seed = options.split_seed;

    double split_half = 0.0;
    for (std::size_t b = 0; b < batches.size(); ++b) {
        const SymbolBatch& batch = batches[b];
        RateEstimate one;
        if (options.train_equals_eval) {
            const AuxChannelModel model = fit(kind, c, batch, options.fit);
            one = evaluate_once(batch, model, estimator, c, /*allow_overlap=*/true);
            out.train_counts.push_back(batch.size());
        } else {
            const TrainEvalSplit split = split_batch(
                batch, options.split_ratio, options.split_seed + batch.meta.batch_id);
            const AuxChannelModel model = fit(kind, c, split.train, options.fit);
            one = evaluate_once(split.eval, model, estimator, c, false);
            out.train_counts.push_back(split.train.size());
            if (batches.size() == 1) {
                const AuxChannelModel& m = model;
                split_half = split_half_stderr(split.eval, m, estimator, c);
            }
        }
        out.per_batch_rates.push_back(one.rate_bit_per_4d);
        out.eval_counts.push_back(one.eval_counts[0]);
        out.kind = one.kind;
        out.mean_mode_used = one.mean_mode_used;
        if (out.per_subchannel_rates.empty())
            out.per_subchannel_rates.assign(one.per_subchannel_rates.size(), 0.0);
        for (std::size_t t = 0; t < one.per_subchannel_rates.size(); ++t)
            out.per_subchannel_rates[t] += one.per_subchannel_rates[t];
    }
    for (double& r : out.per_subchannel_rates) r /= static_cast<double>(batches.size());

    finalize(out, c.bits_per_4d());
    out.stderr_rate = batches.size() >= 2 ? cross_batch_stderr(out.per_batch_rates)
                                          : split_half;
    return out;
}

ResultRow to_row(const RateEstimate& est, const std::string& scenario_text,
                 std::size_t n_train, std::size_t n_eval, std::uint64_t seed) {
    ResultRow row;
    row.scenario = scenario_text;
    row.model = est.kind.name();
    row.estimator = to_string(est.estimator);
    row.mean_mode = to_string(est.mean_mode_used);
    row.n_train = n_train;
    row.n_eval = n_eval;
    row.rate = est.rate_bit_per_4d;
    row.stderr_rate = est.stderr_rate;
    row.seed = seed;
    return row;
}

std::vector<ResultRow> rate_sweep(const Constellation& c, const SweepSpec& spec) {
    auto run_scenario = [&c, &spec](const ChannelScenario& sc) {
        std::vector<SymbolBatch> batches;
        batches.reserve(static_cast<std::size_t>(spec.n_batches));
        for (int b = 0; b < spec.n_batches; ++b)
            batches.push_back(simulate(c, sc, static_cast<std::uint32_t>(b)));

        std::vector<ResultRow> rows;
        const std::string text = sc.text();
        for (const ModelKind& kind : spec.mi_kinds) {
            const RateEstimate est =
                double_monte_carlo(batches, kind, Estimator::Mi, c, spec.options);
            rows.push_back(to_row(est, text, est.train_counts[0], est.eval_counts[0], sc.seed));
        }
        for (const auto& [d, mode] : spec.gmi_variants) {
            const ModelKind kind{d, mode, CovMode::Iid};
            const RateEstimate est =
                double_monte_carlo(batches, kind, Estimator::Gmi, c, spec.options);
            rows.push_back(to_row(est, text, est.train_counts[0], est.eval_counts[0], sc.seed));
        }
        return rows;
    };

    std::vector<ResultRow> rows;
    if (spec.parallel && spec.scenarios.size() > 1) {
        std::vector<std::future<std::vector<ResultRow>>> futures;
        futures.reserve(spec.scenarios.size());
        for (const auto& sc : spec.scenarios)
            futures.push_back(std::async(std::launch::async, run_scenario, sc));
        for (auto& f : futures) {
            auto part = f.get();
            rows.insert(rows.end(), part.begin(), part.end());
        }
    } else {
        for (const auto& sc : spec.scenarios) {
            auto part = run_scenario(sc);
            rows.insert(rows.end(), part.begin(), part.end());
        }
    }
    return rows;
}

}  // namespace airkit
