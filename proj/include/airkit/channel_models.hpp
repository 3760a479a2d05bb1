// The five Gaussian auxiliary-channel families used by the decoder metric:
// per-quadrature / per-polarization / joint 4D noise, with static or
// adaptive per-point means and pooled-scalar or per-point covariances.
//
// A model of dimension d carries 4/d independent parameter sets, one per
// sub-channel (quadratures for d=1, polarizations for d=2, the whole symbol
// for d=4); the degrees-of-freedom report totals them over all four real
// dimensions.
#pragma once

#include <array>
#include <cstdint>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "airkit/batch.hpp"
#include "airkit/constellation.hpp"
#include "airkit/mathutil.hpp"

namespace airkit {

enum class MeanMode { Static, Adaptive };
enum class CovMode { Iid, Correlated };

std::string to_string(MeanMode m);
std::string to_string(CovMode m);

struct ModelKind {
    int d = 2;
    MeanMode mean_mode = MeanMode::Static;
    CovMode cov_mode = CovMode::Iid;

    // Canonical name: "1D-iidG", "2D-iidG", "2D-CG", "4D-iidG", "4D-CG".
    // A mean mode differing from the canonical binding is suffixed, e.g.
    // "2D-iidG/adaptive".
    std::string name() const;

    // Parses canonical names plus an optional "/static" or "/adaptive"
    // mean-mode override suffix.
    static ModelKind parse(const std::string& name);

    // The five canonical bindings, in table order.
    static std::array<ModelKind, 5> table1();

    ModelKind with_mean_mode(MeanMode m) const { return {d, m, cov_mode}; }

    bool operator==(const ModelKind&) const = default;
};

struct FitOptions {
    std::optional<MeanMode> mean_mode_override;
    // Minimum occurrences of every sub-constellation point in the training
    // data; 0 selects the default (50 for d <= 2, 200 for d = 4).
    int min_samples_per_point = 0;
    // Covariance regularization: eps = epsilon_scale * average signal energy
    // per real dimension, added to every covariance diagonal.
    double epsilon_scale = 1e-10;
};

// One fitted sub-channel: M_d means plus either a pooled variance or M_d
// covariance matrices, with cached factorizations for density evaluation.
struct SubChannelParams {
    std::vector<double> means;        // M_d x d, row-major
    double sigma2 = 0.0;              // iid: pooled 1D variance (regularized)
    std::vector<double> covs;         // correlated: M_d x d x d (regularized)
    std::vector<SpdFactor> factors;   // correlated: per-point factorization
    std::vector<double> log_norm;     // per-point -(d/2)log(2pi) - log|Sigma_j|/2
};

class AuxChannelModel {
  public:
    AuxChannelModel(ModelKind kind, Constellation constellation, SymbolView view,
                    std::vector<SubChannelParams> subs, double epsilon,
                    BatchMeta trained_on);

    const ModelKind& kind() const { return kind_; }
    MeanMode mean_mode() const { return kind_.mean_mode; }
    int d() const { return kind_.d; }
    int n_sub() const { return view_.n_sub; }
    int points_per_sub() const { return view_.point_count; }
    double epsilon() const { return epsilon_; }
    const Constellation& constellation() const { return constellation_; }
    const SymbolView& view() const { return view_; }
    const BatchMeta& trained_on() const { return trained_on_; }
    const SubChannelParams& sub(int t) const { return subs_[static_cast<std::size_t>(t)]; }

    std::span<const double> mean(int sub, int point) const;
    // Materialized d x d covariance (sigma2 * I for iid kinds).
    std::vector<double> covariance(int sub, int point) const;

    // log q(y | s_point) under sub-channel `sub`; y must have d entries.
    double logpdf(int sub, int point, std::span<const double> y) const;
    double logpdf(int point, std::span<const double> y) const { return logpdf(0, point, y); }

    // log q(y) = log sum_j q(y|s_j) / M_d (uniform input distribution).
    double log_output_density(int sub, std::span<const double> y) const;
    double log_output_density(std::span<const double> y) const {
        return log_output_density(0, y);
    }

    // All per-point log densities for one sub-symbol, the estimator hot path.
    void logpdf_all(int sub, const double* y, double* out) const;

    // Static-parameter model straight from the constellation (no training
    // data): means at the constellation points, iid variance sigma2.
    static AuxChannelModel from_constellation(ModelKind kind, const Constellation& c,
                                              double sigma2);

  private:
    void check_y(int sub, std::size_t y_size) const;

    ModelKind kind_;
    Constellation constellation_;
    SymbolView view_;
    std::vector<SubChannelParams> subs_;
    double epsilon_ = 0.0;
    BatchMeta trained_on_;
};

// Fit the auxiliary channel on a training batch (conditional sample means,
// pooled 1D variance, or per-point unbiased sample covariances).
AuxChannelModel fit(const ModelKind& kind, const Constellation& c,
                    const SymbolBatch& train, const FitOptions& options = {});

// Estimated parameter count expressed as a total over all four dimensions.
int dof_4d(const ModelKind& kind, const Constellation& c);

// DoF of the five canonical kinds, keyed by name.
std::map<std::string, int> dof_report(const Constellation& c);

// --- estimator kernels -----------------------------------------------------
// The raw estimators behind fit(), exposed for direct verification.
// `classes` holds per-sample point indices in [0, m); `y` is n x d row-major.

// Per-class sample means; classes never observed yield NaN entries.
std::vector<double> conditional_means(int m, int d, std::span<const int> classes,
                                      std::span<const double> y);

// Pooled per-dimension variance around the given per-class means, averaged
// over dimensions, with 1/(N-1) normalization.
double pooled_variance(int m, int d, std::span<const int> classes,
                       std::span<const double> y, std::span<const double> means);

// Per-class unbiased sample covariances (m x d x d); requires >= 2 samples
// in every observed class that is evaluated.
std::vector<double> conditional_covariances(int m, int d, std::span<const int> classes,
                                            std::span<const double> y,
                                            std::span<const double> means);

}  // namespace airkit
