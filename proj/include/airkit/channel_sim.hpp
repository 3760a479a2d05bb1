// Synthetic memoryless channels for validating the rate estimators:
// isotropic AWGN, per-point correlated Gaussian noise, polarization phase
// noise, and an energy-dependent nonlinear phase channel that produces the
// azimuthally elongated per-point clouds seen on dispersion-managed links.
//
// SNR convention: ratio of average 2D sub-symbol energy (= 1) to the total
// 2D noise variance, so the per-real-dimension noise variance is
// 10^(-snr_db/10) / 2.
#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "airkit/batch.hpp"
#include "airkit/constellation.hpp"

namespace airkit {

enum class ChannelKind { Awgn, CorrGauss, PhaseNoise, NlPhase };

std::string to_string(ChannelKind k);

struct ChannelScenario {
    ChannelKind kind = ChannelKind::Awgn;
    double snr_db_per_2d = 12.0;
    std::uint64_t n = 200000;
    std::uint64_t seed = 1;

    // corr_gauss: noise correlation within a polarization, between
    // polarizations, and a per-point variance scale proportional to the
    // point's own 2D energy.
    double rho_intra = 0.0;
    double rho_cross = 0.0;
    double energy_alpha = 0.0;

    // phase_noise: independent per-polarization phase std (radians).
    // nl_phase: common rotation gamma * |s_4D|^2 plus a common phase jitter
    // with std phase_std * (|s_4D|^2 / mean energy).
    double phase_std = 0.0;
    double gamma = 0.0;

    // Canonical one-line description; embedded in batch files and results.
    std::string text() const;
    static ChannelScenario parse(const std::string& text);

    void validate() const;
};

// Per-real-dimension noise variance implied by the SNR convention.
double noise_variance_per_dim(double snr_db_per_2d);

// Generate one batch. Output is fully determined by (scenario, batch_id):
// every sample draws from counter-addressed streams, so generation order
// does not matter.
SymbolBatch simulate(const Constellation& c, const ChannelScenario& sc,
                     std::uint32_t batch_id = 0);

// True per-point 4D noise covariances of a corr_gauss scenario
// (size_4d() x 16, row-major). Throws on non-SPD specifications.
std::vector<double> scenario_true_covs(const Constellation& c, const ChannelScenario& sc);

enum class OracleQuantity { Mi, Gmi };

struct OracleOptions {
    int quad_nodes = 96;           // Gauss-Hermite order per dimension
    std::uint64_t mc_n = 8000000;  // fallback sample count (4D corr_gauss)
    std::uint64_t mc_seed = 0xC0FFEE;
};

// Deterministic ground-truth rate in bit per 4D symbol for analytically
// known channels (awgn, corr_gauss). AWGN factorizes per axis and is
// evaluated by 1D quadrature; corr_gauss without cross-polarization
// correlation by per-polarization 2D quadrature. corr_gauss with
// rho_cross != 0 has no low-dimensional factorization and falls back to
// Monte Carlo under the exact densities (seeded, mc_n samples). The
// bit-wise quantity (Gray-labeled GMI) is available for awgn.
double true_rate_oracle(const Constellation& c, const ChannelScenario& sc,
                        OracleQuantity quantity = OracleQuantity::Mi,
                        const OracleOptions& options = {});

// Independent Monte-Carlo evaluation of the mutual information using the
// exact channel densities (awgn / corr_gauss only). Returns bit per 4D
// symbol; the standard error is written to stderr_out when non-null.
double mc_rate_oracle(const Constellation& c, const ChannelScenario& sc, std::uint64_t n,
                      std::uint64_t seed, double* stderr_out = nullptr);

}  // namespace airkit
