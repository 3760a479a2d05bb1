#include "airkit/channel_sim.hpp"

#include <cmath>
#include <map>
#include <sstream>
#include <stdexcept>

#include "airkit/mathutil.hpp"
#include "airkit/rng.hpp"

namespace airkit {

namespace {

// Stream layout per batch: tx indices, additive noise, phase draws.
constexpr std::uint32_t kStreamsPerBatch = 8;
constexpr std::uint32_t kStreamTx = 0;
constexpr std::uint32_t kStreamNoise = 1;
constexpr std::uint32_t kStreamPhase = 2;

void rotate2(double& re, double& im, double theta) {
    const double c = std::cos(theta), s = std::sin(theta);
    const double r = re * c - im * s;
    im = re * s + im * c;
    re = r;
}

}  // namespace

std::string to_string(ChannelKind k) {
    switch (k) {
        case ChannelKind::Awgn: return "awgn";
        case ChannelKind::CorrGauss: return "corr_gauss";
        case ChannelKind::PhaseNoise: return "phase_noise";
        case ChannelKind::NlPhase: return "nl_phase";
    }
    return "?";
}

double noise_variance_per_dim(double snr_db_per_2d) {
    return std::pow(10.0, -snr_db_per_2d / 10.0) / 2.0;
}

std::string ChannelScenario::text() const {
    std::ostringstream os;
    os << to_string(kind) << " snr=" << format_double(snr_db_per_2d);
    switch (kind) {
        case ChannelKind::Awgn:
            break;
        case ChannelKind::CorrGauss:
            os << " rho_intra=" << format_double(rho_intra)
               << " rho_cross=" << format_double(rho_cross)
               << " energy_alpha=" << format_double(energy_alpha);
            break;
        case ChannelKind::PhaseNoise:
            os << " phase_std=" << format_double(phase_std);
            break;
        case ChannelKind::NlPhase:
            os << " gamma=" << format_double(gamma)
               << " phase_std=" << format_double(phase_std);
            break;
    }
    os << " n=" << n << " seed=" << seed;
    return os.str();
}

ChannelScenario ChannelScenario::parse(const std::string& text) {
    std::istringstream is(text);
    std::string kind_name;
    if (!(is >> kind_name)) throw std::invalid_argument("scenario: empty specification");

    ChannelScenario sc;
    if (kind_name == "awgn")
        sc.kind = ChannelKind::Awgn;
    else if (kind_name == "corr_gauss")
        sc.kind = ChannelKind::CorrGauss;
    else if (kind_name == "phase_noise")
        sc.kind = ChannelKind::PhaseNoise;
    else if (kind_name == "nl_phase")
        sc.kind = ChannelKind::NlPhase;
    else
        throw std::invalid_argument("scenario: unknown channel kind '" + kind_name + "'");

    std::string item;
    while (is >> item) {
        const auto eq = item.find('=');
        if (eq == std::string::npos)
            throw std::invalid_argument("scenario: expected key=value, got '" + item + "'");
        const std::string key = item.substr(0, eq);
        const std::string value = item.substr(eq + 1);
        try {
            if (key == "snr")
                sc.snr_db_per_2d = std::stod(value);
            else if (key == "rho_intra")
                sc.rho_intra = std::stod(value);
            else if (key == "rho_cross")
                sc.rho_cross = std::stod(value);
            else if (key == "energy_alpha")
                sc.energy_alpha = std::stod(value);
            else if (key == "phase_std")
                sc.phase_std = std::stod(value);
            else if (key == "gamma")
                sc.gamma = std::stod(value);
            else if (key == "n")
                sc.n = std::stoull(value);
            else if (key == "seed")
                sc.seed = std::stoull(value);
            else
                throw std::invalid_argument("scenario: unknown parameter '" + key + "'");
        } catch (const std::invalid_argument&) {
            throw;
        } catch (const std::exception&) {
            throw std::invalid_argument("scenario: bad value for '" + key + "': " + value);
        }
    }
    sc.validate();
    return sc;
}

void ChannelScenario::validate() const {
    if (!std::isfinite(snr_db_per_2d))
        throw std::invalid_argument("scenario: SNR must be finite");
    if (n < 1) throw std::invalid_argument("scenario: sample count must be >= 1");
    if (!std::isfinite(rho_intra) || !std::isfinite(rho_cross) ||
        !std::isfinite(energy_alpha) || !std::isfinite(phase_std) || !std::isfinite(gamma))
        throw std::invalid_argument("scenario: parameters must be finite");
    if (phase_std < 0.0) throw std::invalid_argument("scenario: phase_std must be >= 0");
}

std::vector<double> scenario_true_covs(const Constellation& c, const ChannelScenario& sc) {
    if (sc.kind != ChannelKind::CorrGauss)
        throw std::invalid_argument("scenario_true_covs: only corr_gauss has explicit covariances");
    const double s2 = noise_variance_per_dim(sc.snr_db_per_2d);
    const int m = c.size_2d();
    const int m4 = c.size_4d();

    // Correlation structure: rho_intra couples I/Q within a polarization,
    // rho_cross couples matching dimensions across polarizations.
    double r[16] = {1, sc.rho_intra, sc.rho_cross, 0,
                    sc.rho_intra, 1, 0, sc.rho_cross,
                    sc.rho_cross, 0, 1, sc.rho_intra,
                    0, sc.rho_cross, sc.rho_intra, 1};

    std::vector<double> covs(static_cast<std::size_t>(m4) * 16);
    for (int jx = 0; jx < m; ++jx) {
        const double ex = c.points[static_cast<std::size_t>(jx)][0] * c.points[static_cast<std::size_t>(jx)][0] +
                          c.points[static_cast<std::size_t>(jx)][1] * c.points[static_cast<std::size_t>(jx)][1];
        for (int jy = 0; jy < m; ++jy) {
            const double ey = c.points[static_cast<std::size_t>(jy)][0] * c.points[static_cast<std::size_t>(jy)][0] +
                              c.points[static_cast<std::size_t>(jy)][1] * c.points[static_cast<std::size_t>(jy)][1];
            // Per-polarization scale tied to the polarization's own 2D
            // energy (average energy is 1), so rho_cross = 0 factorizes
            // into two independent 2D channels.
            const double sx = 1.0 + sc.energy_alpha * (ex - 1.0);
            const double sy = 1.0 + sc.energy_alpha * (ey - 1.0);
            if (sx <= 0.0 || sy <= 0.0)
                throw std::invalid_argument(
                    "scenario: energy_alpha " + format_double(sc.energy_alpha) +
                    " makes the covariance of a constellation point non-positive");
            const double scale[4] = {std::sqrt(sx), std::sqrt(sx), std::sqrt(sy), std::sqrt(sy)};
            double* out = covs.data() + (static_cast<std::size_t>(jx) * m + jy) * 16;
            for (int a = 0; a < 4; ++a)
                for (int b = 0; b < 4; ++b)
                    out[a * 4 + b] = s2 * scale[a] * scale[b] * r[a * 4 + b];
            SpdFactor f;
            double pivot = 0.0;
            if (!cholesky(4, out, f, &pivot))
                throw std::invalid_argument(
                    "scenario: correlation spec (rho_intra=" + format_double(sc.rho_intra) +
                    ", rho_cross=" + format_double(sc.rho_cross) +
                    ") is not positive definite (pivot " + format_double(pivot) + ")");
        }
    }
    return covs;
}

SymbolBatch simulate(const Constellation& c, const ChannelScenario& sc,
                     std::uint32_t batch_id) {
    sc.validate();
    const int m4 = c.size_4d();
    const double sigma = std::sqrt(noise_variance_per_dim(sc.snr_db_per_2d));

    const std::uint32_t base = batch_id * kStreamsPerBatch;
    const CounterRng tx_rng(sc.seed, base + kStreamTx);
    const CounterRng noise_rng(sc.seed, base + kStreamNoise);
    const CounterRng phase_rng(sc.seed, base + kStreamPhase);

    // Per-point Cholesky factors for the correlated kind.
    std::vector<SpdFactor> factors;
    if (sc.kind == ChannelKind::CorrGauss) {
        const auto covs = scenario_true_covs(c, sc);
        factors.resize(static_cast<std::size_t>(m4));
        for (int j = 0; j < m4; ++j)
            cholesky(4, covs.data() + static_cast<std::size_t>(j) * 16,
                     factors[static_cast<std::size_t>(j)]);
    }

    SymbolBatch batch;
    batch.tx.resize(sc.n);
    batch.rx.resize(4 * sc.n);
    batch.meta.scenario = sc.text();
    batch.meta.seed = sc.seed;
    batch.meta.batch_id = batch_id;

    const int m = c.size_2d();
    for (std::uint64_t i = 0; i < sc.n; ++i) {
        const int idx = static_cast<int>(
            tx_rng.uniform_pow2(i, 0, static_cast<std::uint32_t>(m4)));
        batch.tx[i] = static_cast<std::uint16_t>(idx);

        const auto& px = c.points[static_cast<std::size_t>(idx / m)];
        const auto& py = c.points[static_cast<std::size_t>(idx % m)];
        double y[4] = {px[0], px[1], py[0], py[1]};

        const auto [z0, z1] = noise_rng.gaussian_pair(i, 0);
        const auto [z2, z3] = noise_rng.gaussian_pair(i, 1);
        const double z[4] = {z0, z1, z2, z3};

        switch (sc.kind) {
            case ChannelKind::Awgn:
                for (int k = 0; k < 4; ++k) y[k] += sigma * z[k];
                break;
            case ChannelKind::CorrGauss: {
                double noise[4];
                factors[static_cast<std::size_t>(idx)].transform(z, noise);
                for (int k = 0; k < 4; ++k) y[k] += noise[k];
                break;
            }
            case ChannelKind::PhaseNoise: {
                const auto [tx_phase, ty_phase] = phase_rng.gaussian_pair(i, 0);
                rotate2(y[0], y[1], sc.phase_std * tx_phase);
                rotate2(y[2], y[3], sc.phase_std * ty_phase);
                for (int k = 0; k < 4; ++k) y[k] += sigma * z[k];
                break;
            }
            case ChannelKind::NlPhase: {
                const double energy = y[0] * y[0] + y[1] * y[1] + y[2] * y[2] + y[3] * y[3];
                const double mean_energy = 2.0;  // two unit-energy polarizations
                const auto [jitter, unused] = phase_rng.gaussian_pair(i, 0);
                (void)unused;
                const double theta = sc.gamma * energy +
                                     sc.phase_std * (energy / mean_energy) * jitter;
                rotate2(y[0], y[1], theta);
                rotate2(y[2], y[3], theta);
                for (int k = 0; k < 4; ++k) y[k] += sigma * z[k];
                break;
            }
        }
        for (int k = 0; k < 4; ++k) batch.rx[4 * i + k] = y[k];
    }
    return batch;
}

// --- oracles ----------------------------------------------------------------

namespace {

// Symbol-wise MI of a uniform 1D PAM input under AWGN, in bits, by
// Gauss-Hermite quadrature over the noise distribution.
double pam_mi_bits(std::span<const double> levels, double sigma, int nodes) {
    const auto rule = gauss_hermite(nodes);
    const std::size_t L = levels.size();
    const double inv2s2 = 1.0 / (2.0 * sigma * sigma);
    std::vector<double> expo(L);
    double acc = 0.0;
    for (std::size_t j = 0; j < L; ++j) {
        for (int q = 0; q < nodes; ++q) {
            const double z = sigma * rule.nodes[static_cast<std::size_t>(q)];
            for (std::size_t b = 0; b < L; ++b) {
                const double u = levels[j] - levels[b];
                expo[b] = -(u * u + 2.0 * z * u) * inv2s2;
            }
            acc += rule.weights[static_cast<std::size_t>(q)] * logsumexp(expo);
        }
    }
    return (std::log(static_cast<double>(L)) - acc / static_cast<double>(L)) * kLog2E;
}

// Bit-wise rate sum_k I(B_k; Y) of Gray-labeled 1D PAM under AWGN, bits.
double pam_gmi_bits(std::span<const double> levels, std::span<const std::uint32_t> labels,
                    int bits, double sigma, int nodes) {
    const auto rule = gauss_hermite(nodes);
    const std::size_t L = levels.size();
    const double inv2s2 = 1.0 / (2.0 * sigma * sigma);
    std::vector<double> expo(L), set_expo(L / 2);
    double acc = 0.0;  // accumulates E[log(den/num)] terms in nats
    for (std::size_t j = 0; j < L; ++j) {
        for (int q = 0; q < nodes; ++q) {
            const double z = sigma * rule.nodes[static_cast<std::size_t>(q)];
            for (std::size_t b = 0; b < L; ++b) {
                const double u = levels[j] - levels[b];
                expo[b] = -(u * u + 2.0 * z * u) * inv2s2;
            }
            const double den = logsumexp(expo) - std::log(static_cast<double>(L));
            double node_sum = 0.0;
            for (int k = 0; k < bits; ++k) {
                const std::uint32_t want =
                    (labels[j] >> (bits - 1 - k)) & 1u;
                std::size_t cnt = 0;
                for (std::size_t b = 0; b < L; ++b)
                    if (((labels[b] >> (bits - 1 - k)) & 1u) == want)
                        set_expo[cnt++] = expo[b];
                const double num = logsumexp({set_expo.data(), cnt}) -
                                   std::log(static_cast<double>(cnt));
                node_sum += num - den;
            }
            acc += rule.weights[static_cast<std::size_t>(q)] * node_sum;
        }
    }
    return acc / static_cast<double>(L) * kLog2E;
}

// MI of one polarization of a corr_gauss scenario (rho_cross == 0), bits
// per 2D symbol, by tensor Gauss-Hermite quadrature.
double corr_gauss_pol_mi_bits(const Constellation& c, const ChannelScenario& sc, int nodes) {
    const double s2 = noise_variance_per_dim(sc.snr_db_per_2d);
    const int m = c.size_2d();
    std::vector<SpdFactor> factors(static_cast<std::size_t>(m));
    std::vector<double> log_norm(static_cast<std::size_t>(m));
    for (int j = 0; j < m; ++j) {
        const auto& p = c.points[static_cast<std::size_t>(j)];
        const double scale = 1.0 + sc.energy_alpha * (p[0] * p[0] + p[1] * p[1] - 1.0);
        if (scale <= 0.0)
            throw std::invalid_argument("scenario: energy_alpha makes a point's covariance non-positive");
        const double cov[4] = {s2 * scale, s2 * scale * sc.rho_intra,
                               s2 * scale * sc.rho_intra, s2 * scale};
        double pivot = 0.0;
        if (!cholesky(2, cov, factors[static_cast<std::size_t>(j)], &pivot))
            throw std::invalid_argument("scenario: rho_intra=" + format_double(sc.rho_intra) +
                                        " is not positive definite");
        log_norm[static_cast<std::size_t>(j)] =
            -0.5 * factors[static_cast<std::size_t>(j)].log_det;
    }

    const auto rule = gauss_hermite(nodes);
    std::vector<double> lp(static_cast<std::size_t>(m));
    double acc = 0.0;
    for (int j = 0; j < m; ++j) {
        const auto& pj = c.points[static_cast<std::size_t>(j)];
        for (int qa = 0; qa < nodes; ++qa) {
            for (int qb = 0; qb < nodes; ++qb) {
                const double z[2] = {rule.nodes[static_cast<std::size_t>(qa)],
                                     rule.nodes[static_cast<std::size_t>(qb)]};
                double noise[2];
                factors[static_cast<std::size_t>(j)].transform(z, noise);
                const double y[2] = {pj[0] + noise[0], pj[1] + noise[1]};
                for (int b = 0; b < m; ++b) {
                    const double dev[2] = {y[0] - c.points[static_cast<std::size_t>(b)][0],
                                           y[1] - c.points[static_cast<std::size_t>(b)][1]};
                    lp[static_cast<std::size_t>(b)] =
                        log_norm[static_cast<std::size_t>(b)] -
                        0.5 * factors[static_cast<std::size_t>(b)].inv_quad_form(dev);
                }
                const double num = lp[static_cast<std::size_t>(j)];
                const double den = logsumexp(lp) - std::log(static_cast<double>(m));
                acc += rule.weights[static_cast<std::size_t>(qa)] *
                       rule.weights[static_cast<std::size_t>(qb)] * (num - den);
            }
        }
    }
    return acc / static_cast<double>(m) * kLog2E;
}

}  // namespace

double true_rate_oracle(const Constellation& c, const ChannelScenario& sc,
                        OracleQuantity quantity, const OracleOptions& options) {
    sc.validate();
    const double sigma = std::sqrt(noise_variance_per_dim(sc.snr_db_per_2d));

    switch (sc.kind) {
        case ChannelKind::Awgn: {
            const SymbolView axis = make_view(c, 1);
            if (quantity == OracleQuantity::Mi)
                return 4.0 * pam_mi_bits(axis.points, sigma, options.quad_nodes);
            // Per-axis Gray labels: the leading half of each 2D label.
            std::vector<std::uint32_t> axis_labels(static_cast<std::size_t>(axis.levels));
            const int axis_bits = c.bits_per_2d() / 2;
            for (int i = 0; i < axis.levels; ++i)
                axis_labels[static_cast<std::size_t>(i)] =
                    c.labels[static_cast<std::size_t>(i) * axis.levels] >> axis_bits;
            return 4.0 * pam_gmi_bits(axis.points, axis_labels, axis_bits, sigma,
                                      options.quad_nodes);
        }
        case ChannelKind::CorrGauss: {
            if (quantity == OracleQuantity::Gmi)
                throw std::invalid_argument(
                    "true_rate_oracle: the bit-wise oracle is only available for awgn");
            if (sc.rho_cross == 0.0)
                return 2.0 * corr_gauss_pol_mi_bits(c, sc, options.quad_nodes);
            // No low-dimensional factorization; integrate by Monte Carlo
            // under the exact densities.
            return mc_rate_oracle(c, sc, options.mc_n, options.mc_seed);
        }
        case ChannelKind::PhaseNoise:
        case ChannelKind::NlPhase:
            throw std::invalid_argument("true_rate_oracle: " + to_string(sc.kind) +
                                        " has no closed-form channel density");
    }
    throw std::logic_error("true_rate_oracle: unreachable");
}

double mc_rate_oracle(const Constellation& c, const ChannelScenario& sc, std::uint64_t n,
                      std::uint64_t seed, double* stderr_out) {
    if (sc.kind != ChannelKind::Awgn && sc.kind != ChannelKind::CorrGauss)
        throw std::invalid_argument("mc_rate_oracle: " + to_string(sc.kind) +
                                    " has no closed-form channel density");
    ChannelScenario gen = sc;
    gen.n = n;
    gen.seed = seed;
    const SymbolBatch batch = simulate(c, gen, 0);

    const int m4 = c.size_4d();
    const int m = c.size_2d();
    const double s2 = noise_variance_per_dim(sc.snr_db_per_2d);

    std::vector<SpdFactor> factors;
    std::vector<double> log_norm(static_cast<std::size_t>(m4), -0.5 * 4 * std::log(s2));
    if (sc.kind == ChannelKind::CorrGauss) {
        const auto covs = scenario_true_covs(c, sc);
        factors.resize(static_cast<std::size_t>(m4));
        for (int j = 0; j < m4; ++j) {
            cholesky(4, covs.data() + static_cast<std::size_t>(j) * 16,
                     factors[static_cast<std::size_t>(j)]);
            log_norm[static_cast<std::size_t>(j)] =
                -0.5 * factors[static_cast<std::size_t>(j)].log_det;
        }
    }

    // Per-point 4D coordinates.
    std::vector<double> pts(static_cast<std::size_t>(m4) * 4);
    for (int j = 0; j < m4; ++j) {
        const auto& px = c.points[static_cast<std::size_t>(j / m)];
        const auto& py = c.points[static_cast<std::size_t>(j % m)];
        double* p = pts.data() + static_cast<std::size_t>(j) * 4;
        p[0] = px[0]; p[1] = px[1]; p[2] = py[0]; p[3] = py[1];
    }

    std::vector<double> lp(static_cast<std::size_t>(m4));
    KahanSum sum, sum_sq;
    for (std::uint64_t i = 0; i < n; ++i) {
        const double* y = batch.rx.data() + 4 * i;
        for (int j = 0; j < m4; ++j) {
            const double* p = pts.data() + static_cast<std::size_t>(j) * 4;
            const double dev[4] = {y[0] - p[0], y[1] - p[1], y[2] - p[2], y[3] - p[3]};
            double quad;
            if (sc.kind == ChannelKind::Awgn)
                quad = (dev[0] * dev[0] + dev[1] * dev[1] + dev[2] * dev[2] + dev[3] * dev[3]) / s2;
            else
                quad = factors[static_cast<std::size_t>(j)].inv_quad_form(dev);
            lp[static_cast<std::size_t>(j)] = log_norm[static_cast<std::size_t>(j)] - 0.5 * quad;
        }
        const double info =
            (lp[batch.tx[i]] - (logsumexp(lp) - std::log(static_cast<double>(m4)))) * kLog2E;
        sum.add(info);
        sum_sq.add(info * info);
    }
    const double mean = sum.value() / static_cast<double>(n);
    if (stderr_out) {
        const double var =
            (sum_sq.value() / static_cast<double>(n) - mean * mean) / static_cast<double>(n - 1);
        *stderr_out = std::sqrt(std::max(var, 0.0));
    }
    return mean;
}

}  // namespace airkit
