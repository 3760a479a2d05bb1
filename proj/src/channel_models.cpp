#include "airkit/channel_models.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

namespace airkit {

namespace {

constexpr double kLog2Pi = 1.8378770664093454836;

MeanMode canonical_mean_mode(int d, CovMode cov) {
    // Table bindings: only the 2D iid baseline uses static means.
    return (d == 2 && cov == CovMode::Iid) ? MeanMode::Static : MeanMode::Adaptive;
}

std::string base_name(int d, CovMode cov) {
    return std::to_string(d) + "D-" + (cov == CovMode::Iid ? "iidG" : "CG");
}

}  // namespace

std::string to_string(MeanMode m) { return m == MeanMode::Static ? "static" : "adaptive"; }
std::string to_string(CovMode m) { return m == CovMode::Iid ? "iid" : "correlated"; }

std::string ModelKind::name() const {
    std::string n = base_name(d, cov_mode);
    if (mean_mode != canonical_mean_mode(d, cov_mode))
        n += "/" + to_string(mean_mode);
    return n;
}

ModelKind ModelKind::parse(const std::string& name) {
    std::string base = name;
    std::optional<MeanMode> override;
    if (const auto slash = name.find('/'); slash != std::string::npos) {
        base = name.substr(0, slash);
        const std::string suffix = name.substr(slash + 1);
        if (suffix == "static")
            override = MeanMode::Static;
        else if (suffix == "adaptive")
            override = MeanMode::Adaptive;
        else
            throw std::invalid_argument("ModelKind: unknown mean-mode suffix '" + suffix +
                                        "' in '" + name + "'");
    }
    std::string lower(base);
    std::transform(lower.begin(), lower.end(), lower.begin(),
                   [](unsigned char ch) { return static_cast<char>(std::tolower(ch)); });
    ModelKind k;
    if (lower == "1d-iidg")
        k = {1, MeanMode::Adaptive, CovMode::Iid};
    else if (lower == "2d-iidg")
        k = {2, MeanMode::Static, CovMode::Iid};
    else if (lower == "2d-cg")
        k = {2, MeanMode::Adaptive, CovMode::Correlated};
    else if (lower == "4d-iidg")
        k = {4, MeanMode::Adaptive, CovMode::Iid};
    else if (lower == "4d-cg")
        k = {4, MeanMode::Adaptive, CovMode::Correlated};
    else
        throw std::invalid_argument("ModelKind: unknown model name '" + name + "'");
    if (override) k.mean_mode = *override;
    return k;
}

std::array<ModelKind, 5> ModelKind::table1() {
    return {ModelKind{1, MeanMode::Adaptive, CovMode::Iid},
            ModelKind{2, MeanMode::Static, CovMode::Iid},
            ModelKind{2, MeanMode::Adaptive, CovMode::Correlated},
            ModelKind{4, MeanMode::Adaptive, CovMode::Iid},
            ModelKind{4, MeanMode::Adaptive, CovMode::Correlated}};
}

// --- estimator kernels -------------------------------------------------------

std::vector<double> conditional_means(int m, int d, std::span<const int> classes,
                                      std::span<const double> y) {
    std::vector<KahanSum> sums(static_cast<std::size_t>(m) * d);
    std::vector<std::size_t> counts(static_cast<std::size_t>(m), 0);
    const std::size_t n = classes.size();
    for (std::size_t i = 0; i < n; ++i) {
        const int j = classes[i];
        ++counts[static_cast<std::size_t>(j)];
        for (int l = 0; l < d; ++l)
            sums[static_cast<std::size_t>(j) * d + l].add(y[i * d + l]);
    }
    std::vector<double> means(static_cast<std::size_t>(m) * d);
    for (int j = 0; j < m; ++j) {
        for (int l = 0; l < d; ++l) {
            const std::size_t idx = static_cast<std::size_t>(j) * d + l;
            means[idx] = counts[static_cast<std::size_t>(j)] == 0
                             ? std::numeric_limits<double>::quiet_NaN()
                             : sums[idx].value() /
                                   static_cast<double>(counts[static_cast<std::size_t>(j)]);
        }
    }
    return means;
}

double pooled_variance(int m, int d, std::span<const int> classes,
                       std::span<const double> y, std::span<const double> means) {
    (void)m;
    const std::size_t n = classes.size();
    if (n < 2) throw std::invalid_argument("pooled_variance: need at least 2 samples");
    double total = 0.0;
    for (int l = 0; l < d; ++l) {
        KahanSum s;
        for (std::size_t i = 0; i < n; ++i) {
            const double dev =
                y[i * d + l] - means[static_cast<std::size_t>(classes[i]) * d + l];
            s.add(dev * dev);
        }
        total += s.value() / static_cast<double>(n - 1);
    }
    return total / d;
}

std::vector<double> conditional_covariances(int m, int d, std::span<const int> classes,
                                            std::span<const double> y,
                                            std::span<const double> means) {
    const std::size_t dd = static_cast<std::size_t>(d) * d;
    std::vector<KahanSum> sums(static_cast<std::size_t>(m) * dd);
    std::vector<std::size_t> counts(static_cast<std::size_t>(m), 0);
    const std::size_t n = classes.size();
    for (std::size_t i = 0; i < n; ++i) {
        const int j = classes[i];
        ++counts[static_cast<std::size_t>(j)];
        double dev[kMaxDim];
        for (int l = 0; l < d; ++l)
            dev[l] = y[i * d + l] - means[static_cast<std::size_t>(j) * d + l];
        KahanSum* c = sums.data() + static_cast<std::size_t>(j) * dd;
        for (int a = 0; a < d; ++a)
            for (int b = 0; b <= a; ++b) c[a * d + b].add(dev[a] * dev[b]);
    }
    std::vector<double> covs(static_cast<std::size_t>(m) * dd, 0.0);
    for (int j = 0; j < m; ++j) {
        double* c = covs.data() + static_cast<std::size_t>(j) * dd;
        const KahanSum* s = sums.data() + static_cast<std::size_t>(j) * dd;
        const std::size_t nj = counts[static_cast<std::size_t>(j)];
        if (nj < 2) {
            std::fill(c, c + dd, std::numeric_limits<double>::quiet_NaN());
            continue;
        }
        for (int a = 0; a < d; ++a)
            for (int b = 0; b <= a; ++b) {
                c[a * d + b] = s[a * d + b].value() / static_cast<double>(nj - 1);
                c[b * d + a] = c[a * d + b];  // exact symmetry by construction
            }
    }
    return covs;
}

// --- model ------------------------------------------------------------------

AuxChannelModel::AuxChannelModel(ModelKind kind, Constellation constellation,
                                 SymbolView view, std::vector<SubChannelParams> subs,
                                 double epsilon, BatchMeta trained_on)
    : kind_(kind),
      constellation_(std::move(constellation)),
      view_(std::move(view)),
      subs_(std::move(subs)),
      epsilon_(epsilon),
      trained_on_(std::move(trained_on)) {
    if (static_cast<int>(subs_.size()) != view_.n_sub)
        throw std::invalid_argument("AuxChannelModel: expected " +
                                    std::to_string(view_.n_sub) + " sub-channels");
    const int d = kind_.d;
    const int mp = view_.point_count;
    for (auto& s : subs_) {
        if (static_cast<int>(s.means.size()) != mp * d)
            throw std::invalid_argument("AuxChannelModel: bad means size");
        s.log_norm.assign(static_cast<std::size_t>(mp), 0.0);
        if (kind_.cov_mode == CovMode::Iid) {
            if (!(s.sigma2 > 0.0) || !std::isfinite(s.sigma2))
                throw std::invalid_argument("AuxChannelModel: pooled variance must be positive");
            const double ln = -0.5 * d * (kLog2Pi + std::log(s.sigma2));
            std::fill(s.log_norm.begin(), s.log_norm.end(), ln);
        } else {
            if (static_cast<int>(s.covs.size()) != mp * d * d)
                throw std::invalid_argument("AuxChannelModel: bad covariance size");
            s.factors.resize(static_cast<std::size_t>(mp));
            for (int j = 0; j < mp; ++j) {
                double pivot = 0.0;
                if (!cholesky(d, s.covs.data() + static_cast<std::size_t>(j) * d * d,
                              s.factors[static_cast<std::size_t>(j)], &pivot))
                    throw std::runtime_error(
                        "AuxChannelModel: covariance of point " + std::to_string(j) +
                        " is singular after regularization (pivot " +
                        std::to_string(pivot) + ", eps " + std::to_string(epsilon_) + ")");
                s.log_norm[static_cast<std::size_t>(j)] =
                    -0.5 * (d * kLog2Pi + s.factors[static_cast<std::size_t>(j)].log_det);
            }
        }
    }
}

std::span<const double> AuxChannelModel::mean(int sub, int point) const {
    const auto& s = subs_[static_cast<std::size_t>(sub)];
    return {s.means.data() + static_cast<std::size_t>(point) * kind_.d,
            static_cast<std::size_t>(kind_.d)};
}

std::vector<double> AuxChannelModel::covariance(int sub, int point) const {
    const int d = kind_.d;
    const auto& s = subs_[static_cast<std::size_t>(sub)];
    std::vector<double> c(static_cast<std::size_t>(d) * d, 0.0);
    if (kind_.cov_mode == CovMode::Iid) {
        for (int i = 0; i < d; ++i) c[static_cast<std::size_t>(i) * d + i] = s.sigma2;
    } else {
        const double* src = s.covs.data() + static_cast<std::size_t>(point) * d * d;
        std::copy(src, src + d * d, c.begin());
    }
    return c;
}

void AuxChannelModel::check_y(int sub, std::size_t y_size) const {
    if (sub < 0 || sub >= view_.n_sub)
        throw std::invalid_argument("AuxChannelModel: sub-channel index out of range");
    if (static_cast<int>(y_size) != kind_.d)
        throw std::invalid_argument("AuxChannelModel: expected a " + std::to_string(kind_.d) +
                                    "-dimensional vector, got " + std::to_string(y_size) +
                                    " entries");
}

double AuxChannelModel::logpdf(int sub, int point, std::span<const double> y) const {
    check_y(sub, y.size());
    const int d = kind_.d;
    const auto& s = subs_[static_cast<std::size_t>(sub)];
    const double* mu = s.means.data() + static_cast<std::size_t>(point) * d;
    double dev[kMaxDim];
    for (int l = 0; l < d; ++l) dev[l] = y[static_cast<std::size_t>(l)] - mu[l];
    double quad;
    if (kind_.cov_mode == CovMode::Iid) {
        double ss = 0.0;
        for (int l = 0; l < d; ++l) ss += dev[l] * dev[l];
        quad = ss / s.sigma2;
    } else {
        quad = s.factors[static_cast<std::size_t>(point)].inv_quad_form(dev);
    }
    return s.log_norm[static_cast<std::size_t>(point)] - 0.5 * quad;
}

void AuxChannelModel::logpdf_all(int sub, const double* y, double* out) const {
    const int d = kind_.d;
    const int mp = view_.point_count;
    const auto& s = subs_[static_cast<std::size_t>(sub)];
    if (kind_.cov_mode == CovMode::Iid) {
        const double inv2s = -0.5 / s.sigma2;
        const double ln = s.log_norm[0];
        for (int j = 0; j < mp; ++j) {
            const double* mu = s.means.data() + static_cast<std::size_t>(j) * d;
            double ss = 0.0;
            for (int l = 0; l < d; ++l) {
                const double dev = y[l] - mu[l];
                ss += dev * dev;
            }
            out[j] = ln + inv2s * ss;
        }
    } else {
        for (int j = 0; j < mp; ++j) {
            const double* mu = s.means.data() + static_cast<std::size_t>(j) * d;
            double dev[kMaxDim];
            for (int l = 0; l < d; ++l) dev[l] = y[l] - mu[l];
            out[j] = s.log_norm[static_cast<std::size_t>(j)] -
                     0.5 * s.factors[static_cast<std::size_t>(j)].inv_quad_form(dev);
        }
    }
}

double AuxChannelModel::log_output_density(int sub, std::span<const double> y) const {
    check_y(sub, y.size());
    const int mp = view_.point_count;
    std::vector<double> lp(static_cast<std::size_t>(mp));
    logpdf_all(sub, y.data(), lp.data());
    return logsumexp(lp) - std::log(static_cast<double>(mp));
}

AuxChannelModel AuxChannelModel::from_constellation(ModelKind kind, const Constellation& c,
                                                    double sigma2) {
    SymbolView view = make_view(c, kind.d);
    std::vector<SubChannelParams> subs(static_cast<std::size_t>(view.n_sub));
    for (auto& s : subs) {
        s.means = view.points;
        s.sigma2 = sigma2;
        if (kind.cov_mode == CovMode::Correlated) {
            const int d = kind.d;
            s.covs.assign(static_cast<std::size_t>(view.point_count) * d * d, 0.0);
            for (int j = 0; j < view.point_count; ++j)
                for (int l = 0; l < d; ++l)
                    s.covs[static_cast<std::size_t>(j) * d * d + l * d + l] = sigma2;
        }
    }
    BatchMeta meta;
    meta.scenario = "synthetic:" + c.name;
    return AuxChannelModel(kind.with_mean_mode(MeanMode::Static), c, std::move(view),
                           std::move(subs), 0.0, meta);
}

// --- fitting ----------------------------------------------------------------

AuxChannelModel fit(const ModelKind& requested, const Constellation& c,
                    const SymbolBatch& train, const FitOptions& options) {
    ModelKind kind = requested;
    if (options.mean_mode_override) kind.mean_mode = *options.mean_mode_override;

    const SymbolView view = make_view(c, kind.d);
    const int d = kind.d;
    const int mp = view.point_count;
    const std::size_t n = train.size();
    train.validate(c.size_4d());

    int min_samples =
        options.min_samples_per_point > 0 ? options.min_samples_per_point : (d == 4 ? 200 : 50);
    // the unbiased per-point covariance needs at least two samples
    if (kind.cov_mode == CovMode::Correlated) min_samples = std::max(min_samples, 2);

    // Average signal energy per real dimension is 1/2 under the unit-energy
    // 2D normalization; derive it from the view to stay exact.
    double energy_per_dim = 0.0;
    for (int j = 0; j < mp; ++j) {
        const auto p = view.point(j);
        for (double x : p) energy_per_dim += x * x;
    }
    energy_per_dim /= static_cast<double>(mp) * d;
    const double eps = options.epsilon_scale * energy_per_dim;

    std::vector<SubChannelParams> subs(static_cast<std::size_t>(view.n_sub));
    std::vector<int> classes(n);
    std::vector<double> ysub(n * static_cast<std::size_t>(d));

    for (int t = 0; t < view.n_sub; ++t) {
        for (std::size_t i = 0; i < n; ++i) {
            classes[i] = view.sub_index(train.tx[i], t);
            for (int l = 0; l < d; ++l)
                ysub[i * static_cast<std::size_t>(d) + l] = train.rx[4 * i + t * d + l];
        }

        std::vector<std::size_t> counts(static_cast<std::size_t>(mp), 0);
        for (std::size_t i = 0; i < n; ++i) ++counts[static_cast<std::size_t>(classes[i])];
        for (int j = 0; j < mp; ++j) {
            const std::size_t nj = counts[static_cast<std::size_t>(j)];
            if (nj == 0)
                throw std::runtime_error("fit: sub-constellation point " + std::to_string(j) +
                                         " of sub-channel " + std::to_string(t) +
                                         " never occurs in the training data");
            if (nj < static_cast<std::size_t>(min_samples))
                throw std::runtime_error(
                    "fit: sub-constellation point " + std::to_string(j) + " of sub-channel " +
                    std::to_string(t) + " has only " + std::to_string(nj) +
                    " training samples (minimum " + std::to_string(min_samples) + ")");
        }

        SubChannelParams& p = subs[static_cast<std::size_t>(t)];
        if (kind.mean_mode == MeanMode::Adaptive) {
            p.means = conditional_means(mp, d, classes, ysub);
        } else {
            p.means = view.points;
        }

        if (kind.cov_mode == CovMode::Iid) {
            p.sigma2 = pooled_variance(mp, d, classes, ysub, p.means) + eps;
        } else {
            p.covs = conditional_covariances(mp, d, classes, ysub, p.means);
            for (int j = 0; j < mp; ++j)
                for (int l = 0; l < d; ++l)
                    p.covs[(static_cast<std::size_t>(j) * d + l) * d + l] += eps;
        }
    }

    return AuxChannelModel(kind, c, view, std::move(subs), eps, train.meta);
}

int dof_4d(const ModelKind& kind, const Constellation& c) {
    const SymbolView view = make_view(c, kind.d);
    const int d = kind.d;
    const int mean_params = kind.mean_mode == MeanMode::Adaptive ? view.point_count * d : 0;
    const int cov_params =
        kind.cov_mode == CovMode::Iid ? 1 : view.point_count * d * (d + 1) / 2;
    return (mean_params + cov_params) * view.n_sub;
}

std::map<std::string, int> dof_report(const Constellation& c) {
    std::map<std::string, int> report;
    for (const auto& kind : ModelKind::table1()) report[kind.name()] = dof_4d(kind, c);
    return report;
}

}  // namespace airkit
