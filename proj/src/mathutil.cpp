#include "airkit/mathutil.hpp"

#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <stdexcept>

namespace airkit {

double log1pexp(double t) {
    if (t > 0.0) return t + std::log1p(std::exp(-t));
    return std::log1p(std::exp(t));
}

double logsumexp(std::span<const double> v) {
    if (v.empty()) throw std::invalid_argument("logsumexp: empty input");
    double m = v[0];
    for (double x : v)
        if (x > m) m = x;
    if (!std::isfinite(m)) return m;  // all -inf, or a stray non-finite input
    double s = 0.0;
    for (double x : v) {
        const double t = x - m;
        if (t > -50.0) s += std::exp(t);
    }
    return m + std::log(s);
}

double SpdFactor::inv_quad_form(const double* v) const {
    // Solve L w = v, accumulate |w|^2.
    double w[kMaxDim];
    double q = 0.0;
    for (int i = 0; i < d; ++i) {
        double s = v[i];
        for (int j = 0; j < i; ++j) s -= lower[i * kMaxDim + j] * w[j];
        w[i] = s / lower[i * kMaxDim + i];
        q += w[i] * w[i];
    }
    return q;
}

void SpdFactor::transform(const double* z, double* out) const {
    for (int i = 0; i < d; ++i) {
        double s = 0.0;
        for (int j = 0; j <= i; ++j) s += lower[i * kMaxDim + j] * z[j];
        out[i] = s;
    }
}

bool cholesky(int d, const double* a, SpdFactor& out, double* bad_pivot) {
    out.d = d;
    out.lower.fill(0.0);
    double log_det = 0.0;
    for (int i = 0; i < d; ++i) {
        for (int j = 0; j <= i; ++j) {
            double s = a[i * d + j];
            for (int k = 0; k < j; ++k)
                s -= out.lower[i * kMaxDim + k] * out.lower[j * kMaxDim + k];
            if (i == j) {
                if (s <= 0.0 || !std::isfinite(s)) {
                    if (bad_pivot) *bad_pivot = s;
                    return false;
                }
                out.lower[i * kMaxDim + i] = std::sqrt(s);
                log_det += std::log(s);
            } else {
                out.lower[i * kMaxDim + j] = s / out.lower[j * kMaxDim + j];
            }
        }
    }
    out.log_det = log_det;
    return true;
}

GaussHermite gauss_hermite(int n) {
    if (n < 1) throw std::invalid_argument("gauss_hermite: order must be >= 1");
    // Roots of the physicists' Hermite polynomial H_n by Newton iteration,
    // largest to smallest, then mapped to the probabilists' convention.
    GaussHermite rule;
    rule.nodes.resize(n);
    rule.weights.resize(n);
    const double pim4 = 0.7511255444649425;  // pi^{-1/4}
    const int m = (n + 1) / 2;
    double z = 0.0;
    for (int i = 0; i < m; ++i) {
        if (i == 0)
            z = std::sqrt(2.0 * n + 1.0) - 1.85575 * std::pow(2.0 * n + 1.0, -1.0 / 6.0);
        else if (i == 1)
            z -= 1.14 * std::pow(static_cast<double>(n), 0.426) / z;
        else if (i == 2)
            z = 1.86 * z - 0.86 * rule.nodes[0];
        else if (i == 3)
            z = 1.91 * z - 0.91 * rule.nodes[1];
        else
            z = 2.0 * z - rule.nodes[i - 2];

        double pp = 0.0;
        for (int iter = 0; iter < 100; ++iter) {
            double p1 = pim4, p2 = 0.0;
            for (int j = 0; j < n; ++j) {
                const double p3 = p2;
                p2 = p1;
                p1 = z * std::sqrt(2.0 / (j + 1.0)) * p2 -
                     std::sqrt(static_cast<double>(j) / (j + 1.0)) * p3;
            }
            pp = std::sqrt(2.0 * n) * p2;
            const double z1 = z;
            z = z1 - p1 / pp;
            if (std::abs(z - z1) < 1e-15) break;
        }
        rule.nodes[i] = z;  // stored in descending order for the upper half
        rule.nodes[n - 1 - i] = -z;
        const double w = 2.0 / (pp * pp);
        rule.weights[i] = w;
        rule.weights[n - 1 - i] = w;
    }
    // Physicists' rule integrates f against e^{-x^2}; substitute x = t/sqrt(2)
    // to get expectations under the standard normal density.
    const double inv_sqrt_pi = 0.5641895835477563;
    for (int i = 0; i < n; ++i) {
        rule.nodes[i] *= std::sqrt(2.0);
        rule.weights[i] *= inv_sqrt_pi;
    }
    return rule;
}

std::string format_double(double x) {
    char buf[40];
    for (int prec = 1; prec <= 17; ++prec) {
        std::snprintf(buf, sizeof(buf), "%.*g", prec, x);
        if (std::strtod(buf, nullptr) == x) break;
    }
    return buf;
}

}  // namespace airkit
