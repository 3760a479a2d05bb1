// Numerical primitives shared across the library: stable log-domain
// reductions, compensated summation, and small (d <= 4) SPD matrix kernels
// used for Gaussian density evaluation.
#pragma once

#include <array>
#include <cmath>
#include <cstddef>
#include <span>
#include <string>
#include <vector>

namespace airkit {

inline constexpr double kLog2E = 1.4426950408889634074;  // 1/ln(2)

// log(1 + e^t) without overflow for any t.
double log1pexp(double t);

// log(sum_i e^{v_i}); stable via max subtraction. Terms more than 50 nats
// below the maximum contribute < 2e-22 relative and are skipped.
double logsumexp(std::span<const double> v);

// Neumaier compensated accumulator. Additions happen in a fixed order, so
// totals are reproducible run to run.
class KahanSum {
  public:
    void add(double x) {
        const double t = sum_ + x;
        if (std::abs(sum_) >= std::abs(x))
            comp_ += (sum_ - t) + x;
        else
            comp_ += (x - t) + sum_;
        sum_ = t;
    }
    double value() const { return sum_ + comp_; }

  private:
    double sum_ = 0.0;
    double comp_ = 0.0;
};

inline constexpr int kMaxDim = 4;

// Lower-triangular Cholesky factor of a d x d SPD matrix, plus the log
// determinant of the original matrix. Row-major, fixed 4x4 backing store.
struct SpdFactor {
    int d = 0;
    std::array<double, kMaxDim * kMaxDim> lower{};
    double log_det = 0.0;

    // Quadratic form v^T A^{-1} v via one forward solve against the factor.
    double inv_quad_form(const double* v) const;
    // out = L * z (maps iid standard normals to the matrix's distribution).
    void transform(const double* z, double* out) const;
};

// Factor a row-major SPD matrix. Returns false (leaving `out` unspecified)
// if a pivot is not strictly positive; `bad_pivot` then holds its value.
bool cholesky(int d, const double* matrix, SpdFactor& out, double* bad_pivot = nullptr);

// Gauss-Hermite rule transformed to expectations under N(0,1):
// E[f(Z)] ~= sum_i w_i f(x_i). Exact for polynomials up to degree 2n-1.
struct GaussHermite {
    std::vector<double> nodes;
    std::vector<double> weights;
};
GaussHermite gauss_hermite(int n);

// Shortest decimal text that parses back to exactly the same double.
std::string format_double(double x);

}  // namespace airkit
