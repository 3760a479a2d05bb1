#include "airkit/constellation.hpp"

#include <cmath>
#include <sstream>
#include <stdexcept>

namespace airkit {

namespace {

bool is_power_of_two(int v) { return v > 0 && (v & (v - 1)) == 0; }

int int_log2(int v) {
    int k = 0;
    while ((1 << k) < v) ++k;
    return k;
}

std::uint32_t gray_code(std::uint32_t i) { return i ^ (i >> 1); }

}  // namespace

int Constellation::bits_per_2d() const { return int_log2(size_2d()); }

double Constellation::average_energy_2d() const {
    double e = 0.0;
    for (const auto& p : points) e += p[0] * p[0] + p[1] * p[1];
    return e / static_cast<double>(points.size());
}

std::uint32_t Constellation::label_4d(int index_4d) const {
    const int m = size_2d();
    return (labels[static_cast<std::size_t>(index_4d / m)] << bits_per_2d()) |
           labels[static_cast<std::size_t>(index_4d % m)];
}

std::string Constellation::label_string(int index_2d) const {
    const int nb = bits_per_2d();
    std::string s(static_cast<std::size_t>(nb), '0');
    const std::uint32_t lab = labels[static_cast<std::size_t>(index_2d)];
    for (int k = 0; k < nb; ++k)
        if ((lab >> (nb - 1 - k)) & 1u) s[static_cast<std::size_t>(k)] = '1';
    return s;
}

Constellation build_qam(int order) {
    if (!is_power_of_two(order))
        throw std::invalid_argument("build_qam: order " + std::to_string(order) +
                                    " is not a power of two");
    const int m = int_log2(order);
    if (m % 2 != 0)
        throw std::invalid_argument("build_qam: order " + std::to_string(order) +
                                    " is not square (need an even power of two)");
    const int levels = 1 << (m / 2);

    // Per-axis amplitudes -(L-1), ..., -1, 1, ..., L-1 scaled so the 2D
    // constellation has unit average energy.
    double raw_axis_energy = 0.0;
    std::vector<double> amps(static_cast<std::size_t>(levels));
    for (int i = 0; i < levels; ++i) {
        amps[static_cast<std::size_t>(i)] = static_cast<double>(2 * i - (levels - 1));
        raw_axis_energy += amps[static_cast<std::size_t>(i)] * amps[static_cast<std::size_t>(i)];
    }
    raw_axis_energy /= levels;
    const double scale = 1.0 / std::sqrt(2.0 * raw_axis_energy);

    Constellation c;
    c.name = std::to_string(order) + "QAM";
    c.levels_per_axis = levels;
    c.points.reserve(static_cast<std::size_t>(order));
    c.labels.reserve(static_cast<std::size_t>(order));
    const int axis_bits = m / 2;
    for (int i = 0; i < levels; ++i) {
        for (int q = 0; q < levels; ++q) {
            c.points.push_back({amps[static_cast<std::size_t>(i)] * scale,
                                amps[static_cast<std::size_t>(q)] * scale});
            c.labels.push_back((gray_code(static_cast<std::uint32_t>(i)) << axis_bits) |
                               gray_code(static_cast<std::uint32_t>(q)));
        }
    }
    return c;
}

std::string bits_of(const Constellation& c, int symbol_index_4d) {
    if (symbol_index_4d < 0 || symbol_index_4d >= c.size_4d())
        throw std::out_of_range("bits_of: 4D symbol index " +
                                std::to_string(symbol_index_4d) + " out of range [0, " +
                                std::to_string(c.size_4d()) + ")");
    const int m = c.size_2d();
    return c.label_string(symbol_index_4d / m) + c.label_string(symbol_index_4d % m);
}

std::string export_text(const Constellation& c) {
    std::ostringstream os;
    os.precision(17);
    for (int j = 0; j < c.size_2d(); ++j) {
        os << j << "  " << c.points[static_cast<std::size_t>(j)][0] << "  "
           << c.points[static_cast<std::size_t>(j)][1] << "  " << c.label_string(j)
           << "\n";
    }
    return os.str();
}

int SymbolView::bits_per_point() const { return int_log2(point_count); }

int SymbolView::sub_index(int index_4d, int sub) const {
    switch (d) {
        case 4:
            return index_4d;
        case 2:
            return sub == 0 ? index_4d / m2d : index_4d % m2d;
        case 1: {
            const int pol = index_4d / m2d;
            const int q = index_4d % m2d;
            const int p2d = sub < 2 ? pol : q;
            return (sub % 2 == 0) ? p2d / levels : p2d % levels;
        }
        default:
            throw std::logic_error("SymbolView: bad dimension");
    }
}

int SymbolView::compose(std::span<const int> sub_indices) const {
    if (static_cast<int>(sub_indices.size()) != n_sub)
        throw std::invalid_argument("SymbolView::compose: expected " +
                                    std::to_string(n_sub) + " sub-symbol indices");
    switch (d) {
        case 4:
            return sub_indices[0];
        case 2:
            return sub_indices[0] * m2d + sub_indices[1];
        case 1:
            return (sub_indices[0] * levels + sub_indices[1]) * m2d +
                   (sub_indices[2] * levels + sub_indices[3]);
        default:
            throw std::logic_error("SymbolView: bad dimension");
    }
}

SymbolView make_view(const Constellation& c, int d) {
    if (d != 1 && d != 2 && d != 4)
        throw std::invalid_argument("make_view: dimension must be 1, 2 or 4 (got " +
                                    std::to_string(d) + ")");
    const int m = c.size_2d();
    const int levels = c.levels_per_axis;
    if (d == 1 && levels * levels != m)
        throw std::invalid_argument(
            "make_view: the 1D view requires a square constellation");

    SymbolView v;
    v.d = d;
    v.n_sub = 4 / d;
    v.levels = levels;
    v.m2d = m;
    if (d == 1) {
        v.point_count = levels;
        v.points.resize(static_cast<std::size_t>(levels));
        // Amplitude levels, ascending; entry i matches axis index i of the
        // row-major 2D ordering.
        for (int i = 0; i < levels; ++i)
            v.points[static_cast<std::size_t>(i)] =
                c.points[static_cast<std::size_t>(i) * levels][0];
    } else if (d == 2) {
        v.point_count = m;
        v.points.resize(static_cast<std::size_t>(m) * 2);
        for (int j = 0; j < m; ++j) {
            v.points[2 * static_cast<std::size_t>(j)] = c.points[static_cast<std::size_t>(j)][0];
            v.points[2 * static_cast<std::size_t>(j) + 1] = c.points[static_cast<std::size_t>(j)][1];
        }
        v.sub_labels = c.labels;
    } else {
        v.point_count = m * m;
        v.points.resize(static_cast<std::size_t>(m) * m * 4);
        v.sub_labels.resize(static_cast<std::size_t>(m) * m);
        const int b2 = c.bits_per_2d();
        for (int jx = 0; jx < m; ++jx) {
            for (int jy = 0; jy < m; ++jy) {
                const std::size_t j = static_cast<std::size_t>(jx) * m + jy;
                v.points[4 * j + 0] = c.points[static_cast<std::size_t>(jx)][0];
                v.points[4 * j + 1] = c.points[static_cast<std::size_t>(jx)][1];
                v.points[4 * j + 2] = c.points[static_cast<std::size_t>(jy)][0];
                v.points[4 * j + 3] = c.points[static_cast<std::size_t>(jy)][1];
                v.sub_labels[j] = (c.labels[static_cast<std::size_t>(jx)] << b2) |
                                  c.labels[static_cast<std::size_t>(jy)];
            }
        }
    }
    return v;
}

}  // namespace airkit
