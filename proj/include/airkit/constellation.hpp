// Square QAM constellations with per-axis Gray labels, and the 1D/2D/4D
// views of a polarization-multiplexed symbol stream.
//
// Conventions, fixed across the library and the file formats:
//  * Points are normalized to unit average energy per 2D sub-symbol.
//  * 2D point ordering is row-major over (I amplitude, Q amplitude), both
//    ascending, so indices are reproducible across runs and languages.
//  * A 4D symbol index is x_pol_index * M + y_pol_index, and a received 4D
//    vector is laid out [xI, xQ, yI, yQ].
//  * A 2D label is the I-axis Gray bits followed by the Q-axis Gray bits;
//    a 4D label is the X-polarization label followed by the Y-polarization
//    label. Bit position k counts from the front of that string.
#pragma once

#include <array>
#include <cstdint>
#include <span>
#include <string>
#include <vector>

namespace airkit {

struct Constellation {
    std::string name;                            // e.g. "16QAM"
    int dims_per_subsymbol = 2;                  // real dimensions per 2D sub-symbol
    int levels_per_axis = 0;                     // L; M_2D = L^2 for square QAM
    std::vector<std::array<double, 2>> points;   // unit average energy
    std::vector<std::uint32_t> labels;           // Gray label per point, bits_per_2d() bits

    int size_2d() const { return static_cast<int>(points.size()); }
    int size_4d() const { return size_2d() * size_2d(); }
    int bits_per_2d() const;
    int bits_per_4d() const { return 2 * bits_per_2d(); }
    double average_energy_2d() const;

    // 4D label: X-polarization bits then Y-polarization bits.
    std::uint32_t label_4d(int index_4d) const;
    std::string label_string(int index_2d) const;
};

// Build a unit-energy square QAM constellation with per-axis Gray labels.
// `order` must be an even power of two (4, 16, 64, ...).
Constellation build_qam(int order);

// Transmitted bit string for a 4D symbol index (length bits_per_4d()).
std::string bits_of(const Constellation& c, int symbol_index_4d);

// Constellation export, one line per point: "index  x  y  label".
std::string export_text(const Constellation& c);

// A d-dimensional decomposition of the 4D symbol (d in {1, 2, 4}).
// Each 4D symbol splits into n_sub = 4/d consecutive sub-symbols; sub-symbol
// t covers real dimensions [t*d, (t+1)*d) of the received vector.
struct SymbolView {
    int d = 0;
    int point_count = 0;             // M_d
    int n_sub = 0;                   // 4/d
    int levels = 0;                  // L per axis
    int m2d = 0;                     // M_2D
    std::vector<double> points;      // point_count x d, row-major
    std::vector<std::uint32_t> sub_labels;  // d in {2,4}: Gray label per view point

    int bits_per_point() const;      // log2(point_count)

    // Index of sub-symbol `sub` of a 4D symbol in this view.
    int sub_index(int index_4d, int sub) const;
    // Inverse: rebuild the 4D index from all n_sub sub-symbol indices.
    int compose(std::span<const int> sub_indices) const;

    std::span<const double> point(int j) const {
        return {points.data() + static_cast<std::size_t>(j) * d,
                static_cast<std::size_t>(d)};
    }
};

SymbolView make_view(const Constellation& c, int d);

}  // namespace airkit
