#pragma once

// Empirical check of the directional non-degeneracy of the quotient fields:
// a triangle satisfies the condition when the largest |grad w . nu| over the
// illumination channels reaches the threshold C0. Gradients of P1 fields are
// constant per element, so the region is a union of whole triangles.

#include "qpat/fem.hpp"

#include <array>
#include <vector>

namespace qpat {

struct RegionMask {
    std::vector<char> flags;      // per triangle
    double area_fraction = 0.0;
    std::array<double, 2> nu{1.0, 0.0};
    double C0 = 0.1;
};

// Flags triangle T iff max over fields of |grad w . nu| on T >= C0. nu is
// normalized internally; |nu| must be positive. Throws on an empty sequence.
RegionMask nonzero_region(const std::vector<FeFunction>& ws,
                          std::array<double, 2> nu, double C0);

// Area fractions for the nested prefixes w_1..w_l, l = 1..size. The prefix
// structure makes the flagged sets grow monotonically.
std::vector<double> region_growth_curve(const std::vector<FeFunction>& ws,
                                        std::array<double, 2> nu, double C0);

// Validating variant: one field set per L; each set must extend the previous
// one nodewise (rejects non-nested inputs), then reduces to the prefix form.
std::vector<double> region_growth_curve(
    const std::vector<std::vector<FeFunction>>& sets_per_L,
    std::array<double, 2> nu, double C0);

} // namespace qpat
