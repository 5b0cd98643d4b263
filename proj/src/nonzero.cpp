#include "qpat/nonzero.hpp"

#include <cmath>
#include <stdexcept>

namespace qpat {

namespace {

std::array<double, 2> normalize(std::array<double, 2> nu) {
    double len = std::hypot(nu[0], nu[1]);
    if (!(len > 0.0))
        throw std::invalid_argument("nonzero_region: direction must be nonzero");
    return {nu[0] / len, nu[1] / len};
}

} // namespace

RegionMask nonzero_region(const std::vector<FeFunction>& ws,
                          std::array<double, 2> nu, double C0) {
    if (ws.empty())
        throw std::invalid_argument("nonzero_region: empty field sequence");
    if (!(C0 > 0.0))
        throw std::invalid_argument("nonzero_region: C0 must be positive");
    const Mesh& mesh = *ws.front().mesh;
    for (const auto& w : ws)
        if (!w.mesh || w.mesh->n != mesh.n)
            throw std::invalid_argument("nonzero_region: fields on mixed meshes");

    RegionMask mask;
    mask.nu = normalize(nu);
    mask.C0 = C0;
    mask.flags.assign(mesh.tri_count(), 0);

    std::vector<double> best(mesh.tri_count(), 0.0);
    for (const auto& w : ws) {
        auto g = element_gradient(w);
        for (int t = 0; t < mesh.tri_count(); ++t) {
            double d = std::abs(g[t][0] * mask.nu[0] + g[t][1] * mask.nu[1]);
            if (d > best[t]) best[t] = d;
        }
    }

    double flagged_area = 0.0, total_area = 0.0;
    for (int t = 0; t < mesh.tri_count(); ++t) {
        double a = signed_area(mesh, t);
        total_area += a;
        if (best[t] >= C0) {
            mask.flags[t] = 1;
            flagged_area += a;
        }
    }
    mask.area_fraction = flagged_area / total_area;
    return mask;
}

std::vector<double> region_growth_curve(const std::vector<FeFunction>& ws,
                                        std::array<double, 2> nu, double C0) {
    if (ws.empty())
        throw std::invalid_argument("region_growth_curve: empty sequence");
    std::vector<double> fractions;
    fractions.reserve(ws.size());
    for (std::size_t l = 1; l <= ws.size(); ++l) {
        std::vector<FeFunction> prefix(ws.begin(), ws.begin() + l);
        fractions.push_back(nonzero_region(prefix, nu, C0).area_fraction);
    }
    return fractions;
}

std::vector<double> region_growth_curve(
    const std::vector<std::vector<FeFunction>>& sets_per_L,
    std::array<double, 2> nu, double C0) {
    if (sets_per_L.empty())
        throw std::invalid_argument("region_growth_curve: empty sequence");
    for (std::size_t l = 0; l < sets_per_L.size(); ++l) {
        if (sets_per_L[l].size() != l + 1)
            throw std::invalid_argument(
                "region_growth_curve: set for L must hold exactly L fields");
        if (l == 0) continue;
        for (std::size_t k = 0; k < l; ++k) {
            const auto& prev = sets_per_L[l - 1][k].values;
            const auto& cur = sets_per_L[l][k].values;
            if (prev != cur)
                throw std::invalid_argument(
                    "region_growth_curve: illumination sets are not nested");
        }
    }
    return region_growth_curve(sets_per_L.back(), nu, C0);
}

} // namespace qpat
