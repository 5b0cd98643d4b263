#include "qpat/illumination.hpp"

#include "qpat/rng.hpp"

#include <cmath>
#include <stdexcept>

namespace qpat {

namespace {
constexpr double kPerimeter = 4.0;
}

double BoundaryBasis::eval_phi(int k, double s) const {
    const BasisEntry& e = entries.at(static_cast<std::size_t>(k) - 1);
    const double pi = std::acos(-1.0);
    switch (e.kind) {
    case BasisEntry::Kind::constant:
        return 1.0 / std::sqrt(kPerimeter);
    case BasisEntry::Kind::cosine:
        return std::sqrt(2.0 / kPerimeter) *
               std::cos(2.0 * pi * e.m * s / kPerimeter);
    case BasisEntry::Kind::sine:
        return std::sqrt(2.0 / kPerimeter) *
               std::sin(2.0 * pi * e.m * s / kPerimeter);
    }
    return 0.0;
}

double BoundaryBasis::eval_e(int k, double s) const {
    const BasisEntry& e = entries.at(static_cast<std::size_t>(k) - 1);
    return e.normalization * eval_phi(k, s);
}

BoundaryBasis laplace_beltrami_basis(int K) {
    if (K < 1)
        throw std::invalid_argument("laplace_beltrami_basis: K must be >= 1");
    const double pi = std::acos(-1.0);
    BoundaryBasis basis;
    basis.entries.reserve(K);
    for (int k = 1; k <= K; ++k) {
        BasisEntry e;
        e.k = k;
        if (k == 1) {
            e.kind = BasisEntry::Kind::constant;
            e.m = 0;
            e.lambda = 0.0;
        } else {
            e.m = k / 2;    // entries 2,3 have m=1; 4,5 have m=2; ...
            e.kind = (k % 2 == 0) ? BasisEntry::Kind::cosine
                                  : BasisEntry::Kind::sine;
            double omega = 2.0 * pi * e.m / kPerimeter;
            e.lambda = omega * omega;
        }
        e.normalization = std::pow(1.0 + e.lambda, -0.25);
        basis.entries.push_back(e);
    }
    return basis;
}

double IlluminationSet::eval(int ell, double s) const {
    if (ell < 1 || ell > L + 1)
        throw std::out_of_range("IlluminationSet::eval: channel out of range");
    if (ell == 1) return 1.0;
    const auto& a = coefficients[static_cast<std::size_t>(ell) - 2];
    double g = 0.0;
    for (int k = 1; k <= M; ++k)
        g += a[static_cast<std::size_t>(k) - 1] * basis.eval_e(k, s);
    return g;
}

IlluminationSet sample_illuminations(int L, int M, std::uint64_t seed,
                                     double theta_power) {
    if (L < 1 || M < 1)
        throw std::invalid_argument("sample_illuminations: L, M must be >= 1");
    IlluminationSet set;
    set.L = L;
    set.M = M;
    set.rng_seed = seed;
    set.theta_power = theta_power;
    set.basis = laplace_beltrami_basis(M);
    set.coefficients.resize(L);
    for (int ell = 2; ell <= L + 1; ++ell) {
        SplitMix64 rng = substream(seed, 1000 + static_cast<std::uint64_t>(ell));
        auto& a = set.coefficients[static_cast<std::size_t>(ell) - 2];
        a.resize(M);
        for (int k = 1; k <= M; ++k) {
            double theta = std::pow(static_cast<double>(k), -theta_power);
            a[static_cast<std::size_t>(k) - 1] = theta * rng.normal();
        }
    }
    return set;
}

std::vector<double> trace_on_mesh(const IlluminationSet& illum, int ell,
                                  const Mesh& mesh) {
    std::vector<double> g(mesh.node_count(), 0.0);
    for (int id : mesh.boundary_nodes)
        g[id] = illum.eval(ell, mesh.boundary_arclength[id]);
    return g;
}

} // namespace qpat
