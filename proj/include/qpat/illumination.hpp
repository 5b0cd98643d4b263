#pragma once

// Boundary illuminations for the forward model. The boundary of the unit
// square is a closed curve of length 4, parameterized by arc length s; the
// Laplace-Beltrami eigenfunctions on it are the Fourier modes
//   phi_1 = 1/2 (eigenvalue 0),
//   phi = sqrt(1/2) cos(pi m s / 2), sqrt(1/2) sin(pi m s / 2)
//         with eigenvalue (pi m / 2)^2 for m >= 1,
// ordered (constant, cos 1, sin 1, cos 2, sin 2, ...). The sampled
// illuminations use e_k = (1 + lambda_k)^(-1/4) phi_k, which normalizes each
// mode in the H^(1/2) boundary norm.
//
// Channel 1 is the fixed constant illumination g == 1; channels 2..L+1 are
// random M-term expansions sum_k a_k e_k with a_k ~ N(0, theta_k^2) and
// theta_k = k^(-theta_power). Coefficients of channel ell come from RNG
// substream 1000+ell, so sets with the same seed are nested prefixes of one
// another regardless of L.

#include "qpat/fem.hpp"
#include "qpat/mesh.hpp"

#include <cstdint>
#include <vector>

namespace qpat {

struct BasisEntry {
    enum class Kind { constant, cosine, sine };
    int k = 0;            // 1-based position in the ordering
    Kind kind = Kind::constant;
    int m = 0;            // frequency; 0 for the constant
    double lambda = 0.0;
    double normalization = 1.0;   // (1 + lambda)^(-1/4)
};

struct BoundaryBasis {
    std::vector<BasisEntry> entries;

    // Raw eigenfunction phi_k and the H^(1/2)-normalized e_k at arc length s.
    double eval_phi(int k, double s) const;   // k is 1-based
    double eval_e(int k, double s) const;
};

BoundaryBasis laplace_beltrami_basis(int K);

struct IlluminationSet {
    int L = 0;
    int M = 0;
    std::uint64_t rng_seed = 0;
    double theta_power = 3.0;
    BoundaryBasis basis;
    // coefficients[l][k-1] = a_k of channel l+2, l = 0..L-1
    std::vector<std::vector<double>> coefficients;

    // Boundary value of channel ell (1-based, 1..L+1) at arc length s.
    double eval(int ell, double s) const;
};

IlluminationSet sample_illuminations(int L, int M, std::uint64_t seed,
                                     double theta_power = 3.0);

// Nodal trace of channel ell on the mesh boundary: a full-length vector with
// g evaluated at each boundary node's arc length and zeros at interior nodes
// (the layout solve_dirichlet expects).
std::vector<double> trace_on_mesh(const IlluminationSet& illum, int ell,
                                  const Mesh& mesh);

} // namespace qpat
