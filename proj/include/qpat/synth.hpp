#pragma once

// Data synthesis: forward solves for every illumination on a fine mesh,
// optical energies H = sigma u, nodal transfer to the working mesh, additive
// Gaussian noise scaled by the nodal sup of |H|, clamping of the reference
// channel, and the quotient fields the inversion consumes.

#include "qpat/fem.hpp"
#include "qpat/illumination.hpp"
#include "qpat/mesh.hpp"

#include <cstdint>
#include <functional>
#include <memory>
#include <vector>

namespace qpat {

struct GroundTruth {
    std::function<double(double, double)> D_true;
    std::function<double(double, double)> sigma_true;
    double Lambda_D = 1.0;
    double Lambda_sigma = 1.0;
};

// One forward solve: u with (D grad u, grad v) + (sigma u, v) = 0 for all
// interior v and u = g_trace on the boundary.
FeFunction solve_qpat_forward(const std::shared_ptr<const Mesh>& mesh,
                              const FeFunction& D, const FeFunction& sigma,
                              const std::vector<double>& g_trace,
                              SolverKind kind = SolverKind::pcg);

// Nodewise product H = sigma * u, re-interpolated as a P1 field.
FeFunction optical_energy(const FeFunction& sigma, const FeFunction& u);

// Z(x_i) = H(x_i) + delta * max_j |H(x_j)| * xi_i, xi iid standard normal
// from substream 2000+channel of the seed.
FeFunction add_noise(const FeFunction& H, double delta, std::uint64_t seed,
                     int channel);

// Nodal clamp of the reference channel to [c_lower, upper]. The theory
// normalizes the reference energy so that H^(1) <= 1, hence the default
// upper bound; the pipeline passes max(1, sup H^(1)) so that data whose
// natural scale exceeds 1 is only trimmed where noise overshoots the true
// supremum.
FeFunction clamp_reference(const FeFunction& Z1, double c_lower,
                           double upper = 1.0);

struct NoisyDataSet {
    double delta = 0.0;
    double c_lower = 0.0;
    std::uint64_t noise_seed = 0;
    std::vector<FeFunction> Z;         // L+1 channels; Z[0] is clamped
    std::vector<FeFunction> w_delta;   // L quotients Z[l]/Z[0]
};

// Quotients w_delta[l] = Z[l+1] / Z[0] nodewise; requires a clamped
// reference channel (all values >= some positive floor).
std::vector<FeFunction> quotient_data(const NoisyDataSet& data);

struct SynthesisResult {
    IlluminationSet illum;
    NoisyDataSet data;                    // on the working mesh
    std::vector<FeFunction> H_exact;      // noise-free energies, working mesh
    std::vector<FeFunction> w_exact;      // exact quotients, working mesh
    FeFunction u1;                        // reference forward solution, working mesh
    FeFunction q_dagger;                  // D (u1)^2, working mesh
    FeFunction D_dagger, sigma_dagger;    // truth interpolants, working mesh
    std::vector<double> sup_H;            // per channel, working-mesh nodal max
    double c_lower_preclamp_min = 0.0;    // min of Z1 before clamping
};

// Full pipeline on nested meshes (n_fine a multiple of n_work). The noise
// substream of channel ell is 2000+ell; c_lower = max(0.5 * min Z1, floor).
SynthesisResult synthesize(const GroundTruth& gt,
                           const std::shared_ptr<const Mesh>& mesh_fine,
                           const std::shared_ptr<const Mesh>& mesh_work,
                           int L, int M, double delta, std::uint64_t seed,
                           double c_lower_floor = 0.05,
                           double theta_power = 3.0,
                           SolverKind kind = SolverKind::pcg);

} // namespace qpat
