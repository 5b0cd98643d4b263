#include "qpat/synth.hpp"

#include "qpat/rng.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace qpat {

FeFunction solve_qpat_forward(const std::shared_ptr<const Mesh>& mesh,
                              const FeFunction& D, const FeFunction& sigma,
                              const std::vector<double>& g_trace,
                              SolverKind kind) {
    SparseSymMatrix A = assemble_stiffness(*mesh, D);
    SparseSymMatrix Ms = assemble_mass(*mesh, sigma);
    for (std::size_t p = 0; p < A.vals.size(); ++p) A.vals[p] += Ms.vals[p];
    std::vector<double> rhs(mesh->node_count(), 0.0);
    return solve_dirichlet(A, rhs, g_trace, mesh, kind).u;
}

FeFunction optical_energy(const FeFunction& sigma, const FeFunction& u) {
    if (!sigma.mesh || !u.mesh || sigma.mesh->n != u.mesh->n ||
        sigma.values.size() != u.values.size())
        throw std::invalid_argument("optical_energy: mesh mismatch");
    FeFunction H(u.mesh, 0.0);
    for (std::size_t i = 0; i < u.values.size(); ++i)
        H.values[i] = sigma.values[i] * u.values[i];
    return H;
}

FeFunction add_noise(const FeFunction& H, double delta, std::uint64_t seed,
                     int channel) {
    if (delta < 0.0)
        throw std::invalid_argument("add_noise: delta must be >= 0");
    FeFunction Z = H;
    if (delta == 0.0) return Z;
    double sup = 0.0;
    for (double v : H.values) sup = std::max(sup, std::abs(v));
    SplitMix64 rng = substream(seed, 2000 + static_cast<std::uint64_t>(channel));
    for (double& v : Z.values) v += delta * sup * rng.normal();
    return Z;
}

FeFunction clamp_reference(const FeFunction& Z1, double c_lower, double upper) {
    if (!(c_lower > 0.0 && c_lower < upper))
        throw std::invalid_argument(
            "clamp_reference: need 0 < c_lower < upper");
    FeFunction out = Z1;
    for (double& v : out.values) v = std::min(upper, std::max(c_lower, v));
    return out;
}

std::vector<FeFunction> quotient_data(const NoisyDataSet& data) {
    if (data.Z.size() < 2)
        throw std::invalid_argument("quotient_data: need at least 2 channels");
    const FeFunction& Z1 = data.Z[0];
    for (double v : Z1.values)
        if (v < data.c_lower * (1.0 - 1e-12))
            throw std::invalid_argument(
                "quotient_data: reference channel not clamped");
    std::vector<FeFunction> w;
    w.reserve(data.Z.size() - 1);
    for (std::size_t l = 1; l < data.Z.size(); ++l) {
        FeFunction q(Z1.mesh, 0.0);
        for (std::size_t i = 0; i < Z1.values.size(); ++i)
            q.values[i] = data.Z[l].values[i] / Z1.values[i];
        w.push_back(std::move(q));
    }
    return w;
}

SynthesisResult synthesize(const GroundTruth& gt,
                           const std::shared_ptr<const Mesh>& mesh_fine,
                           const std::shared_ptr<const Mesh>& mesh_work,
                           int L, int M, double delta, std::uint64_t seed,
                           double c_lower_floor, double theta_power,
                           SolverKind kind) {
    if (!mesh_fine || !mesh_work)
        throw std::invalid_argument("synthesize: null mesh");
    if (mesh_work->n < 1 || mesh_fine->n % mesh_work->n != 0)
        throw std::invalid_argument(
            "synthesize: working mesh must divide the fine mesh");

    SynthesisResult out;
    out.illum = sample_illuminations(L, M, seed, theta_power);

    FeFunction D_fine = nodal_interpolate(gt.D_true, mesh_fine);
    FeFunction sigma_fine = nodal_interpolate(gt.sigma_true, mesh_fine);
    out.D_dagger = nodal_interpolate(gt.D_true, mesh_work);
    out.sigma_dagger = nodal_interpolate(gt.sigma_true, mesh_work);

    out.data.delta = delta;
    out.data.noise_seed = seed;
    out.H_exact.reserve(L + 1);
    out.data.Z.reserve(L + 1);
    out.sup_H.reserve(L + 1);

    for (int ell = 1; ell <= L + 1; ++ell) {
        std::vector<double> g = trace_on_mesh(out.illum, ell, *mesh_fine);
        FeFunction u = solve_qpat_forward(mesh_fine, D_fine, sigma_fine, g, kind);
        FeFunction H_fine = optical_energy(sigma_fine, u);
        FeFunction H_work = transfer_fine_to_coarse(H_fine, mesh_work);
        if (ell == 1) {
            out.u1 = transfer_fine_to_coarse(u, mesh_work);
            out.q_dagger = FeFunction(mesh_work, 0.0);
            for (int i = 0; i < mesh_work->node_count(); ++i)
                out.q_dagger.values[i] =
                    out.D_dagger.values[i] * out.u1.values[i] * out.u1.values[i];
        }
        double sup = 0.0;
        for (double v : H_work.values) sup = std::max(sup, std::abs(v));
        out.sup_H.push_back(sup);
        out.data.Z.push_back(add_noise(H_work, delta, seed, ell));
        out.H_exact.push_back(std::move(H_work));
    }

    double z1_min = out.data.Z[0].values[0];
    for (double v : out.data.Z[0].values) z1_min = std::min(z1_min, v);
    out.c_lower_preclamp_min = z1_min;
    out.data.c_lower = std::max(0.5 * z1_min, c_lower_floor);
    double upper = std::max(1.0, out.sup_H[0]);
    out.data.Z[0] = clamp_reference(out.data.Z[0], out.data.c_lower, upper);

    out.data.w_delta = quotient_data(out.data);

    // Exact quotients for error metrics and region checks.
    out.w_exact.reserve(L);
    for (int l = 1; l <= L; ++l) {
        FeFunction w(mesh_work, 0.0);
        for (int i = 0; i < mesh_work->node_count(); ++i)
            w.values[i] =
                out.H_exact[l].values[i] / out.H_exact[0].values[i];
        out.w_exact.push_back(std::move(w));
    }
    return out;
}

} // namespace qpat
