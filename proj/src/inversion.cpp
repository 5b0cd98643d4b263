#include "qpat/inversion.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace qpat {

namespace {

// Everything that is fixed across objective/gradient evaluations for one
// data set: quotient traces, the unit mass matrix and the unit stiffness.
struct Stage1Workspace {
    std::shared_ptr<const Mesh> mesh;
    const NoisyDataSet* data = nullptr;
    std::vector<std::vector<double>> f_traces;   // per quotient channel
    SparseSymMatrix mass1;                        // sigma == 1
    SparseSymMatrix stiff1;                       // q == 1
    SolverKind solver = SolverKind::pcg;
    double alpha = 0.0;

    int L() const { return static_cast<int>(data->w_delta.size()); }
};

Stage1Workspace make_workspace(const NoisyDataSet& data,
                               const IlluminationSet& illum,
                               const InversionConfig& cfg) {
    if (data.w_delta.empty())
        throw std::invalid_argument("stage 1: data set has no quotients");
    if (static_cast<int>(data.w_delta.size()) != illum.L)
        throw std::invalid_argument(
            "stage 1: quotient count does not match illumination count");
    Stage1Workspace ws;
    ws.mesh = data.w_delta.front().mesh;
    ws.data = &data;
    ws.solver = cfg.solver;
    ws.alpha = cfg.alpha;
    const Mesh& mesh = *ws.mesh;
    ws.f_traces.reserve(illum.L);
    for (int l = 1; l <= illum.L; ++l)
        ws.f_traces.push_back(trace_on_mesh(illum, l + 1, mesh));
    FeFunction one(ws.mesh, 1.0);
    ws.mass1 = assemble_mass(mesh, one);
    ws.stiff1 = assemble_stiffness(mesh, one);
    return ws;
}

double l2_sq_via_mass(const Stage1Workspace& ws, const std::vector<double>& r) {
    std::vector<double> Mr;
    ws.mass1.apply(r, Mr);
    double s = 0.0;
    for (std::size_t i = 0; i < r.size(); ++i) s += r[i] * Mr[i];
    return s;
}

struct EvalResult {
    double J = 0.0;
    std::vector<FeFunction> states;   // kept only when the caller needs them
};

EvalResult eval_objective(const Stage1Workspace& ws, const FeFunction& q,
                          bool keep_states) {
    const Mesh& mesh = *ws.mesh;
    SparseSymMatrix A = assemble_stiffness(mesh, q);
    std::vector<double> zero_rhs(mesh.node_count(), 0.0);

    EvalResult ev;
    for (int l = 0; l < ws.L(); ++l) {
        FeFunction w =
            solve_dirichlet(A, zero_rhs, ws.f_traces[l], ws.mesh, ws.solver).u;
        std::vector<double> r(mesh.node_count());
        for (int i = 0; i < mesh.node_count(); ++i)
            r[i] = w.values[i] - ws.data->w_delta[l].values[i];
        ev.J += 0.5 * l2_sq_via_mass(ws, r);
        if (keep_states) ev.states.push_back(std::move(w));
    }

    std::vector<double> Aq;
    ws.stiff1.apply(q.values, Aq);
    double penalty = 0.0;
    for (int i = 0; i < mesh.node_count(); ++i) penalty += q.values[i] * Aq[i];
    ev.J += 0.5 * ws.alpha * ws.L() * penalty;
    return ev;
}

FeFunction eval_gradient(const Stage1Workspace& ws, const FeFunction& q) {
    const Mesh& mesh = *ws.mesh;
    SparseSymMatrix A = assemble_stiffness(mesh, q);
    std::vector<double> zero_rhs(mesh.node_count(), 0.0);
    std::vector<double> zero_bc(mesh.node_count(), 0.0);

    FeFunction grad(ws.mesh, 0.0);
    for (int l = 0; l < ws.L(); ++l) {
        FeFunction w =
            solve_dirichlet(A, zero_rhs, ws.f_traces[l], ws.mesh, ws.solver).u;
        std::vector<double> r(mesh.node_count());
        for (int i = 0; i < mesh.node_count(); ++i)
            r[i] = w.values[i] - ws.data->w_delta[l].values[i];
        std::vector<double> Mr;
        ws.mass1.apply(r, Mr);
        FeFunction p = solve_dirichlet(A, Mr, zero_bc, ws.mesh, ws.solver).u;

        auto gw = element_gradient(w);
        auto gp = element_gradient(p);
        for (int t = 0; t < mesh.tri_count(); ++t) {
            double dgg = gw[t][0] * gp[t][0] + gw[t][1] * gp[t][1];
            double contrib = -signed_area(mesh, t) / 3.0 * dgg;
            for (int v : mesh.triangles[t]) grad.values[v] += contrib;
        }
    }

    std::vector<double> Aq;
    ws.stiff1.apply(q.values, Aq);
    const double aL = ws.alpha * ws.L();
    for (int i = 0; i < mesh.node_count(); ++i) grad.values[i] += aL * Aq[i];

    for (int id : mesh.boundary_nodes) grad.values[id] = 0.0;
    return grad;
}

double nodal_norm(const std::vector<double>& v) {
    double s = 0.0;
    for (double x : v) s += x * x;
    return std::sqrt(s);
}

} // namespace

double objective(const FeFunction& q, const NoisyDataSet& data,
                 const IlluminationSet& illum, const InversionConfig& cfg) {
    Stage1Workspace ws = make_workspace(data, illum, cfg);
    return eval_objective(ws, q, false).J;
}

FeFunction objective_gradient(const FeFunction& q, const NoisyDataSet& data,
                              const IlluminationSet& illum,
                              const InversionConfig& cfg) {
    Stage1Workspace ws = make_workspace(data, illum, cfg);
    return eval_gradient(ws, q);
}

FeFunction project_box(const FeFunction& q, const AdmissibleBox& box) {
    if (!(box.lower > 0.0) || box.lower > box.upper)
        throw std::invalid_argument("project_box: invalid box bounds");
    if (box.fixed_boundary.size() != q.values.size())
        throw std::invalid_argument("project_box: fixed boundary size mismatch");
    FeFunction out = q;
    const Mesh& mesh = *q.mesh;
    for (int i = 0; i < mesh.node_count(); ++i) {
        if (mesh.is_boundary[i])
            out.values[i] = box.fixed_boundary[i];
        else
            out.values[i] =
                std::min(box.upper, std::max(box.lower, out.values[i]));
    }
    return out;
}

Stage1Result invert_stage1(const NoisyDataSet& data,
                           const IlluminationSet& illum,
                           const AdmissibleBox& box,
                           const InversionConfig& cfg) {
    Stage1Workspace ws = make_workspace(data, illum, cfg);
    const Mesh& mesh = *ws.mesh;

    // H1 smoother for the search direction. The raw gradient is a vector of
    // linear functionals (it scales with the cell area); solving
    // (mass + stiffness) d = g with d = 0 on the boundary turns it into the
    // nodal values of its H1 Riesz representative, so steps are mesh
    // independent and smooth modes are corrected first.
    SparseSymMatrix smoother = ws.mass1;
    for (std::size_t p = 0; p < smoother.vals.size(); ++p)
        smoother.vals[p] += ws.stiff1.vals[p];
    std::vector<double> zero_bc(mesh.node_count(), 0.0);
    auto smooth = [&](const FeFunction& g) {
        return solve_dirichlet(smoother, g.values, zero_bc, ws.mesh, ws.solver)
            .u;
    };

    // Constant start: mean of the fixed boundary values.
    double mean = 0.0;
    for (int id : mesh.boundary_nodes) mean += box.fixed_boundary[id];
    mean /= static_cast<double>(mesh.boundary_nodes.size());
    FeFunction q(ws.mesh, mean);
    q = project_box(q, box);

    Stage1Result res;
    double J = eval_objective(ws, q, false).J;
    res.objective_history.push_back(J);

    constexpr double t_min = 1e-14;
    double t_prev = cfg.armijo_init_step;
    std::vector<double> q_prev, d_prev;

    for (int it = 0; it < cfg.max_iters; ++it) {
        FeFunction g = eval_gradient(ws, q);

        // Projected-gradient stationarity measure at unit step.
        FeFunction probe = q;
        for (std::size_t i = 0; i < probe.values.size(); ++i)
            probe.values[i] -= g.values[i];
        probe = project_box(probe, box);
        std::vector<double> pg(q.values.size());
        for (std::size_t i = 0; i < pg.size(); ++i)
            pg[i] = q.values[i] - probe.values[i];
        res.projected_gradient_norm = nodal_norm(pg);
        if (res.projected_gradient_norm <= cfg.grad_tol * (1.0 + std::abs(J)))
            break;

        FeFunction d = smooth(g);

        // Trial step: safeguarded BB1 on the smoothed pairs once history
        // exists.
        double t = t_prev;
        if (it == 0) {
            t = cfg.armijo_init_step;
        } else if (cfg.bb_step) {
            double ss = 0.0, sy = 0.0;
            for (std::size_t i = 0; i < q.values.size(); ++i) {
                double s = q.values[i] - q_prev[i];
                double y = d.values[i] - d_prev[i];
                ss += s * s;
                sy += s * y;
            }
            t = (sy > 0.0) ? std::min(1e4, std::max(1e-4, ss / sy))
                           : 2.0 * t_prev;
        } else {
            t = 2.0 * t_prev;
        }

        q_prev = q.values;
        d_prev = d.values;

        bool accepted = false;
        while (t >= t_min) {
            FeFunction trial = q;
            for (std::size_t i = 0; i < trial.values.size(); ++i)
                trial.values[i] -= t * d.values[i];
            trial = project_box(trial, box);
            std::vector<double> step(q.values.size());
            for (std::size_t i = 0; i < step.size(); ++i)
                step[i] = trial.values[i] - q.values[i];
            double step_sq = 0.0;
            for (double s : step) step_sq += s * s;
            if (step_sq == 0.0) break;   // projection pinned every node

            double J_trial = eval_objective(ws, trial, false).J;
            if (J_trial <= J - cfg.armijo_c1 / t * step_sq) {
                q = std::move(trial);
                J = J_trial;
                res.objective_history.push_back(J);
                t_prev = t;
                accepted = true;
                break;
            }
            t *= cfg.armijo_shrink;
        }
        res.iterations = it + 1;
        if (!accepted) {
            res.stagnated = true;
            break;
        }
    }

    res.q = std::move(q);
    return res;
}

FeFunction splice_qstar(const FeFunction& q_stage1, const FeFunction& D_dagger,
                        const FeFunction& sigma_dagger, const FeFunction& Z1) {
    if (!q_stage1.mesh)
        throw std::invalid_argument("splice_qstar: null mesh");
    const Mesh& mesh = *q_stage1.mesh;
    if (D_dagger.values.size() != q_stage1.values.size() ||
        sigma_dagger.values.size() != q_stage1.values.size() ||
        Z1.values.size() != q_stage1.values.size())
        throw std::invalid_argument("splice_qstar: field size mismatch");

    std::vector<char> in_region(mesh.node_count(), 0);
    for (int t = 0; t < mesh.tri_count(); ++t)
        if (mesh.subdomain_tags[t])
            for (int v : mesh.triangles[t]) in_region[v] = 1;

    FeFunction out = q_stage1;
    for (int i = 0; i < mesh.node_count(); ++i) {
        if (in_region[i]) continue;
        double denom = sigma_dagger.values[i];
        if (!std::isfinite(denom) || denom == 0.0 ||
            !std::isfinite(D_dagger.values[i]))
            throw std::invalid_argument(
                "splice_qstar: ground truth missing on the complement");
        double ratio = Z1.values[i] / denom;
        out.values[i] = D_dagger.values[i] * ratio * ratio;
    }
    return out;
}

Stage2Result invert_stage2(const FeFunction& q_star, const FeFunction& Z1,
                           SolverKind kind) {
    if (!q_star.mesh)
        throw std::invalid_argument("invert_stage2: null mesh");
    const auto mesh = q_star.mesh;
    SparseSymMatrix A = assemble_stiffness(*mesh, q_star);
    std::vector<double> rhs = assemble_load(*mesh, Z1);
    std::vector<double> zero_bc(mesh->node_count(), 0.0);

    Stage2Result out;
    out.v = solve_dirichlet(A, rhs, zero_bc, mesh, kind).u;
    out.D_star = FeFunction(mesh, 0.0);
    out.sigma_star = FeFunction(mesh, 0.0);
    for (int i = 0; i < mesh->node_count(); ++i) {
        double vp1 = out.v.values[i] + 1.0;
        out.D_star.values[i] = q_star.values[i] * vp1 * vp1;
        out.sigma_star.values[i] = Z1.values[i] * vp1;
    }
    return out;
}

std::pair<double, double> relative_errors(const FeFunction& D_star,
                                          const FeFunction& sigma_star,
                                          const GroundTruth& gt) {
    if (!D_star.mesh || !sigma_star.mesh)
        throw std::invalid_argument("relative_errors: null mesh");
    auto mesh = D_star.mesh;
    FeFunction D_ref = nodal_interpolate(gt.D_true, mesh);
    FeFunction s_ref = nodal_interpolate(gt.sigma_true, mesh);

    FeFunction dD(mesh, 0.0), ds(mesh, 0.0);
    for (int i = 0; i < mesh->node_count(); ++i) {
        dD.values[i] = D_star.values[i] - D_ref.values[i];
        ds.values[i] = sigma_star.values[i] - s_ref.values[i];
    }
    return {l2_norm(dD) / l2_norm(D_ref), l2_norm(ds) / l2_norm(s_ref)};
}

} // namespace qpat
