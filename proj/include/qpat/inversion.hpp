#pragma once

// Two-stage coefficient reconstruction.
//
// Stage 1 minimizes
//   J(q) = 1/2 sum_l ||w_l(q) - w_delta_l||_L2^2 + (alpha L / 2) |q|_H1^2
// over the box A = {lower <= q <= upper, q fixed on the boundary}, where
// w_l(q) solves (q grad w, grad v) = 0 with trace f_l. The minimizer is found
// by projected descent along the H1-preconditioned gradient (the Riesz
// representative from a mass-plus-stiffness solve) with an Armijo
// backtracking line search (the proximal sufficient-decrease form) and a
// safeguarded Barzilai-Borwein trial step on the smoothed pairs. Gradients
// come from the adjoint method: one extra solve per channel,
// with the element-mean quadrature matching the assembly exactly, so the
// gradient is the exact derivative of the discrete objective.
//
// Stage 2 solves (q* grad v, grad phi) = (Z1, phi) over interior test
// functions with v = 0 on the boundary, then recovers
//   D* = q* (v+1)^2 and sigma* = Z1 (v+1) nodewise.

#include "qpat/fem.hpp"
#include "qpat/illumination.hpp"
#include "qpat/synth.hpp"

#include <vector>

namespace qpat {

struct AdmissibleBox {
    double lower = 0.0;
    double upper = 0.0;
    // Full-length nodal vector; only boundary entries are read.
    std::vector<double> fixed_boundary;
};

struct InversionConfig {
    double alpha = 1e-6;
    int max_iters = 500;
    double grad_tol = 1e-8;
    double armijo_init_step = 1.0;
    double armijo_shrink = 0.5;
    double armijo_c1 = 1e-4;
    bool bb_step = true;
    SolverKind solver = SolverKind::pcg;
};

struct Stage1Result {
    FeFunction q;
    std::vector<double> objective_history;   // J at the start and after each accepted step
    int iterations = 0;
    bool stagnated = false;                   // no accepted step at minimum step size
    double projected_gradient_norm = 0.0;
};

struct Stage2Result {
    FeFunction v;
    FeFunction D_star;
    FeFunction sigma_star;
};

struct InversionResult {
    FeFunction q_star;                        // after splicing
    Stage1Result stage1;
    Stage2Result stage2;
    double e_D = 0.0;
    double e_sigma = 0.0;
};

// The data-fit-plus-penalty objective at q. Traces of the quotient channels
// come from illum (channel l+1 drives quotient l).
double objective(const FeFunction& q, const NoisyDataSet& data,
                 const IlluminationSet& illum, const InversionConfig& cfg);

// Exact gradient of the discrete objective; zero at boundary nodes.
FeFunction objective_gradient(const FeFunction& q, const NoisyDataSet& data,
                              const IlluminationSet& illum,
                              const InversionConfig& cfg);

// Clamp interior values into [lower, upper]; overwrite boundary values with
// the fixed ones.
FeFunction project_box(const FeFunction& q, const AdmissibleBox& box);

// Stage-1 minimization. The initial iterate is the constant equal to the
// mean of the fixed boundary values, projected into the box.
Stage1Result invert_stage1(const NoisyDataSet& data,
                           const IlluminationSet& illum,
                           const AdmissibleBox& box,
                           const InversionConfig& cfg);

// q* = stage-1 iterate on every node touching a tagged element; on the rest
// q* = D_dagger (Z1 / sigma_dagger)^2. Requires subdomain tags on the mesh.
FeFunction splice_qstar(const FeFunction& q_stage1, const FeFunction& D_dagger,
                        const FeFunction& sigma_dagger, const FeFunction& Z1);

Stage2Result invert_stage2(const FeFunction& q_star, const FeFunction& Z1,
                           SolverKind kind = SolverKind::pcg);

// Relative L2 errors against nodal interpolants of the truth on the working
// mesh.
std::pair<double, double> relative_errors(const FeFunction& D_star,
                                          const FeFunction& sigma_star,
                                          const GroundTruth& gt);

} // namespace qpat
