#pragma once

// End-to-end orchestration: the five benchmark coefficient pairs, single
// reconstruction runs, noise-coupled rate studies, and the flat output
// formats (nodal CSV, key=value manifests, binary PGM heatmaps). All outputs
// are deterministic functions of the run parameters: fixed %.17g formatting,
// no timestamps, serial execution.

#include "qpat/inversion.hpp"
#include "qpat/nonzero.hpp"
#include "qpat/synth.hpp"

#include <cstdint>
#include <map>
#include <string>
#include <vector>

namespace qpat {

struct ExampleSpec {
    int id = 0;
    std::string name;
    GroundTruth truth;
};

// The benchmark catalog, ids 1..5. Example 5 has piecewise-constant
// coefficients and is excluded from quantitative rate acceptance.
ExampleSpec example_spec(int id);

struct RunParams {
    int n_fine = 128;
    int n = 12;
    int L = 5;
    int M = 5;
    double delta = 1e-2;
    double alpha = 3e-7;
    std::uint64_t seed = 1;
    double c_lower_floor = 0.05;
    int max_iters = 500;
    double grad_tol = 1e-8;
    double C0 = 0.1;
    double nu_x = 1.0;
    double nu_y = 0.0;
    double theta_power = 3.0;
    SolverKind solver = SolverKind::pcg;
};

struct RunResult {
    InversionResult inversion;
    SynthesisResult synthesis;
    AdmissibleBox box;
    RunParams params;
    int example_id = 0;
};

// Full pipeline for one parameter set: synthesize -> stage 1 -> splice ->
// stage 2 -> errors. n must divide n_fine. The box is computed from the
// example's declared bounds: upper = 2 Lambda_D Lambda_sigma^2.
RunResult run_example(const ExampleSpec& spec, const RunParams& params);

struct RateRecord {
    double delta = 0.0;
    int n = 0;
    double alpha = 0.0;
    int L = 0;
    std::uint64_t seed = 0;
    double e_D = 0.0;
    double e_sigma = 0.0;
    int iters = 0;
    double J_final = 0.0;
};

struct RateStudy {
    std::vector<RateRecord> records;       // one per (delta, seed)
    std::vector<double> deltas;
    std::vector<double> mean_e_D;          // seed averages per delta
    std::vector<double> mean_e_sigma;
    double r_D = 0.0;                      // fitted decay exponents
    double r_sigma = 0.0;
};

// Coupled study: n ~ delta^(-1/2) and alpha ~ delta^2 anchored at the first
// (largest) delta, n rounded to the nearest divisor of n_fine (tie toward
// the larger n). Runs every delta for seeds seed..seed+num_seeds-1 and fits
// e ~ C delta^r by least squares on the log-log means. Needs >= 3 deltas,
// strictly decreasing.
RateStudy rate_study(const ExampleSpec& spec,
                     const std::vector<double>& deltas, int base_n,
                     double base_alpha, const RunParams& base,
                     int num_seeds = 1);

// Nearest divisor of n_fine to target; ties prefer the larger divisor.
int round_to_divisor(int n_fine, double target);

// Least-squares slope of log(e) against log(delta).
double fit_loglog_slope(const std::vector<double>& deltas,
                        const std::vector<double>& errors);

// Nodal field as a binary 8-bit graymap of the structured (n+1)x(n+1) grid,
// row 0 at y = 1. A sidecar "<path>.minmax.txt" records the value range.
void emit_heatmap(const FeFunction& f, const std::string& path);

// Per-cell rasterization of a triangle mask (two triangles per cell ->
// 0/128/255), same sidecar-free PGM container.
void emit_mask_heatmap(const Mesh& mesh, const std::vector<char>& flags,
                       const std::string& path);

// CSV with header node_id,x,y,value and %.17g formatting.
void write_nodal_csv(const FeFunction& f, const std::string& path);
FeFunction read_nodal_csv(const std::string& path,
                          const std::shared_ptr<const Mesh>& mesh);

// key=value manifest, keys written in the given order.
void write_manifest(const std::vector<std::pair<std::string, std::string>>& kv,
                    const std::string& path);
std::map<std::string, std::string> read_manifest(const std::string& path);

// key=value config files; '#' starts a comment. Unknown keys are rejected.
void apply_config_file(const std::string& path, RunParams& params);

std::string format_double(double v);   // %.17g

} // namespace qpat
