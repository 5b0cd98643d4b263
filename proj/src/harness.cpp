#include "qpat/harness.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>
#include <stdexcept>

namespace qpat {

namespace {
const double kPi = std::acos(-1.0);
}

ExampleSpec example_spec(int id) {
    ExampleSpec s;
    s.id = id;
    switch (id) {
    case 1:
        s.name = "smooth sine diffusion, twin gaussian absorption";
        s.truth.D_true = [](double x, double y) {
            return 2.0 + std::sin(2.0 * kPi * x) * std::sin(2.0 * kPi * y);
        };
        s.truth.sigma_true = [](double x, double y) {
            double s1 = std::exp(-20.0 * (x - 0.3) * (x - 0.3) -
                                 20.0 * (y - 0.7) * (y - 0.7));
            double s2 = std::exp(-20.0 * (x - 0.7) * (x - 0.7) -
                                 20.0 * (y - 0.3) * (y - 0.3));
            return 6.0 + 4.0 * s1 + 4.0 * s2;
        };
        s.truth.Lambda_D = 4.0;
        s.truth.Lambda_sigma = 12.0;
        break;
    case 2:
        s.name = "gaussian bump diffusion, damped sine absorption";
        s.truth.D_true = [](double x, double y) {
            double d1 = std::exp(-40.0 * (x - 0.5) * (x - 0.5) -
                                 40.0 * (y - 0.7) * (y - 0.7));
            double d2 = std::exp(-15.0 * (x - 0.3) * (x - 0.3) -
                                 15.0 * (y - 0.3) * (y - 0.3));
            double d3 = std::exp(-15.0 * (x - 0.7) * (x - 0.7) -
                                 15.0 * (y - 0.3) * (y - 0.3));
            return 1.0 + d1 - 0.5 * d2 - 0.5 * d3;
        };
        s.truth.sigma_true = [](double x, double y) {
            return 1.0 + 0.5 * std::sin(kPi * x) * std::sin(kPi * y) *
                             std::exp(-4.0 * (1.0 - x) * y);
        };
        s.truth.Lambda_D = 4.0;
        s.truth.Lambda_sigma = 2.0;
        break;
    case 3:
        s.name = "modulated sine diffusion, oscillatory absorption";
        s.truth.D_true = [](double x, double y) {
            return 1.0 + 0.5 * std::sin(2.0 * kPi * x) *
                             std::sin(2.0 * kPi * y) * std::exp(x * y);
        };
        s.truth.sigma_true = [](double x, double y) {
            return 3.0 + std::sin(3.0 * kPi * x) * std::sin(3.0 * kPi * y);
        };
        s.truth.Lambda_D = 3.0;
        s.truth.Lambda_sigma = 5.0;
        break;
    case 4:
        s.name = "capped parabolic diffusion, tanh interface absorption";
        s.truth.D_true = [](double x, double y) {
            return std::min(1.4, 1.0 + 2.0 * x * (1.0 - x) * std::sin(kPi * y));
        };
        s.truth.sigma_true = [](double x, double) {
            return 6.0 + 2.0 * std::tanh(20.0 * x - 10.0);
        };
        s.truth.Lambda_D = 2.0;
        s.truth.Lambda_sigma = 9.0;
        break;
    case 5:
        s.name = "piecewise constant inclusions";
        s.truth.D_true = [](double x, double y) {
            double dx = x - 0.3, dy = y - 0.3;
            return 1.0 + (dx * dx + dy * dy < 0.01 ? 0.2 : 0.0);
        };
        s.truth.sigma_true = [](double x, double y) {
            bool in = x >= 0.6 && x <= 0.8 && y >= 0.2 && y <= 0.6;
            return 1.0 + (in ? 0.2 : 0.0);
        };
        s.truth.Lambda_D = 2.0;
        s.truth.Lambda_sigma = 2.0;
        break;
    default:
        throw std::invalid_argument("example_spec: id must be 1..5");
    }
    return s;
}

RunResult run_example(const ExampleSpec& spec, const RunParams& params) {
    if (params.n < 1 || params.n_fine % params.n != 0)
        throw std::invalid_argument("run_example: n must divide n_fine");

    RunResult out;
    out.params = params;
    out.example_id = spec.id;

    auto mesh_fine = std::make_shared<const Mesh>(
        build_unit_square_mesh(params.n_fine));
    auto mesh_work = std::make_shared<const Mesh>(
        tag_interior_subdomain(build_unit_square_mesh(params.n)));

    out.synthesis = synthesize(spec.truth, mesh_fine, mesh_work, params.L,
                               params.M, params.delta, params.seed,
                               params.c_lower_floor, params.theta_power,
                               params.solver);

    const double lam_q =
        2.0 * spec.truth.Lambda_D * spec.truth.Lambda_sigma *
        spec.truth.Lambda_sigma;
    out.box.lower = 1.0 / lam_q;
    out.box.upper = lam_q;
    out.box.fixed_boundary = out.synthesis.q_dagger.values;

    InversionConfig cfg;
    cfg.alpha = params.alpha;
    cfg.max_iters = params.max_iters;
    cfg.grad_tol = params.grad_tol;
    cfg.solver = params.solver;

    out.inversion.stage1 =
        invert_stage1(out.synthesis.data, out.synthesis.illum, out.box, cfg);
    out.inversion.q_star =
        splice_qstar(out.inversion.stage1.q, out.synthesis.D_dagger,
                     out.synthesis.sigma_dagger, out.synthesis.data.Z[0]);
    out.inversion.stage2 =
        invert_stage2(out.inversion.q_star, out.synthesis.data.Z[0],
                      params.solver);
    auto errs = relative_errors(out.inversion.stage2.D_star,
                                out.inversion.stage2.sigma_star, spec.truth);
    out.inversion.e_D = errs.first;
    out.inversion.e_sigma = errs.second;
    return out;
}

int round_to_divisor(int n_fine, double target) {
    if (n_fine < 1)
        throw std::invalid_argument("round_to_divisor: n_fine must be >= 1");
    int best = 1;
    double best_dist = std::abs(target - 1.0);
    for (int d = 2; d <= n_fine; ++d) {
        if (n_fine % d != 0) continue;
        double dist = std::abs(target - d);
        if (dist < best_dist || (dist == best_dist && d > best)) {
            best = d;
            best_dist = dist;
        }
    }
    return best;
}

double fit_loglog_slope(const std::vector<double>& deltas,
                        const std::vector<double>& errors) {
    if (deltas.size() != errors.size() || deltas.size() < 2)
        throw std::invalid_argument("fit_loglog_slope: need matched points");
    double sx = 0.0, sy = 0.0, sxx = 0.0, sxy = 0.0;
    const double n = static_cast<double>(deltas.size());
    for (std::size_t i = 0; i < deltas.size(); ++i) {
        double x = std::log(deltas[i]);
        double y = std::log(errors[i]);
        sx += x;
        sy += y;
        sxx += x * x;
        sxy += x * y;
    }
    return (n * sxy - sx * sy) / (n * sxx - sx * sx);
}

RateStudy rate_study(const ExampleSpec& spec,
                     const std::vector<double>& deltas, int base_n,
                     double base_alpha, const RunParams& base, int num_seeds) {
    if (deltas.size() < 3)
        throw std::invalid_argument("rate_study: need at least 3 deltas");
    for (std::size_t i = 1; i < deltas.size(); ++i)
        if (!(deltas[i] < deltas[i - 1]))
            throw std::invalid_argument(
                "rate_study: deltas must be strictly decreasing");
    if (num_seeds < 1)
        throw std::invalid_argument("rate_study: need at least one seed");

    RateStudy study;
    study.deltas = deltas;
    const double delta0 = deltas.front();

    for (double delta : deltas) {
        double n_target = base_n * std::sqrt(delta0 / delta);
        int n = round_to_divisor(base.n_fine, n_target);
        double alpha = base_alpha * (delta / delta0) * (delta / delta0);

        double sum_eD = 0.0, sum_es = 0.0;
        for (int s = 0; s < num_seeds; ++s) {
            RunParams p = base;
            p.delta = delta;
            p.n = n;
            p.alpha = alpha;
            p.seed = base.seed + static_cast<std::uint64_t>(s);
            RunResult r = run_example(spec, p);

            RateRecord rec;
            rec.delta = delta;
            rec.n = n;
            rec.alpha = alpha;
            rec.L = p.L;
            rec.seed = p.seed;
            rec.e_D = r.inversion.e_D;
            rec.e_sigma = r.inversion.e_sigma;
            rec.iters = r.inversion.stage1.iterations;
            rec.J_final = r.inversion.stage1.objective_history.back();
            study.records.push_back(rec);
            sum_eD += rec.e_D;
            sum_es += rec.e_sigma;
        }
        study.mean_e_D.push_back(sum_eD / num_seeds);
        study.mean_e_sigma.push_back(sum_es / num_seeds);
    }

    study.r_D = fit_loglog_slope(study.deltas, study.mean_e_D);
    study.r_sigma = fit_loglog_slope(study.deltas, study.mean_e_sigma);
    return study;
}

std::string format_double(double v) {
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

void emit_heatmap(const FeFunction& f, const std::string& path) {
    if (!f.mesh) throw std::invalid_argument("emit_heatmap: null mesh");
    const Mesh& mesh = *f.mesh;
    double lo = f.values[0], hi = f.values[0];
    for (double v : f.values) {
        if (!std::isfinite(v))
            throw std::invalid_argument("emit_heatmap: non-finite value");
        lo = std::min(lo, v);
        hi = std::max(hi, v);
    }

    const int nn = mesh.n + 1;
    std::ofstream img(path, std::ios::binary);
    if (!img) throw std::runtime_error("emit_heatmap: cannot open " + path);
    img << "P5\n" << nn << " " << nn << "\n255\n";
    const double span = hi - lo;
    for (int j = mesh.n; j >= 0; --j) {
        for (int i = 0; i < nn; ++i) {
            double v = f.values[mesh.node_index(i, j)];
            int pixel = span > 0.0
                            ? static_cast<int>(std::lround(255.0 * (v - lo) / span))
                            : 128;
            img.put(static_cast<char>(std::clamp(pixel, 0, 255)));
        }
    }
    if (!img) throw std::runtime_error("emit_heatmap: write failed " + path);

    std::ofstream side(path + ".minmax.txt");
    if (!side) throw std::runtime_error("emit_heatmap: cannot open sidecar");
    side << "min=" << format_double(lo) << "\n"
         << "max=" << format_double(hi) << "\n";
}

void emit_mask_heatmap(const Mesh& mesh, const std::vector<char>& flags,
                       const std::string& path) {
    if (static_cast<int>(flags.size()) != mesh.tri_count())
        throw std::invalid_argument("emit_mask_heatmap: flag count mismatch");
    std::ofstream img(path, std::ios::binary);
    if (!img) throw std::runtime_error("emit_mask_heatmap: cannot open " + path);
    img << "P5\n" << mesh.n << " " << mesh.n << "\n255\n";
    for (int j = mesh.n - 1; j >= 0; --j) {
        for (int i = 0; i < mesh.n; ++i) {
            int cell = 2 * (j * mesh.n + i);
            int count = (flags[cell] ? 1 : 0) + (flags[cell + 1] ? 1 : 0);
            img.put(static_cast<char>(count == 2 ? 255 : count == 1 ? 128 : 0));
        }
    }
    if (!img) throw std::runtime_error("emit_mask_heatmap: write failed");
}

void write_nodal_csv(const FeFunction& f, const std::string& path) {
    if (!f.mesh) throw std::invalid_argument("write_nodal_csv: null mesh");
    std::ofstream out(path);
    if (!out) throw std::runtime_error("write_nodal_csv: cannot open " + path);
    out << "node_id,x,y,value\n";
    for (int i = 0; i < f.mesh->node_count(); ++i)
        out << i << "," << format_double(f.mesh->nodes[i][0]) << ","
            << format_double(f.mesh->nodes[i][1]) << ","
            << format_double(f.values[i]) << "\n";
}

FeFunction read_nodal_csv(const std::string& path,
                          const std::shared_ptr<const Mesh>& mesh) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("read_nodal_csv: cannot open " + path);
    std::string line;
    if (!std::getline(in, line) || line != "node_id,x,y,value")
        throw std::runtime_error("read_nodal_csv: bad header in " + path);
    FeFunction f(mesh, 0.0);
    int rows = 0;
    while (std::getline(in, line)) {
        if (line.empty()) continue;
        std::istringstream ss(line);
        std::string tok;
        std::getline(ss, tok, ',');
        int id = std::stoi(tok);
        std::getline(ss, tok, ',');   // x, unused
        std::getline(ss, tok, ',');   // y, unused
        std::getline(ss, tok, ',');
        if (id < 0 || id >= mesh->node_count())
            throw std::runtime_error("read_nodal_csv: node id out of range");
        f.values[id] = std::stod(tok);
        ++rows;
    }
    if (rows != mesh->node_count())
        throw std::runtime_error("read_nodal_csv: row count mismatch");
    return f;
}

void write_manifest(const std::vector<std::pair<std::string, std::string>>& kv,
                    const std::string& path) {
    std::ofstream out(path);
    if (!out) throw std::runtime_error("write_manifest: cannot open " + path);
    for (const auto& [k, v] : kv) out << k << "=" << v << "\n";
}

std::map<std::string, std::string> read_manifest(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("read_manifest: cannot open " + path);
    std::map<std::string, std::string> kv;
    std::string line;
    while (std::getline(in, line)) {
        if (line.empty() || line[0] == '#') continue;
        auto eq = line.find('=');
        if (eq == std::string::npos)
            throw std::runtime_error("read_manifest: malformed line: " + line);
        kv[line.substr(0, eq)] = line.substr(eq + 1);
    }
    return kv;
}

void apply_config_file(const std::string& path, RunParams& params) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("apply_config_file: cannot open " + path);
    std::string line;
    int lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        auto hash = line.find('#');
        if (hash != std::string::npos) line = line.substr(0, hash);
        auto notspace = [](unsigned char c) { return !std::isspace(c); };
        line.erase(line.begin(),
                   std::find_if(line.begin(), line.end(), notspace));
        line.erase(std::find_if(line.rbegin(), line.rend(), notspace).base(),
                   line.end());
        if (line.empty()) continue;
        auto eq = line.find('=');
        if (eq == std::string::npos)
            throw std::runtime_error("config line " + std::to_string(lineno) +
                                     ": expected key=value");
        auto trim = [&](std::string s) {
            s.erase(s.begin(), std::find_if(s.begin(), s.end(), notspace));
            s.erase(std::find_if(s.rbegin(), s.rend(), notspace).base(),
                    s.end());
            return s;
        };
        std::string key = trim(line.substr(0, eq));
        std::string val = trim(line.substr(eq + 1));

        if (key == "n_fine") params.n_fine = std::stoi(val);
        else if (key == "n") params.n = std::stoi(val);
        else if (key == "L") params.L = std::stoi(val);
        else if (key == "M") params.M = std::stoi(val);
        else if (key == "delta") params.delta = std::stod(val);
        else if (key == "alpha") params.alpha = std::stod(val);
        else if (key == "C0") params.C0 = std::stod(val);
        else if (key == "nu_x") params.nu_x = std::stod(val);
        else if (key == "nu_y") params.nu_y = std::stod(val);
        else if (key == "c_lower_floor") params.c_lower_floor = std::stod(val);
        else if (key == "max_iters") params.max_iters = std::stoi(val);
        else if (key == "grad_tol") params.grad_tol = std::stod(val);
        else if (key == "theta_power") params.theta_power = std::stod(val);
        else if (key == "seed") params.seed = std::stoull(val);
        else
            throw std::runtime_error("config line " + std::to_string(lineno) +
                                     ": unknown key '" + key + "'");
    }
}

} // namespace qpat
