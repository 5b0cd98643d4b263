// Command-line front end. Subcommands: mesh-info, synth, nonzero, invert,
// rates. Global flags --seed, --out, --config apply to every subcommand;
// precedence is defaults < config file < explicit flags.

#include "qpat/harness.hpp"
#include "qpat/rng.hpp"

#include <CLI11.hpp>

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>

namespace fs = std::filesystem;
using namespace qpat;

namespace {

struct GlobalArgs {
    std::uint64_t seed = 1;
    std::string out = ".";
    std::string config;
};

RunParams make_params(const GlobalArgs& g) {
    RunParams p;
    if (!g.config.empty()) apply_config_file(g.config, p);
    p.seed = g.seed;
    return p;
}

void ensure_dir(const std::string& dir) {
    std::error_code ec;
    fs::create_directories(dir, ec);
    if (ec)
        throw std::runtime_error("cannot create output directory " + dir +
                                 ": " + ec.message());
}

std::vector<std::pair<std::string, std::string>> base_manifest(
    const char* command, int example, const RunParams& p) {
    std::vector<std::pair<std::string, std::string>> kv;
    kv.emplace_back("format_version", "1");
    kv.emplace_back("command", command);
    kv.emplace_back("example", std::to_string(example));
    kv.emplace_back("n_fine", std::to_string(p.n_fine));
    kv.emplace_back("n", std::to_string(p.n));
    kv.emplace_back("L", std::to_string(p.L));
    kv.emplace_back("M", std::to_string(p.M));
    kv.emplace_back("delta", format_double(p.delta));
    kv.emplace_back("alpha", format_double(p.alpha));
    kv.emplace_back("seed", std::to_string(p.seed));
    kv.emplace_back("theta_power", format_double(p.theta_power));
    kv.emplace_back("c_lower_floor", format_double(p.c_lower_floor));
    kv.emplace_back("max_iters", std::to_string(p.max_iters));
    kv.emplace_back("grad_tol", format_double(p.grad_tol));
    kv.emplace_back("illum_substream_base", "1000");
    kv.emplace_back("noise_substream_base", "2000");
    return kv;
}

void append_illum_coeffs(std::vector<std::pair<std::string, std::string>>& kv,
                         const IlluminationSet& illum) {
    for (int ell = 2; ell <= illum.L + 1; ++ell)
        for (int k = 1; k <= illum.M; ++k) {
            std::ostringstream key;
            key << "illum_coeff_" << ell << "_" << k;
            kv.emplace_back(key.str(),
                            format_double(illum.coefficients[ell - 2][k - 1]));
        }
}

int cmd_mesh_info(int n) {
    Mesh mesh = build_unit_square_mesh(n);
    std::cout << "n=" << mesh.n << "\n"
              << "h=" << format_double(mesh.h) << "\n"
              << "nodes=" << mesh.node_count() << "\n"
              << "triangles=" << mesh.tri_count() << "\n"
              << "boundary_nodes=" << mesh.boundary_nodes.size() << "\n";
    return 0;
}

int cmd_synth(const GlobalArgs& g, int example, const RunParams& p) {
    ensure_dir(g.out);
    ExampleSpec spec = example_spec(example);

    auto mesh_fine = std::make_shared<const Mesh>(build_unit_square_mesh(p.n_fine));
    auto mesh_work = std::make_shared<const Mesh>(
        tag_interior_subdomain(build_unit_square_mesh(p.n)));
    SynthesisResult syn =
        synthesize(spec.truth, mesh_fine, mesh_work, p.L, p.M, p.delta, p.seed,
                   p.c_lower_floor, p.theta_power, p.solver);

    for (std::size_t l = 0; l < syn.data.Z.size(); ++l) {
        std::ostringstream name;
        name << g.out << "/Z_" << (l + 1) << ".csv";
        write_nodal_csv(syn.data.Z[l], name.str());
    }
    for (std::size_t l = 0; l < syn.data.w_delta.size(); ++l) {
        std::ostringstream name;
        name << g.out << "/w_" << (l + 1) << ".csv";
        write_nodal_csv(syn.data.w_delta[l], name.str());
    }
    write_nodal_csv(syn.q_dagger, g.out + "/q_dagger.csv");
    write_nodal_csv(syn.D_dagger, g.out + "/D_dagger.csv");
    write_nodal_csv(syn.sigma_dagger, g.out + "/sigma_dagger.csv");

    auto kv = base_manifest("synth", example, p);
    kv.emplace_back("c_lower", format_double(syn.data.c_lower));
    kv.emplace_back("z1_min_preclamp", format_double(syn.c_lower_preclamp_min));
    for (std::size_t l = 0; l < syn.sup_H.size(); ++l)
        kv.emplace_back("sup_H_" + std::to_string(l + 1),
                        format_double(syn.sup_H[l]));
    append_illum_coeffs(kv, syn.illum);
    write_manifest(kv, g.out + "/manifest.txt");

    std::cout << "wrote " << (syn.data.Z.size() + syn.data.w_delta.size() + 3)
              << " channel files and manifest to " << g.out << "\n";
    return 0;
}

int cmd_nonzero(const GlobalArgs& g, int example, const RunParams& p,
                int trials) {
    ensure_dir(g.out);
    ExampleSpec spec = example_spec(example);
    auto mesh_fine = std::make_shared<const Mesh>(build_unit_square_mesh(p.n_fine));
    auto mesh_work = std::make_shared<const Mesh>(
        tag_interior_subdomain(build_unit_square_mesh(p.n)));

    auto region_fields = [&](std::uint64_t seed) {
        SynthesisResult syn =
            synthesize(spec.truth, mesh_fine, mesh_work, p.L, p.M, p.delta,
                       seed, p.c_lower_floor, p.theta_power, p.solver);
        return p.delta > 0.0 ? syn.data.w_delta : syn.w_exact;
    };

    std::array<double, 2> nu{p.nu_x, p.nu_y};
    auto ws = region_fields(p.seed);
    auto fractions = region_growth_curve(ws, nu, p.C0);
    for (std::size_t l = 0; l < fractions.size(); ++l)
        std::cout << "L=" << (l + 1)
                  << " fraction=" << format_double(fractions[l]) << "\n";

    RegionMask mask = nonzero_region(ws, nu, p.C0);
    {
        std::ofstream csv(g.out + "/mask.csv");
        csv << "triangle_id,flagged\n";
        for (std::size_t t = 0; t < mask.flags.size(); ++t)
            csv << t << "," << int(mask.flags[t]) << "\n";
    }
    emit_mask_heatmap(*mesh_work, mask.flags, g.out + "/mask.pgm");

    if (trials > 0) {
        int covered = 0;
        for (int tr = 0; tr < trials; ++tr) {
            auto wst = region_fields(p.seed + static_cast<std::uint64_t>(tr));
            RegionMask m = nonzero_region(wst, nu, p.C0);
            bool covers = true;
            for (int t = 0; t < mesh_work->tri_count(); ++t)
                if (mesh_work->subdomain_tags[t] && !m.flags[t]) {
                    covers = false;
                    break;
                }
            covered += covers ? 1 : 0;
        }
        std::cout << "trials=" << trials << " covered=" << covered
                  << " coverage_fraction="
                  << format_double(double(covered) / trials) << "\n";
    }
    return 0;
}

int cmd_invert(const GlobalArgs& g, const std::string& data_dir,
               double alpha, int max_iters, double grad_tol,
               bool have_alpha, bool have_iters, bool have_tol) {
    ensure_dir(g.out);
    auto man = read_manifest(data_dir + "/manifest.txt");
    const int example = std::stoi(man.at("example"));
    const int n = std::stoi(man.at("n"));
    const int L = std::stoi(man.at("L"));
    const int M = std::stoi(man.at("M"));
    const double delta = std::stod(man.at("delta"));
    const std::uint64_t seed = std::stoull(man.at("seed"));
    const double theta_power = std::stod(man.at("theta_power"));
    const double c_lower = std::stod(man.at("c_lower"));

    RunParams p;
    if (!g.config.empty()) apply_config_file(g.config, p);
    if (have_alpha) p.alpha = alpha;
    else if (man.count("alpha")) p.alpha = std::stod(man.at("alpha"));
    if (have_iters) p.max_iters = max_iters;
    if (have_tol) p.grad_tol = grad_tol;

    ExampleSpec spec = example_spec(example);
    auto mesh = std::make_shared<const Mesh>(
        tag_interior_subdomain(build_unit_square_mesh(n)));

    NoisyDataSet data;
    data.delta = delta;
    data.noise_seed = seed;
    data.c_lower = c_lower;
    for (int l = 1; l <= L + 1; ++l)
        data.Z.push_back(
            read_nodal_csv(data_dir + "/Z_" + std::to_string(l) + ".csv", mesh));
    data.w_delta = quotient_data(data);

    FeFunction q_dagger = read_nodal_csv(data_dir + "/q_dagger.csv", mesh);
    FeFunction D_dagger = read_nodal_csv(data_dir + "/D_dagger.csv", mesh);
    FeFunction sigma_dagger =
        read_nodal_csv(data_dir + "/sigma_dagger.csv", mesh);

    IlluminationSet illum = sample_illuminations(L, M, seed, theta_power);

    AdmissibleBox box;
    const double lam_q = 2.0 * spec.truth.Lambda_D * spec.truth.Lambda_sigma *
                         spec.truth.Lambda_sigma;
    box.lower = 1.0 / lam_q;
    box.upper = lam_q;
    box.fixed_boundary = q_dagger.values;

    InversionConfig cfg;
    cfg.alpha = p.alpha;
    cfg.max_iters = p.max_iters;
    cfg.grad_tol = p.grad_tol;
    cfg.solver = p.solver;

    Stage1Result s1 = invert_stage1(data, illum, box, cfg);
    FeFunction q_star = splice_qstar(s1.q, D_dagger, sigma_dagger, data.Z[0]);
    Stage2Result s2 = invert_stage2(q_star, data.Z[0], p.solver);
    auto errs = relative_errors(s2.D_star, s2.sigma_star, spec.truth);

    write_nodal_csv(q_star, g.out + "/q_star.csv");
    write_nodal_csv(s2.D_star, g.out + "/D_star.csv");
    write_nodal_csv(s2.sigma_star, g.out + "/sigma_star.csv");
    {
        std::ofstream hist(g.out + "/objective_history.csv");
        hist << "iteration,J\n";
        for (std::size_t i = 0; i < s1.objective_history.size(); ++i)
            hist << i << "," << format_double(s1.objective_history[i]) << "\n";
    }
    emit_heatmap(s2.D_star, g.out + "/D_star.pgm");
    emit_heatmap(s2.sigma_star, g.out + "/sigma_star.pgm");

    std::vector<std::pair<std::string, std::string>> kv;
    kv.emplace_back("format_version", "1");
    kv.emplace_back("command", "invert");
    kv.emplace_back("example", std::to_string(example));
    kv.emplace_back("data_dir", data_dir);
    kv.emplace_back("alpha", format_double(cfg.alpha));
    kv.emplace_back("max_iters", std::to_string(cfg.max_iters));
    kv.emplace_back("grad_tol", format_double(cfg.grad_tol));
    kv.emplace_back("lambda_q", format_double(lam_q));
    kv.emplace_back("iterations", std::to_string(s1.iterations));
    kv.emplace_back("stagnated", s1.stagnated ? "1" : "0");
    kv.emplace_back("J_final", format_double(s1.objective_history.back()));
    kv.emplace_back("e_D", format_double(errs.first));
    kv.emplace_back("e_sigma", format_double(errs.second));
    write_manifest(kv, g.out + "/result_manifest.txt");

    std::cout << "e_D=" << format_double(errs.first)
              << " e_sigma=" << format_double(errs.second)
              << " iterations=" << s1.iterations << "\n";
    return 0;
}

int cmd_rates(const GlobalArgs& g, int example, const std::string& deltas_arg,
              int base_n, double base_alpha, const RunParams& p, int seeds) {
    ensure_dir(g.out);
    std::vector<double> deltas;
    {
        std::istringstream ss(deltas_arg);
        std::string tok;
        while (std::getline(ss, tok, ',')) deltas.push_back(std::stod(tok));
    }
    ExampleSpec spec = example_spec(example);
    RateStudy study = rate_study(spec, deltas, base_n, base_alpha, p, seeds);

    {
        std::ofstream csv(g.out + "/rates.csv");
        csv << "delta,n,alpha,L,seed,e_D,e_sigma,iters,J_final\n";
        for (const auto& r : study.records)
            csv << format_double(r.delta) << "," << r.n << ","
                << format_double(r.alpha) << "," << r.L << "," << r.seed << ","
                << format_double(r.e_D) << "," << format_double(r.e_sigma)
                << "," << r.iters << "," << format_double(r.J_final) << "\n";
    }

    auto kv = base_manifest("rates", example, p);
    kv.emplace_back("base_n", std::to_string(base_n));
    kv.emplace_back("base_alpha", format_double(base_alpha));
    kv.emplace_back("num_seeds", std::to_string(seeds));
    kv.emplace_back("r_D", format_double(study.r_D));
    kv.emplace_back("r_sigma", format_double(study.r_sigma));
    write_manifest(kv, g.out + "/rates_manifest.txt");

    std::printf("%-10s %-6s %-12s %-12s %-12s\n", "delta", "n", "alpha",
                "e_D", "e_sigma");
    for (std::size_t i = 0; i < study.deltas.size(); ++i) {
        const auto& rec = study.records[i * seeds];
        std::printf("%-10.3g %-6d %-12.3g %-12.5g %-12.5g\n", study.deltas[i],
                    rec.n, rec.alpha, study.mean_e_D[i], study.mean_e_sigma[i]);
    }
    std::printf("fitted rates: e_D ~ delta^%.4f, e_sigma ~ delta^%.4f\n",
                study.r_D, study.r_sigma);
    return 0;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"finite element laboratory for quantitative photoacoustic "
                 "tomography"};
    app.require_subcommand(1);
    app.fallthrough();

    GlobalArgs g;
    app.add_option("--seed", g.seed, "RNG seed");
    app.add_option("--out", g.out, "output directory");
    app.add_option("--config", g.config, "key=value config file");

    auto* mesh_info = app.add_subcommand("mesh-info", "mesh summary");
    int mi_n = 8;
    mesh_info->add_option("--n", mi_n, "subdivisions per side")->required();

    auto* synth = app.add_subcommand("synth", "synthesize noisy channel data");
    int s_example = 1;
    int s_nfine = -1, s_n = -1, s_L = -1, s_M = -1;
    double s_delta = -1.0;
    synth->add_option("--example", s_example, "example id 1..5")->required();
    synth->add_option("--n-fine", s_nfine, "fine mesh subdivisions");
    synth->add_option("--n", s_n, "working mesh subdivisions");
    synth->add_option("--delta", s_delta, "noise level");
    synth->add_option("--L", s_L, "random illumination count");
    synth->add_option("--M", s_M, "basis truncation");

    auto* nonzero = app.add_subcommand("nonzero", "directional gradient region");
    int z_example = 1, z_L = -1, z_trials = 0;
    double z_C0 = -1.0;
    std::string z_nu;
    nonzero->add_option("--example", z_example, "example id 1..5")->required();
    nonzero->add_option("--L", z_L, "random illumination count");
    nonzero->add_option("--C0", z_C0, "gradient threshold");
    nonzero->add_option("--nu", z_nu, "direction as x,y");
    nonzero->add_option("--trials", z_trials,
                        "repeat over seeds and report coverage fraction");

    auto* invert = app.add_subcommand("invert", "two-stage reconstruction");
    std::string i_data;
    double i_alpha = 0.0, i_tol = 0.0;
    int i_iters = 0;
    invert->add_option("--data", i_data, "synth output directory")->required();
    auto* oa = invert->add_option("--alpha", i_alpha, "regularization weight");
    auto* oi = invert->add_option("--max-iters", i_iters, "iteration cap");
    auto* ot = invert->add_option("--grad-tol", i_tol, "stationarity tolerance");

    auto* rates = app.add_subcommand("rates", "noise-coupled rate study");
    int r_example = 1, r_base_n = -1, r_seeds = 1, r_L = -1, r_M = -1,
        r_nfine = -1;
    double r_base_alpha = -1.0;
    std::string r_deltas = "1e-2,5e-3,2e-3,1e-3";
    rates->add_option("--example", r_example, "example id 1..5")->required();
    rates->add_option("--deltas", r_deltas, "comma-separated noise levels");
    rates->add_option("--base-n", r_base_n, "mesh anchor at the largest delta");
    rates->add_option("--base-alpha", r_base_alpha,
                      "regularization anchor at the largest delta");
    rates->add_option("--L", r_L, "random illumination count");
    rates->add_option("--M", r_M, "basis truncation");
    rates->add_option("--seeds", r_seeds, "number of seeds to average");

    CLI11_PARSE(app, argc, argv);

    try {
        if (mesh_info->parsed()) return cmd_mesh_info(mi_n);

        if (synth->parsed()) {
            RunParams p = make_params(g);
            if (s_nfine > 0) p.n_fine = s_nfine;
            if (s_n > 0) p.n = s_n;
            if (s_delta >= 0.0) p.delta = s_delta;
            if (s_L > 0) p.L = s_L;
            if (s_M > 0) p.M = s_M;
            return cmd_synth(g, s_example, p);
        }

        if (nonzero->parsed()) {
            RunParams p;
            p.delta = 0.0;   // region checks read the exact quotients
            if (!g.config.empty()) apply_config_file(g.config, p);
            p.seed = g.seed;
            if (z_L > 0) p.L = z_L;
            if (z_C0 > 0.0) p.C0 = z_C0;
            if (!z_nu.empty()) {
                auto comma = z_nu.find(',');
                if (comma == std::string::npos)
                    throw std::runtime_error("--nu expects x,y");
                p.nu_x = std::stod(z_nu.substr(0, comma));
                p.nu_y = std::stod(z_nu.substr(comma + 1));
            }
            return cmd_nonzero(g, z_example, p, z_trials);
        }

        if (invert->parsed())
            return cmd_invert(g, i_data, i_alpha, i_iters, i_tol,
                              oa->count() > 0, oi->count() > 0,
                              ot->count() > 0);

        if (rates->parsed()) {
            RunParams p = make_params(g);
            if (r_nfine > 0) p.n_fine = r_nfine;
            if (r_L > 0) p.L = r_L;
            if (r_M > 0) p.M = r_M;
            int base_n = r_base_n > 0 ? r_base_n : 12;
            double base_alpha = r_base_alpha > 0.0 ? r_base_alpha : 3e-7;
            return cmd_rates(g, r_example, r_deltas, base_n, base_alpha, p,
                             r_seeds);
        }
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
    return 0;
}
