// Command-line front end: tree ensembles, exact marginals, thresholds,
// growth and percolation experiments, all seeded and reproducible.

#include <fstream>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"

#include "gwising/errors.hpp"
#include "gwising/experiments.hpp"

namespace {

using namespace gwising;

constexpr int kExitOk = 0;
constexpr int kExitInvariant = 2;
constexpr int kExitConfig = 3;
constexpr int kExitOverflow = 4;

void write_file(const std::string& path, const std::string& text) {
    if (path.empty() || path == "-") {
        std::cout << text;
        return;
    }
    std::ofstream f(path);
    if (!f) throw ConfigError("cannot open output file: " + path);
    f << text;
}

std::vector<double> parse_grid(const std::string& text) {
    // "0.1,0.2,0.3" or "lo:hi:n" (n evenly spaced points, endpoints included)
    std::vector<double> grid;
    if (text.find(':') != std::string::npos) {
        double lo, hi;
        int n;
        if (std::sscanf(text.c_str(), "%lf:%lf:%d", &lo, &hi, &n) != 3 || n < 1)
            throw ConfigError("bad grid spec: " + text);
        for (int i = 0; i < n; ++i)
            grid.push_back(n == 1 ? lo : lo + (hi - lo) * i / (n - 1));
        return grid;
    }
    std::stringstream ss(text);
    std::string item;
    while (std::getline(ss, item, ',')) grid.push_back(std::stod(item));
    if (grid.empty()) throw ConfigError("empty grid spec: " + text);
    return grid;
}

std::vector<int> parse_int_grid(const std::string& text) {
    std::vector<int> grid;
    std::stringstream ss(text);
    std::string item;
    while (std::getline(ss, item, ',')) grid.push_back(std::stoi(item));
    if (grid.empty()) throw ConfigError("empty grid spec: " + text);
    return grid;
}

struct CommonOpts {
    std::string dist_spec;
    std::string model = "gw";
    int s = 0;
    std::string root_law = "process";
    std::uint64_t seed = 0;
    std::string out_csv;
    std::string out_json;
    int workers = 1;
    long long vertex_cap = 5'000'000;
};

void apply_common(ExperimentConfig& cfg, const CommonOpts& o) {
    cfg.dist_spec = o.dist_spec;
    int s_from_tag = 0;
    cfg.model = parse_model_tag(o.model, &s_from_tag);
    cfg.s = std::max(o.s, s_from_tag);
    if (cfg.model == TreeModel::Gws || cfg.model == TreeModel::SizeBiased)
        cfg.s = std::max(cfg.s, 1);
    if (cfg.model == TreeModel::Gws && cfg.s == 1) cfg.model = TreeModel::SizeBiased;
    if (o.root_law == "process") cfg.root_law = GwsRootLaw::Process;
    else if (o.root_law == "shifted") cfg.root_law = GwsRootLaw::Shifted;
    else throw ConfigError("unknown gws root law: " + o.root_law);
    cfg.seed = o.seed;
    cfg.workers = o.workers;
    cfg.vertex_cap = o.vertex_cap;
}

BoundaryPreset parse_boundary(const std::string& name) {
    if (name == "all-plus") return BoundaryPreset::AllPlus;
    if (name == "all-minus") return BoundaryPreset::AllMinus;
    if (name == "iid-random") return BoundaryPreset::IidRandom;
    if (name == "free") return BoundaryPreset::Free;
    throw ConfigError("unknown boundary preset: " + name);
}

CouplingScheme parse_scheme(const std::string& name) {
    if (name == "constant") return CouplingScheme::Constant;
    if (name == "iid-sign") return CouplingScheme::IidSign;
    if (name == "iid-uniform") return CouplingScheme::IidUniform;
    throw ConfigError("unknown coupling scheme: " + name);
}

// "--config FILE" (or --config=FILE) expands to the file's key=value pairs,
// inserted right after the subcommand token. '#' starts a comment. A key that
// repeats an explicit flag is a config error.
std::vector<std::string> expand_config_args(int argc, char** argv) {
    std::vector<std::string> args(argv + 1, argv + argc);
    for (std::size_t i = 0; i < args.size(); ++i) {
        std::string path;
        std::size_t span = 0;
        if (args[i] == "--config" && i + 1 < args.size()) {
            path = args[i + 1];
            span = 2;
        } else if (args[i].rfind("--config=", 0) == 0) {
            path = args[i].substr(9);
            span = 1;
        }
        if (span == 0) continue;
        if (i == 0) throw ConfigError("--config must follow a subcommand");
        std::ifstream f(path);
        if (!f) throw ConfigError("cannot open config file: " + path);
        std::vector<std::string> expanded;
        std::string line;
        while (std::getline(f, line)) {
            const auto hash = line.find('#');
            if (hash != std::string::npos) line.erase(hash);
            const auto first = line.find_first_not_of(" \t\r");
            if (first == std::string::npos) continue;
            const auto last = line.find_last_not_of(" \t\r");
            line = line.substr(first, last - first + 1);
            auto eq = line.find('=');
            if (eq == std::string::npos) eq = line.find(' ');
            if (eq == std::string::npos)
                throw ConfigError("bad config line (want key=value): " + line);
            const std::string key = line.substr(0, line.find_last_not_of(" \t", eq - 1) + 1);
            const auto vstart = line.find_first_not_of(" \t=", eq);
            expanded.push_back("--" + key + "=" +
                               (vstart == std::string::npos ? "" : line.substr(vstart)));
        }
        args.erase(args.begin() + static_cast<std::ptrdiff_t>(i),
                   args.begin() + static_cast<std::ptrdiff_t>(i + span));
        args.insert(args.begin() + 1, expanded.begin(), expanded.end());
        break;
    }
    return args;
}

void add_common(CLI::App* cmd, CommonOpts& o, bool needs_dist, bool needs_seed) {
    auto* dist = cmd->add_option("--dist", o.dist_spec,
                                 "distribution: powerlaw:lambda=..,kmax=.. | table:k:p,.. | file");
    if (needs_dist) dist->required();
    cmd->add_option("--model", o.model, "gw | size-biased | gws | config");
    cmd->add_option("--s", o.s, "distinguished-offspring cap for gws");
    cmd->add_option("--gws-root-law", o.root_law,
                    "initial distinguished offspring law: process (p_hat_m) | shifted (p_hat_{m+1})");
    auto* seed = cmd->add_option("--seed", o.seed, "base seed (required for stochastic runs)");
    if (needs_seed) seed->required();
    cmd->add_option("--out", o.out_csv, "CSV output path ('-' = stdout)");
    cmd->add_option("--json-out", o.out_json, "JSON summary path ('-' = stdout)");
    cmd->add_option("--workers", o.workers, "concurrent replica workers");
    cmd->add_option("--vertex-cap", o.vertex_cap, "per-tree vertex cap");
}

int run(int argc, char** argv) {
    CLI::App app{"random-tree Ising and percolation laboratory"};
    app.require_subcommand(1);

    // thresholds
    CommonOpts th_o;
    double th_alpha = 0.5, th_J = 1.0, th_beta = 1.0, th_K = 0.0;
    auto* th = app.add_subcommand("thresholds", "closed-form threshold sheet as JSON");
    add_common(th, th_o, true, false);
    th->add_option("--alpha", th_alpha, "moment exponent in (0,1)");
    th->add_option("--J", th_J, "interaction intensity bound");
    th->add_option("--beta", th_beta, "inverse temperature");
    th->add_option("--K", th_K, "shortcut: set K = beta*J directly (J=K, beta=1)");

    // generate
    CommonOpts gen_o;
    int gen_depth = 5;
    int gen_replica = 0;
    auto* gen = app.add_subcommand("generate", "generate one tree realization");
    add_common(gen, gen_o, true, true);
    gen->add_option("--depth", gen_depth, "generated depth")->required();
    gen->add_option("--replica-index", gen_replica, "replica index for the derived seed");

    // growth
    CommonOpts gr_o;
    int gr_depth = 10, gr_replicas = 10000;
    double gr_c = 0.0, gr_alpha = 0.5;
    auto* gr = app.add_subcommand("growth", "ensemble growth statistics");
    add_common(gr, gr_o, true, true);
    gr->add_option("--depth", gr_depth, "trace depth");
    gr->add_option("--replicas", gr_replicas, "ensemble size");
    gr->add_option("--c", gr_c, "normalization constant (default max(a-1, s^{1/alpha}))");
    gr->add_option("--alpha", gr_alpha, "moment exponent used for the default c");

    // gap
    CommonOpts gap_o;
    int gap_dmin = 4, gap_dmax = 9, gap_replicas = 2000;
    double gap_K = 0.1, gap_beta = 0.0, gap_J = 1.0, gap_pm = 0.5, gap_pp = 0.5;
    std::string gap_scheme = "constant", gap_ba = "all-plus", gap_bb = "all-minus";
    auto* gap = app.add_subcommand("gap", "boundary-condition gap decay experiment");
    add_common(gap, gap_o, true, true);
    gap->add_option("--K", gap_K, "thermal coupling K = beta*J");
    gap->add_option("--beta", gap_beta, "inverse temperature (with --J)");
    gap->add_option("--J", gap_J, "interaction intensity bound");
    gap->add_option("--scheme", gap_scheme, "constant | iid-sign | iid-uniform");
    gap->add_option("--prob-minus", gap_pm, "minus probability for iid-sign");
    gap->add_option("--boundary-a", gap_ba, "first boundary preset");
    gap->add_option("--boundary-b", gap_bb, "second boundary preset");
    gap->add_option("--prob-plus", gap_pp, "plus probability for iid-random boundaries");
    gap->add_option("--depth-min", gap_dmin, "smallest volume radius");
    gap->add_option("--depth-max", gap_dmax, "largest volume radius");
    gap->add_option("--replicas", gap_replicas, "ensemble size");
    std::string gap_marginals;
    gap->add_option("--marginals-out", gap_marginals,
                    "also write per-vertex marginals of replica 0 at depth-max");

    // lyons-scan
    CommonOpts ly_o;
    double ly_rho = 2.0, ly_lo = 0.01, ly_hi = 1.5, ly_tol = 1e-3;
    long long ly_cap = 200000;
    std::string ly_kgrid, ly_dgrid = "5,10,20,30";
    auto* ly = app.add_subcommand("lyons-scan",
                                  "critical-coupling scan on a regular tree (deterministic)");
    ly->add_option("--rho", ly_rho, "branching number (> 1)")->required();
    ly->add_option("--k-grid", ly_kgrid, "couplings for the magnetization curve (list or lo:hi:n)");
    ly->add_option("--depth-grid", ly_dgrid, "depths for the magnetization curve");
    ly->add_option("--bisect-lo", ly_lo, "bisection bracket low end");
    ly->add_option("--bisect-hi", ly_hi, "bisection bracket high end");
    ly->add_option("--bisect-tol", ly_tol, "bisection tolerance");
    ly->add_option("--recursion-cap", ly_cap, "iteration cap for the depth limit");
    ly->add_option("--out", ly_o.out_csv, "CSV output path ('-' = stdout)");
    ly->add_option("--json-out", ly_o.out_json, "JSON summary path ('-' = stdout)");

    // percolate
    CommonOpts pc_o;
    int pc_depth = 20, pc_replicas = 10000;
    std::string pc_grid = "0.5,0.8";
    auto* pc = app.add_subcommand("percolate", "bond percolation survival curve");
    add_common(pc, pc_o, true, true);
    pc->add_option("--theta-grid", pc_grid, "open probabilities (list or lo:hi:n)");
    pc->add_option("--depth", pc_depth, "survival depth");
    pc->add_option("--replicas", pc_replicas, "ensemble size");

    const std::vector<std::string> args = expand_config_args(argc, argv);
    std::vector<const char*> argv2 = {argv[0]};
    for (const auto& a : args) argv2.push_back(a.c_str());
    try {
        app.parse(static_cast<int>(argv2.size()), argv2.data());
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? kExitOk : kExitConfig;
    }

    if (th->parsed()) {
        ExperimentConfig cfg;
        cfg.experiment = "thresholds";
        apply_common(cfg, th_o);
        cfg.alpha = th_alpha;
        if (th_K > 0.0) {
            cfg.J = th_K;
            cfg.beta = 1.0;
        } else {
            cfg.J = th_J;
            cfg.beta = th_beta;
        }
        const DegreeDistribution dist = parse_dist_spec(cfg.dist_spec);
        const ThresholdSheet sheet = make_threshold_sheet(dist, cfg.s, cfg.alpha, cfg.J, cfg.beta);
        write_file(th_o.out_json.empty() ? "-" : th_o.out_json, thresholds_json(cfg, sheet) + "\n");
        return kExitOk;
    }

    if (gen->parsed()) {
        ExperimentConfig cfg;
        cfg.experiment = "generate";
        apply_common(cfg, gen_o);
        cfg.depth = gen_depth;
        const DegreeDistribution dist = parse_dist_spec(cfg.dist_spec);
        RngStream rng(replica_seed(cfg.seed, static_cast<std::uint64_t>(gen_replica)));
        const RootedTree tree =
            generate(cfg.ensemble(), dist, cfg.depth, rng, TreeGenLimits{cfg.vertex_cap});
        std::ostringstream os;
        write_tree(os, tree);
        write_file(gen_o.out_csv.empty() ? "-" : gen_o.out_csv, os.str());
        return kExitOk;
    }

    if (gr->parsed()) {
        ExperimentConfig cfg;
        cfg.experiment = "growth";
        apply_common(cfg, gr_o);
        cfg.depth = gr_depth;
        cfg.replicas = gr_replicas;
        cfg.c = gr_c;
        cfg.alpha = gr_alpha;
        const DegreeDistribution dist = parse_dist_spec(cfg.dist_spec);
        const GrowthResult res = run_growth_experiment(cfg, dist);
        std::ostringstream os;
        write_growth_csv(os, cfg, res);
        write_file(gr_o.out_csv.empty() ? "-" : gr_o.out_csv, os.str());
        if (!gr_o.out_json.empty()) write_file(gr_o.out_json, growth_json(cfg, res) + "\n");
        if (res.lhat_cap_violations > 0) {
            std::cerr << "invariant violation: Lhat_n exceeded s^n in "
                      << res.lhat_cap_violations << " level(s)\n";
            return kExitInvariant;
        }
        return kExitOk;
    }

    if (gap->parsed()) {
        ExperimentConfig cfg;
        cfg.experiment = "gap";
        apply_common(cfg, gap_o);
        cfg.depth_min = gap_dmin;
        cfg.depth_max = gap_dmax;
        cfg.replicas = gap_replicas;
        if (gap_beta > 0.0) {
            cfg.beta = gap_beta;
            cfg.J = gap_J;
        } else {
            cfg.beta = 1.0;
            cfg.J = gap_K;
        }
        cfg.scheme = parse_scheme(gap_scheme);
        cfg.prob_minus = gap_pm;
        cfg.prob_plus = gap_pp;
        cfg.boundary_a = parse_boundary(gap_ba);
        cfg.boundary_b = parse_boundary(gap_bb);
        const DegreeDistribution dist = parse_dist_spec(cfg.dist_spec);
        const GapResult res = run_gap_experiment(cfg, dist);
        std::ostringstream os;
        write_gap_csv(os, cfg, res);
        write_file(gap_o.out_csv.empty() ? "-" : gap_o.out_csv, os.str());
        if (!gap_o.out_json.empty()) write_file(gap_o.out_json, gap_json(cfg, res) + "\n");
        if (!gap_marginals.empty()) {
            RngStream rng(replica_seed(cfg.seed, 0));
            const RootedTree tree = generate(cfg.ensemble(), dist, cfg.depth_max, rng,
                                             TreeGenLimits{cfg.vertex_cap});
            const Couplings coup =
                assign_couplings(tree, {cfg.scheme, cfg.J, cfg.prob_minus}, cfg.beta, rng);
            const auto sys = make_spin_system(
                tree, coup, resolve_boundary(tree, cfg.boundary_a, cfg.prob_plus, &rng));
            std::ostringstream ms;
            write_marginal_csv(ms, tree, bp_marginals(sys),
                               "seed=" + std::to_string(cfg.seed) +
                                   " beta=" + std::to_string(cfg.beta) +
                                   " scheme=" + scheme_name(cfg.scheme) +
                                   " boundary=" + boundary_name(cfg.boundary_a) +
                                   " config_hash=" + cfg.hash_hex());
            write_file(gap_marginals, ms.str());
        }
        if (res.r2_violations > 0) {
            std::cerr << "invariant violation: " << res.r2_violations
                      << " per-vertex gap(s) exceeded the decay budget\n";
            return kExitInvariant;
        }
        return kExitOk;
    }

    if (ly->parsed()) {
        ExperimentConfig cfg;
        cfg.experiment = "lyons-scan";
        cfg.rho = ly_rho;
        cfg.bisect_lo = ly_lo;
        cfg.bisect_hi = ly_hi;
        cfg.bisect_tol = ly_tol;
        cfg.recursion_cap = ly_cap;
        if (!ly_kgrid.empty()) cfg.k_grid = parse_grid(ly_kgrid);
        cfg.depth_grid = parse_int_grid(ly_dgrid);
        const LyonsResult res = run_lyons_scan(cfg);
        std::ostringstream os;
        write_lyons_csv(os, cfg, res);
        write_file(ly_o.out_csv.empty() ? "-" : ly_o.out_csv, os.str());
        if (!ly_o.out_json.empty()) write_file(ly_o.out_json, lyons_json(cfg, res) + "\n");
        return kExitOk;
    }

    if (pc->parsed()) {
        ExperimentConfig cfg;
        cfg.experiment = "percolate";
        apply_common(cfg, pc_o);
        cfg.depth = pc_depth;
        cfg.replicas = pc_replicas;
        cfg.theta_grid = parse_grid(pc_grid);
        const DegreeDistribution dist = parse_dist_spec(cfg.dist_spec);
        const PercolationExperimentResult res = run_percolation_experiment(cfg, dist);
        std::ostringstream os;
        write_percolation_csv(os, cfg, res);
        write_file(pc_o.out_csv.empty() ? "-" : pc_o.out_csv, os.str());
        if (!pc_o.out_json.empty()) write_file(pc_o.out_json, percolation_json(cfg, res) + "\n");
        return kExitOk;
    }

    return kExitOk;
}

}  // namespace

int main(int argc, char** argv) {
    try {
        return run(argc, argv);
    } catch (const gwising::VertexCapOverflow& e) {
        std::cerr << "vertex-cap overflow: " << e.what() << "\n";
        return kExitOverflow;
    } catch (const gwising::InvariantViolation& e) {
        std::cerr << "invariant violation: " << e.what() << "\n";
        return kExitInvariant;
    } catch (const gwising::ConfigError& e) {
        std::cerr << "config error: " << e.what() << "\n";
        return kExitConfig;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitConfig;
    }
}
