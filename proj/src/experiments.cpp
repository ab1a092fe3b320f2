#include "gwising/experiments.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <ctime>
#include <functional>
#include <limits>
#include <mutex>
#include <ostream>
#include <sstream>
#include <thread>

#include "json.hpp"

#include "gwising/errors.hpp"

namespace gwising {

namespace {

std::string fmt(double x) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.12g", x);
    return buf;
}

std::string fmt17(double x) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", x);
    return buf;
}

std::string iso_now() {
    std::time_t t = std::time(nullptr);
    char buf[32];
    std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", std::gmtime(&t));
    return buf;
}

std::string root_law_name(GwsRootLaw law) {
    return law == GwsRootLaw::Process ? "process" : "shifted";
}

// Static-stride replica partition: worker w runs replicas w, w+W, ... into
// preallocated slots, so results do not depend on the worker count.
void parallel_replicas(int replicas, int workers, const std::function<void(int)>& fn) {
    workers = std::max(1, std::min(workers, replicas));
    if (workers == 1) {
        for (int r = 0; r < replicas; ++r) fn(r);
        return;
    }
    std::vector<std::thread> pool;
    std::exception_ptr first_error;
    std::mutex error_mutex;
    pool.reserve(static_cast<std::size_t>(workers));
    for (int w = 0; w < workers; ++w) {
        pool.emplace_back([&, w]() {
            try {
                for (int r = w; r < replicas; r += workers) fn(r);
            } catch (...) {
                std::lock_guard<std::mutex> lock(error_mutex);
                if (!first_error) first_error = std::current_exception();
            }
        });
    }
    for (auto& t : pool) t.join();
    if (first_error) std::rethrow_exception(first_error);
}

void csv_preamble(std::ostream& out, const ExperimentConfig& cfg) {
    out << "# generated_at " << iso_now() << "\n";
    out << "# config_hash " << cfg.hash_hex() << "\n";
}

}  // namespace

TreeEnsemble ExperimentConfig::ensemble() const {
    TreeEnsemble ens;
    ens.model = model;
    ens.s = (model == TreeModel::SizeBiased) ? 1 : s;
    ens.root_law = root_law;
    return ens;
}

std::string ExperimentConfig::canonical() const {
    std::ostringstream os;
    os << "experiment=" << experiment;
    os << ";dist=" << dist_spec;
    os << ";model=" << model_tag(model, (model == TreeModel::SizeBiased) ? 1 : s);
    os << ";s=" << s;
    os << ";root_law=" << root_law_name(root_law);
    os << ";depth=" << depth << ";depth_min=" << depth_min << ";depth_max=" << depth_max;
    os << ";replicas=" << replicas;
    os << ";beta=" << fmt17(beta) << ";J=" << fmt17(J) << ";alpha=" << fmt17(alpha);
    os << ";scheme=" << scheme_name(scheme) << ";prob_minus=" << fmt17(prob_minus);
    os << ";boundary_a=" << boundary_name(boundary_a)
       << ";boundary_b=" << boundary_name(boundary_b) << ";prob_plus=" << fmt17(prob_plus);
    os << ";theta_grid=";
    for (std::size_t i = 0; i < theta_grid.size(); ++i)
        os << (i ? "," : "") << fmt17(theta_grid[i]);
    os << ";rho=" << fmt17(rho);
    os << ";k_grid=";
    for (std::size_t i = 0; i < k_grid.size(); ++i) os << (i ? "," : "") << fmt17(k_grid[i]);
    os << ";depth_grid=";
    for (std::size_t i = 0; i < depth_grid.size(); ++i)
        os << (i ? "," : "") << depth_grid[i];
    os << ";bisect_lo=" << fmt17(bisect_lo) << ";bisect_hi=" << fmt17(bisect_hi)
       << ";bisect_tol=" << fmt17(bisect_tol) << ";recursion_cap=" << recursion_cap;
    os << ";c=" << fmt17(c);
    os << ";seed=" << seed;
    os << ";vertex_cap=" << vertex_cap;
    return os.str();
}

std::uint64_t ExperimentConfig::hash() const {
    const std::string s = canonical();
    std::uint64_t h = 0xCBF29CE484222325ULL;
    for (unsigned char ch : s) {
        h ^= ch;
        h *= 0x100000001B3ULL;
    }
    return h;
}

std::string ExperimentConfig::hash_hex() const {
    char buf[17];
    std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(hash()));
    return buf;
}

GapResult run_gap_experiment(const ExperimentConfig& cfg, const DegreeDistribution& dist) {
    if (cfg.replicas < 1) throw ConfigError("gap experiment requires replicas >= 1");
    if (cfg.depth_min < 1 || cfg.depth_max < cfg.depth_min)
        throw ConfigError("gap experiment requires 1 <= depth_min <= depth_max");
    const double K = cfg.K();
    GapResult res;
    res.q = q_of_K(K);
    res.bound_checked = res.q < 1.0;
    if (!res.bound_checked)
        res.notices.push_back("q(K) = " + fmt(res.q) +
                              " >= 1: decay-budget checks skipped, gaps still reported");

    const int nd = cfg.depth_max - cfg.depth_min + 1;
    res.replica_gap.assign(static_cast<std::size_t>(nd),
                           std::vector<double>(static_cast<std::size_t>(cfg.replicas), 0.0));
    std::vector<std::int64_t> violations(static_cast<std::size_t>(cfg.replicas), 0);
    std::vector<std::int64_t> clamps(static_cast<std::size_t>(cfg.replicas), 0);

    const TreeEnsemble ens = cfg.ensemble();
    const CouplingConfig coupling_cfg{cfg.scheme, cfg.J, cfg.prob_minus};
    const TreeGenLimits limits{cfg.vertex_cap};

    parallel_replicas(cfg.replicas, cfg.workers, [&](int r) {
        RngStream rng(replica_seed(cfg.seed, static_cast<std::uint64_t>(r)));
        const RootedTree tree = generate(ens, dist, cfg.depth_max, rng, limits);
        const Couplings coup = assign_couplings(tree, coupling_cfg, cfg.beta, rng);
        for (int n = cfg.depth_min; n <= cfg.depth_max; ++n) {
            const TruncatedVolume vol = truncate_volume(tree, coup, n);
            SpinSystem sys = make_spin_system(
                vol.tree, vol.couplings,
                resolve_boundary(vol.tree, cfg.boundary_a, cfg.prob_plus, &rng));
            const auto rep_a = bp_marginals(sys);
            sys.boundary = resolve_boundary(vol.tree, cfg.boundary_b, cfg.prob_plus, &rng);
            const auto rep_b = bp_marginals(sys);
            clamps[static_cast<std::size_t>(r)] += rep_a.clamp_events + rep_b.clamp_events;
            std::vector<double> gap(rep_a.magnetization.size());
            for (std::size_t v = 0; v < gap.size(); ++v)
                gap[v] = std::abs(rep_a.magnetization[v] - rep_b.magnetization[v]);
            res.replica_gap[static_cast<std::size_t>(n - cfg.depth_min)]
                           [static_cast<std::size_t>(r)] = gap[0];
            if (res.bound_checked) {
                const double shell_n = static_cast<double>(vol.tree.shell_size(n));
                for (std::int64_t z = 0; z < vol.tree.vertex_count(); ++z) {
                    const int nz = vol.tree.vertex(z).level;
                    if (nz >= n) continue;
                    const double budget = r2_budget(K, n, nz, shell_n);
                    if (gap[static_cast<std::size_t>(z)] > budget + 1e-9)
                        violations[static_cast<std::size_t>(r)]++;
                }
            }
        }
    });

    for (int d = 0; d < nd; ++d) {
        Welford w;
        for (double g : res.replica_gap[static_cast<std::size_t>(d)]) w.add(g);
        res.mean_gap.push_back(w.mean);
        res.stderr_gap.push_back(w.stderr_());
    }
    for (auto v : violations) res.r2_violations += v;
    for (auto c : clamps) res.clamp_events += c;
    if (res.clamp_events > 0)
        res.notices.push_back(std::to_string(res.clamp_events) +
                              " message-field clamp event(s): fields saturated at |f| = 30");
    res.fit = fit_decay(res.mean_gap, cfg.depth_min);
    if (!res.fit.notice.empty()) res.notices.push_back(res.fit.notice);
    return res;
}

GrowthResult run_growth_experiment(const ExperimentConfig& cfg,
                                   const DegreeDistribution& dist) {
    if (cfg.replicas < 1) throw ConfigError("growth experiment requires replicas >= 1");
    if (cfg.depth < 0) throw ConfigError("growth experiment requires depth >= 0");
    const TreeEnsemble ens = cfg.ensemble();
    const TreeGenLimits limits{cfg.vertex_cap};
    const double a = dist.mean_degree();
    GrowthResult res;
    res.sigma = std::numeric_limits<double>::quiet_NaN();
    if (ens.s >= 2) res.sigma = sigma_rate(dist.size_biased(), ens.s);
    res.c = cfg.c;
    if (!(res.c > 0.0)) {
        res.c = a - 1.0;
        if (ens.s >= 2)
            res.c = std::max(res.c, std::pow(static_cast<double>(ens.s), 1.0 / cfg.alpha));
    }

    // Per-replica traces land in slots, the reduction below is sequential, so
    // results are identical for any worker count.
    std::vector<GrowthTrace> traces(static_cast<std::size_t>(cfg.replicas));
    parallel_replicas(cfg.replicas, cfg.workers, [&](int r) {
        RngStream rng(replica_seed(cfg.seed, static_cast<std::uint64_t>(r)));
        traces[static_cast<std::size_t>(r)] = simulate_growth(ens, dist, cfg.depth, rng, limits);
    });

    res.level.assign(static_cast<std::size_t>(cfg.depth) + 1, {});
    for (const GrowthTrace& tr : traces) {
        const auto ratios = normalized_growth(tr, res.c);
        const auto tails = immigrant_tail(tr, res.c);
        double sig_n = 1.0;
        for (int n = 0; n <= cfg.depth; ++n) {
            auto& st = res.level[static_cast<std::size_t>(n)];
            const auto lhat = tr.distinguished[static_cast<std::size_t>(n)];
            st.shell.add(static_cast<double>(tr.shell(n)));
            st.ordinary.add(static_cast<double>(tr.ordinary[static_cast<std::size_t>(n)]));
            st.distinguished.add(static_cast<double>(lhat));
            st.immigrants.add(static_cast<double>(tr.immigrants[static_cast<std::size_t>(n)]));
            st.shell_ratio.add(ratios.shell_ratio[static_cast<std::size_t>(n)]);
            st.ordinary_ratio.add(ratios.ordinary_ratio[static_cast<std::size_t>(n)]);
            if (ens.s >= 2) {
                st.lhat_ratio.add(static_cast<double>(lhat) / sig_n);
                sig_n *= res.sigma;
            }
            st.tail.add(tails[static_cast<std::size_t>(n)]);
            if (ens.s >= 1 &&
                static_cast<double>(lhat) > std::pow(static_cast<double>(ens.s), n) + 0.5)
                res.lhat_cap_violations++;
        }
    }
    return res;
}

double lyons_magnetization(double rho, double K, int depth) {
    if (!(rho > 1.0)) throw ConfigError("lyons recursion requires rho > 1");
    if (!(K > 0.0)) throw ConfigError("lyons recursion requires K > 0");
    const double tk = std::tanh(K);
    double h = rho * K;
    for (int d = 0; d < depth; ++d) h = rho * std::atanh(tk * std::tanh(h));
    return std::tanh(h);
}

double lyons_limit_magnetization(double rho, double K, std::int64_t iteration_cap) {
    if (!(rho > 1.0)) throw ConfigError("lyons recursion requires rho > 1");
    if (!(K > 0.0)) throw ConfigError("lyons recursion requires K > 0");
    const double tk = std::tanh(K);
    double h = rho * K;
    for (std::int64_t i = 0; i < iteration_cap; ++i) {
        const double next = rho * std::atanh(tk * std::tanh(h));
        if (std::abs(next - h) < 1e-13) return std::tanh(next);
        h = next;
    }
    return std::tanh(h);
}

LyonsResult run_lyons_scan(const ExperimentConfig& cfg) {
    LyonsResult res;
    for (double K : cfg.k_grid)
        for (int d : cfg.depth_grid)
            res.curve.push_back({K, d, lyons_magnetization(cfg.rho, K, d)});

    auto ordered = [&](double K) {
        return lyons_limit_magnetization(cfg.rho, K, cfg.recursion_cap) > 1e-9;
    };
    double lo = cfg.bisect_lo, hi = cfg.bisect_hi;
    if (ordered(lo) || !ordered(hi))
        throw ConfigError("bisection bracket does not straddle the transition");
    while (hi - lo > cfg.bisect_tol) {
        const double mid = 0.5 * (lo + hi);
        (ordered(mid) ? hi : lo) = mid;
    }
    res.k_crit = 0.5 * (lo + hi);
    return res;
}

PercolationExperimentResult run_percolation_experiment(const ExperimentConfig& cfg,
                                                       const DegreeDistribution& dist) {
    if (cfg.theta_grid.empty()) throw ConfigError("percolate requires a theta grid");
    if (cfg.replicas < 1) throw ConfigError("percolate requires replicas >= 1");
    PercolationExperimentResult res;
    res.points = survival_curve(cfg.ensemble(), dist, cfg.theta_grid, cfg.depth, cfg.replicas,
                                cfg.seed, TreeGenLimits{cfg.vertex_cap});
    const bool gw = cfg.model == TreeModel::GaltonWatson;
    if (!gw)
        res.notices.push_back(
            "generating-function oracle applies to the gw model only; oracle columns are NaN");
    for (double th : cfg.theta_grid) {
        if (gw) {
            const OffspringLaw law = gw_offspring_law(dist);
            res.oracle_survival.push_back(1.0 - gw_extinction_oracle(law, th));
            res.oracle_depth_survival.push_back(
                1.0 - gw_extinction_by_depth(law, th, cfg.depth));
        } else {
            res.oracle_survival.push_back(std::numeric_limits<double>::quiet_NaN());
            res.oracle_depth_survival.push_back(std::numeric_limits<double>::quiet_NaN());
        }
    }
    return res;
}

void write_gap_csv(std::ostream& out, const ExperimentConfig& cfg, const GapResult& res) {
    csv_preamble(out, cfg);
    const std::string h = cfg.hash_hex();
    out << "config_hash,replica,seed,statistic,value,stderr\n";
    for (int r = 0; r < cfg.replicas; ++r) {
        const std::uint64_t rs = replica_seed(cfg.seed, static_cast<std::uint64_t>(r));
        for (int n = cfg.depth_min; n <= cfg.depth_max; ++n)
            out << h << ',' << r << ',' << rs << ",root_gap_d" << n << ','
                << fmt(res.replica_gap[static_cast<std::size_t>(n - cfg.depth_min)]
                                      [static_cast<std::size_t>(r)])
                << ",\n";
    }
    for (int n = cfg.depth_min; n <= cfg.depth_max; ++n) {
        const auto i = static_cast<std::size_t>(n - cfg.depth_min);
        out << h << ",,,mean_root_gap_d" << n << ',' << fmt(res.mean_gap[i]) << ','
            << fmt(res.stderr_gap[i]) << "\n";
    }
    if (!res.bound_checked) out << h << ",,,warning_q_ge_1," << fmt(res.q) << ",\n";
    out << h << ",,,q," << fmt(res.q) << ",\n";
    out << h << ",,,fitted_rate," << fmt(res.fit.rate) << ",\n";
    out << h << ",,,fit_r_squared," << fmt(res.fit.r_squared) << ",\n";
    out << h << ",,,r2_violations," << res.r2_violations << ",\n";
}

void write_growth_csv(std::ostream& out, const ExperimentConfig& cfg, const GrowthResult& res) {
    csv_preamble(out, cfg);
    const std::string h = cfg.hash_hex();
    out << "config_hash,replica,seed,statistic,value,stderr\n";
    auto emit = [&](const std::string& name, int n, const Welford& w) {
        out << h << ",,," << name << "_n" << n << ',' << fmt(w.mean) << ',' << fmt(w.stderr_())
            << "\n";
    };
    for (int n = 0; n < static_cast<int>(res.level.size()); ++n) {
        const auto& st = res.level[static_cast<std::size_t>(n)];
        emit("mean_shell", n, st.shell);
        emit("mean_ordinary", n, st.ordinary);
        emit("mean_distinguished", n, st.distinguished);
        emit("mean_immigrants", n, st.immigrants);
        emit("shell_over_c", n, st.shell_ratio);
        emit("ordinary_over_c", n, st.ordinary_ratio);
        if (st.lhat_ratio.n > 0) emit("lhat_over_sigma", n, st.lhat_ratio);
        emit("immigrant_tail", n, st.tail);
    }
    out << h << ",,,lhat_cap_violations," << res.lhat_cap_violations << ",\n";
}

void write_lyons_csv(std::ostream& out, const ExperimentConfig& cfg, const LyonsResult& res) {
    csv_preamble(out, cfg);
    out << "# k_crit " << fmt(res.k_crit) << "\n";
    const std::string h = cfg.hash_hex();
    out << "config_hash,K,depth,m_root\n";
    for (const auto& p : res.curve)
        out << h << ',' << fmt(p.K) << ',' << p.depth << ',' << fmt(p.m_root) << "\n";
}

void write_percolation_csv(std::ostream& out, const ExperimentConfig& cfg,
                           const PercolationExperimentResult& res) {
    csv_preamble(out, cfg);
    out << "theta,depth,replicas,survival,stderr,config_hash\n";
    for (const auto& p : res.points)
        out << fmt(p.theta) << ',' << p.depth << ',' << p.replicas << ',' << fmt(p.survival)
            << ',' << fmt(p.stderr_) << ',' << cfg.hash_hex() << "\n";
}

namespace {

nlohmann::json config_json(const ExperimentConfig& cfg) {
    nlohmann::json j;
    j["experiment"] = cfg.experiment;
    j["dist"] = cfg.dist_spec;
    j["model"] = model_tag(cfg.model, (cfg.model == TreeModel::SizeBiased) ? 1 : cfg.s);
    j["root_law"] = root_law_name(cfg.root_law);
    j["seed"] = cfg.seed;
    j["config_hash"] = cfg.hash_hex();
    return j;
}

}  // namespace

std::string thresholds_json(const ExperimentConfig& cfg, const ThresholdSheet& sheet) {
    nlohmann::json j = config_json(cfg);
    j["s"] = cfg.s;
    j["alpha"] = cfg.alpha;
    j["J"] = cfg.J;
    j["beta"] = cfg.beta;
    j["a"] = sheet.a;
    j["mean_k2"] = sheet.mean_k2;
    j["rho"] = sheet.rho;
    j["K"] = sheet.K;
    j["q_of_K"] = sheet.q;
    j["K_c"] = sheet.K_c;
    if (std::isnan(sheet.K_hat_c)) j["K_hat_c"] = nullptr;
    else j["K_hat_c"] = sheet.K_hat_c;
    j["c_star"] = sheet.c_star;
    j["K_of_c"] = sheet.K_of_c;
    j["T_c_lyons"] = sheet.T_c_lyons;
    j["T_c_network"] = sheet.T_c_network;
    j["decay_budget"] = sheet.decay_budget;
    return j.dump(2);
}

std::string gap_json(const ExperimentConfig& cfg, const GapResult& res) {
    nlohmann::json j = config_json(cfg);
    j["K"] = cfg.K();
    j["q"] = res.q;
    j["bound_checked"] = res.bound_checked;
    j["depth_min"] = cfg.depth_min;
    j["depth_max"] = cfg.depth_max;
    j["replicas"] = cfg.replicas;
    j["mean_gap"] = res.mean_gap;
    j["stderr_gap"] = res.stderr_gap;
    j["fitted_rate"] = res.fit.rate;
    j["fit_r_squared"] = res.fit.r_squared;
    j["fit_degenerate"] = res.fit.degenerate;
    j["r2_violations"] = res.r2_violations;
    j["clamp_events"] = res.clamp_events;
    j["notices"] = res.notices;
    return j.dump(2);
}

std::string growth_json(const ExperimentConfig& cfg, const GrowthResult& res) {
    nlohmann::json j = config_json(cfg);
    j["replicas"] = cfg.replicas;
    j["depth"] = cfg.depth;
    j["c"] = res.c;
    if (std::isnan(res.sigma)) j["sigma"] = nullptr;
    else j["sigma"] = res.sigma;
    j["lhat_cap_violations"] = res.lhat_cap_violations;
    auto series = [&](auto pick) {
        std::vector<double> v;
        for (const auto& st : res.level) v.push_back(pick(st));
        return v;
    };
    j["mean_shell"] = series([](const GrowthLevelStats& s) { return s.shell.mean; });
    j["mean_shell_ratio"] = series([](const GrowthLevelStats& s) { return s.shell_ratio.mean; });
    j["mean_ordinary_ratio"] =
        series([](const GrowthLevelStats& s) { return s.ordinary_ratio.mean; });
    return j.dump(2);
}

std::string lyons_json(const ExperimentConfig& cfg, const LyonsResult& res) {
    nlohmann::json j = config_json(cfg);
    j["rho"] = cfg.rho;
    j["k_crit"] = res.k_crit;
    j["k_crit_exact"] = lyons_Kcrit(cfg.rho);
    j["bisect_tol"] = cfg.bisect_tol;
    return j.dump(2);
}

std::string percolation_json(const ExperimentConfig& cfg,
                             const PercolationExperimentResult& res) {
    nlohmann::json j = config_json(cfg);
    j["depth"] = cfg.depth;
    j["replicas"] = cfg.replicas;
    nlohmann::json points = nlohmann::json::array();
    for (std::size_t i = 0; i < res.points.size(); ++i) {
        nlohmann::json p;
        p["theta"] = res.points[i].theta;
        p["survival"] = res.points[i].survival;
        p["stderr"] = res.points[i].stderr_;
        if (std::isnan(res.oracle_survival[i])) {
            p["oracle_survival"] = nullptr;
            p["oracle_depth_survival"] = nullptr;
        } else {
            p["oracle_survival"] = res.oracle_survival[i];
            p["oracle_depth_survival"] = res.oracle_depth_survival[i];
        }
        points.push_back(p);
    }
    j["points"] = points;
    j["notices"] = res.notices;
    return j.dump(2);
}

std::string csv_body_for_hash(const std::string& csv_text) {
    std::istringstream in(csv_text);
    std::ostringstream out;
    std::string line;
    while (std::getline(in, line))
        if (line.rfind("# generated_at", 0) != 0) out << line << "\n";
    return out.str();
}

}  // namespace gwising
