#pragma once

#include <cstdint>
#include <iosfwd>
#include <string>
#include <vector>

#include "gwising/degree_dist.hpp"
#include "gwising/ising.hpp"
#include "gwising/percolation.hpp"
#include "gwising/stats.hpp"
#include "gwising/thresholds.hpp"
#include "gwising/tree.hpp"

namespace gwising {

// One experiment's full configuration. The canonical form feeds the config
// hash embedded in every output row; output paths and the worker count do
// not affect results and stay out of the hash.
struct ExperimentConfig {
    std::string experiment;  // thresholds|generate|growth|gap|lyons-scan|percolate
    std::string dist_spec;

    TreeModel model = TreeModel::GaltonWatson;
    int s = 0;
    GwsRootLaw root_law = GwsRootLaw::Process;

    int depth = 0;
    int depth_min = 4;
    int depth_max = 9;
    int replicas = 0;

    double beta = 1.0;
    double J = 1.0;
    double alpha = 0.5;

    CouplingScheme scheme = CouplingScheme::Constant;
    double prob_minus = 0.5;
    BoundaryPreset boundary_a = BoundaryPreset::AllPlus;
    BoundaryPreset boundary_b = BoundaryPreset::AllMinus;
    double prob_plus = 0.5;

    std::vector<double> theta_grid;

    double rho = 2.0;
    std::vector<double> k_grid;
    std::vector<int> depth_grid;
    double bisect_lo = 0.01;
    double bisect_hi = 1.5;
    double bisect_tol = 1e-3;
    std::int64_t recursion_cap = 200000;

    double c = 0.0;  // growth normalization; 0 = max(a-1, s^{1/alpha})

    std::uint64_t seed = 0;
    int workers = 1;
    std::int64_t vertex_cap = 5'000'000;

    double K() const { return beta * J; }
    TreeEnsemble ensemble() const;
    std::string canonical() const;
    std::uint64_t hash() const;
    std::string hash_hex() const;
};

// ---- gap: all-plus vs all-minus magnetization gaps over growing volumes ----

struct GapResult {
    std::vector<double> mean_gap;    // ensemble-mean root gap, index 0 <-> depth_min
    std::vector<double> stderr_gap;
    std::vector<std::vector<double>> replica_gap;  // [depth-depth_min][replica]
    DecayFit fit;
    std::int64_t r2_violations = 0;
    std::int64_t clamp_events = 0;   // message-passing saturation count, all runs
    bool bound_checked = false;      // false when q(K) >= 1
    double q = 0.0;
    std::vector<std::string> notices;
};

GapResult run_gap_experiment(const ExperimentConfig& cfg, const DegreeDistribution& dist);

// ---- growth: per-generation counts and their normalized ratios ----

struct GrowthLevelStats {
    Welford shell, ordinary, distinguished, immigrants;
    Welford shell_ratio;     // shell_n / c^n
    Welford ordinary_ratio;  // L_n / c^n
    Welford lhat_ratio;      // Lhat_n / sigma^n (s >= 2 only)
    Welford tail;            // immigrant-tail partial sum at c
};

struct GrowthResult {
    std::vector<GrowthLevelStats> level;  // 0..depth
    double c = 0.0;
    double sigma = 0.0;  // NaN when s < 2
    std::int64_t lhat_cap_violations = 0;
};

GrowthResult run_growth_experiment(const ExperimentConfig& cfg, const DegreeDistribution& dist);

// ---- lyons-scan: scalar recursion for the uniform ferromagnet ----

// All-plus root magnetization of the depth-n volume on a tree of branching
// number rho: h := rho*K iterated n times through rho*atanh(tanh K tanh h).
double lyons_magnetization(double rho, double K, int depth);

// Depth limit of the same recursion (iterate to a fixed point).
double lyons_limit_magnetization(double rho, double K, std::int64_t iteration_cap = 200000);

struct LyonsPoint {
    double K;
    int depth;
    double m_root;
};

struct LyonsResult {
    std::vector<LyonsPoint> curve;  // K-grid x depth-grid magnetizations
    double k_crit = 0.0;            // bisection estimate of the transition
};

LyonsResult run_lyons_scan(const ExperimentConfig& cfg);

// ---- percolate: survival curve plus the generating-function oracle ----

struct PercolationExperimentResult {
    std::vector<SurvivalPoint> points;
    std::vector<double> oracle_survival;        // 1 - fixed-point extinction (gw only, else NaN)
    std::vector<double> oracle_depth_survival;  // 1 - depth-truncated iterate
    std::vector<std::string> notices;
};

PercolationExperimentResult run_percolation_experiment(const ExperimentConfig& cfg,
                                                       const DegreeDistribution& dist);

// ---- output ----

// CSV writers. Shared layout: "# generated_at", "# config_hash" comment
// lines, a header row, data rows with the config hash in every row, `.`
// decimals, 12 significant digits.
void write_gap_csv(std::ostream& out, const ExperimentConfig& cfg, const GapResult& res);
void write_growth_csv(std::ostream& out, const ExperimentConfig& cfg, const GrowthResult& res);
void write_lyons_csv(std::ostream& out, const ExperimentConfig& cfg, const LyonsResult& res);
void write_percolation_csv(std::ostream& out, const ExperimentConfig& cfg,
                           const PercolationExperimentResult& res);

// JSON summaries, serialized with 2-space indent.
std::string thresholds_json(const ExperimentConfig& cfg, const ThresholdSheet& sheet);
std::string gap_json(const ExperimentConfig& cfg, const GapResult& res);
std::string growth_json(const ExperimentConfig& cfg, const GrowthResult& res);
std::string lyons_json(const ExperimentConfig& cfg, const LyonsResult& res);
std::string percolation_json(const ExperimentConfig& cfg,
                             const PercolationExperimentResult& res);

// The deterministic part of a CSV: everything except "# generated_at" lines.
std::string csv_body_for_hash(const std::string& csv_text);

}  // namespace gwising
