#pragma once

#include <cstdint>
#include <span>
#include <utility>
#include <vector>

#include "gwising/rng.hpp"
#include "gwising/tree.hpp"

namespace gwising {

struct PercolationOutcome {
    double theta = 0.0;
    std::vector<std::int64_t> open_shell;  // root-cluster size per level

    bool survived_to(int depth) const {
        return depth < static_cast<int>(open_shell.size()) &&
               open_shell[static_cast<std::size_t>(depth)] > 0;
    }
};

// Each materialized edge open independently with probability theta; the root
// cluster is traced level by level. One uniform per edge, drawn in child
// vertex order.
PercolationOutcome percolate(const RootedTree& tree, double theta, RngStream& rng);

// Same, for a whole theta grid against shared per-edge uniforms, so outcomes
// are monotone in theta realization by realization.
std::vector<PercolationOutcome> percolate_coupled(const RootedTree& tree,
                                                  std::span<const double> thetas,
                                                  RngStream& rng);

// Offspring law as a finite table of (count, probability) pairs.
using OffspringLaw = std::vector<std::pair<int, double>>;

// Offspring law of the Galton-Watson tree built from `dist`:
// P(X = k-1) = p_k.
OffspringLaw gw_offspring_law(const DegreeDistribution& dist);

// Extinction probability of the theta-thinned branching process: smallest
// fixed point of q = f(1 - theta + theta q), found by monotone iteration
// from 0 to within 1e-12.
double gw_extinction_oracle(const OffspringLaw& law, double theta);

// Probability that the thinned process is dead by generation `depth`
// (iterate of the same map, for finite-depth comparisons).
double gw_extinction_by_depth(const OffspringLaw& law, double theta, int depth);

// min(q(K_c), q(K_hat_c)) = min(1/(a-1), s^{-1/alpha}).
double cpn_threshold(double a, int s, double alpha);

struct SurvivalPoint {
    double theta = 0.0;
    int depth = 0;
    int replicas = 0;
    double survival = 0.0;
    double stderr_ = 0.0;
};

// Monte Carlo root-to-depth survival over freshly generated trees, one
// derived stream per replica (tree first, then the coupled edge uniforms).
std::vector<SurvivalPoint> survival_curve(const TreeEnsemble& ens,
                                          const DegreeDistribution& dist,
                                          std::span<const double> thetas, int depth,
                                          int replicas, std::uint64_t base_seed,
                                          TreeGenLimits limits = {});

}  // namespace gwising
