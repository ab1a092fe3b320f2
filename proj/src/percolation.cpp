#include "gwising/percolation.hpp"

#include <algorithm>
#include <cmath>

#include "gwising/errors.hpp"

namespace gwising {

namespace {

void check_theta(double theta) {
    if (!(theta > 0.0) || !(theta < 1.0)) throw ConfigError("theta must lie in (0,1)");
}

double thinned_pgf(const OffspringLaw& law, double theta, double q) {
    // f(1 - theta + theta*q) with f the offspring pgf
    const double u = 1.0 - theta + theta * q;
    double value = 0.0;
    for (const auto& [count, prob] : law) value += prob * std::pow(u, count);
    return value;
}

}  // namespace

std::vector<PercolationOutcome> percolate_coupled(const RootedTree& tree,
                                                  std::span<const double> thetas,
                                                  RngStream& rng) {
    for (double th : thetas) check_theta(th);
    const std::int64_t n = tree.vertex_count();

    // One uniform per materialized edge, child order; edge open iff u < theta.
    std::vector<double> u(static_cast<std::size_t>(n), 2.0);
    for (std::int64_t v = 1; v < n; ++v) u[static_cast<std::size_t>(v)] = rng.uniform();

    std::vector<PercolationOutcome> out(thetas.size());
    for (std::size_t t = 0; t < thetas.size(); ++t) {
        out[t].theta = thetas[t];
        out[t].open_shell.assign(static_cast<std::size_t>(tree.depth()) + 1, 0);
    }
    // reached[v] bitmask over thetas would cap grid size; use per-theta BFS by
    // level instead, reusing a shared reachability vector.
    for (std::size_t t = 0; t < thetas.size(); ++t) {
        std::vector<std::uint8_t> open(static_cast<std::size_t>(n), 0);
        open[0] = 1;
        out[t].open_shell[0] = 1;
        for (std::int64_t v = 1; v < n; ++v) {
            const TreeVertex& rec = tree.vertex(v);
            if (open[static_cast<std::size_t>(rec.parent)] &&
                u[static_cast<std::size_t>(v)] < thetas[t]) {
                open[static_cast<std::size_t>(v)] = 1;
                out[t].open_shell[static_cast<std::size_t>(rec.level)]++;
            }
        }
    }
    return out;
}

PercolationOutcome percolate(const RootedTree& tree, double theta, RngStream& rng) {
    const double grid[1] = {theta};
    return percolate_coupled(tree, grid, rng)[0];
}

OffspringLaw gw_offspring_law(const DegreeDistribution& dist) {
    OffspringLaw law;
    for (const auto& a : dist.weights()) law.push_back({a.degree - 1, a.prob});
    return law;
}

double gw_extinction_oracle(const OffspringLaw& law, double theta) {
    check_theta(theta);
    double q = 0.0;
    for (int i = 0; i < 100000000; ++i) {
        const double next = thinned_pgf(law, theta, q);
        if (std::abs(next - q) <= 1e-12) return next;
        q = next;
    }
    return q;
}

double gw_extinction_by_depth(const OffspringLaw& law, double theta, int depth) {
    check_theta(theta);
    double q = 0.0;
    for (int d = 0; d < depth; ++d) q = thinned_pgf(law, theta, q);
    return q;
}

double cpn_threshold(double a, int s, double alpha) {
    if (!(a > 2.0)) throw ConfigError("cpn_threshold requires a > 2");
    if (s < 2) throw ConfigError("cpn_threshold requires s >= 2");
    if (!(alpha > 0.0) || !(alpha < 1.0))
        throw ConfigError("cpn_threshold requires alpha in (0,1)");
    return std::min(1.0 / (a - 1.0), std::pow(static_cast<double>(s), -1.0 / alpha));
}

std::vector<SurvivalPoint> survival_curve(const TreeEnsemble& ens,
                                          const DegreeDistribution& dist,
                                          std::span<const double> thetas, int depth,
                                          int replicas, std::uint64_t base_seed,
                                          TreeGenLimits limits) {
    if (replicas < 1) throw ConfigError("survival_curve requires replicas >= 1");
    std::vector<std::int64_t> hits(thetas.size(), 0);
    for (int r = 0; r < replicas; ++r) {
        RngStream rng(replica_seed(base_seed, static_cast<std::uint64_t>(r)));
        const RootedTree tree = generate(ens, dist, depth, rng, limits);
        const auto outcomes = percolate_coupled(tree, thetas, rng);
        for (std::size_t t = 0; t < thetas.size(); ++t)
            if (outcomes[t].survived_to(depth)) hits[t]++;
    }
    std::vector<SurvivalPoint> points(thetas.size());
    for (std::size_t t = 0; t < thetas.size(); ++t) {
        const double p = static_cast<double>(hits[t]) / replicas;
        points[t] = {thetas[t], depth, replicas, p,
                     std::sqrt(p * (1.0 - p) / static_cast<double>(replicas))};
    }
    return points;
}

}  // namespace gwising
