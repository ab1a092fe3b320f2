#include <cmath>

#include "doctest.h"

#include "gwising/degree_dist.hpp"
#include "gwising/errors.hpp"
#include "gwising/percolation.hpp"
#include "gwising/tree.hpp"

using namespace gwising;

namespace {

DegreeDistribution half_half() {
    return DegreeDistribution::from_table({{2, 0.5}, {3, 0.5}});
}

}  // namespace

TEST_CASE("theta near 1 keeps the whole tree open") {
    auto dist = half_half();
    RngStream rng(71);
    auto tree = gen_gw(dist, 6, rng);
    auto outcome = percolate(tree, 1.0 - 1e-15, rng);
    for (int n = 0; n <= 6; ++n)
        CHECK(outcome.open_shell[static_cast<std::size_t>(n)] == tree.shell_size(n));
    CHECK(outcome.survived_to(6));
}

TEST_CASE("coupled grid is monotone realization by realization") {
    auto dist = half_half();
    const double grid[2] = {0.5, 0.8};
    for (int r = 0; r < 200; ++r) {
        RngStream rng(replica_seed(72, r));
        auto tree = gen_gw(dist, 8, rng);
        auto outcomes = percolate_coupled(tree, grid, rng);
        for (int n = 0; n <= 8; ++n)
            CHECK(outcomes[0].open_shell[static_cast<std::size_t>(n)] <=
                  outcomes[1].open_shell[static_cast<std::size_t>(n)]);
        if (outcomes[0].survived_to(8)) CHECK(outcomes[1].survived_to(8));
    }
}

TEST_CASE("percolation is deterministic in the stream") {
    auto dist = half_half();
    RngStream t1(73), t2(73);
    auto tree1 = gen_gw(dist, 6, t1);
    auto tree2 = gen_gw(dist, 6, t2);
    auto a = percolate(tree1, 0.6, t1);
    auto b = percolate(tree2, 0.6, t2);
    CHECK(a.open_shell == b.open_shell);
    CHECK_THROWS_AS(percolate(tree1, 0.0, t1), ConfigError);
    CHECK_THROWS_AS(percolate(tree1, 1.0, t1), ConfigError);
}

TEST_CASE("extinction oracle fixed points") {
    // offspring 1 or 2 with equal probability (the gw law of {2:0.5,3:0.5})
    const OffspringLaw law = {{1, 0.5}, {2, 0.5}};
    CHECK(gw_extinction_oracle(law, 0.8) == doctest::Approx(0.375).epsilon(1e-10));

    // subcritical thinning: theta * mean <= 1 forces extinction
    CHECK(gw_extinction_oracle(law, 0.5) == doctest::Approx(1.0).epsilon(1e-4));
    CHECK(gw_extinction_oracle(law, 2.0 / 3.0) == doctest::Approx(1.0).epsilon(1e-4));

    // theta -> 1: no-death law with mean > 1 never dies
    CHECK(gw_extinction_oracle(law, 1.0 - 1e-15) < 1e-9);

    CHECK(gw_offspring_law(half_half()) == law);
}

TEST_CASE("depth-truncated oracle matches the exact finite-depth law") {
    const OffspringLaw law = {{1, 0.5}, {2, 0.5}};
    // by hand: q_1 = f(1-theta), theta = 0.8
    const double u = 0.2;
    const double q1 = 0.5 * u + 0.5 * u * u;
    CHECK(gw_extinction_by_depth(law, 0.8, 1) == doctest::Approx(q1).epsilon(1e-14));
    // iterates increase toward the fixed point
    double prev = 0.0;
    for (int d = 1; d <= 30; ++d) {
        const double qd = gw_extinction_by_depth(law, 0.8, d);
        CHECK(qd >= prev);
        prev = qd;
    }
    CHECK(prev == doctest::Approx(0.375).epsilon(1e-3));
}

TEST_CASE("cpn threshold") {
    CHECK(cpn_threshold(2.5, 2, 0.5) == 0.25);  // exact: min(2/3, 2^-2)
    // the s-term dominates whenever s^{1/alpha} <= a-1
    CHECK(cpn_threshold(20.0, 2, 0.5) == doctest::Approx(1.0 / 19.0));
    CHECK(cpn_threshold(2.0 + 1e-9, 2, 0.5) == doctest::Approx(0.25));
    CHECK_THROWS_AS(cpn_threshold(2.0, 2, 0.5), ConfigError);
    CHECK_THROWS_AS(cpn_threshold(2.5, 1, 0.5), ConfigError);
}

TEST_CASE("survival against the generating-function oracle") {
    auto dist = half_half();
    const OffspringLaw law = gw_offspring_law(dist);
    const std::vector<double> grid = {0.2, 0.4, 0.6, 0.8, 0.95};
    const int depth = 20, replicas = 4000;
    auto points = survival_curve({TreeModel::GaltonWatson, 0, GwsRootLaw::Process}, dist, grid,
                                 depth, replicas, 661);
    for (std::size_t i = 0; i < grid.size(); ++i) {
        // the depth-truncated iterate is the exact finite-depth law at any theta
        const double exact_finite = 1.0 - gw_extinction_by_depth(law, grid[i], depth);
        CHECK(std::abs(points[i].survival - exact_finite) <= 0.02);
        if (grid[i] * 1.5 > 1.2) {
            // away from criticality the depth-20 correction is below the MC error
            const double fixed_point = 1.0 - gw_extinction_oracle(law, grid[i]);
            CHECK(std::abs(points[i].survival - fixed_point) <= 0.02);
        }
    }
}

TEST_CASE("subcritical gws percolation dies out in depth") {
    auto dist = half_half();
    // theta below cpn_threshold(2.5, 2, 0.5) = 0.25
    const double theta[1] = {0.2};
    int survived5 = 0, survived10 = 0, survived15 = 0;
    for (int r = 0; r < 1000; ++r) {
        RngStream rng(replica_seed(662, r));
        auto tree = gen_gws(dist, 2, 15, rng);
        auto outcome = percolate_coupled(tree, theta, rng)[0];
        // deeper survival is a sub-event of shallower survival
        CHECK((outcome.survived_to(10) ? outcome.survived_to(5) : true));
        CHECK((outcome.survived_to(15) ? outcome.survived_to(10) : true));
        survived5 += outcome.survived_to(5);
        survived10 += outcome.survived_to(10);
        survived15 += outcome.survived_to(15);
    }
    CHECK(survived5 >= survived10);
    CHECK(survived10 >= survived15);
    CHECK(survived15 <= 50);  // heads toward zero
}
