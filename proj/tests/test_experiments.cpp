#include <cmath>
#include <sstream>

#include "doctest.h"

#include "gwising/errors.hpp"
#include "gwising/experiments.hpp"

using namespace gwising;

namespace {

DegreeDistribution half_half() {
    return DegreeDistribution::from_table({{2, 0.5}, {3, 0.5}});
}

ExperimentConfig small_gap_config() {
    ExperimentConfig cfg;
    cfg.experiment = "gap";
    cfg.dist_spec = "table:2:0.5,3:0.5";
    cfg.model = TreeModel::GaltonWatson;
    cfg.beta = 1.0;
    cfg.J = 0.1;  // K = 0.1
    cfg.depth_min = 2;
    cfg.depth_max = 6;
    cfg.replicas = 100;
    cfg.seed = 4242;
    return cfg;
}

}  // namespace

TEST_CASE("config hash reacts to semantic fields only") {
    ExperimentConfig a = small_gap_config();
    ExperimentConfig b = a;
    CHECK(a.hash() == b.hash());
    b.seed = 4243;
    CHECK(a.hash() != b.hash());
    b = a;
    b.workers = 8;
    CHECK(a.hash() == b.hash());  // worker count does not change results
    b = a;
    b.dist_spec = "table:2:0.4,3:0.6";
    CHECK(a.hash() != b.hash());
    b = a;
    b.s = 2;
    CHECK(a.hash() != b.hash());
    CHECK(a.hash_hex().size() == 16);
}

TEST_CASE("gap experiment decays and respects the budget") {
    auto dist = half_half();
    auto cfg = small_gap_config();
    auto res = run_gap_experiment(cfg, dist);
    CHECK(res.bound_checked);
    CHECK(res.q == doctest::Approx(q_of_K(0.1)));
    CHECK(res.r2_violations == 0);
    REQUIRE(res.mean_gap.size() == 5);
    for (std::size_t i = 1; i < res.mean_gap.size(); ++i)
        CHECK(res.mean_gap[i] < res.mean_gap[i - 1]);
    CHECK_FALSE(res.fit.degenerate);
    CHECK(res.fit.rate < 1.0);
    CHECK(res.fit.rate > 0.0);
}

TEST_CASE("gap experiment is deterministic and worker-count independent") {
    auto dist = half_half();
    auto cfg = small_gap_config();
    auto res1 = run_gap_experiment(cfg, dist);
    auto res2 = run_gap_experiment(cfg, dist);
    cfg.workers = 4;
    auto res4 = run_gap_experiment(cfg, dist);
    CHECK(res1.mean_gap == res2.mean_gap);
    CHECK(res1.mean_gap == res4.mean_gap);
    CHECK(res1.replica_gap == res4.replica_gap);

    std::ostringstream c1, c2;
    write_gap_csv(c1, cfg, res1);
    write_gap_csv(c2, cfg, res4);
    CHECK(csv_body_for_hash(c1.str()) == csv_body_for_hash(c2.str()));
    CHECK(c1.str().find("# config_hash " + cfg.hash_hex()) != std::string::npos);
}

TEST_CASE("gap experiment above the contraction threshold warns") {
    auto dist = half_half();
    auto cfg = small_gap_config();
    cfg.J = 0.2;  // q(0.2) = 1.2255 > 1
    cfg.depth_min = 2;
    cfg.depth_max = 5;
    cfg.replicas = 40;
    auto res = run_gap_experiment(cfg, dist);
    CHECK_FALSE(res.bound_checked);
    CHECK(res.r2_violations == 0);  // checks skipped entirely
    CHECK(res.mean_gap.size() == 4);
    for (double g : res.mean_gap) CHECK(g > 0.0);
    REQUIRE(!res.notices.empty());
    CHECK(res.notices[0].find(">= 1") != std::string::npos);
    std::ostringstream os;
    write_gap_csv(os, cfg, res);
    CHECK(os.str().find("warning_q_ge_1") != std::string::npos);
}

TEST_CASE("growth experiment reproduces the martingale means") {
    auto dist = half_half();
    ExperimentConfig cfg;
    cfg.experiment = "growth";
    cfg.dist_spec = "table:2:0.5,3:0.5";
    cfg.model = TreeModel::GaltonWatson;
    cfg.depth = 8;
    cfg.replicas = 3000;
    cfg.seed = 7;
    cfg.c = 1.5;
    auto res = run_growth_experiment(cfg, dist);
    CHECK(res.lhat_cap_violations == 0);
    for (int n = 1; n <= 8; ++n) {
        const auto& w = res.level[static_cast<std::size_t>(n)].ordinary_ratio;
        CHECK(std::abs(w.mean - 1.0) < 3.0 * w.stderr_());
    }

    // gws(2): under the shifted root law <Lhat_n/sigma^n> = 1 exactly;
    // under the process law it is <min(m,s)>_{p-hat}/sigma = 1.25 for this table.
    cfg.model = TreeModel::Gws;
    cfg.s = 2;
    cfg.root_law = GwsRootLaw::Shifted;
    cfg.c = 0.0;  // auto: max(a-1, s^{1/alpha}) = 4
    auto shifted = run_growth_experiment(cfg, dist);
    CHECK(shifted.sigma == doctest::Approx(1.6).epsilon(1e-12));
    CHECK(shifted.c == doctest::Approx(4.0));
    for (int n = 1; n <= 8; ++n) {
        const auto& w = shifted.level[static_cast<std::size_t>(n)].lhat_ratio;
        CHECK(std::abs(w.mean - 1.0) < 3.0 * w.stderr_());
    }
    CHECK(shifted.lhat_cap_violations == 0);

    cfg.root_law = GwsRootLaw::Process;
    auto process = run_growth_experiment(cfg, dist);
    for (int n = 1; n <= 8; ++n) {
        // Lhat_1 = 2 is deterministic for this table, so allow zero stderr
        const auto& w = process.level[static_cast<std::size_t>(n)].lhat_ratio;
        CHECK(std::abs(w.mean - 1.25) <= 3.0 * w.stderr_() + 1e-12);
    }
}

TEST_CASE("lyons recursion and scan") {
    // subcritical coupling contracts toward zero magnetization
    CHECK(lyons_magnetization(2.0, 0.9 * lyons_Kcrit(2.0), 300) < 1e-6);
    CHECK(lyons_magnetization(2.0, 0.9 * lyons_Kcrit(2.0), 30) > 1e-3);  // slow at depth 30
    CHECK(lyons_limit_magnetization(2.0, 0.9 * lyons_Kcrit(2.0)) < 1e-9);
    CHECK(lyons_limit_magnetization(2.0, 1.1 * lyons_Kcrit(2.0)) > 0.1);

    ExperimentConfig cfg;
    cfg.experiment = "lyons-scan";
    cfg.rho = 2.0;
    cfg.k_grid = {0.4, 0.6};
    cfg.depth_grid = {5, 10};
    auto res = run_lyons_scan(cfg);
    CHECK(res.curve.size() == 4);
    CHECK(std::abs(res.k_crit - lyons_Kcrit(2.0)) < 0.02);

    cfg.bisect_lo = 1.0;  // above the transition: bracket invalid
    CHECK_THROWS_AS(run_lyons_scan(cfg), ConfigError);
}

TEST_CASE("percolation experiment emits oracle comparisons") {
    auto dist = half_half();
    ExperimentConfig cfg;
    cfg.experiment = "percolate";
    cfg.dist_spec = "table:2:0.5,3:0.5";
    cfg.model = TreeModel::GaltonWatson;
    cfg.depth = 10;
    cfg.replicas = 500;
    cfg.seed = 31;
    cfg.theta_grid = {0.5, 0.8};
    auto res = run_percolation_experiment(cfg, dist);
    REQUIRE(res.points.size() == 2);
    CHECK(res.oracle_survival[0] == doctest::Approx(0.0));
    CHECK(res.oracle_survival[1] == doctest::Approx(0.625).epsilon(1e-9));
    CHECK(res.notices.empty());

    std::ostringstream os;
    write_percolation_csv(os, cfg, res);
    CHECK(os.str().find("theta,depth,replicas,survival,stderr,config_hash") !=
          std::string::npos);

    cfg.model = TreeModel::Config;
    auto res2 = run_percolation_experiment(cfg, dist);
    CHECK(std::isnan(res2.oracle_survival[0]));
    CHECK_FALSE(res2.notices.empty());
}

TEST_CASE("json summaries carry the config hash") {
    auto dist = half_half();
    auto cfg = small_gap_config();
    cfg.replicas = 10;
    auto res = run_gap_experiment(cfg, dist);
    const std::string j = gap_json(cfg, res);
    CHECK(j.find(cfg.hash_hex()) != std::string::npos);
    CHECK(j.find("\"fitted_rate\"") != std::string::npos);

    const ThresholdSheet sheet = make_threshold_sheet(dist, 2, 0.5, 1.0, 0.1);
    ExperimentConfig tcfg;
    tcfg.experiment = "thresholds";
    tcfg.dist_spec = "table:2:0.5,3:0.5";
    tcfg.s = 2;
    const std::string tj = thresholds_json(tcfg, sheet);
    CHECK(tj.find("\"K_hat_c\"") != std::string::npos);
    CHECK(tj.find("\"decay_budget\"") != std::string::npos);
}

TEST_CASE("csv body hashing drops only the timestamp") {
    const std::string text =
        "# generated_at 2026-01-01T00:00:00Z\n# config_hash abc\nh1,h2\n1,2\n";
    const std::string body = csv_body_for_hash(text);
    CHECK(body == "# config_hash abc\nh1,h2\n1,2\n");
}
