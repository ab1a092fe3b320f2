#include <cmath>
#include <map>
#include <sstream>

#include "doctest.h"

#include "gwising/degree_dist.hpp"
#include "gwising/errors.hpp"
#include "gwising/stats.hpp"
#include "gwising/tree.hpp"

using namespace gwising;

namespace {

DegreeDistribution half_half() {
    return DegreeDistribution::from_table({{2, 0.5}, {3, 0.5}});
}

std::string dump(const RootedTree& t) {
    std::ostringstream os;
    write_tree(os, t);
    return os.str();
}

// chi-square statistic against expected frequencies
double chi_square(const std::map<int, std::int64_t>& observed,
                  const std::map<int, double>& expected_prob, std::int64_t total) {
    double stat = 0.0;
    for (const auto& [k, p] : expected_prob) {
        const double e = p * static_cast<double>(total);
        const auto it = observed.find(k);
        const double o = it == observed.end() ? 0.0 : static_cast<double>(it->second);
        stat += (o - e) * (o - e) / e;
    }
    return stat;
}

}  // namespace

TEST_CASE("gw shells have mean (a-1)^n") {
    auto dist = half_half();
    Welford w;
    for (int r = 0; r < 10000; ++r) {
        RngStream rng(replica_seed(101, r));
        auto tree = gen_gw(dist, 3, rng);
        w.add(static_cast<double>(tree.shell_size(3)));
    }
    CHECK(std::abs(w.mean - 3.375) < 3.0 * w.stderr_());
}

TEST_CASE("gw depth 0 is a single root with stubs only") {
    auto dist = half_half();
    RngStream rng(7);
    auto tree = gen_gw(dist, 0, rng);
    CHECK(tree.vertex_count() == 1);
    CHECK(tree.vertex(0).parent == -1);
    CHECK(tree.vertex(0).child_count == 0);
    CHECK(tree.vertex(0).stub_count >= 1);  // offspring law takes values >= 1
    CHECK(tree.vertex(0).kind == VertexKind::Ordinary);
}

TEST_CASE("generation is deterministic in the seed") {
    auto dist = half_half();
    RngStream a(555), b(555);
    CHECK(dump(gen_gw(dist, 6, a)) == dump(gen_gw(dist, 6, b)));
    RngStream c(555), d(556);
    CHECK(dump(gen_gws(dist, 2, 6, c)) != dump(gen_gws(dist, 2, 6, d)));
}

TEST_CASE("config model laws") {
    auto dist = half_half();
    std::map<int, std::int64_t> root_deg;
    Welford ratio;
    for (int r = 0; r < 10000; ++r) {
        RngStream rng(replica_seed(202, r));
        auto tree = gen_config(dist, 2, rng);
        root_deg[tree.vertex(0).child_count]++;
        ratio.add(static_cast<double>(tree.shell_size(2)) /
                  static_cast<double>(tree.shell_size(1)));
    }
    // root degree ~ p within 0.015
    CHECK(std::abs(root_deg[2] / 10000.0 - 0.5) < 0.015);
    CHECK(std::abs(root_deg[3] / 10000.0 - 0.5) < 0.015);
    // mean offspring per non-root vertex: sum (k-1) p_hat_k = 1.6
    CHECK(std::abs(ratio.mean - 1.6) < 3.0 * ratio.stderr_());

    RngStream rng(11);
    CHECK(gen_config(dist, 0, rng).vertex_count() == 1);
}

TEST_CASE("gws(2) distinguished counts and immigrants") {
    auto dist = half_half();
    Welford lhat2, y1;
    for (int r = 0; r < 10000; ++r) {
        RngStream rng(replica_seed(303, r));
        auto tree = gen_gws(dist, 2, 3, rng);
        auto tr = growth_trace(tree);
        CHECK(tr.distinguished[1] == 2);  // min(m,2) = 2 for m in {2,3}
        lhat2.add(static_cast<double>(tr.distinguished[2]));
        y1.add(static_cast<double>(tr.immigrants[1]));
        CHECK(tr.immigrants[2] == 0);  // later distinguished have m <= 2
        CHECK(tr.immigrants[3] == 0);
        for (int n = 0; n <= 3; ++n) {
            CHECK(tr.shell(n) == tree.shell_size(n));
            CHECK(tr.distinguished[static_cast<std::size_t>(n)] <= (std::int64_t{1} << n));
            if (n >= 1)
                CHECK(tr.immigrants[static_cast<std::size_t>(n)] <=
                      tr.ordinary[static_cast<std::size_t>(n)]);
        }
    }
    CHECK(std::abs(lhat2.mean - 3.2) < 3.0 * lhat2.stderr_());
    CHECK(std::abs(y1.mean - 0.6) < 3.0 * y1.stderr_());
}

TEST_CASE("ordinary vertices have only ordinary children") {
    auto dist = half_half();
    for (int r = 0; r < 100; ++r) {
        RngStream rng(replica_seed(1212, r));
        auto tree = gen_gws(dist, 3, 5, rng);
        for (std::int64_t v = 1; v < tree.vertex_count(); ++v) {
            const auto& rec = tree.vertex(v);
            if (tree.vertex(rec.parent).kind == VertexKind::Ordinary)
                CHECK(rec.kind == VertexKind::Ordinary);
        }
    }
}

TEST_CASE("size-biased tree keeps a single distinguished ray") {
    auto dist = half_half();
    for (int r = 0; r < 200; ++r) {
        RngStream rng(replica_seed(404, r));
        auto tree = gen_gws(dist, 1, 6, rng);
        CHECK(tree.model() == TreeModel::SizeBiased);
        auto tr = growth_trace(tree);
        for (int n = 0; n <= 6; ++n) CHECK(tr.distinguished[static_cast<std::size_t>(n)] == 1);
    }
}

TEST_CASE("growth trace basics") {
    auto dist = half_half();
    RngStream rng(5);
    auto gw = gen_gw(dist, 4, rng);
    auto tr = growth_trace(gw);
    for (int n = 1; n <= 4; ++n) CHECK(tr.distinguished[static_cast<std::size_t>(n)] == 0);
    CHECK(tr.shell(0) == 1);

    RngStream rng2(6);
    auto tiny = growth_trace(gen_gw(dist, 0, rng2));
    CHECK(tiny.depth() == 0);
    CHECK(tiny.shell(0) == 1);
}

TEST_CASE("offspring laws pass a chi-square conformance check") {
    auto dist = half_half();
    auto sb = dist.size_biased();
    const std::map<int, double> p{{2, 0.5}, {3, 0.5}};
    const std::map<int, double> p_hat{{2, 0.4}, {3, 0.6}};

    std::map<int, std::int64_t> gw_deg, cfg_deg, gws_deg;
    std::int64_t gw_n = 0, cfg_n = 0, gws_n = 0;
    for (int r = 0; r < 10000; ++r) {
        RngStream rng(replica_seed(505, r));
        auto g = gen_gw(dist, 3, rng);
        for (std::int64_t v = 1; v < g.vertex_count(); ++v) {
            const auto& rec = g.vertex(v);
            const int deg = 1 + (rec.level == g.depth() ? rec.stub_count : rec.child_count);
            gw_deg[deg]++;
            ++gw_n;
        }
        RngStream rng2(replica_seed(606, r));
        auto c = gen_config(dist, 3, rng2);
        for (std::int64_t v = 1; v < c.vertex_count(); ++v) {
            const auto& rec = c.vertex(v);
            const int deg = 1 + (rec.level == c.depth() ? rec.stub_count : rec.child_count);
            cfg_deg[deg]++;
            ++cfg_n;
        }
        RngStream rng3(replica_seed(707, r));
        auto w = gen_gws(dist, 2, 3, rng3);
        for (std::int64_t v = 1; v < w.vertex_count(); ++v) {
            const auto& rec = w.vertex(v);
            if (rec.kind != VertexKind::Distinguished) continue;
            const int deg = 1 + (rec.level == w.depth() ? rec.stub_count : rec.child_count);
            gws_deg[deg]++;
            ++gws_n;
        }
    }
    // df = 1, 1% critical value 6.635
    CHECK(chi_square(gw_deg, p, gw_n) < 6.635);
    CHECK(chi_square(cfg_deg, p_hat, cfg_n) < 6.635);
    CHECK(chi_square(gws_deg, p_hat, gws_n) < 6.635);
}

TEST_CASE("normalized growth of the gw martingale") {
    auto dist = half_half();
    std::vector<Welford> ratio(11);
    for (int r = 0; r < 10000; ++r) {
        RngStream rng(replica_seed(808, r));
        auto tr = simulate_growth({TreeModel::GaltonWatson, 0, GwsRootLaw::Process}, dist, 10,
                                  rng);
        auto ng = normalized_growth(tr, 1.5);
        for (int n = 0; n <= 10; ++n)
            ratio[static_cast<std::size_t>(n)].add(ng.ordinary_ratio[static_cast<std::size_t>(n)]);
    }
    for (int n = 1; n <= 10; ++n) {
        const auto& w = ratio[static_cast<std::size_t>(n)];
        CHECK(std::abs(w.mean - 1.0) < 3.0 * w.stderr_());
    }
}

TEST_CASE("normalized growth with large c decays deterministically") {
    auto dist = half_half();  // offspring bounded by 2
    RngStream rng(17);
    auto tr = growth_trace(gen_gw(dist, 8, rng));
    auto ng = normalized_growth(tr, 10.0);
    for (int n = 0; n <= 8; ++n)
        CHECK(ng.shell_ratio[static_cast<std::size_t>(n)] <= std::pow(0.3, n) + 1e-12);
    CHECK_THROWS_AS(normalized_growth(tr, 1.0), ConfigError);
}

TEST_CASE("gws ratios stay bounded at c above the growth rate") {
    auto dist = half_half();
    const double c = 4.5;  // max(a-1, s^{1/alpha}) + margin at s=2, alpha=0.5
    std::vector<Welford> ratio(11);
    for (int r = 0; r < 2000; ++r) {
        RngStream rng(replica_seed(909, r));
        auto tr = simulate_growth({TreeModel::Gws, 2, GwsRootLaw::Process}, dist, 10, rng);
        auto ng = normalized_growth(tr, c);
        for (int n = 0; n <= 10; ++n)
            ratio[static_cast<std::size_t>(n)].add(ng.shell_ratio[static_cast<std::size_t>(n)]);
    }
    for (int n = 0; n <= 10; ++n) CHECK(ratio[static_cast<std::size_t>(n)].mean <= 2.0);
}

TEST_CASE("immigrant tail partial sums") {
    auto dist = half_half();
    for (int r = 0; r < 500; ++r) {
        RngStream rng(replica_seed(1010, r));
        auto tr = growth_trace(gen_gws(dist, 2, 5, rng));
        auto sums = immigrant_tail(tr, 1.5);
        const double expect = static_cast<double>(tr.immigrants[1]) / 1.5;
        for (int n = 1; n <= 5; ++n)
            CHECK(sums[static_cast<std::size_t>(n)] == doctest::Approx(expect).epsilon(1e-12));
    }
    GrowthTrace zero;
    zero.distinguished = {1, 1, 1};
    zero.ordinary = {0, 0, 0};
    zero.immigrants = {0, 0, 0};
    for (double s : immigrant_tail(zero, 2.0)) CHECK(s == 0.0);
}

TEST_CASE("immigrant tail stabilizes for the heavy-tailed law") {
    // Monte Carlo over the distinguished skeleton only: Y_n depends on the
    // distinguished population alone, so ordinary subtrees are not simulated.
    auto dist = DegreeDistribution::power_law(2.5, 200);
    auto sb = dist.size_biased();
    const int s = 3;
    const double c = std::pow(3.0, 1.0 / 0.4);
    int stabilized = 0;
    const int replicas = 1000;
    for (int r = 0; r < replicas; ++r) {
        RngStream rng(replica_seed(1111, r));
        GrowthTrace tr;
        tr.distinguished.assign(13, 0);
        tr.ordinary.assign(13, 0);
        tr.immigrants.assign(13, 0);
        tr.distinguished[0] = 1;
        std::int64_t lhat = 1;
        for (int n = 1; n <= 12; ++n) {
            std::int64_t next = 0, y = 0;
            for (std::int64_t i = 0; i < lhat; ++i) {
                const int m = (n == 1) ? sb.sample(rng) : sb.sample(rng) - 1;
                next += std::min(m, s);
                y += std::max(m - s, 0);
            }
            lhat = next;
            tr.distinguished[static_cast<std::size_t>(n)] = lhat;
            tr.immigrants[static_cast<std::size_t>(n)] = y;
        }
        auto sums = immigrant_tail(tr, c);
        const double total = sums[12];
        const double increment = sums[12] - sums[11];
        if (increment == 0.0 || (total > 0.0 && increment / total < 1e-3)) ++stabilized;
    }
    CHECK(stabilized >= 950);
}

TEST_CASE("sigma rate") {
    auto sb = half_half().size_biased();
    CHECK(sigma_rate(sb, 2) == doctest::Approx(1.6).epsilon(1e-12));

    // p_hat_2 = ... = p_hat_s = 0 forces sigma = s
    auto high = DegreeDistribution::from_table({{5, 0.5}, {6, 0.5}}).size_biased();
    CHECK(sigma_rate(high, 3) == doctest::Approx(3.0));

    // p_hat_2 close to 1 drives sigma toward 1 from above
    auto skew = DegreeDistribution::from_table({{2, 0.999}, {3, 0.001}}).size_biased();
    const double sigma = sigma_rate(skew, 2);
    CHECK(sigma > 1.0);
    CHECK(sigma < 1.01);

    CHECK_THROWS_AS(sigma_rate(sb, 1), ConfigError);
}

TEST_CASE("counts-only simulation matches materialized generation") {
    auto dist = half_half();
    auto pl = DegreeDistribution::power_law(2.5, 50);
    const TreeEnsemble ensembles[] = {
        {TreeModel::GaltonWatson, 0, GwsRootLaw::Process},
        {TreeModel::Config, 0, GwsRootLaw::Process},
        {TreeModel::Gws, 2, GwsRootLaw::Process},
        {TreeModel::Gws, 3, GwsRootLaw::Shifted},
        {TreeModel::SizeBiased, 1, GwsRootLaw::Process},
    };
    for (const auto& ens : ensembles) {
        for (const auto* d : {&dist, &pl}) {
            RngStream a(9090), b(9090);
            auto via_tree = growth_trace(generate(ens, *d, 6, a));
            auto direct = simulate_growth(ens, *d, 6, b);
            CHECK(via_tree.distinguished == direct.distinguished);
            CHECK(via_tree.ordinary == direct.ordinary);
            CHECK(via_tree.immigrants == direct.immigrants);
            // identical rng state afterwards: next draws agree
            CHECK(a.uniform() == b.uniform());
        }
    }
}

TEST_CASE("vertex cap overflow carries the partial depth") {
    auto dist = half_half();
    RngStream rng(2);
    try {
        gen_gw(dist, 30, rng, TreeGenLimits{50});
        FAIL("expected overflow");
    } catch (const VertexCapOverflow& e) {
        CHECK(e.cap == 50);
        CHECK(e.depth_reached >= 1);
        CHECK(e.depth_reached < 30);
    }
    RngStream rng2(2), rng3(2);
    CHECK_THROWS_AS(simulate_growth({TreeModel::GaltonWatson, 0, GwsRootLaw::Process}, dist, 30,
                                    rng2, TreeGenLimits{50}),
                    VertexCapOverflow);
    CHECK_NOTHROW(gen_gw(dist, 5, rng3));
}

TEST_CASE("serialization round trip") {
    auto dist = half_half();
    RngStream rng(31337);
    auto tree = gen_gws(dist, 2, 5, rng);
    std::ostringstream os;
    write_tree(os, tree);
    std::istringstream is(os.str());
    auto back = read_tree(is);
    CHECK(back.vertex_count() == tree.vertex_count());
    CHECK(back.depth() == tree.depth());
    CHECK(back.model() == tree.model());
    CHECK(back.gws_s() == tree.gws_s());
    CHECK(back.dist_hash() == tree.dist_hash());
    CHECK(back.seed() == tree.seed());
    CHECK(dump(back) == os.str());

    std::istringstream bad("0 -1 0 o 2\n2 0 1 o 0\n");
    CHECK_THROWS_AS(read_tree(bad), ConfigError);
}

TEST_CASE("truncation turns the next shell into stubs") {
    auto dist = half_half();
    RngStream rng(999);
    auto tree = gen_gw(dist, 6, rng);
    auto sub = tree.truncated(4);
    CHECK(sub.depth() == 4);
    CHECK(sub.vertex_count() == tree.level_end(4));
    CHECK(sub.stub_total() == tree.shell_size(5));
    for (std::int64_t v = sub.level_begin(4); v < sub.level_end(4); ++v)
        CHECK(sub.vertex(v).stub_count == tree.vertex(v).child_count);
    for (int n = 0; n <= 4; ++n) CHECK(sub.shell_size(n) == tree.shell_size(n));
}
