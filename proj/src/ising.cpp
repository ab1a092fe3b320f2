#include "gwising/ising.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <ostream>

#include "gwising/errors.hpp"

namespace gwising {

namespace {

constexpr double kFieldClamp = 30.0;

double clamp_field(double f, std::int64_t& events) {
    if (f > kFieldClamp) {
        ++events;
        return kFieldClamp;
    }
    if (f < -kFieldClamp) {
        ++events;
        return -kFieldClamp;
    }
    return f;
}

// atanh(tanh(k) * tanh(h)), guarded against the product rounding to +-1.
double edge_message(double k, double h, std::int64_t& events) {
    double p = std::tanh(k) * std::tanh(h);
    if (p >= 1.0 || p <= -1.0) {
        ++events;
        p = std::copysign(1.0 - 1e-16, p);
    }
    return std::atanh(p);
}

// Offsets of each deepest-level vertex into the flat stub arrays.
std::vector<std::int64_t> stub_offsets(const RootedTree& tree) {
    const int d = tree.depth();
    std::vector<std::int64_t> off;
    off.reserve(static_cast<std::size_t>(tree.shell_size(d)) + 1);
    std::int64_t acc = 0;
    for (std::int64_t v = tree.level_begin(d); v < tree.level_end(d); ++v) {
        off.push_back(acc);
        acc += tree.vertex(v).stub_count;
    }
    off.push_back(acc);
    return off;
}

// Boundary contribution folded into local fields at the attachment vertices.
std::vector<double> local_fields(const SpinSystem& sys) {
    const RootedTree& tree = *sys.tree;
    std::vector<double> local(static_cast<std::size_t>(tree.vertex_count()), 0.0);
    if (!sys.field.empty()) {
        if (sys.field.size() != local.size())
            throw ConfigError("field vector size does not match vertex count");
        local = sys.field;
    }
    if (sys.boundary.preset == BoundaryPreset::Free) return local;
    const int d = tree.depth();
    const auto off = stub_offsets(tree);
    if (static_cast<std::int64_t>(sys.boundary.spins.size()) != off.back())
        throw ConfigError("boundary spins do not cover every stub exactly once");
    for (std::int64_t v = tree.level_begin(d); v < tree.level_end(d); ++v) {
        const std::int64_t base = off[static_cast<std::size_t>(v - tree.level_begin(d))];
        const int stubs = tree.vertex(v).stub_count;
        for (int j = 0; j < stubs; ++j)
            local[static_cast<std::size_t>(v)] +=
                sys.couplings.stub[static_cast<std::size_t>(base + j)] *
                sys.boundary.spins[static_cast<std::size_t>(base + j)];
    }
    return local;
}

void check_couplings(const RootedTree& tree, const Couplings& c) {
    if (c.parent.size() != static_cast<std::size_t>(tree.vertex_count()))
        throw ConfigError("parent coupling vector size does not match vertex count");
    if (static_cast<std::int64_t>(c.stub.size()) != tree.stub_total())
        throw ConfigError("stub coupling vector size does not match stub count");
    if (!(c.cap > 0.0)) throw ConfigError("coupling cap must be positive");
    for (std::size_t v = 1; v < c.parent.size(); ++v)
        if (std::abs(c.parent[v]) > c.cap + 1e-12)
            throw ConfigError("|K_xy| exceeds the coupling cap");
    for (double k : c.stub)
        if (std::abs(k) > c.cap + 1e-12) throw ConfigError("|K_xy| exceeds the coupling cap");
}

}  // namespace

std::string boundary_name(BoundaryPreset preset) {
    switch (preset) {
        case BoundaryPreset::AllPlus: return "all-plus";
        case BoundaryPreset::AllMinus: return "all-minus";
        case BoundaryPreset::IidRandom: return "iid-random";
        case BoundaryPreset::Explicit: return "explicit";
        case BoundaryPreset::Free: return "free";
    }
    return "free";
}

std::string scheme_name(CouplingScheme scheme) {
    switch (scheme) {
        case CouplingScheme::Constant: return "constant";
        case CouplingScheme::IidSign: return "iid-sign";
        case CouplingScheme::IidUniform: return "iid-uniform";
    }
    return "constant";
}

BoundaryAssignment BoundaryAssignment::all_plus(const RootedTree& tree) {
    return {BoundaryPreset::AllPlus,
            std::vector<std::int8_t>(static_cast<std::size_t>(tree.stub_total()), 1)};
}

BoundaryAssignment BoundaryAssignment::all_minus(const RootedTree& tree) {
    return {BoundaryPreset::AllMinus,
            std::vector<std::int8_t>(static_cast<std::size_t>(tree.stub_total()), -1)};
}

BoundaryAssignment BoundaryAssignment::free_boundary() { return {BoundaryPreset::Free, {}}; }

BoundaryAssignment BoundaryAssignment::iid_random(const RootedTree& tree, double prob_plus,
                                                  RngStream& rng) {
    if (!(prob_plus >= 0.0 && prob_plus <= 1.0))
        throw ConfigError("prob_plus must lie in [0,1]");
    std::vector<std::int8_t> spins(static_cast<std::size_t>(tree.stub_total()));
    for (auto& s : spins) s = rng.uniform() < prob_plus ? 1 : -1;
    return {BoundaryPreset::IidRandom, std::move(spins)};
}

BoundaryAssignment BoundaryAssignment::explicit_spins(const RootedTree& tree,
                                                      std::vector<std::int8_t> spins) {
    if (static_cast<std::int64_t>(spins.size()) != tree.stub_total())
        throw ConfigError("explicit boundary must cover every stub exactly once");
    for (auto s : spins)
        if (s != 1 && s != -1) throw ConfigError("boundary spins must be +-1");
    return {BoundaryPreset::Explicit, std::move(spins)};
}

BoundaryAssignment BoundaryAssignment::flipped() const {
    BoundaryAssignment out = *this;
    if (preset == BoundaryPreset::AllPlus) out.preset = BoundaryPreset::AllMinus;
    else if (preset == BoundaryPreset::AllMinus) out.preset = BoundaryPreset::AllPlus;
    else if (preset != BoundaryPreset::Free) out.preset = BoundaryPreset::Explicit;
    for (auto& s : out.spins) s = static_cast<std::int8_t>(-s);
    return out;
}

BoundaryAssignment resolve_boundary(const RootedTree& tree, BoundaryPreset preset,
                                    double prob_plus, RngStream* rng) {
    switch (preset) {
        case BoundaryPreset::AllPlus: return BoundaryAssignment::all_plus(tree);
        case BoundaryPreset::AllMinus: return BoundaryAssignment::all_minus(tree);
        case BoundaryPreset::Free: return BoundaryAssignment::free_boundary();
        case BoundaryPreset::IidRandom:
            if (!rng) throw ConfigError("iid-random boundary needs an rng stream");
            return BoundaryAssignment::iid_random(tree, prob_plus, *rng);
        case BoundaryPreset::Explicit:
            throw ConfigError("explicit boundary cannot be resolved from a preset");
    }
    return BoundaryAssignment::free_boundary();
}

Couplings assign_couplings(const RootedTree& tree, const CouplingConfig& cfg, double beta,
                           RngStream& rng) {
    if (!(cfg.J > 0.0)) throw ConfigError("coupling scheme requires J > 0");
    if (!(beta > 0.0)) throw ConfigError("coupling scheme requires beta > 0");
    const double cap = beta * cfg.J;
    Couplings c;
    c.cap = cap;
    c.parent.resize(static_cast<std::size_t>(tree.vertex_count()), 0.0);
    c.stub.resize(static_cast<std::size_t>(tree.stub_total()), 0.0);
    auto draw = [&]() -> double {
        switch (cfg.scheme) {
            case CouplingScheme::Constant: return cap;
            case CouplingScheme::IidSign: return rng.uniform() < cfg.prob_minus ? -cap : cap;
            case CouplingScheme::IidUniform: return cap * (2.0 * rng.uniform() - 1.0);
        }
        return cap;
    };
    for (std::size_t v = 1; v < c.parent.size(); ++v) c.parent[v] = draw();
    for (auto& k : c.stub) k = draw();
    return c;
}

Couplings constant_couplings(const RootedTree& tree, double K) {
    Couplings c;
    c.cap = K != 0.0 ? std::abs(K) : 1.0;  // cap stays positive for the K = 0 edge case
    c.parent.assign(static_cast<std::size_t>(tree.vertex_count()), K);
    if (!c.parent.empty()) c.parent[0] = 0.0;
    c.stub.assign(static_cast<std::size_t>(tree.stub_total()), K);
    return c;
}

SpinSystem make_spin_system(const RootedTree& tree, Couplings couplings,
                            BoundaryAssignment boundary, std::vector<double> field) {
    check_couplings(tree, couplings);
    SpinSystem sys;
    sys.tree = &tree;
    sys.couplings = std::move(couplings);
    sys.boundary = std::move(boundary);
    sys.field = std::move(field);
    if (sys.boundary.preset != BoundaryPreset::Free &&
        static_cast<std::int64_t>(sys.boundary.spins.size()) != tree.stub_total())
        throw ConfigError("boundary spins do not cover every stub exactly once");
    return sys;
}

TruncatedVolume truncate_volume(const RootedTree& full_tree, const Couplings& full, int depth) {
    check_couplings(full_tree, full);
    TruncatedVolume vol;
    vol.tree = full_tree.truncated(depth);
    vol.couplings.cap = full.cap;
    vol.couplings.parent.assign(
        full.parent.begin(),
        full.parent.begin() + static_cast<std::size_t>(full_tree.level_end(depth)));
    if (depth == full_tree.depth()) {
        vol.couplings.stub = full.stub;
        return vol;
    }
    for (std::int64_t v = full_tree.level_begin(depth); v < full_tree.level_end(depth); ++v) {
        const TreeVertex& rec = full_tree.vertex(v);
        for (std::int32_t j = 0; j < rec.child_count; ++j)
            vol.couplings.stub.push_back(
                full.parent[static_cast<std::size_t>(rec.first_child + j)]);
    }
    return vol;
}

MarginalReport brute_marginals(const SpinSystem& sys, bool include_edge_constant) {
    const RootedTree& tree = *sys.tree;
    const std::int64_t n = tree.vertex_count();
    if (n > 20) throw ConfigError("brute_marginals size guard: more than 20 vertices");
    const auto local = local_fields(sys);

    const double edge_const =
        include_edge_constant ? sys.couplings.cap * static_cast<double>(n - 1) : 0.0;
    double z = 0.0;
    std::vector<double> z_plus(static_cast<std::size_t>(n), 0.0);
    const std::uint64_t configs = 1ULL << n;
    for (std::uint64_t mask = 0; mask < configs; ++mask) {
        double energy = edge_const;
        for (std::int64_t v = 0; v < n; ++v) {
            const double s = (mask >> v) & 1 ? 1.0 : -1.0;
            energy += local[static_cast<std::size_t>(v)] * s;
            const std::int64_t p = tree.vertex(v).parent;
            if (p >= 0) {
                const double sp = (mask >> p) & 1 ? 1.0 : -1.0;
                energy += sys.couplings.parent[static_cast<std::size_t>(v)] * s * sp;
            }
        }
        const double w = std::exp(energy);
        z += w;
        for (std::int64_t v = 0; v < n; ++v)
            if ((mask >> v) & 1) z_plus[static_cast<std::size_t>(v)] += w;
    }
    MarginalReport rep;
    rep.magnetization.resize(static_cast<std::size_t>(n));
    rep.rho_plus.resize(static_cast<std::size_t>(n));
    for (std::int64_t v = 0; v < n; ++v) {
        const double rp = z_plus[static_cast<std::size_t>(v)] / z;
        rep.rho_plus[static_cast<std::size_t>(v)] = rp;
        rep.magnetization[static_cast<std::size_t>(v)] = 2.0 * rp - 1.0;
    }
    return rep;
}

MarginalReport bp_marginals(const SpinSystem& sys) {
    const RootedTree& tree = *sys.tree;
    const std::int64_t n = tree.vertex_count();
    MarginalReport rep;
    rep.magnetization.resize(static_cast<std::size_t>(n));
    rep.rho_plus.resize(static_cast<std::size_t>(n));

    auto subtree_field = local_fields(sys);  // becomes H_v after the upward pass
    std::vector<double> up(static_cast<std::size_t>(n), 0.0);

    for (int level = tree.depth(); level >= 0; --level) {
        for (std::int64_t v = tree.level_begin(level); v < tree.level_end(level); ++v) {
            const TreeVertex& rec = tree.vertex(v);
            double h = subtree_field[static_cast<std::size_t>(v)];
            for (std::int32_t j = 0; j < rec.child_count; ++j)
                h += up[static_cast<std::size_t>(rec.first_child + j)];
            h = clamp_field(h, rep.clamp_events);
            subtree_field[static_cast<std::size_t>(v)] = h;
            if (rec.parent >= 0)
                up[static_cast<std::size_t>(v)] = edge_message(
                    sys.couplings.parent[static_cast<std::size_t>(v)], h, rep.clamp_events);
        }
    }

    std::vector<double> total(static_cast<std::size_t>(n), 0.0);
    total[0] = subtree_field[0];
    rep.magnetization[0] = std::tanh(total[0]);
    rep.rho_plus[0] = 0.5 * (1.0 + rep.magnetization[0]);
    for (int level = 0; level < tree.depth(); ++level) {
        for (std::int64_t v = tree.level_begin(level); v < tree.level_end(level); ++v) {
            const TreeVertex& rec = tree.vertex(v);
            for (std::int32_t j = 0; j < rec.child_count; ++j) {
                const std::int64_t c = rec.first_child + j;
                double cavity = total[static_cast<std::size_t>(v)] -
                                up[static_cast<std::size_t>(c)];
                cavity = clamp_field(cavity, rep.clamp_events);
                const double down = edge_message(
                    sys.couplings.parent[static_cast<std::size_t>(c)], cavity,
                    rep.clamp_events);
                double t = subtree_field[static_cast<std::size_t>(c)] + down;
                t = clamp_field(t, rep.clamp_events);
                total[static_cast<std::size_t>(c)] = t;
                rep.magnetization[static_cast<std::size_t>(c)] = std::tanh(t);
                rep.rho_plus[static_cast<std::size_t>(c)] =
                    0.5 * (1.0 + rep.magnetization[static_cast<std::size_t>(c)]);
            }
        }
    }
    return rep;
}

std::vector<double> boundary_gap(const SpinSystem& system, const BoundaryAssignment& xi,
                                 const BoundaryAssignment& eta) {
    SpinSystem a = system;
    a.boundary = xi;
    SpinSystem b = system;
    b.boundary = eta;
    const auto ma = bp_marginals(a);
    const auto mb = bp_marginals(b);
    std::vector<double> gap(ma.magnetization.size());
    for (std::size_t v = 0; v < gap.size(); ++v)
        gap[v] = std::abs(ma.magnetization[v] - mb.magnetization[v]);
    return gap;
}

FlipSymmetryResult flip_symmetry_check(const SpinSystem& system) {
    for (double h : system.field)
        if (h != 0.0) return {true, 0.0};
    SpinSystem flipped = system;
    flipped.boundary = system.boundary.flipped();
    const auto m1 = bp_marginals(system);
    const auto m2 = bp_marginals(flipped);
    double worst = 0.0;
    for (std::size_t v = 0; v < m1.magnetization.size(); ++v)
        worst = std::max(worst, std::abs(m1.magnetization[v] + m2.magnetization[v]));
    return {false, worst};
}

void write_marginal_csv(std::ostream& out, const RootedTree& tree, const MarginalReport& rep,
                        const std::string& meta_comment) {
    if (!meta_comment.empty()) out << "# " << meta_comment << "\n";
    out << "vertex_id,level,M,rho_plus\n";
    char buf[96];
    for (std::int64_t v = 0; v < tree.vertex_count(); ++v) {
        std::snprintf(buf, sizeof buf, "%lld,%d,%.12g,%.12g\n",
                      static_cast<long long>(v), tree.vertex(v).level,
                      rep.magnetization[static_cast<std::size_t>(v)],
                      rep.rho_plus[static_cast<std::size_t>(v)]);
        out << buf;
    }
}

}  // namespace gwising
