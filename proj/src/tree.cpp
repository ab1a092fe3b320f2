#include "gwising/tree.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <istream>
#include <ostream>
#include <sstream>

#include "gwising/errors.hpp"

namespace gwising {

std::string model_tag(TreeModel model, int s) {
    switch (model) {
        case TreeModel::GaltonWatson: return "gw";
        case TreeModel::SizeBiased: return "size-biased";
        case TreeModel::Config: return "config";
        case TreeModel::Gws: return "gws(" + std::to_string(s) + ")";
    }
    return "gw";
}

TreeModel parse_model_tag(const std::string& tag, int* s_out) {
    if (s_out) *s_out = 0;
    if (tag == "gw") return TreeModel::GaltonWatson;
    if (tag == "size-biased" || tag == "sb") {
        if (s_out) *s_out = 1;
        return TreeModel::SizeBiased;
    }
    if (tag == "config") return TreeModel::Config;
    if (tag == "gws") return TreeModel::Gws;  // s supplied separately
    if (tag.rfind("gws(", 0) == 0 && tag.back() == ')') {
        int s = 0;
        try {
            s = std::stoi(tag.substr(4, tag.size() - 5));
        } catch (const std::exception&) {
            throw ConfigError("bad gws model tag: " + tag);
        }
        if (s < 1) throw ConfigError("bad gws model tag: " + tag);
        if (s_out) *s_out = s;
        return s == 1 ? TreeModel::SizeBiased : TreeModel::Gws;
    }
    throw ConfigError("unknown model tag: " + tag);
}

std::int64_t RootedTree::stub_total() const {
    std::int64_t total = 0;
    for (std::int64_t v = level_begin(depth_); v < level_end(depth_); ++v)
        total += vertex(v).stub_count;
    return total;
}

RootedTree RootedTree::truncated(int depth) const {
    if (depth < 0 || depth > depth_) throw ConfigError("truncation depth out of range");
    if (depth == depth_) return *this;
    RootedTree t;
    t.v_.assign(v_.begin(), v_.begin() + static_cast<std::size_t>(level_end(depth)));
    t.offsets_.assign(offsets_.begin(), offsets_.begin() + depth + 2);
    t.depth_ = depth;
    t.model_ = model_;
    t.gws_s_ = gws_s_;
    t.dist_hash_ = dist_hash_;
    t.seed_ = seed_;
    for (std::int64_t v = t.level_begin(depth); v < t.level_end(depth); ++v) {
        TreeVertex& rec = t.v_[static_cast<std::size_t>(v)];
        rec.stub_count = rec.child_count;
        rec.first_child = 0;
        rec.child_count = 0;
    }
    return t;
}

class TreeBuilder {
  public:
    static RootedTree build(const TreeEnsemble& ens, const DegreeDistribution& dist, int depth,
                            RngStream& rng, TreeGenLimits limits) {
        if (depth < 0) throw ConfigError("depth must be >= 0");
        const int s = (ens.model == TreeModel::SizeBiased) ? 1 : ens.s;
        const bool two_type =
            ens.model == TreeModel::SizeBiased || ens.model == TreeModel::Gws;
        if (ens.model == TreeModel::Gws && s < 1) throw ConfigError("gws requires s >= 1");
        SizeBiasedDistribution sb = dist.size_biased();

        RootedTree t;
        t.model_ = ens.model;
        t.gws_s_ = two_type ? s : 0;
        t.dist_hash_ = dist.hash();
        t.seed_ = rng.seed();
        t.v_.push_back({-1, 0, two_type ? VertexKind::Distinguished : VertexKind::Ordinary,
                        0, 0, 0});
        t.offsets_ = {0, 1};

        for (int level = 0; level <= depth; ++level) {
            const std::int64_t begin = t.offsets_[static_cast<std::size_t>(level)];
            const std::int64_t end = t.offsets_[static_cast<std::size_t>(level) + 1];
            for (std::int64_t v = begin; v < end; ++v) {
                const VertexKind kind = t.v_[static_cast<std::size_t>(v)].kind;
                const int m = draw_offspring(ens, dist, sb, kind, level == 0, rng);
                if (level == depth) {
                    t.v_[static_cast<std::size_t>(v)].stub_count = m;
                    continue;
                }
                if (static_cast<std::int64_t>(t.v_.size()) + m > limits.vertex_cap)
                    throw VertexCapOverflow(level, limits.vertex_cap);
                const int dist_children =
                    (kind == VertexKind::Distinguished) ? std::min(m, s) : 0;
                t.v_[static_cast<std::size_t>(v)].first_child =
                    static_cast<std::int64_t>(t.v_.size());
                t.v_[static_cast<std::size_t>(v)].child_count = m;
                for (int j = 0; j < m; ++j) {
                    t.v_.push_back({v, level + 1,
                                    j < dist_children ? VertexKind::Distinguished
                                                      : VertexKind::Ordinary,
                                    0, 0, 0});
                }
            }
            if (level < depth) t.offsets_.push_back(static_cast<std::int64_t>(t.v_.size()));
        }
        t.depth_ = depth;
        return t;
    }

    static RootedTree read(std::istream& in);

    // Offspring laws:
    //   gw       every vertex:  m with prob p_{m+1}
    //   config   root: m with prob p_m; others: m with prob p_hat_{m+1}
    //   gws      initial distinguished: p_hat_m (Process) or p_hat_{m+1} (Shifted);
    //            later distinguished: p_hat_{m+1}; ordinary: p_{m+1}
    static int draw_offspring(const TreeEnsemble& ens, const DegreeDistribution& dist,
                              const SizeBiasedDistribution& sb, VertexKind kind, bool is_root,
                              RngStream& rng) {
        switch (ens.model) {
            case TreeModel::GaltonWatson:
                return dist.sample(rng) - 1;
            case TreeModel::Config:
                return is_root ? dist.sample(rng) : sb.sample(rng) - 1;
            case TreeModel::SizeBiased:
            case TreeModel::Gws:
                if (kind == VertexKind::Distinguished) {
                    if (is_root && ens.root_law == GwsRootLaw::Process) return sb.sample(rng);
                    return sb.sample(rng) - 1;
                }
                return dist.sample(rng) - 1;
        }
        return 0;
    }
};

RootedTree generate(const TreeEnsemble& ens, const DegreeDistribution& dist, int depth,
                    RngStream& rng, TreeGenLimits limits) {
    return TreeBuilder::build(ens, dist, depth, rng, limits);
}

RootedTree gen_gw(const DegreeDistribution& dist, int depth, RngStream& rng,
                  TreeGenLimits limits) {
    return generate({TreeModel::GaltonWatson, 0, GwsRootLaw::Process}, dist, depth, rng, limits);
}

RootedTree gen_config(const DegreeDistribution& dist, int depth, RngStream& rng,
                      TreeGenLimits limits) {
    return generate({TreeModel::Config, 0, GwsRootLaw::Process}, dist, depth, rng, limits);
}

RootedTree gen_gws(const DegreeDistribution& dist, int s, int depth, RngStream& rng,
                   GwsRootLaw root_law, TreeGenLimits limits) {
    if (s < 1) throw ConfigError("gws requires s >= 1");
    TreeModel model = (s == 1) ? TreeModel::SizeBiased : TreeModel::Gws;
    return generate({model, s, root_law}, dist, depth, rng, limits);
}

GrowthTrace growth_trace(const RootedTree& tree) {
    GrowthTrace tr;
    const int depth = tree.depth();
    tr.distinguished.assign(static_cast<std::size_t>(depth) + 1, 0);
    tr.ordinary.assign(static_cast<std::size_t>(depth) + 1, 0);
    tr.immigrants.assign(static_cast<std::size_t>(depth) + 1, 0);
    for (std::int64_t v = 0; v < tree.vertex_count(); ++v) {
        const TreeVertex& rec = tree.vertex(v);
        const auto lvl = static_cast<std::size_t>(rec.level);
        if (rec.kind == VertexKind::Distinguished) {
            tr.distinguished[lvl]++;
        } else {
            tr.ordinary[lvl]++;
            if (rec.parent >= 0 && tree.vertex(rec.parent).kind == VertexKind::Distinguished)
                tr.immigrants[lvl]++;
        }
    }
    return tr;
}

GrowthTrace simulate_growth(const TreeEnsemble& ens, const DegreeDistribution& dist, int depth,
                            RngStream& rng, TreeGenLimits limits) {
    if (depth < 0) throw ConfigError("depth must be >= 0");
    const int s = (ens.model == TreeModel::SizeBiased) ? 1 : ens.s;
    const bool two_type = ens.model == TreeModel::SizeBiased || ens.model == TreeModel::Gws;
    if (ens.model == TreeModel::Gws && s < 1) throw ConfigError("gws requires s >= 1");
    SizeBiasedDistribution sb = dist.size_biased();

    GrowthTrace tr;
    tr.distinguished.assign(static_cast<std::size_t>(depth) + 1, 0);
    tr.ordinary.assign(static_cast<std::size_t>(depth) + 1, 0);
    tr.immigrants.assign(static_cast<std::size_t>(depth) + 1, 0);
    tr.distinguished[0] = two_type ? 1 : 0;
    tr.ordinary[0] = two_type ? 0 : 1;

    // Kinds of the current level in breadth-first child order.
    std::vector<std::uint8_t> level = {two_type ? std::uint8_t{1} : std::uint8_t{0}};
    std::int64_t total = 1;
    for (int n = 0; n <= depth; ++n) {
        if (n == depth) {
            for (std::size_t i = 0; i < level.size(); ++i)
                (void)TreeBuilder::draw_offspring(
                    ens, dist, sb, level[i] ? VertexKind::Distinguished : VertexKind::Ordinary,
                    n == 0, rng);
            break;
        }
        std::vector<std::uint8_t> next;
        for (std::size_t i = 0; i < level.size(); ++i) {
            const VertexKind kind = level[i] ? VertexKind::Distinguished : VertexKind::Ordinary;
            const int m = TreeBuilder::draw_offspring(ens, dist, sb, kind, n == 0, rng);
            if (total + m > limits.vertex_cap) throw VertexCapOverflow(n, limits.vertex_cap);
            total += m;
            const int nd = (kind == VertexKind::Distinguished) ? std::min(m, s) : 0;
            const int no = m - nd;
            next.insert(next.end(), static_cast<std::size_t>(nd), std::uint8_t{1});
            next.insert(next.end(), static_cast<std::size_t>(no), std::uint8_t{0});
            tr.distinguished[static_cast<std::size_t>(n) + 1] += nd;
            tr.ordinary[static_cast<std::size_t>(n) + 1] += no;
            if (kind == VertexKind::Distinguished)
                tr.immigrants[static_cast<std::size_t>(n) + 1] += no;
        }
        level.swap(next);
    }
    return tr;
}

NormalizedGrowth normalized_growth(const GrowthTrace& trace, double c) {
    if (!(c > 1.0)) throw ConfigError("normalized_growth requires c > 1");
    NormalizedGrowth out;
    double cn = 1.0;
    for (int n = 0; n <= trace.depth(); ++n) {
        out.shell_ratio.push_back(static_cast<double>(trace.shell(n)) / cn);
        out.ordinary_ratio.push_back(
            static_cast<double>(trace.ordinary[static_cast<std::size_t>(n)]) / cn);
        cn *= c;
    }
    return out;
}

std::vector<double> immigrant_tail(const GrowthTrace& trace, double c) {
    if (!(c > 1.0)) throw ConfigError("immigrant_tail requires c > 1");
    std::vector<double> sums;
    double acc = 0.0, cn = 1.0;
    for (int n = 0; n <= trace.depth(); ++n) {
        if (n > 0) acc += static_cast<double>(trace.immigrants[static_cast<std::size_t>(n)]) / cn;
        sums.push_back(acc);
        cn *= c;
    }
    return sums;
}

double sigma_rate(const SizeBiasedDistribution& sb, int s) {
    if (s < 2) throw ConfigError("sigma_rate requires s >= 2");
    double sigma = s;
    for (int j = 2; j <= s; ++j) sigma -= (s - j + 1) * sb.prob(j);
    if (!(sigma > 1.0) || !(sigma <= static_cast<double>(s) + 1e-12))
        throw InvariantViolation("sigma outside (1, s]: " + std::to_string(sigma));
    return sigma;
}

void write_tree(std::ostream& out, const RootedTree& tree) {
    out << "# gwising-tree v1\n";
    out << "# model " << model_tag(tree.model(), tree.gws_s()) << "\n";
    char hex[17];
    std::snprintf(hex, sizeof hex, "%016llx",
                  static_cast<unsigned long long>(tree.dist_hash()));
    out << "# dist_hash " << hex << "\n";
    out << "# seed " << tree.seed() << "\n";
    out << "# depth " << tree.depth() << "\n";
    out << "id parent level kind stub_count\n";
    for (std::int64_t v = 0; v < tree.vertex_count(); ++v) {
        const TreeVertex& rec = tree.vertex(v);
        out << v << ' ' << rec.parent << ' ' << rec.level << ' '
            << (rec.kind == VertexKind::Distinguished ? 'd' : 'o') << ' ' << rec.stub_count
            << '\n';
    }
}

RootedTree read_tree(std::istream& in) { return TreeBuilder::read(in); }

RootedTree TreeBuilder::read(std::istream& in) {
    RootedTree t;
    std::string line;
    std::string model_str = "gw";
    std::uint64_t dist_hash = 0, seed = 0;
    int depth = -1;
    bool have_header_row = false;
    std::int64_t expect_id = 0;

    while (std::getline(in, line)) {
        if (line.empty()) continue;
        if (line[0] == '#') {
            std::istringstream ls(line.substr(1));
            std::string key;
            ls >> key;
            if (key == "model") ls >> model_str;
            else if (key == "dist_hash") ls >> std::hex >> dist_hash;
            else if (key == "seed") ls >> seed;
            else if (key == "depth") ls >> depth;
            continue;
        }
        if (!have_header_row && line.rfind("id ", 0) == 0) {
            have_header_row = true;
            continue;
        }
        std::istringstream ls(line);
        std::int64_t id, parent;
        int level, stub;
        char kind;
        if (!(ls >> id >> parent >> level >> kind >> stub))
            throw ConfigError("malformed tree row: " + line);
        if (id != expect_id) throw ConfigError("tree rows must be sequential by id");
        ++expect_id;
        if (parent >= id || (parent < 0 && id != 0))
            throw ConfigError("tree row parent out of order: " + line);
        if (id == 0 && (parent != -1 || level != 0))
            throw ConfigError("root row must be '0 -1 0 ...'");
        if (id > 0 && level != t.v_[static_cast<std::size_t>(parent)].level + 1)
            throw ConfigError("child level must be parent level + 1: " + line);
        t.v_.push_back({parent, level,
                        kind == 'd' ? VertexKind::Distinguished : VertexKind::Ordinary, stub, 0,
                        0});
    }
    if (t.v_.empty()) throw ConfigError("empty tree file");

    // Rebuild level offsets and child ranges; vertices are BFS-ordered.
    t.offsets_ = {0};
    for (std::size_t i = 1; i < t.v_.size(); ++i) {
        if (t.v_[i].level < t.v_[i - 1].level) throw ConfigError("tree rows not in BFS order");
        if (t.v_[i].level > t.v_[i - 1].level) {
            if (t.v_[i].level != t.v_[i - 1].level + 1)
                throw ConfigError("tree file skips a level");
            t.offsets_.push_back(static_cast<std::int64_t>(i));
        }
    }
    t.offsets_.push_back(static_cast<std::int64_t>(t.v_.size()));
    t.depth_ = static_cast<int>(t.offsets_.size()) - 2;
    if (depth >= 0 && depth != t.depth_)
        throw ConfigError("tree header depth does not match rows");
    for (std::size_t i = 1; i < t.v_.size(); ++i) {
        TreeVertex& parent = t.v_[static_cast<std::size_t>(t.v_[i].parent)];
        if (parent.child_count == 0) parent.first_child = static_cast<std::int64_t>(i);
        else if (parent.first_child + parent.child_count != static_cast<std::int64_t>(i))
            throw ConfigError("children of a vertex must be contiguous");
        parent.child_count++;
    }
    t.model_ = parse_model_tag(model_str, &t.gws_s_);
    t.dist_hash_ = dist_hash;
    t.seed_ = seed;
    return t;
}

}  // namespace gwising
