#pragma once

#include <cstdint>
#include <iosfwd>
#include <string>
#include <vector>

#include "gwising/degree_dist.hpp"
#include "gwising/rng.hpp"

namespace gwising {

enum class VertexKind : std::uint8_t { Ordinary, Distinguished };

enum class TreeModel { GaltonWatson, SizeBiased, Gws, Config };

// Root offspring law of the two-type tree. Process: the initial distinguished
// vertex produces m offspring with probability p_hat_m. Shifted: with
// probability p_hat_{m+1}. The process law is the default; the shifted law is
// the one under which <Lhat_n>/sigma^n == 1 exactly.
enum class GwsRootLaw { Process, Shifted };

std::string model_tag(TreeModel model, int s);
TreeModel parse_model_tag(const std::string& tag, int* s_out);

struct TreeVertex {
    std::int64_t parent;  // -1 for the root
    std::int32_t level;
    VertexKind kind;
    // Drawn offspring count for deepest-level vertices; those offspring are
    // never materialized, one boundary spin attaches per stub. 0 elsewhere.
    std::int32_t stub_count;
    std::int64_t first_child;
    std::int32_t child_count;
};

struct TreeGenLimits {
    std::int64_t vertex_cap = 5'000'000;
};

// A finite-depth realization. Vertices are stored in breadth-first order, so
// each level occupies a contiguous id range.
class RootedTree {
  public:
    std::int64_t vertex_count() const { return static_cast<std::int64_t>(v_.size()); }
    const TreeVertex& vertex(std::int64_t id) const { return v_[static_cast<std::size_t>(id)]; }
    int depth() const { return depth_; }

    std::int64_t level_begin(int level) const { return offsets_[static_cast<std::size_t>(level)]; }
    std::int64_t level_end(int level) const {
        return offsets_[static_cast<std::size_t>(level) + 1];
    }
    std::int64_t shell_size(int level) const { return level_end(level) - level_begin(level); }
    std::int64_t stub_total() const;  // |S_{depth+1}|

    TreeModel model() const { return model_; }
    int gws_s() const { return gws_s_; }
    std::uint64_t dist_hash() const { return dist_hash_; }
    std::uint64_t seed() const { return seed_; }

    // Copy of the first `depth` levels; level-`depth` vertices keep their
    // materialized child counts as stub counts, so the boundary of the
    // truncated volume is exactly the next shell of the same realization.
    RootedTree truncated(int depth) const;

  private:
    friend class TreeBuilder;
    std::vector<TreeVertex> v_;
    std::vector<std::int64_t> offsets_;  // size depth+2
    int depth_ = 0;
    TreeModel model_ = TreeModel::GaltonWatson;
    int gws_s_ = 0;
    std::uint64_t dist_hash_ = 0;
    std::uint64_t seed_ = 0;
};

// Generators. Offspring are drawn in breadth-first order, children
// left-to-right, one uniform per draw; (seed, config) fixes the realization.
// Throw VertexCapOverflow when the cap would be exceeded.
RootedTree gen_gw(const DegreeDistribution& dist, int depth, RngStream& rng,
                  TreeGenLimits limits = {});
RootedTree gen_config(const DegreeDistribution& dist, int depth, RngStream& rng,
                      TreeGenLimits limits = {});
RootedTree gen_gws(const DegreeDistribution& dist, int s, int depth, RngStream& rng,
                   GwsRootLaw root_law = GwsRootLaw::Process, TreeGenLimits limits = {});

// Ensemble description used by the experiment runners.
struct TreeEnsemble {
    TreeModel model = TreeModel::GaltonWatson;
    int s = 0;
    GwsRootLaw root_law = GwsRootLaw::Process;
};
RootedTree generate(const TreeEnsemble& ens, const DegreeDistribution& dist, int depth,
                    RngStream& rng, TreeGenLimits limits = {});

// Per-generation counts of one realization.
struct GrowthTrace {
    std::vector<std::int64_t> distinguished;  // Lhat_n
    std::vector<std::int64_t> ordinary;       // L_n
    std::vector<std::int64_t> immigrants;     // Y_n: ordinary children of distinguished parents

    int depth() const { return static_cast<int>(distinguished.size()) - 1; }
    std::int64_t shell(int n) const {
        return distinguished[static_cast<std::size_t>(n)] + ordinary[static_cast<std::size_t>(n)];
    }
};

GrowthTrace growth_trace(const RootedTree& tree);

// Counts-only simulation, bit-identical to growth_trace(generate(...)) for
// the same stream state: it draws in the same order. Use it when the
// realization itself is not needed.
GrowthTrace simulate_growth(const TreeEnsemble& ens, const DegreeDistribution& dist, int depth,
                            RngStream& rng, TreeGenLimits limits = {});

struct NormalizedGrowth {
    std::vector<double> shell_ratio;     // shell_n / c^n
    std::vector<double> ordinary_ratio;  // L_n / c^n
};
NormalizedGrowth normalized_growth(const GrowthTrace& trace, double c);

// Running partial sums of sum_{n<=N} c^{-n} Y_n.
std::vector<double> immigrant_tail(const GrowthTrace& trace, double c);

// sigma = s - (s-1) p_hat_2 - (s-2) p_hat_3 - ... - p_hat_s, the mean number
// of distinguished offspring per non-initial distinguished vertex.
double sigma_rate(const SizeBiasedDistribution& sb, int s);

// Serialization: header comments (model tag, dist hash, seed, depth) then one
// vertex per line "id parent level kind stub_count".
void write_tree(std::ostream& out, const RootedTree& tree);
RootedTree read_tree(std::istream& in);

}  // namespace gwising
