#pragma once

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "gwising/rng.hpp"
#include "gwising/tree.hpp"

namespace gwising {

enum class BoundaryPreset { AllPlus, AllMinus, IidRandom, Explicit, Free };

std::string boundary_name(BoundaryPreset preset);

// Fixed spins on the boundary shell, one per stub edge, ordered by vertex id
// then stub index. Free means the boundary term is absent.
struct BoundaryAssignment {
    BoundaryPreset preset = BoundaryPreset::Free;
    std::vector<std::int8_t> spins;  // empty for Free

    static BoundaryAssignment all_plus(const RootedTree& tree);
    static BoundaryAssignment all_minus(const RootedTree& tree);
    static BoundaryAssignment free_boundary();
    static BoundaryAssignment iid_random(const RootedTree& tree, double prob_plus,
                                         RngStream& rng);
    static BoundaryAssignment explicit_spins(const RootedTree& tree,
                                             std::vector<std::int8_t> spins);

    BoundaryAssignment flipped() const;
};

BoundaryAssignment resolve_boundary(const RootedTree& tree, BoundaryPreset preset,
                                    double prob_plus = 0.5, RngStream* rng = nullptr);

enum class CouplingScheme { Constant, IidSign, IidUniform };

std::string scheme_name(CouplingScheme scheme);

struct CouplingConfig {
    CouplingScheme scheme = CouplingScheme::Constant;
    double J = 1.0;           // |J_xy| <= J
    double prob_minus = 0.5;  // IidSign only
};

// Thermal couplings K_xy = beta*J_xy on every edge, including stub edges.
struct Couplings {
    std::vector<double> parent;  // K on edge (parent(v), v), indexed by child v; [0] unused
    std::vector<double> stub;    // stub edges, flattened in boundary order
    double cap = 0.0;            // K = beta*J >= max |K_xy|
};

// Draw order: parent edges for v = 1..N-1, then stub edges in boundary
// order; one uniform per edge for the iid schemes, none for Constant.
Couplings assign_couplings(const RootedTree& tree, const CouplingConfig& cfg, double beta,
                           RngStream& rng);
Couplings constant_couplings(const RootedTree& tree, double K);

struct SpinSystem {
    const RootedTree* tree = nullptr;
    Couplings couplings;
    std::vector<double> field;  // thermal field beta*h per vertex; empty = all zero
    BoundaryAssignment boundary;
};

SpinSystem make_spin_system(const RootedTree& tree, Couplings couplings,
                            BoundaryAssignment boundary, std::vector<double> field = {});

// Restriction of a full-depth realization to the volume of radius `depth`:
// the materialized edges from level `depth` to `depth+1` become the boundary
// edges and keep their coupling values, so marginals at different volumes
// refer to the same realization.
struct TruncatedVolume {
    RootedTree tree;
    Couplings couplings;
};
TruncatedVolume truncate_volume(const RootedTree& full_tree, const Couplings& full, int depth);

struct MarginalReport {
    std::vector<double> magnetization;  // M in [-1,1] per vertex
    std::vector<double> rho_plus;       // one-spin marginal of +1
    std::int64_t clamp_events = 0;      // message-passing saturation count
};

// Exact enumeration of all spin configurations. Guarded to <= 20 vertices.
// include_edge_constant adds the +K term per interior edge; marginals are
// unchanged, only the partition function shifts.
MarginalReport brute_marginals(const SpinSystem& system, bool include_edge_constant = false);

// Exact two-pass message passing in the atanh domain. Boundary stubs seed
// local fields with K_xy * xi_y; accumulated fields are clamped to |f| <= 30
// and clamp events counted.
MarginalReport bp_marginals(const SpinSystem& system);

// |M_z(xi) - M_z(eta)| per vertex on the same tree and couplings.
std::vector<double> boundary_gap(const SpinSystem& system, const BoundaryAssignment& xi,
                                 const BoundaryAssignment& eta);

struct FlipSymmetryResult {
    bool skipped = false;        // true when h != 0 somewhere
    double max_abs_sum = 0.0;    // max over vertices of |M(xi) + M(-xi)|
};
FlipSymmetryResult flip_symmetry_check(const SpinSystem& system);

// CSV rows "vertex_id,level,M,rho_plus" preceded by comment lines echoing
// run metadata.
void write_marginal_csv(std::ostream& out, const RootedTree& tree, const MarginalReport& rep,
                        const std::string& meta_comment);

}  // namespace gwising
