#pragma once

#include <cstdint>
#include <iosfwd>
#include <string>
#include <vector>

#include "gwising/rng.hpp"

namespace gwising {

enum class DistKind { ExplicitTable, TruncatedPowerLaw };

enum class TailDiagnostic { Stable, Growing };

struct ValidationReport {
    bool ok = true;
    std::string violation;  // names the first violated clause; empty when ok
};

struct DegreeAtom {
    int degree;   // k >= 2
    double prob;  // p_k in [0,1)
};

// Law of a randomly reached neighbor's degree: p_hat_k = k p_k / a.
// Derived from a DegreeDistribution, never user-constructed.
class SizeBiasedDistribution {
  public:
    const std::vector<DegreeAtom>& weights() const { return atoms_; }
    double prob(int k) const;

    // One uniform per draw, inverse CDF over the table.
    int sample(RngStream& rng) const;

    double mean() const;  // = <k^2>/a of the parent law

  private:
    friend class DegreeDistribution;
    explicit SizeBiasedDistribution(std::vector<DegreeAtom> atoms);

    std::vector<DegreeAtom> atoms_;
    std::vector<double> cum_;
};

// Degree / offspring law on {k >= 2} with at least two atoms of positive
// mass, normalized to 1 within 1e-12, and mean a > 2.
class DegreeDistribution {
  public:
    // Validating factories; throw ConfigError naming the violated clause.
    static DegreeDistribution from_table(std::vector<DegreeAtom> weights);
    static DegreeDistribution power_law(double lambda, int k_max);

    // No validation. For internal and test use (single-atom tables etc).
    static DegreeDistribution from_table_unchecked(std::vector<DegreeAtom> weights);

    const std::vector<DegreeAtom>& weights() const { return atoms_; }
    DistKind kind() const { return kind_; }
    double power_law_lambda() const { return lambda_; }
    int power_law_kmax() const { return kmax_; }
    double prob(int k) const;

    double mean_degree() const;    // a = sum k p_k
    double second_moment() const;  // sum k^2 p_k
    double xlogx_moment() const;   // b = sum k p_k ln k

    // sum_{k >= s+1} (k-s)^alpha p_hat_k over the support.
    // Requires s >= 1 and alpha in (0,1).
    double b_alpha(int s, double alpha) const;

    SizeBiasedDistribution size_biased() const;

    // One uniform per draw, inverse CDF with a precomputed cumulative table.
    int sample(RngStream& rng) const;

    // FNV-1a over kind, parameters and atoms; stable across runs and platforms.
    std::uint64_t hash() const;

    // Canonical inline form: "table:k:p,k:p" or "powerlaw:lambda=..,kmax=..".
    std::string spec_string() const;

  private:
    DegreeDistribution() = default;
    void build_tables();

    std::vector<DegreeAtom> atoms_;
    std::vector<double> cum_;
    DistKind kind_ = DistKind::ExplicitTable;
    double lambda_ = 0.0;
    int kmax_ = 0;
};

// Checks every invariant clause in order and reports the first failure.
ValidationReport validate(const std::vector<DegreeAtom>& weights);
ValidationReport validate(const DegreeDistribution& dist);

// Cutoff-doubling probe for b_alpha of a truncated power law: evaluates at
// k_max and 2*k_max and classifies the tail as Stable when the relative
// change sits below rel_threshold. Near alpha = lambda-2 any finite probe
// is indecisive; the default threshold separates the two sides at the
// cutoffs used in the tests.
struct BAlphaProbe {
    double at_kmax;
    double at_2kmax;
    double rel_change;
    TailDiagnostic diagnostic;
};
BAlphaProbe probe_b_alpha(double lambda, int k_max, int s, double alpha,
                          double rel_threshold = 0.12);

// Parses "powerlaw:lambda=2.5,kmax=10000", "table:2:0.5,3:0.5", or a path
// to a file with one "k p_k" pair per line ('#' comments allowed).
DegreeDistribution parse_dist_spec(const std::string& spec);
DegreeDistribution load_dist_file(const std::string& path);
DegreeDistribution read_dist(std::istream& in);

}  // namespace gwising
