#include "gwising/degree_dist.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <istream>
#include <sstream>

#include "gwising/errors.hpp"

namespace gwising {

namespace {

constexpr double kNormTol = 1e-12;

// Kahan summation; keeps normalization checks meaningful for 1e6-row tables.
double ksum(const std::vector<DegreeAtom>& atoms, double (*term)(const DegreeAtom&)) {
    double s = 0.0, c = 0.0;
    for (const auto& a : atoms) {
        double y = term(a) - c;
        double t = s + y;
        c = (t - s) - y;
        s = t;
    }
    return s;
}

std::vector<double> cumulative(const std::vector<DegreeAtom>& atoms) {
    std::vector<double> cum;
    cum.reserve(atoms.size());
    double s = 0.0, c = 0.0;
    for (const auto& a : atoms) {
        double y = a.prob - c;
        double t = s + y;
        c = (t - s) - y;
        s = t;
        cum.push_back(s);
    }
    if (!cum.empty()) cum.back() = 1.0;  // guard the final bin against rounding
    return cum;
}

int sample_table(const std::vector<DegreeAtom>& atoms, const std::vector<double>& cum,
                 RngStream& rng) {
    double u = rng.uniform();
    auto it = std::upper_bound(cum.begin(), cum.end(), u);
    std::size_t i = static_cast<std::size_t>(it - cum.begin());
    if (i >= atoms.size()) i = atoms.size() - 1;
    return atoms[i].degree;
}

void fnv_bytes(std::uint64_t& h, const void* data, std::size_t n) {
    const unsigned char* p = static_cast<const unsigned char*>(data);
    for (std::size_t i = 0; i < n; ++i) {
        h ^= p[i];
        h *= 0x100000001B3ULL;
    }
}

}  // namespace

ValidationReport validate(const std::vector<DegreeAtom>& weights) {
    if (weights.empty()) return {false, "empty table"};
    for (const auto& a : weights) {
        if (a.degree < 2)
            return {false, "degree " + std::to_string(a.degree) + " < 2"};
        if (!(a.prob >= 0.0) || !(a.prob <= 1.0))
            return {false, "p_" + std::to_string(a.degree) + " outside [0,1)"};
    }
    for (std::size_t i = 1; i < weights.size(); ++i) {
        if (weights[i].degree <= weights[i - 1].degree)
            return {false, "degrees not strictly increasing (duplicate or unsorted entry " +
                               std::to_string(weights[i].degree) + ")"};
    }
    // the support clause precedes the strict p < 1 check so a degenerate
    // one-atom table is reported as such, not as a range violation
    int positive = 0;
    for (const auto& a : weights)
        if (a.prob > 0.0) ++positive;
    if (positive < 2)
        return {false, "single-atom support / a = 2 not > 2: at least two degrees must carry "
                       "positive mass"};
    for (const auto& a : weights)
        if (a.prob >= 1.0)
            return {false, "p_" + std::to_string(a.degree) + " outside [0,1)"};
    double total = ksum(weights, [](const DegreeAtom& a) { return a.prob; });
    if (std::abs(total - 1.0) > kNormTol)
        return {false, "sum != 1 (got " + std::to_string(total) + ")"};
    return {};
}

ValidationReport validate(const DegreeDistribution& dist) { return validate(dist.weights()); }

void DegreeDistribution::build_tables() {
    std::sort(atoms_.begin(), atoms_.end(),
              [](const DegreeAtom& x, const DegreeAtom& y) { return x.degree < y.degree; });
    cum_ = cumulative(atoms_);
}

DegreeDistribution DegreeDistribution::from_table(std::vector<DegreeAtom> weights) {
    std::sort(weights.begin(), weights.end(),
              [](const DegreeAtom& x, const DegreeAtom& y) { return x.degree < y.degree; });
    ValidationReport rep = validate(weights);
    if (!rep.ok) throw ConfigError("invalid degree distribution: " + rep.violation);
    DegreeDistribution d;
    d.atoms_ = std::move(weights);
    d.kind_ = DistKind::ExplicitTable;
    d.build_tables();
    return d;
}

DegreeDistribution DegreeDistribution::from_table_unchecked(std::vector<DegreeAtom> weights) {
    DegreeDistribution d;
    d.atoms_ = std::move(weights);
    d.kind_ = DistKind::ExplicitTable;
    d.build_tables();
    return d;
}

DegreeDistribution DegreeDistribution::power_law(double lambda, int k_max) {
    if (!(lambda > 2.0)) throw ConfigError("power law requires lambda > 2");
    if (k_max < 3) throw ConfigError("power law requires k_max >= 3");
    std::vector<DegreeAtom> atoms;
    atoms.reserve(static_cast<std::size_t>(k_max) - 1);
    double z = 0.0, c = 0.0;
    for (int k = 2; k <= k_max; ++k) {
        double w = std::pow(static_cast<double>(k), -lambda);
        double y = w - c;
        double t = z + y;
        c = (t - z) - y;
        z = t;
        atoms.push_back({k, w});
    }
    for (auto& a : atoms) a.prob /= z;
    DegreeDistribution d;
    d.atoms_ = std::move(atoms);
    d.kind_ = DistKind::TruncatedPowerLaw;
    d.lambda_ = lambda;
    d.kmax_ = k_max;
    d.build_tables();
    return d;
}

double DegreeDistribution::prob(int k) const {
    auto it = std::lower_bound(atoms_.begin(), atoms_.end(), k,
                               [](const DegreeAtom& a, int kk) { return a.degree < kk; });
    return (it != atoms_.end() && it->degree == k) ? it->prob : 0.0;
}

double DegreeDistribution::mean_degree() const {
    return ksum(atoms_, [](const DegreeAtom& a) { return a.degree * a.prob; });
}

double DegreeDistribution::second_moment() const {
    return ksum(atoms_, [](const DegreeAtom& a) {
        return static_cast<double>(a.degree) * a.degree * a.prob;
    });
}

double DegreeDistribution::xlogx_moment() const {
    return ksum(atoms_, [](const DegreeAtom& a) {
        return a.degree * a.prob * std::log(static_cast<double>(a.degree));
    });
}

double DegreeDistribution::b_alpha(int s, double alpha) const {
    if (s < 1) throw ConfigError("b_alpha requires s >= 1");
    if (!(alpha > 0.0) || !(alpha < 1.0)) throw ConfigError("b_alpha requires alpha in (0,1)");
    double a = mean_degree();
    double sum = 0.0, c = 0.0;
    for (const auto& at : atoms_) {
        if (at.degree < s + 1) continue;
        double term = std::pow(static_cast<double>(at.degree - s), alpha) *
                      (at.degree * at.prob / a);
        double y = term - c;
        double t = sum + y;
        c = (t - sum) - y;
        sum = t;
    }
    return sum;
}

SizeBiasedDistribution DegreeDistribution::size_biased() const {
    double a = mean_degree();
    std::vector<DegreeAtom> atoms;
    atoms.reserve(atoms_.size());
    for (const auto& at : atoms_) atoms.push_back({at.degree, at.degree * at.prob / a});
    return SizeBiasedDistribution(std::move(atoms));
}

int DegreeDistribution::sample(RngStream& rng) const { return sample_table(atoms_, cum_, rng); }

std::uint64_t DegreeDistribution::hash() const {
    std::uint64_t h = 0xCBF29CE484222325ULL;
    int kind = static_cast<int>(kind_);
    fnv_bytes(h, &kind, sizeof kind);
    if (kind_ == DistKind::TruncatedPowerLaw) {
        fnv_bytes(h, &lambda_, sizeof lambda_);
        fnv_bytes(h, &kmax_, sizeof kmax_);
    }
    for (const auto& a : atoms_) {
        fnv_bytes(h, &a.degree, sizeof a.degree);
        fnv_bytes(h, &a.prob, sizeof a.prob);
    }
    return h;
}

std::string DegreeDistribution::spec_string() const {
    std::ostringstream os;
    if (kind_ == DistKind::TruncatedPowerLaw) {
        os << "powerlaw:lambda=" << lambda_ << ",kmax=" << kmax_;
        return os.str();
    }
    os << "table:";
    for (std::size_t i = 0; i < atoms_.size(); ++i) {
        if (i) os << ",";
        os.precision(17);
        os << atoms_[i].degree << ":" << atoms_[i].prob;
    }
    return os.str();
}

SizeBiasedDistribution::SizeBiasedDistribution(std::vector<DegreeAtom> atoms)
    : atoms_(std::move(atoms)), cum_(cumulative(atoms_)) {}

double SizeBiasedDistribution::prob(int k) const {
    auto it = std::lower_bound(atoms_.begin(), atoms_.end(), k,
                               [](const DegreeAtom& a, int kk) { return a.degree < kk; });
    return (it != atoms_.end() && it->degree == k) ? it->prob : 0.0;
}

int SizeBiasedDistribution::sample(RngStream& rng) const {
    return sample_table(atoms_, cum_, rng);
}

double SizeBiasedDistribution::mean() const {
    return ksum(atoms_, [](const DegreeAtom& a) { return a.degree * a.prob; });
}

BAlphaProbe probe_b_alpha(double lambda, int k_max, int s, double alpha, double rel_threshold) {
    double v1 = DegreeDistribution::power_law(lambda, k_max).b_alpha(s, alpha);
    double v2 = DegreeDistribution::power_law(lambda, 2 * k_max).b_alpha(s, alpha);
    double rel = std::abs(v2 - v1) / v1;
    return {v1, v2, rel, rel < rel_threshold ? TailDiagnostic::Stable : TailDiagnostic::Growing};
}

namespace {

DegreeDistribution parse_powerlaw_spec(const std::string& body) {
    double lambda = 0.0;
    int kmax = 0;
    bool have_lambda = false, have_kmax = false;
    std::stringstream ss(body);
    std::string item;
    while (std::getline(ss, item, ',')) {
        auto eq = item.find('=');
        if (eq == std::string::npos) throw ConfigError("bad powerlaw spec item: " + item);
        std::string key = item.substr(0, eq), val = item.substr(eq + 1);
        try {
            if (key == "lambda") {
                lambda = std::stod(val);
                have_lambda = true;
            } else if (key == "kmax") {
                kmax = std::stoi(val);
                have_kmax = true;
            } else {
                throw ConfigError("unknown powerlaw key: " + key);
            }
        } catch (const std::invalid_argument&) {
            throw ConfigError("bad powerlaw value: " + item);
        }
    }
    if (!have_lambda || !have_kmax) throw ConfigError("powerlaw spec needs lambda= and kmax=");
    return DegreeDistribution::power_law(lambda, kmax);
}

DegreeDistribution parse_table_spec(const std::string& body) {
    std::vector<DegreeAtom> atoms;
    std::stringstream ss(body);
    std::string item;
    while (std::getline(ss, item, ',')) {
        auto colon = item.find(':');
        if (colon == std::string::npos) throw ConfigError("bad table spec item: " + item);
        try {
            atoms.push_back({std::stoi(item.substr(0, colon)),
                             std::stod(item.substr(colon + 1))});
        } catch (const std::invalid_argument&) {
            throw ConfigError("bad table entry: " + item);
        }
    }
    return DegreeDistribution::from_table(std::move(atoms));
}

}  // namespace

DegreeDistribution read_dist(std::istream& in) {
    std::vector<DegreeAtom> atoms;
    std::string line;
    while (std::getline(in, line)) {
        auto hash = line.find('#');
        if (hash != std::string::npos) line.erase(hash);
        std::istringstream ls(line);
        int k;
        double p;
        if (ls >> k >> p) atoms.push_back({k, p});
    }
    return DegreeDistribution::from_table(std::move(atoms));
}

DegreeDistribution load_dist_file(const std::string& path) {
    std::ifstream f(path);
    if (!f) throw ConfigError("cannot open distribution file: " + path);
    return read_dist(f);
}

DegreeDistribution parse_dist_spec(const std::string& spec) {
    if (spec.rfind("powerlaw:", 0) == 0) return parse_powerlaw_spec(spec.substr(9));
    if (spec.rfind("table:", 0) == 0) return parse_table_spec(spec.substr(6));
    return load_dist_file(spec);
}

}  // namespace gwising
