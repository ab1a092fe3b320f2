#pragma once

#include <span>
#include <string>
#include <vector>

#include "gwising/degree_dist.hpp"

namespace gwising {

// Contraction coefficient q(K) = exp(4K) - 1. Requires K > 0.
double q_of_K(double K);

// K_c = (1/4) ln(a/(a-1)). Requires a > 2.
double K_c(double a);

// K_hat_c = (1/4) ln((s^g + 1)/s^g), g = 1/alpha. Requires s >= 2, alpha in (0,1).
double K_hat_c(int s, double alpha);

// K(c) = (1/4) ln((c+1)/c). Requires c > 1. Satisfies q(K(c)) = 1/c.
double K_of_c(double c);

// Critical coupling of the uniform ferromagnet on a tree of branching
// number rho: atanh(1/rho). Requires rho > 1.
double lyons_Kcrit(double rho);

// T_c = J / atanh(1/rho), k_B = 1.
double lyons_Tc(double J, double rho);

// T_c = 2J / ln(<k^2>/(<k^2> - 2<k>)). Requires <k^2> > 2<k>; otherwise the
// system is in the ordered regime at all temperatures and a ConfigError is
// thrown.
double network_Tc(double J, double mean_k, double mean_k2);

// Boundary-difference budget 2 q(K)^{n - n_z} |S_n|. Requires q(K) < 1 and
// n > n_z; throws ConfigError("bound inapplicable") otherwise.
double r2_budget(double K, int n, int n_z, double shell_n);

struct DecayFit {
    double rate = 0.0;       // exp(slope) of the log-linear fit
    double r_squared = 0.0;  // on the log scale
    int used_points = 0;
    int dropped = 0;         // depths with mean below 1e-12
    bool degenerate = false; // fewer than 4 usable points
    std::string notice;
};

// Unweighted log-linear least squares over consecutive depths
// first_depth, first_depth+1, ... of the ensemble means.
DecayFit fit_decay(std::span<const double> means, int first_depth = 0);

// Every scalar threshold for one parameter set. K_hat_c and the s-dependent
// pieces are NaN when s < 2.
struct ThresholdSheet {
    double a = 0.0;
    double mean_k2 = 0.0;
    double rho = 0.0;     // <k^2>/<k> - 1
    double K = 0.0;       // beta * J
    double q = 0.0;       // q(K)
    double K_c = 0.0;
    double K_hat_c = 0.0;
    double c_star = 0.0;  // max(a-1, s^{1/alpha}) for s >= 2, else a-1
    double K_of_c = 0.0;
    double T_c_lyons = 0.0;
    double T_c_network = 0.0;
    double decay_budget = 0.0;  // q(K) * c_star
};

ThresholdSheet make_threshold_sheet(const DegreeDistribution& dist, int s, double alpha,
                                    double J, double beta);

}  // namespace gwising
