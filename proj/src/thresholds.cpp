#include "gwising/thresholds.hpp"

#include <cmath>
#include <limits>

#include "gwising/errors.hpp"

namespace gwising {

double q_of_K(double K) {
    if (!(K > 0.0)) throw ConfigError("q(K) requires K > 0");
    return std::expm1(4.0 * K);
}

double K_c(double a) {
    if (!(a > 2.0)) throw ConfigError("K_c requires a > 2");
    return 0.25 * std::log(a / (a - 1.0));
}

double K_hat_c(int s, double alpha) {
    if (s < 2) throw ConfigError("K_hat_c requires s >= 2");
    if (!(alpha > 0.0) || !(alpha < 1.0)) throw ConfigError("K_hat_c requires alpha in (0,1)");
    const double sg = std::pow(static_cast<double>(s), 1.0 / alpha);
    return 0.25 * std::log((sg + 1.0) / sg);
}

double K_of_c(double c) {
    if (!(c > 1.0)) throw ConfigError("K(c) requires c > 1");
    return 0.25 * std::log((c + 1.0) / c);
}

double lyons_Kcrit(double rho) {
    if (!(rho > 1.0)) throw ConfigError("branching number must exceed 1");
    return std::atanh(1.0 / rho);
}

double lyons_Tc(double J, double rho) {
    if (!(J > 0.0)) throw ConfigError("lyons_Tc requires J > 0");
    return J / lyons_Kcrit(rho);
}

double network_Tc(double J, double mean_k, double mean_k2) {
    if (!(J > 0.0)) throw ConfigError("network_Tc requires J > 0");
    if (!(mean_k > 0.0)) throw ConfigError("network_Tc requires <k> > 0");
    if (!(mean_k2 > 2.0 * mean_k))
        throw ConfigError("ordered at all temperatures regime: <k^2> <= 2<k>");
    return 2.0 * J / std::log(mean_k2 / (mean_k2 - 2.0 * mean_k));
}

double r2_budget(double K, int n, int n_z, double shell_n) {
    const double q = q_of_K(K);
    if (!(q < 1.0)) throw ConfigError("bound inapplicable: q(K) >= 1");
    if (n <= n_z) throw ConfigError("bound inapplicable: n must exceed n_z");
    return 2.0 * std::pow(q, n - n_z) * shell_n;
}

DecayFit fit_decay(std::span<const double> means, int first_depth) {
    DecayFit fit;
    std::vector<double> xs, ys;
    for (std::size_t i = 0; i < means.size(); ++i) {
        if (means[i] > 1e-12) {
            xs.push_back(static_cast<double>(first_depth) + static_cast<double>(i));
            ys.push_back(std::log(means[i]));
        } else {
            ++fit.dropped;
        }
    }
    if (fit.dropped > 0)
        fit.notice = std::to_string(fit.dropped) + " depth(s) below 1e-12 dropped from the fit";
    fit.used_points = static_cast<int>(xs.size());
    if (fit.used_points < 4) {
        fit.degenerate = true;
        fit.rate = std::numeric_limits<double>::quiet_NaN();
        fit.notice = "fewer than 4 positive depths: rate undefined";
        return fit;
    }
    const double n = static_cast<double>(xs.size());
    double mx = 0.0, my = 0.0;
    for (std::size_t i = 0; i < xs.size(); ++i) {
        mx += xs[i];
        my += ys[i];
    }
    mx /= n;
    my /= n;
    double sxx = 0.0, sxy = 0.0, syy = 0.0;
    for (std::size_t i = 0; i < xs.size(); ++i) {
        sxx += (xs[i] - mx) * (xs[i] - mx);
        sxy += (xs[i] - mx) * (ys[i] - my);
        syy += (ys[i] - my) * (ys[i] - my);
    }
    const double slope = sxy / sxx;
    fit.rate = std::exp(slope);
    const double ss_res = syy - slope * sxy;
    fit.r_squared = syy > 0.0 ? 1.0 - ss_res / syy : 1.0;
    return fit;
}

ThresholdSheet make_threshold_sheet(const DegreeDistribution& dist, int s, double alpha,
                                    double J, double beta) {
    if (!(beta > 0.0)) throw ConfigError("threshold sheet requires beta > 0");
    ThresholdSheet sheet;
    sheet.a = dist.mean_degree();
    sheet.mean_k2 = dist.second_moment();
    sheet.rho = sheet.mean_k2 / sheet.a - 1.0;
    sheet.K = beta * J;
    sheet.q = q_of_K(sheet.K);
    sheet.K_c = K_c(sheet.a);
    if (s >= 2) {
        sheet.K_hat_c = K_hat_c(s, alpha);
        sheet.c_star = std::max(sheet.a - 1.0, std::pow(static_cast<double>(s), 1.0 / alpha));
    } else {
        // For s <= 1 the sheet reports the s = 0 quantities; the s-capped
        // threshold does not apply.
        sheet.K_hat_c = std::numeric_limits<double>::quiet_NaN();
        sheet.c_star = sheet.a - 1.0;
    }
    sheet.K_of_c = K_of_c(sheet.c_star);
    sheet.T_c_lyons = lyons_Tc(J, sheet.rho);
    sheet.T_c_network = network_Tc(J, sheet.a, sheet.mean_k2);
    sheet.decay_budget = sheet.q * sheet.c_star;
    return sheet;
}

}  // namespace gwising
