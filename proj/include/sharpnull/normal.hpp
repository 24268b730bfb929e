#ifndef SHARPNULL_NORMAL_HPP
#define SHARPNULL_NORMAL_HPP

#include <cmath>
#include <limits>
#include <optional>
#include <utility>

#include <boost/math/special_functions/erf.hpp>
#include <boost/math/tools/minima.hpp>

#include "sharpnull/errors.hpp"

namespace sharpnull {

inline constexpr double sqrt2 = 1.4142135623730950488;
inline constexpr double ln10 = 2.3025850929940456840;
inline constexpr double ln_sqrt_2pi = 0.91893853320467274178;

// Standard normal density, CDF and survival function.  The CDF/SF go
// through erfc so the far tails keep full relative accuracy.
inline double norm_pdf(double x) { return std::exp(-0.5 * x * x - ln_sqrt_2pi); }
inline double norm_cdf(double x) { return 0.5 * std::erfc(-x / sqrt2); }
inline double norm_sf(double x) { return 0.5 * std::erfc(x / sqrt2); }

// ln of the upper tail 1 - Phi(z).  erfc underflows near z = 37.5; past
// z = 30 the asymptotic expansion of the Mills ratio is already good to
// better than 1e-12 relative, so the two branches agree at the switch.
inline double log_norm_sf(double z) {
    if (z < 30.0) {
        double p = norm_sf(z);
        if (p > 0.0) return std::log(p);
    }
    const double z2 = z * z;
    const double inv = 1.0 / z2;
    const double series = 1.0 + inv * (-1.0 + inv * (3.0 + inv * (-15.0 + inv * 105.0)));
    return -0.5 * z2 - std::log(z) - ln_sqrt_2pi + std::log(series);
}

// Phi^-1(p), full double accuracy via erfc_inv.
inline double norm_quantile(double p) {
    if (!(p > 0.0 && p < 1.0)) throw std::domain_error("norm_quantile: p must be in (0,1)");
    return -sqrt2 * boost::math::erfc_inv(2.0 * p);
}

enum class Tails { one, two };

struct FrequentistResult {
    double z;
    double p;
    double log10_p;
    Tails tails;
};

// An observed effect: point estimate plus its total standard uncertainty.
// When a sample size is known the total uncertainty is sigma/sqrt(n);
// otherwise sigma_tot is supplied directly.
struct Measurement {
    double theta_hat;
    double sigma;
    std::optional<long> n;
    double sigma_tot;

    static Measurement from_samples_scale(double theta_hat, double sigma, long n) {
        if (!(sigma > 0.0)) throw std::invalid_argument("Measurement: sigma must be > 0");
        if (n < 1) throw std::invalid_argument("Measurement: n must be >= 1");
        return Measurement{theta_hat, sigma, n, sigma / std::sqrt(static_cast<double>(n))};
    }
    static Measurement from_total(double theta_hat, double sigma_tot) {
        if (!(sigma_tot > 0.0)) throw std::invalid_argument("Measurement: sigma_tot must be > 0");
        return Measurement{theta_hat, sigma_tot, std::nullopt, sigma_tot};
    }
};

inline FrequentistResult p_from_z(double z, Tails tails) {
    if (!std::isfinite(z)) throw std::invalid_argument("p_from_z: z must be finite");
    double log_p = log_norm_sf(z);
    if (tails == Tails::two) log_p += std::log(2.0);
    double p = std::exp(log_p);
    if (tails == Tails::two && p > 1.0) p = 1.0;  // z < 0, two-tailed folds to 1
    return FrequentistResult{z, p, log_p / ln10, tails};
}

inline double z_from_p(double p, Tails tails) {
    // one-tailed p = 1 maps to z = -infinity, so it is excluded; two-tailed
    // p = 1 maps cleanly to z = 0
    if (tails == Tails::one ? !(p > 0.0 && p < 1.0) : !(p > 0.0 && p <= 1.0))
        throw std::domain_error("z_from_p: p out of range");
    // one-tailed: p = 1 - Phi(z) = erfc(z/sqrt2)/2; two-tailed: p = erfc(z/sqrt2)
    const double arg = (tails == Tails::one) ? 2.0 * p : p;
    return sqrt2 * boost::math::erfc_inv(arg);
}

// Power 1 - beta of the one-sided size-alpha normal test of theta0
// against theta0 + delta, with delta expressed in units of sigma_tot.
inline double power_one_sided(double alpha, double delta_over_sigma) {
    if (!(alpha > 0.0 && alpha < 1.0)) throw std::domain_error("power_one_sided: alpha in (0,1)");
    if (!(delta_over_sigma >= 0.0)) throw std::domain_error("power_one_sided: delta/sigma >= 0");
    const double z_alpha = norm_quantile(1.0 - alpha);
    return norm_cdf(delta_over_sigma - z_alpha);
}

struct ErrorBalance {
    double alpha;
    double beta;
    double cut;
};

// Cut minimizing alpha + beta for two normal means separated by
// delta_over_sigma (equal unit variances).  Brent bracket search plus a
// Newton polish on the stationarity condition; the equal-variance answer
// is the midpoint, which the optimizer recovers rather than assumes.
inline ErrorBalance balance_errors(double delta_over_sigma) {
    const double d = delta_over_sigma;
    if (!(d > 0.0)) throw std::domain_error("balance_errors: delta/sigma must be > 0 (alpha+beta = 1 for every cut otherwise)");
    auto total = [d](double c) { return norm_sf(c) + norm_cdf(c - d); };
    auto r = boost::math::tools::brent_find_minima(total, 0.0, d, 40);
    double c = r.first;
    // stationarity: pdf(c - d) = pdf(c)
    for (int i = 0; i < 50; ++i) {
        const double g = norm_pdf(c - d) - norm_pdf(c);
        const double h = c * norm_pdf(c) - (c - d) * norm_pdf(c - d);
        if (h == 0.0) break;
        const double step = g / h;
        c -= step;
        if (std::abs(step) < 1e-15 * (1.0 + std::abs(c))) break;
    }
    if (!(c >= 0.0 && c <= d)) c = 0.5 * d;
    return ErrorBalance{norm_sf(c), norm_cdf(c - d), c};
}

// Simple-vs-simple: p0 is the tail of theta_hat under H0 toward theta1,
// p1 the tail under H1 toward theta0.  Both are reported; neither
// hypothesis is implicitly accepted.
inline std::pair<double, double> simple_vs_simple_pvalues(double theta0, double theta1,
                                                          double sigma_tot, double theta_hat) {
    if (!(sigma_tot > 0.0)) throw std::domain_error("simple_vs_simple: sigma_tot must be > 0");
    if (theta0 == theta1) throw std::domain_error("simple_vs_simple: hypotheses are degenerate (theta0 == theta1)");
    const double s = (theta1 > theta0) ? 1.0 : -1.0;
    const double p0 = norm_sf(s * (theta_hat - theta0) / sigma_tot);
    const double p1 = norm_sf(s * (theta1 - theta_hat) / sigma_tot);
    return {p0, p1};
}

struct Interval {
    double lo;
    double hi;
};

inline double p_two_tailed(const Measurement& m, double theta0) {
    return std::erfc(std::abs(m.theta_hat - theta0) / (m.sigma_tot * sqrt2));
}

// Central interval theta_hat +- Phi^-1((1+CL)/2) * sigma_tot.
inline Interval ci_normal(const Measurement& m, double cl) {
    if (!(cl > 0.0 && cl < 1.0)) throw std::domain_error("ci_normal: CL must be in (0,1)");
    const double half = norm_quantile(0.5 * (1.0 + cl)) * m.sigma_tot;
    return Interval{m.theta_hat - half, m.theta_hat + half};
}

// Test-inversion membership: theta0 is inside the CL interval iff its
// two-tailed p-value is >= 1 - CL.  This is the same tail code used to
// build the interval, so the duality holds exactly including ties.
inline bool ci_contains(const Measurement& m, double cl, double theta0) {
    return p_two_tailed(m, theta0) >= 1.0 - cl;
}

}  // namespace sharpnull

#endif
