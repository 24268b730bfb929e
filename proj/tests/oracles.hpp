// Test-only oracles, independent of the implementation paths they check.
#ifndef SHARPNULL_TEST_ORACLES_HPP
#define SHARPNULL_TEST_ORACLES_HPP

#include <cmath>

namespace oracles {

// Long-double standard normal CDF; erfcl keeps relative accuracy far
// into the tails (underflow only near z ~ 150).
inline long double phi(long double x) { return 0.5L * erfcl(-x / sqrtl(2.0L)); }
inline long double phi_sf(long double x) { return 0.5L * erfcl(x / sqrtl(2.0L)); }

// High-precision normal quantile by bisection on the long-double CDF.
inline long double phi_inv(long double p) {
    long double lo = -50.0L, hi = 50.0L;
    for (int i = 0; i < 400; ++i) {
        const long double mid = 0.5L * (lo + hi);
        (phi(mid) < p ? lo : hi) = mid;
    }
    return 0.5L * (lo + hi);
}

// Closed-form convolution of two normals: marginal density of theta_hat
// when theta ~ N(center, tau^2) and theta_hat | theta ~ N(theta, s^2).
inline double normal_marginal(double theta_hat, double center, double s, double tau) {
    const double var = s * s + tau * tau;
    const double w = theta_hat - center;
    return std::exp(-0.5 * w * w / var) / std::sqrt(2.0 * M_PI * var);
}

// Poisson upper tail P(N >= n | mean) by direct pmf summation of the
// complement.
inline double poisson_tail_pmf_sum(long n, double mean) {
    if (n <= 0) return 1.0;
    long double term = expl(-(long double)mean);
    long double below = 0.0L;
    for (long k = 0; k < n; ++k) {
        below += term;
        term *= mean / (long double)(k + 1);
    }
    return static_cast<double>(1.0L - below);
}

}  // namespace oracles

#endif
