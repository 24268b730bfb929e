#ifndef SHARPNULL_LIKELIHOOD_HPP
#define SHARPNULL_LIKELIHOOD_HPP

#include <cmath>
#include <numeric>
#include <span>

#include "sharpnull/errors.hpp"
#include "sharpnull/normal.hpp"

namespace sharpnull {

// Normal likelihood curve for a point estimate with total uncertainty
// sigma_tot; maximized exactly at theta_hat.
struct LikelihoodCurve {
    double theta_hat;
    double sigma_tot;
};

inline LikelihoodCurve likelihood_of(const Measurement& m) {
    return LikelihoodCurve{m.theta_hat, m.sigma_tot};
}

// ln L(theta) including the normalization -ln(sqrt(2 pi) sigma_tot).
inline double log_likelihood(const LikelihoodCurve& c, double theta) {
    const double u = (c.theta_hat - theta) / c.sigma_tot;
    return -0.5 * u * u - ln_sqrt_2pi - std::log(c.sigma_tot);
}

// Ratio of the likelihood at the null to the maximum likelihood under
// the alternative: lambda = exp(-z^2/2).  Independent of sigma_tot and
// sample size at fixed z.
inline double log_max_lik_ratio(double z) {
    if (!std::isfinite(z)) throw std::invalid_argument("max_lik_ratio: z must be finite");
    return -0.5 * z * z;
}

inline double max_lik_ratio(double z) { return std::exp(log_max_lik_ratio(z)); }

// HEP test-statistic convention: -2 ln lambda = z^2.
inline double neg2_log_max_lik_ratio(double z) { return -2.0 * log_max_lik_ratio(z); }

inline Measurement mle_from_samples(std::span<const double> samples, double sigma) {
    if (samples.empty()) throw std::invalid_argument("mle_from_samples: empty sample list");
    if (!(sigma > 0.0)) throw std::invalid_argument("mle_from_samples: sigma must be > 0");
    const double mean = std::accumulate(samples.begin(), samples.end(), 0.0) /
                        static_cast<double>(samples.size());
    return Measurement::from_samples_scale(mean, sigma, static_cast<long>(samples.size()));
}

}  // namespace sharpnull

#endif
