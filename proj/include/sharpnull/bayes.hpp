#ifndef SHARPNULL_BAYES_HPP
#define SHARPNULL_BAYES_HPP

#include <algorithm>
#include <cmath>
#include <optional>
#include <sstream>
#include <vector>

#include <boost/math/quadrature/gauss_kronrod.hpp>

#include "sharpnull/errors.hpp"
#include "sharpnull/likelihood.hpp"
#include "sharpnull/normal.hpp"

namespace sharpnull {

enum class PriorFamily { normal, uniform, cauchy };

// Proper (normalized) prior for theta under H1.  tau conventions:
//   normal  - standard deviation of N(center, tau^2)
//   uniform - full width, density 1/tau on [center - tau/2, center + tau/2]
//   cauchy  - half-width at half-maximum (the usual Cauchy scale)
struct AlternativePrior {
    PriorFamily family = PriorFamily::normal;
    double center = 0.0;
    double tau = 1.0;

    void validate() const {
        if (!(tau > 0.0)) throw std::invalid_argument("AlternativePrior: tau must be > 0");
        if (!std::isfinite(center)) throw std::invalid_argument("AlternativePrior: center must be finite");
    }

    double pdf(double theta) const {
        const double u = (theta - center) / tau;
        switch (family) {
            case PriorFamily::normal:
                return norm_pdf(u) / tau;
            case PriorFamily::uniform:
                return (std::abs(u) <= 0.5) ? 1.0 / tau : 0.0;
            case PriorFamily::cauchy:
                return 1.0 / (M_PI * tau * (1.0 + u * u));
        }
        return 0.0;
    }

    double support_lo() const {
        return family == PriorFamily::uniform ? center - 0.5 * tau
                                              : -std::numeric_limits<double>::infinity();
    }
    double support_hi() const {
        return family == PriorFamily::uniform ? center + 0.5 * tau
                                              : std::numeric_limits<double>::infinity();
    }
};

// pi0 mass at theta0 (smeared uniformly over +-epsilon0 when epsilon0 > 0)
// against a continuous alternative with scale tau.
struct MixturePrior {
    double pi0 = 0.5;
    double theta0 = 0.0;
    double epsilon0 = 0.0;
    AlternativePrior alt;

    void validate() const {
        if (!(pi0 > 0.0 && pi0 < 1.0)) throw std::invalid_argument("MixturePrior: pi0 must be in (0,1)");
        if (!(epsilon0 >= 0.0)) throw std::invalid_argument("MixturePrior: epsilon0 must be >= 0");
        alt.validate();
    }
};

// epsilon0 << sigma_tot << tau with "<<" meaning a configurable factor.
inline bool hierarchy_ok(const MixturePrior& prior, double sigma_tot, double ratio = 100.0) {
    const bool lower = prior.epsilon0 == 0.0 || sigma_tot >= ratio * prior.epsilon0;
    const bool upper = prior.alt.tau >= ratio * sigma_tot;
    return lower && upper;
}

enum class BfMethod { exact_quadrature, asymptotic };

struct BayesResult {
    double bf;
    double log10_bf;
    double ockham;       // sigma_tot / tau
    double posterior_h0;
    BfMethod method;
    bool regime_warning = false;  // asymptotic form used with tau/sigma_tot < 10
};

inline double posterior_h0(double bf, double pi0) {
    if (!(bf >= 0.0)) throw std::domain_error("posterior_h0: bf must be >= 0");
    if (!(pi0 > 0.0 && pi0 < 1.0)) throw std::domain_error("posterior_h0: pi0 must be in (0,1)");
    const double odds = bf * pi0 / (1.0 - pi0);
    return odds / (1.0 + odds);
}

namespace detail {

// Integrates f over [a,b] split at the given interior knots, adaptive
// Gauss-Kronrod per segment.  Throws if the accumulated error estimate
// is not well below the requested relative tolerance.
template <class F>
double integrate_segments(F&& f, double a, double b, std::vector<double> knots,
                          double rel_tol = 1e-11) {
    knots.push_back(a);
    knots.push_back(b);
    std::sort(knots.begin(), knots.end());
    knots.erase(std::remove_if(knots.begin(), knots.end(),
                               [&](double x) { return x < a || x > b; }),
                knots.end());
    knots.erase(std::unique(knots.begin(), knots.end()), knots.end());

    using GK = boost::math::quadrature::gauss_kronrod<double, 31>;
    double total = 0.0, err_total = 0.0;
    for (std::size_t i = 0; i + 1 < knots.size(); ++i) {
        // map every segment to [0,1]: the library's error estimate
        // degrades by a factor ~1/width on very narrow intervals even
        // when the computed value is exact
        const double a0 = knots[i], w = knots[i + 1] - knots[i];
        auto mapped = [&](double u) { return f(a0 + w * u) * w; };
        double err = 0.0;
        total += GK::integrate(mapped, 0.0, 1.0, 18, rel_tol, &err);
        err_total += err;
    }
    if (!(std::isfinite(total)) || (total != 0.0 && err_total > 1e-8 * std::abs(total))) {
        std::ostringstream msg;
        msg << "quadrature failed to converge: integral=" << total
            << " error_estimate=" << err_total << " over [" << a << "," << b << "]";
        throw numerical_error(msg.str());
    }
    return total;
}

}  // namespace detail

// ln of the marginal likelihood under H1 by adaptive quadrature of
// g(theta) L(theta).  The likelihood peak is factored out so large z
// cannot underflow; segment knots pin both the likelihood bulk and the
// prior bulk so narrow spikes are never stepped over.  For the Cauchy
// prior the integral runs in the arctangent variable, which flattens
// the heavy tails.
inline double log_marginal_likelihood_quadrature(const Measurement& m,
                                                 const AlternativePrior& prior) {
    prior.validate();
    const LikelihoodCurve curve{m.theta_hat, m.sigma_tot};
    const double ll_max = log_likelihood(curve, m.theta_hat);
    const double s = m.sigma_tot;

    // window: likelihood bulk extended to cover the prior bulk, then
    // clipped to the prior support
    double bulk = prior.tau;
    if (prior.family == PriorFamily::normal) bulk = 12.0 * prior.tau;
    if (prior.family == PriorFamily::uniform) bulk = 0.5 * prior.tau;
    if (prior.family == PriorFamily::cauchy) bulk = 12.0 * prior.tau;
    double lo = std::min(m.theta_hat - 12.0 * s, prior.center - bulk);
    double hi = std::max(m.theta_hat + 12.0 * s, prior.center + bulk);
    lo = std::max(lo, prior.support_lo());
    hi = std::min(hi, prior.support_hi());
    if (!(hi > lo)) throw numerical_error("marginal_likelihood: empty integration window");

    double integral;
    if (prior.family == PriorFamily::cauchy) {
        const double c = prior.center, t = prior.tau;
        auto f = [&](double u) {
            const double theta = c + t * std::tan(u);
            return std::exp(log_likelihood(curve, theta) - ll_max) / M_PI;
        };
        const double ua = std::atan((lo - c) / t);
        const double ub = std::atan((hi - c) / t);
        std::vector<double> knots;
        for (double th : {m.theta_hat - 6.0 * s, m.theta_hat + 6.0 * s})
            knots.push_back(std::atan((th - c) / t));
        integral = detail::integrate_segments(f, ua, ub, std::move(knots));
    } else {
        auto f = [&](double theta) {
            return prior.pdf(theta) * std::exp(log_likelihood(curve, theta) - ll_max);
        };
        // knots at 6 and 12 widths of each feature: a spike much narrower
        // than its neighboring segment would otherwise exhaust the
        // adaptive bisection depth before resolving its tail
        std::vector<double> knots = {m.theta_hat - 6.0 * s,          m.theta_hat + 6.0 * s,
                                     m.theta_hat - 12.0 * s,         m.theta_hat + 12.0 * s,
                                     prior.center - 6.0 * prior.tau, prior.center + 6.0 * prior.tau,
                                     prior.center - 12.0 * prior.tau,
                                     prior.center + 12.0 * prior.tau};
        integral = detail::integrate_segments(f, lo, hi, std::move(knots));
    }
    if (!(integral > 0.0)) throw numerical_error("marginal_likelihood: nonpositive integral");
    return std::log(integral) + ll_max;
}

// Closed-form marginal for the normal prior: convolution of two normals,
// N(theta_hat; center, sigma_tot^2 + tau^2).
inline double log_marginal_likelihood_normal_closed(const Measurement& m,
                                                    const AlternativePrior& prior) {
    const double var = m.sigma_tot * m.sigma_tot + prior.tau * prior.tau;
    const double w = m.theta_hat - prior.center;
    return -0.5 * w * w / var - ln_sqrt_2pi - 0.5 * std::log(var);
}

// Marginal likelihood of H1: closed form fast path for the normal
// prior, quadrature (authoritative) for uniform and Cauchy.
inline double log_marginal_likelihood_h1(const Measurement& m, const AlternativePrior& prior) {
    prior.validate();
    if (prior.family == PriorFamily::normal)
        return log_marginal_likelihood_normal_closed(m, prior);
    return log_marginal_likelihood_quadrature(m, prior);
}

inline double marginal_likelihood_h1(const Measurement& m, const AlternativePrior& prior) {
    return std::exp(log_marginal_likelihood_h1(m, prior));
}

// ln of the null-side likelihood: L(theta0) for a point null, or the
// average of L over the smeared window [theta0 +- epsilon0].  The
// average is done on exp(lnL - lnL(theta0)) so nearby tail values never
// cancel catastrophically.
inline double log_null_likelihood(const Measurement& m, double theta0, double epsilon0) {
    const LikelihoodCurve curve{m.theta_hat, m.sigma_tot};
    const double ll0 = log_likelihood(curve, theta0);
    if (epsilon0 == 0.0) return ll0;
    auto f = [&](double theta) { return std::exp(log_likelihood(curve, theta) - ll0); };
    const double integral = detail::integrate_segments(f, theta0 - epsilon0, theta0 + epsilon0, {});
    return ll0 + std::log(integral / (2.0 * epsilon0));
}

inline BayesResult bayes_factor_exact(const Measurement& m, const MixturePrior& prior) {
    prior.validate();
    const double log_bf = log_null_likelihood(m, prior.theta0, prior.epsilon0) -
                          log_marginal_likelihood_h1(m, prior.alt);
    const double bf = std::exp(log_bf);
    return BayesResult{bf, log_bf / ln10, m.sigma_tot / prior.alt.tau,
                       posterior_h0(bf, prior.pi0), BfMethod::exact_quadrature};
}

// Large-tau limit for the normal prior: BF = (tau/sigma_tot) exp(-z^2/2).
inline BayesResult bayes_factor_asymptotic(double z, double tau_over_sigma, double pi0 = 0.5) {
    if (!(tau_over_sigma > 0.0)) throw std::domain_error("bayes_factor_asymptotic: tau/sigma_tot must be > 0");
    if (!std::isfinite(z)) throw std::invalid_argument("bayes_factor_asymptotic: z must be finite");
    const double log_bf = std::log(tau_over_sigma) - 0.5 * z * z;
    // computed as r * exp(-z^2/2) so the proportionality to the maximum
    // likelihood ratio holds exactly, not just to rounding
    const double bf = tau_over_sigma * std::exp(-0.5 * z * z);
    BayesResult r{bf, log_bf / ln10, 1.0 / tau_over_sigma, posterior_h0(bf, pi0),
                  BfMethod::asymptotic};
    r.regime_warning = tau_over_sigma < 10.0;
    return r;
}

namespace detail {

// log BF as a function of r = tau/sigma_tot at fixed z, point null.
inline double log_bf_of_r(double z, PriorFamily family, double r) {
    if (family == PriorFamily::normal) {
        const double r2 = r * r;
        return 0.5 * std::log1p(r2) - 0.5 * z * z * r2 / (1.0 + r2);
    }
    const Measurement m = Measurement::from_total(z, 1.0);
    const MixturePrior prior{0.5, 0.0, 0.0, AlternativePrior{family, 0.0, r}};
    return bayes_factor_exact(m, prior).log10_bf * ln10;
}

}  // namespace detail

// Smallest r = tau/sigma_tot > 0 at which the exact BF returns to 1.
// BF(r) starts at 1, dips below for z large enough, and grows like r
// afterwards; the returned value is the upward crossing.  nullopt when
// BF >= 1 for every r.
inline std::optional<double> jl_crossover(double z, PriorFamily family = PriorFamily::normal) {
    if (!std::isfinite(z)) throw std::invalid_argument("jl_crossover: z must be finite");
    z = std::abs(z);
    const double log_r_hi = std::min(0.5 * z * z + 10.0, 690.0);
    // scan in ln r for the dip and the upward bracket
    const int n_scan = 400;
    double best_lr = 0.0, best_v = 0.0;
    double lr_lo = std::log(1e-4);
    double prev_lr = lr_lo, prev_v = detail::log_bf_of_r(z, family, std::exp(lr_lo));
    double bracket_lo = 0.0, bracket_hi = 0.0;
    bool found_neg = false, bracketed = false;
    for (int i = 1; i <= n_scan; ++i) {
        const double lr = lr_lo + (log_r_hi - lr_lo) * i / n_scan;
        const double v = detail::log_bf_of_r(z, family, std::exp(lr));
        if (v < best_v) { best_v = v; best_lr = lr; }
        if (found_neg && prev_v < 0.0 && v >= 0.0) {
            bracket_lo = prev_lr;
            bracket_hi = lr;
            bracketed = true;
            break;
        }
        if (v < -1e-12) found_neg = true;
        prev_lr = lr;
        prev_v = v;
    }
    if (!found_neg || !bracketed) return std::nullopt;
    // bisection in ln r to 1e-8 relative on r
    for (int i = 0; i < 200 && bracket_hi - bracket_lo > 1e-9; ++i) {
        const double mid = 0.5 * (bracket_lo + bracket_hi);
        if (detail::log_bf_of_r(z, family, std::exp(mid)) < 0.0)
            bracket_lo = mid;
        else
            bracket_hi = mid;
    }
    return std::exp(0.5 * (bracket_lo + bracket_hi));
}

// One-stop bundle for the paradox regime: frequentist significance,
// maximum likelihood ratio, exact and asymptotic Bayes factors, the
// scale-hierarchy check, and a flag raised when the two schools reach
// opposite verdicts (p below alpha yet H0 favored a posteriori).
struct ParadoxReport {
    FrequentistResult freq;
    double lambda;
    BayesResult exact;
    BayesResult asymptotic;
    double ockham;
    bool hierarchy_satisfied;
    bool disagreement;
    double alpha;
};

inline ParadoxReport paradox_report(const Measurement& m, const MixturePrior& prior,
                                    double alpha = norm_sf(5.0), double hierarchy_ratio = 100.0,
                                    Tails tails = Tails::one) {
    prior.validate();
    const double z = (m.theta_hat - prior.theta0) / m.sigma_tot;
    const double r = prior.alt.tau / m.sigma_tot;
    ParadoxReport rep{p_from_z(z, tails),
                      max_lik_ratio(z),
                      bayes_factor_exact(m, prior),
                      bayes_factor_asymptotic(z, r, prior.pi0),
                      m.sigma_tot / prior.alt.tau,
                      hierarchy_ok(prior, m.sigma_tot, hierarchy_ratio),
                      false,
                      alpha};
    rep.disagreement = rep.freq.p <= alpha && rep.exact.posterior_h0 > 0.5;
    return rep;
}

}  // namespace sharpnull

#endif
