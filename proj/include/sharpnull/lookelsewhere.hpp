#ifndef SHARPNULL_LOOKELSEWHERE_HPP
#define SHARPNULL_LOOKELSEWHERE_HPP

#include <cmath>
#include <cstdint>
#include <functional>
#include <thread>
#include <vector>

#include "sharpnull/bumphunt.hpp"
#include "sharpnull/errors.hpp"
#include "sharpnull/normal.hpp"

namespace sharpnull {

namespace detail {

// Runs fn(i) for i in [0, n) on `workers` threads.  Work item i writes
// only slot i of its output, so results are independent of scheduling
// and worker count.
inline void parallel_for(std::size_t n, unsigned workers, const std::function<void(std::size_t)>& fn) {
    if (workers <= 1 || n < 2) {
        for (std::size_t i = 0; i < n; ++i) fn(i);
        return;
    }
    std::vector<std::thread> pool;
    const std::size_t chunk = (n + workers - 1) / workers;
    for (unsigned w = 0; w < workers; ++w) {
        const std::size_t lo = w * chunk;
        const std::size_t hi = std::min(n, lo + chunk);
        if (lo >= hi) break;
        pool.emplace_back([lo, hi, &fn] {
            for (std::size_t i = lo; i < hi; ++i) fn(i);
        });
    }
    for (auto& t : pool) t.join();
}

}  // namespace detail

enum class GlobalMethod { monte_carlo, upcrossing };

struct GlobalResult {
    double global_p = 1.0;
    double mc_uncertainty = 0.0;
    std::uint64_t n_toys = 0;
    double trials_factor = 1.0;
    GlobalMethod method = GlobalMethod::monte_carlo;
    bool zero_successes = false;      // monte_carlo: reported value is a 68% upper bound
    double mean_upcrossings = 0.0;    // upcrossing: calibration <N(reference)>
    double reference_z = 0.0;
    double target_local_p = 0.0;
};

// Fraction of background-only pseudo-experiments whose scan minimum
// local p-value is at least as small as the observed one.
inline GlobalResult global_p_mc(const BumpHuntModel& m, double p_min_observed,
                                std::uint64_t n_toys, std::uint64_t seed,
                                ScanMethod method = ScanMethod::profile, unsigned workers = 1) {
    if (n_toys < 100) throw std::invalid_argument("global_p_mc: n_toys must be >= 100");
    if (!(p_min_observed > 0.0 && p_min_observed <= 1.0))
        throw std::domain_error("global_p_mc: p_min_observed must be in (0,1]");

    std::vector<std::uint8_t> hit(n_toys, 0);
    detail::parallel_for(n_toys, workers, [&](std::size_t i) {
        const ObservedHistogram toy = generate_toy(m, 0.0, std::nullopt, seed, i);
        const ScanResult s = scan(m, toy, method);
        hit[i] = s.p_min <= p_min_observed ? 1 : 0;
    });
    std::uint64_t k = 0;
    for (auto h : hit) k += h;

    GlobalResult r;
    r.n_toys = n_toys;
    r.method = GlobalMethod::monte_carlo;
    r.target_local_p = p_min_observed;
    if (k == 0) {
        // never report exactly zero: one-sided 68% binomial upper bound
        r.global_p = 1.0 - std::pow(0.32, 1.0 / static_cast<double>(n_toys));
        r.mc_uncertainty = r.global_p;
        r.zero_successes = true;
    } else {
        const double g = static_cast<double>(k) / static_cast<double>(n_toys);
        r.global_p = g;
        r.mc_uncertainty = std::sqrt(g * (1.0 - g) / static_cast<double>(n_toys));
    }
    r.trials_factor = r.global_p / p_min_observed;
    return r;
}

namespace detail {

inline int count_upcrossings(const std::vector<double>& z, double level) {
    int n = 0;
    for (std::size_t j = 1; j < z.size(); ++j)
        if (z[j] >= level && z[j - 1] < level) ++n;
    return n;
}

}  // namespace detail

// Upcrossing extrapolation for the global p-value: the mean count of
// upcrossings of the local significance curve at a low reference level,
// measured on background-only calibration toys, is carried to the
// target level with the one-degree-of-freedom factor
// exp(-(target_z^2 - reference_z^2)/2):
//
//   global_p(target) ~ local_p(target) + <N(ref)> exp(-(t^2 - r^2)/2)
//
// The quoted uncertainty combines the calibration standard error with
// an extrapolation systematic taken from repeating the estimate at a
// second, lower reference level.
inline GlobalResult global_p_upcrossing(const BumpHuntModel& m, double target_z,
                                        double reference_z, std::uint64_t n_calibration_toys,
                                        std::uint64_t seed,
                                        ScanMethod method = ScanMethod::profile,
                                        unsigned workers = 1) {
    if (!(reference_z <= 2.0))
        throw std::invalid_argument("global_p_upcrossing: reference_z must be <= 2 (upcrossings must be plentiful)");
    if (!(reference_z > 0.0)) throw std::domain_error("global_p_upcrossing: reference_z must be > 0");
    if (!(target_z >= reference_z))
        throw std::domain_error("global_p_upcrossing: target_z must be >= reference_z");

    const double local_p = norm_sf(target_z);
    GlobalResult r;
    r.method = GlobalMethod::upcrossing;
    r.reference_z = reference_z;
    r.target_local_p = local_p;

    if (m.mass_grid.size() == 1) {
        // no scan freedom: the global p-value is the local one
        r.global_p = local_p;
        r.trials_factor = 1.0;
        return r;
    }
    if (n_calibration_toys < 10)
        throw std::invalid_argument("global_p_upcrossing: need at least 10 calibration toys");

    const double ref2 = std::max(0.25, reference_z - 0.5);
    std::vector<int> n1(n_calibration_toys), n2(n_calibration_toys);
    detail::parallel_for(n_calibration_toys, workers, [&](std::size_t i) {
        const ObservedHistogram toy = generate_toy(m, 0.0, std::nullopt, seed, i);
        const ScanResult s = scan(m, toy, method);
        n1[i] = detail::count_upcrossings(s.local_z, reference_z);
        n2[i] = detail::count_upcrossings(s.local_z, ref2);
    });
    double sum1 = 0.0, sum_sq1 = 0.0, sum2 = 0.0;
    for (std::size_t i = 0; i < n_calibration_toys; ++i) {
        sum1 += n1[i];
        sum_sq1 += static_cast<double>(n1[i]) * n1[i];
        sum2 += n2[i];
    }
    const double nt = static_cast<double>(n_calibration_toys);
    const double mean1 = sum1 / nt;
    const double mean2 = sum2 / nt;
    if (mean1 == 0.0)
        throw numerical_error("global_p_upcrossing: zero upcrossings at the reference level; lower reference_z");

    const double var1 = std::max(0.0, sum_sq1 / nt - mean1 * mean1);
    const double sem1 = std::sqrt(var1 / nt);
    const double factor1 = std::exp(-0.5 * (target_z * target_z - reference_z * reference_z));
    const double factor2 = std::exp(-0.5 * (target_z * target_z - ref2 * ref2));
    const double est = local_p + mean1 * factor1;
    const double est2 = local_p + mean2 * factor2;

    r.global_p = est;
    r.mc_uncertainty = std::hypot(sem1 * factor1, est - est2);
    r.n_toys = n_calibration_toys;
    r.mean_upcrossings = mean1;
    r.trials_factor = est / local_p;
    return r;
}

// Ratio of global to local p-value.  Tolerates MC noise up to
// 3 * mc_tolerance below 1 before declaring the pair inconsistent.
inline double trials_factor(double global_p, double local_p, double mc_tolerance = 0.0) {
    if (!(local_p > 0.0 && local_p <= 1.0))
        throw std::domain_error("trials_factor: local_p must be in (0,1]");
    if (!(global_p > 0.0 && global_p <= 1.0))
        throw std::domain_error("trials_factor: global_p must be in (0,1]");
    if (global_p < local_p - 3.0 * mc_tolerance)
        throw numerical_error("trials_factor: global p-value below local beyond MC tolerance");
    return global_p / local_p;
}

}  // namespace sharpnull

#endif
