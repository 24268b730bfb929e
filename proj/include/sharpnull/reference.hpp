#ifndef SHARPNULL_REFERENCE_HPP
#define SHARPNULL_REFERENCE_HPP

#include <cmath>
#include <stdexcept>

#include "sharpnull/errors.hpp"

namespace sharpnull {

enum class Verdict { compatible, incompatible };

// Expected intrinsic discrepancy between the point null and the data,
// in natural information units, asymptotic normal-posterior regime.
struct DiscrepancyResult {
    double d;
    double z;
    Verdict verdict;
    double cutoff;
};

// d = (1 + z^2)/2.  Only the asymptotic form is available; callers in
// small-sample conditions must say so and are refused rather than
// silently extrapolated.
inline double ref_discrepancy_asymptotic(double z, bool small_sample = false) {
    if (small_sample)
        throw numerical_error("ref_discrepancy_asymptotic: small-sample regime unsupported, no finite-n form available");
    if (!std::isfinite(z)) throw std::invalid_argument("ref_discrepancy_asymptotic: z must be finite");
    return 0.5 * (1.0 + z * z);
}

inline DiscrepancyResult compatibility_verdict(double d, double cutoff, double z = 0.0) {
    if (!(d >= 0.0)) throw std::domain_error("compatibility_verdict: d must be >= 0");
    if (!(cutoff > 0.0)) throw std::domain_error("compatibility_verdict: cutoff must be > 0");
    return DiscrepancyResult{d, z, d > cutoff ? Verdict::incompatible : Verdict::compatible, cutoff};
}

// A fixed cutoff on d is a fixed cutoff on |z|: d > cutoff iff
// |z| > sqrt(2*cutoff - 1) (when 2*cutoff >= 1).
inline double z_equivalent_cutoff(double cutoff) {
    if (!(cutoff >= 0.5)) throw std::domain_error("z_equivalent_cutoff: cutoff must be >= 1/2 (d is never below 1/2)");
    return std::sqrt(2.0 * cutoff - 1.0);
}

}  // namespace sharpnull

#endif
