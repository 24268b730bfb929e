#ifndef SHARPNULL_RNG_HPP
#define SHARPNULL_RNG_HPP

#include <cmath>
#include <cstdint>
#include <stdexcept>

namespace sharpnull {

// Counter-based generator: output i of stream (seed, stream) is a pure
// function of (seed, stream, i), so toys can be generated in any order
// on any number of workers and still be bit-identical.
class CounterRng {
  public:
    CounterRng(std::uint64_t seed, std::uint64_t stream)
        : key_(mix(seed + golden * mix(stream + golden))) {}

    std::uint64_t next_u64() { return mix(key_ + (++counter_) * golden); }

    // uniform in [0, 1) with 53 random bits
    double next_unit() { return static_cast<double>(next_u64() >> 11) * 0x1.0p-53; }

    // Deterministic Poisson sampler: inversion by uniform products for
    // small means, Hormann's PTRD transformed rejection for large ones.
    long poisson(double mean) {
        if (!(mean >= 0.0)) throw std::invalid_argument("poisson: mean must be >= 0");
        if (mean == 0.0) return 0;
        if (mean < 10.0) return poisson_knuth(mean);
        return poisson_ptrd(mean);
    }

  private:
    static constexpr std::uint64_t golden = 0x9E3779B97F4A7C15ull;

    static std::uint64_t mix(std::uint64_t x) {
        x ^= x >> 30;
        x *= 0xBF58476D1CE4E5B9ull;
        x ^= x >> 27;
        x *= 0x94D049BB133111EBull;
        x ^= x >> 31;
        return x;
    }

    long poisson_knuth(double mean) {
        const double limit = std::exp(-mean);
        long k = 0;
        double prod = next_unit();
        while (prod > limit) {
            ++k;
            prod *= next_unit();
        }
        return k;
    }

    // Hormann (1993), "The transformed rejection method for generating
    // Poisson random variables", valid for mean >= 10.
    long poisson_ptrd(double mu) {
        const double smu = std::sqrt(mu);
        const double b = 0.931 + 2.53 * smu;
        const double a = -0.059 + 0.02483 * b;
        const double inv_alpha = 1.1239 + 1.1328 / (b - 3.4);
        const double vr = 0.9277 - 3.6224 / (b - 2.0);
        for (;;) {
            double u = next_unit() - 0.5;
            double v = next_unit();
            double us = 0.5 - std::abs(u);
            double k = std::floor((2.0 * a / us + b) * u + mu + 0.43);
            if (us >= 0.07 && v <= vr) return static_cast<long>(k);
            if (k < 0.0 || (us < 0.013 && v > us)) continue;
            const double lhs = std::log(v * inv_alpha / (a / (us * us) + b));
            const double rhs = k * std::log(mu) - mu - std::lgamma(k + 1.0);
            if (lhs <= rhs) return static_cast<long>(k);
        }
    }

    std::uint64_t key_;
    std::uint64_t counter_ = 0;
};

}  // namespace sharpnull

#endif
