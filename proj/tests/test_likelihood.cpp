#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <random>
#include <vector>

#include "sharpnull/bayes.hpp"
#include "sharpnull/likelihood.hpp"

using namespace sharpnull;
using Catch::Approx;

TEST_CASE("log_likelihood values") {
    const LikelihoodCurve c{0.0, 1.0};
    const double peak = -0.9189385332046727;
    CHECK(log_likelihood(c, 0.0) == Approx(peak).margin(1e-6));
    CHECK(log_likelihood(c, 1.0) == Approx(peak - 0.5).margin(1e-12));

    const LikelihoodCurve c2{3.0, 2.0};
    CHECK(log_likelihood(c2, 0.0) ==
          Approx(log_likelihood(c2, 3.0) - 9.0 / 8.0).margin(1e-12));
}

TEST_CASE("log_likelihood maximized at theta_hat") {
    const LikelihoodCurve c{1.7, 0.3};
    const double at_max = log_likelihood(c, c.theta_hat);
    for (double t = -5.0; t <= 5.0; t += 0.01) {
        if (t == c.theta_hat) continue;
        CHECK(log_likelihood(c, t) <= at_max);
    }
}

TEST_CASE("max_lik_ratio table") {
    CHECK(max_lik_ratio(1.0) == Approx(0.61).margin(0.005));
    CHECK(max_lik_ratio(2.0) == Approx(0.14).margin(0.005));
    CHECK(max_lik_ratio(3.0) == Approx(0.011).margin(0.0005));
    CHECK(max_lik_ratio(4.0) == Approx(0.00034).margin(0.000005));
    CHECK(max_lik_ratio(5.0) == Approx(3.7e-6).margin(0.05e-6));
    CHECK(max_lik_ratio(0.0) == 1.0);
    CHECK(neg2_log_max_lik_ratio(3.0) == Approx(9.0).margin(1e-12));
}

TEST_CASE("asymptotic BF is exactly r times the likelihood ratio") {
    std::mt19937 gen(42);
    std::uniform_real_distribution<double> uz(0.0, 8.0);
    std::uniform_real_distribution<double> ulr(-2.0, 6.0);
    for (int i = 0; i < 500; ++i) {
        const double z = uz(gen);
        const double r = std::pow(10.0, ulr(gen));
        CHECK(bayes_factor_asymptotic(z, r).bf == r * max_lik_ratio(z));
    }
}

TEST_CASE("mle_from_samples") {
    {
        const std::vector<double> s{5.0};
        const auto m = mle_from_samples(s, 1.0);
        CHECK(m.theta_hat == 5.0);
        CHECK(m.sigma_tot == 1.0);
    }
    {
        const std::vector<double> s{1.0, 2.0, 3.0, 4.0};
        const auto m = mle_from_samples(s, 2.0);
        CHECK(m.theta_hat == Approx(2.5));
        CHECK(m.sigma_tot == Approx(1.0));
        CHECK(m.n.value() == 4);
    }
    CHECK_THROWS_AS(mle_from_samples(std::vector<double>{}, 1.0), std::invalid_argument);
}

TEST_CASE("mle_from_samples Monte Carlo sanity") {
    // 100 draws from N(0,1): theta_hat should sit within 3 standard
    // errors of zero for this fixed seed
    std::mt19937 gen(2024);
    std::normal_distribution<double> nd(0.0, 1.0);
    std::vector<double> s(100);
    for (auto& x : s) x = nd(gen);
    const auto m = mle_from_samples(s, 1.0);
    CHECK(std::abs(m.theta_hat) < 3.0 * 0.1);
    CHECK(m.sigma_tot == Approx(0.1));
}
