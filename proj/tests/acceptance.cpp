// Acceptance suite: one PASS/FAIL line per criterion, exit status is the
// number of failures.

#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <iostream>
#include <random>
#include <sstream>
#include <string>
#include <thread>
#include <vector>

#include <json.hpp>

#include "sharpnull/bayes.hpp"
#include "sharpnull/bumphunt.hpp"
#include "sharpnull/likelihood.hpp"
#include "sharpnull/lookelsewhere.hpp"
#include "sharpnull/normal.hpp"

using namespace sharpnull;
using nlohmann::json;

namespace {

int failures = 0;

void report(int criterion, bool ok, const std::string& detail) {
    std::printf("%s  criterion %d: %s\n", ok ? "PASS" : "FAIL", criterion, detail.c_str());
    if (!ok) ++failures;
}

unsigned pick_workers() {
    const unsigned hc = std::thread::hardware_concurrency();
    return hc == 0 ? 1u : std::min(hc, 8u);
}

std::string fmt(double v) {
    std::ostringstream os;
    os.precision(6);
    os << v;
    return os.str();
}

// 1. maximum-likelihood-ratio table at z = 1..5
void criterion_1() {
    const double want[] = {0.6065, 0.1353, 0.0111, 3.3546e-4, 3.7267e-6};
    bool ok = true;
    std::string detail = "lambda(1..5) =";
    for (int z = 1; z <= 5; ++z) {
        const double got = max_lik_ratio(z);
        detail += " " + fmt(got);
        if (std::abs(got / want[z - 1] - 1.0) > 1e-3) ok = false;
    }
    report(1, ok, detail);
}

// 2. z <-> p anchors and round-trip accuracy
void criterion_2() {
    const double p3 = p_from_z(3.0, Tails::one).p;
    const double p5 = p_from_z(5.0, Tails::one).p;
    bool ok = std::abs(p3 / 1.35e-3 - 1.0) < 5e-3 && std::abs(p5 / 2.8665e-7 - 1.0) < 5e-3;
    double worst = 0.0;
    for (double z = 0.0; z <= 8.0; z += 1e-3)
        worst = std::max(worst, std::abs(z_from_p(p_from_z(z, Tails::one).p, Tails::one) - z));
    ok = ok && worst < 1e-9;
    report(2, ok,
           "p(z=3) = " + fmt(p3) + ", p(z=5) = " + fmt(p5) +
               ", worst round-trip error = " + fmt(worst));
}

// 3. Ockham scaling: exact/asymptotic agreement and linearity in r
void criterion_3() {
    bool ok = true;
    double worst_ratio = 1.0, worst_scale = 10.0;
    for (int z = 1; z <= 5; ++z) {
        const Measurement m = Measurement::from_total(z, 1.0);
        for (double r : {1e2, 1e3, 1e4}) {
            const MixturePrior prior{0.5, 0.0, 0.0, AlternativePrior{PriorFamily::normal, 0.0, r}};
            const MixturePrior prior10{0.5, 0.0, 0.0,
                                       AlternativePrior{PriorFamily::normal, 0.0, 10.0 * r}};
            const double exact = bayes_factor_exact(m, prior).bf;
            const double asym = bayes_factor_asymptotic(z, r).bf;
            const double ratio = exact / asym;
            const double scale = bayes_factor_exact(m, prior10).bf / exact;
            if (std::abs(ratio - 1.0) > std::abs(worst_ratio - 1.0)) worst_ratio = ratio;
            if (std::abs(scale - 10.0) > std::abs(worst_scale - 10.0)) worst_scale = scale;
            if (ratio < 0.99 || ratio > 1.01) ok = false;
            if (std::abs(scale / 10.0 - 1.0) > 0.01) ok = false;
        }
    }
    report(3, ok,
           "worst exact/asym = " + fmt(worst_ratio) + ", worst BF(10r)/BF(r) = " + fmt(worst_scale));
}

// 4. the headline reversal at z = 5
void criterion_4() {
    const auto rstar = jl_crossover(5.0, PriorFamily::normal);
    bool ok = rstar.has_value();
    double rv = 0.0, post = 0.0;
    if (ok) {
        rv = *rstar;
        ok = std::abs(rv / 2.6834e5 - 1.0) < 1e-3;
        const Measurement m = Measurement::from_total(5.0, 1.0);
        const MixturePrior prior{0.5, 0.0, 0.0,
                                 AlternativePrior{PriorFamily::normal, 0.0, 10.0 * rv}};
        post = bayes_factor_exact(m, prior).posterior_h0;
        ok = ok && post > 0.9;
        ok = ok && std::abs(p_from_z(5.0, Tails::one).p / 2.8665e-7 - 1.0) < 5e-3;
    }
    report(4, ok, "r* = " + fmt(rv) + " (target 2.6834e5), posterior_h0 at 10 r* = " + fmt(post));
}

// 5. point-alternative Bayes factor equals the likelihood ratio
void criterion_5() {
    std::mt19937 gen(99);
    std::uniform_real_distribution<double> uth(-4.0, 4.0);
    std::uniform_real_distribution<double> usig(0.2, 3.0);
    bool ok = true;
    double worst = 0.0;
    for (int i = 0; i < 100; ++i) {
        const double sigma = usig(gen);
        const Measurement m = Measurement::from_total(uth(gen), sigma);
        const double theta0 = uth(gen), theta1 = uth(gen);
        const MixturePrior prior{0.5, theta0, 0.0,
                                 AlternativePrior{PriorFamily::normal, theta1, 1e-8 * sigma}};
        const double bf = bayes_factor_exact(m, prior).bf;
        const LikelihoodCurve c{m.theta_hat, m.sigma_tot};
        const double lr = std::exp(log_likelihood(c, theta0) - log_likelihood(c, theta1));
        const double rel = std::abs(bf / lr - 1.0);
        worst = std::max(worst, rel);
        if (rel > 1e-6) ok = false;
    }
    report(5, ok, "worst |BF/LR - 1| over 100 random instances = " + fmt(worst));
}

// 6. half-chi-square law for the boundary-clamped profile statistic
void criterion_6() {
    BumpHuntConfig cfg;
    cfg.n_bins = 50;
    cfg.lo = 0.0;
    cfg.hi = 50.0;
    cfg.shape = BackgroundShape::flat;
    cfg.level = 10.0;
    cfg.resolution = 1.0;
    cfg.mass_grid = {25.0};
    const auto m = build_model(cfg);
    const int n_toys = 10000;
    std::vector<std::uint8_t> hit(n_toys, 0);
    detail::parallel_for(n_toys, pick_workers(), [&](std::size_t i) {
        const auto toy = generate_toy(m, 0.0, std::nullopt, 20240611, i);
        hit[i] = local_p_profile(m, toy, 25.0).q0 > 2.706 ? 1 : 0;
    });
    int k = 0;
    for (auto h : hit) k += h;
    const double frac = static_cast<double>(k) / n_toys;
    const bool ok = std::abs(frac - 0.05) <= 0.007;
    report(6, ok, "P(q0 > 2.706) = " + fmt(frac) + " (target 0.050 +- 0.007, 1e4 toys)");
}

// 7. look-elsewhere cross-validation on a 20-point coarse grid
void criterion_7() {
    BumpHuntConfig cfg;
    cfg.n_bins = 200;
    cfg.lo = 0.0;
    cfg.hi = 200.0;
    cfg.shape = BackgroundShape::flat;
    cfg.level = 50.0;
    cfg.resolution = 1.0;
    for (int i = 0; i < 20; ++i) cfg.mass_grid.push_back(10.0 + 180.0 * i / 19.0);
    const auto m = build_model(cfg);
    const unsigned workers = pick_workers();

    const double p_min = 0.002;
    const double oracle = 1.0 - std::pow(1.0 - p_min, 20.0);
    const auto mc = global_p_mc(m, p_min, 10000, 555111, ScanMethod::profile, workers);
    const double binom_err = std::sqrt(oracle * (1.0 - oracle) / 10000.0);
    const bool ok_a = std::abs(mc.global_p - oracle) <= 3.0 * binom_err;

    const double target_z = z_from_p(p_min, Tails::one);
    const auto up =
        global_p_upcrossing(m, target_z, 2.0, 400, 555222, ScanMethod::profile, workers);
    const double combined = std::hypot(mc.mc_uncertainty, up.mc_uncertainty);
    // the upcrossing estimate extrapolates from local p at the target
    // level; compare on the same footing as the MC threshold experiment
    const bool ok_b = std::abs(up.global_p - mc.global_p) <= 2.0 * combined;
    const bool ok_c = mc.trials_factor >= 1.0 && up.trials_factor >= 1.0;

    report(7, ok_a && ok_b && ok_c,
           "MC = " + fmt(mc.global_p) + " vs oracle " + fmt(oracle) + " (3 sigma = " +
               fmt(3.0 * binom_err) + "); upcrossing = " + fmt(up.global_p) +
               " +- " + fmt(up.mc_uncertainty) + "; trials factors " + fmt(mc.trials_factor) +
               ", " + fmt(up.trials_factor));
}

// 8. smeared-null stability
void criterion_8() {
    bool ok = true;
    double worst = 0.0;
    for (double z = 0.0; z <= 5.0; z += 0.5) {
        const Measurement m = Measurement::from_total(z, 1.0);
        for (double r : {10.0, 100.0}) {
            const AlternativePrior alt{PriorFamily::normal, 0.0, r};
            const double point = bayes_factor_exact(m, MixturePrior{0.5, 0.0, 0.0, alt}).bf;
            const double smear = bayes_factor_exact(m, MixturePrior{0.5, 0.0, 0.01, alt}).bf;
            const double rel = std::abs(smear / point - 1.0);
            worst = std::max(worst, rel);
            if (rel >= 1e-3) ok = false;
        }
    }
    report(8, ok, "worst |BF_smeared/BF_point - 1| = " + fmt(worst) + " (limit 1e-3)");
}

// 9. bump campaign determinism across worker counts
void criterion_9() {
    const std::string cfg_path = "acceptance_bump.json";
    {
        std::ofstream f(cfg_path);
        f << R"({
  "bins": {"n": 100, "lo": 0.0, "hi": 100.0},
  "background": {"shape": "flat", "level": 10.0},
  "resolution": 1.0,
  "mass_grid": {"n": 10, "lo": 10.0, "hi": 90.0},
  "scan_method": "profile",
  "toys": 2000
})";
    }
    auto run = [&](int workers, const std::string& out) {
        const std::string cmd = std::string("\"") + SHARPNULL_CLI_PATH + "\" bump --config " +
                                cfg_path + " --seed 2024 --workers " + std::to_string(workers) +
                                " --out " + out + " > /dev/null 2>&1";
        return std::system(cmd.c_str());
    };
    bool ok = run(1, "acceptance_w1") == 0 && run(8, "acceptance_w8") == 0;
    std::string detail = "cli runs failed";
    if (ok) {
        std::ifstream f1("acceptance_w1.json"), f8("acceptance_w8.json");
        json j1, j8;
        f1 >> j1;
        f8 >> j8;
        ok = j1.at("results") == j8.at("results");
        detail = ok ? "result documents identical at 1 and 8 workers (2000 toys)"
                    : "result documents differ between 1 and 8 workers";
    }
    report(9, ok, detail);
}

}  // namespace

int main() {
    criterion_1();
    criterion_2();
    criterion_3();
    criterion_4();
    criterion_5();
    criterion_6();
    criterion_7();
    criterion_8();
    criterion_9();
    if (failures == 0)
        std::printf("all acceptance criteria passed\n");
    else
        std::printf("%d acceptance criteria FAILED\n", failures);
    return failures;
}
