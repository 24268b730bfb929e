#ifndef SHARPNULL_BUMPHUNT_HPP
#define SHARPNULL_BUMPHUNT_HPP

#include <algorithm>
#include <cmath>
#include <numeric>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <boost/math/special_functions/gamma.hpp>
#include <boost/math/tools/minima.hpp>

#include "sharpnull/errors.hpp"
#include "sharpnull/normal.hpp"
#include "sharpnull/rng.hpp"

namespace sharpnull {

enum class BackgroundShape { flat, exponential, table };

struct BumpHuntConfig {
    int n_bins = 0;
    double lo = 0.0;
    double hi = 0.0;
    BackgroundShape shape = BackgroundShape::flat;
    double level = 0.0;   // flat: expected counts per bin; exponential: counts in the first bin
    double decay = 0.0;   // exponential decay constant, mass units
    std::vector<double> table;  // per-bin expectations for BackgroundShape::table
    double resolution = 0.0;
    std::vector<double> mass_grid;
    double luminosity = 1.0;
    double window_halfwidth = 0.0;    // 0 = default 2 * resolution
    double sideband_halfwidth = 0.0;  // per side; 0 = default 2 * resolution
};

// Binned Poisson background + Gaussian signal template.  Expectations
// already include the luminosity scale.
struct BumpHuntModel {
    std::vector<double> bin_edges;          // n_bins + 1
    std::vector<double> background;         // expected counts per bin
    double resolution = 0.0;
    std::vector<double> mass_grid;
    double luminosity = 1.0;
    double window_halfwidth = 0.0;
    double sideband_halfwidth = 0.0;

    int n_bins() const { return static_cast<int>(background.size()); }
    double bin_center(int i) const { return 0.5 * (bin_edges[i] + bin_edges[i + 1]); }
    double total_background() const {
        return std::accumulate(background.begin(), background.end(), 0.0);
    }

    // Per-bin integrals of N(psi, resolution^2), nonzero within
    // +-6 resolution of psi; values sum to <= 1.
    struct SignalTemplate {
        int first = 0;
        std::vector<double> frac;
        double total = 0.0;
    };

    SignalTemplate signal_template(double psi) const {
        SignalTemplate t;
        const double lo = psi - 6.0 * resolution;
        const double hi = psi + 6.0 * resolution;
        const int n = n_bins();
        int i0 = 0;
        while (i0 < n && bin_edges[i0 + 1] < lo) ++i0;
        t.first = i0;
        for (int i = i0; i < n && bin_edges[i] <= hi; ++i) {
            const double f = norm_cdf((bin_edges[i + 1] - psi) / resolution) -
                             norm_cdf((bin_edges[i] - psi) / resolution);
            t.frac.push_back(f);
            t.total += f;
        }
        return t;
    }
};

inline BumpHuntModel build_model(const BumpHuntConfig& cfg) {
    if (cfg.n_bins < 1) throw config_error("bins.n: must be >= 1");
    if (!(cfg.hi > cfg.lo)) throw config_error("bins.hi: must exceed bins.lo");
    if (!(cfg.resolution > 0.0)) throw config_error("resolution: must be > 0");
    if (!(cfg.luminosity > 0.0)) throw config_error("luminosity: must be > 0");
    if (cfg.mass_grid.empty()) throw config_error("mass_grid: must be nonempty");
    if (!std::is_sorted(cfg.mass_grid.begin(), cfg.mass_grid.end()))
        throw config_error("mass_grid: must be sorted ascending");

    BumpHuntModel m;
    m.resolution = cfg.resolution;
    m.mass_grid = cfg.mass_grid;
    m.luminosity = cfg.luminosity;
    m.window_halfwidth = cfg.window_halfwidth > 0.0 ? cfg.window_halfwidth : 2.0 * cfg.resolution;
    m.sideband_halfwidth =
        cfg.sideband_halfwidth > 0.0 ? cfg.sideband_halfwidth : 2.0 * cfg.resolution;

    m.bin_edges.resize(cfg.n_bins + 1);
    const double width = (cfg.hi - cfg.lo) / cfg.n_bins;
    for (int i = 0; i <= cfg.n_bins; ++i) m.bin_edges[i] = cfg.lo + width * i;
    m.bin_edges.back() = cfg.hi;

    m.background.resize(cfg.n_bins);
    switch (cfg.shape) {
        case BackgroundShape::flat:
            if (!(cfg.level > 0.0)) throw config_error("background.level: must be > 0 for flat shape");
            std::fill(m.background.begin(), m.background.end(), cfg.level * cfg.luminosity);
            break;
        case BackgroundShape::exponential: {
            if (!(cfg.level > 0.0)) throw config_error("background.level: must be > 0 for exponential shape");
            if (!(cfg.decay > 0.0)) throw config_error("background.decay: must be > 0");
            // analytic bin integrals of exp(-(x - lo)/decay); bins are
            // uniform so the ratio to the first bin is exp(-edge/decay),
            // normalized to `level` expected counts in the first bin
            for (int i = 0; i < cfg.n_bins; ++i) {
                const double a = (m.bin_edges[i] - cfg.lo) / cfg.decay;
                m.background[i] = cfg.level * cfg.luminosity * std::exp(-a);
            }
            break;
        }
        case BackgroundShape::table:
            if (static_cast<int>(cfg.table.size()) != cfg.n_bins)
                throw config_error("background.table: length must equal bins.n");
            for (double v : cfg.table)
                if (!(std::isfinite(v) && v >= 0.0))
                    throw config_error("background.table: entries must be finite and >= 0");
            for (int i = 0; i < cfg.n_bins; ++i) m.background[i] = cfg.table[i] * cfg.luminosity;
            break;
    }
    if (m.total_background() <= 0.0)
        throw config_error("background: degenerate (total expectation is zero)");

    const double grid_lo = m.bin_edges.front() + 2.0 * cfg.resolution;
    const double grid_hi = m.bin_edges.back() - 2.0 * cfg.resolution;
    for (double psi : cfg.mass_grid)
        if (psi < grid_lo || psi > grid_hi) {
            std::ostringstream msg;
            msg << "mass_grid: point " << psi << " outside [" << grid_lo << ", " << grid_hi
                << "], signal template does not fit";
            throw config_error(msg.str());
        }
    return m;
}

struct ObservedHistogram {
    std::vector<long> counts;

    long total() const { return std::accumulate(counts.begin(), counts.end(), 0L); }
};

// P(N >= n_obs | mean b), via the regularized incomplete gamma.
inline double poisson_tail_geq(long n_obs, double b) {
    if (!(b >= 0.0)) throw std::domain_error("poisson_tail_geq: mean must be >= 0");
    if (n_obs <= 0) return 1.0;
    if (b == 0.0) return 0.0;
    return boost::math::gamma_p(static_cast<double>(n_obs), b);
}

namespace detail {

struct WindowBins {
    int lo;  // first bin index, inclusive
    int hi;  // last bin index, exclusive
};

// Bins whose centers lie in [a, b].
inline WindowBins bins_in(const BumpHuntModel& m, double a, double b) {
    WindowBins w{m.n_bins(), m.n_bins()};
    for (int i = 0; i < m.n_bins(); ++i) {
        const double c = m.bin_center(i);
        if (c >= a && c <= b) {
            if (w.lo == m.n_bins()) w.lo = i;
            w.hi = i + 1;
        }
    }
    if (w.lo == m.n_bins()) w.hi = w.lo;
    return w;
}

}  // namespace detail

// 1960s-style sideband counting: the signal window is +-window_halfwidth
// around psi, the background estimate comes from flanking sidebands of
// equal total width rescaled by the expected-shape ratio, and the local
// p-value is the Poisson tail P(N >= n_obs | b).
inline double local_p_counting(const BumpHuntModel& m, const ObservedHistogram& data, double psi) {
    if (data.counts.size() != static_cast<std::size_t>(m.n_bins()))
        throw std::invalid_argument("local_p_counting: histogram length mismatch");
    const double wh = m.window_halfwidth, sh = m.sideband_halfwidth;
    if (psi - wh - sh < m.bin_edges.front() || psi + wh + sh > m.bin_edges.back())
        throw config_error("local_p_counting: signal window or sidebands fall off the histogram");

    const auto win = detail::bins_in(m, psi - wh, psi + wh);
    const auto sb_lo = detail::bins_in(m, psi - wh - sh, psi - wh - 1e-12 * (1.0 + std::abs(psi)));
    const auto sb_hi = detail::bins_in(m, psi + wh + 1e-12 * (1.0 + std::abs(psi)), psi + wh + sh);
    if (win.lo == win.hi) throw config_error("local_p_counting: empty signal window");

    long n_obs = 0, n_side = 0;
    double exp_win = 0.0, exp_side = 0.0;
    for (int i = win.lo; i < win.hi; ++i) {
        n_obs += data.counts[i];
        exp_win += m.background[i];
    }
    for (auto sb : {sb_lo, sb_hi})
        for (int i = sb.lo; i < sb.hi; ++i) {
            n_side += data.counts[i];
            exp_side += m.background[i];
        }
    if (!(exp_side > 0.0)) throw config_error("local_p_counting: sidebands have zero expectation");
    const double b = static_cast<double>(n_side) * exp_win / exp_side;
    return poisson_tail_geq(n_obs, b);
}

struct ProfileResult {
    double q0;
    double z;
    double p;
    double theta_hat;
    double nu_hat;  // fitted background normalization at theta_hat
};

namespace detail {

// Binned Poisson fit machinery for one mass point.  The free parameters
// are the signal strength theta >= 0 (expected signal events) and a
// global multiplicative background normalization nu.
struct ProfileFit {
    const BumpHuntModel& m;
    const ObservedHistogram& data;
    BumpHuntModel::SignalTemplate tmpl;
    double total_bg;
    long total_n;
    long n_outside;  // counts in bins without signal template support

    ProfileFit(const BumpHuntModel& model, const ObservedHistogram& d, double psi)
        : m(model), data(d), tmpl(model.signal_template(psi)) {
        total_bg = m.total_background();
        total_n = data.total();
        long n_in = 0;
        for (std::size_t j = 0; j < tmpl.frac.size(); ++j)
            n_in += data.counts[tmpl.first + j];
        n_outside = total_n - n_in;
    }

    // log-likelihood up to data-only constants
    double log_lik(double theta, double nu) const {
        double ll = -nu * total_bg - theta * tmpl.total;
        if (n_outside > 0) {
            if (nu <= 0.0) return -std::numeric_limits<double>::infinity();
            ll += static_cast<double>(n_outside) * std::log(nu);
        }
        for (std::size_t j = 0; j < tmpl.frac.size(); ++j) {
            const long n = data.counts[tmpl.first + j];
            if (n == 0) continue;
            const double mu = nu * m.background[tmpl.first + j] + theta * tmpl.frac[j];
            if (mu <= 0.0) return -std::numeric_limits<double>::infinity();
            ll += static_cast<double>(n) * std::log(mu);
        }
        return ll;
    }

    // conditional MLE of nu at fixed theta; the stationarity condition
    // sum n_i b_i / (nu b_i + theta s_i) = B is monotone in nu
    double nu_hat(double theta) const {
        if (total_n == 0) return 0.0;
        auto h = [&](double nu) {
            double s = n_outside > 0 ? static_cast<double>(n_outside) / nu : 0.0;
            for (std::size_t j = 0; j < tmpl.frac.size(); ++j) {
                const long n = data.counts[tmpl.first + j];
                if (n == 0) continue;
                const double b = m.background[tmpl.first + j];
                s += static_cast<double>(n) * b / (nu * b + theta * tmpl.frac[j]);
            }
            return s - total_bg;
        };
        double hi = static_cast<double>(total_n) / total_bg + 1e-9;
        double lo = 1e-14 * hi;
        if (h(lo) <= 0.0) return 0.0;
        for (int i = 0; i < 200 && (hi - lo) > 1e-13 * hi; ++i) {
            const double mid = 0.5 * (lo + hi);
            (h(mid) > 0.0 ? lo : hi) = mid;
        }
        return 0.5 * (lo + hi);
    }

    double profile_log_lik(double theta) const { return log_lik(theta, nu_hat(theta)); }
};

}  // namespace detail

// Profile-likelihood local test at mass psi: fit theta >= 0 with the
// background normalization profiled, q0 = -2 ln lambda clamped at the
// theta = 0 boundary, z = sqrt(q0), one-tailed p.
inline ProfileResult local_p_profile(const BumpHuntModel& m, const ObservedHistogram& data,
                                     double psi) {
    if (data.counts.size() != static_cast<std::size_t>(m.n_bins()))
        throw std::invalid_argument("local_p_profile: histogram length mismatch");
    detail::ProfileFit fit(m, data, psi);
    if (fit.tmpl.total <= 0.0)
        throw config_error("local_p_profile: signal template does not overlap the histogram");

    const double nu0 = fit.total_bg > 0.0 ? static_cast<double>(fit.total_n) / fit.total_bg : 0.0;
    const double ll_null = fit.log_lik(0.0, fit.nu_hat(0.0));

    // upward slope at theta = 0 decides whether the boundary is the MLE
    double grad0 = -fit.tmpl.total;
    bool infinite_grad = false;
    for (std::size_t j = 0; j < fit.tmpl.frac.size(); ++j) {
        const long n = data.counts[fit.tmpl.first + j];
        if (n == 0) continue;
        const double mu = nu0 * m.background[fit.tmpl.first + j];
        if (mu <= 0.0) {
            infinite_grad = true;
            break;
        }
        grad0 += static_cast<double>(n) * fit.tmpl.frac[j] / mu;
    }
    double theta_hat = 0.0;
    double ll_hat = ll_null;
    if (fit.total_n > 0 && (infinite_grad || grad0 > 0.0)) {
        const double n = static_cast<double>(fit.total_n);
        const double theta_hi = n + 10.0 * std::sqrt(n) + 20.0;
        auto neg = [&](double th) { return -fit.profile_log_lik(th); };
        auto r = boost::math::tools::brent_find_minima(neg, 0.0, theta_hi, 40);
        if (!std::isfinite(r.second))
            throw numerical_error("local_p_profile: fit failed to converge");
        if (-r.second > ll_hat) {
            theta_hat = r.first;
            ll_hat = -r.second;
        }
    }
    double q0 = 2.0 * (ll_hat - ll_null);
    if (!(q0 > 0.0)) q0 = 0.0;
    const double z = std::sqrt(q0);
    return ProfileResult{q0, z, norm_sf(z), theta_hat, fit.nu_hat(theta_hat)};
}

enum class ScanMethod { counting, profile };

struct ScanResult {
    std::vector<double> local_p;
    std::vector<double> local_z;
    std::vector<double> theta_hat;  // empty for counting scans
    double p_min = 1.0;
    double psi_hat = 0.0;
    double theta_hat_at_psi_hat = 0.0;
};

// Evaluates the local test at every mass-grid point.  Ties in p_min go
// to the smallest mass.
inline ScanResult scan(const BumpHuntModel& m, const ObservedHistogram& data,
                       ScanMethod method = ScanMethod::profile) {
    ScanResult r;
    r.local_p.reserve(m.mass_grid.size());
    r.local_z.reserve(m.mass_grid.size());
    for (double psi : m.mass_grid) {
        double p, z, th = 0.0;
        if (method == ScanMethod::profile) {
            const auto pr = local_p_profile(m, data, psi);
            p = pr.p;
            z = pr.z;
            th = pr.theta_hat;
            r.theta_hat.push_back(th);
        } else {
            p = local_p_counting(m, data, psi);
            z = (p >= 1.0) ? -std::numeric_limits<double>::infinity() : z_from_p(p, Tails::one);
        }
        r.local_p.push_back(p);
        r.local_z.push_back(z);
        if (r.local_p.size() == 1 || p < r.p_min) {
            r.p_min = p;
            r.psi_hat = psi;
            r.theta_hat_at_psi_hat = th;
        }
    }
    return r;
}

// Pseudo-experiment: independent Poisson draw per bin with mean
// background + theta * signal(psi).  Bit-for-bit reproducible given
// (master seed, toy index).
inline ObservedHistogram generate_toy(const BumpHuntModel& m, double theta,
                                      std::optional<double> psi, CounterRng& rng) {
    if (!(theta >= 0.0)) throw std::invalid_argument("generate_toy: theta must be >= 0");
    if (theta > 0.0 && !psi) throw std::invalid_argument("generate_toy: injected signal requires a mass");
    BumpHuntModel::SignalTemplate tmpl;
    if (theta > 0.0) tmpl = m.signal_template(*psi);
    ObservedHistogram h;
    h.counts.resize(m.n_bins());
    for (int i = 0; i < m.n_bins(); ++i) {
        double mean = m.background[i];
        if (theta > 0.0 && i >= tmpl.first && i < tmpl.first + static_cast<int>(tmpl.frac.size()))
            mean += theta * tmpl.frac[i - tmpl.first];
        h.counts[i] = rng.poisson(mean);
    }
    return h;
}

inline ObservedHistogram generate_toy(const BumpHuntModel& m, double theta,
                                      std::optional<double> psi, std::uint64_t master_seed,
                                      std::uint64_t toy_index) {
    CounterRng rng(master_seed, toy_index);
    return generate_toy(m, theta, psi, rng);
}

}  // namespace sharpnull

#endif
