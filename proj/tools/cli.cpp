// Command-line surface for the sharpnull library: one-shot significance
// conversions, point-null Bayes factors, paradox-regime scans, and
// bump-hunt campaigns with reproducible outputs.

#include <cstdint>
#include <cstdlib>
#include <ctime>
#include <fstream>
#include <iomanip>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>

#include <CLI11.hpp>
#include <json.hpp>

#include "sharpnull/bayes.hpp"
#include "sharpnull/bumphunt.hpp"
#include "sharpnull/errors.hpp"
#include "sharpnull/likelihood.hpp"
#include "sharpnull/lookelsewhere.hpp"
#include "sharpnull/normal.hpp"
#include "sharpnull/reference.hpp"
#include "sharpnull/version.hpp"

using nlohmann::json;
using namespace sharpnull;

namespace {

constexpr int exit_usage = 2;
constexpr int exit_io = 3;
constexpr int exit_config = 4;
constexpr int exit_numerical = 5;

std::string fnv1a_hex(const std::string& s) {
    std::uint64_t h = 0xcbf29ce484222325ull;
    for (unsigned char c : s) {
        h ^= c;
        h *= 0x100000001b3ull;
    }
    std::ostringstream os;
    os << std::hex << std::setw(16) << std::setfill('0') << h;
    return os.str();
}

std::string iso_timestamp() {
    std::time_t t = std::time(nullptr);
    char buf[32];
    std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", std::gmtime(&t));
    return buf;
}

json make_manifest(const std::string& command_line, const std::string& config_hash,
                   std::uint64_t seed) {
    return json{{"command_line", command_line},
                {"config_hash", config_hash},
                {"master_seed", seed},
                {"tool_version", sharpnull::version},
                {"timestamp", iso_timestamp()}};
}

std::string fmt6(double v) {
    std::ostringstream os;
    os << std::setprecision(6) << v;
    return os.str();
}

std::uint64_t default_seed() {
    if (const char* env = std::getenv("SHARPNULL_SEED")) {
        try {
            return std::stoull(env);
        } catch (...) {
            throw config_error("SHARPNULL_SEED: not a valid unsigned integer");
        }
    }
    return 12345;
}

PriorFamily parse_family(const std::string& s) {
    if (s == "normal") return PriorFamily::normal;
    if (s == "uniform") return PriorFamily::uniform;
    if (s == "cauchy") return PriorFamily::cauchy;
    throw config_error("unknown prior family: " + s);
}

// ---------------------------------------------------------------------
// pvalue

struct PvalueOpts {
    double z = 0.0, p = 0.0;
    bool has_z = false, has_p = false;
    int tails = 1;
    bool as_json = false;
};

int run_pvalue(const PvalueOpts& o, const std::string& cmdline) {
    if (o.has_z == o.has_p) {
        std::cerr << "pvalue: exactly one of --z / --p must be given\n";
        return exit_usage;
    }
    const Tails tails = o.tails == 2 ? Tails::two : Tails::one;
    const double z = o.has_z ? o.z : z_from_p(o.p, tails);
    const FrequentistResult fr = p_from_z(z, tails);
    const double lambda = max_lik_ratio(z);
    const double d = ref_discrepancy_asymptotic(z);

    if (o.as_json) {
        json out{{"manifest", make_manifest(cmdline, fnv1a_hex(cmdline), 0)},
                 {"results",
                  {{"z", fr.z},
                   {"p", fr.p},
                   {"log10_p", fr.log10_p},
                   {"tails", o.tails},
                   {"max_lik_ratio", lambda},
                   {"log10_max_lik_ratio", log_max_lik_ratio(z) / ln10},
                   {"reference_discrepancy", d}}}};
        std::cout << out.dump(2) << "\n";
    } else {
        std::cout << "z          = " << fmt6(fr.z) << "  (" << o.tails << "-tailed)\n"
                  << "p          = " << fmt6(fr.p) << "\n"
                  << "log10(p)   = " << fmt6(fr.log10_p) << "\n"
                  << "lambda     = " << fmt6(lambda) << "   (max likelihood ratio)\n"
                  << "d          = " << fmt6(d) << "   (reference discrepancy, asymptotic)\n";
    }
    return 0;
}

// ---------------------------------------------------------------------
// bf

struct BfOpts {
    double z = 0.0;
    double r = 0.0;
    std::string family = "normal";
    double pi0 = 0.5;
    double eps0 = 0.0;  // epsilon0 / sigma_tot
    double alpha_z = 5.0;
    double hierarchy_ratio = 100.0;
    bool as_json = false;
};

int run_bf(const BfOpts& o, const std::string& cmdline) {
    const Measurement m = Measurement::from_total(o.z, 1.0);
    const MixturePrior prior{o.pi0, 0.0, o.eps0,
                             AlternativePrior{parse_family(o.family), 0.0, o.r}};
    const double alpha = norm_sf(o.alpha_z);
    const ParadoxReport rep = paradox_report(m, prior, alpha, o.hierarchy_ratio);

    if (o.as_json) {
        json out{{"manifest", make_manifest(cmdline, fnv1a_hex(cmdline), 0)},
                 {"results",
                  {{"z", o.z},
                   {"tau_over_sigma", o.r},
                   {"prior_family", o.family},
                   {"pi0", o.pi0},
                   {"epsilon0_over_sigma", o.eps0},
                   {"p_one_tailed", rep.freq.p},
                   {"bf_exact", rep.exact.bf},
                   {"log10_bf_exact", rep.exact.log10_bf},
                   {"bf_asymptotic", rep.asymptotic.bf},
                   {"ockham_factor", rep.ockham},
                   {"posterior_h0", rep.exact.posterior_h0},
                   {"hierarchy_ok", rep.hierarchy_satisfied},
                   {"disagreement", rep.disagreement},
                   {"alpha", alpha},
                   {"alpha_z_convention", o.alpha_z}}}};
        std::cout << out.dump(2) << "\n";
    } else {
        std::cout << "p (1-tailed)   = " << fmt6(rep.freq.p) << "\n"
                  << "BF exact       = " << fmt6(rep.exact.bf)
                  << "   (log10 = " << fmt6(rep.exact.log10_bf) << ")\n"
                  << "BF asymptotic  = " << fmt6(rep.asymptotic.bf) << "\n"
                  << "Ockham factor  = " << fmt6(rep.ockham) << "   (sigma_tot/tau)\n"
                  << "P(H0|data)     = " << fmt6(rep.exact.posterior_h0) << "\n"
                  << "hierarchy ok   = " << (rep.hierarchy_satisfied ? "yes" : "no") << "\n"
                  << "disagreement   = " << (rep.disagreement ? "YES" : "no")
                  << "   (alpha-z = " << fmt6(o.alpha_z)
                  << ", a convention, not a law of nature)\n";
    }
    return 0;
}

// ---------------------------------------------------------------------
// scan-paradox

struct ScanParadoxOpts {
    double z_min = 0.0, z_max = 5.0;
    int z_steps = 11;
    double r_min = 1.0, r_max = 1e6;
    int r_steps = 13;
    double pi0 = 0.5;
    std::string family = "normal";
    double alpha_z = 5.0;
    std::string out;
};

int run_scan_paradox(const ScanParadoxOpts& o) {
    const PriorFamily family = parse_family(o.family);
    const double alpha = norm_sf(o.alpha_z);
    std::ofstream f(o.out);
    if (!f) throw io_error("cannot open output file: " + o.out);
    f << "z,r,log10_bf,posterior_h0,disagreement,crossover_r\n";
    f << std::setprecision(17);
    for (int i = 0; i < o.z_steps; ++i) {
        const double z = o.z_steps == 1
                             ? o.z_min
                             : o.z_min + (o.z_max - o.z_min) * i / (o.z_steps - 1);
        const auto rstar = jl_crossover(z, family);
        const std::string cross = rstar ? fmt6(*rstar) : "none";
        for (int j = 0; j < o.r_steps; ++j) {
            const double lr = o.r_steps == 1 ? std::log(o.r_min)
                                             : std::log(o.r_min) +
                                                   (std::log(o.r_max) - std::log(o.r_min)) * j /
                                                       (o.r_steps - 1);
            const double r = std::exp(lr);
            const Measurement m = Measurement::from_total(z, 1.0);
            const MixturePrior prior{o.pi0, 0.0, 0.0, AlternativePrior{family, 0.0, r}};
            const BayesResult b = bayes_factor_exact(m, prior);
            const bool disagree = p_from_z(z, Tails::one).p <= alpha && b.posterior_h0 > 0.5;
            f << z << ',' << r << ',' << b.log10_bf << ',' << b.posterior_h0 << ','
              << (disagree ? 1 : 0) << ',' << cross << '\n';
        }
    }
    if (!f.good()) throw io_error("write failed: " + o.out);
    return 0;
}

// ---------------------------------------------------------------------
// bump

struct BumpOpts {
    std::string config_path;
    std::uint64_t toys = 0;       // 0 = take from config
    std::optional<std::uint64_t> seed;
    unsigned workers = 0;         // 0 = take from config
    std::string out = "bump";
    bool as_json = false;
};

BumpHuntConfig parse_bump_config(const json& j) {
    BumpHuntConfig cfg;
    try {
        const auto& bins = j.at("bins");
        cfg.n_bins = bins.at("n").get<int>();
        cfg.lo = bins.at("lo").get<double>();
        cfg.hi = bins.at("hi").get<double>();
        const auto& bg = j.at("background");
        const std::string shape = bg.at("shape").get<std::string>();
        if (shape == "flat")
            cfg.shape = BackgroundShape::flat;
        else if (shape == "exponential")
            cfg.shape = BackgroundShape::exponential;
        else if (shape == "table")
            cfg.shape = BackgroundShape::table;
        else
            throw config_error("background.shape: unknown value '" + shape + "'");
        cfg.level = bg.value("level", 0.0);
        cfg.decay = bg.value("decay", 0.0);
        if (bg.contains("table")) cfg.table = bg.at("table").get<std::vector<double>>();
        cfg.resolution = j.at("resolution").get<double>();
        const auto& grid = j.at("mass_grid");
        if (grid.is_array()) {
            cfg.mass_grid = grid.get<std::vector<double>>();
        } else {
            const int n = grid.at("n").get<int>();
            const double glo = grid.at("lo").get<double>();
            const double ghi = grid.at("hi").get<double>();
            if (n < 1) throw config_error("mass_grid.n: must be >= 1");
            for (int i = 0; i < n; ++i)
                cfg.mass_grid.push_back(n == 1 ? glo : glo + (ghi - glo) * i / (n - 1));
        }
        cfg.luminosity = j.value("luminosity", 1.0);
        cfg.window_halfwidth = j.value("window_halfwidth", 0.0);
        cfg.sideband_halfwidth = j.value("sideband_halfwidth", 0.0);
    } catch (const json::exception& e) {
        throw config_error(std::string("config: ") + e.what());
    }
    return cfg;
}

int run_bump(const BumpOpts& o, const std::string& cmdline) {
    std::ifstream cf(o.config_path);
    if (!cf) throw io_error("cannot read config file: " + o.config_path);
    json cfg_json;
    try {
        cf >> cfg_json;
    } catch (const json::exception& e) {
        throw config_error(std::string("config: invalid JSON: ") + e.what());
    }

    const BumpHuntConfig cfg = parse_bump_config(cfg_json);
    const BumpHuntModel model = build_model(cfg);

    std::uint64_t seed;
    if (o.seed)
        seed = *o.seed;
    else if (cfg_json.contains("seed"))
        seed = cfg_json.at("seed").get<std::uint64_t>();
    else
        seed = default_seed();
    const std::uint64_t n_toys = o.toys ? o.toys : cfg_json.value("toys", 1000ull);
    const unsigned workers = o.workers ? o.workers : cfg_json.value("workers", 1u);
    const std::string method_name = cfg_json.value("scan_method", std::string("profile"));
    ScanMethod method;
    if (method_name == "profile")
        method = ScanMethod::profile;
    else if (method_name == "counting")
        method = ScanMethod::counting;
    else
        throw config_error("scan_method: unknown value '" + method_name + "'");
    const double alpha_z = cfg_json.value("alpha_z", 5.0);

    // observed data: supplied, or generated on a reserved stream
    ObservedHistogram data;
    bool generated = false;
    if (cfg_json.contains("data")) {
        try {
            data.counts = cfg_json.at("data").at("counts").get<std::vector<long>>();
        } catch (const json::exception& e) {
            throw config_error(std::string("config: data.counts: ") + e.what());
        }
        if (data.counts.size() != static_cast<std::size_t>(model.n_bins()))
            throw config_error("data.counts: length must equal bins.n");
        for (long c : data.counts)
            if (c < 0) throw config_error("data.counts: entries must be >= 0");
    } else {
        double theta = 0.0;
        std::optional<double> psi;
        if (cfg_json.contains("inject")) {
            theta = cfg_json.at("inject").value("theta", 0.0);
            if (cfg_json.at("inject").contains("psi"))
                psi = cfg_json.at("inject").at("psi").get<double>();
        }
        constexpr std::uint64_t observed_stream = 0xFFFFFFFFFFFFFFFFull;
        data = generate_toy(model, theta, psi, seed, observed_stream);
        generated = true;
    }

    const ScanResult sr = scan(model, data, method);
    const GlobalResult gmc = global_p_mc(model, sr.p_min, n_toys, seed, method, workers);

    // upcrossing estimate, target level = observed z at p_min
    const double ref_z = cfg_json.contains("upcrossing")
                             ? cfg_json.at("upcrossing").value("reference_z", 1.5)
                             : 1.5;
    const std::uint64_t n_calib = cfg_json.contains("upcrossing")
                                      ? cfg_json.at("upcrossing").value("calibration_toys", 200ull)
                                      : 200ull;
    std::optional<GlobalResult> gup;
    std::string up_skip_reason;
    const double target_z = sr.p_min < 1.0 ? z_from_p(sr.p_min, Tails::one) : 0.0;
    if (model.mass_grid.size() == 1 || target_z >= ref_z) {
        gup = global_p_upcrossing(model, std::max(target_z, ref_z), ref_z, n_calib, seed + 1,
                                  method, workers);
    } else {
        up_skip_reason = "observed significance below the reference level; no extrapolation possible";
    }

    const std::string cfg_hash = fnv1a_hex(cfg_json.dump());
    json results{{"config_hash", cfg_hash},
                 {"seed", seed},
                 {"n_toys", n_toys},
                 {"scan_method", method_name},
                 {"alpha_z_convention", alpha_z},
                 {"data_generated", generated},
                 {"mass_grid", model.mass_grid},
                 {"local_p", sr.local_p},
                 {"local_z", sr.local_z},
                 {"theta_hat", sr.theta_hat},
                 {"p_min", sr.p_min},
                 {"psi_hat", sr.psi_hat},
                 {"theta_hat_at_psi_hat", sr.theta_hat_at_psi_hat},
                 {"global_mc",
                  {{"global_p", gmc.global_p},
                   {"mc_uncertainty", gmc.mc_uncertainty},
                   {"n_toys", gmc.n_toys},
                   {"trials_factor", gmc.trials_factor},
                   {"zero_successes", gmc.zero_successes},
                   {"method", "monte_carlo"}}}};
    if (gup) {
        results["global_upcrossing"] = {{"global_p", gup->global_p},
                                        {"mc_uncertainty", gup->mc_uncertainty},
                                        {"n_calibration_toys", gup->n_toys},
                                        {"mean_upcrossings", gup->mean_upcrossings},
                                        {"reference_z", gup->reference_z},
                                        {"target_z", std::max(target_z, ref_z)},
                                        {"trials_factor", gup->trials_factor},
                                        {"method", "upcrossing"}};
    } else {
        results["global_upcrossing"] = {{"skipped", up_skip_reason}};
    }

    json out{{"manifest", make_manifest(cmdline, cfg_hash, seed)}, {"results", results}};

    {
        std::ofstream jf(o.out + ".json");
        if (!jf) throw io_error("cannot open output file: " + o.out + ".json");
        jf << out.dump(2) << "\n";
        if (!jf.good()) throw io_error("write failed: " + o.out + ".json");
    }
    {
        std::ofstream cfout(o.out + ".csv");
        if (!cfout) throw io_error("cannot open output file: " + o.out + ".csv");
        cfout << "psi,local_p,local_z,theta_hat\n" << std::setprecision(17);
        for (std::size_t i = 0; i < model.mass_grid.size(); ++i)
            cfout << model.mass_grid[i] << ',' << sr.local_p[i] << ',' << sr.local_z[i] << ','
                  << (i < sr.theta_hat.size() ? sr.theta_hat[i] : 0.0) << '\n';
        if (!cfout.good()) throw io_error("write failed: " + o.out + ".csv");
    }

    if (o.as_json) {
        std::cout << out.dump(2) << "\n";
    } else {
        std::cout << "p_min          = " << fmt6(sr.p_min) << "  at psi = " << fmt6(sr.psi_hat)
                  << "\n"
                  << "global p (MC)  = " << fmt6(gmc.global_p) << " +- "
                  << fmt6(gmc.mc_uncertainty) << "  (" << n_toys << " toys)\n"
                  << "trials factor  = " << fmt6(gmc.trials_factor) << "\n";
        if (gup)
            std::cout << "global p (upX) = " << fmt6(gup->global_p) << " +- "
                      << fmt6(gup->mc_uncertainty) << "\n";
        std::cout << "wrote " << o.out << ".json, " << o.out << ".csv\n";
    }
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    std::string cmdline;
    for (int i = 0; i < argc; ++i) {
        if (i) cmdline += ' ';
        cmdline += argv[i];
    }

    CLI::App app{"point-null testing, Bayes factors, and bump-hunt simulation"};
    app.require_subcommand(1);

    PvalueOpts pv;
    auto* cmd_pv = app.add_subcommand("pvalue", "convert between z and p; report lambda and d");
    auto* optz = cmd_pv->add_option("--z", pv.z, "significance z");
    auto* optp = cmd_pv->add_option("--p", pv.p, "p-value");
    cmd_pv->add_option("--tails", pv.tails, "tail convention: 1 or 2")
        ->check(CLI::IsMember({1, 2}))
        ->default_val(1);
    cmd_pv->add_flag("--json", pv.as_json, "machine-readable output");

    BfOpts bf;
    auto* cmd_bf = app.add_subcommand("bf", "point-null Bayes factor and posterior probability");
    cmd_bf->add_option("--z", bf.z, "significance z")->required();
    cmd_bf->add_option("--r,--tau-over-sigma", bf.r, "prior scale tau / sigma_tot")->required();
    cmd_bf->add_option("--prior", bf.family, "alternative prior family")
        ->check(CLI::IsMember({"normal", "uniform", "cauchy"}));
    cmd_bf->add_option("--pi0", bf.pi0, "prior probability of H0")->check(CLI::Range(1e-12, 1.0));
    cmd_bf->add_option("--epsilon0-over-sigma", bf.eps0, "null smearing half-width / sigma_tot");
    cmd_bf->add_option("--alpha-z", bf.alpha_z, "discovery threshold in sigma (a convention)");
    cmd_bf->add_option("--hierarchy-ratio", bf.hierarchy_ratio, "factor required between scales");
    cmd_bf->add_flag("--json", bf.as_json, "machine-readable output");

    ScanParadoxOpts sp;
    auto* cmd_sp = app.add_subcommand("scan-paradox", "grid of (z, r) -> BF, posterior, crossover");
    cmd_sp->add_option("--z-min", sp.z_min);
    cmd_sp->add_option("--z-max", sp.z_max);
    cmd_sp->add_option("--z-steps", sp.z_steps)->check(CLI::PositiveNumber);
    cmd_sp->add_option("--r-min", sp.r_min)->check(CLI::PositiveNumber);
    cmd_sp->add_option("--r-max", sp.r_max)->check(CLI::PositiveNumber);
    cmd_sp->add_option("--r-steps", sp.r_steps)->check(CLI::PositiveNumber);
    cmd_sp->add_option("--pi0", sp.pi0)->check(CLI::Range(1e-12, 1.0));
    cmd_sp->add_option("--prior", sp.family)->check(CLI::IsMember({"normal", "uniform", "cauchy"}));
    cmd_sp->add_option("--alpha-z", sp.alpha_z);
    cmd_sp->add_option("--out", sp.out, "output CSV path")->required();

    BumpOpts bp;
    auto* cmd_bp = app.add_subcommand("bump", "bump-hunt campaign: scan + global p-values");
    cmd_bp->add_option("--config", bp.config_path, "JSON config file")->required();
    cmd_bp->add_option("--toys", bp.toys, "override toy count");
    std::uint64_t seed_flag = 0;
    auto* opt_seed = cmd_bp->add_option("--seed", seed_flag, "override master seed");
    cmd_bp->add_option("--workers", bp.workers, "override worker count");
    cmd_bp->add_option("--out", bp.out, "output path prefix");
    cmd_bp->add_flag("--json", bp.as_json, "also print the JSON document to stdout");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : exit_usage;
    }

    try {
        if (cmd_pv->parsed()) {
            pv.has_z = optz->count() > 0;
            pv.has_p = optp->count() > 0;
            return run_pvalue(pv, cmdline);
        }
        if (cmd_bf->parsed()) return run_bf(bf, cmdline);
        if (cmd_sp->parsed()) return run_scan_paradox(sp);
        if (cmd_bp->parsed()) {
            if (opt_seed->count() > 0) bp.seed = seed_flag;
            return run_bump(bp, cmdline);
        }
    } catch (const io_error& e) {
        std::cerr << "I/O error: " << e.what() << "\n";
        return exit_io;
    } catch (const config_error& e) {
        std::cerr << "config error: " << e.what() << "\n";
        return exit_config;
    } catch (const numerical_error& e) {
        std::cerr << "numerical error: " << e.what() << "\n";
        return exit_numerical;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
    return 0;
}
