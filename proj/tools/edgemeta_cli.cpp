// Command-line front end: analyze a dataset, drive the simulation grid, or
// score a sample file against observed outcomes. Output is machine-first
// (JSON/CSV) with numbers rounded to 6 significant digits for stable diffs.

#include <cmath>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iostream>
#include <sstream>

#include <CLI11.hpp>
#include <json.hpp>

#include "edgemeta/data_model.hpp"
#include "edgemeta/edgington.hpp"
#include "edgemeta/heterogeneity.hpp"
#include "edgemeta/math.hpp"
#include "edgemeta/predictive.hpp"
#include "edgemeta/scoring.hpp"
#include "edgemeta/simulation.hpp"

using json = nlohmann::ordered_json;
using namespace edgemeta;

namespace {

constexpr int exit_ok = 0;
constexpr int exit_usage = 1;
constexpr int exit_data = 2;
constexpr int exit_numeric = 3;

double sig6(double x) {
    if (!std::isfinite(x) || x == 0.0) return x;
    const double mag = std::pow(10.0, 5 - std::floor(std::log10(std::fabs(x))));
    return std::round(x * mag) / mag;
}

std::string fmt6(double x) {
    if (std::isnan(x)) return "nan";
    std::ostringstream os;
    os.precision(6);
    os << sig6(x);
    return os.str();
}

json tau2_json(const Tau2Estimate& est) {
    json j;
    j["method"] = (est.method == Tau2Method::PauleMandel) ? "pm" : "reml";
    j["value"] = sig6(est.value);
    if (est.ci) {
        j["ci"] = {sig6(est.ci->first), sig6(est.ci->second)};
        j["ci_level"] = est.ci_level;
    }
    if (est.i2) j["i2_percent"] = sig6(*est.i2);
    return j;
}

json interval_json(const PredictionInterval& pi) {
    return json{{"lower", sig6(pi.lower)}, {"upper", sig6(pi.upper)}};
}

std::vector<double> read_column(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ValidationError("cannot open file: " + path);
    std::vector<double> values;
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
        try {
            values.push_back(std::stod(line));
        } catch (const std::exception&) {
            throw ValidationError("line " + std::to_string(line_no) +
                                  ": cannot parse number '" + line + "'");
        }
    }
    if (values.empty()) throw ValidationError("no values in " + path);
    return values;
}

struct AnalyzeOptions {
    std::string input;
    std::string output;
    std::string tau2_method = "pm";
    std::vector<std::string> variants{"fixed", "simplified", "full", "hts", "skipka"};
    std::size_t n_draws = default_draws;
    std::int64_t seed = -1;
    double delta = 0.0;
    std::vector<double> levels{0.95, 0.99};
    bool continuity = false;
    std::string cd_grid_path;
    int grid_size = 201;
    std::string samples_dir;
};

bool variant_needs_mc(const std::string& v) {
    return v == "fixed" || v == "simplified" || v == "full";
}

void dump_samples(const std::string& dir, const std::string& name,
                  const PredictiveSamples& samples, const std::string& tau2_treatment,
                  std::size_t n_draws) {
    std::filesystem::create_directories(dir);
    const std::string base = dir + "/" + name;
    std::ofstream csv(base + ".csv");
    csv.precision(17);
    for (double d : samples.draws) csv << d << "\n";
    json sidecar;
    sidecar["variant"] = name;
    sidecar["seed"] = samples.seed;
    sidecar["B"] = n_draws;
    sidecar["tau2"] = samples.tau2_used ? json(*samples.tau2_used) : json("sampled");
    std::ofstream(base + ".json") << sidecar.dump(2) << "\n";
}

int run_analyze(const AnalyzeOptions& opt) {
    const MetaDataset data = read_csv(opt.input, opt.continuity);

    bool mc_needed = false;
    for (const auto& v : opt.variants) mc_needed |= variant_needs_mc(v);
    if (mc_needed && opt.seed < 0) {
        std::cerr << "analyze: Monte Carlo variants require an explicit --seed\n";
        return exit_usage;
    }
    const std::uint64_t seed = static_cast<std::uint64_t>(opt.seed < 0 ? 0 : opt.seed);

    json report;
    report["input"] = opt.input;
    report["k"] = data.size();
    report["seed"] = seed;
    report["B"] = opt.n_draws;
    report["delta"] = opt.delta;

    const Tau2Estimate pm = estimate_tau2(data, Tau2Method::PauleMandel, 0.95);
    report["tau2"]["pm"] = tau2_json(pm);
    try {
        report["tau2"]["reml"] = tau2_json(estimate_tau2(data, Tau2Method::Reml, 0.95));
    } catch (const NumericError& e) {
        report["tau2"]["reml"] = {{"error", e.what()}};
    }

    double tau2_hat = pm.value;
    if (opt.tau2_method == "reml") {
        tau2_hat = report["tau2"]["reml"].contains("value")
                       ? report["tau2"]["reml"]["value"].get<double>()
                       : throw NumericError("analyze: REML failed, no tau2 available");
    }
    report["tau2_used"] = sig6(tau2_hat);

    try {
        const MeanEstimate hksj = ivw_mean_hksj(data, tau2_hat, 0.95);
        report["mean_hksj"] = {{"value", sig6(hksj.value)},
                               {"se_ivw", sig6(hksj.se_ivw)},
                               {"se_hksj", sig6(hksj.se_hksj)},
                               {"df", hksj.df},
                               {"level", hksj.level},
                               {"ci", {sig6(hksj.ci.first), sig6(hksj.ci.second)}}};
    } catch (const std::exception& e) {
        report["mean_hksj"] = {{"error", e.what()}};
    }

    // Average-effect confidence distribution, tau2 uncertainty marginalized.
    // This block is Monte Carlo too, so it also needs an explicit seed.
    if (opt.seed < 0) {
        report["edgington_cd"] = {{"skipped", "requires --seed"}};
    } else try {
        PredictiveSamples mu = sample_mu_marginal(data, opt.n_draws, seed ^ 0xEDull);
        double mean = 0.0;
        for (double d : mu.draws) mean += d;
        mean /= static_cast<double>(mu.draws.size());
        const PredictionInterval ci = equi_tailed_interval(mu, 0.95);
        json cd;
        cd["mean"] = sig6(mean);
        cd["median"] = sig6(empirical_quantile(mu.draws, 0.5));
        cd["ci95"] = interval_json(ci);
        cd["two_sided_p_at_0"] =
            sig6(2.0 * std::min(confidence_probability(mu, 0.0, Direction::LessEqual),
                                confidence_probability(mu, 0.0, Direction::GreaterEqual)));
        cd["fisher_skewness"] = sig6(fisher_skewness(mu.draws));
        cd["conf_negative"] = sig6(confidence_probability(mu, 0.0, Direction::LessEqual));
        report["edgington_cd"] = cd;
    } catch (const std::exception& e) {
        report["edgington_cd"] = {{"error", e.what()}};
    }

    if (!opt.cd_grid_path.empty()) {
        const EdgingtonCD cd(data, tau2_hat);
        const double lo = cd.quantile(1e-4), hi = cd.quantile(1.0 - 1e-4);
        std::ofstream grid(opt.cd_grid_path);
        grid << "mu,cdf,pdf\n";
        grid.precision(10);
        for (int i = 0; i < opt.grid_size; ++i) {
            const double mu = lo + (hi - lo) * i / (opt.grid_size - 1.0);
            grid << mu << "," << cd.cdf(mu) << "," << cd.density(mu) << "\n";
        }
    }

    json predictive = json::object();
    for (const std::string& name : opt.variants) {
        try {
            json entry;
            if (variant_needs_mc(name)) {
                const PcdVariant variant = (name == "fixed")        ? PcdVariant::Fixed
                                           : (name == "simplified") ? PcdVariant::Simplified
                                                                    : PcdVariant::Full;
                const PredictiveSamples samples = sample_pcd(
                    data, variant, tau2_hat, opt.n_draws,
                    seed ^ std::hash<std::string>{}(name));
                const double median = empirical_quantile(samples.draws, 0.5);
                entry["median"] = sig6(median);
                for (double level : opt.levels) {
                    const auto tag = std::to_string(static_cast<int>(level * 100));
                    const PredictionInterval et = equi_tailed_interval(samples, level);
                    entry["equi_tailed"][tag] = interval_json(et);
                    entry["hcdp"][tag] = interval_json(hcdp_interval(samples, level));
                    if (level == opt.levels.front()) {
                        entry["width"] = sig6(et.width());
                        entry["interval_skewness"] =
                            sig6(interval_skewness(et.lower, et.upper, median));
                    }
                }
                entry["conf_ge_delta"] = sig6(
                    confidence_probability(samples, opt.delta, Direction::GreaterEqual));
                if (!opt.samples_dir.empty()) {
                    dump_samples(opt.samples_dir, name, samples,
                                 samples.tau2_used ? "plug-in" : "sampled", opt.n_draws);
                }
            } else if (name == "hts" || name == "skipka") {
                const ParametricPredictive p = (name == "hts")
                                                   ? hts_predictive(data, tau2_hat)
                                                   : skipka_predictive(data, tau2_hat);
                entry["median"] = sig6(p.location);
                for (double level : opt.levels) {
                    const auto tag = std::to_string(static_cast<int>(level * 100));
                    const PredictionInterval pi = parametric_interval(p, level);
                    entry["equi_tailed"][tag] = interval_json(pi);
                    if (level == opt.levels.front()) {
                        entry["width"] = sig6(pi.width());
                        entry["interval_skewness"] = 0.0;
                    }
                }
                const double z = (opt.delta - p.location) / p.scale;
                const double cdf = (p.family == PredictiveFamily::Normal)
                                       ? math::normal_cdf(z)
                                       : math::student_t_cdf(z, *p.df);
                entry["conf_ge_delta"] = sig6(1.0 - cdf);
            } else if (name == "wang") {
                const PredictiveSamples ens = wang_ensemble(data, tau2_hat);
                entry["ensemble"] = json::array();
                for (double d : ens.draws) entry["ensemble"].push_back(sig6(d));
                entry["median"] = sig6(empirical_quantile(ens.draws, 0.5));
                entry["conf_ge_delta"] =
                    sig6(confidence_probability(ens, opt.delta, Direction::GreaterEqual));
            } else {
                std::cerr << "analyze: unknown variant '" << name << "'\n";
                return exit_usage;
            }
            predictive[name] = entry;
        } catch (const std::exception& e) {
            predictive[name] = {{"error", e.what()}};
        }
    }
    report["predictive"] = predictive;

    const std::string text = report.dump(2) + "\n";
    if (opt.output.empty()) {
        std::cout << text;
    } else {
        std::ofstream(opt.output) << text;
    }
    return exit_ok;
}

struct SimulateOptions {
    std::string config;
    std::string output_dir = ".";
    std::uint64_t master_seed = 1;
    int workers = 1;
};

Method parse_method(const std::string& name) {
    if (name == "pcd-fixed") return Method::PcdFixed;
    if (name == "pcd-simplified") return Method::PcdSimplified;
    if (name == "pcd-full") return Method::PcdFull;
    if (name == "hts") return Method::Hts;
    if (name == "skipka") return Method::Skipka;
    throw ValidationError("unknown method '" + name + "'");
}

int run_simulate(const SimulateOptions& opt) {
    std::ifstream in(opt.config);
    if (!in) throw ValidationError("cannot open config: " + opt.config);
    json cfg = json::parse(in);

    auto as_list = [&](const char* key, std::vector<double> fallback) {
        if (!cfg.contains(key)) return fallback;
        std::vector<double> out;
        for (const auto& v : cfg[key]) out.push_back(v.get<double>());
        return out;
    };
    const std::vector<double> ks = as_list("k", {5});
    const std::vector<double> i2s = as_list("i2", {0});
    const std::vector<double> k_larges = as_list("k_large", {0});
    std::vector<std::string> dists{"normal"};
    if (cfg.contains("effect_dist")) {
        dists.clear();
        for (const auto& v : cfg["effect_dist"]) dists.push_back(v.get<std::string>());
    }
    std::vector<Method> methods{Method::PcdFixed, Method::PcdSimplified, Method::PcdFull,
                                Method::Hts, Method::Skipka};
    if (cfg.contains("methods")) {
        methods.clear();
        for (const auto& v : cfg["methods"]) methods.push_back(parse_method(v.get<std::string>()));
    }

    ScenarioSpec base;
    base.mu = cfg.value("mu", -0.3);
    base.alpha = cfg.value("alpha", -4.0);
    base.n_iter = cfg.value("n_iter", 100);
    base.n_future = cfg.value("n_future", 10000);
    base.n_draws = cfg.value("B", default_draws);
    base.seed = opt.master_seed;

    // Validate the full grid before doing any work.
    std::vector<ScenarioSpec> cells;
    for (double k : ks)
        for (double i2 : i2s)
            for (double kl : k_larges)
                for (const std::string& dist : dists) {
                    ScenarioSpec spec = base;
                    spec.k = static_cast<int>(k);
                    spec.i2 = i2;
                    spec.k_large = static_cast<int>(kl);
                    if (dist == "normal") {
                        spec.effect_dist = EffectDist::Normal;
                    } else if (dist == "skew-normal") {
                        spec.effect_dist = EffectDist::SkewNormal;
                    } else {
                        throw ValidationError("unknown effect_dist '" + dist + "'");
                    }
                    spec.cell_id = cells.size();
                    spec.validate();
                    cells.push_back(spec);
                }

    std::filesystem::create_directories(opt.output_dir);
    std::ofstream csv(opt.output_dir + "/results.csv");
    csv << "k,i2,k_large,effect_dist,method,measure,estimate,mcse,n_convergent\n";
    for (const ScenarioSpec& spec : cells) {
        const ScenarioResult result = run_scenario(spec, methods, opt.workers);
        const std::string prefix =
            std::to_string(spec.k) + "," + fmt6(spec.i2) + "," +
            std::to_string(spec.k_large) + "," +
            (spec.effect_dist == EffectDist::Normal ? "normal" : "skew-normal");
        for (const auto& [method, agg] : result.methods) {
            auto row = [&](const std::string& measure, double est, double mcse) {
                csv << prefix << "," << method_name(method) << "," << measure << ","
                    << fmt6(est) << "," << fmt6(mcse) << "," << agg.n_convergent << "\n";
            };
            row("coverage", agg.mean_coverage, agg.mcse_coverage);
            row("width", agg.mean_width, agg.mcse_width);
            row("crps", agg.mean_crps, agg.mcse_crps);
            row("pearson_estimate_skew", agg.pearson_estimate_skew,
                agg.mcse_pearson_estimate);
            row("pearson_true_skew", agg.pearson_true_skew, agg.mcse_pearson_true);
            row("kappa_estimate_skew", agg.kappa_estimate_skew, 0.0);
            row("kappa_true_skew", agg.kappa_true_skew, 0.0);
        }
    }

    json manifest;
    manifest["master_seed"] = opt.master_seed;
    manifest["n_cells"] = cells.size();
    manifest["config"] = cfg;
    json method_names = json::array();
    for (Method m : methods) method_names.push_back(method_name(m));
    manifest["methods"] = method_names;
    std::ofstream(opt.output_dir + "/manifest.json") << manifest.dump(2) << "\n";
    return exit_ok;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Random-effects meta-analysis prediction via p-value combination"};
    app.require_subcommand(1);

    AnalyzeOptions an;
    CLI::App* analyze = app.add_subcommand("analyze", "Analyze a dataset CSV");
    analyze->add_option("input", an.input, "dataset CSV")->required();
    analyze->add_option("-o,--output", an.output, "report JSON path (default stdout)");
    analyze->add_option("--tau2", an.tau2_method, "tau2 estimator")
        ->check(CLI::IsMember({"pm", "reml"}));
    analyze->add_option("--variants", an.variants, "predictive variants");
    analyze->add_option("--B", an.n_draws, "Monte Carlo draws");
    analyze->add_option("--seed", an.seed, "RNG seed (required for MC variants)");
    analyze->add_option("--delta", an.delta, "margin for confidence probabilities");
    analyze->add_option("--level", an.levels, "interval level(s)");
    analyze->add_flag("--continuity-correction", an.continuity,
                      "add 0.5 to all cells of studies with a zero cell");
    analyze->add_option("--cd-grid", an.cd_grid_path, "CD density grid CSV path");
    analyze->add_option("--grid-size", an.grid_size, "grid points")->check(CLI::Range(2, 100000));
    analyze->add_option("--dump-samples", an.samples_dir, "directory for sample exports");

    SimulateOptions sim;
    CLI::App* simulate = app.add_subcommand("simulate", "Run a simulation grid");
    simulate->add_option("config", sim.config, "grid config JSON")->required();
    simulate->add_option("-o,--output-dir", sim.output_dir, "output directory");
    simulate->add_option("--master-seed", sim.master_seed, "master seed");
    simulate->add_option("--workers", sim.workers, "worker threads")->check(CLI::Range(1, 1024));

    std::string crps_samples, crps_outcomes;
    CLI::App* crps_cmd = app.add_subcommand("crps", "Score samples against outcomes");
    crps_cmd->add_option("--samples", crps_samples, "sample file, one draw per row")->required();
    crps_cmd->add_option("--outcomes", crps_outcomes, "outcome file, one value per row")
        ->required();

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        app.exit(e);
        return (e.get_exit_code() == 0) ? exit_ok : exit_usage;
    }

    try {
        if (analyze->parsed()) return run_analyze(an);
        if (simulate->parsed()) return run_simulate(sim);
        PredictiveSamples samples;
        samples.draws = read_column(crps_samples);
        const FutureEffects outcomes{read_column(crps_outcomes)};
        json out;
        out["mean_crps"] = sig6(crps_mc_mean(samples, outcomes));
        out["B"] = samples.draws.size();
        out["n_outcomes"] = outcomes.values.size();
        std::cout << out.dump(2) << "\n";
        return exit_ok;
    } catch (const ValidationError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return exit_data;
    } catch (const NumericError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return exit_numeric;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return exit_numeric;
    }
}
