#include "edgemeta/simulation.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <thread>

#include "edgemeta/math.hpp"

namespace edgemeta {

namespace {

constexpr double nan_v = std::numeric_limits<double>::quiet_NaN();
constexpr std::size_t quantile_nodes = 4096;

// Stream tags keep the RNG consumption of unrelated stages independent.
constexpr std::uint64_t tag_generate = 1;
constexpr std::uint64_t tag_method = 2;

}  // namespace

std::string method_name(Method m) {
    switch (m) {
        case Method::PcdFixed: return "pcd-fixed";
        case Method::PcdSimplified: return "pcd-simplified";
        case Method::PcdFull: return "pcd-full";
        case Method::Hts: return "hts";
        case Method::Skipka: return "skipka";
    }
    return "?";
}

void ScenarioSpec::validate() const {
    if (k < 2) throw ValidationError("scenario: k < 2");
    if (k_large < 0 || k_large > k) throw ValidationError("scenario: k_large outside [0, k]");
    if (!(i2 >= 0.0 && i2 < 100.0)) throw ValidationError("scenario: I2 outside [0, 100)");
    if (n_iter < 1) throw ValidationError("scenario: n_iter < 1");
    if (n_future < 1) throw ValidationError("scenario: n_future < 1");
    if (n_draws < 100) throw ValidationError("scenario: n_draws < 100");
}

double SkewNormalParams::mean() const {
    const double delta = alpha / std::sqrt(1.0 + alpha * alpha);
    return xi + omega * delta * std::sqrt(2.0 / math::pi);
}

double SkewNormalParams::variance() const {
    const double delta = alpha / std::sqrt(1.0 + alpha * alpha);
    return omega * omega * (1.0 - 2.0 * delta * delta / math::pi);
}

SkewNormalParams moment_match_skew_normal(double mean, double variance, double alpha) {
    if (!(variance > 0.0)) throw std::domain_error("moment_match_skew_normal: variance <= 0");
    SkewNormalParams p;
    p.alpha = alpha;
    const double delta = alpha / std::sqrt(1.0 + alpha * alpha);
    p.omega = std::sqrt(variance / (1.0 - 2.0 * delta * delta / math::pi));
    p.xi = mean - p.omega * delta * std::sqrt(2.0 / math::pi);
    return p;
}

double sample_skew_normal(const SkewNormalParams& p, RngStream& rng) {
    const double delta = p.alpha / std::sqrt(1.0 + p.alpha * p.alpha);
    const double z0 = rng.next_normal();
    const double z1 = rng.next_normal();
    return p.xi + p.omega * (delta * std::fabs(z0) + std::sqrt(1.0 - delta * delta) * z1);
}

double tau2_from_i2(double i2_percent, double sigma2_typical) {
    if (!(i2_percent >= 0.0 && i2_percent < 100.0)) {
        throw std::domain_error("tau2_from_i2: I2 must be in [0, 100)");
    }
    const double f = i2_percent / 100.0;
    return sigma2_typical * f / (1.0 - f);
}

double smd_variance(double theta, int n_total) {
    const double arm = 0.5 * static_cast<double>(n_total);
    return static_cast<double>(n_total) / (arm * arm) +
           theta * theta / (2.0 * static_cast<double>(n_total));
}

double typical_sigma2(double mu) { return smd_variance(mu, 50); }

IterationData generate_iteration(const ScenarioSpec& spec, int iter_index) {
    spec.validate();
    RngStream rng(spec.seed,
                  {tag_generate, spec.cell_id, static_cast<std::uint64_t>(iter_index)});
    const double tau2 = tau2_from_i2(spec.i2, typical_sigma2(spec.mu));
    const bool skewed = spec.effect_dist == EffectDist::SkewNormal && tau2 > 0.0;
    SkewNormalParams sn;
    if (skewed) sn = moment_match_skew_normal(spec.mu, tau2, spec.alpha);
    const double tau = std::sqrt(tau2);

    auto draw_effect = [&]() {
        if (tau2 == 0.0) return spec.mu;
        if (skewed) return sample_skew_normal(sn, rng);
        return spec.mu + tau * rng.next_normal();
    };

    // Consumption order is fixed: true effects, estimates, futures.
    std::vector<double> true_effects;
    true_effects.reserve(spec.k);
    for (int i = 0; i < spec.k; ++i) true_effects.push_back(draw_effect());

    std::vector<Study> studies;
    studies.reserve(spec.k);
    for (int i = 0; i < spec.k; ++i) {
        const int n = (i < spec.k_large) ? 500 : 50;
        const double gen_sd = std::sqrt(smd_variance(true_effects[i], n));
        Study s;
        s.effect = true_effects[i] + gen_sd * rng.next_normal();
        s.variance = smd_variance(s.effect, n);
        s.label = "study" + std::to_string(i + 1);
        studies.push_back(std::move(s));
    }

    FutureEffects futures;
    futures.values.reserve(spec.n_future);
    for (int j = 0; j < spec.n_future; ++j) futures.values.push_back(draw_effect());

    return IterationData{validate_dataset(std::move(studies), EffectScale::StdMeanDifference),
                         std::move(futures), std::move(true_effects)};
}

namespace {

struct IterRecord {
    bool ok = false;
    double coverage = nan_v;
    double width = nan_v;
    double crps = nan_v;
    double iskew = nan_v;
};

struct IterRow {
    std::vector<IterRecord> per_method;
    double estimate_skew = nan_v;
    double true_skew = nan_v;
};

std::uint64_t method_seed(const ScenarioSpec& spec, int iter, Method m) {
    std::uint64_t s = spec.seed;
    (void)splitmix64(s);
    s ^= tag_method * 0x9E3779B97F4A7C15ull;
    s ^= splitmix64(s) + spec.cell_id;
    s ^= splitmix64(s) + static_cast<std::uint64_t>(iter);
    s ^= splitmix64(s) + static_cast<std::uint64_t>(m);
    return splitmix64(s);
}

// Standard Student-t quantile table for fast inverse-transform sampling.
std::vector<double> t_quantile_grid(double df) {
    std::vector<double> grid(quantile_nodes - 1);
    for (std::size_t j = 1; j < quantile_nodes; ++j) {
        grid[j - 1] =
            math::student_t_quantile(static_cast<double>(j) / quantile_nodes, df);
    }
    return grid;
}

double mean_of(const std::vector<double>& v) {
    double s = 0.0;
    for (double x : v) s += x;
    return s / static_cast<double>(v.size());
}

double mcse_of(const std::vector<double>& v) {
    if (v.size() < 2) return 0.0;
    const double m = mean_of(v);
    double ss = 0.0;
    for (double x : v) ss += (x - m) * (x - m);
    const double n = static_cast<double>(v.size());
    return std::sqrt(ss / (n - 1.0) / n);
}

}  // namespace

ScenarioResult run_scenario(const ScenarioSpec& spec, const std::vector<Method>& methods,
                            int workers) {
    spec.validate();
    if (methods.empty()) throw ValidationError("run_scenario: no methods");
    const bool wants_hts =
        std::find(methods.begin(), methods.end(), Method::Hts) != methods.end();
    std::vector<double> t_grid;
    if (wants_hts && spec.k >= 3) {
        t_grid = t_quantile_grid(static_cast<double>(spec.k - 2));
    }

    std::vector<IterRow> rows(spec.n_iter);

    auto run_iteration = [&](int iter) {
        IterRow row;
        row.per_method.resize(methods.size());
        IterationData data = generate_iteration(spec, iter);
        try {
            row.estimate_skew = fisher_weighted_skewness(data.dataset, true);
        } catch (const std::exception&) {
        }
        try {
            row.true_skew = fisher_skewness(data.true_effects);
        } catch (const std::exception&) {
        }
        double tau2 = nan_v;
        try {
            tau2 = estimate_tau2_reml(data.dataset).value;
        } catch (const std::exception&) {
            rows[iter] = std::move(row);  // all methods non-convergent
            return;
        }
        for (std::size_t mi = 0; mi < methods.size(); ++mi) {
            IterRecord& rec = row.per_method[mi];
            try {
                const Method m = methods[mi];
                PredictionInterval pi;
                double center;
                double crps;
                if (m == Method::PcdFixed || m == Method::PcdSimplified ||
                    m == Method::PcdFull) {
                    const PcdVariant variant = (m == Method::PcdFixed) ? PcdVariant::Fixed
                                               : (m == Method::PcdSimplified)
                                                   ? PcdVariant::Simplified
                                                   : PcdVariant::Full;
                    const PredictiveSamples samples =
                        sample_pcd(data.dataset, variant, tau2, spec.n_draws,
                                   method_seed(spec, iter, m), 1);
                    pi = equi_tailed_interval(samples, 0.95);
                    center = empirical_quantile(samples.draws, 0.5);
                    crps = crps_mc_mean(samples, data.futures);
                    rec.iskew = interval_skewness(pi.lower, pi.upper, center);
                } else if (m == Method::Hts) {
                    const ParametricPredictive p = hts_predictive(data.dataset, tau2);
                    pi = parametric_interval(p, 0.95);
                    center = p.location;
                    PredictiveSamples draws;
                    draws.draws.reserve(spec.n_draws);
                    RngStream rng(method_seed(spec, iter, m));
                    const double df = static_cast<double>(spec.k - 2);
                    for (std::size_t b = 0; b < spec.n_draws; ++b) {
                        const double u = rng.next_u01();
                        const double g = u * quantile_nodes;
                        const std::size_t j = static_cast<std::size_t>(g);
                        double z;
                        if (j < 1 || j >= quantile_nodes - 1) {
                            z = math::student_t_quantile(u, df);
                        } else {
                            const double frac = g - static_cast<double>(j);
                            z = t_grid[j - 1] + frac * (t_grid[j] - t_grid[j - 1]);
                        }
                        draws.draws.push_back(p.location + p.scale * z);
                    }
                    crps = crps_mc_mean(draws, data.futures);
                    rec.iskew = 0.0;  // symmetric construction, exactly
                } else {
                    const ParametricPredictive p = skipka_predictive(data.dataset, tau2);
                    pi = parametric_interval(p, 0.95);
                    center = p.location;
                    double acc = 0.0;
                    for (double y : data.futures.values) {
                        acc += crps_normal_closed(p.location, p.scale, y);
                    }
                    crps = acc / static_cast<double>(data.futures.values.size());
                    rec.iskew = 0.0;
                }
                (void)center;
                rec.coverage = coverage(pi, data.futures).proportion;
                rec.width = pi.width();
                rec.crps = crps;
                rec.ok = true;
            } catch (const std::exception&) {
                rec.ok = false;
            }
        }
        rows[iter] = std::move(row);
    };

    const int n_workers = std::max(1, workers);
    if (n_workers == 1 || spec.n_iter == 1) {
        for (int iter = 0; iter < spec.n_iter; ++iter) run_iteration(iter);
    } else {
        std::vector<std::thread> pool;
        pool.reserve(n_workers);
        for (int w = 0; w < n_workers; ++w) {
            pool.emplace_back([&, w] {
                for (int iter = w; iter < spec.n_iter; iter += n_workers) {
                    run_iteration(iter);
                }
            });
        }
        for (auto& t : pool) t.join();
    }

    ScenarioResult result;
    result.spec = spec;
    for (std::size_t mi = 0; mi < methods.size(); ++mi) {
        MethodAggregate agg;
        std::vector<double> cov, wid, crp, isk, esk, tsk;
        std::vector<int> isk_sign, esk_sign, tsk_sign;
        for (const IterRow& row : rows) {
            const IterRecord& rec = row.per_method[mi];
            if (!rec.ok) {
                ++agg.n_nonconvergent;
                continue;  // case-wise deletion
            }
            ++agg.n_convergent;
            cov.push_back(rec.coverage);
            wid.push_back(rec.width);
            crp.push_back(rec.crps);
            if (std::isfinite(rec.iskew) && std::isfinite(row.estimate_skew)) {
                isk.push_back(rec.iskew);
                esk.push_back(row.estimate_skew);
                isk_sign.push_back(sign_category(rec.iskew));
                esk_sign.push_back(sign_category(row.estimate_skew));
            }
            if (std::isfinite(rec.iskew) && std::isfinite(row.true_skew)) {
                tsk.push_back(rec.iskew);  // paired with true skew below
                tsk_sign.push_back(sign_category(row.true_skew));
            }
        }
        if (!cov.empty()) {
            agg.mean_coverage = mean_of(cov);
            agg.mcse_coverage = mcse_of(cov);
            agg.mean_width = mean_of(wid);
            agg.mcse_width = mcse_of(wid);
            agg.mean_crps = mean_of(crp);
            agg.mcse_crps = mcse_of(crp);
        } else {
            agg.mean_coverage = agg.mean_width = agg.mean_crps = nan_v;
        }
        auto safe_pearson = [](const std::vector<double>& x, const std::vector<double>& y,
                               double& r, double& se) {
            r = se = nan_v;
            if (x.size() < 3) return;
            try {
                r = pearson(x, y);
                se = (1.0 - r * r) / std::sqrt(static_cast<double>(x.size()) - 3.0);
            } catch (const std::exception&) {
            }
        };
        safe_pearson(isk, esk, agg.pearson_estimate_skew, agg.mcse_pearson_estimate);
        {
            // rebuild the true-skew pairing on the same index set
            std::vector<double> ts;
            std::vector<int> is_sign;
            std::size_t t_idx = 0;
            for (const IterRow& row : rows) {
                const IterRecord& rec = row.per_method[mi];
                if (!rec.ok) continue;
                if (std::isfinite(rec.iskew) && std::isfinite(row.true_skew)) {
                    ts.push_back(row.true_skew);
                    is_sign.push_back(sign_category(rec.iskew));
                    ++t_idx;
                }
            }
            (void)t_idx;
            safe_pearson(tsk, ts, agg.pearson_true_skew, agg.mcse_pearson_true);
            agg.kappa_true_skew =
                is_sign.empty() ? nan_v
                                : cohen_kappa(std::span<const int>(is_sign),
                                              std::span<const int>(tsk_sign));
        }
        agg.kappa_estimate_skew =
            isk_sign.empty() ? nan_v
                             : cohen_kappa(std::span<const int>(isk_sign),
                                           std::span<const int>(esk_sign));
        result.methods[methods[mi]] = agg;
    }
    return result;
}

double required_iterations(double variance_estimate, double mcse_target) {
    if (!(variance_estimate >= 0.0) || !(mcse_target > 0.0)) {
        throw std::domain_error("required_iterations: invalid arguments");
    }
    return variance_estimate / (mcse_target * mcse_target);
}

}  // namespace edgemeta
