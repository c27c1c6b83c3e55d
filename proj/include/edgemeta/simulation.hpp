#pragma once

// Simulation engine: data-generating mechanism (normal or moment-matched
// skew-normal true effects, SMD-style standard errors), per-iteration method
// evaluation, and aggregation with Monte Carlo standard errors.

#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include "edgemeta/data_model.hpp"
#include "edgemeta/predictive.hpp"
#include "edgemeta/scoring.hpp"

namespace edgemeta {

enum class EffectDist { Normal, SkewNormal };

enum class Method { PcdFixed, PcdSimplified, PcdFull, Hts, Skipka };

std::string method_name(Method m);

struct ScenarioSpec {
    int k = 5;
    double i2 = 0.0;  // percent, in [0, 100)
    int k_large = 0;
    EffectDist effect_dist = EffectDist::Normal;
    double mu = -0.3;
    double alpha = -4.0;  // skew-normal shape
    int n_iter = 100;
    int n_future = 10000;
    std::size_t n_draws = default_draws;
    std::uint64_t seed = 0;
    std::uint64_t cell_id = 0;  // position in the grid, keys RNG streams

    void validate() const;
};

struct SkewNormalParams {
    double xi = 0.0;
    double omega = 1.0;
    double alpha = 0.0;
    double mean() const;
    double variance() const;
};

SkewNormalParams moment_match_skew_normal(double mean, double variance, double alpha);

double sample_skew_normal(const SkewNormalParams& p, RngStream& rng);

// tau2 = sigma2_typical * (i2/100) / (1 - i2/100).
double tau2_from_i2(double i2_percent, double sigma2_typical);

// Two-arm SMD variance with n/2 per arm:
// (nt + nc)/(nt * nc) + theta^2 / (2 (nt + nc)).
double smd_variance(double theta, int n_total);

// Typical within-study variance used for the I2 -> tau2 mapping (n = 50
// studies at the scenario mean; large studies do not move the target).
double typical_sigma2(double mu);

struct IterationData {
    MetaDataset dataset;
    FutureEffects futures;
    std::vector<double> true_effects;
};

IterationData generate_iteration(const ScenarioSpec& spec, int iter_index);

struct MethodAggregate {
    double mean_coverage = 0.0, mcse_coverage = 0.0;
    double mean_width = 0.0, mcse_width = 0.0;
    double mean_crps = 0.0, mcse_crps = 0.0;
    double pearson_estimate_skew = 0.0, mcse_pearson_estimate = 0.0;
    double pearson_true_skew = 0.0, mcse_pearson_true = 0.0;
    double kappa_estimate_skew = 0.0;
    double kappa_true_skew = 0.0;
    int n_convergent = 0;
    int n_nonconvergent = 0;
};

struct ScenarioResult {
    ScenarioSpec spec;
    std::map<Method, MethodAggregate> methods;
};

ScenarioResult run_scenario(const ScenarioSpec& spec, const std::vector<Method>& methods,
                            int workers = 1);

// Planning utility: n_sim = variance / mcse_target^2.
double required_iterations(double variance_estimate, double mcse_target);

}  // namespace edgemeta
