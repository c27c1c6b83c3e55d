#pragma once

// Predictive distributions of a future study effect: the three Monte Carlo
// samplers built on Edgington's confidence distribution (fixed / simplified /
// full handling of tau2 uncertainty), closed-form comparators (Skipka, HTS),
// the Wang ensemble, interval summaries and confidence probabilities.

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "edgemeta/data_model.hpp"
#include "edgemeta/edgington.hpp"
#include "edgemeta/heterogeneity.hpp"

namespace edgemeta {

enum class PcdVariant { Fixed, Simplified, Full };
enum class SampleSource { PcdFixed, PcdSimplified, PcdFull, Wang, CdMu };

struct PredictiveSamples {
    std::vector<double> draws;
    SampleSource source = SampleSource::PcdFixed;
    std::uint64_t seed = 0;
    std::optional<double> tau2_used;  // empty when tau2 was sampled per draw
};

enum class PredictiveFamily { Normal, LocationScaleT };

struct ParametricPredictive {
    PredictiveFamily family = PredictiveFamily::Normal;
    double location = 0.0;
    double scale = 0.0;  // > 0
    std::optional<int> df;
};

enum class IntervalKind { EquiTailed, Hcdp };

struct PredictionInterval {
    double lower = 0.0;
    double upper = 0.0;
    double level = 0.95;
    IntervalKind kind = IntervalKind::EquiTailed;
    double width() const { return upper - lower; }
};

inline constexpr std::size_t default_draws = 100000;

// Table-driven Monte Carlo sampler; identical (dataset, variant, tau2_hat, B,
// seed) give bit-identical draws regardless of thread count.
PredictiveSamples sample_pcd(const MetaDataset& data, PcdVariant variant, double tau2_hat,
                             std::size_t n_draws, std::uint64_t seed, int n_threads = 0);

// Draws of the average effect from the tau2-marginalized Edgington confidence
// distribution: tau2* from its confidence distribution, then mu* from the CD
// conditional on tau2*. This is the mu stage of the full sampler on its own;
// its mean and quantiles summarize the average effect under both sources of
// estimation uncertainty.
PredictiveSamples sample_mu_marginal(const MetaDataset& data, std::size_t n_draws,
                                     std::uint64_t seed, int n_threads = 0);

ParametricPredictive skipka_predictive(const MetaDataset& data, double tau2_hat);
ParametricPredictive hts_predictive(const MetaDataset& data, double tau2_hat);

// Louis ensemble estimates shrunk toward the IVW mean; k deterministic draws.
PredictiveSamples wang_ensemble(const MetaDataset& data, double tau2_hat);

// Type-7 (linear interpolation of order statistics) quantile of unsorted data.
double empirical_quantile(std::vector<double> values, double p);

PredictionInterval equi_tailed_interval(const PredictiveSamples& samples, double level);

// Shortest window containing ceil(level * B) sorted draws; ties take the
// smallest left index.
PredictionInterval hcdp_interval(const PredictiveSamples& samples, double level);

enum class Direction { GreaterEqual, LessEqual };
double confidence_probability(const PredictiveSamples& samples, double delta,
                              Direction direction);

PredictionInterval parametric_interval(const ParametricPredictive& p, double level);

}  // namespace edgemeta
