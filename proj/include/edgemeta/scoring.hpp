#pragma once

// Evaluation metrics: CRPS (Monte Carlo approximation plus a closed-form
// normal reference), interval coverage against future-effect arrays, interval
// and Fisher skewness, Pearson correlation and Cohen's kappa on skew signs.

#include <span>
#include <vector>

#include "edgemeta/data_model.hpp"
#include "edgemeta/predictive.hpp"

namespace edgemeta {

struct FutureEffects {
    std::vector<double> values;  // J >= 1, finite
};

// (1/B) sum |x_b - theta0| - (1/(2(B-1))) sum_{b<B} |x_b - x_{b+1}|,
// draws taken in stored order.
double crps_mc(const PredictiveSamples& samples, double theta0);

// Mean CRPS over many outcomes; algebraically equal to averaging crps_mc
// (the first term uses sorted prefix sums, the second is outcome-free).
double crps_mc_mean(const PredictiveSamples& samples, const FutureEffects& futures);

// sigma * (z(2 Phi(z) - 1) + 2 phi(z) - 1/sqrt(pi)), z = (y - mu)/sigma.
double crps_normal_closed(double mu, double sigma, double y);

struct CoverageResult {
    double proportion = 0.0;
    double variance = 0.0;  // proportion (1 - proportion) / J
};
CoverageResult coverage(const PredictionInterval& interval, const FutureEffects& futures);

// (upper + lower - 2 center) / (upper - lower).
double interval_skewness(double lower, double upper, double center);

// Third standardized weighted moment about the fixed-effect IVW mean; weights
// 1/variance_i, or all one when weighted = false.
double fisher_weighted_skewness(const MetaDataset& data, bool weighted = true);

// Same coefficient on a plain sample (weights one, arithmetic mean center).
double fisher_skewness(std::span<const double> values);

double pearson(std::span<const double> x, std::span<const double> y);

// Kappa over the three categories {-1, 0, +1}; 0 when chance agreement is 1.
double cohen_kappa(std::span<const int> a, std::span<const int> b);

int sign_category(double x);

}  // namespace edgemeta
