#pragma once

// Generalized heterogeneity statistic Q(tau2), tau2 point estimators
// (Paule-Mandel, REML), Q-profile confidence interval, Higgins' I2, the
// IVW mean with HKSJ standard error, and inverse-transform sampling of
// tau2 from its confidence distribution.

#include <optional>
#include <utility>

#include "edgemeta/data_model.hpp"
#include "edgemeta/rng.hpp"

namespace edgemeta {

class NumericError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

enum class Tau2Method { PauleMandel, Reml };

struct Tau2Estimate {
    double value = 0.0;
    Tau2Method method = Tau2Method::PauleMandel;
    std::optional<std::pair<double, double>> ci;  // at `ci_level` when present
    double ci_level = 0.95;
    std::optional<double> i2;  // percent
};

struct MeanEstimate {
    double value = 0.0;    // IVW mean under weights 1/(sigma2_i + tau2)
    double se_ivw = 0.0;   // sqrt(1 / sum of weights)
    double se_hksj = 0.0;
    std::pair<double, double> ci{0.0, 0.0};  // t_{k-1}-based HKSJ interval
    int df = 0;
    double level = 0.95;
};

// Weighted mean of effects under weights 1/(sigma2_i + tau2).
double ivw_mean(const MetaDataset& data, double tau2);

// Q(tau2) = sum_i (theta_i - mu_ivw(tau2))^2 / (sigma2_i + tau2).
double generalized_q(const MetaDataset& data, double tau2);

Tau2Estimate estimate_tau2_pm(const MetaDataset& data);
Tau2Estimate estimate_tau2_reml(const MetaDataset& data, int max_iter = 100,
                                double tol = 1e-8);

// Q-profile interval: Q(tau2) equated to chi2_{k-1} quantiles, truncated at 0.
std::pair<double, double> tau2_q_profile_ci(const MetaDataset& data, double level);

double higgins_i2(const MetaDataset& data);  // percent

MeanEstimate ivw_mean_hksj(const MetaDataset& data, double tau2, double level);

// One draw from the confidence distribution of tau2: W ~ chi2_{k-1},
// solve Q(tau2) = W (0 when W >= Q(0)).
double sample_tau2(const MetaDataset& data, RngStream& rng);

// Deterministic inversion used by sample_tau2 and tests: the tau2 with
// Q(tau2) = target, or 0 when target >= Q(0).
double invert_generalized_q(const MetaDataset& data, double target);

// PM estimate with Q-profile CI and I2 attached, the default report surface.
Tau2Estimate estimate_tau2(const MetaDataset& data, Tau2Method method, double ci_level);

}  // namespace edgemeta
