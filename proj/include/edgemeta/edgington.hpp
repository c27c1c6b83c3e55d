#pragma once

// Edgington's confidence distribution of the average effect, conditional on a
// between-study variance: study p-value functions combined through the sum of
// p-values, with the Irwin-Hall distribution supplying the combined CDF.

#include "edgemeta/data_model.hpp"

namespace edgemeta {

// Phi((mu - effect) / sqrt(tau2 + variance)); increasing in mu.
double study_p_value(const Study& study, double mu, double tau2);

// P(U_1 + ... + U_k <= s) for iid standard uniforms. Exact alternating sum
// (compensated) for k <= irwin_hall_exact_max; N(k/2, k/12) beyond.
inline constexpr unsigned irwin_hall_exact_max = 15;
double irwin_hall_cdf(double s, unsigned k);
double irwin_hall_pdf(double s, unsigned k);

class EdgingtonCD {
public:
    // The dataset must outlive the handle.
    EdgingtonCD(const MetaDataset& data, double tau2);

    double tau2() const { return tau2_; }
    const MetaDataset& dataset() const { return *data_; }

    double cdf(double mu) const;
    double density(double mu) const;

    // Unique mu with |cdf(mu) - q| < 1e-9.
    double quantile(double q) const;

    // 2 * min{cdf(mu0), 1 - cdf(mu0)}, clamped to (0, 1].
    double two_sided_p(double mu0) const;

private:
    double p_sum(double mu) const;

    const MetaDataset* data_;
    double tau2_;
    std::vector<double> sd_;  // sqrt(tau2 + variance_i)
    double bracket_lo_, bracket_hi_;
};

}  // namespace edgemeta
