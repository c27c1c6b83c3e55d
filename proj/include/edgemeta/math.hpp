#pragma once

// Scalar special functions used across the library: normal distribution,
// regularized incomplete gamma/beta, chi-squared and Student-t CDFs and
// quantiles. All quantiles are accurate to near machine precision.

#include <cstdint>

namespace edgemeta::math {

inline constexpr double pi = 3.14159265358979323846;

double normal_pdf(double z);
double normal_cdf(double z);

// Wichura's AS241 algorithm, |error| < 1e-15 over (0, 1).
double normal_quantile(double p);

// Regularized lower incomplete gamma P(a, x), relative error < 1e-13.
double reg_inc_gamma(double a, double x);

// Regularized incomplete beta I_x(a, b).
double reg_inc_beta(double a, double b, double x);

double chi2_cdf(double x, double df);
double chi2_quantile(double p, double df);

double student_t_cdf(double x, double df);
double student_t_quantile(double p, double df);

// Integer power by repeated squaring (n >= 0).
double ipow(double x, unsigned n);

double log_binomial(unsigned n, unsigned k);

}  // namespace edgemeta::math
