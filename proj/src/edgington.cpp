#include "edgemeta/edgington.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "edgemeta/heterogeneity.hpp"
#include "edgemeta/math.hpp"

namespace edgemeta {

double study_p_value(const Study& study, double mu, double tau2) {
    return math::normal_cdf((mu - study.effect) / std::sqrt(tau2 + study.variance));
}

namespace {

// Compensated alternating sum of (-1)^j C(k,j) (s-j)^pow / pow!.
double irwin_hall_sum(double s, unsigned k, unsigned pow) {
    double sum = 0.0, comp = 0.0;
    const double log_fact = std::lgamma(static_cast<double>(pow) + 1.0);
    const unsigned jmax = static_cast<unsigned>(std::floor(s));
    for (unsigned j = 0; j <= jmax && j <= k; ++j) {
        const double mag = std::exp(math::log_binomial(k, j) - log_fact) *
                           math::ipow(s - j, pow);
        const double term = (j % 2 == 0) ? mag : -mag;
        const double y = term - comp;
        const double t = sum + y;
        comp = (t - sum) - y;
        sum = t;
    }
    return sum;
}

}  // namespace

double irwin_hall_cdf(double s, unsigned k) {
    if (k < 1) throw std::domain_error("irwin_hall_cdf: k < 1");
    if (s <= 0.0) return 0.0;
    if (s >= static_cast<double>(k)) return 1.0;
    double v;
    if (k <= irwin_hall_exact_max) {
        v = irwin_hall_sum(s, k, k);
    } else {
        const double kk = static_cast<double>(k);
        v = math::normal_cdf((s - 0.5 * kk) / std::sqrt(kk / 12.0));
    }
    return std::clamp(v, 0.0, 1.0);
}

double irwin_hall_pdf(double s, unsigned k) {
    if (k < 1) throw std::domain_error("irwin_hall_pdf: k < 1");
    if (s <= 0.0 || s >= static_cast<double>(k)) return 0.0;
    if (k == 1) return 1.0;
    double v;
    if (k <= irwin_hall_exact_max) {
        v = irwin_hall_sum(s, k, k - 1);
    } else {
        const double kk = static_cast<double>(k);
        const double sd = std::sqrt(kk / 12.0);
        v = math::normal_pdf((s - 0.5 * kk) / sd) / sd;
    }
    return std::max(v, 0.0);
}

EdgingtonCD::EdgingtonCD(const MetaDataset& data, double tau2)
    : data_(&data), tau2_(tau2) {
    if (tau2 < 0.0) throw std::domain_error("EdgingtonCD: tau2 < 0");
    sd_.reserve(data.size());
    double lo = data[0].effect, hi = data[0].effect, max_sd = 0.0;
    for (const Study& s : data.studies()) {
        const double sd = std::sqrt(tau2 + s.variance);
        sd_.push_back(sd);
        lo = std::min(lo, s.effect);
        hi = std::max(hi, s.effect);
        max_sd = std::max(max_sd, sd);
    }
    bracket_lo_ = lo - 10.0 * max_sd;
    bracket_hi_ = hi + 10.0 * max_sd;
}

double EdgingtonCD::p_sum(double mu) const {
    const auto& studies = data_->studies();
    double s = 0.0;
    for (std::size_t i = 0; i < studies.size(); ++i) {
        s += math::normal_cdf((mu - studies[i].effect) / sd_[i]);
    }
    return s;
}

double EdgingtonCD::cdf(double mu) const {
    return irwin_hall_cdf(p_sum(mu), static_cast<unsigned>(data_->size()));
}

double EdgingtonCD::density(double mu) const {
    const auto& studies = data_->studies();
    double s = 0.0, slope = 0.0;
    for (std::size_t i = 0; i < studies.size(); ++i) {
        const double z = (mu - studies[i].effect) / sd_[i];
        s += math::normal_cdf(z);
        slope += math::normal_pdf(z) / sd_[i];
    }
    return irwin_hall_pdf(s, static_cast<unsigned>(data_->size())) * slope;
}

double EdgingtonCD::quantile(double q) const {
    if (!(q > 0.0 && q < 1.0)) throw std::domain_error("EdgingtonCD::quantile: q outside (0, 1)");
    double lo = bracket_lo_, hi = bracket_hi_;
    const double span = hi - lo;
    for (int e = 0; cdf(lo) > q; ++e) {
        lo -= span * std::ldexp(1.0, e);
        if (e > 60) throw NumericError("EdgingtonCD::quantile: bracket failure (low)");
    }
    for (int e = 0; cdf(hi) < q; ++e) {
        hi += span * std::ldexp(1.0, e);
        if (e > 60) throw NumericError("EdgingtonCD::quantile: bracket failure (high)");
    }
    // Newton on the CDF with bisection safeguard.
    double x = 0.5 * (lo + hi);
    for (int it = 0; it < 200; ++it) {
        const double f = cdf(x) - q;
        if (std::fabs(f) < 1e-9) return x;
        if (f > 0.0) hi = x; else lo = x;
        const double d = density(x);
        double next = (d > 0.0) ? x - f / d : 0.5 * (lo + hi);
        if (!(next > lo && next < hi)) next = 0.5 * (lo + hi);
        x = next;
    }
    return x;
}

double EdgingtonCD::two_sided_p(double mu0) const {
    const double c = cdf(mu0);
    const double p = 2.0 * std::min(c, 1.0 - c);
    return std::clamp(p, std::numeric_limits<double>::min(), 1.0);
}

}  // namespace edgemeta
