#include "edgemeta/heterogeneity.hpp"

#include <cmath>
#include <string>

#include "edgemeta/math.hpp"

namespace edgemeta {

double ivw_mean(const MetaDataset& data, double tau2) {
    double sw = 0.0, swx = 0.0;
    for (const Study& s : data.studies()) {
        const double w = 1.0 / (s.variance + tau2);
        sw += w;
        swx += w * s.effect;
    }
    return swx / sw;
}

double generalized_q(const MetaDataset& data, double tau2) {
    const double mu = ivw_mean(data, tau2);
    double q = 0.0;
    for (const Study& s : data.studies()) {
        const double r = s.effect - mu;
        q += r * r / (s.variance + tau2);
    }
    return q;
}

namespace {

// Q and its derivative in tau2; dQ = -sum w_i^2 (theta_i - mu)^2 because the
// mu' cross term vanishes at the weighted mean.
std::pair<double, double> q_and_deriv(const MetaDataset& data, double tau2) {
    const double mu = ivw_mean(data, tau2);
    double q = 0.0, dq = 0.0;
    for (const Study& s : data.studies()) {
        const double w = 1.0 / (s.variance + tau2);
        const double r = s.effect - mu;
        q += w * r * r;
        dq -= w * w * r * r;
    }
    return {q, dq};
}

}  // namespace

double invert_generalized_q(const MetaDataset& data, double target) {
    if (target >= generalized_q(data, 0.0)) return 0.0;
    double upper = 1.0;
    const double cap = std::ldexp(1.0, 60);
    while (generalized_q(data, upper) > target) {
        upper *= 2.0;
        if (upper > cap) {
            throw NumericError("invert_generalized_q: bracket expansion failed");
        }
    }
    // Newton with bisection safeguard; Q is monotone decreasing.
    double lo = 0.0, hi = upper, x = 0.5 * upper;
    for (int it = 0; it < 200; ++it) {
        const auto [q, dq] = q_and_deriv(data, x);
        if (std::fabs(q - target) < 1e-8) return x;
        if (q > target) lo = x; else hi = x;
        double next = (dq < 0.0) ? x - (q - target) / dq : 0.5 * (lo + hi);
        if (!(next > lo && next < hi)) next = 0.5 * (lo + hi);
        x = next;
    }
    return x;
}

Tau2Estimate estimate_tau2_pm(const MetaDataset& data) {
    const double k = static_cast<double>(data.size());
    Tau2Estimate est;
    est.method = Tau2Method::PauleMandel;
    est.value = invert_generalized_q(data, k - 1.0);
    return est;
}

namespace {

struct RemlTerms {
    double score;
    double info;
};

RemlTerms reml_score_info(const MetaDataset& data, double tau2) {
    double sw = 0.0, sw2 = 0.0, sw3 = 0.0;
    for (const Study& s : data.studies()) {
        const double w = 1.0 / (s.variance + tau2);
        sw += w;
        sw2 += w * w;
        sw3 += w * w * w;
    }
    const double mu = ivw_mean(data, tau2);
    double swr = 0.0;  // sum w_i^2 (theta_i - mu)^2
    for (const Study& s : data.studies()) {
        const double w = 1.0 / (s.variance + tau2);
        const double r = s.effect - mu;
        swr += w * w * r * r;
    }
    RemlTerms t;
    t.score = 0.5 * (swr - sw + sw2 / sw);
    t.info = 0.5 * (sw2 - 2.0 * sw3 / sw + (sw2 / sw) * (sw2 / sw));
    return t;
}

double reml_loglik(const MetaDataset& data, double tau2) {
    double sw = 0.0, logdet = 0.0;
    const double mu = ivw_mean(data, tau2);
    double rss = 0.0;
    for (const Study& s : data.studies()) {
        const double v = s.variance + tau2;
        const double w = 1.0 / v;
        sw += w;
        logdet += std::log(v);
        const double r = s.effect - mu;
        rss += w * r * r;
    }
    return -0.5 * (logdet + std::log(sw) + rss);
}

double dl_start(const MetaDataset& data) {
    const double k = static_cast<double>(data.size());
    double su = 0.0, su2 = 0.0;
    for (const Study& s : data.studies()) {
        const double u = 1.0 / s.variance;
        su += u;
        su2 += u * u;
    }
    const double q0 = generalized_q(data, 0.0);
    const double denom = su - su2 / su;
    if (denom <= 0.0) return 0.0;
    return std::max(0.0, (q0 - (k - 1.0)) / denom);
}

}  // namespace

Tau2Estimate estimate_tau2_reml(const MetaDataset& data, int max_iter, double tol) {
    Tau2Estimate est;
    est.method = Tau2Method::Reml;
    if (reml_score_info(data, 0.0).score <= 0.0) {
        est.value = 0.0;
        return est;
    }
    double tau2 = std::max(dl_start(data), 1e-8);
    double ll = reml_loglik(data, tau2);
    for (int it = 0; it < max_iter; ++it) {
        const RemlTerms t = reml_score_info(data, tau2);
        if (std::fabs(t.score) < tol) {
            est.value = tau2;
            return est;
        }
        double step = t.score / t.info;
        // Step-halving: keep tau2 >= 0 and the restricted likelihood non-decreasing.
        for (int h = 0; h < 60; ++h) {
            const double cand = std::max(0.0, tau2 + step);
            const double cand_ll = reml_loglik(data, cand);
            if (cand_ll >= ll - 1e-14) {
                tau2 = cand;
                ll = cand_ll;
                break;
            }
            step *= 0.5;
        }
        if (tau2 == 0.0 && reml_score_info(data, 0.0).score <= 0.0) {
            est.value = 0.0;
            return est;
        }
    }
    throw NumericError("estimate_tau2_reml: no convergence after " +
                       std::to_string(max_iter) + " iterations (last iterate " +
                       std::to_string(tau2) + ")");
}

std::pair<double, double> tau2_q_profile_ci(const MetaDataset& data, double level) {
    if (!(level > 0.0 && level < 1.0)) {
        throw std::domain_error("tau2_q_profile_ci: level outside (0, 1)");
    }
    const double df = static_cast<double>(data.size()) - 1.0;
    const double q_hi = math::chi2_quantile(0.5 * (1.0 + level), df);
    const double q_lo = math::chi2_quantile(0.5 * (1.0 - level), df);
    const double q0 = generalized_q(data, 0.0);
    if (q0 < q_lo) return {0.0, 0.0};  // Q(0) below lower quantile target
    const double lower = invert_generalized_q(data, q_hi);
    const double upper = invert_generalized_q(data, q_lo);
    return {lower, upper};
}

double higgins_i2(const MetaDataset& data) {
    const double k = static_cast<double>(data.size());
    const double q0 = generalized_q(data, 0.0);
    if (q0 <= 0.0) return 0.0;
    return std::max(0.0, (q0 - (k - 1.0)) / q0) * 100.0;
}

MeanEstimate ivw_mean_hksj(const MetaDataset& data, double tau2, double level) {
    const std::size_t k = data.size();
    if (k < 2) throw ValidationError("ivw_mean_hksj: k < 2 gives degenerate df");
    MeanEstimate est;
    est.df = static_cast<int>(k) - 1;
    est.level = level;
    double sw = 0.0;
    est.value = ivw_mean(data, tau2);
    double swr = 0.0;
    for (const Study& s : data.studies()) {
        const double w = 1.0 / (s.variance + tau2);
        sw += w;
        const double r = s.effect - est.value;
        swr += w * r * r;
    }
    est.se_ivw = std::sqrt(1.0 / sw);
    est.se_hksj = std::sqrt(swr / (static_cast<double>(est.df) * sw));
    const double tq = math::student_t_quantile(0.5 * (1.0 + level), est.df);
    est.ci = {est.value - tq * est.se_hksj, est.value + tq * est.se_hksj};
    return est;
}

double sample_tau2(const MetaDataset& data, RngStream& rng) {
    const double df = static_cast<double>(data.size()) - 1.0;
    const double w = rng.next_chi2(df);
    return invert_generalized_q(data, w);
}

Tau2Estimate estimate_tau2(const MetaDataset& data, Tau2Method method, double ci_level) {
    Tau2Estimate est = (method == Tau2Method::PauleMandel) ? estimate_tau2_pm(data)
                                                           : estimate_tau2_reml(data);
    est.ci = tau2_q_profile_ci(data, ci_level);
    est.ci_level = ci_level;
    est.i2 = higgins_i2(data);
    return est;
}

}  // namespace edgemeta
