#include "edgemeta/scoring.hpp"

#include <algorithm>
#include <cmath>

#include "edgemeta/heterogeneity.hpp"
#include "edgemeta/math.hpp"

namespace edgemeta {

namespace {

double consecutive_diff_term(const std::vector<double>& draws) {
    const std::size_t n = draws.size();
    double acc = 0.0;
    for (std::size_t b = 0; b + 1 < n; ++b) acc += std::fabs(draws[b] - draws[b + 1]);
    return acc / (2.0 * static_cast<double>(n - 1));
}

}  // namespace

double crps_mc(const PredictiveSamples& samples, double theta0) {
    const std::size_t n = samples.draws.size();
    if (n < 2) throw std::domain_error("crps_mc: need at least two draws");
    double abs_term = 0.0;
    for (double d : samples.draws) abs_term += std::fabs(d - theta0);
    return abs_term / static_cast<double>(n) - consecutive_diff_term(samples.draws);
}

double crps_mc_mean(const PredictiveSamples& samples, const FutureEffects& futures) {
    const std::size_t n = samples.draws.size();
    if (n < 2) throw std::domain_error("crps_mc_mean: need at least two draws");
    if (futures.values.empty()) throw std::domain_error("crps_mc_mean: no outcomes");
    std::vector<double> sorted = samples.draws;
    std::sort(sorted.begin(), sorted.end());
    std::vector<double> prefix(n + 1, 0.0);
    for (std::size_t i = 0; i < n; ++i) prefix[i + 1] = prefix[i] + sorted[i];
    const double nd = static_cast<double>(n);

    double mean_abs = 0.0;
    for (double y : futures.values) {
        const auto it = std::lower_bound(sorted.begin(), sorted.end(), y);
        const std::size_t m = static_cast<std::size_t>(it - sorted.begin());
        const double md = static_cast<double>(m);
        // sum over draws below y plus sum over draws above y
        const double below = md * y - prefix[m];
        const double above = (prefix[n] - prefix[m]) - (nd - md) * y;
        mean_abs += (below + above) / nd;
    }
    mean_abs /= static_cast<double>(futures.values.size());
    return mean_abs - consecutive_diff_term(samples.draws);
}

double crps_normal_closed(double mu, double sigma, double y) {
    if (!(sigma > 0.0)) throw std::domain_error("crps_normal_closed: sigma <= 0");
    const double z = (y - mu) / sigma;
    return sigma * (z * (2.0 * math::normal_cdf(z) - 1.0) + 2.0 * math::normal_pdf(z) -
                    1.0 / std::sqrt(math::pi));
}

CoverageResult coverage(const PredictionInterval& interval, const FutureEffects& futures) {
    if (futures.values.empty()) throw std::domain_error("coverage: no future effects");
    std::size_t hits = 0;
    for (double v : futures.values) {
        if (v >= interval.lower && v <= interval.upper) ++hits;
    }
    CoverageResult r;
    const double j = static_cast<double>(futures.values.size());
    r.proportion = static_cast<double>(hits) / j;
    r.variance = r.proportion * (1.0 - r.proportion) / j;
    return r;
}

double interval_skewness(double lower, double upper, double center) {
    if (!(upper > lower)) throw std::domain_error("interval_skewness: upper <= lower");
    return (upper + lower - 2.0 * center) / (upper - lower);
}

namespace {

double weighted_third_moment_skew(std::span<const double> values,
                                  std::span<const double> weights) {
    double sw = 0.0, swx = 0.0;
    for (std::size_t i = 0; i < values.size(); ++i) {
        sw += weights[i];
        swx += weights[i] * values[i];
    }
    const double center = swx / sw;
    double m2 = 0.0, m3 = 0.0;
    for (std::size_t i = 0; i < values.size(); ++i) {
        const double r = values[i] - center;
        m2 += weights[i] * r * r;
        m3 += weights[i] * r * r * r;
    }
    if (m2 <= 0.0) throw NumericError("fisher skewness: zero spread");
    return m3 * std::sqrt(sw) / std::pow(m2, 1.5);
}

}  // namespace

double fisher_weighted_skewness(const MetaDataset& data, bool weighted) {
    std::vector<double> values, weights;
    values.reserve(data.size());
    weights.reserve(data.size());
    for (const Study& s : data.studies()) {
        values.push_back(s.effect);
        weights.push_back(weighted ? 1.0 / s.variance : 1.0);
    }
    return weighted_third_moment_skew(values, weights);
}

double fisher_skewness(std::span<const double> values) {
    if (values.size() < 2) throw std::domain_error("fisher_skewness: need at least 2 values");
    const std::vector<double> weights(values.size(), 1.0);
    return weighted_third_moment_skew(values, weights);
}

double pearson(std::span<const double> x, std::span<const double> y) {
    if (x.size() != y.size() || x.size() < 2) {
        throw std::domain_error("pearson: need equal lengths >= 2");
    }
    const double n = static_cast<double>(x.size());
    double mx = 0.0, my = 0.0;
    for (std::size_t i = 0; i < x.size(); ++i) {
        mx += x[i];
        my += y[i];
    }
    mx /= n;
    my /= n;
    double sxx = 0.0, syy = 0.0, sxy = 0.0;
    for (std::size_t i = 0; i < x.size(); ++i) {
        const double dx = x[i] - mx, dy = y[i] - my;
        sxx += dx * dx;
        syy += dy * dy;
        sxy += dx * dy;
    }
    if (sxx <= 0.0 || syy <= 0.0) throw NumericError("pearson: zero variance");
    return sxy / std::sqrt(sxx * syy);
}

int sign_category(double x) {
    if (x > 0.0) return 1;
    if (x < 0.0) return -1;
    return 0;
}

double cohen_kappa(std::span<const int> a, std::span<const int> b) {
    if (a.size() != b.size() || a.empty()) {
        throw std::domain_error("cohen_kappa: need equal nonempty arrays");
    }
    const double n = static_cast<double>(a.size());
    double table[3][3] = {};
    auto idx = [](int c) {
        if (c != -1 && c != 0 && c != 1) {
            throw std::domain_error("cohen_kappa: categories must be in {-1, 0, 1}");
        }
        return c + 1;
    };
    for (std::size_t i = 0; i < a.size(); ++i) table[idx(a[i])][idx(b[i])] += 1.0;
    double po = 0.0, pe = 0.0;
    for (int c = 0; c < 3; ++c) {
        po += table[c][c] / n;
        double row = 0.0, col = 0.0;
        for (int d = 0; d < 3; ++d) {
            row += table[c][d];
            col += table[d][c];
        }
        pe += (row / n) * (col / n);
    }
    if (pe >= 1.0) return 0.0;  // degenerate agreement convention
    return (po - pe) / (1.0 - pe);
}

}  // namespace edgemeta
