#include <algorithm>
#include <cmath>
#include <numeric>

#include <doctest.h>

#include "edgemeta/math.hpp"
#include "edgemeta/predictive.hpp"

using namespace edgemeta;

namespace {

MetaDataset d3() {
    return validate_dataset({{-0.5, 0.04, "", {}}, {0.0, 0.09, "", {}}, {0.4, 0.16, "", {}}});
}

PredictiveSamples wrap(std::vector<double> draws) {
    PredictiveSamples s;
    s.draws = std::move(draws);
    return s;
}

}  // namespace

TEST_CASE("sample_pcd is deterministic and thread-count independent") {
    const MetaDataset data = d3();
    for (PcdVariant v : {PcdVariant::Fixed, PcdVariant::Simplified, PcdVariant::Full}) {
        const PredictiveSamples a = sample_pcd(data, v, 0.05, 20000, 42, 1);
        const PredictiveSamples b = sample_pcd(data, v, 0.05, 20000, 42, 4);
        CHECK(a.draws == b.draws);
        const PredictiveSamples c = sample_pcd(data, v, 0.05, 20000, 43, 1);
        CHECK(a.draws != c.draws);
    }
}

TEST_CASE("fixed variant at tau2 = 0 reproduces the CD (KS test)") {
    // With tau2_hat = 0 the future-effect noise vanishes, so the draws are
    // straight inverse-transform samples of the CD itself.
    const MetaDataset data = d3();
    const EdgingtonCD cd(data, 0.0);
    const std::size_t n = 100000;
    PredictiveSamples s = sample_pcd(data, PcdVariant::Fixed, 0.0, n, 7);
    std::sort(s.draws.begin(), s.draws.end());
    double ks = 0.0;
    for (std::size_t i = 0; i < n; i += 97) {
        const double f = cd.cdf(s.draws[i]);
        const double emp_lo = static_cast<double>(i) / n;
        const double emp_hi = static_cast<double>(i + 1) / n;
        ks = std::max({ks, std::fabs(f - emp_lo), std::fabs(f - emp_hi)});
    }
    CHECK(ks < 0.01);
}

TEST_CASE("variant metadata") {
    const MetaDataset data = d3();
    const PredictiveSamples f = sample_pcd(data, PcdVariant::Fixed, 0.05, 200, 1);
    CHECK(f.source == SampleSource::PcdFixed);
    CHECK(f.tau2_used.has_value());
    CHECK(*f.tau2_used == 0.05);
    const PredictiveSamples full = sample_pcd(data, PcdVariant::Full, 0.05, 200, 1);
    CHECK(full.source == SampleSource::PcdFull);
    CHECK(!full.tau2_used.has_value());  // tau2 resampled per draw
}

TEST_CASE("full variant spreads wider than fixed") {
    const MetaDataset data = d3();
    auto sd = [](const std::vector<double>& v) {
        const double m = std::accumulate(v.begin(), v.end(), 0.0) / v.size();
        double s2 = 0.0;
        for (double x : v) s2 += (x - m) * (x - m);
        return std::sqrt(s2 / (v.size() - 1.0));
    };
    const PredictiveSamples fx = sample_pcd(data, PcdVariant::Fixed, 0.05, 50000, 11);
    const PredictiveSamples fu = sample_pcd(data, PcdVariant::Full, 0.05, 50000, 11);
    CHECK(sd(fu.draws) > sd(fx.draws));
}

TEST_CASE("Wang ensemble shrinkage, hand-computed") {
    const MetaDataset data = d3();
    const double tau2 = 0.05;
    const double mu = ivw_mean(data, tau2);
    const PredictiveSamples ens = wang_ensemble(data, tau2);
    REQUIRE(ens.draws.size() == 3);
    CHECK(ens.draws[0] ==
          doctest::Approx(mu + std::sqrt(0.05 / 0.09) * (-0.5 - mu)).epsilon(1e-12));
    CHECK(ens.draws[1] ==
          doctest::Approx(mu + std::sqrt(0.05 / 0.14) * (0.0 - mu)).epsilon(1e-12));
    CHECK(ens.draws[2] ==
          doctest::Approx(mu + std::sqrt(0.05 / 0.21) * (0.4 - mu)).epsilon(1e-12));
    // Shrinkage pulls every member strictly toward the center.
    for (std::size_t i = 0; i < 3; ++i) {
        CHECK(std::fabs(ens.draws[i] - mu) < std::fabs(data[i].effect - mu));
    }
}

TEST_CASE("type-7 empirical quantiles") {
    std::vector<double> v(1000);
    std::iota(v.begin(), v.end(), 1.0);  // 1..1000
    CHECK(empirical_quantile(v, 0.25) == doctest::Approx(250.75).epsilon(1e-12));
    CHECK(empirical_quantile(v, 0.75) == doctest::Approx(750.25).epsilon(1e-12));
    CHECK(empirical_quantile(v, 0.0) == doctest::Approx(1.0));
    CHECK(empirical_quantile(v, 1.0) == doctest::Approx(1000.0));
    CHECK(empirical_quantile({3.0, 1.0, 2.0}, 0.5) == doctest::Approx(2.0));
    CHECK_THROWS_AS(empirical_quantile({}, 0.5), std::domain_error);
    CHECK_THROWS_AS(empirical_quantile({1.0}, 1.5), std::domain_error);
}

TEST_CASE("equi-tailed interval on 1..1000 at level 0.5") {
    std::vector<double> v(1000);
    std::iota(v.begin(), v.end(), 1.0);
    const PredictionInterval pi = equi_tailed_interval(wrap(v), 0.5);
    CHECK(pi.lower == doctest::Approx(250.75).epsilon(1e-12));
    CHECK(pi.upper == doctest::Approx(750.25).epsilon(1e-12));
    CHECK(pi.width() == doctest::Approx(499.5).epsilon(1e-12));
    CHECK_THROWS_AS(equi_tailed_interval(wrap({1.0, 2.0}), 0.5), std::domain_error);
}

TEST_CASE("HCDP interval matches a brute-force window search") {
    // Right-skewed sample: the shortest window sits left of the equi-tailed one.
    RngStream rng(31u, {2});
    std::vector<double> draws(5000);
    for (double& d : draws) d = std::exp(rng.next_normal());
    const PredictionInterval hc = hcdp_interval(wrap(draws), 0.9);

    std::vector<double> sorted = draws;
    std::sort(sorted.begin(), sorted.end());
    const std::size_t m = static_cast<std::size_t>(std::ceil(0.9 * sorted.size()));
    double best_width = 1e300;
    std::size_t best = 0;
    for (std::size_t j = 0; j + m <= sorted.size(); ++j) {
        const double w = sorted[j + m - 1] - sorted[j];
        if (w < best_width) {
            best_width = w;
            best = j;
        }
    }
    CHECK(hc.lower == sorted[best]);
    CHECK(hc.upper == sorted[best + m - 1]);

    const PredictionInterval et = equi_tailed_interval(wrap(draws), 0.9);
    CHECK(hc.width() <= et.width());
    CHECK(hc.upper < et.upper);  // skew pushes the equi-tailed right tail out
}

TEST_CASE("intervals nest across levels") {
    const MetaDataset data = d3();
    const PredictiveSamples s = sample_pcd(data, PcdVariant::Full, 0.05, 50000, 5);
    const PredictionInterval et95 = equi_tailed_interval(s, 0.95);
    const PredictionInterval et99 = equi_tailed_interval(s, 0.99);
    CHECK(et99.lower <= et95.lower);
    CHECK(et99.upper >= et95.upper);
}

TEST_CASE("confidence probabilities complement") {
    const PredictiveSamples s = wrap({-2.0, -1.0, -0.5, 0.5, 1.0});
    CHECK(confidence_probability(s, 0.0, Direction::GreaterEqual) == doctest::Approx(0.4));
    CHECK(confidence_probability(s, 0.0, Direction::LessEqual) == doctest::Approx(0.6));
    // Delta on a draw is counted on both sides.
    CHECK(confidence_probability(s, 1.0, Direction::GreaterEqual) == doctest::Approx(0.2));
    CHECK(confidence_probability(s, 1.0, Direction::LessEqual) == doctest::Approx(1.0));
}

TEST_CASE("parametric comparators") {
    const MetaDataset data = d3();
    const double tau2 = 0.05;
    const ParametricPredictive sk = skipka_predictive(data, tau2);
    CHECK(sk.family == PredictiveFamily::Normal);
    CHECK(sk.location == doctest::Approx(ivw_mean(data, tau2)).epsilon(1e-14));
    double sw = 0.0;
    for (const Study& s : data.studies()) sw += 1.0 / (s.variance + tau2);
    CHECK(sk.scale == doctest::Approx(std::sqrt(tau2 + 1.0 / sw)).epsilon(1e-12));

    const ParametricPredictive ht = hts_predictive(data, tau2);
    CHECK(ht.family == PredictiveFamily::LocationScaleT);
    CHECK(*ht.df == 1);
    CHECK(ht.scale == doctest::Approx(sk.scale).epsilon(1e-14));
    const MetaDataset pair =
        validate_dataset({{-0.2, 0.04, "", {}}, {0.3, 0.09, "", {}}});
    CHECK_THROWS_AS(hts_predictive(pair, 0.05), ValidationError);

    const PredictionInterval pi = parametric_interval(sk, 0.95);
    const double q = math::normal_quantile(0.975);
    CHECK(pi.lower == doctest::Approx(sk.location - q * sk.scale).epsilon(1e-12));
    CHECK(pi.upper == doctest::Approx(sk.location + q * sk.scale).epsilon(1e-12));
    // t interval is wider than the normal one at the same scale.
    CHECK(parametric_interval(ht, 0.95).width() > pi.width());
}

TEST_CASE("marginal CD sampler is deterministic and centered sensibly") {
    const MetaDataset data = d3();
    const PredictiveSamples a = sample_mu_marginal(data, 20000, 9, 1);
    const PredictiveSamples b = sample_mu_marginal(data, 20000, 9, 3);
    CHECK(a.draws == b.draws);
    CHECK(a.source == SampleSource::CdMu);
    const double med = empirical_quantile(a.draws, 0.5);
    CHECK(med > -0.5);
    CHECK(med < 0.4);
}
