#include <cmath>

#include <doctest.h>

#include "edgemeta/edgington.hpp"
#include "edgemeta/math.hpp"
#include "edgemeta/rng.hpp"

using namespace edgemeta;

namespace {

MetaDataset d3() {
    return validate_dataset({{-0.5, 0.04, "", {}}, {0.0, 0.09, "", {}}, {0.4, 0.16, "", {}}});
}

}  // namespace

TEST_CASE("study p-value function") {
    const Study s{0.0, 0.04, "", {}};
    // mu = effect + 1.96 sd => p ~ 0.975.
    CHECK(study_p_value(s, 1.959963984540054 * 0.2, 0.0) ==
          doctest::Approx(0.975).epsilon(1e-12));
    CHECK(study_p_value(s, 0.0, 0.0) == doctest::Approx(0.5).epsilon(1e-15));
    // tau2 enters through the combined scale.
    CHECK(study_p_value(s, 0.3, 0.05) ==
          doctest::Approx(math::normal_cdf(0.3 / 0.3)).epsilon(1e-14));
    // Increasing in mu.
    CHECK(study_p_value(s, 0.2, 0.0) > study_p_value(s, 0.1, 0.0));
}

TEST_CASE("Irwin-Hall exact values") {
    // P(U1+U2+U3 <= 1) = 1/3! = 1/6.
    CHECK(irwin_hall_cdf(1.0, 3) == doctest::Approx(1.0 / 6.0).epsilon(1e-13));
    // Symmetry around k/2.
    CHECK(irwin_hall_cdf(1.5, 3) == doctest::Approx(0.5).epsilon(1e-13));
    CHECK(irwin_hall_cdf(2.0, 3) == doctest::Approx(1.0 - 1.0 / 6.0).epsilon(1e-13));
    // k = 1 is the standard uniform.
    CHECK(irwin_hall_cdf(0.3, 1) == doctest::Approx(0.3).epsilon(1e-14));
    CHECK(irwin_hall_pdf(0.3, 1) == doctest::Approx(1.0).epsilon(1e-14));
    // k = 2: triangular density.
    CHECK(irwin_hall_pdf(0.5, 2) == doctest::Approx(0.5).epsilon(1e-13));
    CHECK(irwin_hall_pdf(1.0, 2) == doctest::Approx(1.0).epsilon(1e-13));
    // Support edges.
    CHECK(irwin_hall_cdf(-0.1, 4) == 0.0);
    CHECK(irwin_hall_cdf(4.1, 4) == 1.0);
}

TEST_CASE("Irwin-Hall cdf vs Monte Carlo at s = 2.2, k = 4") {
    RngStream rng(5u, {11});
    const int n = 400000;
    int hits = 0;
    for (int i = 0; i < n; ++i) {
        double s = 0.0;
        for (int j = 0; j < 4; ++j) s += rng.next_u01();
        if (s <= 2.2) ++hits;
    }
    const double mc = static_cast<double>(hits) / n;
    CHECK(irwin_hall_cdf(2.2, 4) == doctest::Approx(mc).epsilon(0.01));
}

TEST_CASE("Irwin-Hall pdf integrates the cdf") {
    for (unsigned k : {3u, 8u, 15u}) {
        for (double s : {0.7, 0.5 * k, 0.5 * k + 1.3}) {
            const double h = 1e-5;
            const double fd = (irwin_hall_cdf(s + h, k) - irwin_hall_cdf(s - h, k)) / (2 * h);
            CHECK(irwin_hall_pdf(s, k) == doctest::Approx(fd).epsilon(1e-5));
        }
    }
}

TEST_CASE("exact and normal branches agree near the switch-over") {
    // At k = 15 (last exact k) the normal approximation is already close.
    for (double frac : {0.35, 0.5, 0.65}) {
        const double s = frac * 15.0;
        const double exact = irwin_hall_cdf(s, 15);
        const double approx =
            math::normal_cdf((s - 7.5) / std::sqrt(15.0 / 12.0));
        CHECK(std::fabs(exact - approx) < 5e-3);
    }
}

TEST_CASE("CD cdf is a monotone distribution function") {
    const MetaDataset data = d3();
    const EdgingtonCD cd(data, 0.05);
    double prev = -1.0;
    for (double mu = -3.0; mu <= 3.0; mu += 0.05) {
        const double c = cd.cdf(mu);
        CHECK(c >= prev);
        CHECK(c >= 0.0);
        CHECK(c <= 1.0);
        prev = c;
    }
    CHECK(cd.cdf(-10.0) == doctest::Approx(0.0).scale(1.0).epsilon(1e-12));
    CHECK(cd.cdf(10.0) == doctest::Approx(1.0).epsilon(1e-12));
}

TEST_CASE("CD quantile round-trips through the cdf") {
    const MetaDataset data = d3();
    for (double tau2 : {0.0, 0.05, 0.5}) {
        const EdgingtonCD cd(data, tau2);
        for (double q : {0.001, 0.025, 0.2, 0.5, 0.8, 0.975, 0.999}) {
            CHECK(cd.cdf(cd.quantile(q)) == doctest::Approx(q).scale(1.0).epsilon(1e-8));
        }
    }
}

TEST_CASE("CD density matches a finite difference of the cdf") {
    const MetaDataset data = d3();
    const EdgingtonCD cd(data, 0.05);
    for (double mu : {-0.8, -0.2, 0.0, 0.3, 0.9}) {
        const double h = 1e-6;
        const double fd = (cd.cdf(mu + h) - cd.cdf(mu - h)) / (2 * h);
        CHECK(cd.density(mu) == doctest::Approx(fd).epsilon(1e-5));
    }
}

TEST_CASE("location equivariance") {
    const double shift = 0.73;
    const MetaDataset data = d3();
    const MetaDataset shifted = validate_dataset({{-0.5 + shift, 0.04, "", {}},
                                                  {0.0 + shift, 0.09, "", {}},
                                                  {0.4 + shift, 0.16, "", {}}});
    const EdgingtonCD cd(data, 0.05), cds(shifted, 0.05);
    for (double q : {0.1, 0.5, 0.9}) {
        CHECK(cds.quantile(q) == doctest::Approx(cd.quantile(q) + shift).epsilon(1e-8));
    }
    CHECK(cds.cdf(0.2 + shift) == doctest::Approx(cd.cdf(0.2)).epsilon(1e-12));
}

TEST_CASE("two-sided p-value") {
    const MetaDataset data = d3();
    const EdgingtonCD cd(data, 0.05);
    const double med = cd.quantile(0.5);
    CHECK(cd.two_sided_p(med) == doctest::Approx(1.0).epsilon(1e-6));
    const double q025 = cd.quantile(0.025);
    CHECK(cd.two_sided_p(q025) == doctest::Approx(0.05).epsilon(1e-6));
    CHECK(cd.two_sided_p(100.0) > 0.0);  // clamped away from zero
}

TEST_CASE("k = 2 reduces to the Irwin-Hall of two p-values") {
    const MetaDataset pair =
        validate_dataset({{-0.2, 0.04, "", {}}, {0.3, 0.09, "", {}}});
    const EdgingtonCD cd(pair, 0.0);
    const double mu = 0.05;
    const double s = study_p_value(pair[0], mu, 0.0) + study_p_value(pair[1], mu, 0.0);
    CHECK(cd.cdf(mu) == doctest::Approx(irwin_hall_cdf(s, 2)).epsilon(1e-14));
}
