#include <cmath>
#include <string>

#include <doctest.h>

#include "edgemeta/data_model.hpp"

using namespace edgemeta;

namespace {
const std::string data_dir = EDGEMETA_DATA_DIR;
}

TEST_CASE("log odds ratio from counts") {
    const Study s = log_or_from_counts(69, 128, 76, 128, "trial");
    CHECK(s.effect == doctest::Approx(std::log(69.0 * 52.0 / (59.0 * 76.0))).epsilon(1e-14));
    CHECK(s.variance ==
          doctest::Approx(1.0 / 69 + 1.0 / 59 + 1.0 / 76 + 1.0 / 52).epsilon(1e-14));
    CHECK(s.counts.has_value());
}

TEST_CASE("zero cell requires continuity correction") {
    CHECK_THROWS_AS(log_or_from_counts(0, 10, 5, 10), ValidationError);
    const Study s = log_or_from_counts(0, 10, 5, 10, "", true);
    CHECK(s.effect ==
          doctest::Approx(std::log(0.5 * 5.5 / (10.5 * 5.5))).epsilon(1e-12));
    CHECK(s.variance ==
          doctest::Approx(1.0 / 0.5 + 1.0 / 10.5 + 1.0 / 5.5 + 1.0 / 5.5).epsilon(1e-12));
    // No zero cell: correction flag must not change anything.
    const Study a = log_or_from_counts(3, 10, 4, 10);
    const Study b = log_or_from_counts(3, 10, 4, 10, "", true);
    CHECK(a.effect == b.effect);
    CHECK(a.variance == b.variance);
}

TEST_CASE("count validation") {
    CHECK_THROWS_AS(log_or_from_counts(-1, 10, 5, 10), ValidationError);
    CHECK_THROWS_AS(log_or_from_counts(11, 10, 5, 10), ValidationError);
}

TEST_CASE("dataset validation") {
    std::vector<Study> one{{0.1, 0.2, "", {}}};
    CHECK_THROWS_WITH_AS(validate_dataset(one), doctest::Contains("k < 2"),
                         ValidationError);
    std::vector<Study> bad_var{{0.1, 0.2, "", {}}, {0.3, 0.0, "B", {}}};
    CHECK_THROWS_WITH_AS(validate_dataset(std::move(bad_var)), doctest::Contains("(B)"),
                         ValidationError);
    std::vector<Study> bad_eff{{std::nan(""), 0.2, "", {}}, {0.3, 0.1, "", {}}};
    CHECK_THROWS_AS(validate_dataset(std::move(bad_eff)), ValidationError);
    std::vector<Study> neg{{-0.1, 0.2, "", {}}, {0.3, -0.1, "", {}}};
    CHECK_THROWS_AS(validate_dataset(std::move(neg)), ValidationError);
}

TEST_CASE("tampered counts are rejected") {
    Study s = log_or_from_counts(3, 10, 4, 10, "x");
    s.effect += 0.01;
    std::vector<Study> studies{s, {0.3, 0.1, "", {}}};
    CHECK_THROWS_WITH_AS(validate_dataset(std::move(studies)),
                         doctest::Contains("inconsistent with counts"), ValidationError);
}

TEST_CASE("csv parsing effect/se schema") {
    const MetaDataset data = parse_csv("label,effect,se\nA,-0.5,0.2\nB,0.4,0.3\n");
    CHECK(data.size() == 2);
    CHECK(data[0].effect == doctest::Approx(-0.5));
    CHECK(data[0].variance == doctest::Approx(0.04));
    CHECK(data[1].label == "B");
    CHECK(data.scale() == EffectScale::Generic);
}

TEST_CASE("csv parsing counts schema") {
    const MetaDataset data =
        parse_csv("label,events1,total1,events2,total2\nA,69,128,76,128\nB,11,75,20,73\n");
    CHECK(data.size() == 2);
    CHECK(data.scale() == EffectScale::LogOddsRatio);
    CHECK(data[0].effect ==
          doctest::Approx(std::log(69.0 * 52.0 / (59.0 * 76.0))).epsilon(1e-12));
}

TEST_CASE("csv error reporting carries line numbers") {
    CHECK_THROWS_WITH_AS(parse_csv("label,effect,se\nA,-0.5,abc\n"),
                         doctest::Contains("line 2"), ValidationError);
    CHECK_THROWS_WITH_AS(parse_csv("foo,bar\nA,1\n"), doctest::Contains("line 1"),
                         ValidationError);
    CHECK_THROWS_WITH_AS(parse_csv("label,effect,se\nA,-0.5\n"),
                         doctest::Contains("expected 3 fields"), ValidationError);
    CHECK_THROWS_WITH_AS(
        parse_csv("label,events1,total1,events2,total2\nA,1.5,10,2,10\n"),
        doctest::Contains("not an integer"), ValidationError);
    CHECK_THROWS_AS(parse_csv(""), ValidationError);
}

TEST_CASE("csv files ship consistent fixtures") {
    const MetaDataset summary = read_csv(data_dir + "/covid.csv");
    CHECK(summary.size() == 7);
    // First row: OR 2.00 with CI (0.21, 18.69) published to two decimals.
    CHECK(summary[0].effect == doctest::Approx(std::log(2.0)).epsilon(1e-9));
    CHECK(std::sqrt(summary[0].variance) ==
          doctest::Approx(std::log(18.69 / 0.21) / (2 * 1.959963984540054)).epsilon(1e-7));

    const MetaDataset counts = read_csv(data_dir + "/covid_counts.csv");
    CHECK(counts.size() == 7);
    CHECK(counts.scale() == EffectScale::LogOddsRatio);
    // Raw-count effects agree with the published summaries only to rounding,
    // so compare loosely.
    for (std::size_t i = 0; i < 7; ++i) {
        CHECK(counts[i].effect == doctest::Approx(summary[i].effect).epsilon(0.12));
    }
}
