#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <algorithm>
#include <cmath>

#include "fasi/conformal.hpp"
#include "fasi/rvalue.hpp"
#include "support/oracles.hpp"

using namespace fasi;

namespace {

const std::vector<double> kCal{0.9, 0.7, 0.4};
const std::vector<double> kTest{0.8, 0.5};

}  // namespace

TEST_CASE("conformal p-value fixture and boundaries") {
    CHECK(conformal::conformal_pvalue(kCal, 0.8) == doctest::Approx(0.5).epsilon(1e-15));
    CHECK(conformal::conformal_pvalue(kCal, 0.95) == doctest::Approx(0.25).epsilon(1e-15));
    CHECK(conformal::conformal_pvalue(kCal, 0.0) == 1.0);
    CHECK(conformal::conformal_pvalue({}, 0.3) == 1.0);
}

TEST_CASE("empirical process fixture and boundaries") {
    CHECK(conformal::empirical_G(kTest, 0.8) == 0.5);
    CHECK(conformal::empirical_G(kTest, 0.5) == 1.0);
    CHECK(conformal::empirical_G(kTest, 0.91) == 0.0);
}

TEST_CASE("BH q-values reproduce the hand enumeration") {
    const auto res = conformal::bh_qvalues(kCal, kTest);
    CHECK(res.p[0] == doctest::Approx(0.5).epsilon(1e-15));
    CHECK(res.p[1] == doctest::Approx(0.75).epsilon(1e-15));
    CHECK(res.q_raw[0] == doctest::Approx(1.0).epsilon(1e-12));
    CHECK(res.q_raw[1] == doctest::Approx(0.75).epsilon(1e-12));
    CHECK(res.q_mono[0] == doctest::Approx(0.75).epsilon(1e-12));
    CHECK(res.q_mono[1] == doctest::Approx(0.75).epsilon(1e-12));
}

TEST_CASE("single test point needs no adjustment") {
    const auto res = conformal::bh_qvalues(kCal, {0.6});
    CHECK(res.q_mono[0] == res.q_raw[0]);
}

TEST_CASE("p-value range and q-value monotonicity invariants") {
    rng::Engine eng(31);
    for (int it = 0; it < 300; ++it) {
        const std::size_t n = eng.bounded(40);
        const std::size_t m = 1 + eng.bounded(40);
        std::vector<double> cal(n), test(m);
        const bool lattice = eng.bernoulli(0.5);
        auto draw = [&] {
            return lattice ? static_cast<double>(eng.bounded(8)) / 7.0 : eng.uniform();
        };
        for (auto& v : cal) v = draw();
        for (auto& v : test) v = draw();
        const auto res = conformal::bh_qvalues(cal, test);
        const double pmin = 1.0 / (static_cast<double>(n) + 1.0);
        for (std::size_t j = 0; j < m; ++j) {
            REQUIRE(res.p[j] >= pmin);
            REQUIRE(res.p[j] <= 1.0);
            REQUIRE(res.q_mono[j] <= res.q_raw[j]);
        }
        for (std::size_t i = 0; i < m; ++i)
            for (std::size_t j = 0; j < m; ++j) {
                if (test[i] < test[j]) REQUIRE(res.q_mono[i] >= res.q_mono[j]);
                if (test[i] == test[j]) REQUIRE(res.q_mono[i] == res.q_mono[j]);
            }
    }
}

TEST_CASE("thresholding q_mono equals step-up BH on the conformal p-values") {
    rng::Engine eng(47);
    for (int it = 0; it < 200; ++it) {
        const std::size_t n = eng.bounded(30);
        const std::size_t m = 1 + eng.bounded(30);
        std::vector<double> cal(n), test(m);
        const bool lattice = eng.bernoulli(0.5);
        auto draw = [&] {
            return lattice ? static_cast<double>(eng.bounded(10)) / 9.0 : eng.uniform();
        };
        for (auto& v : cal) v = draw();
        for (auto& v : test) v = draw();
        const auto res = conformal::bh_qvalues(cal, test);
        for (int pct = 1; pct <= 99; ++pct) {
            const double alpha = static_cast<double>(pct) / 100.0;
            const auto reject = testsupport::bh_step_up(res.p, alpha);
            for (std::size_t j = 0; j < m; ++j) {
                // q values are small rational numbers; when one lands exactly
                // on alpha the two comparison routes may round apart. Off the
                // boundary the sets must agree exactly.
                if (std::abs(res.q_mono[j] - alpha) <= 1e-9 * alpha) continue;
                REQUIRE((res.q_mono[j] <= alpha) == reject[j]);
            }
        }
    }
}

TEST_CASE("one-class identity: single-group all-null calibration recovers the R-value") {
    rng::Engine eng(53);
    for (int it = 0; it < 200; ++it) {
        const std::size_t n = eng.bounded(25);
        const std::size_t m = 1 + eng.bounded(25);
        std::vector<ScoreRecord> cal, test;
        std::vector<double> cal_scores, test_scores;
        const ClassSet classes{{"1", "2"}};
        for (std::size_t i = 0; i < n; ++i) {
            const double s = eng.uniform();
            cal_scores.push_back(s);
            cal.push_back({"c" + std::to_string(i), "g", {0.0, s}, "1"});  // all null for class 2
        }
        for (std::size_t j = 0; j < m; ++j) {
            const double s = eng.uniform();
            test_scores.push_back(s);
            test.push_back({"t" + std::to_string(j), "g", {0.0, s}, std::nullopt});
        }
        const auto raw = rvalue::raw_rvalues(cal, test, classes, 1);
        const auto mono = rvalue::monotonize(test, 1, raw);
        const auto conf = conformal::bh_qvalues(cal_scores, test_scores);
        for (std::size_t j = 0; j < m; ++j) {
            REQUIRE(raw[j] == std::min(conf.q_raw[j], 1.0));    // bitwise
            REQUIRE(mono[j] == std::min(conf.q_mono[j], 1.0));  // bitwise
        }
    }
}
