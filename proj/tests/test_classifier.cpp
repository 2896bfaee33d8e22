#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <algorithm>
#include <cmath>
#include <limits>

#include "fasi/classifier.hpp"
#include "fasi/core.hpp"
#include "fasi/rng.hpp"

using namespace fasi;
using classifier::LogisticModel;
using classifier::TrainConfig;

namespace {

struct Data {
    std::vector<std::vector<double>> x;
    std::vector<std::size_t> g;
    std::vector<std::uint8_t> y;
};

Data threshold_data(std::size_t n, std::uint64_t seed) {
    // label = 1{x1 > 0.5}, second feature is noise
    Data d;
    rng::Engine eng(seed);
    for (std::size_t i = 0; i < n; ++i) {
        const double x1 = eng.uniform();
        d.x.push_back({x1, eng.uniform()});
        d.g.push_back(eng.bounded(2));
        d.y.push_back(x1 > 0.5 ? 1 : 0);
    }
    return d;
}

}  // namespace

TEST_CASE("balanced labels with no signal give a half prediction") {
    Data d;
    for (int i = 0; i < 40; ++i) {
        d.x.push_back({0.0, 0.0});
        d.g.push_back(0);
        d.y.push_back(i % 2);
    }
    const LogisticModel m = classifier::train(d.x, d.g, 1, d.y);
    CHECK(std::abs(m.intercept) < 1e-6);
    CHECK(classifier::predict(m, {0.0, 0.0}, 0) == doctest::Approx(0.5).epsilon(1e-6));
}

TEST_CASE("a thresholded label makes the prediction monotone in the feature") {
    const Data d = threshold_data(400, 5);
    TrainConfig tc;
    tc.l2 = 0.1;
    const LogisticModel m = classifier::train(d.x, d.g, 2, d.y, tc);
    CHECK(m.feature_weights[0] > 0.0);
    double prev = 0.0;
    for (double x1 : {0.0, 0.25, 0.5, 0.75, 1.0}) {
        const double p = classifier::predict(m, {x1, 0.5}, 0);
        CHECK(p > prev);
        prev = p;
    }
}

TEST_CASE("duplicating every row leaves the optimum unchanged") {
    const Data d = threshold_data(150, 9);
    Data doubled = d;
    doubled.x.insert(doubled.x.end(), d.x.begin(), d.x.end());
    doubled.g.insert(doubled.g.end(), d.g.begin(), d.g.end());
    doubled.y.insert(doubled.y.end(), d.y.begin(), d.y.end());
    const LogisticModel a = classifier::train(d.x, d.g, 2, d.y);
    const LogisticModel b = classifier::train(doubled.x, doubled.g, 2, doubled.y);
    for (std::size_t i = 0; i < a.feature_weights.size(); ++i)
        CHECK(a.feature_weights[i] == doctest::Approx(b.feature_weights[i]).epsilon(1e-5));
    CHECK(a.intercept == doctest::Approx(b.intercept).epsilon(1e-5));
}

TEST_CASE("training is deterministic") {
    const Data d = threshold_data(200, 17);
    const LogisticModel a = classifier::train(d.x, d.g, 2, d.y);
    const LogisticModel b = classifier::train(d.x, d.g, 2, d.y);
    CHECK(a.feature_weights == b.feature_weights);
    CHECK(a.group_weights == b.group_weights);
    CHECK(a.intercept == b.intercept);
}

TEST_CASE("prediction is a plain sigmoid of the margin") {
    LogisticModel m;
    m.feature_weights = {0.0, 0.0};
    m.group_weights = {0.0};
    CHECK(classifier::predict(m, {3.0, -2.0}, 0) == 0.5);

    m.feature_weights = {2.0, -1.0};
    m.group_weights = {0.5};
    m.intercept = 0.25;
    const std::vector<double> x = {1.5, 0.5};
    const double z = 0.25 + 2.0 * 1.5 - 1.0 * 0.5 + 0.5;
    CHECK(classifier::predict(m, x, 0) == doctest::Approx(1.0 / (1.0 + std::exp(-z))).epsilon(1e-15));

    m.feature_weights = {50.0, 0.0};
    CHECK(classifier::predict(m, {1.0, 0.0}, 0) > 0.999999);
}

TEST_CASE("gradient converges under separation thanks to the penalty") {
    // perfectly separable in x1
    Data d;
    for (int i = 0; i < 60; ++i) {
        d.x.push_back({i < 30 ? -1.0 : 1.0});
        d.g.push_back(0);
        d.y.push_back(i < 30 ? 0 : 1);
    }
    const LogisticModel m = classifier::train(d.x, d.g, 1, d.y);
    CHECK(m.final_grad_norm < 1e-7);
    CHECK(std::isfinite(m.feature_weights[0]));
    CHECK(m.iterations > 0);
}

TEST_CASE("degenerate inputs are rejected") {
    Data d = threshold_data(20, 3);
    std::fill(d.y.begin(), d.y.end(), 1);
    CHECK_THROWS_AS(classifier::train(d.x, d.g, 2, d.y), ValidationError);

    Data bad = threshold_data(20, 4);
    bad.x[3][1] = std::numeric_limits<double>::quiet_NaN();
    CHECK_THROWS_AS(classifier::train(bad.x, bad.g, 2, bad.y), ValidationError);
}

TEST_CASE("group indicator participates unless explicitly dropped") {
    // group 1 is shifted to label 1 far more often
    Data d;
    rng::Engine eng(77);
    for (int i = 0; i < 400; ++i) {
        const std::size_t g = eng.bounded(2);
        d.x.push_back({eng.uniform()});
        d.g.push_back(g);
        d.y.push_back(eng.bernoulli(g == 1 ? 0.9 : 0.1) ? 1 : 0);
    }
    const LogisticModel with_group = classifier::train(d.x, d.g, 2, d.y);
    REQUIRE(with_group.group_weights.size() == 2);
    CHECK(with_group.group_weights[1] > with_group.group_weights[0]);

    const LogisticModel reduced = classifier::train(d.x, d.g, 0, d.y);
    CHECK(reduced.group_weights.empty());
    // reduced model cannot distinguish the groups
    CHECK(classifier::predict(reduced, {0.5}, 0) == classifier::predict(reduced, {0.5}, 1));
}

TEST_CASE("model round-trips through its text form") {
    const Data d = threshold_data(100, 21);
    const LogisticModel m = classifier::train(d.x, d.g, 2, d.y);
    const LogisticModel back = classifier::model_from_json_string(classifier::model_to_json_string(m));
    CHECK(back.feature_weights == m.feature_weights);
    CHECK(back.group_weights == m.group_weights);
    CHECK(back.intercept == m.intercept);
    CHECK(back.iterations == m.iterations);
    CHECK_THROWS_AS(classifier::model_from_json_string("{"), FormatError);
}
