#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <cmath>

#include "fasi/simulate.hpp"
#include "support/oracles.hpp"

using namespace fasi;

namespace {

// a scaled-down config so unit runs stay fast; acceptance runs the full one
sim::ScenarioConfig small_config(int scenario = 1) {
    sim::ScenarioConfig config = sim::scenario_preset(scenario);
    config.n_data = 250;
    config.n_train = 150;
    config.n_cal = 100;
    config.n_test = 120;
    config.replications = 4;
    config.sweep_grid = {0.3, 0.6};
    config.seed = 42;
    return config;
}

}  // namespace

TEST_CASE("presets pin the published study parameters") {
    const sim::ScenarioConfig c1 = sim::scenario_preset(1);
    CHECK(c1.n_data == 2500);
    CHECK(c1.n_train == 1500);
    CHECK(c1.n_cal == 1000);
    CHECK(c1.n_test == 1000);
    CHECK(c1.alpha == std::vector<double>{0.1, 0.1});
    CHECK(c1.variant == rvalue::Variant::plus);
    CHECK(c1.mixture.group_prior == std::vector<double>{0.5, 0.5});
    CHECK(c1.mixture.class_prior[1] == std::vector<double>{0.5, 0.5});
    CHECK(c1.mixture.components[0][0].mean == std::vector<double>{0, 1, 6});
    CHECK(c1.mixture.components[0][1].mean == std::vector<double>{2, 3, 7});
    CHECK(c1.mixture.components[1][0].mean == c1.mixture.components[0][0].mean);
    for (std::size_t a = 0; a < 2; ++a)
        for (std::size_t c = 0; c < 2; ++c)
            CHECK(c1.mixture.components[a][c].var == std::vector<double>{2, 2, 2});

    const sim::ScenarioConfig c2 = sim::scenario_preset(2);
    CHECK(c2.mixture.components[0][0].mean == std::vector<double>{1, 2, 7});
    CHECK(c2.mixture.components[0][1].mean == std::vector<double>{3, 4, 8});
    CHECK(c2.mixture.components[1][0].mean == std::vector<double>{0, 1, 6});
    CHECK(c2.mixture.components[1][1].mean == std::vector<double>{2, 3, 7});

    CHECK_THROWS_AS(sim::scenario_preset(3), std::invalid_argument);
}

TEST_CASE("generate is reproducible and respects the priors") {
    const auto spec = sim::scenario_preset(1).mixture;
    const auto a = sim::generate(spec, 2500, 99, "d");
    const auto b = sim::generate(spec, 2500, 99, "d");
    REQUIRE(a.size() == b.size());
    for (std::size_t i = 0; i < a.size(); ++i) {
        CHECK(a[i].id == b[i].id);
        CHECK(a[i].group_idx == b[i].group_idx);
        CHECK(a[i].class_idx == b[i].class_idx);
        CHECK(a[i].x == b[i].x);
    }
    // group fraction within 3 binomial sigmas of one half
    std::size_t females = 0;
    for (const auto& r : a)
        if (r.group_idx == 0) ++females;
    const double frac = static_cast<double>(females) / 2500.0;
    CHECK(std::abs(frac - 0.5) <= 3.0 * std::sqrt(0.25 / 2500.0));

    // a degenerate class prior pins every label of that group
    auto certain = spec;
    certain.class_prior[0] = {0.0, 1.0};
    for (const auto& r : sim::generate(certain, 500, 7, "x"))
        if (r.group_idx == 0) CHECK(r.class_idx == 1);
}

TEST_CASE("fcc table equals the fasi plus table when only one group exists") {
    rng::Engine eng(3);
    auto inst = testsupport::random_instance(eng);
    for (auto& r : inst.cal) r.group = "only";
    for (auto& r : inst.test) r.group = "only";
    const auto fcc = sim::fcc_rvalues(inst.cal, inst.test, inst.classes, 1);
    const auto plus =
        rvalue::compute_table(inst.cal, inst.test, inst.classes, 1, rvalue::Variant::plus);
    REQUIRE(fcc.rows.size() == plus.rows.size());
    for (std::size_t j = 0; j < fcc.rows.size(); ++j) {
        CHECK(fcc.rows[j].raw_r == plus.rows[j].raw_r);
        CHECK(fcc.rows[j].mono_r == plus.rows[j].mono_r);
    }
}

TEST_CASE("fcc pooled counts agree with the double-loop oracle") {
    rng::Engine eng(13);
    for (int it = 0; it < 200; ++it) {
        const auto inst = testsupport::random_instance(eng, 6);
        const auto fcc = sim::fcc_rvalues(inst.cal, inst.test, inst.classes, 1);
        auto pooled_cal = inst.cal;
        auto pooled_test = inst.test;
        for (auto& r : pooled_cal) r.group = "p";
        for (auto& r : pooled_test) r.group = "p";
        for (std::size_t j = 0; j < fcc.rows.size(); ++j) {
            const double want = testsupport::brute_raw_rvalue(pooled_cal, pooled_test, "2", 1,
                                                              pooled_test[j], true);
            REQUIRE(fcc.rows[j].raw_r == doctest::Approx(want).epsilon(1e-12));
            // rows keep the true group for reporting
            CHECK(fcc.rows[j].group == inst.test[j].group);
        }
    }
}

TEST_CASE("a replication produces coherent per-method metrics") {
    sim::ScenarioConfig config = small_config();
    config.methods = {sim::Method::fasi, sim::Method::fcc, sim::Method::rcc};
    const auto rep = sim::run_replication(config, 0, 0);
    REQUIRE(rep.per_method.size() == 3);
    for (const auto& [name, rm] : rep.per_method) {
        for (const auto& [key, cell] : rm.cells) {
            CHECK(cell.fsp >= 0.0);
            CHECK(cell.fsp <= 1.0);
            CHECK(cell.n_false <= cell.n_selected);
            CHECK(cell.fsp_star <= cell.fsp + 1e-15);
        }
        CHECK(rm.epi >= 0.0);
        CHECK(rm.epi <= 1.0);
        CHECK(rm.gamma.size() == 4);
    }
}

TEST_CASE("the oracle method pipeline fills decisions and pooled counters") {
    sim::ScenarioConfig config = small_config();
    config.methods = {sim::Method::oracle};
    config.oracle_mc_n = 20000;
    config.oracle_grid_step = 0.01;
    config.replications = 2;
    const auto result = sim::sweep(config);
    CHECK(!result.oracle_mfsr.empty());
    for (const auto& [key, value] : result.oracle_mfsr) {
        CHECK(value >= 0.0);
        CHECK(value <= 1.0);
    }
    bool saw_oracle_rows = false;
    for (const auto& row : result.rows)
        if (row.method == "oracle") saw_oracle_rows = true;
    CHECK(saw_oracle_rows);
}

TEST_CASE("sweep emits one block of rows per method and grid point") {
    const sim::ScenarioConfig config = small_config();
    const auto result = sim::sweep(config);
    std::map<std::pair<std::string, double>, std::size_t> block_sizes;
    for (const auto& row : result.rows) ++block_sizes[{row.method, row.sweep_value}];
    CHECK(block_sizes.size() == 4);  // 2 methods x 2 grid points
    std::size_t expected = block_sizes.begin()->second;
    for (const auto& [key, size] : block_sizes) CHECK(size == expected);
}

TEST_CASE("sweep results do not depend on the thread count") {
    sim::ScenarioConfig config = small_config();
    config.threads = 1;
    const auto serial = sim::sweep(config);
    config.threads = 4;
    const auto parallel = sim::sweep(config);
    REQUIRE(serial.rows.size() == parallel.rows.size());
    for (std::size_t i = 0; i < serial.rows.size(); ++i) {
        CHECK(serial.rows[i].metric == parallel.rows[i].metric);
        CHECK(serial.rows[i].stats.mean == parallel.rows[i].stats.mean);
        CHECK(serial.rows[i].stats.sd == parallel.rows[i].stats.sd);
    }
}

TEST_CASE("sweep is reproducible for a fixed seed and differs across seeds") {
    sim::ScenarioConfig config = small_config();
    const auto a = sim::sweep(config);
    const auto b = sim::sweep(config);
    REQUIRE(a.rows.size() == b.rows.size());
    for (std::size_t i = 0; i < a.rows.size(); ++i)
        CHECK(a.rows[i].stats.mean == b.rows[i].stats.mean);

    config.seed = 43;
    const auto c = sim::sweep(config);
    bool any_diff = false;
    for (std::size_t i = 0; i < a.rows.size(); ++i)
        if (a.rows[i].stats.mean != c.rows[i].stats.mean) any_diff = true;
    CHECK(any_diff);
}

TEST_CASE("logistic score mode runs the full data-driven pipeline") {
    sim::ScenarioConfig config = small_config();
    config.replications = 1;
    config.sweep_grid = {0.5};
    config.score_mode = sim::ScoreMode::logistic;
    config.train_config.max_iter = 400;
    config.train_config.tol = 1e-6;
    const auto result = sim::sweep(config);
    bool saw_fsr = false;
    for (const auto& row : result.rows) {
        if (row.metric != "fsr" || row.cls != "2" || row.group != metrics::kAll) continue;
        saw_fsr = true;
        CHECK(row.stats.mean >= 0.0);
        CHECK(row.stats.mean <= 1.0);
    }
    CHECK(saw_fsr);
}

TEST_CASE("sweep validates its configuration") {
    sim::ScenarioConfig config = small_config();
    config.sweep_grid = {1.5};
    CHECK_THROWS_AS(sim::sweep(config), ValidationError);
    config = small_config();
    config.alpha = {0.1};
    CHECK_THROWS_AS(sim::sweep(config), ValidationError);
    config = small_config();
    config.replications = 0;
    CHECK_THROWS_AS(sim::sweep(config), ValidationError);
}
