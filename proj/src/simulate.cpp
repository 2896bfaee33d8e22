#include "fasi/simulate.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <limits>
#include <stdexcept>

#include "fasi/parallel.hpp"
#include "fasi/rng.hpp"

namespace fasi::sim {

std::string to_string(Method m) {
    switch (m) {
        case Method::fasi: return "fasi";
        case Method::fcc: return "fcc";
        case Method::rcc: return "rcc";
        case Method::oracle: return "oracle";
    }
    return "fasi";
}

std::optional<Method> method_from_string(const std::string& s) {
    if (s == "fasi") return Method::fasi;
    if (s == "fcc") return Method::fcc;
    if (s == "rcc") return Method::rcc;
    if (s == "oracle") return Method::oracle;
    return std::nullopt;
}

namespace {

oracle::MixtureSpec gaussian_pair_spec(const std::vector<std::vector<double>>& means_f,
                                       const std::vector<std::vector<double>>& means_m) {
    oracle::MixtureSpec spec;
    spec.groups.labels = {"F", "M"};
    spec.classes.labels = {"1", "2"};
    spec.group_prior = {0.5, 0.5};
    spec.class_prior = {{0.5, 0.5}, {0.5, 0.5}};
    spec.dim = 3;
    const std::vector<double> var(3, 2.0);
    spec.components = {{{means_f[0], var}, {means_f[1], var}},
                       {{means_m[0], var}, {means_m[1], var}}};
    return spec;
}

}  // namespace

ScenarioConfig scenario_preset(int which) {
    ScenarioConfig config;
    const std::vector<std::vector<double>> means_m = {{0, 1, 6}, {2, 3, 7}};
    if (which == 1) {
        config.mixture = gaussian_pair_spec(means_m, means_m);
    } else if (which == 2) {
        config.mixture = gaussian_pair_spec({{1, 2, 7}, {3, 4, 8}}, means_m);
    } else {
        throw std::invalid_argument("scenario_preset: expected 1 or 2");
    }
    config.alpha = {0.1, 0.1};
    return config;
}

std::vector<SimRecord> generate(const oracle::MixtureSpec& spec, std::size_t n,
                                std::uint64_t stream_seed, const std::string& id_prefix) {
    rng::Engine eng(stream_seed);
    std::vector<SimRecord> out;
    out.reserve(n);
    char buf[32];
    for (std::size_t i = 0; i < n; ++i) {
        const oracle::Draw d = oracle::draw(spec, eng);
        std::snprintf(buf, sizeof(buf), "%s%06zu", id_prefix.c_str(), i);
        out.push_back({buf, d.group_idx, d.class_idx, d.x});
    }
    return out;
}

rvalue::RValueTable fcc_rvalues(const std::vector<ScoreRecord>& cal,
                                const std::vector<ScoreRecord>& test,
                                const ClassSet& classes,
                                std::size_t class_idx) {
    auto pool = [](std::vector<ScoreRecord> recs) {
        for (auto& r : recs) r.group = "_pooled";
        return recs;
    };
    rvalue::RValueTable table =
        rvalue::compute_table(pool(cal), pool(test), classes, class_idx, rvalue::Variant::plus);
    for (std::size_t j = 0; j < test.size(); ++j) table.rows[j].group = test[j].group;
    return table;
}

namespace {

struct GridContext {
    oracle::MixtureSpec spec;
    double sweep_value = std::numeric_limits<double>::quiet_NaN();
    std::vector<oracle::QCurve> curves;  // [group * n_classes + class] when oracle method runs
};

bool wants(const ScenarioConfig& config, Method m) {
    return std::find(config.methods.begin(), config.methods.end(), m) != config.methods.end();
}

GridContext make_context(const ScenarioConfig& config, std::size_t grid_idx) {
    GridContext ctx;
    ctx.spec = config.mixture;
    if (!config.sweep_grid.empty()) {
        if (ctx.spec.classes.size() != 2)
            throw ValidationError("sweep: class-prior sweep requires two classes");
        const double v = config.sweep_grid.at(grid_idx);
        if (!(v > 0.0 && v < 1.0)) throw ValidationError("sweep: grid values must be in (0,1)");
        ctx.sweep_value = v;
        auto& prior = ctx.spec.class_prior.at(config.sweep_group);
        prior[config.sweep_class] = v;
        prior[1 - config.sweep_class] = 1.0 - v;
    }
    ctx.spec.validate();
    if (wants(config, Method::oracle)) {
        if (ctx.spec.classes.size() != 2)
            throw ValidationError("oracle method: binary class set required");
        const std::size_t na = ctx.spec.groups.size(), nc = ctx.spec.classes.size();
        ctx.curves.resize(na * nc);
        for (std::size_t a = 0; a < na; ++a)
            for (std::size_t c = 0; c < nc; ++c)
                ctx.curves[a * nc + c] = oracle::q_curve(
                    ctx.spec, a, c, oracle::uniform_grid(0.0, 1.0, config.oracle_grid_step),
                    config.oracle_mc_n,
                    rng::derive(config.seed, {0x71637576ULL, grid_idx, a, c}), config.threads);
    }
    return ctx;
}

struct ScoredData {
    std::vector<ScoreRecord> cal;
    std::vector<ScoreRecord> test;      // labeled; full-covariate scores
    std::vector<ScoreRecord> cal_rcc;   // only filled when the rcc method runs
    std::vector<ScoreRecord> test_rcc;
};

std::vector<ScoreRecord> to_score_records(const std::vector<SimRecord>& recs,
                                          const oracle::MixtureSpec& spec) {
    std::vector<ScoreRecord> out;
    out.reserve(recs.size());
    for (const auto& r : recs)
        out.push_back({r.id, spec.groups.labels[r.group_idx],
                       std::vector<double>(spec.classes.size(), 0.0),
                       spec.classes.labels[r.class_idx]});
    return out;
}

void fill_oracle_scores(const std::vector<SimRecord>& sim, std::vector<ScoreRecord>& out,
                        const oracle::MixtureSpec& spec, bool reduced) {
    for (std::size_t i = 0; i < sim.size(); ++i)
        for (std::size_t c = 0; c < spec.classes.size(); ++c)
            out[i].scores[c] = reduced
                                   ? oracle::rcc_score(sim[i].x, c, spec)
                                   : oracle::posterior_score(sim[i].x, sim[i].group_idx, c, spec);
}

void fill_logistic_scores(const std::vector<SimRecord>& train, const std::vector<SimRecord>& cal,
                          const std::vector<SimRecord>& test, std::vector<ScoreRecord>& cal_out,
                          std::vector<ScoreRecord>& test_out, const oracle::MixtureSpec& spec,
                          bool with_group, const classifier::TrainConfig& tc) {
    const std::size_t n_groups = with_group ? spec.groups.size() : 0;
    std::vector<std::vector<double>> x;
    std::vector<std::size_t> g;
    x.reserve(train.size());
    g.reserve(train.size());
    for (const auto& r : train) {
        x.push_back(r.x);
        g.push_back(r.group_idx);
    }
    for (std::size_t c = 0; c < spec.classes.size(); ++c) {
        std::vector<std::uint8_t> y;
        y.reserve(train.size());
        for (const auto& r : train) y.push_back(r.class_idx == c ? 1 : 0);
        const classifier::LogisticModel model = classifier::train(x, g, n_groups, y, tc);
        for (std::size_t i = 0; i < cal.size(); ++i)
            cal_out[i].scores[c] = classifier::predict(model, cal[i].x, cal[i].group_idx);
        for (std::size_t i = 0; i < test.size(); ++i)
            test_out[i].scores[c] = classifier::predict(model, test[i].x, test[i].group_idx);
    }
}

ReplicationOutput run_replication_impl(const ScenarioConfig& config, const GridContext& ctx,
                                       std::size_t grid_idx, std::size_t rep) {
    const oracle::MixtureSpec& spec = ctx.spec;
    const ClassSet& classes = spec.classes;
    const GroupSet& groups = spec.groups;
    if (config.alpha.size() != classes.size())
        throw ValidationError("scenario: one alpha per class required");

    const std::vector<SimRecord> data =
        generate(spec, config.n_data, rng::derive(config.seed, {grid_idx, rep, 0}), "d");
    const std::vector<SimRecord> test =
        generate(spec, config.n_test, rng::derive(config.seed, {grid_idx, rep, 1}), "t");

    std::vector<std::string> ids(data.size());
    for (std::size_t i = 0; i < data.size(); ++i) ids[i] = data[i].id;
    const std::vector<std::size_t> perm =
        split_permutation(ids, rng::derive(config.seed, {grid_idx, rep, 2}));
    if (config.n_train + config.n_cal > data.size())
        throw ValidationError("scenario: split sizes exceed the generated data set");
    std::vector<SimRecord> train_sim, cal_sim;
    train_sim.reserve(config.n_train);
    cal_sim.reserve(config.n_cal);
    for (std::size_t i = 0; i < config.n_train; ++i) train_sim.push_back(data[perm[i]]);
    for (std::size_t i = config.n_train; i < config.n_train + config.n_cal; ++i)
        cal_sim.push_back(data[perm[i]]);

    ScoredData scored;
    scored.cal = to_score_records(cal_sim, spec);
    scored.test = to_score_records(test, spec);
    const bool run_rcc = wants(config, Method::rcc);
    if (config.score_mode == ScoreMode::oracle) {
        fill_oracle_scores(cal_sim, scored.cal, spec, false);
        fill_oracle_scores(test, scored.test, spec, false);
        if (run_rcc) {
            scored.cal_rcc = scored.cal;
            scored.test_rcc = scored.test;
            fill_oracle_scores(cal_sim, scored.cal_rcc, spec, true);
            fill_oracle_scores(test, scored.test_rcc, spec, true);
        }
    } else {
        fill_logistic_scores(train_sim, cal_sim, test, scored.cal, scored.test, spec, true,
                             config.train_config);
        if (run_rcc) {
            scored.cal_rcc = to_score_records(cal_sim, spec);
            scored.test_rcc = to_score_records(test, spec);
            fill_logistic_scores(train_sim, cal_sim, test, scored.cal_rcc, scored.test_rcc, spec,
                                 false, config.train_config);
        }
    }

    // gammas are a property of the draw, identical across methods
    std::map<std::pair<std::string, std::string>, double> gammas;
    for (std::size_t c = 0; c < classes.size(); ++c)
        for (const auto& g : groups.labels) {
            const auto v = metrics::gamma_estimate(scored.cal, scored.test, classes, c, g);
            gammas[{classes.labels[c], g}] =
                v ? *v : std::numeric_limits<double>::quiet_NaN();
        }

    auto outcomes_from = [&](const std::vector<rvalue::Selection>& sels) {
        std::vector<metrics::Outcome> out;
        out.reserve(sels.size());
        for (std::size_t j = 0; j < sels.size(); ++j)
            out.push_back({sels[j].id, scored.test[j].group, sels[j].decision,
                           scored.test[j].label});
        return out;
    };

    ReplicationOutput output;
    for (Method m : config.methods) {
        std::vector<metrics::Outcome> outcomes;
        if (m == Method::oracle) {
            const std::size_t nc = classes.size();
            std::vector<double> r1(test.size()), r2(test.size());
            for (std::size_t j = 0; j < test.size(); ++j) {
                // the idealized rule scores with the true posterior
                const double s1 = oracle::posterior_score(test[j].x, test[j].group_idx, 0, spec);
                const double s2 = oracle::posterior_score(test[j].x, test[j].group_idx, 1, spec);
                r1[j] = oracle::theoretical_rvalue(ctx.curves[test[j].group_idx * nc + 0], s1);
                r2[j] = oracle::theoretical_rvalue(ctx.curves[test[j].group_idx * nc + 1], s2);
            }
            const auto decisions = oracle::oracle_rule(r1, r2, config.alpha[0], config.alpha[1]);
            output.oracle_decisions.reserve(test.size());
            for (std::size_t j = 0; j < test.size(); ++j) {
                const auto& d = decisions[j];
                output.oracle_decisions.push_back(d.cls);
                output.oracle_truths.push_back(static_cast<int>(test[j].class_idx) + 1);
                output.oracle_groups.push_back(test[j].group_idx);
                metrics::Outcome o;
                o.id = test[j].id;
                o.group = groups.labels[test[j].group_idx];
                if (d.cls > 0) o.decision = classes.labels[static_cast<std::size_t>(d.cls - 1)];
                o.truth = classes.labels[test[j].class_idx];
                outcomes.push_back(std::move(o));
            }
        } else {
            const bool pooled = m != Method::fasi;
            const auto& cal_recs = m == Method::rcc ? scored.cal_rcc : scored.cal;
            const auto& test_recs = m == Method::rcc ? scored.test_rcc : scored.test;
            std::vector<rvalue::RValueTable> tables;
            tables.reserve(classes.size());
            for (std::size_t c = 0; c < classes.size(); ++c)
                tables.push_back(pooled
                                     ? fcc_rvalues(cal_recs, test_recs, classes, c)
                                     : rvalue::compute_table(cal_recs, test_recs, classes, c,
                                                             config.variant));
            outcomes = outcomes_from(rvalue::select(tables, config.alpha, classes));
        }
        metrics::RunMetrics rm = metrics::run_metrics(outcomes, classes, groups);
        rm.gamma = gammas;
        output.per_method[to_string(m)] = std::move(rm);
    }
    return output;
}

}  // namespace

ReplicationOutput run_replication(const ScenarioConfig& config, std::size_t grid_idx,
                                  std::size_t rep) {
    const GridContext ctx = make_context(config, grid_idx);
    return run_replication_impl(config, ctx, grid_idx, rep);
}

SweepResult sweep(const ScenarioConfig& config) {
    SweepResult result;
    result.quantile_levels = config.quantile_levels;
    if (config.replications == 0) throw ValidationError("sweep: replications must be positive");

    const std::size_t n_grid = config.sweep_grid.empty() ? 1 : config.sweep_grid.size();
    for (std::size_t gi = 0; gi < n_grid; ++gi) {
        const GridContext ctx = make_context(config, gi);
        std::vector<ReplicationOutput> reps(config.replications);
        par::parallel_for(config.replications, config.threads,
                          [&](std::size_t r) { reps[r] = run_replication_impl(config, ctx, gi, r); });

        for (Method m : config.methods) {
            const std::string name = to_string(m);
            std::vector<metrics::RunMetrics> runs;
            runs.reserve(reps.size());
            for (auto& rep : reps) runs.push_back(rep.per_method.at(name));
            const metrics::MetricsReport report =
                metrics::aggregate_runs(runs, config.quantile_levels);
            for (const auto& row : report.rows)
                result.rows.push_back({name, ctx.sweep_value, row.metric, row.cls, row.group,
                                       row.stats, row.mean_selected, row.mean_false});
        }
        if (wants(config, Method::oracle)) {
            const std::size_t nc = ctx.spec.classes.size();
            for (std::size_t a = 0; a < ctx.spec.groups.size(); ++a)
                for (std::size_t c = 1; c <= nc; ++c) {
                    oracle::MfsrCounter counter;
                    for (const auto& rep : reps)
                        for (std::size_t j = 0; j < rep.oracle_decisions.size(); ++j)
                            counter.add(rep.oracle_decisions[j], rep.oracle_truths[j],
                                        rep.oracle_groups[j], static_cast<int>(c), a);
                    if (const auto v = counter.value())
                        result.oracle_mfsr[{gi, static_cast<int>(c), a}] = *v;
                }
        }
    }
    return result;
}

}  // namespace fasi::sim
