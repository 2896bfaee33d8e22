#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "fasi/classifier.hpp"
#include "fasi/core.hpp"
#include "fasi/metrics.hpp"
#include "fasi/oracle.hpp"
#include "fasi/rvalue.hpp"

namespace fasi::sim {

enum class Method { fasi, fcc, rcc, oracle };
enum class ScoreMode { oracle, logistic };

std::string to_string(Method m);
std::optional<Method> method_from_string(const std::string& s);

struct ScenarioConfig {
    oracle::MixtureSpec mixture;
    std::size_t n_data = 2500;
    std::size_t n_train = 1500;
    std::size_t n_cal = 1000;
    std::size_t n_test = 1000;  // drawn fresh per replication
    std::vector<double> alpha;  // one per class
    std::size_t replications = 500;
    std::vector<double> sweep_grid;  // values for the swept class prior; empty = single run
    std::size_t sweep_group = 0;     // the grid sets class_prior[sweep_group][sweep_class]
    std::size_t sweep_class = 1;
    std::uint64_t seed = 1;
    std::vector<Method> methods{Method::fasi, Method::fcc};
    rvalue::Variant variant = rvalue::Variant::plus;
    ScoreMode score_mode = ScoreMode::oracle;
    classifier::TrainConfig train_config{};
    std::vector<double> quantile_levels{0.05, 0.95};
    unsigned threads = 0;
    std::size_t oracle_mc_n = 1'000'000;  // q-curve draws for the oracle method
    double oracle_grid_step = 1e-3;
};

// Built-in setups matching the two simulation studies; pass 1 or 2.
ScenarioConfig scenario_preset(int which);

// One generated individual with covariates (only this module and the
// classifier ever see raw features).
struct SimRecord {
    std::string id;
    std::size_t group_idx = 0;
    std::size_t class_idx = 0;
    std::vector<double> x;
};

// Labeled draws from the mixture; reproducible from the stream seed alone.
std::vector<SimRecord> generate(const oracle::MixtureSpec& spec, std::size_t n,
                                std::uint64_t stream_seed, const std::string& id_prefix);

// Pooled-count R-value table (plus-style denominator); the baseline that
// ignores the protected attribute when calibrating.
rvalue::RValueTable fcc_rvalues(const std::vector<ScoreRecord>& cal,
                                const std::vector<ScoreRecord>& test,
                                const ClassSet& classes,
                                std::size_t class_idx);

struct ReplicationOutput {
    std::map<std::string, metrics::RunMetrics> per_method;  // keyed by method name
    // raw oracle-rule outcomes for pooled mFSR estimation
    std::vector<int> oracle_decisions;
    std::vector<int> oracle_truths;
    std::vector<std::size_t> oracle_groups;
};

// Full pipeline for one replication at one grid point: generate, split,
// score, calibrate, select, evaluate.
ReplicationOutput run_replication(const ScenarioConfig& config, std::size_t grid_idx,
                                  std::size_t rep);

struct SweepRow {
    std::string method;
    double sweep_value = 0.0;  // NaN for a single-run config
    std::string metric;
    std::string cls;
    std::string group;
    metrics::Stats stats;
    double mean_selected = 0.0;
    double mean_false = 0.0;
};

struct SweepResult {
    std::vector<double> quantile_levels;
    std::vector<SweepRow> rows;
    // pooled mFSR per (grid point, class, group) when the oracle method ran
    std::map<std::tuple<std::size_t, int, std::size_t>, double> oracle_mfsr;
};

// Replications run in parallel on per-replication seed streams; results are
// identical to a serial run.
SweepResult sweep(const ScenarioConfig& config);

}  // namespace fasi::sim
