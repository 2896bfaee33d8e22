#pragma once

#include <map>
#include <optional>
#include <string>
#include <vector>

#include "fasi/core.hpp"

namespace fasi::metrics {

inline constexpr const char* kAll = "ALL";

// One test individual's decision joined with its truth.
struct Outcome {
    std::string id;
    std::string group;
    std::optional<std::string> decision;  // nullopt = indecision
    std::optional<std::string> truth;
};

// #{selected and wrong} / #{selected}, 0 when nothing is selected. The
// optional class/group restrictions filter numerator and denominator alike.
// Throws ValidationError listing ids if a selected record lacks a truth.
double fsp(const std::vector<Outcome>& outcomes,
           const std::optional<std::string>& cls = std::nullopt,
           const std::optional<std::string>& group = std::nullopt);

// Same numerator over (denominator + 1).
double fsp_star(const std::vector<Outcome>& outcomes,
                const std::optional<std::string>& cls = std::nullopt,
                const std::optional<std::string>& group = std::nullopt);

// proportion of indecisions
double epi(const std::vector<Outcome>& outcomes);

// #{decision == c and truth == c} / #{truth == c}; 0 when no record of the
// class is present. Computed over records with a known truth.
double power_per_class(const std::vector<Outcome>& outcomes, const std::string& cls);

// (null proportion among group-a test) / (null proportion among group-a cal)
// where null means label != class. nullopt when either side is undefined.
std::optional<double> gamma_estimate(const std::vector<ScoreRecord>& cal,
                                     const std::vector<ScoreRecord>& test,
                                     const ClassSet& classes,
                                     std::size_t class_idx,
                                     const std::string& group);

struct Stats {
    double mean = 0.0;
    double sd = 0.0;
    std::vector<double> quantiles;  // aligned with requested levels
    std::size_t n = 0;
};

// mean / sample sd / nearest-rank quantiles; throws on an empty series.
Stats aggregate(std::vector<double> values, const std::vector<double>& levels);

// Realized metrics of a single replication.
struct RunMetrics {
    struct Cell {
        long long n_selected = 0;
        long long n_false = 0;
        double fsp = 0.0;
        double fsp_star = 0.0;
    };
    // keyed by (class, group-or-ALL)
    std::map<std::pair<std::string, std::string>, Cell> cells;
    double epi = 0.0;
    std::map<std::string, double> power;                                   // per class
    std::map<std::pair<std::string, std::string>, double> gamma;  // per (class, group); optional
};

// Fills cells/epi/power for every class and every group plus the ALL margin.
RunMetrics run_metrics(const std::vector<Outcome>& outcomes,
                       const ClassSet& classes,
                       const GroupSet& groups);

// Aggregated view across replications, in deterministic row order.
struct MetricsReport {
    struct Row {
        std::string metric;  // fsr, fsr_star, epi, power, gamma
        std::string cls;     // class label or ALL
        std::string group;   // group label or ALL
        Stats stats;
        double mean_selected = 0.0;  // annotations for fsr rows
        double mean_false = 0.0;
    };
    std::vector<double> quantile_levels;
    std::vector<Row> rows;
};

MetricsReport aggregate_runs(const std::vector<RunMetrics>& runs,
                             const std::vector<double>& quantile_levels);

}  // namespace fasi::metrics
