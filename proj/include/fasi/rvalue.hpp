#pragma once

#include <optional>
#include <string>
#include <vector>

#include "fasi/core.hpp"

namespace fasi::rvalue {

enum class Variant {
    standard,
    plus,
    conservative_standard,
    conservative_plus,
};

std::string to_string(Variant v);
std::optional<Variant> variant_from_string(const std::string& s);

struct TableRow {
    std::string id;
    std::string group;
    double score = 0.0;
    double raw_r = 0.0;   // in [0, 1] (capped)
    double mono_r = 0.0;  // running-min adjusted, <= raw_r
};

// Per-class table, rows in test input order.
struct RValueTable {
    std::string class_label;
    Variant variant = Variant::plus;
    std::vector<TableRow> rows;
};

// Raw R-values for one class, group-restricted counts. Result is aligned
// with `test` order. Calibration records must be labeled.
std::vector<double> raw_rvalues(const std::vector<ScoreRecord>& cal,
                                const std::vector<ScoreRecord>& test,
                                const ClassSet& classes,
                                std::size_t class_idx);

// Variant whose denominator pools calibration and test counts; more stable
// when the test set is small.
std::vector<double> raw_rvalues_plus(const std::vector<ScoreRecord>& cal,
                                     const std::vector<ScoreRecord>& test,
                                     const ClassSet& classes,
                                     std::size_t class_idx);

// (n_a^cal + 1) / (n_{a,null}^cal + 1); multiplying raw R-values by this and
// re-capping gives the conservative variant.
double conservative_factor(const std::vector<ScoreRecord>& cal,
                           const std::string& group,
                           const ClassSet& classes,
                           std::size_t class_idx);

// Within each group: sort ascending by score and take the running minimum,
// self included; tied scores share the block value.
std::vector<double> monotonize(const std::vector<ScoreRecord>& test,
                               std::size_t class_idx,
                               const std::vector<double>& raw);

// Smallest observed within-group test score t whose estimated false
// selection proportion is <= alpha; +infinity when there is none.
// Selecting {score >= tau} equals selecting {mono_r <= alpha} exactly.
double threshold_tau(const std::vector<ScoreRecord>& cal,
                     const std::vector<ScoreRecord>& test,
                     const std::string& group,
                     const ClassSet& classes,
                     std::size_t class_idx,
                     double alpha,
                     Variant variant);

// raw + conservative adjustment + monotonization in one pass.
RValueTable compute_table(const std::vector<ScoreRecord>& cal,
                          const std::vector<ScoreRecord>& test,
                          const ClassSet& classes,
                          std::size_t class_idx,
                          Variant variant);

struct Selection {
    std::string id;
    std::optional<std::string> decision;  // nullopt = indecision
    double winning_r = 1.0;               // mono R of the decided class
};

// Algorithm: candidate classes are those with mono_r <= alpha_c; the class
// with the smallest mono R wins, ties broken by canonical class order.
std::vector<Selection> select(const std::vector<RValueTable>& tables,
                              const std::vector<double>& alpha,
                              const ClassSet& classes);

}  // namespace fasi::rvalue
