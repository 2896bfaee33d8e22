#pragma once

#include <iosfwd>
#include <string>
#include <vector>

#include "fasi/conformal.hpp"
#include "fasi/core.hpp"
#include "fasi/metrics.hpp"
#include "fasi/rvalue.hpp"
#include "fasi/simulate.hpp"

namespace fasi::io {

// Generic delimited table with a header row. Comma separated, minimal
// quoting (fields containing a comma, quote or newline are quoted, quotes
// doubled). UTF-8 passthrough.
struct Table {
    std::vector<std::string> header;
    std::vector<std::vector<std::string>> rows;

    std::size_t column(const std::string& name) const;  // throws FormatError when absent
};

Table read_table(std::istream& in);
void write_table(const Table& table, std::ostream& out);

// 12 significant digits; round-trips doubles at reporting precision.
std::string format_double(double v);
double parse_double(const std::string& s);  // strict; throws FormatError

// Score file: columns id, group, optional label (may be empty per row), and
// one score_<class> column per class. Class order = column order.
struct ScoreFileData {
    ClassSet classes;
    std::vector<ScoreRecord> records;
    bool has_label_column = false;
};

ScoreFileData read_score_file(std::istream& in);
// Same, but the score columns must match `expected` exactly.
ScoreFileData read_score_file(std::istream& in, const ClassSet& expected);
void write_score_file(const ScoreFileData& data, std::ostream& out);

// Distinct groups present in the records, lexicographically ordered so the
// result is independent of row order.
GroupSet infer_groups(const std::vector<ScoreRecord>& records);

// Output layouts used by the CLI. All re-parse through read_table.
Table rvalue_output_table(const rvalue::RValueTable& table,
                          const std::vector<rvalue::Selection>& selections);

Table conformal_output_table(const std::vector<std::string>& ids,
                             const std::vector<double>& scores, const conformal::Result& result,
                             double alpha, const std::string& class_label);

Table sweep_output_table(const sim::SweepResult& result, const std::string& scenario);

// Flat key/value document of realized metrics for one decision set.
Table evaluate_output_table(const metrics::RunMetrics& rm, const ClassSet& classes,
                            const GroupSet& groups);

}  // namespace fasi::io
