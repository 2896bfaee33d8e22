#include "fasi/io.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <istream>
#include <ostream>
#include <set>
#include <sstream>

namespace fasi::io {

std::size_t Table::column(const std::string& name) const {
    for (std::size_t i = 0; i < header.size(); ++i)
        if (header[i] == name) return i;
    throw FormatError("missing column '" + name + "'");
}

namespace {

std::string escape(const std::string& field) {
    if (field.find_first_of(",\"\n\r") == std::string::npos) return field;
    std::string out = "\"";
    for (char ch : field) {
        if (ch == '"') out += "\"\"";
        else out += ch;
    }
    out += '"';
    return out;
}

}  // namespace

Table read_table(std::istream& in) {
    // single-pass state machine; quoted fields may contain separators,
    // doubled quotes and newlines
    Table table;
    std::vector<std::string> fields;
    std::string cur;
    bool quoted = false;
    bool row_open = false;  // saw any character of the current row
    bool first = true;

    auto end_field = [&] {
        fields.push_back(std::move(cur));
        cur.clear();
    };
    auto end_row = [&] {
        end_field();
        if (first) {
            table.header = std::move(fields);
            first = false;
        } else {
            if (fields.size() != table.header.size())
                throw FormatError("row has " + std::to_string(fields.size()) +
                                  " fields, header has " + std::to_string(table.header.size()));
            table.rows.push_back(std::move(fields));
        }
        fields.clear();
        row_open = false;
    };

    char ch = 0;
    while (in.get(ch)) {
        if (quoted) {
            if (ch == '"') {
                if (in.peek() == '"') {
                    in.get(ch);
                    cur += '"';
                } else {
                    quoted = false;
                }
            } else {
                cur += ch;
            }
            continue;
        }
        switch (ch) {
            case '"': quoted = true; row_open = true; break;
            case ',': end_field(); row_open = true; break;
            case '\r':
                if (in.peek() == '\n') in.get(ch);
                end_row();
                break;
            case '\n': end_row(); break;
            default: cur += ch; row_open = true; break;
        }
    }
    if (quoted) throw FormatError("unterminated quote in row");
    if (row_open || !cur.empty() || !fields.empty()) end_row();  // final row without newline
    if (first) throw FormatError("empty file: no header row");
    return table;
}

void write_table(const Table& table, std::ostream& out) {
    auto write_row = [&](const std::vector<std::string>& row) {
        for (std::size_t i = 0; i < row.size(); ++i) {
            if (i) out << ',';
            out << escape(row[i]);
        }
        out << '\n';
    };
    write_row(table.header);
    for (const auto& row : table.rows) write_row(row);
}

std::string format_double(double v) {
    char buf[40];
    std::snprintf(buf, sizeof(buf), "%.12g", v);
    return buf;
}

double parse_double(const std::string& s) {
    if (s.empty()) throw FormatError("empty numeric field");
    char* end = nullptr;
    const double v = std::strtod(s.c_str(), &end);
    if (end != s.c_str() + s.size()) throw FormatError("malformed number '" + s + "'");
    return v;
}

namespace {

constexpr const char* kScorePrefix = "score_";

ScoreFileData read_score_file_impl(std::istream& in, const ClassSet* expected) {
    const Table table = read_table(in);
    const std::size_t id_col = table.column("id");
    const std::size_t group_col = table.column("group");
    std::ptrdiff_t label_col = -1;
    ScoreFileData data;
    std::vector<std::size_t> score_cols;
    for (std::size_t i = 0; i < table.header.size(); ++i) {
        const std::string& h = table.header[i];
        if (h == "label") label_col = static_cast<std::ptrdiff_t>(i);
        else if (h.rfind(kScorePrefix, 0) == 0) {
            const std::string cls = h.substr(std::string(kScorePrefix).size());
            if (cls.empty()) throw FormatError("empty class name in column '" + h + "'");
            data.classes.labels.push_back(cls);
            score_cols.push_back(i);
        }
    }
    if (score_cols.empty()) throw FormatError("no score_<class> columns found");
    data.classes.validate();
    if (expected && data.classes.labels != expected->labels) {
        std::string want;
        for (const auto& l : expected->labels) want += (want.empty() ? "" : ",") + l;
        std::string got;
        for (const auto& l : data.classes.labels) got += (got.empty() ? "" : ",") + l;
        throw FormatError("score columns {" + got + "} do not match expected {" + want + "}");
    }
    data.has_label_column = label_col >= 0;
    data.records.reserve(table.rows.size());
    for (const auto& row : table.rows) {
        ScoreRecord rec;
        rec.id = row[id_col];
        rec.group = row[group_col];
        rec.scores.reserve(score_cols.size());
        for (std::size_t c : score_cols) rec.scores.push_back(parse_double(row[c]));
        if (label_col >= 0 && !row[static_cast<std::size_t>(label_col)].empty())
            rec.label = row[static_cast<std::size_t>(label_col)];
        data.records.push_back(std::move(rec));
    }
    return data;
}

}  // namespace

ScoreFileData read_score_file(std::istream& in) { return read_score_file_impl(in, nullptr); }

ScoreFileData read_score_file(std::istream& in, const ClassSet& expected) {
    return read_score_file_impl(in, &expected);
}

void write_score_file(const ScoreFileData& data, std::ostream& out) {
    Table table;
    table.header = {"id", "group", "label"};
    for (const auto& cls : data.classes.labels) table.header.push_back(kScorePrefix + cls);
    for (const auto& rec : data.records) {
        std::vector<std::string> row = {rec.id, rec.group, rec.label.value_or("")};
        for (double s : rec.scores) row.push_back(format_double(s));
        table.rows.push_back(std::move(row));
    }
    write_table(table, out);
}

GroupSet infer_groups(const std::vector<ScoreRecord>& records) {
    std::set<std::string> seen;
    for (const auto& rec : records) seen.insert(rec.group);
    GroupSet groups;
    groups.labels.assign(seen.begin(), seen.end());
    return groups;
}

Table rvalue_output_table(const rvalue::RValueTable& table,
                          const std::vector<rvalue::Selection>& selections) {
    Table out;
    out.header = {"id", "group", "score", "raw_r", "mono_r", "decision"};
    for (std::size_t j = 0; j < table.rows.size(); ++j) {
        const auto& r = table.rows[j];
        out.rows.push_back({r.id, r.group, format_double(r.score), format_double(r.raw_r),
                            format_double(r.mono_r),
                            selections[j].decision.value_or("indecision")});
    }
    return out;
}

Table conformal_output_table(const std::vector<std::string>& ids,
                             const std::vector<double>& scores, const conformal::Result& result,
                             double alpha, const std::string& class_label) {
    Table out;
    out.header = {"id", "score", "p", "q_raw", "q_mono", "decision"};
    for (std::size_t j = 0; j < ids.size(); ++j) {
        // q-values above 1 are capped at reporting time only
        const double q_raw = std::min(result.q_raw[j], 1.0);
        const double q_mono = std::min(result.q_mono[j], 1.0);
        out.rows.push_back({ids[j], format_double(scores[j]), format_double(result.p[j]),
                            format_double(q_raw), format_double(q_mono),
                            result.q_mono[j] <= alpha ? class_label : "indecision"});
    }
    return out;
}

namespace {

std::string quantile_column_name(double level) {
    // 0.05 -> q05, 0.95 -> q95, 0.5 -> q50
    const int pct = static_cast<int>(std::lround(level * 100.0));
    char buf[16];
    std::snprintf(buf, sizeof(buf), "q%02d", pct);
    return buf;
}

}  // namespace

Table sweep_output_table(const sim::SweepResult& result, const std::string& scenario) {
    Table out;
    out.header = {"scenario", "method", "pi2f", "class", "group", "metric", "mean", "sd"};
    for (double level : result.quantile_levels) out.header.push_back(quantile_column_name(level));
    for (const auto& row : result.rows) {
        std::vector<std::string> fields = {scenario,
                                           row.method,
                                           std::isnan(row.sweep_value) ? ""
                                                                       : format_double(row.sweep_value),
                                           row.cls,
                                           row.group,
                                           row.metric,
                                           format_double(row.stats.mean),
                                           format_double(row.stats.sd)};
        for (double q : row.stats.quantiles) fields.push_back(format_double(q));
        out.rows.push_back(std::move(fields));
    }
    return out;
}

Table evaluate_output_table(const metrics::RunMetrics& rm, const ClassSet& classes,
                            const GroupSet& groups) {
    Table out;
    out.header = {"key", "value"};
    auto add = [&](const std::string& key, const std::string& value) {
        out.rows.push_back({key, value});
    };
    add("epi", format_double(rm.epi));
    for (const auto& cls : classes.labels) add("power." + cls, format_double(rm.power.at(cls)));
    std::vector<std::string> group_keys = groups.labels;
    group_keys.emplace_back(metrics::kAll);
    std::vector<std::string> class_keys = classes.labels;
    class_keys.emplace_back(metrics::kAll);
    for (const auto& cls : class_keys)
        for (const auto& g : group_keys) {
            const auto& cell = rm.cells.at({cls, g});
            const std::string base = cls + "." + g;
            add("fsp." + base, format_double(cell.fsp));
            add("fsp_star." + base, format_double(cell.fsp_star));
            add("n_selected." + base, std::to_string(cell.n_selected));
            add("n_false." + base, std::to_string(cell.n_false));
        }
    return out;
}

}  // namespace fasi::io
