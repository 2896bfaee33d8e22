#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <map>
#include <sstream>

#include "fasi/io.hpp"
#include "fasi/rng.hpp"

using namespace fasi;

namespace {

io::Table roundtrip(const io::Table& t) {
    std::stringstream ss;
    io::write_table(t, ss);
    return io::read_table(ss);
}

}  // namespace

TEST_CASE("tables round-trip including quoting") {
    io::Table t;
    t.header = {"id", "note"};
    t.rows = {{"a", "plain"},
              {"b", "has,comma"},
              {"c", "has \"quotes\""},
              {"d", ""},
              {"e,f", "both,\" tricky"},
              {"g", "multi\nline"},
              {"h", "carriage\rreturn"}};
    const io::Table back = roundtrip(t);
    CHECK(back.header == t.header);
    CHECK(back.rows == t.rows);
}

TEST_CASE("malformed tables are rejected") {
    std::stringstream ragged("a,b\n1,2,3\n");
    CHECK_THROWS_AS(io::read_table(ragged), FormatError);
    std::stringstream empty("");
    CHECK_THROWS_AS(io::read_table(empty), FormatError);
    io::Table t;
    t.header = {"x"};
    CHECK_THROWS_AS(t.column("y"), FormatError);
}

TEST_CASE("doubles survive the 12-digit format") {
    rng::Engine eng(4);
    for (int i = 0; i < 200; ++i) {
        const double v = eng.uniform();
        const double back = io::parse_double(io::format_double(v));
        CHECK(back == doctest::Approx(v).epsilon(1e-11));
    }
    CHECK(io::format_double(0.5) == "0.5");
    CHECK_THROWS_AS(io::parse_double("12x"), FormatError);
    CHECK_THROWS_AS(io::parse_double(""), FormatError);
}

TEST_CASE("score files round-trip") {
    io::ScoreFileData data;
    data.classes.labels = {"1", "2"};
    data.has_label_column = true;
    data.records = {{"a", "F", {0.25, 0.75}, "2"}, {"b", "M", {0.5, 0.5}, std::nullopt}};
    std::stringstream ss;
    io::write_score_file(data, ss);
    const auto back = io::read_score_file(ss);
    CHECK(back.classes.labels == data.classes.labels);
    REQUIRE(back.records.size() == 2);
    CHECK(back.records[0].id == "a");
    CHECK(back.records[0].scores == data.records[0].scores);
    CHECK(back.records[0].label == "2");
    CHECK(!back.records[1].label);
}

TEST_CASE("score file schema errors") {
    std::stringstream missing("id,group\na,F\n");
    CHECK_THROWS_WITH_AS(io::read_score_file(missing), doctest::Contains("score_"), FormatError);

    std::stringstream ok("id,group,score_1,score_2\na,F,0.2,0.8\n");
    const ClassSet other{{"1", "3"}};
    CHECK_THROWS_AS(io::read_score_file(ok, other), FormatError);

    std::stringstream badnum("id,group,score_1\na,F,zero\n");
    CHECK_THROWS_AS(io::read_score_file(badnum), FormatError);
}

TEST_CASE("groups are inferred in a row-order independent way") {
    std::vector<ScoreRecord> recs = {{"a", "M", {0.1}, std::nullopt},
                                     {"b", "F", {0.1}, std::nullopt},
                                     {"c", "M", {0.1}, std::nullopt}};
    CHECK(io::infer_groups(recs).labels == std::vector<std::string>{"F", "M"});
}

TEST_CASE("rvalue output re-parses and keeps twelve digits") {
    rvalue::RValueTable table;
    table.class_label = "2";
    table.rows = {{"t1", "F", 0.8, 0.512345678901, 0.5}, {"t2", "M", 0.5, 0.6, 0.55}};
    std::vector<rvalue::Selection> sel(2);
    sel[0] = {"t1", std::string("2"), 0.5};
    sel[1] = {"t2", std::nullopt, 1.0};
    const io::Table out = io::rvalue_output_table(table, sel);
    const io::Table back = roundtrip(out);
    CHECK(back.header == std::vector<std::string>{"id", "group", "score", "raw_r", "mono_r",
                                                  "decision"});
    CHECK(back.rows[0][5] == "2");
    CHECK(back.rows[1][5] == "indecision");
    CHECK(io::parse_double(back.rows[0][3]) == doctest::Approx(0.512345678901).epsilon(1e-12));
}

TEST_CASE("conformal output caps q-values at presentation time") {
    conformal::Result res;
    res.p = {0.5};
    res.q_raw = {1.7};
    res.q_mono = {1.2};
    const io::Table out = io::conformal_output_table({"t1"}, {0.4}, res, 0.5, "2");
    CHECK(io::parse_double(out.rows[0][3]) == 1.0);
    CHECK(io::parse_double(out.rows[0][4]) == 1.0);
    CHECK(out.rows[0][5] == "indecision");
}

TEST_CASE("sweep output carries the tidy schema") {
    sim::SweepResult result;
    result.quantile_levels = {0.05, 0.95};
    sim::SweepRow row;
    row.method = "fasi";
    row.sweep_value = 0.2;
    row.metric = "fsr";
    row.cls = "2";
    row.group = "F";
    row.stats = {0.1, 0.01, {0.08, 0.12}, 500};
    result.rows.push_back(row);
    const io::Table out = io::sweep_output_table(result, "1");
    CHECK(out.header == std::vector<std::string>{"scenario", "method", "pi2f", "class", "group",
                                                 "metric", "mean", "sd", "q05", "q95"});
    const io::Table back = roundtrip(out);
    CHECK(back.rows[0][1] == "fasi");
    CHECK(io::parse_double(back.rows[0][6]) == 0.1);
}

TEST_CASE("evaluate output is a key/value table") {
    std::vector<metrics::Outcome> outcomes = {{"a", "F", std::string("2"), std::string("2")},
                                              {"b", "F", std::string("2"), std::string("1")},
                                              {"c", "M", std::nullopt, std::string("1")}};
    const ClassSet classes{{"1", "2"}};
    const GroupSet groups{{"F", "M"}};
    const auto rm = metrics::run_metrics(outcomes, classes, groups);
    const io::Table out = io::evaluate_output_table(rm, classes, groups);
    CHECK(out.header == std::vector<std::string>{"key", "value"});
    std::map<std::string, std::string> kv;
    for (const auto& r : out.rows) kv[r[0]] = r[1];
    CHECK(io::parse_double(kv.at("fsp.2.F")) == 0.5);
    CHECK(io::parse_double(kv.at("epi")) == doctest::Approx(1.0 / 3.0));
    CHECK(kv.count("fsp.2.ALL") == 1);
    CHECK(kv.count("n_selected.1.M") == 1);
    const io::Table back = roundtrip(out);
    CHECK(back.rows.size() == out.rows.size());
}
