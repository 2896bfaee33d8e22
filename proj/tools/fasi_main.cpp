#include <cstdlib>
#include <fstream>
#include <iostream>
#include <map>
#include <optional>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "fasi/conformal.hpp"
#include "fasi/core.hpp"
#include "fasi/io.hpp"
#include "fasi/metrics.hpp"
#include "fasi/oracle.hpp"
#include "fasi/rvalue.hpp"
#include "fasi/simulate.hpp"

namespace {

using namespace fasi;

std::ifstream open_input(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw FormatError("cannot open input file '" + path + "'");
    return in;
}

void write_output(const io::Table& table, const std::string& path) {
    if (path == "-") {
        io::write_table(table, std::cout);
        return;
    }
    std::ofstream out(path);
    if (!out) throw FormatError("cannot open output file '" + path + "'");
    io::write_table(table, out);
    if (!out.good()) throw FormatError("failed writing to '" + path + "'");
}

std::vector<std::string> split_list(const std::string& s, char sep) {
    std::vector<std::string> parts;
    std::stringstream ss(s);
    std::string item;
    while (std::getline(ss, item, sep)) parts.push_back(item);
    return parts;
}

std::uint64_t effective_seed(std::uint64_t cli_seed) {
    if (const char* env = std::getenv("FASI_SEED")) {
        char* end = nullptr;
        const unsigned long long v = std::strtoull(env, &end, 10);
        if (end == env || *end != '\0') throw FormatError("FASI_SEED is not an integer");
        return static_cast<std::uint64_t>(v);
    }
    return cli_seed;
}

rvalue::Variant parse_variant(const std::string& s) {
    const auto v = rvalue::variant_from_string(s);
    if (!v)
        throw FormatError("unknown variant '" + s +
                          "' (expected standard|plus|conservative-standard|conservative-plus)");
    return *v;
}

void check_alpha(double alpha, double lo_closed) {
    if (!(alpha >= lo_closed && alpha <= 1.0))
        throw ValidationError("alpha must lie in [" + io::format_double(lo_closed) + ", 1]");
}

// ---- rvalue ----------------------------------------------------------

struct RvalueArgs {
    std::string cal_path, test_path, out_path, cls;
    double alpha = 0.1;
    std::string variant = "plus";
};

void run_rvalue(const RvalueArgs& args) {
    auto cal_in = open_input(args.cal_path);
    const io::ScoreFileData cal = io::read_score_file(cal_in);
    auto test_in = open_input(args.test_path);
    const io::ScoreFileData test = io::read_score_file(test_in, cal.classes);

    const auto class_idx = cal.classes.index_of(args.cls);
    if (!class_idx) throw FormatError("missing score column 'score_" + args.cls + "'");
    check_alpha(args.alpha, 1e-12);

    std::vector<ScoreRecord> all = cal.records;
    all.insert(all.end(), test.records.begin(), test.records.end());
    const GroupSet groups = io::infer_groups(all);
    validate(all, cal.classes, groups);

    const rvalue::Variant variant = parse_variant(args.variant);
    const rvalue::RValueTable table =
        rvalue::compute_table(cal.records, test.records, cal.classes, *class_idx, variant);
    std::vector<rvalue::Selection> selections;
    selections.reserve(table.rows.size());
    for (const auto& row : table.rows) {
        rvalue::Selection sel;
        sel.id = row.id;
        if (row.mono_r <= args.alpha) {
            sel.decision = args.cls;
            sel.winning_r = row.mono_r;
        }
        selections.push_back(std::move(sel));
    }
    write_output(io::rvalue_output_table(table, selections), args.out_path);
}

// ---- conformal -------------------------------------------------------

struct ConformalArgs {
    std::string cal_path, test_path, out_path, cls;
    double alpha = 0.1;
};

void run_conformal(const ConformalArgs& args) {
    auto cal_in = open_input(args.cal_path);
    const io::ScoreFileData cal = io::read_score_file(cal_in);
    auto test_in = open_input(args.test_path);
    const io::ScoreFileData test = io::read_score_file(test_in, cal.classes);
    check_alpha(args.alpha, 0.0);

    std::size_t class_idx = 0;
    std::string class_label;
    if (!args.cls.empty()) {
        const auto idx = cal.classes.index_of(args.cls);
        if (!idx) throw FormatError("missing score column 'score_" + args.cls + "'");
        class_idx = *idx;
        class_label = args.cls;
    } else if (cal.classes.size() == 1) {
        class_label = cal.classes.labels.front();
    } else {
        throw FormatError("several score columns present; pass --class");
    }

    // null-class labels legitimately fall outside the score columns here, so
    // check ids/groups/scores with the labels stripped
    std::vector<ScoreRecord> all = cal.records;
    all.insert(all.end(), test.records.begin(), test.records.end());
    for (auto& rec : all) rec.label.reset();
    validate(all, cal.classes, io::infer_groups(all));
    std::size_t labeled_target = 0;
    for (const auto& rec : cal.records)
        if (rec.label && *rec.label == class_label) ++labeled_target;
    if (labeled_target > 0)
        std::cerr << "warning: " << labeled_target << " calibration record(s) carry label '"
                  << class_label << "'; a one-class pool should exclude the target class\n";

    std::vector<double> cal_scores;
    cal_scores.reserve(cal.records.size());
    for (const auto& rec : cal.records) cal_scores.push_back(rec.scores.at(class_idx));
    std::vector<double> test_scores;
    std::vector<std::string> ids;
    for (const auto& rec : test.records) {
        test_scores.push_back(rec.scores.at(class_idx));
        ids.push_back(rec.id);
    }

    const conformal::Result result = conformal::bh_qvalues(cal_scores, test_scores);
    if (result.cal_empty)
        std::cerr << "warning: empty calibration pool, every p-value is 1\n";
    write_output(io::conformal_output_table(ids, test_scores, result, args.alpha, class_label),
                 args.out_path);
}

// ---- evaluate --------------------------------------------------------

struct EvaluateArgs {
    std::string selections_path, truth_path, out_path;
};

void run_evaluate(const EvaluateArgs& args) {
    auto sel_in = open_input(args.selections_path);
    const io::Table sel = io::read_table(sel_in);
    auto truth_in = open_input(args.truth_path);
    const io::Table truth = io::read_table(truth_in);

    const std::size_t sid = sel.column("id");
    const std::size_t sgroup = sel.column("group");
    const std::size_t sdec = sel.column("decision");
    const std::size_t tid = truth.column("id");
    const std::size_t tlabel = truth.column("label");

    std::map<std::string, std::string> truth_by_id;
    for (const auto& row : truth.rows)
        if (!truth_by_id.emplace(row[tid], row[tlabel]).second)
            throw ValidationError("duplicate id '" + row[tid] + "' in truth file");

    std::vector<metrics::Outcome> outcomes;
    std::set<std::string> class_names, group_names;
    for (const auto& row : sel.rows) {
        metrics::Outcome o;
        o.id = row[sid];
        o.group = row[sgroup];
        group_names.insert(o.group);
        const std::string& dec = row[sdec];
        if (!dec.empty() && dec != "indecision") {
            o.decision = dec;
            class_names.insert(dec);
        }
        const auto it = truth_by_id.find(o.id);
        if (it != truth_by_id.end() && !it->second.empty()) {
            o.truth = it->second;
            class_names.insert(it->second);
        }
        outcomes.push_back(std::move(o));
    }
    if (class_names.empty()) throw ValidationError("no classes observed in selections or truth");

    ClassSet classes;
    classes.labels.assign(class_names.begin(), class_names.end());
    GroupSet groups;
    groups.labels.assign(group_names.begin(), group_names.end());

    const metrics::RunMetrics rm = metrics::run_metrics(outcomes, classes, groups);
    write_output(io::evaluate_output_table(rm, classes, groups), args.out_path);
}

// ---- simulate --------------------------------------------------------

struct SimulateArgs {
    int scenario = 1;
    std::size_t reps = 500;
    std::string alpha = "0.1";
    std::string pi2f = "0.2:0.8:0.15";
    std::uint64_t seed = 1;
    std::string methods = "fasi,fcc";
    std::string scores = "oracle";
    std::string variant = "plus";
    std::string mixture_path;
    std::string out_path;
    unsigned threads = 0;
};

std::vector<double> parse_grid(const std::string& text) {
    std::vector<double> grid;
    if (text.empty() || text == "none") return grid;
    if (text.find(':') != std::string::npos) {
        const auto parts = split_list(text, ':');
        if (parts.size() != 3) throw FormatError("grid must be LO:HI:STEP");
        const double lo = io::parse_double(parts[0]);
        const double hi = io::parse_double(parts[1]);
        const double step = io::parse_double(parts[2]);
        if (step <= 0) throw FormatError("grid step must be positive");
        return oracle::uniform_grid(lo, hi, step);
    }
    for (const auto& part : split_list(text, ',')) grid.push_back(io::parse_double(part));
    return grid;
}

void run_simulate(const SimulateArgs& args) {
    sim::ScenarioConfig config = sim::scenario_preset(args.scenario);
    if (!args.mixture_path.empty()) {
        auto in = open_input(args.mixture_path);
        std::stringstream buffer;
        buffer << in.rdbuf();
        config.mixture = oracle::mixture_from_json_string(buffer.str());
    }
    config.replications = args.reps;
    config.seed = effective_seed(args.seed);
    config.threads = args.threads;
    config.variant = parse_variant(args.variant);
    config.sweep_grid = parse_grid(args.pi2f);

    const auto alphas = split_list(args.alpha, ',');
    if (alphas.size() == 1) {
        const double a = io::parse_double(alphas[0]);
        check_alpha(a, 1e-12);
        config.alpha.assign(config.mixture.classes.size(), a);
    } else {
        config.alpha.clear();
        for (const auto& s : alphas) {
            const double a = io::parse_double(s);
            check_alpha(a, 1e-12);
            config.alpha.push_back(a);
        }
    }

    config.methods.clear();
    for (const auto& name : split_list(args.methods, ',')) {
        const auto m = sim::method_from_string(name);
        if (!m) throw FormatError("unknown method '" + name + "'");
        config.methods.push_back(*m);
    }
    if (args.scores == "oracle")
        config.score_mode = sim::ScoreMode::oracle;
    else if (args.scores == "logistic")
        config.score_mode = sim::ScoreMode::logistic;
    else
        throw FormatError("unknown score mode '" + args.scores + "' (expected oracle|logistic)");

    std::cerr << "simulate: scenario " << args.scenario << ", " << config.replications
              << " replications, " << (config.sweep_grid.empty() ? 1 : config.sweep_grid.size())
              << " grid point(s)\n";
    const sim::SweepResult result = sim::sweep(config);
    write_output(io::sweep_output_table(result, std::to_string(args.scenario)), args.out_path);
    std::cerr << "simulate: done\n";
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"fairness-adjusted selective classification toolkit"};
    app.require_subcommand(1);

    RvalueArgs rv;
    auto* rv_cmd = app.add_subcommand("rvalue", "compute R-values and selections for one class");
    rv_cmd->add_option("--cal", rv.cal_path, "labeled calibration score file")->required();
    rv_cmd->add_option("--test", rv.test_path, "test score file")->required();
    rv_cmd->add_option("--class", rv.cls, "target class label")->required();
    rv_cmd->add_option("--alpha", rv.alpha, "FSR target level");
    rv_cmd->add_option("--variant", rv.variant,
                       "standard|plus|conservative-standard|conservative-plus");
    rv_cmd->add_option("--out", rv.out_path, "output file ('-' for stdout)")->required();

    ConformalArgs cf;
    auto* cf_cmd = app.add_subcommand("conformal", "one-class conformal p-values and BH q-values");
    cf_cmd->add_option("--cal", cf.cal_path, "one-class calibration score file")->required();
    cf_cmd->add_option("--test", cf.test_path, "test score file")->required();
    cf_cmd->add_option("--alpha", cf.alpha, "selection level");
    cf_cmd->add_option("--class", cf.cls, "score column (optional when only one exists)");
    cf_cmd->add_option("--out", cf.out_path, "output file ('-' for stdout)")->required();

    EvaluateArgs ev;
    auto* ev_cmd = app.add_subcommand("evaluate", "realized metrics for a decision file");
    ev_cmd->add_option("--selections", ev.selections_path, "decisions file (id,group,decision)")
        ->required();
    ev_cmd->add_option("--truth", ev.truth_path, "truth file (id,label)")->required();
    ev_cmd->add_option("--out", ev.out_path, "output file ('-' for stdout)")->required();

    SimulateArgs sm;
    auto* sm_cmd = app.add_subcommand("simulate", "replicated mixture-model study");
    sm_cmd->add_option("--scenario", sm.scenario, "1 or 2")->check(CLI::Range(1, 2));
    sm_cmd->add_option("--reps", sm.reps, "replication count");
    sm_cmd->add_option("--alpha", sm.alpha, "level, single value or one per class");
    sm_cmd->add_option("--pi2f", sm.pi2f,
                       "sweep grid LO:HI:STEP, comma list, or 'none' to keep the mixture priors");
    sm_cmd->add_option("--seed", sm.seed, "base seed (FASI_SEED overrides)");
    sm_cmd->add_option("--methods", sm.methods, "comma list of fasi,fcc,rcc,oracle");
    sm_cmd->add_option("--scores", sm.scores, "oracle|logistic");
    sm_cmd->add_option("--variant", sm.variant, "R-value variant for the fasi method");
    sm_cmd->add_option("--mixture", sm.mixture_path, "mixture spec JSON overriding the preset");
    sm_cmd->add_option("--threads", sm.threads, "worker threads (0 = all cores)");
    sm_cmd->add_option("--out", sm.out_path, "output file ('-' for stdout)")->required();

    try {
        app.parse(argc, argv);
        if (*rv_cmd) run_rvalue(rv);
        if (*cf_cmd) run_conformal(cf);
        if (*ev_cmd) run_evaluate(ev);
        if (*sm_cmd) run_simulate(sm);
    } catch (const CLI::ParseError& e) {
        return app.exit(e);
    } catch (const FormatError& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 2;
    } catch (const ValidationError& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 3;
    } catch (const std::exception& e) {
        std::cerr << "internal error: " << e.what() << '\n';
        return 4;
    }
    return 0;
}
