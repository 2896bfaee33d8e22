#include "fasi/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <set>

namespace fasi::metrics {

namespace {

bool match(const Outcome& o, const std::optional<std::string>& cls,
           const std::optional<std::string>& group) {
    if (!o.decision) return false;
    if (cls && *o.decision != *cls) return false;
    if (group && o.group != *group) return false;
    return true;
}

struct Counts {
    long long selected = 0;
    long long wrong = 0;
};

Counts count_selected(const std::vector<Outcome>& outcomes, const std::optional<std::string>& cls,
                      const std::optional<std::string>& group) {
    Counts c;
    std::string missing;
    for (const auto& o : outcomes) {
        if (!match(o, cls, group)) continue;
        ++c.selected;
        if (!o.truth) {
            if (!missing.empty()) missing += ", ";
            missing += o.id;
            continue;
        }
        if (*o.truth != *o.decision) ++c.wrong;
    }
    if (!missing.empty()) throw ValidationError("missing truth for selected record(s): " + missing);
    return c;
}

}  // namespace

double fsp(const std::vector<Outcome>& outcomes, const std::optional<std::string>& cls,
           const std::optional<std::string>& group) {
    const Counts c = count_selected(outcomes, cls, group);
    if (c.selected == 0) return 0.0;
    return static_cast<double>(c.wrong) / static_cast<double>(c.selected);
}

double fsp_star(const std::vector<Outcome>& outcomes, const std::optional<std::string>& cls,
                const std::optional<std::string>& group) {
    const Counts c = count_selected(outcomes, cls, group);
    return static_cast<double>(c.wrong) / (static_cast<double>(c.selected) + 1.0);
}

double epi(const std::vector<Outcome>& outcomes) {
    if (outcomes.empty()) return 0.0;
    long long idle = 0;
    for (const auto& o : outcomes)
        if (!o.decision) ++idle;
    return static_cast<double>(idle) / static_cast<double>(outcomes.size());
}

double power_per_class(const std::vector<Outcome>& outcomes, const std::string& cls) {
    long long truly = 0, caught = 0;
    for (const auto& o : outcomes) {
        if (!o.truth || *o.truth != cls) continue;
        ++truly;
        if (o.decision && *o.decision == cls) ++caught;
    }
    if (truly == 0) return 0.0;
    return static_cast<double>(caught) / static_cast<double>(truly);
}

std::optional<double> gamma_estimate(const std::vector<ScoreRecord>& cal,
                                     const std::vector<ScoreRecord>& test,
                                     const ClassSet& classes,
                                     std::size_t class_idx,
                                     const std::string& group) {
    const std::string& cls = classes.labels.at(class_idx);
    auto null_prop = [&](const std::vector<ScoreRecord>& recs) -> std::optional<double> {
        long long n = 0, nulls = 0;
        for (const auto& r : recs) {
            if (r.group != group || !r.label) continue;
            ++n;
            if (*r.label != cls) ++nulls;
        }
        if (n == 0) return std::nullopt;
        return static_cast<double>(nulls) / static_cast<double>(n);
    };
    const auto pt = null_prop(test);
    const auto pc = null_prop(cal);
    if (!pt || !pc || *pc == 0.0) return std::nullopt;
    return *pt / *pc;
}

Stats aggregate(std::vector<double> values, const std::vector<double>& levels) {
    if (values.empty()) throw ValidationError("aggregate: empty replication list");
    // sorting first makes every statistic independent of replication order
    std::sort(values.begin(), values.end());
    Stats st;
    st.n = values.size();
    double sum = 0.0;
    for (double v : values) sum += v;
    st.mean = sum / static_cast<double>(st.n);
    if (st.n > 1 && values.front() != values.back()) {
        double ss = 0.0;
        for (double v : values) ss += (v - st.mean) * (v - st.mean);
        st.sd = std::sqrt(ss / static_cast<double>(st.n - 1));
    }
    st.quantiles.reserve(levels.size());
    for (double q : levels) {
        // nearest-rank: smallest value with at least ceil(q*n) mass below-or-at
        std::size_t rank = static_cast<std::size_t>(std::ceil(q * static_cast<double>(st.n)));
        if (rank < 1) rank = 1;
        if (rank > st.n) rank = st.n;
        st.quantiles.push_back(values[rank - 1]);
    }
    return st;
}

RunMetrics run_metrics(const std::vector<Outcome>& outcomes, const ClassSet& classes,
                       const GroupSet& groups) {
    RunMetrics rm;
    rm.epi = epi(outcomes);
    std::vector<std::string> group_keys = groups.labels;
    group_keys.push_back(kAll);
    std::vector<std::string> class_keys = classes.labels;
    class_keys.push_back(kAll);  // overall margin: no class restriction
    for (const auto& cls : classes.labels) rm.power[cls] = power_per_class(outcomes, cls);
    for (const auto& cls : class_keys) {
        const std::optional<std::string> cf =
            cls == kAll ? std::nullopt : std::optional<std::string>(cls);
        for (const auto& g : group_keys) {
            const std::optional<std::string> gf =
                g == kAll ? std::nullopt : std::optional<std::string>(g);
            const Counts c = count_selected(outcomes, cf, gf);
            RunMetrics::Cell cell;
            cell.n_selected = c.selected;
            cell.n_false = c.wrong;
            cell.fsp = c.selected == 0 ? 0.0
                                       : static_cast<double>(c.wrong) / static_cast<double>(c.selected);
            cell.fsp_star = static_cast<double>(c.wrong) / (static_cast<double>(c.selected) + 1.0);
            rm.cells[{cls, g}] = cell;
        }
    }
    return rm;
}

MetricsReport aggregate_runs(const std::vector<RunMetrics>& runs,
                             const std::vector<double>& quantile_levels) {
    if (runs.empty()) throw ValidationError("aggregate_runs: empty replication list");
    MetricsReport report;
    report.quantile_levels = quantile_levels;

    auto add_row = [&](const std::string& metric, const std::string& cls, const std::string& group,
                       std::vector<double> series, double mean_sel, double mean_false) {
        MetricsReport::Row row;
        row.metric = metric;
        row.cls = cls;
        row.group = group;
        row.stats = aggregate(std::move(series), quantile_levels);
        row.mean_selected = mean_sel;
        row.mean_false = mean_false;
        report.rows.push_back(std::move(row));
    };

    // key order of std::map gives a deterministic layout
    for (const auto& [key, cell0] : runs.front().cells) {
        std::vector<double> fsps, stars;
        double sel = 0.0, wrong = 0.0;
        fsps.reserve(runs.size());
        stars.reserve(runs.size());
        for (const auto& r : runs) {
            const auto& c = r.cells.at(key);
            fsps.push_back(c.fsp);
            stars.push_back(c.fsp_star);
            sel += static_cast<double>(c.n_selected);
            wrong += static_cast<double>(c.n_false);
        }
        sel /= static_cast<double>(runs.size());
        wrong /= static_cast<double>(runs.size());
        add_row("fsr", key.first, key.second, std::move(fsps), sel, wrong);
        add_row("fsr_star", key.first, key.second, std::move(stars), sel, wrong);
    }
    {
        std::vector<double> series;
        series.reserve(runs.size());
        for (const auto& r : runs) series.push_back(r.epi);
        add_row("epi", kAll, kAll, std::move(series), 0.0, 0.0);
    }
    for (const auto& [cls, v0] : runs.front().power) {
        std::vector<double> series;
        series.reserve(runs.size());
        for (const auto& r : runs) series.push_back(r.power.at(cls));
        add_row("power", cls, kAll, std::move(series), 0.0, 0.0);
    }
    for (const auto& [key, v0] : runs.front().gamma) {
        std::vector<double> series;
        for (const auto& r : runs) {
            const auto it = r.gamma.find(key);
            if (it != r.gamma.end() && std::isfinite(it->second)) series.push_back(it->second);
        }
        if (!series.empty()) add_row("gamma", key.first, key.second, std::move(series), 0.0, 0.0);
    }
    return report;
}

}  // namespace fasi::metrics
