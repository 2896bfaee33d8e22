#include "fasi/rvalue.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <stdexcept>

namespace fasi::rvalue {

std::string to_string(Variant v) {
    switch (v) {
        case Variant::standard: return "standard";
        case Variant::plus: return "plus";
        case Variant::conservative_standard: return "conservative-standard";
        case Variant::conservative_plus: return "conservative-plus";
    }
    return "plus";
}

std::optional<Variant> variant_from_string(const std::string& s) {
    if (s == "standard") return Variant::standard;
    if (s == "plus") return Variant::plus;
    if (s == "conservative-standard") return Variant::conservative_standard;
    if (s == "conservative-plus") return Variant::conservative_plus;
    return std::nullopt;
}

namespace {

bool is_plus(Variant v) {
    return v == Variant::plus || v == Variant::conservative_plus;
}

bool is_conservative(Variant v) {
    return v == Variant::conservative_standard || v == Variant::conservative_plus;
}

std::size_t count_ge(const std::vector<double>& sorted_asc, double s) {
    return sorted_asc.size() -
           static_cast<std::size_t>(std::lower_bound(sorted_asc.begin(), sorted_asc.end(), s) -
                                    sorted_asc.begin());
}

// Per-group sorted score pools for one class.
struct GroupPool {
    std::vector<double> cal_null;   // cal scores with Y != c, ascending
    std::vector<double> test;       // test scores, ascending
    std::vector<double> pool;       // cal (all) + test, ascending
    std::size_t n_cal = 0;          // all cal records of the group
};

std::map<std::string, GroupPool> build_pools(const std::vector<ScoreRecord>& cal,
                                             const std::vector<ScoreRecord>& test,
                                             const ClassSet& classes,
                                             std::size_t class_idx) {
    const std::string& cls = classes.labels.at(class_idx);
    std::map<std::string, GroupPool> pools;
    for (const auto& rec : cal) {
        if (!rec.label)
            throw ValidationError("record '" + rec.id + "': calibration record is unlabeled");
        auto& p = pools[rec.group];
        const double s = rec.scores.at(class_idx);
        ++p.n_cal;
        if (*rec.label != cls) p.cal_null.push_back(s);
        p.pool.push_back(s);
    }
    for (const auto& rec : test) {
        auto& p = pools[rec.group];
        const double s = rec.scores.at(class_idx);
        p.test.push_back(s);
        p.pool.push_back(s);
    }
    for (auto& [g, p] : pools) {
        std::sort(p.cal_null.begin(), p.cal_null.end());
        std::sort(p.test.begin(), p.test.end());
        std::sort(p.pool.begin(), p.pool.end());
    }
    return pools;
}

double raw_at(const GroupPool& p, double s, bool plus) {
    const double num =
        (static_cast<double>(count_ge(p.cal_null, s)) + 1.0) / (static_cast<double>(p.n_cal) + 1.0);
    double den;
    if (plus) {
        den = (static_cast<double>(count_ge(p.pool, s)) + 1.0) /
              (static_cast<double>(p.test.size() + p.n_cal) + 1.0);
    } else {
        den = static_cast<double>(count_ge(p.test, s)) / static_cast<double>(p.test.size());
    }
    return std::min(num / den, 1.0);
}

std::vector<double> raw_impl(const std::vector<ScoreRecord>& cal,
                             const std::vector<ScoreRecord>& test,
                             const ClassSet& classes,
                             std::size_t class_idx,
                             Variant variant) {
    auto pools = build_pools(cal, test, classes, class_idx);
    std::map<std::string, double> factor;
    if (is_conservative(variant))
        for (const auto& [g, p] : pools)
            factor[g] = (static_cast<double>(p.n_cal) + 1.0) /
                        (static_cast<double>(p.cal_null.size()) + 1.0);

    std::vector<double> out(test.size());
    for (std::size_t j = 0; j < test.size(); ++j) {
        const auto& p = pools.at(test[j].group);
        double r = raw_at(p, test[j].scores.at(class_idx), is_plus(variant));
        if (is_conservative(variant)) r = std::min(factor.at(test[j].group) * r, 1.0);
        out[j] = r;
    }
    return out;
}

}  // namespace

std::vector<double> raw_rvalues(const std::vector<ScoreRecord>& cal,
                                const std::vector<ScoreRecord>& test,
                                const ClassSet& classes,
                                std::size_t class_idx) {
    return raw_impl(cal, test, classes, class_idx, Variant::standard);
}

std::vector<double> raw_rvalues_plus(const std::vector<ScoreRecord>& cal,
                                     const std::vector<ScoreRecord>& test,
                                     const ClassSet& classes,
                                     std::size_t class_idx) {
    return raw_impl(cal, test, classes, class_idx, Variant::plus);
}

double conservative_factor(const std::vector<ScoreRecord>& cal,
                           const std::string& group,
                           const ClassSet& classes,
                           std::size_t class_idx) {
    const std::string& cls = classes.labels.at(class_idx);
    std::size_t n = 0, n_null = 0;
    for (const auto& rec : cal) {
        if (rec.group != group) continue;
        if (!rec.label)
            throw ValidationError("record '" + rec.id + "': calibration record is unlabeled");
        ++n;
        if (*rec.label != cls) ++n_null;
    }
    return (static_cast<double>(n) + 1.0) / (static_cast<double>(n_null) + 1.0);
}

std::vector<double> monotonize(const std::vector<ScoreRecord>& test,
                               std::size_t class_idx,
                               const std::vector<double>& raw) {
    if (raw.size() != test.size())
        throw std::invalid_argument("monotonize: raw size does not match test size");
    std::map<std::string, std::vector<std::size_t>> by_group;
    for (std::size_t j = 0; j < test.size(); ++j) by_group[test[j].group].push_back(j);

    std::vector<double> mono(raw.size());
    for (auto& [g, idx] : by_group) {
        std::stable_sort(idx.begin(), idx.end(), [&](std::size_t a, std::size_t b) {
            return test[a].scores.at(class_idx) < test[b].scores.at(class_idx);
        });
        // prefix minimum in ascending-score order, tie blocks share the value
        std::vector<double> acc(idx.size());
        double running = std::numeric_limits<double>::infinity();
        for (std::size_t k = 0; k < idx.size(); ++k) {
            running = std::min(running, raw[idx[k]]);
            acc[k] = running;
        }
        std::size_t k = idx.size();
        while (k > 0) {
            std::size_t hi = k - 1;
            std::size_t lo = hi;
            const double s = test[idx[hi]].scores.at(class_idx);
            while (lo > 0 && test[idx[lo - 1]].scores.at(class_idx) == s) --lo;
            for (std::size_t t = lo; t <= hi; ++t) mono[idx[t]] = acc[hi];
            k = lo;
        }
    }
    return mono;
}

double threshold_tau(const std::vector<ScoreRecord>& cal,
                     const std::vector<ScoreRecord>& test,
                     const std::string& group,
                     const ClassSet& classes,
                     std::size_t class_idx,
                     double alpha,
                     Variant variant) {
    const std::vector<double> raw = raw_impl(cal, test, classes, class_idx, variant);
    double tau = std::numeric_limits<double>::infinity();
    for (std::size_t j = 0; j < test.size(); ++j) {
        if (test[j].group != group) continue;
        if (raw[j] <= alpha) tau = std::min(tau, test[j].scores.at(class_idx));
    }
    return tau;
}

RValueTable compute_table(const std::vector<ScoreRecord>& cal,
                          const std::vector<ScoreRecord>& test,
                          const ClassSet& classes,
                          std::size_t class_idx,
                          Variant variant) {
    RValueTable table;
    table.class_label = classes.labels.at(class_idx);
    table.variant = variant;
    const std::vector<double> raw = raw_impl(cal, test, classes, class_idx, variant);
    const std::vector<double> mono = monotonize(test, class_idx, raw);
    table.rows.reserve(test.size());
    for (std::size_t j = 0; j < test.size(); ++j)
        table.rows.push_back({test[j].id, test[j].group, test[j].scores.at(class_idx), raw[j], mono[j]});
    return table;
}

std::vector<Selection> select(const std::vector<RValueTable>& tables,
                              const std::vector<double>& alpha,
                              const ClassSet& classes) {
    if (alpha.size() != classes.size())
        throw std::invalid_argument("select: one alpha per class required");
    // map canonical class order -> table
    std::vector<const RValueTable*> by_class(classes.size(), nullptr);
    for (const auto& t : tables) {
        const auto idx = classes.index_of(t.class_label);
        if (!idx) throw std::invalid_argument("select: table for unknown class '" + t.class_label + "'");
        by_class[*idx] = &t;
    }
    for (std::size_t c = 0; c < classes.size(); ++c)
        if (!by_class[c])
            throw std::invalid_argument("select: missing table for class '" + classes.labels[c] + "'");

    const std::size_t m = by_class[0]->rows.size();
    for (const auto* t : by_class)
        if (t->rows.size() != m) throw std::invalid_argument("select: tables differ in row count");

    std::vector<Selection> out;
    out.reserve(m);
    for (std::size_t j = 0; j < m; ++j) {
        for (std::size_t c = 1; c < classes.size(); ++c)
            if (by_class[c]->rows[j].id != by_class[0]->rows[j].id)
                throw std::invalid_argument("select: tables are not row-aligned");
        Selection sel;
        sel.id = by_class[0]->rows[j].id;
        double best = std::numeric_limits<double>::infinity();
        for (std::size_t c = 0; c < classes.size(); ++c) {
            const double r = by_class[c]->rows[j].mono_r;
            if (r <= alpha[c] && r < best) {
                best = r;
                sel.decision = classes.labels[c];
                sel.winning_r = r;
            }
        }
        out.push_back(std::move(sel));
    }
    return out;
}

}  // namespace fasi::rvalue
