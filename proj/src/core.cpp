#include "fasi/core.hpp"

#include <algorithm>
#include <cmath>
#include <unordered_set>

#include "fasi/rng.hpp"

namespace fasi {

std::optional<std::size_t> ClassSet::index_of(const std::string& label) const {
    for (std::size_t i = 0; i < labels.size(); ++i)
        if (labels[i] == label) return i;
    return std::nullopt;
}

std::optional<std::size_t> GroupSet::index_of(const std::string& label) const {
    for (std::size_t i = 0; i < labels.size(); ++i)
        if (labels[i] == label) return i;
    return std::nullopt;
}

namespace {

void check_label_set(const std::vector<std::string>& labels, const char* what) {
    if (labels.empty()) throw ValidationError(std::string(what) + " set is empty");
    std::unordered_set<std::string> seen;
    for (const auto& l : labels)
        if (!seen.insert(l).second)
            throw ValidationError(std::string(what) + " set has duplicate label '" + l + "'");
}

}  // namespace

void ClassSet::validate() const { check_label_set(labels, "class"); }
void GroupSet::validate() const { check_label_set(labels, "group"); }

const std::vector<ScoreRecord>& validate(const std::vector<ScoreRecord>& records,
                                         const ClassSet& classes,
                                         const GroupSet& groups) {
    classes.validate();
    groups.validate();
    std::unordered_set<std::string> ids;
    ids.reserve(records.size());
    for (const auto& rec : records) {
        if (!ids.insert(rec.id).second)
            throw ValidationError("duplicate id '" + rec.id + "'");
        if (!groups.index_of(rec.group))
            throw ValidationError("record '" + rec.id + "': unknown group '" + rec.group + "'");
        if (rec.scores.size() != classes.size())
            throw ValidationError("record '" + rec.id + "': expected " +
                                  std::to_string(classes.size()) + " scores, got " +
                                  std::to_string(rec.scores.size()));
        for (std::size_t c = 0; c < rec.scores.size(); ++c) {
            const double s = rec.scores[c];
            if (!(s >= 0.0 && s <= 1.0))
                throw ValidationError("record '" + rec.id + "': score out of range for class '" +
                                      classes.labels[c] + "'");
        }
        if (rec.label && !classes.index_of(*rec.label))
            throw ValidationError("record '" + rec.id + "': unknown class '" + *rec.label + "'");
    }
    return records;
}

std::vector<std::size_t> split_permutation(const std::vector<std::string>& ids, std::uint64_t seed) {
    // canonical order by id, then a seeded Fisher-Yates pass
    std::vector<std::size_t> order(ids.size());
    for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
    std::sort(order.begin(), order.end(),
              [&](std::size_t a, std::size_t b) { return ids[a] < ids[b]; });
    rng::Engine eng(rng::derive(seed, {0x73706c6974ULL}));  // "split" stream
    rng::shuffle(order, eng);
    return order;
}

DatasetSplit split(const std::vector<ScoreRecord>& records,
                   std::size_t n_train,
                   std::size_t n_cal,
                   std::uint64_t seed) {
    if (n_train + n_cal > records.size())
        throw ValidationError("split sizes exceed population: " + std::to_string(n_train) + " + " +
                              std::to_string(n_cal) + " > " + std::to_string(records.size()));
    for (const auto& rec : records)
        if (!rec.label) throw ValidationError("record '" + rec.id + "': unlabeled record in split input");

    std::vector<std::string> ids(records.size());
    for (std::size_t i = 0; i < records.size(); ++i) ids[i] = records[i].id;
    const std::vector<std::size_t> order = split_permutation(ids, seed);

    DatasetSplit out;
    out.seed = seed;
    out.train.reserve(n_train);
    out.cal.reserve(n_cal);
    out.test.reserve(records.size() - n_train - n_cal);
    for (std::size_t i = 0; i < order.size(); ++i) {
        const auto& rec = records[order[i]];
        if (i < n_train)
            out.train.push_back(rec);
        else if (i < n_train + n_cal)
            out.cal.push_back(rec);
        else
            out.test.push_back(rec);
    }
    return out;
}

}  // namespace fasi
