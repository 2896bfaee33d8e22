#pragma once

#include <cstdint>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

namespace fasi {

// Thrown when input data breaks a domain invariant (bad score range,
// unknown group, duplicate id, ...). The CLI maps this to exit code 3.
class ValidationError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

// Thrown on malformed files / schema mismatches. CLI exit code 2.
class FormatError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

// Ordered label sets. Order is canonical: it fixes score-column alignment
// and the deterministic tie-break at selection time.
struct ClassSet {
    std::vector<std::string> labels;

    std::size_t size() const { return labels.size(); }
    std::optional<std::size_t> index_of(const std::string& label) const;
    void validate() const;  // non-empty, no duplicates
};

struct GroupSet {
    std::vector<std::string> labels;

    std::size_t size() const { return labels.size(); }
    std::optional<std::size_t> index_of(const std::string& label) const;
    void validate() const;
};

// One individual: opaque id, protected group, one confidence score per
// class (aligned with the ClassSet order), and an optional true label.
struct ScoreRecord {
    std::string id;
    std::string group;
    std::vector<double> scores;
    std::optional<std::string> label;
};

// Disjoint train / calibration / test partitions plus the seed that
// produced them.
struct DatasetSplit {
    std::vector<ScoreRecord> train;
    std::vector<ScoreRecord> cal;
    std::vector<ScoreRecord> test;
    std::uint64_t seed = 0;
};

// Checks every record against the declared class/group sets. Throws
// ValidationError naming the first offending record id. Returns its input.
const std::vector<ScoreRecord>& validate(const std::vector<ScoreRecord>& records,
                                         const ClassSet& classes,
                                         const GroupSet& groups);

// The permutation behind split(): indices canonically sorted by id, then
// shuffled with the seeded engine. Exposed so other data carriers can be
// partitioned with identical semantics.
std::vector<std::size_t> split_permutation(const std::vector<std::string>& ids, std::uint64_t seed);

// Seeded random partition with uniform permutation semantics. Records are
// canonically sorted by id before shuffling, so the result does not depend
// on input row order. Requires labels on every record and
// n_train + n_cal <= records.size(); the remainder becomes the test part.
DatasetSplit split(const std::vector<ScoreRecord>& records,
                   std::size_t n_train,
                   std::size_t n_cal,
                   std::uint64_t seed);

}  // namespace fasi
