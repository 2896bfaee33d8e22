#pragma once

#include <vector>

namespace fasi::conformal {

// p = (#{cal >= t} + 1) / (n_cal + 1). Larger score means more likely the
// target class, so the comparison direction is ">= t" throughout. An empty
// calibration pool gives p = 1 for every t.
double conformal_pvalue(const std::vector<double>& cal_scores, double t);

// Ghat(t) = (1/m) #{test >= t}
double empirical_G(const std::vector<double>& test_scores, double t);

// Per test point (aligned with input order): conformal p-value, the raw BH
// q-value p/Ghat, and its monotonized version (running min over test points
// with score <= own, self included). q-values can exceed 1; they are kept
// raw here and capped only at reporting time, so the step-up correspondence
// stays exact.
struct Result {
    std::vector<double> p;
    std::vector<double> q_raw;
    std::vector<double> q_mono;
    bool cal_empty = false;
};

Result bh_qvalues(const std::vector<double>& cal_scores, const std::vector<double>& test_scores);

}  // namespace fasi::conformal
