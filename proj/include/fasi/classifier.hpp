#pragma once

#include <cstdint>
#include <string>
#include <vector>

namespace fasi::classifier {

struct TrainConfig {
    std::size_t max_iter = 5000;
    double tol = 1e-8;   // on the gradient infinity norm
    double l2 = 1e-3;    // keeps the optimum finite under separation
};

// Binary logistic scorer over raw features plus a one-hot group encoding.
// The group indicator is part of the feature set by default; dropping it is
// the explicit reduced-covariate choice (n_groups == 0), never the default.
struct LogisticModel {
    std::vector<double> feature_weights;
    std::vector<double> group_weights;  // empty when the group is dropped
    double intercept = 0.0;
    std::size_t iterations = 0;
    double final_grad_norm = 0.0;
};

// Maximizes the mean log-likelihood minus (l2/2)*||w||^2 (intercept
// unpenalized) by gradient ascent with backtracking, zero-initialized and
// fully deterministic. Requires both label values to be present.
LogisticModel train(const std::vector<std::vector<double>>& features,
                    const std::vector<std::size_t>& group_idx,
                    std::size_t n_groups,
                    const std::vector<std::uint8_t>& labels,
                    const TrainConfig& config = {});

double predict(const LogisticModel& model, const std::vector<double>& x, std::size_t group_idx);

std::string model_to_json_string(const LogisticModel& model);
LogisticModel model_from_json_string(const std::string& text);

}  // namespace fasi::classifier
