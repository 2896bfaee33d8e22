#include "fasi/classifier.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "fasi/core.hpp"
#include "json.hpp"

namespace fasi::classifier {

namespace {

double sigmoid(double z) { return 1.0 / (1.0 + std::exp(-z)); }

double margin(const LogisticModel& m, const std::vector<double>& x, std::size_t g) {
    double z = m.intercept;
    for (std::size_t d = 0; d < m.feature_weights.size(); ++d) z += m.feature_weights[d] * x[d];
    if (!m.group_weights.empty()) z += m.group_weights.at(g);
    return z;
}

}  // namespace

LogisticModel train(const std::vector<std::vector<double>>& features,
                    const std::vector<std::size_t>& group_idx,
                    std::size_t n_groups,
                    const std::vector<std::uint8_t>& labels,
                    const TrainConfig& config) {
    const std::size_t n = features.size();
    if (n == 0 || labels.size() != n || group_idx.size() != n)
        throw std::invalid_argument("train: misaligned inputs");
    const std::size_t dim = features.front().size();
    bool any0 = false, any1 = false;
    for (std::size_t i = 0; i < n; ++i) {
        if (features[i].size() != dim) throw std::invalid_argument("train: ragged feature rows");
        for (double v : features[i])
            if (!std::isfinite(v)) throw ValidationError("train: non-finite feature value");
        (labels[i] ? any1 : any0) = true;
    }
    if (!any0 || !any1) throw ValidationError("train: single-class training data");

    LogisticModel model;
    model.feature_weights.assign(dim, 0.0);
    model.group_weights.assign(n_groups, 0.0);

    const double inv_n = 1.0 / static_cast<double>(n);
    auto objective = [&](const LogisticModel& m) {
        double ll = 0.0;
        for (std::size_t i = 0; i < n; ++i) {
            const double z = margin(m, features[i], group_idx[i]);
            // log p(y|z) = y*z - log(1 + e^z), in a stable form
            ll += (labels[i] ? z : 0.0) - (z > 0 ? z + std::log1p(std::exp(-z)) : std::log1p(std::exp(z)));
        }
        double pen = 0.0;
        for (double w : m.feature_weights) pen += w * w;
        for (double w : m.group_weights) pen += w * w;
        return ll * inv_n - 0.5 * config.l2 * pen;
    };

    std::vector<double> gf(dim), gg(n_groups);
    double gi = 0.0;
    double step = 1.0;
    double obj = objective(model);
    for (std::size_t iter = 1; iter <= config.max_iter; ++iter) {
        std::fill(gf.begin(), gf.end(), 0.0);
        std::fill(gg.begin(), gg.end(), 0.0);
        gi = 0.0;
        for (std::size_t i = 0; i < n; ++i) {
            const double resid = static_cast<double>(labels[i]) -
                                 sigmoid(margin(model, features[i], group_idx[i]));
            for (std::size_t d = 0; d < dim; ++d) gf[d] += resid * features[i][d];
            if (n_groups > 0) gg[group_idx[i]] += resid;
            gi += resid;
        }
        double gnorm = std::abs(gi * inv_n);
        for (std::size_t d = 0; d < dim; ++d) {
            gf[d] = gf[d] * inv_n - config.l2 * model.feature_weights[d];
            gnorm = std::max(gnorm, std::abs(gf[d]));
        }
        for (std::size_t g = 0; g < n_groups; ++g) {
            gg[g] = gg[g] * inv_n - config.l2 * model.group_weights[g];
            gnorm = std::max(gnorm, std::abs(gg[g]));
        }
        model.iterations = iter;
        model.final_grad_norm = gnorm;
        if (gnorm < config.tol) break;

        double g2 = gi * inv_n * gi * inv_n;
        for (double v : gf) g2 += v * v;
        for (double v : gg) g2 += v * v;

        // backtracking ascent step with a mild Armijo condition
        step = std::min(step * 2.0, 64.0);
        for (;;) {
            LogisticModel trial = model;
            for (std::size_t d = 0; d < dim; ++d) trial.feature_weights[d] += step * gf[d];
            for (std::size_t g = 0; g < n_groups; ++g) trial.group_weights[g] += step * gg[g];
            trial.intercept += step * gi * inv_n;
            const double trial_obj = objective(trial);
            if (trial_obj >= obj + 1e-4 * step * g2 || step < 1e-12) {
                model.feature_weights = std::move(trial.feature_weights);
                model.group_weights = std::move(trial.group_weights);
                model.intercept = trial.intercept;
                obj = trial_obj;
                break;
            }
            step *= 0.5;
        }
    }
    return model;
}

double predict(const LogisticModel& model, const std::vector<double>& x, std::size_t group_idx) {
    if (x.size() != model.feature_weights.size())
        throw std::invalid_argument("predict: feature dimension mismatch");
    return sigmoid(margin(model, x, group_idx));
}

using nlohmann::json;

std::string model_to_json_string(const LogisticModel& model) {
    json j;
    j["feature_weights"] = model.feature_weights;
    j["group_weights"] = model.group_weights;
    j["intercept"] = model.intercept;
    j["iterations"] = model.iterations;
    j["final_grad_norm"] = model.final_grad_norm;
    return j.dump(2);
}

LogisticModel model_from_json_string(const std::string& text) {
    json j;
    try {
        j = json::parse(text);
    } catch (const json::parse_error& e) {
        throw FormatError(std::string("model file: ") + e.what());
    }
    LogisticModel m;
    try {
        m.feature_weights = j.at("feature_weights").get<std::vector<double>>();
        m.group_weights = j.at("group_weights").get<std::vector<double>>();
        m.intercept = j.at("intercept").get<double>();
        m.iterations = j.at("iterations").get<std::size_t>();
        m.final_grad_norm = j.at("final_grad_norm").get<double>();
    } catch (const json::exception& e) {
        throw FormatError(std::string("model file: ") + e.what());
    }
    return m;
}

}  // namespace fasi::classifier
