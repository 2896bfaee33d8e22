#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "fasi/core.hpp"
#include "fasi/rng.hpp"

namespace fasi::oracle {

// Diagonal-covariance Gaussian component.
struct Gaussian {
    std::vector<double> mean;
    std::vector<double> var;
};

// Generative model: A ~ group_prior, Y|A ~ class_prior[a], X|Y,A ~ component.
struct MixtureSpec {
    GroupSet groups;
    ClassSet classes;
    std::vector<double> group_prior;                // per group
    std::vector<std::vector<double>> class_prior;   // [group][class]
    std::vector<std::vector<Gaussian>> components;  // [group][class]
    std::size_t dim = 0;

    void validate() const;  // throws ValidationError
};

std::string mixture_to_json_string(const MixtureSpec& spec);
MixtureSpec mixture_from_json_string(const std::string& text);

double log_density(const Gaussian& g, const std::vector<double>& x);

// Group-conditional Bayes posterior P(Y=c | X=x, A=a); the full covariate
// oracle score.
double posterior_score(const std::vector<double>& x, std::size_t group_idx, std::size_t class_idx,
                       const MixtureSpec& spec);

// Group-marginalized posterior P(Y=c | X=x); the reduced covariate score.
double rcc_score(const std::vector<double>& x, std::size_t class_idx, const MixtureSpec& spec);

struct Draw {
    std::size_t group_idx = 0;
    std::size_t class_idx = 0;
    std::vector<double> x;
};

Draw draw(const MixtureSpec& spec, rng::Engine& eng);
Draw draw_within_group(const MixtureSpec& spec, std::size_t group_idx, rng::Engine& eng);

// Monte Carlo estimate of Q_a^c(t) = P(Y != c | S^c >= t, A = a) on a fixed
// grid, with per-point standard errors. Grid points no draw exceeds are
// marked undefined (NaN), not interpolated.
struct QCurve {
    std::size_t group_idx = 0;
    std::size_t class_idx = 0;
    std::vector<double> grid;         // ascending thresholds
    std::vector<double> q;            // NaN where undefined
    std::vector<double> se;
    std::vector<std::int64_t> n_at;   // draws with score >= t
    std::vector<double> run_min;      // running min of q over defined points <= t
    std::size_t mc_n = 0;
    std::uint64_t seed = 0;
    std::size_t chunk_size = 0;       // chunking metadata; draws are chunked with
    std::size_t n_chunks = 0;         // per-chunk streams derived from (seed, chunk)
};

std::vector<double> uniform_grid(double lo, double hi, double step);

QCurve q_curve(const MixtureSpec& spec, std::size_t group_idx, std::size_t class_idx,
               std::vector<double> grid, std::size_t mc_n, std::uint64_t seed,
               unsigned threads = 0);

// Rebuilds run_min; used after constructing a curve by hand.
void recompute_running_min(QCurve& curve);

// R(s) = inf over defined grid points {t <= s} of Q(t); falls back to the
// first defined grid value when s sits below the whole grid.
double theoretical_rvalue(const QCurve& curve, double s);

// Closed-form Q for a binary equal-variance spec evaluated via the linear
// discriminant; validates the Monte Carlo path.
std::optional<double> analytic_q_binary(const MixtureSpec& spec, std::size_t group_idx,
                                        std::size_t class_idx, double t);

struct Decision {
    int cls = 0;  // 0 = indecision, otherwise 1-based class index
    double winning_r = 1.0;
    bool overlap = false;  // both classes fired; resolved by smaller R
};

// delta = 1{R1 <= a1} + 2*1{R2 <= a2}, overlaps resolved by the smaller
// R-value (canonical order on exact ties).
std::vector<Decision> oracle_rule(const std::vector<double>& r1, const std::vector<double>& r2,
                                  double alpha1, double alpha2);

// Ratio-of-sums estimator of the marginal FSR: pools counts across
// replications and divides once at the end.
struct MfsrCounter {
    long long selected = 0;
    long long errors = 0;

    void add(int decision, int truth, std::size_t group_idx, int cls, std::size_t group);
    std::optional<double> value() const;  // nullopt when nothing selected
};

std::optional<double> mfsr(const std::vector<int>& decisions, const std::vector<int>& truths,
                           const std::vector<std::size_t>& groups, int cls, std::size_t group);

}  // namespace fasi::oracle
