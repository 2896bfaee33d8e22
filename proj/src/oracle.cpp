#include "fasi/oracle.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

#include "fasi/parallel.hpp"
#include "json.hpp"

namespace fasi::oracle {

namespace {

constexpr double kLog2Pi = 1.8378770664093454835606594728112;

double logsumexp(const std::vector<double>& v) {
    double mx = -std::numeric_limits<double>::infinity();
    for (double x : v) mx = std::max(mx, x);
    if (!std::isfinite(mx)) return mx;
    double s = 0.0;
    for (double x : v) s += std::exp(x - mx);
    return mx + std::log(s);
}

double phi_upper(double z) { return 0.5 * std::erfc(z / std::sqrt(2.0)); }

}  // namespace

void MixtureSpec::validate() const {
    groups.validate();
    classes.validate();
    const std::size_t na = groups.size(), nc = classes.size();
    auto check_simplex = [](const std::vector<double>& p, const std::string& what) {
        double sum = 0.0;
        for (double v : p) {
            if (!(v >= 0.0)) throw ValidationError("mixture: negative prior in " + what);
            sum += v;
        }
        if (std::abs(sum - 1.0) > 1e-9)
            throw ValidationError("mixture: " + what + " priors sum to " + std::to_string(sum));
    };
    if (group_prior.size() != na) throw ValidationError("mixture: group_prior size mismatch");
    check_simplex(group_prior, "group");
    if (class_prior.size() != na || components.size() != na)
        throw ValidationError("mixture: per-group table size mismatch");
    for (std::size_t a = 0; a < na; ++a) {
        if (class_prior[a].size() != nc || components[a].size() != nc)
            throw ValidationError("mixture: per-class table size mismatch in group '" +
                                  groups.labels[a] + "'");
        check_simplex(class_prior[a], "class|" + groups.labels[a]);
        for (std::size_t c = 0; c < nc; ++c) {
            const auto& g = components[a][c];
            if (g.mean.size() != dim || g.var.size() != dim)
                throw ValidationError("mixture: component dimension mismatch");
            for (double v : g.var)
                if (!(v > 0.0)) throw ValidationError("mixture: non-positive variance");
        }
    }
    if (dim == 0) throw ValidationError("mixture: dimension must be positive");
}

double log_density(const Gaussian& g, const std::vector<double>& x) {
    double acc = 0.0;
    for (std::size_t d = 0; d < x.size(); ++d) {
        const double z = x[d] - g.mean[d];
        acc += -0.5 * (kLog2Pi + std::log(g.var[d])) - z * z / (2.0 * g.var[d]);
    }
    return acc;
}

double posterior_score(const std::vector<double>& x, std::size_t group_idx, std::size_t class_idx,
                       const MixtureSpec& spec) {
    const std::size_t nc = spec.classes.size();
    std::vector<double> logw(nc);
    for (std::size_t c = 0; c < nc; ++c) {
        const double prior = spec.class_prior[group_idx][c];
        logw[c] = prior > 0.0 ? std::log(prior) + log_density(spec.components[group_idx][c], x)
                              : -std::numeric_limits<double>::infinity();
    }
    const double lse = logsumexp(logw);
    if (!std::isfinite(lse)) throw ValidationError("degenerate point: all densities vanish");
    return std::exp(logw[class_idx] - lse);
}

double rcc_score(const std::vector<double>& x, std::size_t class_idx, const MixtureSpec& spec) {
    const std::size_t na = spec.groups.size(), nc = spec.classes.size();
    std::vector<double> all;
    std::vector<double> target;
    all.reserve(na * nc);
    target.reserve(na);
    for (std::size_t a = 0; a < na; ++a) {
        for (std::size_t c = 0; c < nc; ++c) {
            const double prior = spec.group_prior[a] * spec.class_prior[a][c];
            const double lw = prior > 0.0
                                  ? std::log(prior) + log_density(spec.components[a][c], x)
                                  : -std::numeric_limits<double>::infinity();
            all.push_back(lw);
            if (c == class_idx) target.push_back(lw);
        }
    }
    const double lse = logsumexp(all);
    if (!std::isfinite(lse)) throw ValidationError("degenerate point: all densities vanish");
    return std::exp(logsumexp(target) - lse);
}

namespace {

std::size_t pick_categorical(const std::vector<double>& p, rng::Engine& eng) {
    const double u = eng.uniform();
    double acc = 0.0;
    for (std::size_t i = 0; i + 1 < p.size(); ++i) {
        acc += p[i];
        if (u < acc) return i;
    }
    return p.size() - 1;
}

std::vector<double> draw_component(const Gaussian& g, rng::Engine& eng) {
    std::vector<double> x(g.mean.size());
    for (std::size_t d = 0; d < x.size(); ++d) x[d] = g.mean[d] + std::sqrt(g.var[d]) * eng.normal();
    return x;
}

}  // namespace

Draw draw(const MixtureSpec& spec, rng::Engine& eng) {
    Draw d;
    d.group_idx = pick_categorical(spec.group_prior, eng);
    d.class_idx = pick_categorical(spec.class_prior[d.group_idx], eng);
    d.x = draw_component(spec.components[d.group_idx][d.class_idx], eng);
    return d;
}

Draw draw_within_group(const MixtureSpec& spec, std::size_t group_idx, rng::Engine& eng) {
    Draw d;
    d.group_idx = group_idx;
    d.class_idx = pick_categorical(spec.class_prior[group_idx], eng);
    d.x = draw_component(spec.components[group_idx][d.class_idx], eng);
    return d;
}

std::vector<double> uniform_grid(double lo, double hi, double step) {
    std::vector<double> grid;
    for (long long k = 0;; ++k) {
        const double t = lo + static_cast<double>(k) * step;
        if (t > hi + step * 0.5) break;
        grid.push_back(std::min(t, hi));
    }
    return grid;
}

QCurve q_curve(const MixtureSpec& spec, std::size_t group_idx, std::size_t class_idx,
               std::vector<double> grid, std::size_t mc_n, std::uint64_t seed, unsigned threads) {
    spec.validate();
    std::sort(grid.begin(), grid.end());

    QCurve curve;
    curve.group_idx = group_idx;
    curve.class_idx = class_idx;
    curve.grid = std::move(grid);
    curve.mc_n = mc_n;
    curve.seed = seed;
    curve.chunk_size = 1 << 16;
    curve.n_chunks = (mc_n + curve.chunk_size - 1) / curve.chunk_size;

    std::vector<double> scores(mc_n);
    std::vector<std::uint8_t> is_null(mc_n);
    par::parallel_for(curve.n_chunks, threads, [&](std::size_t chunk) {
        rng::Engine eng(rng::derive(seed, {chunk}));
        const std::size_t begin = chunk * curve.chunk_size;
        const std::size_t end = std::min(mc_n, begin + curve.chunk_size);
        for (std::size_t i = begin; i < end; ++i) {
            const Draw d = draw_within_group(spec, group_idx, eng);
            scores[i] = posterior_score(d.x, group_idx, class_idx, spec);
            is_null[i] = d.class_idx != class_idx;
        }
    });

    std::vector<std::size_t> order(mc_n);
    std::iota(order.begin(), order.end(), 0);
    std::sort(order.begin(), order.end(),
              [&](std::size_t a, std::size_t b) { return scores[a] < scores[b]; });
    std::vector<double> sorted_scores(mc_n);
    std::vector<std::int64_t> suffix_nulls(mc_n + 1, 0);
    for (std::size_t i = 0; i < mc_n; ++i) sorted_scores[i] = scores[order[i]];
    for (std::size_t i = mc_n; i > 0; --i)
        suffix_nulls[i - 1] = suffix_nulls[i] + (is_null[order[i - 1]] ? 1 : 0);

    const double nan = std::numeric_limits<double>::quiet_NaN();
    curve.q.assign(curve.grid.size(), nan);
    curve.se.assign(curve.grid.size(), nan);
    curve.n_at.assign(curve.grid.size(), 0);
    for (std::size_t i = 0; i < curve.grid.size(); ++i) {
        const auto it =
            std::lower_bound(sorted_scores.begin(), sorted_scores.end(), curve.grid[i]);
        const std::size_t idx = static_cast<std::size_t>(it - sorted_scores.begin());
        const std::int64_t n_sel = static_cast<std::int64_t>(mc_n - idx);
        curve.n_at[i] = n_sel;
        if (n_sel == 0) continue;  // undefined at this threshold
        const double q = static_cast<double>(suffix_nulls[idx]) / static_cast<double>(n_sel);
        curve.q[i] = q;
        curve.se[i] = std::sqrt(q * (1.0 - q) / static_cast<double>(n_sel));
    }
    recompute_running_min(curve);
    return curve;
}

void recompute_running_min(QCurve& curve) {
    curve.run_min.assign(curve.grid.size(), std::numeric_limits<double>::quiet_NaN());
    double running = std::numeric_limits<double>::quiet_NaN();
    for (std::size_t i = 0; i < curve.grid.size(); ++i) {
        if (!std::isnan(curve.q[i]))
            running = std::isnan(running) ? curve.q[i] : std::min(running, curve.q[i]);
        curve.run_min[i] = running;
    }
}

double theoretical_rvalue(const QCurve& curve, double s) {
    if (curve.grid.empty()) return std::numeric_limits<double>::quiet_NaN();
    // largest grid point <= s
    auto it = std::upper_bound(curve.grid.begin(), curve.grid.end(), s);
    if (it == curve.grid.begin()) {
        // s below the whole grid: fall back to the first defined value
        for (std::size_t i = 0; i < curve.grid.size(); ++i)
            if (!std::isnan(curve.q[i])) return curve.q[i];
        return std::numeric_limits<double>::quiet_NaN();
    }
    const std::size_t idx = static_cast<std::size_t>(it - curve.grid.begin()) - 1;
    if (!std::isnan(curve.run_min[idx])) return curve.run_min[idx];
    for (std::size_t i = idx + 1; i < curve.grid.size(); ++i)
        if (!std::isnan(curve.q[i])) return curve.q[i];
    return std::numeric_limits<double>::quiet_NaN();
}

std::optional<double> analytic_q_binary(const MixtureSpec& spec, std::size_t group_idx,
                                        std::size_t class_idx, double t) {
    if (spec.classes.size() != 2) return std::nullopt;
    const std::size_t other = 1 - class_idx;
    const auto& gc = spec.components[group_idx][class_idx];
    const auto& go = spec.components[group_idx][other];
    if (gc.var != go.var) return std::nullopt;  // needs shared covariance
    const double pc = spec.class_prior[group_idx][class_idx];
    const double po = spec.class_prior[group_idx][other];
    if (!(pc > 0.0 && po > 0.0) || !(t > 0.0 && t < 1.0)) return std::nullopt;

    // z = w.x with w = Sigma^-1 (mu_c - mu_o); S^c >= t  <=>  z >= z_t
    double wnorm2 = 0.0, wmc = 0.0, wmo = 0.0;
    for (std::size_t d = 0; d < spec.dim; ++d) {
        const double w = (gc.mean[d] - go.mean[d]) / gc.var[d];
        wnorm2 += w * w * gc.var[d];
        wmc += w * gc.mean[d];
        wmo += w * go.mean[d];
    }
    if (wnorm2 == 0.0) return std::nullopt;
    const double sdz = std::sqrt(wnorm2);
    const double offset = std::log(pc / po) - 0.5 * (wmc + wmo);
    const double zt = std::log(t / (1.0 - t)) - offset;
    const double sel_c = phi_upper((zt - wmc) / sdz);
    const double sel_o = phi_upper((zt - wmo) / sdz);
    const double num = po * sel_o;
    const double den = pc * sel_c + po * sel_o;
    if (den <= 0.0) return std::nullopt;
    return num / den;
}

std::vector<Decision> oracle_rule(const std::vector<double>& r1, const std::vector<double>& r2,
                                  double alpha1, double alpha2) {
    if (r1.size() != r2.size())
        throw std::invalid_argument("oracle_rule: r1 and r2 must be aligned");
    std::vector<Decision> out(r1.size());
    for (std::size_t j = 0; j < r1.size(); ++j) {
        const bool c1 = r1[j] <= alpha1;
        const bool c2 = r2[j] <= alpha2;
        Decision d;
        if (c1 && c2) {
            d.overlap = true;
            d.cls = r1[j] <= r2[j] ? 1 : 2;
            d.winning_r = std::min(r1[j], r2[j]);
        } else if (c1) {
            d.cls = 1;
            d.winning_r = r1[j];
        } else if (c2) {
            d.cls = 2;
            d.winning_r = r2[j];
        }
        out[j] = d;
    }
    return out;
}

void MfsrCounter::add(int decision, int truth, std::size_t group_idx, int cls, std::size_t group) {
    if (decision != cls || group_idx != group) return;
    ++selected;
    if (truth != cls) ++errors;
}

std::optional<double> MfsrCounter::value() const {
    if (selected == 0) return std::nullopt;
    return static_cast<double>(errors) / static_cast<double>(selected);
}

std::optional<double> mfsr(const std::vector<int>& decisions, const std::vector<int>& truths,
                           const std::vector<std::size_t>& groups, int cls, std::size_t group) {
    if (decisions.size() != truths.size() || decisions.size() != groups.size())
        throw std::invalid_argument("mfsr: misaligned inputs");
    MfsrCounter counter;
    for (std::size_t j = 0; j < decisions.size(); ++j)
        counter.add(decisions[j], truths[j], groups[j], cls, group);
    return counter.value();
}

using nlohmann::json;

std::string mixture_to_json_string(const MixtureSpec& spec) {
    json j;
    j["groups"] = spec.groups.labels;
    j["classes"] = spec.classes.labels;
    j["group_prior"] = spec.group_prior;
    j["class_prior"] = spec.class_prior;
    j["dim"] = spec.dim;
    json comps = json::array();
    for (std::size_t a = 0; a < spec.groups.size(); ++a) {
        json row = json::array();
        for (std::size_t c = 0; c < spec.classes.size(); ++c) {
            row.push_back({{"mean", spec.components[a][c].mean},
                           {"var", spec.components[a][c].var}});
        }
        comps.push_back(row);
    }
    j["components"] = comps;
    return j.dump(2);
}

MixtureSpec mixture_from_json_string(const std::string& text) {
    json j;
    try {
        j = json::parse(text);
    } catch (const json::parse_error& e) {
        throw FormatError(std::string("mixture config: ") + e.what());
    }
    MixtureSpec spec;
    try {
        spec.groups.labels = j.at("groups").get<std::vector<std::string>>();
        spec.classes.labels = j.at("classes").get<std::vector<std::string>>();
        spec.group_prior = j.at("group_prior").get<std::vector<double>>();
        spec.class_prior = j.at("class_prior").get<std::vector<std::vector<double>>>();
        spec.dim = j.at("dim").get<std::size_t>();
        for (const auto& row : j.at("components")) {
            std::vector<Gaussian> comps;
            for (const auto& cj : row) {
                Gaussian g;
                g.mean = cj.at("mean").get<std::vector<double>>();
                g.var = cj.at("var").get<std::vector<double>>();
                comps.push_back(std::move(g));
            }
            spec.components.push_back(std::move(comps));
        }
    } catch (const json::exception& e) {
        throw FormatError(std::string("mixture config: ") + e.what());
    }
    spec.validate();
    return spec;
}

}  // namespace fasi::oracle
