#include "fasi/conformal.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

namespace fasi::conformal {

namespace {

std::size_t count_ge(const std::vector<double>& sorted_asc, double s) {
    return sorted_asc.size() -
           static_cast<std::size_t>(std::lower_bound(sorted_asc.begin(), sorted_asc.end(), s) -
                                    sorted_asc.begin());
}

}  // namespace

double conformal_pvalue(const std::vector<double>& cal_scores, double t) {
    std::size_t cnt = 0;
    for (double s : cal_scores)
        if (s >= t) ++cnt;
    return (static_cast<double>(cnt) + 1.0) / (static_cast<double>(cal_scores.size()) + 1.0);
}

double empirical_G(const std::vector<double>& test_scores, double t) {
    std::size_t cnt = 0;
    for (double s : test_scores)
        if (s >= t) ++cnt;
    return static_cast<double>(cnt) / static_cast<double>(test_scores.size());
}

Result bh_qvalues(const std::vector<double>& cal_scores, const std::vector<double>& test_scores) {
    Result res;
    res.cal_empty = cal_scores.empty();
    const std::size_t m = test_scores.size();
    res.p.resize(m);
    res.q_raw.resize(m);
    res.q_mono.resize(m);

    std::vector<double> cal_sorted = cal_scores;
    std::sort(cal_sorted.begin(), cal_sorted.end());
    std::vector<double> test_sorted = test_scores;
    std::sort(test_sorted.begin(), test_sorted.end());

    // same arithmetic shape as the R-value so the one-class identity holds
    // bitwise: num/den with num = (count+1)/(n+1), den = count/m
    for (std::size_t j = 0; j < m; ++j) {
        const double s = test_scores[j];
        const double num = (static_cast<double>(count_ge(cal_sorted, s)) + 1.0) /
                           (static_cast<double>(cal_sorted.size()) + 1.0);
        const double den = static_cast<double>(count_ge(test_sorted, s)) / static_cast<double>(m);
        res.p[j] = num;
        res.q_raw[j] = num / den;
    }

    // running min in ascending-score order, tie blocks share the value
    std::vector<std::size_t> idx(m);
    std::iota(idx.begin(), idx.end(), 0);
    std::stable_sort(idx.begin(), idx.end(),
                     [&](std::size_t a, std::size_t b) { return test_scores[a] < test_scores[b]; });
    std::vector<double> acc(m);
    double running = std::numeric_limits<double>::infinity();
    for (std::size_t k = 0; k < m; ++k) {
        running = std::min(running, res.q_raw[idx[k]]);
        acc[k] = running;
    }
    std::size_t k = m;
    while (k > 0) {
        std::size_t hi = k - 1, lo = hi;
        const double s = test_scores[idx[hi]];
        while (lo > 0 && test_scores[idx[lo - 1]] == s) --lo;
        for (std::size_t t = lo; t <= hi; ++t) res.q_mono[idx[t]] = acc[hi];
        k = lo;
    }
    return res;
}

}  // namespace fasi::conformal
