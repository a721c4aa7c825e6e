#pragma once

#include <algorithm>
#include <cmath>
#include <span>
#include <vector>

#include "bootperc/errors.hpp"

namespace bootperc {

struct Summary {
    double mean = 0.0;
    double sd = 0.0;  // sample standard deviation
    double min = 0.0;
    double max = 0.0;
    double median = 0.0;
};

inline Summary summarize(std::span<const double> x) {
    detail::require(!x.empty(), "summary of an empty sample");
    Summary s;
    std::vector<double> v(x.begin(), x.end());
    std::sort(v.begin(), v.end());
    s.min = v.front();
    s.max = v.back();
    const auto k = v.size();
    s.median = k % 2 ? v[k / 2] : 0.5 * (v[k / 2 - 1] + v[k / 2]);
    double m = 0.0;
    for (double a : v) m += a;
    m /= static_cast<double>(k);
    double ss = 0.0;
    for (double a : v) ss += (a - m) * (a - m);
    s.mean = m;
    s.sd = k > 1 ? std::sqrt(ss / static_cast<double>(k - 1)) : 0.0;
    return s;
}

/// Two-sample Kolmogorov-Smirnov statistic sup |F_a - F_b|, ties handled.
inline double ks_statistic(std::span<const double> a, std::span<const double> b) {
    detail::require(!a.empty() && !b.empty(), "KS statistic needs two non-empty samples");
    std::vector<double> x(a.begin(), a.end()), y(b.begin(), b.end());
    std::sort(x.begin(), x.end());
    std::sort(y.begin(), y.end());
    std::size_t i = 0, j = 0;
    double d = 0.0;
    const double na = static_cast<double>(x.size()), nb = static_cast<double>(y.size());
    while (i < x.size() && j < y.size()) {
        const double t = std::min(x[i], y[j]);
        while (i < x.size() && x[i] == t) ++i;
        while (j < y.size() && y[j] == t) ++j;
        d = std::max(d, std::abs(static_cast<double>(i) / na - static_cast<double>(j) / nb));
    }
    return d;
}

/// Asymptotic 1% critical value c(0.01) sqrt((n + m) / (n m)), c = 1.628.
inline double ks_critical_1pct(std::size_t n, std::size_t m) {
    const double a = static_cast<double>(n), b = static_cast<double>(m);
    return 1.628 * std::sqrt((a + b) / (a * b));
}

}  // namespace bootperc
