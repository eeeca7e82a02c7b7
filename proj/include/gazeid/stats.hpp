#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <span>
#include <vector>

namespace gazeid::stats {

inline double mean(std::span<const double> v) {
    if (v.empty()) return 0.0;
    double s = 0.0;
    for (double x : v) s += x;
    return s / static_cast<double>(v.size());
}

/// Central moment of order `k` (population normalization).
inline double central_moment(std::span<const double> v, int k) {
    if (v.empty()) return 0.0;
    const double m = mean(v);
    double s = 0.0;
    for (double x : v) s += std::pow(x - m, k);
    return s / static_cast<double>(v.size());
}

/// Population standard deviation.
inline double stddev(std::span<const double> v) { return std::sqrt(central_moment(v, 2)); }

// Below this relative variance a sample is treated as constant, so the
// shape statistics do not blow up on rounding noise.
inline constexpr double kFlatTolerance = 1e-24;

inline bool is_flat(std::span<const double> v, double m2) {
    const double m = mean(v);
    return m2 <= kFlatTolerance * std::max(1.0, m * m);
}

/// Fisher-Pearson moment coefficient g1 = m3 / m2^(3/2); 0 for constant data.
inline double skewness(std::span<const double> v) {
    const double m2 = central_moment(v, 2);
    if (is_flat(v, m2)) return 0.0;
    return central_moment(v, 3) / std::pow(m2, 1.5);
}

/// Pearson (non-excess) kurtosis m4 / m2^2; 0 for constant data.
inline double kurtosis(std::span<const double> v) {
    const double m2 = central_moment(v, 2);
    if (is_flat(v, m2)) return 0.0;
    return central_moment(v, 4) / (m2 * m2);
}

inline double median(std::span<const double> v) {
    if (v.empty()) return 0.0;
    std::vector<double> tmp(v.begin(), v.end());
    const auto mid = tmp.size() / 2;
    std::nth_element(tmp.begin(), tmp.begin() + static_cast<std::ptrdiff_t>(mid), tmp.end());
    const double upper = tmp[mid];
    if (tmp.size() % 2 == 1) return upper;
    const double lower = *std::max_element(tmp.begin(), tmp.begin() + static_cast<std::ptrdiff_t>(mid));
    return 0.5 * (lower + upper);
}

inline double max(std::span<const double> v) {
    return v.empty() ? 0.0 : *std::max_element(v.begin(), v.end());
}

/// Mean, median, max, std, skewness, kurtosis.
inline std::array<double, 6> m3s2k(std::span<const double> v) {
    return {mean(v), median(v), max(v), stddev(v), skewness(v), kurtosis(v)};
}

} // namespace gazeid::stats
