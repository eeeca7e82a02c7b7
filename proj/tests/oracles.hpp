#pragma once

// Reference implementations used as test oracles. They are written
// independently of the library: plain loops, long double where it helps, no
// shared helpers.

#include "gazeid/gazeid.hpp"

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <limits>
#include <random>
#include <set>
#include <utility>
#include <vector>

namespace oracle {

using LMatrix = Eigen::Matrix<long double, Eigen::Dynamic, Eigen::Dynamic>;
using LVector = Eigen::Matrix<long double, Eigen::Dynamic, 1>;

/// Value at window position `at` of the degree-`order` least-squares fit to
/// `y[first .. first + len)`, by solving the normal equations in long double
/// with integer abscissae.
inline double window_fit(const std::vector<double>& y, std::size_t first, int len, int order, int at) {
    LMatrix v(len, order + 1);
    LVector rhs(len);
    for (int r = 0; r < len; ++r) {
        long double p = 1;
        for (int c = 0; c <= order; ++c) {
            v(r, c) = p;
            p *= static_cast<long double>(r - len / 2);
        }
        rhs(r) = y[first + static_cast<std::size_t>(r)];
    }
    const LMatrix vtv = v.transpose() * v;
    const LVector coef = vtv.fullPivLu().solve(v.transpose() * rhs);
    long double x = at - len / 2, p = 1, acc = 0;
    for (int c = 0; c <= order; ++c) {
        acc += coef(c) * p;
        p *= x;
    }
    return static_cast<double>(acc);
}

/// Savitzky-Golay output by explicit per-sample window regression; the edge
/// samples use the first or last full window.
inline std::vector<double> sg(const std::vector<double>& y, int len, int order) {
    const std::size_t n = y.size(), half = static_cast<std::size_t>(len / 2);
    std::vector<double> out(n);
    for (std::size_t i = 0; i < n; ++i) {
        std::size_t first;
        if (i < half) first = 0;
        else if (i + half >= n) first = n - static_cast<std::size_t>(len);
        else first = i - half;
        out[i] = window_fit(y, first, len, order, static_cast<int>(i - first));
    }
    return out;
}

/// I-VT labels from maximal runs: a fixation run followed by a saccade sample
/// becomes saccade when that sample's time minus the run start is below the
/// minimum duration; a run that reaches the end is left alone.
inline std::vector<bool> ivt_is_fixation(const std::vector<double>& speed, const std::vector<double>& t, double vt,
                                         double mdf) {
    const std::size_t n = speed.size();
    std::vector<bool> fix(n);
    for (std::size_t i = 0; i < n; ++i) fix[i] = speed[i] < vt;
    std::vector<bool> out = fix;
    std::size_t i = 0;
    while (i < n) {
        std::size_t j = i;
        while (j < n && fix[j] == fix[i]) ++j;
        if (fix[i] && j < n && t[j] - t[i] < mdf) {
            for (std::size_t k = i; k < j; ++k) out[k] = false;
        }
        i = j;
    }
    return out;
}

/// EER by exhaustive counting: FAR and FRR are recounted from scratch at
/// every candidate threshold; the first threshold with FAR <= FRR is
/// interpolated against the previous one.
inline double eer(const std::vector<double>& genuine, const std::vector<double>& impostor) {
    std::set<double> cand(genuine.begin(), genuine.end());
    cand.insert(impostor.begin(), impostor.end());
    std::vector<double> th(cand.begin(), cand.end());
    th.push_back(std::numeric_limits<double>::infinity());
    auto far = [&](double t) {
        double c = 0;
        for (double s : impostor) c += s >= t ? 1 : 0;
        return c / static_cast<double>(impostor.size());
    };
    auto frr = [&](double t) {
        double c = 0;
        for (double s : genuine) c += s < t ? 1 : 0;
        return c / static_cast<double>(genuine.size());
    };
    for (std::size_t k = 0; k < th.size(); ++k) {
        const double f = far(th[k]), r = frr(th[k]);
        if (f > r) continue;
        if (k == 0 || f == r) return f;
        const double f0 = far(th[k - 1]), r0 = frr(th[k - 1]);
        // Intersection of the segments (f0, r0) -> (f, r) with FAR = FRR.
        const double a = (f0 - r0) / ((f0 - r0) - (f - r));
        return f0 + a * (f - f0);
    }
    return 0.0;
}

/// Rank-k accuracies by sorting each row (score descending, column ascending).
inline std::vector<double> cmc(const Eigen::MatrixXd& d, const std::vector<std::size_t>& truth) {
    const auto m = static_cast<std::size_t>(d.cols());
    std::vector<double> acc(m, 0.0);
    for (Eigen::Index r = 0; r < d.rows(); ++r) {
        std::vector<std::size_t> order(m);
        for (std::size_t c = 0; c < m; ++c) order[c] = c;
        std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
            const double sa = d(r, static_cast<Eigen::Index>(a)), sb = d(r, static_cast<Eigen::Index>(b));
            return sa != sb ? sa > sb : a < b;
        });
        const auto pos = static_cast<std::size_t>(std::find(order.begin(), order.end(), truth[static_cast<std::size_t>(r)]) - order.begin());
        for (std::size_t k = pos; k < m; ++k) acc[k] += 1.0;
    }
    for (auto& a : acc) a /= static_cast<double>(d.rows());
    return acc;
}

/// Least squares through the normal equations in long double.
inline Eigen::MatrixXd normal_equations(const Eigen::MatrixXd& a, const Eigen::MatrixXd& y) {
    const LMatrix al = a.cast<long double>();
    const LMatrix yl = y.cast<long double>();
    const LMatrix ata = al.transpose() * al;
    const LMatrix w = ata.ldlt().solve(al.transpose() * yl);
    return w.cast<double>();
}

inline double residual(const Eigen::MatrixXd& a, const Eigen::MatrixXd& w, const Eigen::MatrixXd& y) {
    return (a * w - y).norm();
}

/// Kinematic trace with the given screen positions and everything else
/// zero, sampled at `rate_hz`.
inline gazeid::KinematicTrace trace_from_xy(const std::vector<double>& x, const std::vector<double>& y,
                                            double rate_hz) {
    gazeid::KinematicTrace tr;
    const std::size_t n = x.size();
    tr.rate_hz = rate_hz;
    for (std::size_t i = 0; i < n; ++i) tr.t_ms.push_back(1000.0 * static_cast<double>(i) / rate_hz);
    tr.valid.assign(n, true);
    tr.x = x;
    tr.y = y;
    for (auto* v : {&tr.theta_x, &tr.theta_y, &tr.omega_x, &tr.omega_y, &tr.angular_speed, &tr.angular_accel, &tr.vx,
                    &tr.vy, &tr.ax, &tr.ay}) {
        v->assign(n, 0.0);
    }
    return tr;
}

/// Uniform speeds for a labelled run description: (count, fixation?) pairs.
inline std::vector<double> speeds(const std::vector<std::pair<int, double>>& runs) {
    std::vector<double> s;
    for (auto [count, v] : runs) s.insert(s.end(), static_cast<std::size_t>(count), v);
    return s;
}

inline std::vector<double> times(std::size_t n, double rate_hz) {
    std::vector<double> t(n);
    for (std::size_t i = 0; i < n; ++i) t[i] = 1000.0 * static_cast<double>(i) / rate_hz;
    return t;
}

using gazeid::SegmentKind;

inline std::vector<SegmentKind> labels(const std::vector<std::pair<int, char>>& runs) {
    std::vector<SegmentKind> l;
    for (auto [count, k] : runs) l.insert(l.end(), static_cast<std::size_t>(count), k == 'F' ? SegmentKind::Fixation : SegmentKind::Saccade);
    return l;
}

/// Planted-signal data for feature selection: feature 0 separates the
/// classes, features 1 and 2 are pure noise.
inline std::vector<gazeid::ClassSamples> planted_signal(std::uint64_t seed, int classes = 5, int rows = 40) {
    std::mt19937_64 rng(seed);
    std::normal_distribution<double> noise(0.0, 1.0);
    std::vector<gazeid::ClassSamples> data;
    for (int c = 0; c < classes; ++c) {
        gazeid::ClassSamples cs{"C" + std::to_string(c), Eigen::MatrixXd(rows, 3)};
        for (int r = 0; r < rows; ++r) {
            cs.rows(r, 0) = 4.0 * c + 0.3 * noise(rng);
            cs.rows(r, 1) = noise(rng);
            cs.rows(r, 2) = noise(rng);
        }
        data.push_back(std::move(cs));
    }
    return data;
}

} // namespace oracle
