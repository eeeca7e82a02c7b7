#pragma once

#include "gazeid/error.hpp"
#include "gazeid/gaze_data.hpp"

#include <Eigen/Dense>

#include <cmath>
#include <span>
#include <vector>

namespace gazeid {

struct SgConfig {
    int poly_order = 6;
    int frame_len = 15;

    [[nodiscard]] bool valid() const { return poly_order >= 0 && frame_len > 0 && frame_len % 2 == 1 && frame_len > poly_order; }
};

/**
 * Savitzky-Golay smoother.
 *
 * Each output sample is the value at that sample of the least-squares
 * polynomial fit over a window of `frame_len` samples. Interior samples use
 * the centered window. The first and last `frame_len / 2` samples have no
 * centered window; they are evaluated on the fit over the first (or last)
 * `frame_len` samples, so a boundary sample sees a one-sided window truncated
 * at the series edge.
 */
class SavitzkyGolay {
public:
    explicit SavitzkyGolay(SgConfig cfg = {}) : cfg_(cfg) {
        if (!cfg_.valid()) throw InvalidConfig("Savitzky-Golay needs odd frame_len > poly_order >= 0");
        const int len = cfg_.frame_len;
        const int half = len / 2;
        // Abscissa scaled to [-1, 1] keeps the Vandermonde matrix well conditioned.
        Eigen::MatrixXd vander(len, cfg_.poly_order + 1);
        for (int r = 0; r < len; ++r) {
            const double x = half == 0 ? 0.0 : static_cast<double>(r - half) / half;
            double p = 1.0;
            for (int c = 0; c <= cfg_.poly_order; ++c) {
                vander(r, c) = p;
                p *= x;
            }
        }
        // Hat matrix H = Q Q^T; row r evaluates the fit at window position r.
        Eigen::HouseholderQR<Eigen::MatrixXd> qr(vander);
        const Eigen::MatrixXd q = qr.householderQ() * Eigen::MatrixXd::Identity(len, cfg_.poly_order + 1);
        hat_ = q * q.transpose();
    }

    [[nodiscard]] const SgConfig& config() const { return cfg_; }

    /// Row `r` of the projection: weights that evaluate the window fit at position r.
    [[nodiscard]] Eigen::RowVectorXd weights(int r) const { return hat_.row(r); }

    [[nodiscard]] std::vector<double> smooth(std::span<const double> series) const {
        const auto n = series.size();
        const auto len = static_cast<std::size_t>(cfg_.frame_len);
        if (n < len) throw SeriesTooShort(n, len);
        const std::size_t half = len / 2;
        std::vector<double> out(n);
        auto apply = [&](std::size_t row, std::size_t first) {
            double acc = 0.0;
            for (std::size_t j = 0; j < len; ++j) acc += hat_(static_cast<Eigen::Index>(row), static_cast<Eigen::Index>(j)) * series[first + j];
            return acc;
        };
        for (std::size_t i = 0; i < half; ++i) out[i] = apply(i, 0);
        for (std::size_t i = half; i + half < n; ++i) out[i] = apply(half, i - half);
        for (std::size_t i = n - half; i < n; ++i) out[i] = apply(i - (n - len), n - len);
        return out;
    }

private:
    SgConfig cfg_;
    Eigen::MatrixXd hat_;
};

inline std::vector<double> sg_smooth(std::span<const double> series, const SgConfig& cfg = {}) {
    return SavitzkyGolay(cfg).smooth(series);
}

/// Forward difference scaled by the sampling rate; the last sample repeats
/// its predecessor so the output keeps the input length.
inline std::vector<double> differentiate(std::span<const double> series, double rate_hz) {
    const auto n = series.size();
    if (n < 2) throw SeriesTooShort(n, 2);
    std::vector<double> out(n);
    for (std::size_t i = 0; i + 1 < n; ++i) out[i] = (series[i + 1] - series[i]) * rate_hz;
    out[n - 1] = out[n - 2];
    return out;
}

/// Per-sample kinematic profiles of one recording. All vectors have the
/// recording's length.
struct KinematicTrace {
    double rate_hz = 0.0;
    std::vector<double> t_ms;
    std::vector<bool> valid;
    std::vector<double> theta_x;      // smoothed, degrees
    std::vector<double> theta_y;
    std::vector<double> x;            // screen, pixels
    std::vector<double> y;
    std::vector<double> omega_x;      // angular velocity components, deg/s
    std::vector<double> omega_y;
    std::vector<double> angular_speed;
    std::vector<double> angular_accel;  // magnitude, deg/s^2
    std::vector<double> vx;           // screen velocity, px/s
    std::vector<double> vy;
    std::vector<double> ax;           // screen acceleration, px/s^2
    std::vector<double> ay;

    [[nodiscard]] std::size_t size() const { return t_ms.size(); }
};

namespace detail {

/// Replaces non-finite values by the nearest earlier finite value (or the
/// first later one at the head) so that gaps do not spread through the
/// smoothing window. Samples touched here are flagged invalid by the caller.
inline std::vector<double> hold_non_finite(std::vector<double> v) {
    std::size_t first = 0;
    while (first < v.size() && !std::isfinite(v[first])) ++first;
    const double head = first < v.size() ? v[first] : 0.0;
    double last = head;
    for (auto& value : v) {
        if (std::isfinite(value)) last = value;
        else value = last;
    }
    return v;
}

} // namespace detail

inline KinematicTrace kinematics(const GazeRecording& rec, const ScreenGeometry& geom, const SgConfig& cfg = {}) {
    const auto n = rec.samples.size();
    const auto need = static_cast<std::size_t>(cfg.frame_len);
    if (n < need) throw SeriesTooShort(n, need);

    KinematicTrace tr;
    tr.rate_hz = rec.rate_hz;
    tr.t_ms.resize(n);
    tr.valid.resize(n);
    std::vector<double> raw_x(n), raw_y(n);
    for (std::size_t i = 0; i < n; ++i) {
        const auto& s = rec.samples[i];
        tr.t_ms[i] = s.t_ms;
        tr.valid[i] = s.valid && std::isfinite(s.theta_x_deg) && std::isfinite(s.theta_y_deg);
        raw_x[i] = s.theta_x_deg;
        raw_y[i] = s.theta_y_deg;
    }
    const SavitzkyGolay sg(cfg);
    tr.theta_x = sg.smooth(detail::hold_non_finite(std::move(raw_x)));
    tr.theta_y = sg.smooth(detail::hold_non_finite(std::move(raw_y)));

    tr.omega_x = differentiate(tr.theta_x, rec.rate_hz);
    tr.omega_y = differentiate(tr.theta_y, rec.rate_hz);
    const auto alpha_x = differentiate(tr.omega_x, rec.rate_hz);
    const auto alpha_y = differentiate(tr.omega_y, rec.rate_hz);
    tr.angular_speed.resize(n);
    tr.angular_accel.resize(n);
    for (std::size_t i = 0; i < n; ++i) {
        tr.angular_speed[i] = std::hypot(tr.omega_x[i], tr.omega_y[i]);
        tr.angular_accel[i] = std::hypot(alpha_x[i], alpha_y[i]);
    }

    tr.x.resize(n);
    tr.y.resize(n);
    for (std::size_t i = 0; i < n; ++i) {
        const auto p = to_screen(tr.theta_x[i], tr.theta_y[i], geom);
        tr.x[i] = p.x_px;
        tr.y[i] = p.y_px;
    }
    tr.vx = differentiate(tr.x, rec.rate_hz);
    tr.vy = differentiate(tr.y, rec.rate_hz);
    tr.ax = differentiate(tr.vx, rec.rate_hz);
    tr.ay = differentiate(tr.vy, rec.rate_hz);
    return tr;
}

} // namespace gazeid
