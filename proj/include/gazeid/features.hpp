#pragma once

// Per-segment fixation (12) and saccade (46) features, z-score
// normalization and named feature masks.

#include "gazeid/error.hpp"
#include "gazeid/gaze_data.hpp"
#include "gazeid/preprocess.hpp"
#include "gazeid/segment.hpp"
#include "gazeid/stats.hpp"

#include "json.hpp"

#include <Eigen/Dense>

#include <algorithm>
#include <array>
#include <cmath>
#include <optional>
#include <ostream>
#include <span>
#include <string>
#include <vector>

namespace gazeid {

namespace detail {

inline std::vector<std::string> with_m3s2k(std::vector<std::string> names, const std::string& prefix) {
    for (const char* stat : {"mean", "median", "max", "std", "skew", "kurt"}) names.push_back(prefix + "_" + stat);
    return names;
}

} // namespace detail

inline const std::vector<std::string>& fixation_feature_names() {
    static const std::vector<std::string> names{
        "duration_ms", "std_x",  "std_y",  "path_length", "angle_prev", "dist_prev",
        "skew_x",      "skew_y", "kurt_x", "kurt_y",      "dispersion", "avg_velocity"};
    return names;
}

inline const std::vector<std::string>& saccade_feature_names() {
    static const std::vector<std::string> names = [] {
        std::vector<std::string> n{"duration_ms", "dispersion"};
        n = detail::with_m3s2k(std::move(n), "ang_vel");
        n = detail::with_m3s2k(std::move(n), "ang_acc");
        for (const char* s : {"std_x", "std_y", "path_length", "angle_prev", "dist_prev", "saccadic_ratio", "angle",
                              "amplitude"}) {
            n.emplace_back(s);
        }
        for (const char* p : {"vx", "vy", "ax", "ay"}) n = detail::with_m3s2k(std::move(n), p);
        return n;
    }();
    return names;
}

inline const std::vector<std::string>& feature_names(SegmentKind kind) {
    return kind == SegmentKind::Fixation ? fixation_feature_names() : saccade_feature_names();
}

inline constexpr std::size_t kFixationFeatureCount = 12;
inline constexpr std::size_t kSaccadeFeatureCount = 46;

struct FeatureVector {
    SegmentKind kind = SegmentKind::Fixation;
    std::vector<std::string> names;
    std::vector<double> values;

    [[nodiscard]] std::size_t size() const { return values.size(); }
    [[nodiscard]] double at(std::string_view name) const {
        const auto it = std::find(names.begin(), names.end(), name);
        if (it == names.end()) throw UnknownFeatureName(std::string(name));
        return values[static_cast<std::size_t>(it - names.begin())];
    }
};

/// Rows are segments, columns follow `names`.
struct FeatureMatrix {
    SegmentKind kind = SegmentKind::Fixation;
    std::vector<std::string> names;
    Eigen::MatrixXd rows;

    [[nodiscard]] Eigen::Index count() const { return rows.rows(); }
};

namespace detail {

struct ValidPoints {
    std::vector<double> x;
    std::vector<double> y;
};

inline ValidPoints valid_points(const Segment& seg, const KinematicTrace& tr) {
    ValidPoints p;
    for (std::size_t i = seg.start_idx; i <= seg.end_idx; ++i) {
        if (!tr.valid[i]) continue;
        p.x.push_back(tr.x[i]);
        p.y.push_back(tr.y[i]);
    }
    return p;
}

inline std::vector<double> valid_values(const Segment& seg, const KinematicTrace& tr, const std::vector<double>& v) {
    std::vector<double> out;
    for (std::size_t i = seg.start_idx; i <= seg.end_idx; ++i) {
        if (tr.valid[i]) out.push_back(v[i]);
    }
    return out;
}

inline double path_length(const ValidPoints& p) {
    double len = 0.0;
    for (std::size_t i = 0; i + 1 < p.x.size(); ++i) len += std::hypot(p.x[i + 1] - p.x[i], p.y[i + 1] - p.y[i]);
    return len;
}

inline double dispersion(const ValidPoints& p) {
    const auto [xmin, xmax] = std::minmax_element(p.x.begin(), p.x.end());
    const auto [ymin, ymax] = std::minmax_element(p.y.begin(), p.y.end());
    return (*xmax - *xmin) + (*ymax - *ymin);
}

inline std::optional<std::array<double, 2>> centroid(const Segment& seg, const KinematicTrace& tr) {
    const auto p = valid_points(seg, tr);
    if (p.x.empty()) return std::nullopt;
    return std::array<double, 2>{stats::mean(p.x), stats::mean(p.y)};
}

inline double direction_deg(double dx, double dy) { return rad_to_deg(std::atan2(dy, dx)); }

/// Wraps an angle difference into (-180, 180].
inline double wrap_deg(double a) {
    a = std::fmod(a, 360.0);
    if (a <= -180.0) a += 360.0;
    if (a > 180.0) a -= 360.0;
    return a;
}

inline std::optional<double> saccade_direction(const Segment& seg, const KinematicTrace& tr) {
    const auto p = valid_points(seg, tr);
    if (p.x.size() < 2) return std::nullopt;
    return direction_deg(p.x.back() - p.x.front(), p.y.back() - p.y.front());
}

inline void append(std::vector<double>& out, const std::array<double, 6>& s) { out.insert(out.end(), s.begin(), s.end()); }

} // namespace detail

/// Fixation features in `fixation_feature_names()` order. `prev` is the
/// preceding fixation; its dependent features are 0 when absent.
inline FeatureVector fixation_features(const Segment& seg, const Segment* prev, const KinematicTrace& tr) {
    if (seg.kind != SegmentKind::Fixation) throw DegenerateSegment("fixation_features called on a saccade");
    const auto p = detail::valid_points(seg, tr);
    if (p.x.size() < 2) throw DegenerateSegment("fixation has fewer than 2 valid samples");

    const double duration_s = seg.duration_ms / 1000.0;
    const double path = detail::path_length(p);
    const std::array<double, 2> c{stats::mean(p.x), stats::mean(p.y)};
    double angle_prev = 0.0;
    double dist_prev = 0.0;
    if (prev) {
        if (const auto pc = detail::centroid(*prev, tr)) {
            angle_prev = detail::direction_deg(c[0] - (*pc)[0], c[1] - (*pc)[1]);
            dist_prev = std::hypot(c[0] - (*pc)[0], c[1] - (*pc)[1]);
        }
    }
    FeatureVector v;
    v.kind = SegmentKind::Fixation;
    v.names = fixation_feature_names();
    v.values = {seg.duration_ms,
                stats::stddev(p.x),
                stats::stddev(p.y),
                path,
                angle_prev,
                dist_prev,
                stats::skewness(p.x),
                stats::skewness(p.y),
                stats::kurtosis(p.x),
                stats::kurtosis(p.y),
                detail::dispersion(p),
                duration_s > 0 ? path / duration_s : 0.0};
    return v;
}

/// Saccade features in `saccade_feature_names()` order. `prev` is the
/// preceding saccade; its dependent features are 0 when absent.
inline FeatureVector saccade_features(const Segment& seg, const Segment* prev, const KinematicTrace& tr) {
    if (seg.kind != SegmentKind::Saccade) throw DegenerateSegment("saccade_features called on a fixation");
    const auto p = detail::valid_points(seg, tr);
    if (p.x.size() < 2) throw DegenerateSegment("saccade has fewer than 2 valid samples");

    const double duration_s = seg.duration_ms / 1000.0;
    const auto speed = detail::valid_values(seg, tr, tr.angular_speed);
    const auto accel = detail::valid_values(seg, tr, tr.angular_accel);
    const double dx = p.x.back() - p.x.front();
    const double dy = p.y.back() - p.y.front();
    const double angle = detail::direction_deg(dx, dy);

    double angle_prev = 0.0;
    double dist_prev = 0.0;
    if (prev) {
        if (const auto prev_angle = detail::saccade_direction(*prev, tr)) {
            angle_prev = detail::wrap_deg(angle - *prev_angle);
            const auto pc = *detail::centroid(*prev, tr);
            dist_prev = std::hypot(stats::mean(p.x) - pc[0], stats::mean(p.y) - pc[1]);
        }
    }

    std::vector<double> v;
    v.reserve(kSaccadeFeatureCount);
    v.push_back(seg.duration_ms);
    v.push_back(detail::dispersion(p));
    detail::append(v, stats::m3s2k(speed));
    detail::append(v, stats::m3s2k(accel));
    v.push_back(stats::stddev(p.x));
    v.push_back(stats::stddev(p.y));
    v.push_back(detail::path_length(p));
    v.push_back(angle_prev);
    v.push_back(dist_prev);
    v.push_back(duration_s > 0 ? stats::max(speed) / duration_s : 0.0);
    v.push_back(angle);
    v.push_back(std::hypot(dx, dy));
    for (const auto* series : {&tr.vx, &tr.vy, &tr.ax, &tr.ay}) {
        detail::append(v, stats::m3s2k(detail::valid_values(seg, tr, *series)));
    }
    return {SegmentKind::Saccade, saccade_feature_names(), std::move(v)};
}

struct RecordingFeatures {
    FeatureMatrix fixations;
    FeatureMatrix saccades;
    std::size_t skipped = 0;  // degenerate segments (< 2 valid samples)
};

/// Features for every non-truncated segment of a recording.
inline RecordingFeatures extract_features(const SegmentList& list, const KinematicTrace& tr) {
    std::vector<std::vector<double>> fix_rows, sac_rows;
    std::size_t skipped = 0;
    const Segment* prev_fix = nullptr;
    const Segment* prev_sac = nullptr;
    for (const auto& seg : list.segments) {
        const bool is_fix = seg.kind == SegmentKind::Fixation;
        const Segment*& prev = is_fix ? prev_fix : prev_sac;
        if (!seg.truncated) {
            try {
                auto fv = is_fix ? fixation_features(seg, prev, tr) : saccade_features(seg, prev, tr);
                (is_fix ? fix_rows : sac_rows).push_back(std::move(fv.values));
            } catch (const DegenerateSegment&) {
                ++skipped;
            }
        }
        prev = &seg;
    }
    auto to_matrix = [](SegmentKind kind, const std::vector<std::vector<double>>& rows) {
        FeatureMatrix m;
        m.kind = kind;
        m.names = feature_names(kind);
        m.rows.resize(static_cast<Eigen::Index>(rows.size()), static_cast<Eigen::Index>(m.names.size()));
        for (std::size_t r = 0; r < rows.size(); ++r) {
            for (std::size_t c = 0; c < rows[r].size(); ++c) m.rows(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(c)) = rows[r][c];
        }
        return m;
    };
    return {to_matrix(SegmentKind::Fixation, fix_rows), to_matrix(SegmentKind::Saccade, sac_rows), skipped};
}

// ---------------------------------------------------------------------------
// Normalization

struct NormStats {
    std::vector<double> mean;
    std::vector<double> std;
};

/// Per-column mean and population standard deviation.
inline NormStats fit_norm(const Eigen::MatrixXd& train) {
    if (train.rows() == 0) throw EmptyTrainingSet();
    NormStats s;
    const auto n = static_cast<double>(train.rows());
    for (Eigen::Index c = 0; c < train.cols(); ++c) {
        const double m = train.col(c).mean();
        const double var = (train.col(c).array() - m).square().sum() / n;
        s.mean.push_back(m);
        s.std.push_back(std::sqrt(var));
    }
    return s;
}

inline NormStats fit_norm(const FeatureMatrix& train) { return fit_norm(train.rows); }

namespace detail {

// Columns whose spread is at rounding level relative to their mean count
// as constant.
inline bool zero_spread(double mean, double sd) { return !(sd > 1e-12 * std::max(1.0, std::abs(mean))); }

} // namespace detail

inline double normalize_value(double x, double mean, double sd) {
    return detail::zero_spread(mean, sd) ? 0.0 : (x - mean) / sd;
}

inline Eigen::MatrixXd apply_norm(const Eigen::MatrixXd& m, const NormStats& s) {
    if (static_cast<std::size_t>(m.cols()) != s.mean.size()) throw Error("normalization width mismatch");
    Eigen::MatrixXd out(m.rows(), m.cols());
    for (Eigen::Index c = 0; c < m.cols(); ++c) {
        const auto k = static_cast<std::size_t>(c);
        for (Eigen::Index r = 0; r < m.rows(); ++r) out(r, c) = normalize_value(m(r, c), s.mean[k], s.std[k]);
    }
    return out;
}

inline FeatureMatrix apply_norm(const FeatureMatrix& m, const NormStats& s) {
    return {m.kind, m.names, apply_norm(m.rows, s)};
}

inline FeatureVector apply_norm(const FeatureVector& v, const NormStats& s) {
    if (v.values.size() != s.mean.size()) throw Error("normalization width mismatch");
    FeatureVector out = v;
    for (std::size_t i = 0; i < v.values.size(); ++i) out.values[i] = normalize_value(v.values[i], s.mean[i], s.std[i]);
    return out;
}

// ---------------------------------------------------------------------------
// Masks

/// Include flags keyed by feature name. Names the mask does not list are
/// excluded.
struct FeatureMask {
    SegmentKind kind = SegmentKind::Fixation;
    StimulusKind stimulus = StimulusKind::Synth;
    std::vector<std::string> names;
    std::vector<bool> include;

    [[nodiscard]] std::size_t included_count() const {
        return static_cast<std::size_t>(std::count(include.begin(), include.end(), true));
    }
    [[nodiscard]] std::vector<std::string> included_names() const {
        std::vector<std::string> out;
        for (std::size_t i = 0; i < names.size(); ++i) {
            if (include[i]) out.push_back(names[i]);
        }
        return out;
    }
    [[nodiscard]] bool includes(std::string_view name) const {
        for (std::size_t i = 0; i < names.size(); ++i) {
            if (names[i] == name) return include[i];
        }
        return false;
    }
    bool operator==(const FeatureMask&) const = default;
};

inline FeatureMask full_mask(SegmentKind kind, StimulusKind stimulus = StimulusKind::Synth) {
    const auto& n = feature_names(kind);
    return {kind, stimulus, n, std::vector<bool>(n.size(), true)};
}

inline FeatureMask mask_from_flags(SegmentKind kind, StimulusKind stimulus, std::string_view flags) {
    const auto& n = feature_names(kind);
    if (flags.size() != n.size()) throw Error("mask flag string has wrong length");
    FeatureMask m{kind, stimulus, n, {}};
    for (char f : flags) m.include.push_back(f == 'Y');
    return m;
}

/// Feature subsets reported for the RAN and TEX stimuli; other stimuli get
/// every feature.
inline FeatureMask published_mask(SegmentKind kind, StimulusKind stimulus) {
    if (kind == SegmentKind::Fixation) {
        if (stimulus == StimulusKind::Tex) return mask_from_flags(kind, stimulus, "NNYYYYYYNYYY");
        if (stimulus == StimulusKind::Ran) return mask_from_flags(kind, stimulus, "YNNYYYYYNYYY");
    } else {
        // duration, dispersion, ang_vel x6, ang_acc x6, std_x, std_y, path,
        // angle_prev, dist_prev, ratio, angle, amplitude, vx/vy/ax/ay x6
        if (stimulus == StimulusKind::Tex) {
            return mask_from_flags(kind, stimulus,
                                   "NY" "NYYYYY" "YYYYYN" "YYYYYYYY" "YYYYYY" "YYYYYY" "YYYYYY" "YYYYYY");
        }
        if (stimulus == StimulusKind::Ran) {
            return mask_from_flags(kind, stimulus,
                                   "NY" "NNNYYY" "YYYYYY" "YYYYYYYY" "YYYYYY" "YYYYNY" "YYYYYY" "YYNYYY");
        }
    }
    return full_mask(kind, stimulus);
}

/// Column indices (in `names`) that the mask includes, in canonical order.
inline std::vector<Eigen::Index> mask_columns(const std::vector<std::string>& names, const FeatureMask& mask) {
    for (const auto& mn : mask.names) {
        if (std::find(names.begin(), names.end(), mn) == names.end()) throw UnknownFeatureName(mn);
    }
    std::vector<Eigen::Index> cols;
    for (std::size_t i = 0; i < names.size(); ++i) {
        if (mask.includes(names[i])) cols.push_back(static_cast<Eigen::Index>(i));
    }
    return cols;
}

inline FeatureVector apply_mask(const FeatureVector& v, const FeatureMask& mask) {
    FeatureVector out{v.kind, {}, {}};
    for (auto c : mask_columns(v.names, mask)) {
        out.names.push_back(v.names[static_cast<std::size_t>(c)]);
        out.values.push_back(v.values[static_cast<std::size_t>(c)]);
    }
    return out;
}

inline Eigen::MatrixXd select_columns(const Eigen::MatrixXd& m, const std::vector<Eigen::Index>& cols) {
    Eigen::MatrixXd out(m.rows(), static_cast<Eigen::Index>(cols.size()));
    for (std::size_t j = 0; j < cols.size(); ++j) out.col(static_cast<Eigen::Index>(j)) = m.col(cols[j]);
    return out;
}

inline FeatureMatrix apply_mask(const FeatureMatrix& m, const FeatureMask& mask) {
    const auto cols = mask_columns(m.names, mask);
    FeatureMatrix out{m.kind, {}, select_columns(m.rows, cols)};
    for (auto c : cols) out.names.push_back(m.names[static_cast<std::size_t>(c)]);
    return out;
}

inline nlohmann::ordered_json mask_to_json(const FeatureMask& mask) {
    nlohmann::ordered_json j;
    j["kind"] = to_string(mask.kind);
    j["stimulus"] = to_string(mask.stimulus);
    nlohmann::ordered_json flags = nlohmann::ordered_json::object();
    for (std::size_t i = 0; i < mask.names.size(); ++i) flags[mask.names[i]] = static_cast<bool>(mask.include[i]);
    j["features"] = std::move(flags);
    return j;
}

inline SegmentKind parse_segment_kind(std::string_view s) {
    if (s == "FIXATION") return SegmentKind::Fixation;
    if (s == "SACCADE") return SegmentKind::Saccade;
    throw Error("unknown segment kind '" + std::string(s) + "'");
}

inline FeatureMask mask_from_json(const nlohmann::ordered_json& j) {
    FeatureMask m;
    m.kind = parse_segment_kind(j.at("kind").get<std::string>());
    m.stimulus = parse_stimulus_kind(j.at("stimulus").get<std::string>());
    for (const auto& [name, flag] : j.at("features").items()) {
        const auto& known = feature_names(m.kind);
        if (std::find(known.begin(), known.end(), name) == known.end()) throw UnknownFeatureName(name);
        m.names.push_back(name);
        m.include.push_back(flag.get<bool>());
    }
    if (m.included_count() == 0) throw Error("feature mask includes no feature");
    return m;
}

/// Feature export: `subject,session,kind,<feature names...>`, one row per segment.
inline void write_feature_csv_header(std::ostream& out, SegmentKind kind) {
    out << "subject,session,kind";
    for (const auto& n : feature_names(kind)) out << ',' << n;
    out << '\n';
}

inline void write_feature_csv_rows(std::ostream& out, const std::string& subject, const std::string& session,
                                   const FeatureMatrix& m) {
    for (Eigen::Index r = 0; r < m.rows.rows(); ++r) {
        out << subject << ',' << session << ',' << to_string(m.kind);
        for (Eigen::Index c = 0; c < m.rows.cols(); ++c) out << ',' << detail::format_double(m.rows(r, c));
        out << '\n';
    }
}

} // namespace gazeid
