#pragma once

#include "gazeid/gaze_data.hpp"
#include "gazeid/preprocess.hpp"

#include <ostream>
#include <span>
#include <string>
#include <vector>

namespace gazeid {

struct IvtConfig {
    double velocity_threshold_dps = 50.0;
    double min_fixation_ms = 100.0;
    double min_saccade_ms = 12.0;

    [[nodiscard]] bool valid() const {
        return velocity_threshold_dps > 0 && min_fixation_ms > 0 && min_saccade_ms > 0;
    }
};

enum class SegmentKind { Fixation, Saccade };

inline std::string_view to_string(SegmentKind kind) {
    return kind == SegmentKind::Fixation ? "FIXATION" : "SACCADE";
}

/// Velocity-threshold labelling. A sample is a fixation when its angular
/// speed is below the threshold. When a fixation run ends (first saccade
/// sample), its duration is the timestamp difference between that sample and
/// the run start; runs shorter than `min_fixation_ms` are relabelled as
/// saccade, including the sample that closed the run. A fixation run that
/// reaches the last sample is never closed and is left as is.
inline std::vector<SegmentKind> ivt_classify(std::span<const double> speed, std::span<const double> t_ms,
                                             const IvtConfig& cfg = {}) {
    const auto n = speed.size();
    std::vector<SegmentKind> res(n, SegmentKind::Saccade);
    auto last = SegmentKind::Saccade;
    std::size_t fixation_start = 0;
    for (std::size_t i = 0; i < n; ++i) {
        SegmentKind current;
        if (speed[i] < cfg.velocity_threshold_dps) {
            current = SegmentKind::Fixation;
            if (last != current) fixation_start = i;
        } else {
            if (last == SegmentKind::Fixation) {
                const double duration = t_ms[i] - t_ms[fixation_start];
                if (duration < cfg.min_fixation_ms) {
                    for (std::size_t j = fixation_start; j <= i; ++j) res[j] = SegmentKind::Saccade;
                }
            }
            current = SegmentKind::Saccade;
        }
        last = current;
        res[i] = current;
    }
    return res;
}

inline std::vector<SegmentKind> ivt_classify(const KinematicTrace& trace, const IvtConfig& cfg = {}) {
    return ivt_classify(trace.angular_speed, trace.t_ms, cfg);
}

struct Segment {
    SegmentKind kind = SegmentKind::Fixation;
    std::size_t start_idx = 0;
    std::size_t end_idx = 0;  // inclusive
    double duration_ms = 0.0;
    /// Edge segment shorter than its kind's minimum with nothing to merge into.
    bool truncated = false;

    [[nodiscard]] std::size_t length() const { return end_idx - start_idx + 1; }

    template <typename T>
    [[nodiscard]] std::span<const T> slice(const std::vector<T>& v) const {
        return std::span<const T>(v).subspan(start_idx, length());
    }
    [[nodiscard]] std::span<const double> x(const KinematicTrace& tr) const { return slice(tr.x); }
    [[nodiscard]] std::span<const double> y(const KinematicTrace& tr) const { return slice(tr.y); }
    [[nodiscard]] std::span<const double> theta_x(const KinematicTrace& tr) const { return slice(tr.theta_x); }
    [[nodiscard]] std::span<const double> theta_y(const KinematicTrace& tr) const { return slice(tr.theta_y); }

    bool operator==(const Segment&) const = default;
};

struct SegmentList {
    std::string recording_id;
    std::vector<Segment> segments;
};

/// Duration of samples [start, end]: up to the next sample's timestamp when
/// there is one, else the span plus one sample period.
inline double run_duration_ms(std::span<const double> t_ms, std::size_t start, std::size_t end, double period_ms) {
    if (end + 1 < t_ms.size()) return t_ms[end + 1] - t_ms[start];
    return t_ms[end] - t_ms[start] + period_ms;
}

/// Groups labels into maximal runs, folds saccades shorter than
/// `min_saccade_ms` into their neighbouring fixation(s), and marks edge runs
/// that stay below their minimum duration as truncated.
inline SegmentList build_segments(std::span<const SegmentKind> labels, std::span<const double> t_ms, double rate_hz,
                                  const IvtConfig& cfg = {}) {
    SegmentList out;
    const auto n = labels.size();
    if (n == 0) return out;
    const double period = 1000.0 / rate_hz;

    std::vector<Segment> runs;
    for (std::size_t i = 0; i < n;) {
        std::size_t j = i;
        while (j + 1 < n && labels[j + 1] == labels[i]) ++j;
        runs.push_back({labels[i], i, j, 0.0, false});
        i = j + 1;
    }
    for (auto& r : runs) r.duration_ms = run_duration_ms(t_ms, r.start_idx, r.end_idx, period);

    // A short saccade becomes fixation when it has a fixation neighbour.
    for (std::size_t k = 0; k < runs.size(); ++k) {
        auto& r = runs[k];
        if (r.kind != SegmentKind::Saccade || r.duration_ms >= cfg.min_saccade_ms) continue;
        const bool has_neighbour = (k > 0 && runs[k - 1].kind == SegmentKind::Fixation) ||
                                   (k + 1 < runs.size() && runs[k + 1].kind == SegmentKind::Fixation);
        if (has_neighbour) r.kind = SegmentKind::Fixation;
    }

    for (const auto& r : runs) {
        if (!out.segments.empty() && out.segments.back().kind == r.kind) {
            out.segments.back().end_idx = r.end_idx;
        } else {
            out.segments.push_back(r);
        }
    }
    for (auto& s : out.segments) s.duration_ms = run_duration_ms(t_ms, s.start_idx, s.end_idx, period);

    auto below_minimum = [&](const Segment& s) {
        return s.duration_ms < (s.kind == SegmentKind::Fixation ? cfg.min_fixation_ms : cfg.min_saccade_ms);
    };
    for (std::size_t k = 0; k < out.segments.size(); ++k) {
        auto& s = out.segments[k];
        const bool edge = k == 0 || k + 1 == out.segments.size();
        s.truncated = edge && below_minimum(s);
    }
    return out;
}

inline SegmentList build_segments(std::span<const SegmentKind> labels, const KinematicTrace& trace,
                                  const IvtConfig& cfg = {}) {
    return build_segments(labels, trace.t_ms, trace.rate_hz, cfg);
}

inline SegmentList segment_trace(const KinematicTrace& trace, const IvtConfig& cfg = {}) {
    return build_segments(ivt_classify(trace, cfg), trace, cfg);
}

/// Debug dump: `start_idx,end_idx,kind,duration_ms`.
inline void write_segments_csv(std::ostream& out, const SegmentList& list) {
    out << "start_idx,end_idx,kind,duration_ms\n";
    for (const auto& s : list.segments) {
        out << s.start_idx << ',' << s.end_idx << ',' << to_string(s.kind) << ','
            << detail::format_double(s.duration_ms) << '\n';
    }
}

} // namespace gazeid
