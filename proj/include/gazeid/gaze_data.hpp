#pragma once

// Recording data model, screen geometry and the recording CSV format.
//
// CSV layout (UTF-8, header mandatory):
//   t_ms,valid,theta_x_deg,theta_y_deg,stim_x_deg,stim_y_deg
// Angles are in degrees. `valid` is 0 or 1. Rows reported in errors are
// 1-based file line numbers (the header is line 1).

#include "gazeid/error.hpp"

#include <algorithm>
#include <array>
#include <charconv>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <istream>
#include <numbers>
#include <optional>
#include <ostream>
#include <sstream>
#include <string>
#include <string_view>
#include <vector>

namespace gazeid {

struct ScreenGeometry {
    double distance_mm = 550.0;
    double width_mm = 474.0;
    double height_mm = 297.0;
    double width_px = 1680.0;
    double height_px = 1050.0;

    [[nodiscard]] bool valid() const {
        return distance_mm > 0 && width_mm > 0 && height_mm > 0 && width_px > 0 && height_px > 0;
    }
};

struct GazeSample {
    double t_ms = 0.0;
    double theta_x_deg = 0.0;
    double theta_y_deg = 0.0;
    double stim_x_deg = 0.0;
    double stim_y_deg = 0.0;
    bool valid = true;

    bool operator==(const GazeSample&) const = default;
};

enum class StimulusKind { Ran, Tex, Synth };

inline std::string_view to_string(StimulusKind kind) {
    switch (kind) {
    case StimulusKind::Ran: return "RAN";
    case StimulusKind::Tex: return "TEX";
    case StimulusKind::Synth: return "SYNTH";
    }
    return "SYNTH";
}

inline StimulusKind parse_stimulus_kind(std::string_view text) {
    if (text == "RAN") return StimulusKind::Ran;
    if (text == "TEX") return StimulusKind::Tex;
    if (text == "SYNTH") return StimulusKind::Synth;
    throw InvalidConfig("unknown stimulus kind '" + std::string(text) + "' (expected RAN, TEX or SYNTH)");
}

struct GazeRecording {
    std::string subject_id;
    std::string session_id;
    StimulusKind stimulus_kind = StimulusKind::Synth;
    double rate_hz = 250.0;
    std::vector<GazeSample> samples;
    ScreenGeometry geometry;

    [[nodiscard]] std::size_t size() const { return samples.size(); }
    [[nodiscard]] double period_ms() const { return 1000.0 / rate_hz; }
};

/// Checks the recording invariants: positive rate, non-empty, strictly
/// increasing timestamps with spacing within 10% of the nominal period.
inline void validate(const GazeRecording& rec) {
    if (!(rec.rate_hz > 0)) throw InvalidRecording("sampling rate must be positive");
    if (rec.samples.empty()) throw InvalidRecording("recording has no samples");
    if (!rec.geometry.valid()) throw InvalidRecording("screen geometry fields must be positive");
    const double period = rec.period_ms();
    for (std::size_t i = 1; i < rec.samples.size(); ++i) {
        const double dt = rec.samples[i].t_ms - rec.samples[i - 1].t_ms;
        if (!(dt > 0)) throw InvalidRecording("timestamps must strictly increase (sample " + std::to_string(i) + ")");
        if (std::abs(dt - period) > 0.1 * period) {
            throw InvalidRecording("sample spacing " + std::to_string(dt) + " ms at sample " + std::to_string(i) +
                                   " inconsistent with " + std::to_string(rec.rate_hz) + " Hz");
        }
    }
}

struct ScreenPoint {
    double x_px = 0.0;
    double y_px = 0.0;
};

inline double deg_to_rad(double deg) { return deg * std::numbers::pi / 180.0; }
inline double rad_to_deg(double rad) { return rad * 180.0 / std::numbers::pi; }

/// Projects one visual angle onto a screen axis of `size_mm` / `size_px`.
inline double angle_to_screen(double theta_deg, double distance_mm, double size_mm, double size_px) {
    if (!(std::abs(theta_deg) < 90.0)) throw AngleOutOfRange(theta_deg);
    return (distance_mm * size_px / size_mm) * std::tan(deg_to_rad(theta_deg)) + size_px / 2.0;
}

inline ScreenPoint to_screen(double theta_x_deg, double theta_y_deg, const ScreenGeometry& geom) {
    return {angle_to_screen(theta_x_deg, geom.distance_mm, geom.width_mm, geom.width_px),
            angle_to_screen(theta_y_deg, geom.distance_mm, geom.height_mm, geom.height_px)};
}

inline ScreenPoint to_screen(const GazeSample& sample, const ScreenGeometry& geom) {
    return to_screen(sample.theta_x_deg, sample.theta_y_deg, geom);
}

namespace detail {

inline std::string_view trim(std::string_view s) {
    while (!s.empty() && (s.front() == ' ' || s.front() == '\t')) s.remove_prefix(1);
    while (!s.empty() && (s.back() == ' ' || s.back() == '\t' || s.back() == '\r')) s.remove_suffix(1);
    return s;
}

inline std::vector<std::string_view> split(std::string_view line, char sep = ',') {
    std::vector<std::string_view> out;
    std::size_t start = 0;
    while (true) {
        const auto pos = line.find(sep, start);
        out.push_back(trim(line.substr(start, pos == std::string_view::npos ? std::string_view::npos : pos - start)));
        if (pos == std::string_view::npos) break;
        start = pos + 1;
    }
    return out;
}

/// Accepts anything std::from_chars does, including "nan" and "inf".
inline std::optional<double> parse_double(std::string_view s) {
    if (!s.empty() && s.front() == '+') s.remove_prefix(1);
    double v = 0.0;
    const auto* end = s.data() + s.size();
    auto [ptr, ec] = std::from_chars(s.data(), end, v);
    if (ec != std::errc{} || ptr != end || s.empty()) return std::nullopt;
    return v;
}

/// Shortest decimal text that reads back to the same double.
inline std::string format_double(double v) {
    if (std::isnan(v)) return "nan";
    std::array<char, 64> buf{};
    auto [ptr, ec] = std::to_chars(buf.data(), buf.data() + buf.size(), v);
    return std::string(buf.data(), ptr);
}

} // namespace detail

inline constexpr std::array<std::string_view, 6> kRecordingColumns{
    "t_ms", "valid", "theta_x_deg", "theta_y_deg", "stim_x_deg", "stim_y_deg"};

struct LoadOptions {
    /// Nominal rate; inferred from the median sample spacing when absent.
    std::optional<double> rate_hz;
    StimulusKind stimulus_kind = StimulusKind::Synth;
    std::string subject_id;
    std::string session_id;
};

/// Splits a recording file stem `<subject>_<session>` into its ids.
/// A stem without an underscore is taken as the subject with session "1".
inline std::pair<std::string, std::string> ids_from_path(const std::filesystem::path& path) {
    const std::string stem = path.stem().string();
    const auto pos = stem.rfind('_');
    if (pos == std::string::npos || pos == 0 || pos + 1 == stem.size()) return {stem, "1"};
    return {stem.substr(0, pos), stem.substr(pos + 1)};
}

inline GazeRecording read_recording(std::istream& in, const ScreenGeometry& geom, LoadOptions opts,
                                    const std::string& source = "<stream>") {
    GazeRecording rec;
    rec.subject_id = std::move(opts.subject_id);
    rec.session_id = std::move(opts.session_id);
    rec.stimulus_kind = opts.stimulus_kind;
    rec.geometry = geom;

    std::string line;
    std::size_t row = 0;
    bool have_header = false;
    while (std::getline(in, line)) {
        ++row;
        std::string_view view = line;
        if (row == 1 && view.starts_with("\xEF\xBB\xBF")) view.remove_prefix(3);
        if (detail::trim(view).empty()) continue;
        const auto cells = detail::split(view);
        if (!have_header) {
            if (cells.size() != kRecordingColumns.size()) {
                throw ParseError(source, row, cells.size(), "header must have 6 columns");
            }
            for (std::size_t c = 0; c < cells.size(); ++c) {
                if (cells[c] != kRecordingColumns[c]) {
                    throw ParseError(source, row, c + 1, "expected header column '" +
                                                             std::string(kRecordingColumns[c]) + "'");
                }
            }
            have_header = true;
            continue;
        }
        if (cells.size() != kRecordingColumns.size()) {
            throw ParseError(source, row, std::min(cells.size(), kRecordingColumns.size()) + 1,
                             "expected 6 columns, got " + std::to_string(cells.size()));
        }
        std::array<double, 6> values{};
        for (std::size_t c = 0; c < cells.size(); ++c) {
            const auto v = detail::parse_double(cells[c]);
            if (!v) throw ParseError(source, row, c + 1, "not a number: '" + std::string(cells[c]) + "'");
            values[c] = *v;
        }
        if (!std::isfinite(values[0])) throw ParseError(source, row, 1, "timestamp must be finite");
        if (values[1] != 0.0 && values[1] != 1.0) throw ParseError(source, row, 2, "valid must be 0 or 1");
        GazeSample s;
        s.t_ms = values[0];
        s.valid = values[1] == 1.0;
        s.theta_x_deg = values[2];
        s.theta_y_deg = values[3];
        s.stim_x_deg = values[4];
        s.stim_y_deg = values[5];
        if (!rec.samples.empty() && !(s.t_ms > rec.samples.back().t_ms)) throw NonMonotonicTimestamps(source, row);
        rec.samples.push_back(s);
    }
    if (!have_header) throw ParseError(source, row + 1, 1, "missing header");
    if (rec.samples.empty()) throw InvalidRecording(source + ": recording has no samples");

    if (opts.rate_hz) {
        rec.rate_hz = *opts.rate_hz;
    } else {
        if (rec.samples.size() < 2) throw InvalidRecording(source + ": cannot infer rate from one sample");
        std::vector<double> dts;
        dts.reserve(rec.samples.size() - 1);
        for (std::size_t i = 1; i < rec.samples.size(); ++i) dts.push_back(rec.samples[i].t_ms - rec.samples[i - 1].t_ms);
        auto mid = dts.begin() + static_cast<std::ptrdiff_t>(dts.size() / 2);
        std::nth_element(dts.begin(), mid, dts.end());
        rec.rate_hz = 1000.0 / *mid;
    }
    try {
        validate(rec);
    } catch (const InvalidRecording& e) {
        throw InvalidRecording(source + ": " + e.what());
    }
    return rec;
}

inline GazeRecording load_recording(const std::filesystem::path& path, const ScreenGeometry& geom,
                                    LoadOptions opts = {}) {
    std::ifstream in(path);
    if (!in) throw Error("cannot open recording " + path.string());
    if (opts.subject_id.empty()) {
        auto [subject, session] = ids_from_path(path);
        opts.subject_id = std::move(subject);
        if (opts.session_id.empty()) opts.session_id = std::move(session);
    }
    return read_recording(in, geom, std::move(opts), path.string());
}

inline void write_recording(std::ostream& out, const GazeRecording& rec) {
    for (std::size_t c = 0; c < kRecordingColumns.size(); ++c) {
        out << (c ? "," : "") << kRecordingColumns[c];
    }
    out << '\n';
    for (const auto& s : rec.samples) {
        out << detail::format_double(s.t_ms) << ',' << (s.valid ? '1' : '0') << ','
            << detail::format_double(s.theta_x_deg) << ',' << detail::format_double(s.theta_y_deg) << ','
            << detail::format_double(s.stim_x_deg) << ',' << detail::format_double(s.stim_y_deg) << '\n';
    }
}

inline void save_recording(const std::filesystem::path& path, const GazeRecording& rec) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw Error("cannot write recording " + path.string());
    write_recording(out, rec);
    if (!out) throw Error("failed writing recording " + path.string());
}

} // namespace gazeid
