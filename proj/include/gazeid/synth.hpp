#pragma once

// Synthetic gaze recordings with subject-specific oculomotor parameters and
// a ground-truth event log.
//
// A recording alternates fixations and saccades. A fixation holds the gaze
// on its target with a mean-reverting Gaussian drift. A saccade moves along a
// straight line with a smoothstep profile 3u^2 - 2u^3, time-warped by the
// subject's asymmetry and lasting just long enough that its peak angular
// velocity equals slope x amplitude. White angle noise is added on top.
//
// Truth labels follow the forward-difference convention: sample i is part of
// a saccade when the planted gaze moves anywhere in [t_i, t_i+1).

#include "gazeid/error.hpp"
#include "gazeid/gaze_data.hpp"
#include "gazeid/random.hpp"

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <numbers>
#include <ostream>
#include <string>
#include <tuple>
#include <vector>

namespace gazeid {

struct SubjectProfile {
    double main_sequence_slope = 40.0;   // peak velocity / amplitude, 1/s
    double fixation_drift_std = 0.01;    // per-sample drift increment, degrees
    double fixation_duration_mean_ms = 250.0;
    double saccade_asymmetry = 0.5;      // 0.5 = symmetric velocity profile
    double noise_std_deg = 0.01;
    std::uint64_t seed = 0;

    [[nodiscard]] bool valid() const {
        return main_sequence_slope > 0 && fixation_drift_std >= 0 && fixation_duration_mean_ms > 0 &&
               saccade_asymmetry >= 0 && saccade_asymmetry <= 1 && noise_std_deg >= 0;
    }
};

struct SynthSpec {
    int n_subjects = 20;
    int sessions_per_subject = 2;
    double duration_s = 100.0;
    double rate_hz = 250.0;
    StimulusKind stimulus_kind = StimulusKind::Synth;
    ScreenGeometry geometry;
    std::uint64_t master_seed = 7;
};

inline void validate(const SynthSpec& spec) {
    if (spec.n_subjects < 1) throw InvalidSpec("n_subjects must be at least 1");
    if (spec.sessions_per_subject < 1) throw InvalidSpec("sessions_per_subject must be at least 1");
    if (!(spec.duration_s > 0)) throw InvalidSpec("duration_s must be positive");
    if (spec.rate_hz != 250.0 && spec.rate_hz != 1000.0) throw InvalidSpec("rate_hz must be 250 or 1000");
    if (!spec.geometry.valid()) throw InvalidSpec("screen geometry fields must be positive");
}

struct TruthEvent {
    std::string subject;
    std::string session;
    std::size_t start_idx = 0;
    std::size_t end_idx = 0;  // inclusive
    bool saccade = false;
};

struct SynthDataset {
    std::vector<SubjectProfile> profiles;
    std::vector<GazeRecording> recordings;  // subject-major, then session
    std::vector<TruthEvent> truth;
};

inline double standard_normal(Rng& rng) {
    // Box-Muller on the portable uniform, so streams match across libraries.
    const double u1 = 1.0 - uniform01(rng);
    const double u2 = uniform01(rng);
    return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * std::numbers::pi * u2);
}

inline std::string subject_name(int index) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "S%03d", index + 1);
    return buf;
}

/// Profile of subject `index`; depends only on (master_seed, index).
inline SubjectProfile make_profile(std::uint64_t master_seed, int index) {
    SubjectProfile p;
    p.seed = derive_seed(master_seed, static_cast<std::uint64_t>(index), 0x50F11E);
    Rng rng(p.seed);
    p.main_sequence_slope = 28.0 * std::pow(1.8, uniform01(rng));  // 28 .. 50.4
    p.fixation_drift_std = uniform(rng, 0.004, 0.03);
    p.fixation_duration_mean_ms = uniform(rng, 180.0, 420.0);
    p.saccade_asymmetry = uniform(rng, 0.15, 0.85);
    p.noise_std_deg = uniform(rng, 0.004, 0.04);
    return p;
}

namespace detail {

/// Time warp u -> u + a u (1 - u), monotone for |a| < 1.
inline double warp(double u, double a) { return u + a * u * (1.0 - u); }
inline double smoothstep(double u) { return u * u * (3.0 - 2.0 * u); }

inline double warp_coefficient(double asymmetry) { return (2.0 * asymmetry - 1.0) * 0.3; }

/// max over u of d/du smoothstep(warp(u)), found on a fine grid.
inline double profile_peak_rate(double a) {
    double peak = 0.0;
    constexpr int kSteps = 20000;
    for (int i = 0; i <= kSteps; ++i) {
        const double u = static_cast<double>(i) / kSteps;
        const double w = warp(u, a);
        peak = std::max(peak, 6.0 * w * (1.0 - w) * (1.0 + a * (1.0 - 2.0 * u)));
    }
    return peak;
}

} // namespace detail

/// Saccade duration (seconds) that gives peak velocity slope x amplitude.
inline double saccade_duration_s(const SubjectProfile& p) {
    return detail::profile_peak_rate(detail::warp_coefficient(p.saccade_asymmetry)) / p.main_sequence_slope;
}

/// Generates one session of one subject. `session_index` selects an
/// independent stream for targets, drift and noise.
inline GazeRecording generate_recording(const SynthSpec& spec, const SubjectProfile& profile, int subject_index,
                                        int session_index, std::vector<TruthEvent>* truth = nullptr) {
    if (!profile.valid()) throw InvalidSpec("subject profile out of range");
    Rng rng(derive_seed(profile.seed, static_cast<std::uint64_t>(session_index), 0x5E55));
    GazeRecording rec;
    rec.subject_id = subject_name(subject_index);
    rec.session_id = std::to_string(session_index + 1);
    rec.stimulus_kind = spec.stimulus_kind;
    rec.rate_hz = spec.rate_hz;
    rec.geometry = spec.geometry;

    const auto n = static_cast<std::size_t>(std::llround(spec.duration_s * spec.rate_hz));
    const double period_ms = 1000.0 / spec.rate_hz;
    const double a = detail::warp_coefficient(profile.saccade_asymmetry);
    const double sacc_ms = 1000.0 * saccade_duration_s(profile);

    // Amplitude 8..14 degrees in a random direction, kept inside +-12 x +-8.
    auto next_target = [&](double fx, double fy) {
        while (true) {
            const double amp = uniform(rng, 8.0, 14.0);
            const double dir = uniform(rng, 0.0, 2.0 * std::numbers::pi);
            const double tx = fx + amp * std::cos(dir);
            const double ty = fy + amp * std::sin(dir);
            if (std::abs(tx) <= 12.0 && std::abs(ty) <= 8.0) return std::pair{tx, ty};
        }
    };
    auto fixation_ms = [&] {
        const double z = standard_normal(rng);
        return std::max(130.0, profile.fixation_duration_mean_ms * std::exp(0.3 * z - 0.045));
    };

    double anchor_x = uniform(rng, -12.0, 12.0);
    double anchor_y = uniform(rng, -8.0, 8.0);
    double drift_x = 0.0, drift_y = 0.0;
    double fix_end = fixation_ms();
    bool in_saccade = false;
    double sacc_start = 0.0;
    double from_x = 0.0, from_y = 0.0, to_x = 0.0, to_y = 0.0;
    double gaze_x = anchor_x, gaze_y = anchor_y;

    std::vector<bool> moving(n, false);

    rec.samples.reserve(n);
    for (std::size_t i = 0; i < n; ++i) {
        const double t = static_cast<double>(i) * period_ms;
        if (!in_saccade && t > fix_end) {
            in_saccade = true;
            sacc_start = fix_end;
            from_x = gaze_x;
            from_y = gaze_y;
            std::tie(to_x, to_y) = next_target(from_x, from_y);
        }
        if (in_saccade && t >= sacc_start + sacc_ms) {
            in_saccade = false;
            anchor_x = to_x;
            anchor_y = to_y;
            drift_x = drift_y = 0.0;
            fix_end = sacc_start + sacc_ms + fixation_ms();
        }
        if (in_saccade) {
            moving[i] = true;
            if (i > 0) moving[i - 1] = true;
            const double s = detail::smoothstep(detail::warp((t - sacc_start) / sacc_ms, a));
            gaze_x = from_x + (to_x - from_x) * s;
            gaze_y = from_y + (to_y - from_y) * s;
        } else {
            drift_x = 0.95 * drift_x + profile.fixation_drift_std * standard_normal(rng);
            drift_y = 0.95 * drift_y + profile.fixation_drift_std * standard_normal(rng);
            gaze_x = anchor_x + drift_x;
            gaze_y = anchor_y + drift_y;
        }
        GazeSample s;
        s.t_ms = t;
        s.theta_x_deg = gaze_x + profile.noise_std_deg * standard_normal(rng);
        s.theta_y_deg = gaze_y + profile.noise_std_deg * standard_normal(rng);
        s.stim_x_deg = in_saccade ? to_x : anchor_x;
        s.stim_y_deg = in_saccade ? to_y : anchor_y;
        s.valid = true;
        rec.samples.push_back(s);
    }
    if (truth) {
        std::size_t start = 0;
        for (std::size_t i = 1; i <= n; ++i) {
            if (i == n || moving[i] != moving[start]) {
                truth->push_back({rec.subject_id, rec.session_id, start, i - 1, moving[start]});
                start = i;
            }
        }
    }
    return rec;
}

inline SynthDataset generate(const SynthSpec& spec) {
    validate(spec);
    SynthDataset ds;
    for (int s = 0; s < spec.n_subjects; ++s) {
        ds.profiles.push_back(make_profile(spec.master_seed, s));
        for (int k = 0; k < spec.sessions_per_subject; ++k) {
            ds.recordings.push_back(generate_recording(spec, ds.profiles.back(), s, k, &ds.truth));
        }
    }
    return ds;
}

inline void write_truth_csv(std::ostream& out, const std::vector<TruthEvent>& truth) {
    out << "subject,session,start_idx,end_idx,kind\n";
    for (const auto& e : truth) {
        out << e.subject << ',' << e.session << ',' << e.start_idx << ',' << e.end_idx << ','
            << (e.saccade ? "SACCADE" : "FIXATION") << '\n';
    }
}

inline std::filesystem::path recording_filename(const GazeRecording& rec) {
    return rec.subject_id + "_" + rec.session_id + ".csv";
}

/// Writes `<subject>_<session>.csv` per recording plus `truth.csv`.
inline void write_dataset(const std::filesystem::path& dir, const SynthDataset& ds) {
    std::filesystem::create_directories(dir);
    for (const auto& rec : ds.recordings) save_recording(dir / recording_filename(rec), rec);
    std::ofstream out(dir / "truth.csv", std::ios::binary);
    if (!out) throw Error("cannot write " + (dir / "truth.csv").string());
    write_truth_csv(out, ds.truth);
}

} // namespace gazeid
