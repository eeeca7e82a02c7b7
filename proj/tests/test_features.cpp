#include "oracles.hpp"

#include <gtest/gtest.h>

#include <numbers>
#include <random>
#include <sstream>

using namespace gazeid;

namespace {

Segment seg(SegmentKind kind, std::size_t a, std::size_t b, double duration_ms) {
    return {kind, a, b, duration_ms, false};
}

double feature(const FeatureVector& v, const std::string& name) { return v.at(name); }

/// Random-walk trace for invariance checks.
KinematicTrace random_trace(std::uint64_t seed, std::size_t n) {
    std::mt19937_64 rng(seed);
    std::normal_distribution<double> z(0.0, 3.0);
    std::vector<double> x(n), y(n);
    double px = 0, py = 0;
    for (std::size_t i = 0; i < n; ++i) {
        px += z(rng);
        py += z(rng);
        x[i] = px;
        y[i] = py;
    }
    auto tr = oracle::trace_from_xy(x, y, 250.0);
    std::uniform_real_distribution<double> u(0.0, 500.0);
    for (std::size_t i = 0; i < n; ++i) {
        tr.angular_speed[i] = u(rng);
        tr.angular_accel[i] = 40 * u(rng);
        tr.vx[i] = u(rng) - 250;
        tr.vy[i] = u(rng) - 250;
        tr.ax[i] = u(rng) - 250;
        tr.ay[i] = u(rng) - 250;
    }
    return tr;
}

void shift(KinematicTrace& tr, double dx, double dy) {
    for (auto& v : tr.x) v += dx;
    for (auto& v : tr.y) v += dy;
}

} // namespace

TEST(Features, Arity) {
    EXPECT_EQ(fixation_feature_names().size(), 12u);
    EXPECT_EQ(saccade_feature_names().size(), 46u);
    const auto tr = random_trace(1, 40);
    EXPECT_EQ(fixation_features(seg(SegmentKind::Fixation, 0, 19, 80), nullptr, tr).size(), 12u);
    EXPECT_EQ(saccade_features(seg(SegmentKind::Saccade, 20, 39, 80), nullptr, tr).size(), 46u);
}

TEST(FixationFeatures, PathDispersionVelocity) {
    const auto tr = oracle::trace_from_xy({0, 3}, {0, 4}, 1.0);
    const auto v = fixation_features(seg(SegmentKind::Fixation, 0, 1, 1000.0), nullptr, tr);
    EXPECT_NEAR(feature(v, "path_length"), 5.0, 1e-9);
    EXPECT_NEAR(feature(v, "dispersion"), 7.0, 1e-9);
    EXPECT_NEAR(feature(v, "avg_velocity"), 5.0, 1e-9);
    EXPECT_NEAR(feature(v, "std_x"), 1.5, 1e-12);
    EXPECT_NEAR(feature(v, "std_y"), 2.0, 1e-12);
    EXPECT_EQ(feature(v, "angle_prev"), 0.0);
    EXPECT_EQ(feature(v, "dist_prev"), 0.0);
}

TEST(FixationFeatures, StationaryPoint) {
    const auto tr = oracle::trace_from_xy(std::vector<double>(10, 5.0), std::vector<double>(10, -1.0), 250.0);
    const auto v = fixation_features(seg(SegmentKind::Fixation, 0, 9, 40.0), nullptr, tr);
    for (const char* n : {"path_length", "dispersion", "std_x", "std_y", "avg_velocity", "skew_x", "kurt_y"}) {
        EXPECT_EQ(feature(v, n), 0.0) << n;
    }
}

TEST(FixationFeatures, PreviousCentroid) {
    const auto tr = oracle::trace_from_xy({0, 0, 1, 1}, {0, 0, 1, 1}, 250.0);
    const auto prev = seg(SegmentKind::Fixation, 0, 1, 8);
    const auto v = fixation_features(seg(SegmentKind::Fixation, 2, 3, 8), &prev, tr);
    EXPECT_NEAR(feature(v, "angle_prev"), 45.0, 1e-9);
    EXPECT_NEAR(feature(v, "dist_prev"), std::sqrt(2.0), 1e-9);
}

TEST(FixationFeatures, MomentsMatchHandValues) {
    // x = [0, 0, 0, 4]: mean 1, m2 = 3, m3 = 6, m4 = 21.
    const auto tr = oracle::trace_from_xy({0, 0, 0, 4}, {0, 1, 2, 3}, 250.0);
    const auto v = fixation_features(seg(SegmentKind::Fixation, 0, 3, 16), nullptr, tr);
    EXPECT_NEAR(feature(v, "skew_x"), 6.0 / std::pow(3.0, 1.5), 1e-12);
    EXPECT_NEAR(feature(v, "kurt_x"), 21.0 / 9.0, 1e-12);
    EXPECT_NEAR(feature(v, "skew_y"), 0.0, 1e-12);
    EXPECT_NEAR(feature(v, "kurt_y"), (2 * 1.5 * 1.5 * 1.5 * 1.5 + 2 * 0.5 * 0.5 * 0.5 * 0.5) / 4 / (1.25 * 1.25), 1e-12);
}

TEST(FixationFeatures, DegenerateAndWrongKind) {
    auto tr = oracle::trace_from_xy({0, 1, 2}, {0, 1, 2}, 250.0);
    tr.valid[1] = tr.valid[2] = false;
    EXPECT_THROW(fixation_features(seg(SegmentKind::Fixation, 0, 2, 12), nullptr, tr), DegenerateSegment);
    EXPECT_THROW(fixation_features(seg(SegmentKind::Saccade, 0, 2, 12), nullptr, tr), DegenerateSegment);
}

TEST(SaccadeFeatures, AngleAndAmplitude) {
    const auto tr = oracle::trace_from_xy({0, 0.5, 1}, {0, 0.5, 1}, 250.0);
    const auto v = saccade_features(seg(SegmentKind::Saccade, 0, 2, 12), nullptr, tr);
    EXPECT_NEAR(feature(v, "angle"), 45.0, 1e-9);
    EXPECT_NEAR(feature(v, "amplitude"), std::sqrt(2.0), 1e-9);
}

TEST(SaccadeFeatures, AngularVelocityStatistics) {
    auto tr = oracle::trace_from_xy({0, 1, 2}, {0, 0, 0}, 250.0);
    tr.angular_speed = {100, 200, 300};
    const auto v = saccade_features(seg(SegmentKind::Saccade, 0, 2, 12), nullptr, tr);
    EXPECT_NEAR(feature(v, "ang_vel_mean"), 200.0, 1e-9);
    EXPECT_NEAR(feature(v, "ang_vel_median"), 200.0, 1e-9);
    EXPECT_NEAR(feature(v, "ang_vel_max"), 300.0, 1e-9);
    EXPECT_NEAR(feature(v, "ang_vel_std"), std::sqrt(20000.0 / 3.0), 1e-9);
    EXPECT_NEAR(feature(v, "ang_vel_skew"), 0.0, 1e-12);
    EXPECT_NEAR(feature(v, "ang_vel_kurt"), 1.5, 1e-12);
}

TEST(SaccadeFeatures, SaccadicRatio) {
    auto tr = oracle::trace_from_xy(std::vector<double>(10, 0.0), std::vector<double>(10, 0.0), 250.0);
    tr.angular_speed = {50, 120, 300, 400, 380, 200, 90, 60, 55, 51};
    const auto v = saccade_features(seg(SegmentKind::Saccade, 0, 9, 40.0), nullptr, tr);
    EXPECT_NEAR(feature(v, "saccadic_ratio"), 10000.0, 1e-9);
}

TEST(SaccadeFeatures, AngleWithPreviousIsWrappedDifference) {
    // Previous saccade heads along +x (0 deg), current along -y (-90 deg);
    // then one heading to 170 deg after one at -170 deg.
    const auto tr = oracle::trace_from_xy({0, 1, 1, 1}, {0, 0, 0, -1}, 250.0);
    const auto prev = seg(SegmentKind::Saccade, 0, 1, 8);
    const auto v = saccade_features(seg(SegmentKind::Saccade, 2, 3, 8), &prev, tr);
    EXPECT_NEAR(feature(v, "angle_prev"), -90.0, 1e-9);
    EXPECT_NEAR(feature(v, "dist_prev"), std::hypot(0.5, 0.5), 1e-9);

    const double c = std::cos(10 * std::numbers::pi / 180), s = std::sin(10 * std::numbers::pi / 180);
    const auto tr2 = oracle::trace_from_xy({0, -c, 0, -c}, {0, -s, 0, s}, 250.0);
    const auto v2 = saccade_features(seg(SegmentKind::Saccade, 2, 3, 8), &prev, tr2);
    EXPECT_NEAR(feature(v2, "angle_prev"), -20.0, 1e-9);
}

TEST(SaccadeFeatures, TranslationAndRotation) {
    auto tr = random_trace(4, 60);
    const auto s = seg(SegmentKind::Saccade, 10, 39, 120);
    const auto f = seg(SegmentKind::Fixation, 10, 39, 120);
    const auto base_s = saccade_features(s, nullptr, tr);
    const auto base_f = fixation_features(f, nullptr, tr);

    auto moved = tr;
    shift(moved, 123.0, -77.0);
    const auto ms = saccade_features(s, nullptr, moved);
    const auto mf = fixation_features(f, nullptr, moved);
    for (const char* n : {"path_length", "dispersion", "std_x", "std_y", "amplitude", "angle"}) {
        EXPECT_NEAR(feature(ms, n), feature(base_s, n), 1e-9) << n;
    }
    for (const char* n : {"path_length", "dispersion", "std_x", "std_y"}) {
        EXPECT_NEAR(feature(mf, n), feature(base_f, n), 1e-9) << n;
    }

    auto rotated = tr;
    const double phi = 25.0, c = std::cos(phi * std::numbers::pi / 180), sn = std::sin(phi * std::numbers::pi / 180);
    for (std::size_t i = 0; i < tr.x.size(); ++i) {
        rotated.x[i] = c * tr.x[i] - sn * tr.y[i];
        rotated.y[i] = sn * tr.x[i] + c * tr.y[i];
    }
    const auto rs = saccade_features(s, nullptr, rotated);
    double diff = feature(rs, "angle") - feature(base_s, "angle");
    while (diff > 180) diff -= 360;
    while (diff <= -180) diff += 360;
    EXPECT_NEAR(diff, phi, 1e-9);
    EXPECT_NEAR(feature(rs, "amplitude"), feature(base_s, "amplitude"), 1e-9);
    EXPECT_NEAR(feature(rs, "path_length"), feature(base_s, "path_length"), 1e-9);
}

TEST(ExtractFeatures, FiniteOnSyntheticRecording) {
    SynthSpec spec;
    spec.duration_s = 20;
    const auto p = make_profile(spec.master_seed, 0);
    const auto rec = generate_recording(spec, p, 0, 0);
    const auto tr = kinematics(rec, spec.geometry);
    const auto segs = segment_trace(tr);
    const auto f = extract_features(segs, tr);
    EXPECT_GT(f.fixations.count(), 20);
    EXPECT_GT(f.saccades.count(), 20);
    EXPECT_TRUE(f.fixations.rows.allFinite());
    EXPECT_TRUE(f.saccades.rows.allFinite());
    std::size_t usable = 0;
    for (const auto& s : segs.segments) usable += s.truncated ? 0 : 1;
    EXPECT_EQ(static_cast<std::size_t>(f.fixations.count() + f.saccades.count()) + f.skipped, usable);
}

TEST(ExtractFeatures, DegenerateSegmentsSkipped) {
    auto tr = oracle::trace_from_xy(std::vector<double>(90, 0.0), std::vector<double>(90, 0.0), 250.0);
    for (std::size_t i = 30; i < 60; ++i) tr.valid[i] = false;
    SegmentList list;
    list.segments = {seg(SegmentKind::Fixation, 0, 29, 120), seg(SegmentKind::Saccade, 30, 59, 120),
                     seg(SegmentKind::Fixation, 60, 89, 120)};
    const auto f = extract_features(list, tr);
    EXPECT_EQ(f.skipped, 1u);
    EXPECT_EQ(f.fixations.count(), 2);
    EXPECT_EQ(f.saccades.count(), 0);
}

TEST(Normalization, HandStatistics) {
    Eigen::MatrixXd m(2, 2);
    m << 1, 5, 3, 5;
    const auto s = fit_norm(m);
    EXPECT_DOUBLE_EQ(s.mean[0], 2.0);
    EXPECT_DOUBLE_EQ(s.std[0], 1.0);
    EXPECT_DOUBLE_EQ(s.std[1], 0.0);
    const auto n = apply_norm(m, s);
    EXPECT_DOUBLE_EQ(n(1, 0), 1.0);
    EXPECT_DOUBLE_EQ(n(0, 0), -1.0);
    EXPECT_EQ(n(0, 1), 0.0);
    EXPECT_EQ(normalize_value(2.0, s.mean[0], s.std[0]), 0.0);
    EXPECT_THROW(fit_norm(Eigen::MatrixXd(0, 3)), EmptyTrainingSet);
}

TEST(Normalization, ZeroMeanUnitStd) {
    std::mt19937_64 rng(8);
    std::normal_distribution<double> z(50.0, 20.0);
    Eigen::MatrixXd m(300, 6);
    for (Eigen::Index i = 0; i < m.size(); ++i) m(i) = z(rng);
    m.col(3).setConstant(7.5);
    const auto n = apply_norm(m, fit_norm(m));
    for (Eigen::Index c = 0; c < n.cols(); ++c) {
        const double mean = n.col(c).mean();
        const double sd = std::sqrt((n.col(c).array() - mean).square().mean());
        EXPECT_NEAR(mean, 0.0, 1e-9);
        if (c == 3) EXPECT_EQ(sd, 0.0);
        else EXPECT_NEAR(sd, 1.0, 1e-9);
    }
}

TEST(Masks, FullAndSingle) {
    const auto tr = random_trace(2, 30);
    const auto v = fixation_features(seg(SegmentKind::Fixation, 0, 29, 120), nullptr, tr);
    EXPECT_EQ(apply_mask(v, full_mask(SegmentKind::Fixation)).values, v.values);
    FeatureMask only{SegmentKind::Fixation, StimulusKind::Synth, {"duration_ms"}, {true}};
    const auto one = apply_mask(v, only);
    ASSERT_EQ(one.size(), 1u);
    EXPECT_EQ(one.names[0], "duration_ms");
    EXPECT_EQ(one.values[0], 120.0);
    FeatureMask bad{SegmentKind::Fixation, StimulusKind::Synth, {"no_such_feature"}, {true}};
    EXPECT_THROW(apply_mask(v, bad), UnknownFeatureName);
}

TEST(Masks, PublishedTexFixation) {
    const auto m = published_mask(SegmentKind::Fixation, StimulusKind::Tex);
    EXPECT_EQ(m.included_count(), 9u);
    for (const char* n : {"duration_ms", "std_x", "kurt_x"}) EXPECT_FALSE(m.includes(n)) << n;
    const auto tr = random_trace(3, 30);
    const auto v = apply_mask(fixation_features(seg(SegmentKind::Fixation, 0, 29, 120), nullptr, tr), m);
    EXPECT_EQ(v.size(), 9u);
    EXPECT_EQ(v.names.front(), "std_y");
}

TEST(Masks, JsonRoundTrip) {
    const auto m = published_mask(SegmentKind::Saccade, StimulusKind::Ran);
    EXPECT_EQ(mask_from_json(mask_to_json(m)), m);
}

TEST(FeatureCsv, HeaderAndRows) {
    std::ostringstream out;
    write_feature_csv_header(out, SegmentKind::Fixation);
    FeatureMatrix m{SegmentKind::Fixation, fixation_feature_names(), Eigen::MatrixXd::Zero(1, 12)};
    m.rows(0, 0) = 250;
    write_feature_csv_rows(out, "S001", "1", m);
    EXPECT_EQ(out.str(),
              "subject,session,kind,duration_ms,std_x,std_y,path_length,angle_prev,dist_prev,skew_x,skew_y,kurt_x,"
              "kurt_y,dispersion,avg_velocity\nS001,1,FIXATION,250,0,0,0,0,0,0,0,0,0,0,0\n");
}
