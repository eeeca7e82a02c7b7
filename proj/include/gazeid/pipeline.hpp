#pragma once

// End-to-end glue: recording -> kinematics -> segments -> features, dataset
// loading, enrollment and scoring.

#include "gazeid/config.hpp"
#include "gazeid/error.hpp"
#include "gazeid/eval.hpp"
#include "gazeid/features.hpp"
#include "gazeid/gaze_data.hpp"
#include "gazeid/preprocess.hpp"
#include "gazeid/rbf.hpp"
#include "gazeid/segment.hpp"
#include "gazeid/selection.hpp"

#include "json.hpp"

#include <algorithm>
#include <filesystem>
#include <fstream>
#include <map>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

namespace gazeid {

struct RecordingAnalysis {
    KinematicTrace trace;
    SegmentList segments;
    RecordingFeatures features;
};

inline RecordingAnalysis analyze(const GazeRecording& rec, const PipelineConfig& cfg) {
    RecordingAnalysis a;
    a.trace = kinematics(rec, cfg.geometry, cfg.sg);
    a.segments = segment_trace(a.trace, cfg.ivt);
    a.segments.recording_id = rec.subject_id + "_" + rec.session_id;
    a.features = extract_features(a.segments, a.trace);
    return a;
}

/// Recording files (`*.csv` except `truth.csv`) in `dir`, sorted by name,
/// optionally restricted to one session id.
inline std::vector<std::filesystem::path> list_recordings(const std::filesystem::path& dir,
                                                          const std::optional<std::string>& session = {}) {
    if (!std::filesystem::is_directory(dir)) throw Error("not a directory: " + dir.string());
    std::vector<std::filesystem::path> out;
    for (const auto& entry : std::filesystem::directory_iterator(dir)) {
        if (!entry.is_regular_file() || entry.path().extension() != ".csv") continue;
        if (entry.path().filename() == "truth.csv") continue;
        if (session && ids_from_path(entry.path()).second != *session) continue;
        out.push_back(entry.path());
    }
    std::sort(out.begin(), out.end());
    return out;
}

inline std::vector<GazeRecording> load_recordings(const std::vector<std::filesystem::path>& paths,
                                                  const PipelineConfig& cfg) {
    std::vector<GazeRecording> recs;
    for (const auto& p : paths) {
        LoadOptions opts;
        opts.stimulus_kind = cfg.stimulus;
        recs.push_back(load_recording(p, cfg.geometry, opts));
    }
    return recs;
}

struct ChannelMasks {
    FeatureMask fixation;
    FeatureMask saccade;
};

inline nlohmann::ordered_json masks_to_json(const ChannelMasks& m) {
    nlohmann::ordered_json j;
    j["fixation"] = mask_to_json(m.fixation);
    j["saccade"] = mask_to_json(m.saccade);
    return j;
}

inline ChannelMasks masks_from_json(const nlohmann::ordered_json& j) {
    ChannelMasks m{mask_from_json(j.at("fixation")), mask_from_json(j.at("saccade"))};
    if (m.fixation.kind != SegmentKind::Fixation || m.saccade.kind != SegmentKind::Saccade) {
        throw InvalidConfig("mask file: channel kinds swapped");
    }
    return m;
}

inline ChannelMasks resolve_masks(const PipelineConfig& cfg) {
    if (cfg.mask == "all") return {full_mask(SegmentKind::Fixation, cfg.stimulus), full_mask(SegmentKind::Saccade, cfg.stimulus)};
    if (cfg.mask == "published") {
        return {published_mask(SegmentKind::Fixation, cfg.stimulus), published_mask(SegmentKind::Saccade, cfg.stimulus)};
    }
    std::ifstream in(cfg.mask);
    if (!in) throw Error("cannot open mask file " + cfg.mask);
    try {
        return masks_from_json(nlohmann::ordered_json::parse(in));
    } catch (const nlohmann::json::exception& e) {
        throw InvalidConfig("mask file " + cfg.mask + ": " + e.what());
    }
}

/// Features of every recording, pooled per subject. Subjects are sorted by id.
struct SubjectPool {
    std::vector<ClassSamples> fixations;
    std::vector<ClassSamples> saccades;
    std::size_t skipped = 0;
};

namespace detail {

inline Eigen::MatrixXd vstack(const Eigen::MatrixXd& a, const Eigen::MatrixXd& b) {
    if (a.rows() == 0) return b;
    if (b.rows() == 0) return a;
    Eigen::MatrixXd out(a.rows() + b.rows(), a.cols());
    out << a, b;
    return out;
}

} // namespace detail

inline SubjectPool pool_features(const std::vector<GazeRecording>& recs, const PipelineConfig& cfg) {
    std::map<std::string, std::pair<Eigen::MatrixXd, Eigen::MatrixXd>> by_subject;
    SubjectPool pool;
    for (const auto& rec : recs) {
        const auto a = analyze(rec, cfg);
        auto& [fix, sac] = by_subject[rec.subject_id];
        if (fix.cols() == 0) {
            fix.resize(0, static_cast<Eigen::Index>(kFixationFeatureCount));
            sac.resize(0, static_cast<Eigen::Index>(kSaccadeFeatureCount));
        }
        fix = detail::vstack(fix, a.features.fixations.rows);
        sac = detail::vstack(sac, a.features.saccades.rows);
        pool.skipped += a.features.skipped;
    }
    for (auto& [id, mats] : by_subject) {
        pool.fixations.push_back({id, std::move(mats.first)});
        pool.saccades.push_back({id, std::move(mats.second)});
    }
    return pool;
}

inline ChannelParams channel_params(const ModelConfig& m) {
    ChannelParams p;
    p.neurons.clusters = m.clusters;
    p.neurons.max_iter = m.max_iter;
    p.neurons.seed = m.seed;
    p.neurons.sigma_floor = m.sigma_floor;
    p.pinv_tolerance = m.pinv_tolerance;
    return p;
}

/// Enrolls every subject found in `pool` (both channels).
inline RbfModel train_model(const SubjectPool& pool, const PipelineConfig& cfg, const ChannelMasks& masks) {
    RbfModel m;
    for (const auto& c : pool.fixations) m.identities.push_back(c.id);
    if (m.identities.empty()) throw EmptyTrainingSet();
    const auto params = channel_params(cfg.model);
    m.fixation = train_channel(SegmentKind::Fixation, pool.fixations, masks.fixation, params);
    m.saccade = train_channel(SegmentKind::Saccade, pool.saccades, masks.saccade, params);
    m.fusion_lambda = cfg.model.lambda;
    m.seed = cfg.model.seed;
    return m;
}

inline RbfModel train_model(const std::vector<GazeRecording>& recs, const PipelineConfig& cfg) {
    return train_model(pool_features(recs, cfg), cfg, resolve_masks(cfg));
}

inline FusionScore score_recording(const RbfModel& model, const GazeRecording& rec, const PipelineConfig& cfg) {
    const auto a = analyze(rec, cfg);
    return score_probe(model, a.features.fixations.rows, a.features.saccades.rows);
}

/// One row per probe recording. Ground truth is filled when every probe's
/// subject is enrolled; otherwise IdentityMismatch is thrown when
/// `require_truth` is set.
inline ScoreMatrix score_recordings(const RbfModel& model, const std::vector<GazeRecording>& probes,
                                    const PipelineConfig& cfg, bool require_truth = true) {
    ScoreMatrix d;
    d.identity_ids = model.identities;
    d.scores.resize(static_cast<Eigen::Index>(probes.size()), static_cast<Eigen::Index>(model.class_count()));
    std::vector<std::size_t> truth;
    bool all_known = true;
    for (std::size_t p = 0; p < probes.size(); ++p) {
        const auto& rec = probes[p];
        d.probe_ids.push_back(rec.subject_id + "_" + rec.session_id);
        d.scores.row(static_cast<Eigen::Index>(p)) = score_recording(model, rec, cfg).fused.transpose();
        const auto it = std::find(model.identities.begin(), model.identities.end(), rec.subject_id);
        if (it == model.identities.end()) {
            all_known = false;
            if (require_truth) throw IdentityMismatch("probe subject " + rec.subject_id + " is not enrolled in the model");
        } else {
            truth.push_back(static_cast<std::size_t>(it - model.identities.begin()));
        }
    }
    if (all_known) d.truth = std::move(truth);
    return d;
}

/// Every enrolled identity must have at least one probe.
inline void check_identity_coverage(const ScoreMatrix& d) {
    if (!d.truth) throw IdentityMismatch("probes lack ground truth");
    std::vector<bool> seen(d.identities(), false);
    for (auto t : *d.truth) seen[t] = true;
    for (std::size_t c = 0; c < seen.size(); ++c) {
        if (!seen[c]) throw IdentityMismatch("enrolled subject " + d.identity_ids[c] + " has no probe recording");
    }
}

/// Feature selection for both channels on the pooled training features.
inline ChannelMasks select_features(const SubjectPool& pool, const PipelineConfig& cfg) {
    SelectionParams params;
    params.rounds = cfg.model.selection_rounds;
    params.neurons = channel_params(cfg.model).neurons;
    params.pinv_tolerance = cfg.model.pinv_tolerance;
    ChannelMasks m;
    m.fixation = backward_select(pool.fixations, fixation_feature_names(), SegmentKind::Fixation, params,
                                 derive_seed(cfg.model.seed, 1), cfg.stimulus)
                     .mask;
    m.saccade = backward_select(pool.saccades, saccade_feature_names(), SegmentKind::Saccade, params,
                                derive_seed(cfg.model.seed, 2), cfg.stimulus)
                    .mask;
    return m;
}

} // namespace gazeid
