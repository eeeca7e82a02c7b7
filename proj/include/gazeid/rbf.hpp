#pragma once

// Gaussian RBF networks: per-class k-means prototypes, least-squares output
// weights, two-channel (fixation / saccade) score fusion and the model file.

#include "gazeid/error.hpp"
#include "gazeid/features.hpp"
#include "gazeid/kmeans.hpp"
#include "gazeid/random.hpp"

#include "json.hpp"

#include <Eigen/Dense>

#include <cmath>
#include <cstdint>
#include <string>
#include <vector>

namespace gazeid {

struct RbfNeuron {
    Eigen::VectorXd center;
    double beta = 1.0;
    std::size_t owner = 0;  // class index

    /// exp(-beta * ||x - center||^2)
    [[nodiscard]] double activation(const Eigen::Ref<const Eigen::VectorXd>& x) const {
        return std::exp(-beta * (x - center).squaredNorm());
    }
};

struct NeuronParams {
    Eigen::Index clusters = 32;
    int max_iter = 100;
    std::uint64_t seed = 0;
    /// Lower bound on the cluster radius, in normalized feature units.
    double sigma_floor = 1e-3;
};

/// Training samples of one class (one enrolled identity).
struct ClassSamples {
    std::string id;
    Eigen::MatrixXd rows;
};

/// beta = 1 / (2 sigma^2), sigma = mean distance of the members from the
/// centroid, floored at `sigma_floor`.
inline double beta_from_members(const Eigen::MatrixXd& members, const Eigen::VectorXd& centroid, double sigma_floor) {
    double sigma = 0.0;
    if (members.rows() > 0) {
        for (Eigen::Index i = 0; i < members.rows(); ++i) sigma += (members.row(i).transpose() - centroid).norm();
        sigma /= static_cast<double>(members.rows());
    }
    sigma = std::max(sigma, sigma_floor);
    return 1.0 / (2.0 * sigma * sigma);
}

/// Clusters every class separately into `clusters` prototypes. Neurons are
/// ordered by class, then by cluster index.
inline std::vector<RbfNeuron> build_neurons(const std::vector<ClassSamples>& classes, const NeuronParams& params,
                                            std::string_view channel = "segment", std::uint64_t channel_tag = 0) {
    std::vector<RbfNeuron> neurons;
    for (std::size_t cls = 0; cls < classes.size(); ++cls) {
        const auto& data = classes[cls].rows;
        if (data.rows() < params.clusters) {
            throw InsufficientEnrollmentData(classes[cls].id, std::string(channel), static_cast<std::size_t>(data.rows()),
                                             static_cast<std::size_t>(params.clusters));
        }
        const auto km = kmeans(data, params.clusters, params.max_iter, derive_seed(params.seed, cls, channel_tag));
        for (Eigen::Index c = 0; c < params.clusters; ++c) {
            std::vector<Eigen::Index> member_rows;
            for (Eigen::Index i = 0; i < data.rows(); ++i) {
                if (km.assignment[static_cast<std::size_t>(i)] == c) member_rows.push_back(i);
            }
            Eigen::MatrixXd members(static_cast<Eigen::Index>(member_rows.size()), data.cols());
            for (std::size_t m = 0; m < member_rows.size(); ++m) members.row(static_cast<Eigen::Index>(m)) = data.row(member_rows[m]);
            RbfNeuron nr;
            nr.center = km.centers.row(c).transpose();
            nr.beta = beta_from_members(members, nr.center, params.sigma_floor);
            nr.owner = cls;
            neurons.push_back(std::move(nr));
        }
    }
    return neurons;
}

/// Hidden-layer activations, one row per input row.
inline Eigen::MatrixXd activations(const std::vector<RbfNeuron>& neurons, const Eigen::MatrixXd& x) {
    Eigen::MatrixXd a(x.rows(), static_cast<Eigen::Index>(neurons.size()));
    for (Eigen::Index i = 0; i < x.rows(); ++i) {
        const Eigen::VectorXd row = x.row(i).transpose();
        for (std::size_t h = 0; h < neurons.size(); ++h) a(i, static_cast<Eigen::Index>(h)) = neurons[h].activation(row);
    }
    return a;
}

inline Eigen::MatrixXd one_hot(const std::vector<std::size_t>& labels, std::size_t classes) {
    Eigen::MatrixXd y = Eigen::MatrixXd::Zero(static_cast<Eigen::Index>(labels.size()), static_cast<Eigen::Index>(classes));
    for (std::size_t i = 0; i < labels.size(); ++i) y(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(labels[i])) = 1.0;
    return y;
}

/// Minimum-norm least-squares solution of A W = Y (the pseudoinverse
/// applied to Y). Pivots below `tolerance` times the largest are treated as
/// zero by the complete orthogonal decomposition.
inline Eigen::MatrixXd solve_weights(const Eigen::MatrixXd& a, const Eigen::MatrixXd& y, double tolerance = 1e-10) {
    if (a.rows() == 0) throw NumericalFailure("least-squares system has no rows");
    if (a.rows() != y.rows()) throw NumericalFailure("activation and label row counts differ");
    if (!a.allFinite() || !y.allFinite()) throw NumericalFailure("non-finite value in least-squares system");
    Eigen::CompleteOrthogonalDecomposition<Eigen::MatrixXd> cod;
    cod.setThreshold(tolerance);
    cod.compute(a);
    Eigen::MatrixXd w = cod.solve(y);
    if (!w.allFinite()) throw NumericalFailure("least-squares solution is not finite");
    return w;
}

struct RbfChannel {
    SegmentKind kind = SegmentKind::Fixation;
    FeatureMask mask;
    NormStats norm;  // over the full (unmasked) feature vector
    std::vector<RbfNeuron> neurons;
    Eigen::MatrixXd weights;  // hidden x classes

    /// Raw feature rows -> normalized, masked rows.
    [[nodiscard]] Eigen::MatrixXd prepare(const Eigen::MatrixXd& raw) const {
        return select_columns(apply_norm(raw, norm), mask_columns(feature_names(kind), mask));
    }
    /// Per-segment class scores (rows x classes) for raw feature rows.
    [[nodiscard]] Eigen::MatrixXd segment_scores(const Eigen::MatrixXd& raw) const {
        return activations(neurons, prepare(raw)) * weights;
    }
};

struct ChannelParams {
    NeuronParams neurons;
    double pinv_tolerance = 1e-10;
};

/// Trains one channel from raw per-class feature rows: z-score statistics
/// over all rows, mask, per-class prototypes, then output weights.
inline RbfChannel train_channel(SegmentKind kind, const std::vector<ClassSamples>& raw, const FeatureMask& mask,
                                const ChannelParams& params) {
    RbfChannel ch;
    ch.kind = kind;
    ch.mask = mask;
    Eigen::Index total = 0;
    for (const auto& c : raw) total += c.rows.rows();
    const auto width = static_cast<Eigen::Index>(feature_names(kind).size());
    Eigen::MatrixXd all(total, width);
    std::vector<std::size_t> labels;
    Eigen::Index r = 0;
    for (std::size_t cls = 0; cls < raw.size(); ++cls) {
        if (raw[cls].rows.cols() != width && raw[cls].rows.rows() > 0) throw Error("feature width mismatch");
        if (raw[cls].rows.rows() > 0) all.middleRows(r, raw[cls].rows.rows()) = raw[cls].rows;
        r += raw[cls].rows.rows();
        labels.insert(labels.end(), static_cast<std::size_t>(raw[cls].rows.rows()), cls);
    }
    if (total == 0) throw EmptyTrainingSet();
    ch.norm = fit_norm(all);
    const auto cols = mask_columns(feature_names(kind), mask);
    if (cols.empty()) throw Error("feature mask includes no feature");

    std::vector<ClassSamples> prepared;
    for (const auto& c : raw) prepared.push_back({c.id, c.rows.rows() ? ch.prepare(c.rows) : Eigen::MatrixXd(0, static_cast<Eigen::Index>(cols.size()))});
    ch.neurons = build_neurons(prepared, params.neurons, to_string(kind), kind == SegmentKind::Fixation ? 1 : 2);
    const Eigen::MatrixXd a = activations(ch.neurons, ch.prepare(all));
    ch.weights = solve_weights(a, one_hot(labels, raw.size()), params.pinv_tolerance);
    return ch;
}

struct FusionScore {
    Eigen::VectorXd fused;
    Eigen::VectorXd fixation;  // empty when the probe has no fixation
    Eigen::VectorXd saccade;   // empty when the probe has no saccade
};

struct RbfModel {
    static constexpr int kVersion = 1;
    std::vector<std::string> identities;
    RbfChannel fixation;
    RbfChannel saccade;
    double fusion_lambda = 0.5;
    std::uint64_t seed = 0;

    [[nodiscard]] std::size_t class_count() const { return identities.size(); }
};

/// Mean per-segment score of one channel; empty when there are no rows.
inline Eigen::VectorXd channel_score(const RbfChannel& ch, const Eigen::MatrixXd& raw) {
    if (raw.rows() == 0) return {};
    return ch.segment_scores(raw).colwise().mean().transpose();
}

/// lambda * mean fixation score + (1 - lambda) * mean saccade score. With
/// one channel empty the other gets weight 1.
inline FusionScore fuse(const Eigen::VectorXd& fixation, const Eigen::VectorXd& saccade, double lambda) {
    FusionScore s{{}, fixation, saccade};
    if (fixation.size() == 0 && saccade.size() == 0) throw EmptyProbe();
    if (fixation.size() == 0) s.fused = saccade;
    else if (saccade.size() == 0) s.fused = fixation;
    else s.fused = lambda * fixation + (1.0 - lambda) * saccade;
    return s;
}

inline FusionScore score_probe(const RbfModel& model, const Eigen::MatrixXd& fixation_rows,
                               const Eigen::MatrixXd& saccade_rows) {
    return fuse(channel_score(model.fixation, fixation_rows), channel_score(model.saccade, saccade_rows),
                model.fusion_lambda);
}

/// Index of the highest score; the lowest index wins ties.
inline std::size_t identify(const Eigen::VectorXd& scores) {
    if (scores.size() == 0) throw Error("cannot identify from an empty score vector");
    Eigen::Index best = 0;
    for (Eigen::Index i = 1; i < scores.size(); ++i) {
        if (scores(i) > scores(best)) best = i;
    }
    return static_cast<std::size_t>(best);
}

inline std::size_t identify(const FusionScore& score) { return identify(score.fused); }

// ---------------------------------------------------------------------------
// Model file. Field order is fixed so that identical models serialize to
// identical bytes.

namespace detail {

inline nlohmann::ordered_json vector_json(const std::vector<double>& v) { return nlohmann::ordered_json(v); }

inline nlohmann::ordered_json vector_json(const Eigen::VectorXd& v) {
    return nlohmann::ordered_json(std::vector<double>(v.data(), v.data() + v.size()));
}

inline Eigen::VectorXd vector_from_json(const nlohmann::ordered_json& j) {
    const auto v = j.get<std::vector<double>>();
    return Eigen::Map<const Eigen::VectorXd>(v.data(), static_cast<Eigen::Index>(v.size()));
}

inline nlohmann::ordered_json channel_to_json(const RbfChannel& ch) {
    nlohmann::ordered_json j;
    j["kind"] = to_string(ch.kind);
    j["mask"] = mask_to_json(ch.mask);
    j["norm"] = {{"mean", vector_json(ch.norm.mean)}, {"std", vector_json(ch.norm.std)}};
    nlohmann::ordered_json neurons = nlohmann::ordered_json::array();
    for (const auto& n : ch.neurons) {
        nlohmann::ordered_json nj;
        nj["owner"] = n.owner;
        nj["beta"] = n.beta;
        nj["center"] = vector_json(n.center);
        neurons.push_back(std::move(nj));
    }
    j["neurons"] = std::move(neurons);
    nlohmann::ordered_json rows = nlohmann::ordered_json::array();
    for (Eigen::Index r = 0; r < ch.weights.rows(); ++r) rows.push_back(vector_json(Eigen::VectorXd(ch.weights.row(r).transpose())));
    j["weights"] = {{"rows", ch.weights.rows()}, {"cols", ch.weights.cols()}, {"data", std::move(rows)}};
    return j;
}

inline RbfChannel channel_from_json(const nlohmann::ordered_json& j) {
    RbfChannel ch;
    ch.kind = parse_segment_kind(j.at("kind").get<std::string>());
    ch.mask = mask_from_json(j.at("mask"));
    ch.norm.mean = j.at("norm").at("mean").get<std::vector<double>>();
    ch.norm.std = j.at("norm").at("std").get<std::vector<double>>();
    if (ch.norm.mean.size() != feature_names(ch.kind).size() || ch.norm.std.size() != ch.norm.mean.size()) {
        throw Error("model file: normalization statistics have the wrong length");
    }
    for (const auto& nj : j.at("neurons")) {
        RbfNeuron n;
        n.owner = nj.at("owner").get<std::size_t>();
        n.beta = nj.at("beta").get<double>();
        n.center = vector_from_json(nj.at("center"));
        if (!(n.beta > 0)) throw Error("model file: neuron beta must be positive");
        ch.neurons.push_back(std::move(n));
    }
    const auto rows = j.at("weights").at("rows").get<Eigen::Index>();
    const auto cols = j.at("weights").at("cols").get<Eigen::Index>();
    ch.weights.resize(rows, cols);
    const auto& data = j.at("weights").at("data");
    if (static_cast<Eigen::Index>(data.size()) != rows) throw Error("model file: weight row count mismatch");
    for (Eigen::Index r = 0; r < rows; ++r) {
        const auto row = vector_from_json(data.at(static_cast<std::size_t>(r)));
        if (row.size() != cols) throw Error("model file: weight column count mismatch");
        ch.weights.row(r) = row.transpose();
    }
    if (static_cast<std::size_t>(rows) != ch.neurons.size()) throw Error("model file: weights do not match neurons");
    return ch;
}

} // namespace detail

inline nlohmann::ordered_json model_to_json(const RbfModel& m) {
    nlohmann::ordered_json j;
    j["format"] = "gazeid-rbf-model";
    j["version"] = RbfModel::kVersion;
    j["seed"] = m.seed;
    j["fusion_lambda"] = m.fusion_lambda;
    j["identities"] = m.identities;
    j["fixation"] = detail::channel_to_json(m.fixation);
    j["saccade"] = detail::channel_to_json(m.saccade);
    return j;
}

inline RbfModel model_from_json(const nlohmann::ordered_json& j) {
    if (j.at("format").get<std::string>() != "gazeid-rbf-model") throw Error("not a gazeid model file");
    if (j.at("version").get<int>() != RbfModel::kVersion) throw Error("unsupported model version");
    RbfModel m;
    m.seed = j.at("seed").get<std::uint64_t>();
    m.fusion_lambda = j.at("fusion_lambda").get<double>();
    if (!(m.fusion_lambda >= 0.0 && m.fusion_lambda <= 1.0)) throw Error("model file: fusion_lambda outside [0, 1]");
    m.identities = j.at("identities").get<std::vector<std::string>>();
    m.fixation = detail::channel_from_json(j.at("fixation"));
    m.saccade = detail::channel_from_json(j.at("saccade"));
    for (const auto* ch : {&m.fixation, &m.saccade}) {
        if (static_cast<std::size_t>(ch->weights.cols()) != m.identities.size()) throw Error("model file: class count mismatch");
    }
    return m;
}

inline std::string serialize_model(const RbfModel& m) { return model_to_json(m).dump(1) + "\n"; }

inline RbfModel parse_model(const std::string& text) {
    try {
        return model_from_json(nlohmann::ordered_json::parse(text));
    } catch (const nlohmann::json::exception& e) {
        throw Error(std::string("malformed model file: ") + e.what());
    }
}

} // namespace gazeid
