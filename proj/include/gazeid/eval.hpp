#pragma once

// Identification metrics over a probe x identity score matrix: EER and the
// DET curve, rank-n / CMC, one-to-one matching and per-probe normalization.

#include "gazeid/error.hpp"
#include "gazeid/gaze_data.hpp"

#include "json.hpp"

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <limits>
#include <optional>
#include <ostream>
#include <span>
#include <string>
#include <utility>
#include <vector>

namespace gazeid {

struct ScoreMatrix {
    Eigen::MatrixXd scores;  // probes x identities
    std::vector<std::string> probe_ids;
    std::vector<std::string> identity_ids;
    /// Column index of each probe's true identity, when known.
    std::optional<std::vector<std::size_t>> truth;

    [[nodiscard]] std::size_t probes() const { return static_cast<std::size_t>(scores.rows()); }
    [[nodiscard]] std::size_t identities() const { return static_cast<std::size_t>(scores.cols()); }
};

struct DetPoint {
    double far = 0.0;
    double frr = 0.0;
    double threshold = 0.0;
};

struct EerResult {
    double eer = 0.0;
    double threshold = 0.0;
    std::vector<DetPoint> det;
};

/**
 * Equal error rate by threshold sweep. A score is accepted when it is at
 * least the threshold, so FAR(t) = #impostor >= t / n_imp and
 * FRR(t) = #genuine < t / n_gen. Thresholds are the distinct observed scores
 * followed by +inf (FAR 0, FRR 1). FAR - FRR falls strictly from threshold
 * to threshold; the EER is taken where it reaches zero, linearly
 * interpolated between the two thresholds that bracket the sign change.
 */
inline EerResult compute_eer(std::span<const double> genuine, std::span<const double> impostor) {
    if (genuine.empty() || impostor.empty()) throw EmptyScoreList();
    std::vector<double> g(genuine.begin(), genuine.end());
    std::vector<double> im(impostor.begin(), impostor.end());
    for (double v : g) if (!std::isfinite(v)) throw NumericalFailure("non-finite genuine score");
    for (double v : im) if (!std::isfinite(v)) throw NumericalFailure("non-finite impostor score");
    std::sort(g.begin(), g.end());
    std::sort(im.begin(), im.end());
    std::vector<double> thresholds;
    thresholds.reserve(g.size() + im.size());
    std::merge(g.begin(), g.end(), im.begin(), im.end(), std::back_inserter(thresholds));
    thresholds.erase(std::unique(thresholds.begin(), thresholds.end()), thresholds.end());

    const auto ng = static_cast<double>(g.size());
    const auto ni = static_cast<double>(im.size());
    EerResult res;
    res.det.reserve(thresholds.size() + 1);
    std::size_t gi = 0;  // genuine scores below the threshold
    std::size_t ii = 0;  // impostor scores below the threshold
    for (double t : thresholds) {
        while (gi < g.size() && g[gi] < t) ++gi;
        while (ii < im.size() && im[ii] < t) ++ii;
        res.det.push_back({static_cast<double>(im.size() - ii) / ni, static_cast<double>(gi) / ng, t});
    }
    res.det.push_back({0.0, 1.0, std::numeric_limits<double>::infinity()});

    for (std::size_t k = 0; k < res.det.size(); ++k) {
        const double d = res.det[k].far - res.det[k].frr;
        if (d > 0) continue;
        if (d == 0 || k == 0) {
            res.eer = res.det[k].far;
            res.threshold = res.det[k].threshold;
        } else {
            const auto& lo = res.det[k - 1];
            const auto& hi = res.det[k];
            const double d_lo = lo.far - lo.frr;
            const double alpha = d_lo / (d_lo - d);
            res.eer = lo.far + alpha * (hi.far - lo.far);
            res.threshold = std::isfinite(hi.threshold) ? lo.threshold + alpha * (hi.threshold - lo.threshold) : lo.threshold;
        }
        break;
    }
    return res;
}

/// Genuine = each probe's score for its true identity; impostor = its
/// scores for every other identity.
inline std::pair<std::vector<double>, std::vector<double>> split_scores(const ScoreMatrix& d) {
    if (!d.truth) throw MissingGroundTruth();
    std::vector<double> genuine, impostor;
    for (std::size_t p = 0; p < d.probes(); ++p) {
        for (std::size_t c = 0; c < d.identities(); ++c) {
            const double s = d.scores(static_cast<Eigen::Index>(p), static_cast<Eigen::Index>(c));
            ((*d.truth)[p] == c ? genuine : impostor).push_back(s);
        }
    }
    return {std::move(genuine), std::move(impostor)};
}

/// 1-based rank of `column` in row `row`; equal scores rank the lower
/// column index first.
inline std::size_t rank_of(const Eigen::MatrixXd& scores, Eigen::Index row, Eigen::Index column) {
    const double s = scores(row, column);
    std::size_t rank = 1;
    for (Eigen::Index c = 0; c < scores.cols(); ++c) {
        const double v = scores(row, c);
        if (v > s || (v == s && c < column)) ++rank;
    }
    return rank;
}

/// rank-k accuracy for k = 1..identities.
inline std::vector<double> compute_cmc(const ScoreMatrix& d) {
    if (!d.truth) throw MissingGroundTruth();
    std::vector<double> cmc(d.identities(), 0.0);
    if (d.probes() == 0) return cmc;
    std::vector<std::size_t> hits(d.identities() + 1, 0);
    for (std::size_t p = 0; p < d.probes(); ++p) {
        ++hits[rank_of(d.scores, static_cast<Eigen::Index>(p), static_cast<Eigen::Index>((*d.truth)[p]))];
    }
    std::size_t cumulative = 0;
    for (std::size_t k = 1; k <= d.identities(); ++k) {
        cumulative += hits[k];
        cmc[k - 1] = static_cast<double>(cumulative) / static_cast<double>(d.probes());
    }
    return cmc;
}

struct MatchPair {
    std::size_t probe = 0;
    std::size_t identity = 0;
    bool operator==(const MatchPair&) const = default;
};

/// Greedy one-to-one assignment: take the global maximum, pair its row and
/// column, strike both, repeat. Ties go to the first entry in row-major
/// order. Pairs are returned in the order they were taken.
inline std::vector<MatchPair> one_to_one_match(const Eigen::MatrixXd& scores) {
    if (scores.rows() != scores.cols()) throw NonSquareMatrix(static_cast<std::size_t>(scores.rows()), static_cast<std::size_t>(scores.cols()));
    const Eigen::Index n = scores.rows();
    std::vector<bool> row_used(static_cast<std::size_t>(n), false), col_used(static_cast<std::size_t>(n), false);
    std::vector<MatchPair> pairs;
    for (Eigen::Index step = 0; step < n; ++step) {
        Eigen::Index br = -1, bc = -1;
        for (Eigen::Index r = 0; r < n; ++r) {
            if (row_used[static_cast<std::size_t>(r)]) continue;
            for (Eigen::Index c = 0; c < n; ++c) {
                if (col_used[static_cast<std::size_t>(c)]) continue;
                if (br < 0 || scores(r, c) > scores(br, bc)) {
                    br = r;
                    bc = c;
                }
            }
        }
        row_used[static_cast<std::size_t>(br)] = true;
        col_used[static_cast<std::size_t>(bc)] = true;
        pairs.push_back({static_cast<std::size_t>(br), static_cast<std::size_t>(bc)});
    }
    return pairs;
}

/// Per-probe min-max scaling of each row to [0, 1]; constant rows become 0.
inline Eigen::MatrixXd normalize_scores(const Eigen::MatrixXd& scores) {
    Eigen::MatrixXd out(scores.rows(), scores.cols());
    for (Eigen::Index r = 0; r < scores.rows(); ++r) {
        const double lo = scores.row(r).minCoeff();
        const double hi = scores.row(r).maxCoeff();
        if (hi > lo) out.row(r) = (scores.row(r).array() - lo) / (hi - lo);
        else out.row(r).setZero();
    }
    return out;
}

inline ScoreMatrix normalize_scores(const ScoreMatrix& d) {
    ScoreMatrix out = d;
    out.scores = normalize_scores(d.scores);
    return out;
}

/// Fraction of probes whose top-scored identity is the true one.
inline double rank1(const ScoreMatrix& d) {
    const auto cmc = compute_cmc(d);
    return cmc.empty() ? 0.0 : cmc.front();
}

inline double matching_accuracy(const std::vector<MatchPair>& pairs, const std::vector<std::size_t>& truth) {
    if (pairs.empty()) return 0.0;
    std::size_t correct = 0;
    for (const auto& p : pairs) correct += truth[p.probe] == p.identity ? 1 : 0;
    return static_cast<double>(correct) / static_cast<double>(pairs.size());
}

struct MetricReport {
    double eer = 0.0;
    double eer_threshold = 0.0;
    double r1 = 0.0;
    std::vector<double> cmc;
    std::vector<DetPoint> det;
    /// Rank-1 accuracy after one-to-one matching, when requested.
    std::optional<double> r1_one_to_one;
    std::size_t probes = 0;
    std::size_t identities = 0;
};

inline MetricReport evaluate_scores(const ScoreMatrix& d, bool one_to_one = false) {
    if (!d.truth) throw MissingGroundTruth();
    MetricReport rep;
    rep.probes = d.probes();
    rep.identities = d.identities();
    const auto [genuine, impostor] = split_scores(d);
    const auto eer = compute_eer(genuine, impostor);
    rep.eer = eer.eer;
    rep.eer_threshold = eer.threshold;
    rep.det = eer.det;
    rep.cmc = compute_cmc(d);
    rep.r1 = rep.cmc.empty() ? 0.0 : rep.cmc.front();
    if (one_to_one) rep.r1_one_to_one = matching_accuracy(one_to_one_match(normalize_scores(d.scores)), *d.truth);
    return rep;
}

inline nlohmann::ordered_json report_to_json(const MetricReport& r) {
    nlohmann::ordered_json j;
    j["probes"] = r.probes;
    j["identities"] = r.identities;
    j["eer"] = r.eer;
    j["eer_threshold"] = r.eer_threshold;
    j["r1"] = r.r1;
    if (r.r1_one_to_one) j["r1_one_to_one"] = *r.r1_one_to_one;
    j["cmc"] = r.cmc;
    nlohmann::ordered_json det = nlohmann::ordered_json::array();
    for (const auto& p : r.det) det.push_back({p.far, p.frr});
    j["det"] = std::move(det);
    return j;
}

inline void write_det_csv(std::ostream& out, const std::vector<DetPoint>& det) {
    out << "far,frr\n";
    for (const auto& p : det) out << detail::format_double(p.far) << ',' << detail::format_double(p.frr) << '\n';
}

inline void write_cmc_csv(std::ostream& out, const std::vector<double>& cmc) {
    out << "rank,accuracy\n";
    for (std::size_t k = 0; k < cmc.size(); ++k) out << k + 1 << ',' << detail::format_double(cmc[k]) << '\n';
}

} // namespace gazeid
