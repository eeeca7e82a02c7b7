#pragma once

#include "gazeid/error.hpp"
#include "gazeid/eval.hpp"
#include "gazeid/features.hpp"
#include "gazeid/random.hpp"
#include "gazeid/rbf.hpp"

#include <Eigen/Dense>

#include <algorithm>
#include <cstdint>
#include <limits>
#include <numeric>
#include <string>
#include <vector>

namespace gazeid {

struct SelectionParams {
    int rounds = 10;
    /// Prototypes per class; capped by the smallest class half in a round.
    NeuronParams neurons;
    double pinv_tolerance = 1e-10;
};

struct SelectionResult {
    FeatureMask mask;
    std::vector<std::vector<bool>> round_masks;
    std::vector<int> votes;  // rounds in which each feature was kept
};

namespace detail {

/// Held-out split of one selection round. Each class's rows are shuffled;
/// the first half (rounded up) trains, the rest scores.
struct SelectionSplit {
    std::vector<ClassSamples> fit;
    std::vector<ClassSamples> held_out;
};

inline Eigen::MatrixXd gather_rows(const Eigen::MatrixXd& m, std::span<const Eigen::Index> rows) {
    Eigen::MatrixXd out(static_cast<Eigen::Index>(rows.size()), m.cols());
    for (std::size_t i = 0; i < rows.size(); ++i) out.row(static_cast<Eigen::Index>(i)) = m.row(rows[i]);
    return out;
}

inline SelectionSplit split_half(const std::vector<ClassSamples>& data, Rng& rng) {
    SelectionSplit s;
    for (const auto& c : data) {
        std::vector<Eigen::Index> idx(static_cast<std::size_t>(c.rows.rows()));
        std::iota(idx.begin(), idx.end(), Eigen::Index{0});
        for (std::size_t i = idx.size(); i > 1; --i) std::swap(idx[i - 1], idx[uniform_index(rng, i)]);
        const std::size_t fit_n = (idx.size() + 1) / 2;
        s.fit.push_back({c.id, gather_rows(c.rows, std::span(idx).first(fit_n))});
        s.held_out.push_back({c.id, gather_rows(c.rows, std::span(idx).subspan(fit_n))});
    }
    return s;
}

/// Per-segment EER of an RBF network trained on `split.fit` restricted to
/// `include`, scored on `split.held_out`. +inf when nothing is included.
inline double subset_eer(const SelectionSplit& split, const std::vector<bool>& include, const SelectionParams& params,
                         std::uint64_t seed) {
    std::vector<Eigen::Index> cols;
    for (std::size_t i = 0; i < include.size(); ++i) {
        if (include[i]) cols.push_back(static_cast<Eigen::Index>(i));
    }
    if (cols.empty()) return std::numeric_limits<double>::infinity();

    Eigen::Index total = 0;
    Eigen::Index smallest = std::numeric_limits<Eigen::Index>::max();
    for (const auto& c : split.fit) {
        total += c.rows.rows();
        smallest = std::min(smallest, c.rows.rows());
    }
    Eigen::MatrixXd all(total, static_cast<Eigen::Index>(include.size()));
    std::vector<std::size_t> labels;
    Eigen::Index r = 0;
    for (std::size_t cls = 0; cls < split.fit.size(); ++cls) {
        all.middleRows(r, split.fit[cls].rows.rows()) = split.fit[cls].rows;
        r += split.fit[cls].rows.rows();
        labels.insert(labels.end(), static_cast<std::size_t>(split.fit[cls].rows.rows()), cls);
    }
    const auto norm = fit_norm(all);
    auto prepare = [&](const Eigen::MatrixXd& m) { return select_columns(apply_norm(m, norm), cols); };

    std::vector<ClassSamples> fit;
    for (const auto& c : split.fit) fit.push_back({c.id, prepare(c.rows)});
    NeuronParams np = params.neurons;
    np.clusters = std::max<Eigen::Index>(1, std::min(np.clusters, smallest));
    np.seed = seed;
    const auto neurons = build_neurons(fit, np);
    const auto w = solve_weights(activations(neurons, prepare(all)), one_hot(labels, fit.size()), params.pinv_tolerance);

    std::vector<double> genuine, impostor;
    for (std::size_t cls = 0; cls < split.held_out.size(); ++cls) {
        if (split.held_out[cls].rows.rows() == 0) continue;
        const Eigen::MatrixXd s = activations(neurons, prepare(split.held_out[cls].rows)) * w;
        for (Eigen::Index i = 0; i < s.rows(); ++i) {
            for (Eigen::Index c = 0; c < s.cols(); ++c) (static_cast<std::size_t>(c) == cls ? genuine : impostor).push_back(s(i, c));
        }
    }
    if (genuine.empty() || impostor.empty()) return std::numeric_limits<double>::infinity();
    return compute_eer(genuine, impostor).eer;
}

} // namespace detail

/**
 * Wrapper backward feature selection.
 *
 * Each round draws a class-stratified random half of the data for training
 * and scores the other half. Starting from all features, every feature in
 * turn is evaluated excluded and included (the rest of the current list
 * fixed) and the setting with the strictly lower EER is kept; ties exclude.
 * A feature ends up in the mask when it survives a majority of rounds; if no
 * feature does, the most-voted one is kept so the mask is never empty.
 *
 * `data` holds raw (unnormalized) rows per class with columns `names`.
 */
inline SelectionResult backward_select(const std::vector<ClassSamples>& data, const std::vector<std::string>& names,
                                       SegmentKind kind, const SelectionParams& params, std::uint64_t seed,
                                       StimulusKind stimulus = StimulusKind::Synth) {
    if (data.size() < 2) throw InsufficientSubjects(data.size());
    if (params.rounds < 1) throw InvalidConfig("selection needs at least one round");
    for (const auto& c : data) {
        if (c.rows.cols() != static_cast<Eigen::Index>(names.size())) throw Error("feature width mismatch");
        if (c.rows.rows() < 2) {
            throw InsufficientEnrollmentData(c.id, std::string(to_string(kind)), static_cast<std::size_t>(c.rows.rows()), 2);
        }
    }
    const std::size_t nf = names.size();
    SelectionResult res;
    res.votes.assign(nf, 0);
    for (int round = 0; round < params.rounds; ++round) {
        Rng rng(derive_seed(seed, static_cast<std::uint64_t>(round), 0x5E1EC7));
        const auto split = detail::split_half(data, rng);
        const std::uint64_t net_seed = derive_seed(seed, static_cast<std::uint64_t>(round), 0xC1A55);
        std::vector<bool> keep(nf, true);
        for (std::size_t i = 0; i < nf; ++i) {
            auto trial = keep;
            double best = std::numeric_limits<double>::infinity();
            for (bool include : {false, true}) {
                trial[i] = include;
                const double eer = detail::subset_eer(split, trial, params, net_seed);
                if (eer < best) {
                    keep[i] = include;
                    best = eer;
                }
            }
        }
        for (std::size_t i = 0; i < nf; ++i) res.votes[i] += keep[i] ? 1 : 0;
        res.round_masks.push_back(std::move(keep));
    }
    res.mask.kind = kind;
    res.mask.stimulus = stimulus;
    res.mask.names = names;
    for (std::size_t i = 0; i < nf; ++i) res.mask.include.push_back(2 * res.votes[i] > params.rounds);
    if (res.mask.included_count() == 0) {
        const auto best = std::max_element(res.votes.begin(), res.votes.end()) - res.votes.begin();
        res.mask.include[static_cast<std::size_t>(best)] = true;
    }
    return res;
}

} // namespace gazeid
