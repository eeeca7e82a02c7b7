#pragma once

#include "gazeid/error.hpp"
#include "gazeid/random.hpp"

#include <Eigen/Dense>

#include <cstdint>
#include <limits>
#include <vector>

namespace gazeid {

struct KMeansResult {
    Eigen::MatrixXd centers;           // k x dim
    std::vector<Eigen::Index> assignment;
    /// Sum of squared distances after each assignment step.
    std::vector<double> distortion;
    int iterations = 0;
    bool converged = false;
};

namespace detail {

inline Eigen::Index nearest_center(const Eigen::MatrixXd& centers, const Eigen::RowVectorXd& p, double& best_d2) {
    Eigen::Index best = 0;
    best_d2 = std::numeric_limits<double>::infinity();
    for (Eigen::Index c = 0; c < centers.rows(); ++c) {
        const double d2 = (centers.row(c) - p).squaredNorm();
        if (d2 < best_d2) {
            best_d2 = d2;
            best = c;
        }
    }
    return best;
}

/// k-means++ seeding. Falls back to the first unused point when every
/// remaining point coincides with a chosen center.
inline Eigen::MatrixXd seed_centers(const Eigen::MatrixXd& points, Eigen::Index k, Rng& rng) {
    const Eigen::Index n = points.rows();
    Eigen::MatrixXd centers(k, points.cols());
    std::vector<bool> used(static_cast<std::size_t>(n), false);
    const auto first = static_cast<Eigen::Index>(uniform_index(rng, static_cast<std::uint64_t>(n)));
    centers.row(0) = points.row(first);
    used[static_cast<std::size_t>(first)] = true;
    std::vector<double> d2(static_cast<std::size_t>(n));
    for (Eigen::Index i = 0; i < n; ++i) d2[static_cast<std::size_t>(i)] = (points.row(i) - centers.row(0)).squaredNorm();
    for (Eigen::Index c = 1; c < k; ++c) {
        double total = 0.0;
        for (Eigen::Index i = 0; i < n; ++i) {
            if (!used[static_cast<std::size_t>(i)]) total += d2[static_cast<std::size_t>(i)];
        }
        Eigen::Index pick = -1;
        if (total > 0.0) {
            double target = uniform01(rng) * total;
            for (Eigen::Index i = 0; i < n; ++i) {
                if (used[static_cast<std::size_t>(i)]) continue;
                const double w = d2[static_cast<std::size_t>(i)];
                if (w > 0.0) pick = i;
                if (target < w) break;
                target -= w;
            }
        }
        if (pick < 0) {
            for (Eigen::Index i = 0; i < n && pick < 0; ++i) {
                if (!used[static_cast<std::size_t>(i)]) pick = i;
            }
        }
        used[static_cast<std::size_t>(pick)] = true;
        centers.row(c) = points.row(pick);
        for (Eigen::Index i = 0; i < n; ++i) {
            auto& d = d2[static_cast<std::size_t>(i)];
            d = std::min(d, (points.row(i) - centers.row(c)).squaredNorm());
        }
    }
    return centers;
}

} // namespace detail

/**
 * Lloyd's k-means with squared Euclidean distance and k-means++ seeding.
 *
 * Stops when an assignment step changes nothing or after `max_iter`
 * assignment steps. A cluster left empty by the update step is re-seeded
 * with the point farthest from its current center (taken from a cluster
 * with more than one member). Deterministic for a given seed.
 */
inline KMeansResult kmeans(const Eigen::MatrixXd& points, Eigen::Index k, int max_iter, std::uint64_t seed) {
    const Eigen::Index n = points.rows();
    if (k <= 0 || n < k) throw TooFewPoints(static_cast<std::size_t>(n), static_cast<std::size_t>(std::max<Eigen::Index>(k, 1)));
    Rng rng(seed);
    KMeansResult res;
    res.centers = detail::seed_centers(points, k, rng);
    res.assignment.assign(static_cast<std::size_t>(n), -1);
    std::vector<double> dist2(static_cast<std::size_t>(n));

    for (int it = 0; it < max_iter; ++it) {
        bool changed = false;
        double distortion = 0.0;
        for (Eigen::Index i = 0; i < n; ++i) {
            double d2 = 0.0;
            const auto c = detail::nearest_center(res.centers, points.row(i), d2);
            auto& a = res.assignment[static_cast<std::size_t>(i)];
            if (a != c) {
                a = c;
                changed = true;
            }
            dist2[static_cast<std::size_t>(i)] = d2;
            distortion += d2;
        }
        res.distortion.push_back(distortion);
        res.iterations = it + 1;
        if (!changed) {
            res.converged = true;
            break;
        }

        Eigen::MatrixXd sums = Eigen::MatrixXd::Zero(k, points.cols());
        std::vector<Eigen::Index> counts(static_cast<std::size_t>(k), 0);
        for (Eigen::Index i = 0; i < n; ++i) {
            const auto c = res.assignment[static_cast<std::size_t>(i)];
            sums.row(c) += points.row(i);
            ++counts[static_cast<std::size_t>(c)];
        }
        for (Eigen::Index c = 0; c < k; ++c) {
            if (counts[static_cast<std::size_t>(c)] > 0) {
                res.centers.row(c) = sums.row(c) / static_cast<double>(counts[static_cast<std::size_t>(c)]);
            }
        }
        for (Eigen::Index c = 0; c < k; ++c) {
            if (counts[static_cast<std::size_t>(c)] > 0) continue;
            Eigen::Index far = -1;
            for (Eigen::Index i = 0; i < n; ++i) {
                const auto owner = res.assignment[static_cast<std::size_t>(i)];
                if (counts[static_cast<std::size_t>(owner)] < 2) continue;
                if (far < 0 || dist2[static_cast<std::size_t>(i)] > dist2[static_cast<std::size_t>(far)]) far = i;
            }
            if (far < 0) break;
            --counts[static_cast<std::size_t>(res.assignment[static_cast<std::size_t>(far)])];
            res.assignment[static_cast<std::size_t>(far)] = c;
            counts[static_cast<std::size_t>(c)] = 1;
            dist2[static_cast<std::size_t>(far)] = 0.0;
            res.centers.row(c) = points.row(far);
        }
    }
    if (!res.converged) {
        // Out of iterations: the last update moved the centers, so reassign.
        for (Eigen::Index i = 0; i < n; ++i) {
            double d2 = 0.0;
            res.assignment[static_cast<std::size_t>(i)] = detail::nearest_center(res.centers, points.row(i), d2);
        }
    }
    return res;
}

} // namespace gazeid
