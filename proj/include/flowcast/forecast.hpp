#pragma once

#include <map>
#include <optional>
#include <span>
#include <vector>

#include "flowcast/embedding.hpp"
#include "flowcast/knn.hpp"

namespace flowcast {

// The learned flow field: every embedded point paired with the displacement
// to its successor `horizon` steps later. Immutable after build; concurrent
// read-only queries are safe.
struct TransitionLibrary {
    int dim = 0;
    int horizon = 1;
    std::vector<double> points;        // flat, dim doubles per entry
    std::vector<double> displacements; // flat, aligned with points
    std::vector<long> source;          // source index of each entry's base point
    std::vector<int> regime_labels;    // empty, or one label per entry
    KdTree index;
    // Queries whose nearest neighbour is farther than this are extrapolating
    // outside the sampled flow (3x the 95th percentile of within-library
    // nearest-neighbour distances).
    double extrapolation_radius = 0.0;

    std::size_t size() const noexcept { return source.size(); }
    std::span<const double> point(std::size_t i) const {
        return {points.data() + i * static_cast<std::size_t>(dim), static_cast<std::size_t>(dim)};
    }
    std::span<const double> displacement(std::size_t i) const {
        return {displacements.data() + i * static_cast<std::size_t>(dim),
                static_cast<std::size_t>(dim)};
    }
    bool labelled() const noexcept { return !regime_labels.empty(); }
};

// Pair each cloud point with its observed successor displacement. Points
// whose successor is missing (end of series, or a gap in source indices) are
// skipped. `labels_by_source`, when given, maps a source index to the regime
// label the entry inherits.
TransitionLibrary build_library(const PointCloud& cloud, int horizon);
TransitionLibrary build_library(const PointCloud& cloud, int horizon,
                                std::span<const int> labels_by_source);

struct NeighborQueryResult {
    std::vector<std::size_t> indices;
    std::vector<double> distances; // ascending, ties by lowest index
    bool truncated = false;        // kn exceeded the library size
};

// Exact nearest neighbours of q in the library (identical to an exhaustive
// scan). Asking for more neighbours than the library holds returns everything
// with the truncated flag set.
NeighborQueryResult query_knn(const TransitionLibrary& lib, std::span<const double> q,
                              std::size_t kn);

struct Prediction {
    std::vector<double> mean;
    std::vector<double> spread; // weighted per-dimension standard deviation
    double weight = 1.0;
    std::vector<std::size_t> members; // library indices of contributing neighbours
    int regime = -1;                  // label split only; -1 otherwise
    bool extrapolated = false;
};

struct PredictionSet {
    std::vector<Prediction> modes; // weight-descending; weights sum to 1
};

// Single-mode successor estimate: neighbours vote on the displacement with
// weights exp(-d_i / dbar), dbar the mean neighbour distance (all weights 1
// when dbar is 0).
Prediction predict_next(const TransitionLibrary& lib, std::span<const double> q, std::size_t kn);

enum class MultiSplit {
    cluster, // single-linkage over displacements, links cut at the median gap
    label    // group neighbours by their regime label
};

// Multi-modal successor estimate for regime-ambiguous queries: the neighbour
// set is partitioned and each part votes separately, weighted by the share of
// total neighbour weight it carries.
PredictionSet predict_multi(const TransitionLibrary& lib, std::span<const double> q,
                            std::size_t kn, double gap_factor = 3.0,
                            MultiSplit split = MultiSplit::cluster);

struct CorrectionResult {
    std::size_t mode = 0;
    std::vector<double> residual; // actual minus the chosen mode's mean
};

// Which mode did reality fulfil, and by how much was it off. Ties go to the
// lowest mode index.
CorrectionResult correction_vector(const PredictionSet& pred, std::span<const double> actual);

// Leaky evidence accumulator over fulfilled regimes. credit[r] decays toward
// 0 except for the fulfilled regime, which decays toward 1. Unknown regimes
// join at credit 0.
struct RegimeTrackerState {
    std::map<int, double> credits;
    double decay = 0.1;
};

RegimeTrackerState track_regimes(RegimeTrackerState state, int fulfilled_regime);

// Argmax credit, ties to the lowest regime id; -1 for an empty tracker.
int current_regime(const RegimeTrackerState& state);

} // namespace flowcast
