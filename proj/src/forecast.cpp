#include "flowcast/forecast.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <string>
#include <unordered_map>

namespace flowcast {

namespace {

TransitionLibrary build_library_impl(const PointCloud& cloud, int horizon,
                                     std::span<const int> labels_by_source) {
    if (horizon < 1) throw InvalidParameterError("build_library: horizon must be >= 1");

    TransitionLibrary lib;
    lib.dim = cloud.k;
    lib.horizon = horizon;

    // Successor lookup by source index; gaps in the cloud simply produce no
    // entry for the straddling points.
    std::unordered_map<long, std::size_t> by_source;
    by_source.reserve(cloud.size());
    for (std::size_t i = 0; i < cloud.size(); ++i) by_source.emplace(cloud.source_index(i), i);

    for (std::size_t i = 0; i < cloud.size(); ++i) {
        const long succ_source = cloud.source_index(i) + horizon;
        const auto it = by_source.find(succ_source);
        if (it == by_source.end()) continue;
        const auto base = cloud.point(i);
        const auto succ = cloud.point(it->second);
        for (int d = 0; d < cloud.k; ++d) {
            lib.points.push_back(base[static_cast<std::size_t>(d)]);
            lib.displacements.push_back(succ[static_cast<std::size_t>(d)] -
                                        base[static_cast<std::size_t>(d)]);
        }
        lib.source.push_back(cloud.source_index(i));
        if (!labels_by_source.empty()) {
            const auto s = static_cast<std::size_t>(cloud.source_index(i));
            if (s >= labels_by_source.size())
                throw InvalidParameterError("build_library: label table shorter than sources");
            lib.regime_labels.push_back(labels_by_source[s]);
        }
    }

    if (lib.size() < 2)
        throw InsufficientDataError("build_library: fewer than 2 usable transition pairs at "
                                    "horizon " +
                                    std::to_string(horizon));

    lib.index = KdTree(lib.points, static_cast<std::size_t>(lib.dim));

    // Calibrate the extrapolation radius from the library's own
    // nearest-neighbour distances.
    std::vector<double> nn(lib.size());
    for (std::size_t i = 0; i < lib.size(); ++i) {
        const auto hits = lib.index.query(lib.point(i), 2);
        nn[i] = hits[0].index == i ? hits[1].distance : hits[0].distance;
    }
    std::sort(nn.begin(), nn.end());
    const std::size_t p95 = std::min(nn.size() - 1, static_cast<std::size_t>(0.95 * nn.size()));
    lib.extrapolation_radius = 3.0 * nn[p95];
    return lib;
}

} // namespace

TransitionLibrary build_library(const PointCloud& cloud, int horizon) {
    return build_library_impl(cloud, horizon, {});
}

TransitionLibrary build_library(const PointCloud& cloud, int horizon,
                                std::span<const int> labels_by_source) {
    return build_library_impl(cloud, horizon, labels_by_source);
}

NeighborQueryResult query_knn(const TransitionLibrary& lib, std::span<const double> q,
                              std::size_t kn) {
    if (kn < 1) throw InvalidParameterError("query_knn: kn must be >= 1");
    if (lib.size() == 0) throw InsufficientDataError("query_knn: empty library");
    if (q.size() != static_cast<std::size_t>(lib.dim))
        throw InvalidParameterError("query_knn: query dimension mismatch");

    NeighborQueryResult res;
    res.truncated = kn > lib.size();
    const auto hits = lib.index.query(q, kn);
    res.indices.reserve(hits.size());
    res.distances.reserve(hits.size());
    for (const auto& h : hits) {
        res.indices.push_back(h.index);
        res.distances.push_back(h.distance);
    }
    return res;
}

namespace {

// Shared displacement-vote kernel: exp(-d/dbar) weights over `members`
// (positions into neighbours), normalized.
Prediction vote(const TransitionLibrary& lib, std::span<const double> q,
                const NeighborQueryResult& nb, const std::vector<std::size_t>& member_pos) {
    const auto dim = static_cast<std::size_t>(lib.dim);
    double dbar = 0.0;
    for (std::size_t p : member_pos) dbar += nb.distances[p];
    dbar /= static_cast<double>(member_pos.size());

    std::vector<double> w(member_pos.size(), 1.0);
    if (dbar > 0.0)
        for (std::size_t i = 0; i < member_pos.size(); ++i)
            w[i] = std::exp(-nb.distances[member_pos[i]] / dbar);
    const double wsum = std::accumulate(w.begin(), w.end(), 0.0);

    Prediction pred;
    pred.mean.assign(dim, 0.0);
    pred.spread.assign(dim, 0.0);
    pred.members.reserve(member_pos.size());
    for (std::size_t i = 0; i < member_pos.size(); ++i) {
        w[i] /= wsum;
        const std::size_t lib_idx = nb.indices[member_pos[i]];
        pred.members.push_back(lib_idx);
        const auto disp = lib.displacement(lib_idx);
        for (std::size_t d = 0; d < dim; ++d) pred.mean[d] += w[i] * (q[d] + disp[d]);
    }
    for (std::size_t i = 0; i < member_pos.size(); ++i) {
        const auto disp = lib.displacement(nb.indices[member_pos[i]]);
        for (std::size_t d = 0; d < dim; ++d) {
            const double dev = q[d] + disp[d] - pred.mean[d];
            pred.spread[d] += w[i] * dev * dev;
        }
    }
    for (std::size_t d = 0; d < dim; ++d) pred.spread[d] = std::sqrt(pred.spread[d]);
    return pred;
}

} // namespace

Prediction predict_next(const TransitionLibrary& lib, std::span<const double> q, std::size_t kn) {
    const NeighborQueryResult nb = query_knn(lib, q, kn);
    std::vector<std::size_t> all(nb.indices.size());
    std::iota(all.begin(), all.end(), std::size_t{0});
    Prediction pred = vote(lib, q, nb, all);
    pred.weight = 1.0;
    pred.extrapolated = nb.distances[0] > lib.extrapolation_radius;
    return pred;
}

namespace {

// Connected components of the "close displacement" graph: a link survives
// when the pairwise displacement distance is at most gap_factor times the
// median nearest-displacement distance (single linkage with a gap cut).
std::vector<std::vector<std::size_t>> cluster_displacements(const TransitionLibrary& lib,
                                                            const NeighborQueryResult& nb,
                                                            double gap_factor) {
    const std::size_t m = nb.indices.size();
    if (m == 1) return {{0}};

    std::vector<double> pair_d2(m * m, 0.0);
    for (std::size_t a = 0; a < m; ++a)
        for (std::size_t b = a + 1; b < m; ++b) {
            const double d2 = squared_distance(lib.displacement(nb.indices[a]),
                                               lib.displacement(nb.indices[b]));
            pair_d2[a * m + b] = d2;
            pair_d2[b * m + a] = d2;
        }

    std::vector<double> nearest(m);
    for (std::size_t a = 0; a < m; ++a) {
        double best = std::numeric_limits<double>::infinity();
        for (std::size_t b = 0; b < m; ++b)
            if (b != a) best = std::min(best, pair_d2[a * m + b]);
        nearest[a] = std::sqrt(best);
    }
    std::vector<double> sorted_nearest = nearest;
    std::sort(sorted_nearest.begin(), sorted_nearest.end());
    const double median = m % 2 == 1
                              ? sorted_nearest[m / 2]
                              : 0.5 * (sorted_nearest[m / 2 - 1] + sorted_nearest[m / 2]);
    const double cut = gap_factor * median;

    // Union by flood fill over surviving links.
    std::vector<int> comp(m, -1);
    int n_comp = 0;
    std::vector<std::size_t> stack;
    for (std::size_t seed = 0; seed < m; ++seed) {
        if (comp[seed] >= 0) continue;
        comp[seed] = n_comp;
        stack.assign(1, seed);
        while (!stack.empty()) {
            const std::size_t a = stack.back();
            stack.pop_back();
            for (std::size_t b = 0; b < m; ++b) {
                if (comp[b] >= 0 || b == a) continue;
                if (std::sqrt(pair_d2[a * m + b]) <= cut) {
                    comp[b] = n_comp;
                    stack.push_back(b);
                }
            }
        }
        ++n_comp;
    }

    std::vector<std::vector<std::size_t>> groups(static_cast<std::size_t>(n_comp));
    for (std::size_t a = 0; a < m; ++a) groups[static_cast<std::size_t>(comp[a])].push_back(a);
    return groups;
}

} // namespace

PredictionSet predict_multi(const TransitionLibrary& lib, std::span<const double> q,
                            std::size_t kn, double gap_factor, MultiSplit split) {
    if (!(gap_factor > 1.0)) throw InvalidParameterError("predict_multi: gap_factor must be > 1");
    if (split == MultiSplit::label && !lib.labelled())
        throw InvalidParameterError("predict_multi: label split needs a labelled library");

    const NeighborQueryResult nb = query_knn(lib, q, kn);
    const std::size_t m = nb.indices.size();

    // Global neighbour weights decide how much mass each mode carries.
    double dbar = std::accumulate(nb.distances.begin(), nb.distances.end(), 0.0) /
                  static_cast<double>(m);
    std::vector<double> w(m, 1.0);
    if (dbar > 0.0)
        for (std::size_t i = 0; i < m; ++i) w[i] = std::exp(-nb.distances[i] / dbar);
    const double wsum = std::accumulate(w.begin(), w.end(), 0.0);

    std::vector<std::vector<std::size_t>> groups;
    std::vector<int> group_labels;
    if (split == MultiSplit::cluster) {
        groups = cluster_displacements(lib, nb, gap_factor);
    } else {
        std::map<int, std::vector<std::size_t>> by_label;
        for (std::size_t i = 0; i < m; ++i)
            by_label[lib.regime_labels[nb.indices[i]]].push_back(i);
        for (auto& [label, members] : by_label) {
            groups.push_back(std::move(members));
            group_labels.push_back(label);
        }
    }

    const bool extrapolated = nb.distances[0] > lib.extrapolation_radius;
    PredictionSet set;
    set.modes.reserve(groups.size());
    double mode_weight_sum = 0.0;
    for (std::size_t g = 0; g < groups.size(); ++g) {
        Prediction mode = vote(lib, q, nb, groups[g]);
        mode.weight = 0.0;
        for (std::size_t p : groups[g]) mode.weight += w[p] / wsum;
        mode.regime = group_labels.empty() ? -1 : group_labels[g];
        mode.extrapolated = extrapolated;
        mode_weight_sum += mode.weight;
        set.modes.push_back(std::move(mode));
    }
    for (auto& mode : set.modes) mode.weight /= mode_weight_sum;

    std::stable_sort(set.modes.begin(), set.modes.end(),
                     [](const Prediction& a, const Prediction& b) {
                         if (a.weight != b.weight) return a.weight > b.weight;
                         return *std::min_element(a.members.begin(), a.members.end()) <
                                *std::min_element(b.members.begin(), b.members.end());
                     });
    return set;
}

CorrectionResult correction_vector(const PredictionSet& pred, std::span<const double> actual) {
    if (pred.modes.empty()) throw InvalidInputError("correction_vector: empty prediction set");

    CorrectionResult res;
    double best = std::numeric_limits<double>::infinity();
    for (std::size_t i = 0; i < pred.modes.size(); ++i) {
        const double d2 = squared_distance(pred.modes[i].mean, actual);
        if (d2 < best) {
            best = d2;
            res.mode = i;
        }
    }
    const auto& mean = pred.modes[res.mode].mean;
    res.residual.resize(actual.size());
    for (std::size_t d = 0; d < actual.size(); ++d) res.residual[d] = actual[d] - mean[d];
    return res;
}

RegimeTrackerState track_regimes(RegimeTrackerState state, int fulfilled_regime) {
    if (!(state.decay > 0.0 && state.decay < 1.0))
        throw InvalidParameterError("track_regimes: decay must be in (0,1)");
    state.credits.try_emplace(fulfilled_regime, 0.0);
    for (auto& [regime, credit] : state.credits) {
        const double hit = regime == fulfilled_regime ? 1.0 : 0.0;
        credit = (1.0 - state.decay) * credit + state.decay * hit;
    }
    return state;
}

int current_regime(const RegimeTrackerState& state) {
    int best = -1;
    double best_credit = -1.0;
    for (const auto& [regime, credit] : state.credits) {
        if (credit > best_credit) {
            best_credit = credit;
            best = regime;
        }
    }
    return best;
}

} // namespace flowcast
