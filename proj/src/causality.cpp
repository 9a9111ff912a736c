#include "flowcast/causality.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <string>

#include "flowcast/knn.hpp"
#include "flowcast/random.hpp"

namespace flowcast {

namespace {

// Per-anchor rank structure of one cloud. rank[i*n + j] is the rank of point
// j among anchor i's candidates (1-based, renumbered after Theiler
// exclusion), 0 for excluded pairs. nbrs holds each anchor's k nearest
// candidates in rank order. Comparisons use squared distances with index
// tie-breaks, so the structure is invariant under any order-preserving
// rescaling of the cloud.
struct RankData {
    std::size_t n = 0;
    int k = 0;
    std::vector<int> rank;
    std::vector<std::size_t> m; // candidate count per anchor
    std::vector<std::size_t> nbrs;

    double mean_attainable_rank(std::size_t i) const {
        return 0.5 * (static_cast<double>(m[i]) + 1.0);
    }
};

RankData compute_ranks(const PointCloud& cloud, int k, int theiler_w) {
    const std::size_t n = cloud.size();
    RankData rd;
    rd.n = n;
    rd.k = k;
    rd.rank.assign(n * n, 0);
    rd.m.assign(n, 0);
    rd.nbrs.assign(n * static_cast<std::size_t>(k), 0);

    std::vector<std::pair<double, std::size_t>> order;
    order.reserve(n);
    for (std::size_t i = 0; i < n; ++i) {
        order.clear();
        const auto pi = cloud.point(i);
        for (std::size_t j = 0; j < n; ++j) {
            if (j == i) continue;
            const auto delta = static_cast<long>(i) - static_cast<long>(j);
            if (std::labs(delta) <= theiler_w) continue;
            order.emplace_back(squared_distance(pi, cloud.point(j)), j);
        }
        std::sort(order.begin(), order.end());
        rd.m[i] = order.size();
        for (std::size_t r = 0; r < order.size(); ++r)
            rd.rank[i * n + order[r].second] = static_cast<int>(r + 1);
        for (int r = 0; r < k; ++r)
            rd.nbrs[i * static_cast<std::size_t>(k) + static_cast<std::size_t>(r)] =
                order[static_cast<std::size_t>(r)].second;
    }
    return rd;
}

// L(A|B) for the pairing A_i <-> B_{(i+shift) mod n}: B's neighbours of the
// paired anchor are mapped back into A's index space and scored by A's ranks.
// shift = 0 is the real statistic; nonzero shifts are the surrogate null.
double l_given(const RankData& ra, const RankData& rb, long shift) {
    const std::size_t n = ra.n;
    const auto k = static_cast<std::size_t>(ra.k);
    const double min_mean_rank = 0.5 * (static_cast<double>(ra.k) + 1.0);

    double acc = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        const std::size_t b_anchor =
            static_cast<std::size_t>((static_cast<long>(i) + shift % static_cast<long>(n) +
                                      static_cast<long>(n)) %
                                     static_cast<long>(n));
        const double g_mean = ra.mean_attainable_rank(i);
        double rank_sum = 0.0;
        for (std::size_t r = 0; r < k; ++r) {
            const std::size_t j = rb.nbrs[b_anchor * k + r];
            const std::size_t j_mapped =
                static_cast<std::size_t>((static_cast<long>(j) - shift % static_cast<long>(n) +
                                          static_cast<long>(n)) %
                                         static_cast<long>(n));
            const int rank = ra.rank[i * n + j_mapped];
            // A mapped index can land inside anchor i's exclusion window (or
            // on i itself) only under a surrogate shift; score it neutrally.
            rank_sum += rank > 0 ? static_cast<double>(rank) : g_mean;
        }
        acc += (g_mean - rank_sum / static_cast<double>(k)) / (g_mean - min_mean_rank);
    }
    return acc / static_cast<double>(n);
}

void check_alignment(const PointCloud& X, const PointCloud& Y) {
    if (X.size() != Y.size())
        throw AlignmentError("l_index: clouds differ in point count");
    for (std::size_t i = 0; i < X.size(); ++i)
        if (X.source_index(i) != Y.source_index(i))
            throw AlignmentError("l_index: clouds have mismatched source indices");
}

} // namespace

LIndexResult l_index(const PointCloud& X, const PointCloud& Y, int k, int theiler_w) {
    check_alignment(X, Y);
    const std::size_t n = X.size();
    if (theiler_w < 0) throw InvalidParameterError("l_index: theiler_w must be >= 0");
    const long k_cap = static_cast<long>(n) - 2 - 2L * theiler_w;
    if (k < 1 || static_cast<long>(k) > k_cap)
        throw InvalidParameterError("l_index: k must be in [1, N-2-2w], got k=" +
                                    std::to_string(k) + " with N=" + std::to_string(n) +
                                    ", w=" + std::to_string(theiler_w));

    const RankData rx = compute_ranks(X, k, theiler_w);
    const RankData ry = compute_ranks(Y, k, theiler_w);

    LIndexResult res;
    res.k = k;
    res.n = n;
    res.l_xy = l_given(rx, ry, 0);
    res.l_yx = l_given(ry, rx, 0);
    return res;
}

namespace {

double pearson(const std::vector<double>& a, const std::vector<double>& b) {
    const auto n = static_cast<double>(a.size());
    double ma = 0.0, mb = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) {
        ma += a[i];
        mb += b[i];
    }
    ma /= n;
    mb /= n;
    double sab = 0.0, saa = 0.0, sbb = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) {
        sab += (a[i] - ma) * (b[i] - mb);
        saa += (a[i] - ma) * (a[i] - ma);
        sbb += (b[i] - mb) * (b[i] - mb);
    }
    if (saa == 0.0 || sbb == 0.0) return 0.0;
    return sab / std::sqrt(saa * sbb);
}

} // namespace

CCMCurve ccm_skill(const TimeSeries& target, const TimeSeries& source, const EmbeddingSpec& spec,
                   const std::vector<std::size_t>& library_sizes, std::size_t kn,
                   std::uint64_t seed) {
    target.validate();
    source.validate();
    spec.validate();
    if (target.values.size() != source.values.size())
        throw AlignmentError("ccm_skill: target and source series differ in length");
    if (library_sizes.empty()) throw InvalidParameterError("ccm_skill: no library sizes");
    if (kn == 0) kn = static_cast<std::size_t>(spec.k) + 1;

    const PointCloud cloud = delay_embed(source, spec);
    const std::size_t n = cloud.size();
    const auto dim = static_cast<std::size_t>(cloud.k);

    for (std::size_t i = 1; i < library_sizes.size(); ++i)
        if (library_sizes[i] <= library_sizes[i - 1])
            throw InvalidParameterError("ccm_skill: library sizes must be increasing");
    if (library_sizes.back() > n)
        throw InsufficientDataError("ccm_skill: max library size " +
                                    std::to_string(library_sizes.back()) + " exceeds the " +
                                    std::to_string(n) + " available manifold points");
    if (library_sizes.front() <= kn)
        throw InvalidParameterError("ccm_skill: library sizes must exceed kn");

    CCMCurve curve;
    curve.library_sizes = library_sizes;
    curve.direction = "target values estimated from the source manifold";

    std::vector<double> estimates(n), truths(n);
    for (std::size_t i = 0; i < n; ++i)
        truths[i] = target.values[static_cast<std::size_t>(cloud.source_index(i))];

    for (const std::size_t lib_size : library_sizes) {
        // Independent draw per size so adding sizes never perturbs others.
        Rng rng(derive_seed(seed, "ccm-library-" + std::to_string(lib_size)));
        std::vector<std::size_t> subset = rng.sample_indices(n, lib_size);

        std::vector<double> sub_coords(lib_size * dim);
        for (std::size_t s = 0; s < lib_size; ++s) {
            const auto p = cloud.point(subset[s]);
            std::copy(p.begin(), p.end(), sub_coords.begin() + static_cast<std::ptrdiff_t>(s * dim));
        }
        const KdTree tree(sub_coords, dim);

        std::vector<std::size_t> keep_idx(kn);
        std::vector<double> keep_d(kn);
        for (std::size_t i = 0; i < n; ++i) {
            const auto hits = tree.query(cloud.point(i), kn + 1);
            double dbar = 0.0;
            std::size_t kept = 0;
            for (const auto& h : hits) {
                if (subset[h.index] == i) continue; // self-match
                if (kept == kn) break;
                keep_idx[kept] = subset[h.index];
                keep_d[kept] = h.distance;
                dbar += h.distance;
                ++kept;
            }
            dbar /= static_cast<double>(kept);
            double wsum = 0.0, est = 0.0;
            for (std::size_t r = 0; r < kept; ++r) {
                const double w = dbar > 0.0 ? std::exp(-keep_d[r] / dbar) : 1.0;
                wsum += w;
                est += w * target.values[static_cast<std::size_t>(
                               cloud.source_index(keep_idx[r]))];
            }
            estimates[i] = est / wsum;
        }
        curve.skill.push_back(pearson(estimates, truths));
    }
    return curve;
}

const char* to_string(SynchronyVerdict v) {
    switch (v) {
    case SynchronyVerdict::independent: return "independent";
    case SynchronyVerdict::x_drives_y: return "x_drives_y";
    case SynchronyVerdict::y_drives_x: return "y_drives_x";
    case SynchronyVerdict::bidirectional: return "bidirectional";
    }
    return "unknown";
}

SynchronyVerdict synchrony_test(const PointCloud& X, const PointCloud& Y, int k,
                                std::uint64_t seed) {
    check_alignment(X, Y);
    const std::size_t n = X.size();
    if (n < 32) throw InsufficientDataError("synchrony_test: need at least 32 aligned points");
    if (k < 1 || static_cast<std::size_t>(k) > n - 2)
        throw InvalidParameterError("synchrony_test: k out of range");

    const RankData rx = compute_ranks(X, k, 0);
    const RankData ry = compute_ranks(Y, k, 0);
    const double l_xy = l_given(rx, ry, 0);
    const double l_yx = l_given(ry, rx, 0);

    constexpr int kSurrogates = 20;
    const long guard = std::max<long>(1, static_cast<long>(n) / 10);
    Rng rng(derive_seed(seed, "synchrony-surrogates"));
    std::vector<double> null_xy, null_yx;
    null_xy.reserve(kSurrogates);
    null_yx.reserve(kSurrogates);
    for (int s = 0; s < kSurrogates; ++s) {
        const long span = static_cast<long>(n) - 2 * guard;
        const long shift = guard + static_cast<long>(rng.uniform_below(
                                       static_cast<std::uint64_t>(span + 1)));
        null_xy.push_back(l_given(rx, ry, shift));
        null_yx.push_back(l_given(ry, rx, -shift));
    }
    std::sort(null_xy.begin(), null_xy.end());
    std::sort(null_yx.begin(), null_yx.end());
    // 95th percentile of 20 draws: the 19th order statistic.
    const double thr_xy = null_xy[18];
    const double thr_yx = null_yx[18];

    const bool sig_xy = l_xy > thr_xy;
    const bool sig_yx = l_yx > thr_yx;
    if (sig_xy && sig_yx) return SynchronyVerdict::bidirectional;
    if (sig_xy) return SynchronyVerdict::x_drives_y;
    if (sig_yx) return SynchronyVerdict::y_drives_x;
    return SynchronyVerdict::independent;
}

} // namespace flowcast
