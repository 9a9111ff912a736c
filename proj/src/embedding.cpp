#include "flowcast/embedding.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <string>

#include "flowcast/knn.hpp"

namespace flowcast {

PointCloud delay_embed(const TimeSeries& series, const EmbeddingSpec& spec) {
    series.validate();
    spec.validate();

    const long n = static_cast<long>(series.values.size());
    const long span = static_cast<long>(spec.k - 1) * spec.tau;
    if (n < span + 1)
        throw InsufficientDataError("delay_embed: series of length " + std::to_string(n) +
                                    " is too short; need at least " + std::to_string(span + 1) +
                                    " samples for tau=" + std::to_string(spec.tau) +
                                    ", k=" + std::to_string(spec.k));

    PointCloud cloud;
    cloud.k = spec.k;
    const long count = n - span;
    cloud.coords.reserve(static_cast<std::size_t>(count) * spec.k);
    cloud.source.reserve(static_cast<std::size_t>(count));
    for (long t = span; t < n; ++t) {
        for (int j = 0; j < spec.k; ++j)
            cloud.coords.push_back(series.values[static_cast<std::size_t>(t - j * spec.tau)]);
        cloud.source.push_back(t);
    }
    return cloud;
}

namespace {

constexpr int kMiBins = 16;

// Binned mutual information between the series and its lagged copy, in nats.
// Bin edges are fixed from the full series range so all lags share them.
double lagged_mutual_information(const std::vector<double>& v, double lo, double hi, int lag) {
    const std::size_t m = v.size() - static_cast<std::size_t>(lag);
    const double scale = static_cast<double>(kMiBins) / (hi - lo);
    auto bin_of = [&](double x) {
        int b = static_cast<int>((x - lo) * scale);
        return std::clamp(b, 0, kMiBins - 1);
    };

    std::array<std::array<double, kMiBins>, kMiBins> joint{};
    std::array<double, kMiBins> row{};
    std::array<double, kMiBins> col{};
    for (std::size_t t = 0; t < m; ++t) {
        const int a = bin_of(v[t]);
        const int b = bin_of(v[t + static_cast<std::size_t>(lag)]);
        joint[a][b] += 1.0;
        row[a] += 1.0;
        col[b] += 1.0;
    }

    const double total = static_cast<double>(m);
    double mi = 0.0;
    for (int a = 0; a < kMiBins; ++a) {
        if (row[a] == 0.0) continue;
        for (int b = 0; b < kMiBins; ++b) {
            const double c = joint[a][b];
            if (c == 0.0) continue;
            mi += (c / total) * std::log(c * total / (row[a] * col[b]));
        }
    }
    return mi;
}

} // namespace

int estimate_tau(const TimeSeries& series, int max_lag) {
    series.validate();
    if (max_lag < 1) throw InvalidParameterError("estimate_tau: max_lag must be >= 1");
    const long n = static_cast<long>(series.values.size());
    if (n <= 2L * max_lag)
        throw InsufficientDataError("estimate_tau: need more than 2*max_lag samples");

    const auto [lo_it, hi_it] = std::minmax_element(series.values.begin(), series.values.end());
    if (*lo_it == *hi_it) throw DegenerateInputError("estimate_tau: constant series");

    std::vector<double> mi(static_cast<std::size_t>(max_lag) + 1, 0.0);
    for (int lag = 1; lag <= max_lag; ++lag)
        mi[static_cast<std::size_t>(lag)] =
            lagged_mutual_information(series.values, *lo_it, *hi_it, lag);

    // First minimum: the first lag after which MI turns upward.
    for (int lag = 1; lag < max_lag; ++lag) {
        if (mi[static_cast<std::size_t>(lag)] < mi[static_cast<std::size_t>(lag) + 1]) return lag;
    }

    // No minimum; fall back to the autocorrelation 1/e crossing.
    double mean = 0.0;
    for (double x : series.values) mean += x;
    mean /= static_cast<double>(n);
    double var = 0.0;
    for (double x : series.values) var += (x - mean) * (x - mean);
    if (var > 0.0) {
        constexpr double inv_e = 0.36787944117144233;
        for (int lag = 1; lag <= max_lag; ++lag) {
            double acc = 0.0;
            for (long t = 0; t + lag < n; ++t)
                acc += (series.values[static_cast<std::size_t>(t)] - mean) *
                       (series.values[static_cast<std::size_t>(t + lag)] - mean);
            if (acc / var < inv_e) return lag;
        }
    }
    return max_lag;
}

DimensionEstimate estimate_k(const TimeSeries& series, int tau, int k_max) {
    series.validate();
    if (tau < 1) throw InvalidParameterError("estimate_k: tau must be >= 1");
    if (k_max < 1) throw InvalidParameterError("estimate_k: k_max must be >= 1");
    const long n = static_cast<long>(series.values.size());
    if (n - static_cast<long>(k_max) * tau < 2)
        throw InsufficientDataError("estimate_k: series too short to test k_max=" +
                                    std::to_string(k_max) + " at tau=" + std::to_string(tau));

    constexpr double kRatioTol = 15.0;
    constexpr double kFnnThreshold = 0.01;
    const std::vector<double>& v = series.values;

    for (int k = 1; k <= k_max; ++k) {
        // Anchors are restricted to times whose (k+1)-th coordinate exists, so
        // the growth ratio is defined for every pair.
        const long t0 = static_cast<long>(k) * tau;
        const std::size_t m = static_cast<std::size_t>(n - t0);
        std::vector<double> coords;
        coords.reserve(m * static_cast<std::size_t>(k));
        for (long t = t0; t < n; ++t)
            for (int j = 0; j < k; ++j)
                coords.push_back(v[static_cast<std::size_t>(t - static_cast<long>(j) * tau)]);

        const KdTree tree(coords, static_cast<std::size_t>(k));
        std::size_t false_count = 0;
        for (std::size_t i = 0; i < m; ++i) {
            const auto hits = tree.query(tree.point(i), 2);
            const KdTree::Hit& nb = hits[0].index == i ? hits[1] : hits[0];
            // Anchor i sits at time t0 + i, so its would-be coordinate k+1 is
            // x(t0 + i - k*tau) = v[i].
            const double added = std::abs(v[i] - v[nb.index]);
            const bool is_false =
                nb.distance == 0.0 ? added > 0.0 : added / nb.distance > kRatioTol;
            if (is_false) ++false_count;
        }
        if (static_cast<double>(false_count) / static_cast<double>(m) < kFnnThreshold)
            return {k, false};
    }
    return {k_max, true};
}

} // namespace flowcast
