#pragma once

#include <span>
#include <vector>

#include "flowcast/timeseries.hpp"

namespace flowcast {

struct EmbeddingSpec {
    int tau = 1; // lag in samples
    int k = 2;   // embedding dimension

    void validate() const {
        if (tau < 1) throw InvalidParameterError("embedding: tau must be >= 1");
        if (k < 1) throw InvalidParameterError("embedding: k must be >= 1");
    }
};

// Delay-coordinate reconstruction of a scalar series. Point i is the lag
// vector for time t = source[i], newest sample first:
//   (x(t), x(t - tau), ..., x(t - (k-1) tau)).
// Coordinates are stored flat, row-major, dim() doubles per point.
struct PointCloud {
    int k = 0;
    std::vector<double> coords;
    std::vector<long> source;

    int dim() const noexcept { return k; }
    std::size_t size() const noexcept { return source.size(); }

    std::span<const double> point(std::size_t i) const {
        return {coords.data() + i * static_cast<std::size_t>(k), static_cast<std::size_t>(k)};
    }
    long source_index(std::size_t i) const { return source[i]; }
};

PointCloud delay_embed(const TimeSeries& series, const EmbeddingSpec& spec);

// Lag chooser: first minimum of the binned mutual information over lags
// 1..max_lag (16 equal-width bins); if the MI curve never turns upward, the
// first lag with autocorrelation below 1/e; failing both, max_lag.
int estimate_tau(const TimeSeries& series, int max_lag);

struct DimensionEstimate {
    int k = 0;
    // True when no dimension <= k_max brought the false-neighbour fraction
    // under threshold (k is then k_max, not a converged estimate).
    bool saturated = false;
};

// Dimension chooser by false nearest neighbours: smallest k whose
// false-neighbour fraction is below 1%, where a neighbour is false when the
// distance added by coordinate k+1 exceeds 15x its distance at dimension k.
DimensionEstimate estimate_k(const TimeSeries& series, int tau, int k_max);

} // namespace flowcast
