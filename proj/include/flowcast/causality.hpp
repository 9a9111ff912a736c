#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "flowcast/embedding.hpp"

namespace flowcast {

// Rank-based coupling index between two aligned reconstructions, normalized
// so that L(X|X) is exactly 1 and independent clouds score near 0:
//   L(X|Y) = (1/N) sum_i [G_i(X) - G_i^k(X|Y)] / [G_i(X) - G_i^k(X)]
// with G_i(X) the mean attainable rank, G_i^k(X) = (k+1)/2 the minimal mean
// rank of k neighbours, and G_i^k(X|Y) the mean X-rank of the k points picked
// as Y's nearest neighbours of Y_i.
struct LIndexResult {
    double l_xy = 0.0; // L(X|Y): high when Y's neighbourhoods locate X's
    double l_yx = 0.0;
    int k = 0;
    std::size_t n = 0;
};

// theiler_w excludes temporal neighbours |i-j| <= w from candidacy in both
// clouds; ranks are renumbered over the remaining candidates.
LIndexResult l_index(const PointCloud& X, const PointCloud& Y, int k, int theiler_w);

struct CCMCurve {
    std::vector<std::size_t> library_sizes;
    std::vector<double> skill; // Pearson r of cross-mapped vs true, per size
    std::string direction;    // human-readable "target <- source manifold" tag
};

// Convergent cross mapping: how well `target` values are recovered from
// neighbourhoods on `source`'s reconstructed manifold, as a function of the
// library (subset) size. Coupling target -> source shows up as skill that
// grows with library size. kn = 0 uses the simplex convention spec.k + 1.
CCMCurve ccm_skill(const TimeSeries& target, const TimeSeries& source, const EmbeddingSpec& spec,
                   const std::vector<std::size_t>& library_sizes, std::size_t kn,
                   std::uint64_t seed);

enum class SynchronyVerdict { independent, x_drives_y, y_drives_x, bidirectional };

const char* to_string(SynchronyVerdict v);

// L-index test against a circular-shift surrogate null (20 surrogates, 95th
// percentile). Significant L(X|Y) attributes X -> Y drive; both directions
// significant reads as bidirectional coupling. Temporal self-match exclusion
// is not applied (callers feed decorrelated clouds).
SynchronyVerdict synchrony_test(const PointCloud& X, const PointCloud& Y, int k,
                                std::uint64_t seed = 0);

} // namespace flowcast
