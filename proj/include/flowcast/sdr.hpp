#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "flowcast/errors.hpp"

namespace flowcast {

// Sparse distributed representation: a wide binary vector identified by its
// (sorted, unique) active bit indices.
struct Sdr {
    std::uint32_t width = 0;
    std::vector<std::uint32_t> active;

    void validate() const;
    bool operator==(const Sdr&) const = default;
};

// Contiguous-bucket scalar encoder: w adjacent bits whose start position
// slides linearly from 0 (at min) to n - w (at max), so nearby values share
// bits in proportion to their proximity.
struct ScalarEncoderConfig {
    double min_value = 0.0;
    double max_value = 1.0;
    std::uint32_t n = 2048;
    std::uint32_t w = 40;

    void validate() const;
};

struct EncodedScalar {
    Sdr sdr;
    bool clamped = false; // v fell outside [min, max] and was clamped
};

EncodedScalar encode_scalar(const ScalarEncoderConfig& cfg, double v);

// |a.active intersect b.active|; widths must match.
std::uint32_t overlap(const Sdr& a, const Sdr& b);

// k-winners-take-all: the k highest-scoring indices, score ties broken by
// lowest index.
Sdr kwta(std::span<const double> scores, std::size_t k);

} // namespace flowcast
