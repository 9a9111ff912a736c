#pragma once

#include <cmath>
#include <vector>

#include "flowcast/errors.hpp"

namespace flowcast {

// A uniformly sampled scalar signal. dt is the sampling interval in the time
// units of whatever produced it.
struct TimeSeries {
    double dt = 1.0;
    std::vector<double> values;

    std::size_t size() const noexcept { return values.size(); }

    void validate() const {
        if (!(dt > 0.0)) throw InvalidParameterError("TimeSeries: dt must be > 0");
        if (values.empty()) throw InvalidInputError("TimeSeries: must hold at least one sample");
        for (double v : values) {
            if (!std::isfinite(v)) throw InvalidInputError("TimeSeries: non-finite sample");
        }
    }
};

} // namespace flowcast
