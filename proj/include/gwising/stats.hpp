#pragma once

#include <cmath>
#include <cstdint>

namespace gwising {

// Single-pass mean/variance accumulator.
struct Welford {
    std::int64_t n = 0;
    double mean = 0.0;
    double m2 = 0.0;

    void add(double x) {
        ++n;
        const double d = x - mean;
        mean += d / static_cast<double>(n);
        m2 += d * (x - mean);
    }

    double variance() const { return n > 1 ? m2 / static_cast<double>(n - 1) : 0.0; }
    double sd() const { return std::sqrt(variance()); }
    double stderr_() const { return n > 0 ? sd() / std::sqrt(static_cast<double>(n)) : 0.0; }
};

}  // namespace gwising
