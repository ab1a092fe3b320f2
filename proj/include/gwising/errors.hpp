#pragma once

#include <cstdint>
#include <stdexcept>
#include <string>

namespace gwising {

// Bad user input: malformed distribution, out-of-domain parameter, bad flag.
// The CLI maps this to exit code 3.
struct ConfigError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// A checked runtime invariant failed (e.g. a proven bound was exceeded).
// The CLI maps this to exit code 2.
struct InvariantViolation : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// Tree generation hit the vertex cap. Carries the depth that was fully
// generated before the overflow. The CLI maps this to exit code 4.
struct VertexCapOverflow : std::runtime_error {
    VertexCapOverflow(int depth_reached_, std::int64_t cap_)
        : std::runtime_error("vertex cap " + std::to_string(cap_) +
                             " exceeded after depth " + std::to_string(depth_reached_)),
          depth_reached(depth_reached_),
          cap(cap_) {}

    int depth_reached;
    std::int64_t cap;
};

}  // namespace gwising
