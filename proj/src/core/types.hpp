#pragma once

#include <cstdint>

#include <Eigen/Core>

namespace expose {

using Vector = Eigen::VectorXd;
using Matrix = Eigen::MatrixXd;
using Index = Eigen::Index;

// Identity of a frozen random feature map. Models carry the fingerprint of
// the map they were built with so that mismatched combinations are rejected
// instead of silently producing garbage scores.
struct MapFingerprint {
    std::uint64_t seed = 0;
    Index expansions = 0;
    Index input_dim = 0;
    double bandwidth = 0.0;

    friend bool operator==(const MapFingerprint&, const MapFingerprint&) = default;
};

} // namespace expose
