#pragma once

#include <cstdint>

#include "error.hpp"
#include "types.hpp"

namespace expose {

enum class KernelFamily { gaussian_rbf };

// Gaussian RBF kernel k(x,y) = exp(-|x-y|^2 / (2*bandwidth)).
// `bound` is the M with k(x,x) <= M^2; it is 1 for the RBF family, which in
// turn bounds every embedded vector and model iterate by 1.
struct KernelSpec {
    KernelFamily family = KernelFamily::gaussian_rbf;
    double bandwidth = 1.0;
    double bound = 1.0;
};

KernelSpec make_gaussian_rbf(double bandwidth);

double evaluate_kernel(const KernelSpec& spec, const Vector& x, const Vector& y);

// Frozen random projection behind the random-kitchen-sinks feature map.
// `frequencies` is expansions x input_dim with i.i.d. N(0, 1/bandwidth)
// entries; rebuilding from (seed, expansions, input_dim, bandwidth)
// reproduces it bit-exactly within one build (see kGeneratorId).
struct RksFeatureMap {
    Matrix frequencies;
    Index expansions = 0;
    Index input_dim = 0;
    double bandwidth = 1.0;
    std::uint64_t seed = 0;

    MapFingerprint fingerprint() const {
        return MapFingerprint{seed, expansions, input_dim, bandwidth};
    }
};

// Names the RNG scheme behind build_rks_map. Stored in model files so that a
// loader built against a different standard library fails the regeneration
// checksum instead of silently decoding scores with a different map.
inline constexpr const char* kGeneratorId = "mt19937_64-stdnormal";

RksFeatureMap build_rks_map(const KernelSpec& spec, Index input_dim, Index expansions,
                            std::uint64_t seed);

// phi(x) = [cos(Zx); sin(Zx)] / sqrt(r). Unit norm up to rounding.
Vector embed(const RksFeatureMap& map, const Vector& x);

// Row-wise embedding: n x d in, n x 2r out. Processes rows in blocks so the
// projection temporary stays small.
Matrix embed_rows(const RksFeatureMap& map, const Matrix& rows);

// <phi(x), phi(y)>, clamped to [-1, 1].
double approx_kernel(const RksFeatureMap& map, const Vector& x, const Vector& y);

} // namespace expose
