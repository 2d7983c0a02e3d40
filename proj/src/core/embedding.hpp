#pragma once

#include <cstdint>

#include "dataset.hpp"
#include "kernel.hpp"
#include "types.hpp"

namespace expose {

// A weight vector in feature space together with the fingerprint of the map
// that produced it. `iteration` records how the weights were obtained: the
// number of averaged instances for an empirical embedding, or the number of
// completed update steps for an iteratively trained model.
struct ModelState {
    Vector weights;
    std::uint64_t iteration = 0;
    MapFingerprint fingerprint;
};

// Mean of the embedded rows, accumulated in chunks with pairwise summation so
// large datasets do not lose precision to a single running total.
ModelState empirical_embedding(const RksFeatureMap& map, const Matrix& rows);

// Value of the training objective 0.5*<w,w> - <mu,w> at `state`, where `mean`
// holds the empirical embedding mu. Both states must come from the same map.
double objective_value(const ModelState& state, const ModelState& mean);

// Gap between the objective at `state` and its minimum (attained at the
// empirical embedding). Computed directly and cross-checked against the
// closed form 0.5*||w - mu||^2; a disagreement beyond 1e-9 raises
// NumericError.
double objective_gap(const ModelState& state, const ModelState& mean);

void check_same_map(const MapFingerprint& a, const MapFingerprint& b, const char* what);

} // namespace expose
