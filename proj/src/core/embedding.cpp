#include "embedding.hpp"

#include <algorithm>
#include <cmath>
#include <string>
#include <vector>

namespace expose {

void check_same_map(const MapFingerprint& a, const MapFingerprint& b, const char* what) {
    if (!(a == b)) {
        throw InputError(std::string(what) +
                         ": feature map fingerprints differ (seed " +
                         std::to_string(a.seed) + " vs " + std::to_string(b.seed) +
                         ", expansions " + std::to_string(a.expansions) + " vs " +
                         std::to_string(b.expansions) + ", input dim " +
                         std::to_string(a.input_dim) + " vs " +
                         std::to_string(b.input_dim) + ")");
    }
}

namespace {

Vector pairwise_sum(std::vector<Vector>& parts) {
    while (parts.size() > 1) {
        std::size_t half = (parts.size() + 1) / 2;
        for (std::size_t i = 0; i + half < parts.size(); ++i) {
            parts[i] += parts[i + half];
        }
        parts.resize(half);
    }
    return std::move(parts.front());
}

} // namespace

ModelState empirical_embedding(const RksFeatureMap& map, const Matrix& rows) {
    if (rows.rows() < 1) {
        throw InputError("empirical embedding needs at least one row");
    }
    const Index n = rows.rows();
    constexpr Index kChunk = 64;

    std::vector<Vector> partials;
    partials.reserve(static_cast<std::size_t>((n + kChunk - 1) / kChunk));
    for (Index start = 0; start < n; start += kChunk) {
        const Index count = std::min(kChunk, n - start);
        Matrix phi = embed_rows(map, rows.middleRows(start, count));
        partials.push_back(phi.colwise().sum().transpose());
    }

    ModelState state;
    state.weights = pairwise_sum(partials) / static_cast<double>(n);
    state.iteration = static_cast<std::uint64_t>(n);
    state.fingerprint = map.fingerprint();
    return state;
}

double objective_value(const ModelState& state, const ModelState& mean) {
    check_same_map(state.fingerprint, mean.fingerprint, "objective_value");
    if (state.weights.size() != mean.weights.size()) {
        throw InputError("objective_value: weight vectors have " +
                         std::to_string(state.weights.size()) + " and " +
                         std::to_string(mean.weights.size()) + " entries");
    }
    return 0.5 * state.weights.squaredNorm() - mean.weights.dot(state.weights);
}

double objective_gap(const ModelState& state, const ModelState& mean) {
    const double direct = objective_value(state, mean) - objective_value(mean, mean);
    const double closed = 0.5 * (state.weights - mean.weights).squaredNorm();
    if (std::abs(direct - closed) > 1e-9 * std::max(1.0, std::abs(closed))) {
        throw NumericError("objective gap disagrees with closed form: " +
                           std::to_string(direct) + " vs " + std::to_string(closed));
    }
    return closed;
}

} // namespace expose
