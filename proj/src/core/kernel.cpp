#include "kernel.hpp"

#include <algorithm>
#include <cmath>
#include <random>
#include <string>

namespace expose {

namespace {

void check_dims(Index got, Index want, const char* what) {
    if (got != want) {
        throw InputError(std::string(what) + ": dimension " + std::to_string(got) +
                         " does not match expected " + std::to_string(want));
    }
}

} // namespace

KernelSpec make_gaussian_rbf(double bandwidth) {
    if (!(bandwidth > 0.0) || !std::isfinite(bandwidth)) {
        throw InputError("kernel bandwidth must be a positive finite number, got " +
                         std::to_string(bandwidth));
    }
    return KernelSpec{KernelFamily::gaussian_rbf, bandwidth, 1.0};
}

double evaluate_kernel(const KernelSpec& spec, const Vector& x, const Vector& y) {
    if (spec.family != KernelFamily::gaussian_rbf) {
        throw InputError("unsupported kernel family");
    }
    check_dims(y.size(), x.size(), "evaluate_kernel");
    if (!x.allFinite() || !y.allFinite()) {
        throw NumericError("evaluate_kernel: input contains non-finite values");
    }
    const double sq = (x - y).squaredNorm();
    return std::exp(-sq / (2.0 * spec.bandwidth));
}

RksFeatureMap build_rks_map(const KernelSpec& spec, Index input_dim, Index expansions,
                            std::uint64_t seed) {
    if (spec.family != KernelFamily::gaussian_rbf) {
        throw InputError("unsupported kernel family");
    }
    if (input_dim < 1) {
        throw InputError("feature map input dimension must be >= 1, got " +
                         std::to_string(input_dim));
    }
    if (expansions < 1) {
        throw InputError("feature map expansion count must be >= 1, got " +
                         std::to_string(expansions));
    }

    RksFeatureMap map;
    map.expansions = expansions;
    map.input_dim = input_dim;
    map.bandwidth = spec.bandwidth;
    map.seed = seed;
    map.frequencies.resize(expansions, input_dim);

    // Spectral density of the RBF kernel with this parameterization is a
    // zero-mean normal with variance 1/bandwidth per coordinate. Entries are
    // drawn row by row so the matrix is a pure function of (seed, r, d).
    std::mt19937_64 rng(seed);
    std::normal_distribution<double> normal(0.0, 1.0 / std::sqrt(spec.bandwidth));
    for (Index i = 0; i < expansions; ++i) {
        for (Index j = 0; j < input_dim; ++j) {
            map.frequencies(i, j) = normal(rng);
        }
    }
    return map;
}

Vector embed(const RksFeatureMap& map, const Vector& x) {
    check_dims(x.size(), map.input_dim, "embed");
    const Index r = map.expansions;
    const double scale = 1.0 / std::sqrt(static_cast<double>(r));
    Vector projected = map.frequencies * x;
    Vector out(2 * r);
    out.head(r) = projected.array().cos() * scale;
    out.tail(r) = projected.array().sin() * scale;
    return out;
}

Matrix embed_rows(const RksFeatureMap& map, const Matrix& rows) {
    check_dims(rows.cols(), map.input_dim, "embed_rows");
    const Index n = rows.rows();
    const Index r = map.expansions;
    const double scale = 1.0 / std::sqrt(static_cast<double>(r));
    constexpr Index kBlock = 256;

    Matrix out(n, 2 * r);
    for (Index start = 0; start < n; start += kBlock) {
        const Index count = std::min(kBlock, n - start);
        Matrix projected = rows.middleRows(start, count) * map.frequencies.transpose();
        out.block(start, 0, count, r) = projected.array().cos() * scale;
        out.block(start, r, count, r) = projected.array().sin() * scale;
    }
    return out;
}

double approx_kernel(const RksFeatureMap& map, const Vector& x, const Vector& y) {
    const double value = embed(map, x).dot(embed(map, y));
    return std::clamp(value, -1.0, 1.0);
}

} // namespace expose
