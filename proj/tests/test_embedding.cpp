#include <doctest.h>

#include <random>

#include "core/embedding.hpp"
#include "core/kernel.hpp"
#include "test_util.hpp"

using namespace expose;

namespace {

RksFeatureMap small_map() {
    return build_rks_map(make_gaussian_rbf(2.0), 4, 16, 5);
}

Vector naive_mean(const RksFeatureMap& map, const Matrix& rows) {
    Vector sum = Vector::Zero(2 * map.expansions);
    for (Index i = 0; i < rows.rows(); ++i) {
        sum += embed(map, rows.row(i).transpose());
    }
    return sum / static_cast<double>(rows.rows());
}

} // namespace

TEST_CASE("empirical_embedding equals the naive mean of embedded rows") {
    const RksFeatureMap map = small_map();
    const Matrix rows = testutil::blobs(10, 4, 3);
    const ModelState state = empirical_embedding(map, rows);
    CHECK(state.iteration == 10);
    CHECK(state.fingerprint == map.fingerprint());
    CHECK((state.weights - naive_mean(map, rows)).norm() <= 1e-14);
}

TEST_CASE("chunked accumulation matches the naive mean on larger data") {
    const RksFeatureMap map = small_map();
    const Matrix rows = testutil::blobs(200, 4, 8); // crosses the chunk size
    const ModelState state = empirical_embedding(map, rows);
    CHECK((state.weights - naive_mean(map, rows)).norm() <= 1e-13);
}

TEST_CASE("embedding a single row is that row's feature vector") {
    const RksFeatureMap map = small_map();
    const Matrix rows = testutil::blobs(1, 4, 4);
    const ModelState state = empirical_embedding(map, rows);
    CHECK((state.weights - embed(map, rows.row(0).transpose())).norm() <= 1e-15);
    CHECK(state.iteration == 1);
}

TEST_CASE("the empirical embedding stays inside the unit ball") {
    // Mean of unit vectors; the norm can touch 1 only if all rows embed
    // identically.
    const RksFeatureMap map = small_map();
    for (std::uint64_t seed = 0; seed < 5; ++seed) {
        const Matrix rows = testutil::blobs(50, 4, seed);
        const ModelState state = empirical_embedding(map, rows);
        CHECK(state.weights.norm() <= 1.0 + 1e-12);
    }
}

TEST_CASE("empirical_embedding validates its input") {
    const RksFeatureMap map = small_map();
    CHECK_THROWS_AS(empirical_embedding(map, Matrix(0, 4)), InputError);
    CHECK_THROWS_AS(empirical_embedding(map, Matrix(3, 2)), InputError);
}

TEST_CASE("objective_value matches the quadratic formula at hand-picked points") {
    const RksFeatureMap map = small_map();
    const Matrix rows = testutil::blobs(20, 4, 6);
    const ModelState mean = empirical_embedding(map, rows);

    ModelState zero;
    zero.weights = Vector::Zero(mean.weights.size());
    zero.fingerprint = mean.fingerprint;
    CHECK(objective_value(zero, mean) == 0.0);

    // At the minimizer the objective is -0.5*|mu|^2.
    const double at_mean = objective_value(mean, mean);
    CHECK(at_mean == doctest::Approx(-0.5 * mean.weights.squaredNorm()).epsilon(1e-14));
}

TEST_CASE("objective_gap equals half the squared distance to the embedding") {
    const RksFeatureMap map = small_map();
    const Matrix rows = testutil::blobs(20, 4, 7);
    const ModelState mean = empirical_embedding(map, rows);

    std::mt19937_64 rng(9);
    std::normal_distribution<double> unit(0.0, 1.0);
    for (int trial = 0; trial < 100; ++trial) {
        ModelState state;
        state.weights = Vector(mean.weights.size());
        for (Index j = 0; j < state.weights.size(); ++j) {
            state.weights[j] = 0.3 * unit(rng);
        }
        state.fingerprint = mean.fingerprint;

        const double gap = objective_gap(state, mean);
        CHECK(gap >= 0.0);
        CHECK(gap == doctest::Approx(0.5 * (state.weights - mean.weights).squaredNorm())
                         .epsilon(1e-12));
        // Same number through the definition: f(w) - f(mu).
        const double direct = objective_value(state, mean) - objective_value(mean, mean);
        CHECK(gap == doctest::Approx(direct).epsilon(1e-9));
    }
}

TEST_CASE("the gap vanishes exactly at the embedding itself") {
    const RksFeatureMap map = small_map();
    const Matrix rows = testutil::blobs(15, 4, 2);
    const ModelState mean = empirical_embedding(map, rows);
    CHECK(objective_gap(mean, mean) == 0.0);
}

TEST_CASE("mixing states from different maps is rejected") {
    const RksFeatureMap map = small_map();
    const RksFeatureMap other = build_rks_map(make_gaussian_rbf(2.0), 4, 16, 99);
    const Matrix rows = testutil::blobs(10, 4, 1);
    const ModelState a = empirical_embedding(map, rows);
    const ModelState b = empirical_embedding(other, rows);
    CHECK_THROWS_AS(objective_value(a, b), InputError);
    CHECK_THROWS_AS(objective_gap(a, b), InputError);

    ModelState short_state = a;
    short_state.weights = Vector::Zero(4);
    CHECK_THROWS_AS(objective_gap(short_state, a), InputError);
}
