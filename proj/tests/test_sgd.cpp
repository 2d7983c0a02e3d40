#include <doctest.h>

#include <cmath>
#include <random>
#include <vector>

#include "core/sgd.hpp"
#include "test_util.hpp"

using namespace expose;

namespace {

Vector random_vector(Index size, std::mt19937_64& rng, double scale = 1.0) {
    std::normal_distribution<double> unit(0.0, 1.0);
    Vector v(size);
    for (Index j = 0; j < size; ++j) {
        v[j] = scale * unit(rng);
    }
    return v;
}

} // namespace

TEST_CASE("stochastic_gradient is the difference of weights and feature") {
    Vector w(3), phi(3);
    w << 1.0, -2.0, 0.5;
    phi << 0.5, 0.5, 0.5;
    const Vector g = stochastic_gradient(w, phi);
    CHECK(g[0] == 0.5);
    CHECK(g[1] == -2.5);
    CHECK(g[2] == 0.0);

    Vector wrong(2);
    CHECK_THROWS_AS(stochastic_gradient(w, wrong), InputError);
}

TEST_CASE("project_ball leaves interior points untouched") {
    std::mt19937_64 rng(3);
    for (int trial = 0; trial < 100; ++trial) {
        Vector v = random_vector(8, rng, 0.1);
        const Vector projected = project_ball(v, 1.0);
        CHECK(projected.cwiseEqual(v).all());
    }
}

TEST_CASE("project_ball rescales exterior points onto the sphere") {
    std::mt19937_64 rng(4);
    for (int trial = 0; trial < 100; ++trial) {
        Vector v = random_vector(8, rng, 3.0);
        if (v.norm() <= 1.0) {
            continue;
        }
        const Vector projected = project_ball(v, 1.0);
        CHECK(projected.norm() == doctest::Approx(1.0).epsilon(1e-12));
        // Direction is preserved.
        const double cosine = projected.dot(v) / (projected.norm() * v.norm());
        CHECK(cosine == doctest::Approx(1.0).epsilon(1e-12));
    }
}

TEST_CASE("project_ball is nonexpansive") {
    std::mt19937_64 rng(5);
    for (int trial = 0; trial < 1000; ++trial) {
        const Vector a = random_vector(16, rng, 2.0);
        const Vector b = random_vector(16, rng, 2.0);
        const double before = (a - b).norm();
        const double after = (project_ball(a, 1.0) - project_ball(b, 1.0)).norm();
        CHECK(after <= before * (1.0 + 1e-12));
    }
}

TEST_CASE("project_ball validates its arguments") {
    Vector v = Vector::Ones(4);
    CHECK_THROWS_AS(project_ball(v, 0.0), InputError);
    CHECK_THROWS_AS(project_ball(v, -2.0), InputError);
    Vector bad = v;
    bad[2] = std::nan("");
    CHECK_THROWS_AS(project_ball(bad, 1.0), NumericError);
}

TEST_CASE("three hand-computed steps with theta one") {
    // With step size 1/t the iterate is the running mean of the sampled
    // features; spelled out for t = 1, 2, 3.
    Vector phi1(2), phi2(2), phi3(2);
    phi1 << 0.6, 0.0;
    phi2 << 0.0, 0.6;
    phi3 << 0.3, 0.3;

    ModelState state;
    state.weights = Vector::Zero(2);

    sgd_step(state, phi1, 1.0, 1.0);
    CHECK(state.iteration == 1);
    CHECK((state.weights - phi1).norm() <= 1e-15);

    sgd_step(state, phi2, 1.0, 1.0);
    Vector mean2 = (phi1 + phi2) / 2.0;
    CHECK((state.weights - mean2).norm() <= 1e-15);

    sgd_step(state, phi3, 1.0, 1.0);
    Vector mean3 = (phi1 + phi2 + phi3) / 3.0;
    CHECK((state.weights - mean3).norm() <= 1e-15);
}

TEST_CASE("a hand-computed step with theta two hits the projection") {
    // gamma_1 = 2, so the first candidate is 2*phi1 with norm 1.2 and gets
    // pulled back onto the unit sphere.
    Vector phi1(2);
    phi1 << 0.6, 0.0;

    ModelState state;
    state.weights = Vector::Zero(2);
    SgdRunStats stats;
    sgd_step(state, phi1, 2.0, 1.0, &stats);

    CHECK(stats.rescales == 1);
    CHECK(stats.max_norm == doctest::Approx(1.2).epsilon(1e-15));
    CHECK(state.weights[0] == doctest::Approx(1.0).epsilon(1e-15));
    CHECK(state.weights[1] == 0.0);
}

TEST_CASE("sgd_step validates theta, radius and shapes") {
    ModelState state;
    state.weights = Vector::Zero(2);
    Vector phi = Vector::Ones(2);

    CHECK_THROWS_AS(sgd_step(state, phi, 0.5, 1.0), InputError);
    CHECK_THROWS_AS(sgd_step(state, phi, 0.0, 1.0), InputError);
    CHECK_THROWS_AS(sgd_step(state, phi, 1.0, 0.0), InputError);
    Vector wrong = Vector::Ones(3);
    CHECK_THROWS_AS(sgd_step(state, wrong, 1.0, 1.0), InputError);
}

TEST_CASE("iterations_for_accuracy reproduces the plug-in step counts") {
    CHECK(iterations_for_accuracy(0.005, EpsilonMode::objective, 1.0) == 100);
    CHECK(iterations_for_accuracy(0.1, EpsilonMode::parameter, 1.0) == 100);
    // ceil(1 / (2*0.3)) = ceil(1.67)
    CHECK(iterations_for_accuracy(0.3, EpsilonMode::objective, 1.0) == 2);
    // radius 2: ceil(4 / 0.2)
    CHECK(iterations_for_accuracy(0.1, EpsilonMode::objective, 2.0) == 20);
    // very loose targets still take one step
    CHECK(iterations_for_accuracy(100.0, EpsilonMode::objective, 1.0) == 1);

    CHECK_THROWS_AS(iterations_for_accuracy(0.0, EpsilonMode::objective, 1.0), InputError);
    CHECK_THROWS_AS(iterations_for_accuracy(-0.1, EpsilonMode::parameter, 1.0), InputError);
    CHECK_THROWS_AS(iterations_for_accuracy(std::nan(""), EpsilonMode::objective, 1.0),
                    InputError);
    // would need 1e24 steps
    CHECK_THROWS_AS(iterations_for_accuracy(1e-12, EpsilonMode::parameter, 1.0), InputError);
}

TEST_CASE("resolve_iteration_count passes through or converts") {
    CHECK(resolve_iteration_count(StopRule::after(42)) == 42);
    CHECK(resolve_iteration_count(StopRule::accurate_to(0.005, EpsilonMode::objective)) == 100);
    CHECK_THROWS_AS(resolve_iteration_count(StopRule::after(0)), InputError);
}

TEST_CASE("theoretical_bounds match hand-evaluated constants") {
    // theta = 1: q = max(1/(2-1), 1) = 1.
    const ConvergenceBounds unit = theoretical_bounds(100, 1.0, 1.0);
    CHECK(unit.q == 1.0);
    CHECK(unit.parameter == 0.01);
    CHECK(unit.objective == 0.005);

    // theta = 2: q = max(4/3, 1) = 4/3.
    const ConvergenceBounds wide = theoretical_bounds(100, 1.0, 2.0);
    CHECK(wide.q == doctest::Approx(1.3333333333333333).epsilon(1e-15));
    CHECK(wide.parameter == doctest::Approx(0.013333333333333334).epsilon(1e-15));
    CHECK(wide.objective == doctest::Approx(0.006666666666666667).epsilon(1e-15));

    // theta = 0.75: theta^2/(2 theta - 1) = 0.5625/0.5 = 1.125.
    const ConvergenceBounds mid = theoretical_bounds(1, 1.0, 0.75);
    CHECK(mid.q == doctest::Approx(1.125).epsilon(1e-15));

    // radius scales quadratically
    const ConvergenceBounds scaled = theoretical_bounds(10, 3.0, 1.0);
    CHECK(scaled.q == 9.0);
    CHECK(scaled.parameter == doctest::Approx(0.9).epsilon(1e-15));

    CHECK_THROWS_AS(theoretical_bounds(0, 1.0, 1.0), InputError);
    CHECK_THROWS_AS(theoretical_bounds(10, 1.0, 0.5), InputError);
    CHECK_THROWS_AS(theoretical_bounds(10, 1.0, 0.0), InputError);
    CHECK_THROWS_AS(theoretical_bounds(10, -1.0, 1.0), InputError);
}

TEST_CASE("score_deviation_bound scales with the squared feature norm") {
    CHECK(score_deviation_bound(100, 1.0, 1.0, 1.0) == 0.01);
    CHECK(score_deviation_bound(100, 1.0, 1.0, 0.5) == doctest::Approx(0.0025).epsilon(1e-15));
    CHECK(score_deviation_bound(100, 1.0, 1.0, 0.0) == 0.0);
    CHECK_THROWS_AS(score_deviation_bound(100, 1.0, 1.0, -1.0), InputError);
    CHECK_THROWS_AS(score_deviation_bound(100, 1.0, 0.4, 1.0), InputError);
}

TEST_CASE("a full without-replacement pass lands on the exact mean") {
    // After one step per row with theta = 1 the iterate is the mean of all
    // embedded rows in permutation order, which is the empirical embedding.
    const RksFeatureMap map = build_rks_map(make_gaussian_rbf(2.0), 3, 8, 6);
    const Matrix rows = testutil::blobs(50, 3, 13);

    SgdConfig config;
    config.stop = StopRule::after(50);
    config.sampling = Sampling::without_replacement;
    config.seed = 21;

    const ModelState state = run_sgd(config, rows, map);
    const ModelState mean = empirical_embedding(map, rows);
    CHECK(state.iteration == 50);
    CHECK((state.weights - mean.weights).norm() <= 1e-12);
}

TEST_CASE("run_sgd is deterministic in the seed") {
    const RksFeatureMap map = build_rks_map(make_gaussian_rbf(2.0), 3, 8, 6);
    const Matrix rows = testutil::blobs(30, 3, 14);

    SgdConfig config;
    config.stop = StopRule::after(200);
    config.seed = 77;

    const ModelState a = run_sgd(config, rows, map);
    const ModelState b = run_sgd(config, rows, map);
    CHECK(a.weights.cwiseEqual(b.weights).all());

    config.seed = 78;
    const ModelState c = run_sgd(config, rows, map);
    CHECK_FALSE(a.weights.cwiseEqual(c.weights).all());
}

TEST_CASE("the hook sees the zero start and every completed step") {
    const RksFeatureMap map = build_rks_map(make_gaussian_rbf(2.0), 3, 8, 6);
    const Matrix rows = testutil::blobs(30, 3, 15);

    SgdConfig config;
    config.stop = StopRule::after(25);
    config.seed = 5;

    std::vector<std::uint64_t> seen;
    bool zero_start = false;
    const ModelState last = run_sgd(config, rows, map, [&](const ModelState& state) {
        if (seen.empty()) {
            zero_start = state.weights.isZero(0.0);
        }
        seen.push_back(state.iteration);
    });

    REQUIRE(seen.size() == 26);
    CHECK(zero_start);
    for (std::uint64_t i = 0; i < seen.size(); ++i) {
        CHECK(seen[i] == i);
    }
    CHECK(last.iteration == 25);
}

TEST_CASE("default training never needs a rescale") {
    // Candidates are convex combinations of unit feature vectors, so with
    // theta = 1 and a unit ball the projection must stay inactive.
    const RksFeatureMap map = build_rks_map(make_gaussian_rbf(3.0), 5, 32, 2);
    const Matrix rows = testutil::blobs(400, 5, 16);

    SgdConfig config;
    config.stop = StopRule::after(10000);
    config.seed = 3;

    SgdRunStats stats;
    run_sgd(config, rows, map, nullptr, &stats);
    CHECK(stats.steps == 10000);
    CHECK(stats.rescales == 0);
    CHECK(stats.max_norm <= 1.0 + 1e-12);
}

TEST_CASE("iterates stay inside the ball for small theta") {
    const RksFeatureMap map = build_rks_map(make_gaussian_rbf(3.0), 5, 32, 2);
    const Matrix rows = testutil::blobs(100, 5, 17);

    SgdConfig config;
    config.theta = 0.6;
    config.stop = StopRule::after(500);
    config.seed = 9;

    std::vector<double> norms;
    run_sgd(config, rows, map, [&](const ModelState& state) {
        norms.push_back(state.weights.norm());
    });
    for (double n : norms) {
        CHECK(n <= 1.0 + 1e-12);
    }
}

TEST_CASE("run_sgd validates configuration and shapes") {
    const RksFeatureMap map = build_rks_map(make_gaussian_rbf(2.0), 3, 8, 6);
    const Matrix rows = testutil::blobs(10, 3, 18);

    SgdConfig bad_theta;
    bad_theta.theta = 0.5;
    CHECK_THROWS_AS(run_sgd(bad_theta, rows, map), InputError);

    SgdConfig bad_radius;
    bad_radius.ball_radius = 0.0;
    CHECK_THROWS_AS(run_sgd(bad_radius, rows, map), InputError);

    SgdConfig ok;
    CHECK_THROWS_AS(run_sgd(ok, Matrix(0, 3), map), InputError);
    CHECK_THROWS_AS(run_sgd(ok, testutil::blobs(10, 2, 1), map), InputError);

    SgdConfig exhausted;
    exhausted.sampling = Sampling::without_replacement;
    exhausted.stop = StopRule::after(11);
    CHECK_THROWS_WITH_AS(run_sgd(exhausted, rows, map),
                         doctest::Contains("with replacement"), InputError);
}

TEST_CASE("the objective admits an exact quadratic expansion") {
    // f(v) = f(w) + <grad f(w), v - w> + 0.5*|v - w|^2 holds identically; the
    // two sides run through different arithmetic.
    std::mt19937_64 rng(19);
    for (int trial = 0; trial < 1000; ++trial) {
        const Vector phi = random_vector(16, rng, 0.25);
        const Vector w = random_vector(16, rng, 0.25);
        const Vector v = random_vector(16, rng, 0.25);

        const auto f = [&](const Vector& u) {
            return 0.5 * u.squaredNorm() - phi.dot(u);
        };
        const Vector grad = stochastic_gradient(w, phi);
        const double expansion = f(w) + grad.dot(v - w) + 0.5 * (v - w).squaredNorm();
        CHECK(std::abs(f(v) - expansion) <= 1e-12);

        // The gradient map is an isometry shift: grad f(w) - grad f(v) = w - v.
        const Vector gv = stochastic_gradient(v, phi);
        CHECK(std::abs((grad - gv).norm() - (w - v).norm()) <= 1e-12);
    }
}

TEST_CASE("averaged runs sit below the worst-case distance bound") {
    // Not a proof, a regression guard: averaged over 100 runs the squared
    // distance at t = 50 sits below the t = 50 guarantee, with a 1.2 factor
    // of Monte Carlo slack on the sample mean.
    const RksFeatureMap map = build_rks_map(make_gaussian_rbf(2.0), 3, 32, 23);
    const Matrix rows = testutil::blobs(200, 3, 24);
    const ModelState mean = empirical_embedding(map, rows);

    double total_sq = 0.0;
    const int runs = 100;
    for (int i = 0; i < runs; ++i) {
        SgdConfig config;
        config.stop = StopRule::after(50);
        config.seed = 1000 + static_cast<std::uint64_t>(i);
        const ModelState state = run_sgd(config, rows, map);
        total_sq += (state.weights - mean.weights).squaredNorm();
    }
    const double bound = theoretical_bounds(50, 1.0, 1.0).parameter;
    CHECK(total_sq / runs <= 1.2 * bound);
}
