#include "sgd.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "text_util.hpp"

namespace expose {

namespace {

constexpr double kRescaleSlack = 1e-12;
constexpr double kMaxIterations = 4.6e18;

void check_radius(double radius) {
    if (!(radius > 0.0) || !std::isfinite(radius)) {
        throw InputError("ball radius must be a positive finite number, got " +
                         format_g17(radius));
    }
}

void check_theta(double theta) {
    if (!(theta > 0.5) || !std::isfinite(theta)) {
        throw InputError("step size scale theta must exceed 1/2, got " +
                         format_g17(theta));
    }
}

} // namespace

Vector stochastic_gradient(const Vector& weights, const Vector& feature) {
    if (weights.size() != feature.size()) {
        throw InputError("stochastic_gradient: weight size " +
                         std::to_string(weights.size()) +
                         " does not match feature size " +
                         std::to_string(feature.size()));
    }
    return weights - feature;
}

Vector project_ball(Vector weights, double radius) {
    check_radius(radius);
    if (!weights.allFinite()) {
        throw NumericError("project_ball: vector contains non-finite values");
    }
    const double norm = weights.norm();
    if (norm > radius) {
        weights *= radius / norm;
    }
    return weights;
}

void sgd_step(ModelState& state, const Vector& feature, double theta, double radius,
              SgdRunStats* stats) {
    check_theta(theta);
    check_radius(radius);
    if (state.weights.size() != feature.size()) {
        throw InputError("sgd_step: weight size " +
                         std::to_string(state.weights.size()) +
                         " does not match feature size " +
                         std::to_string(feature.size()));
    }

    const double t = static_cast<double>(state.iteration + 1);
    const double gamma = theta / t;
    Vector candidate = (1.0 - gamma) * state.weights + gamma * feature;
    if (!candidate.allFinite()) {
        throw NumericError("sgd_step: update produced non-finite values at step " +
                           std::to_string(state.iteration + 1));
    }

    const double norm = candidate.norm();
    if (stats) {
        stats->max_norm = std::max(stats->max_norm, norm);
        if (norm > radius * (1.0 + kRescaleSlack)) {
            ++stats->rescales;
        }
    }
    if (norm > radius) {
        candidate *= radius / norm;
    }

    state.weights = std::move(candidate);
    ++state.iteration;
}

std::uint64_t iterations_for_accuracy(double epsilon, EpsilonMode mode, double radius) {
    check_radius(radius);
    if (!(epsilon > 0.0) || !std::isfinite(epsilon)) {
        throw InputError("accuracy epsilon must be a positive finite number");
    }
    const double m2 = radius * radius;
    const double needed = mode == EpsilonMode::objective ? m2 / (2.0 * epsilon)
                                                         : m2 / (epsilon * epsilon);
    if (!(needed < kMaxIterations)) {
        throw InputError("accuracy target needs about " + format_g17(needed) +
                         " iterations, beyond what a 64-bit counter supports");
    }
    const double rounded = std::ceil(needed);
    return rounded < 1.0 ? 1 : static_cast<std::uint64_t>(rounded);
}

std::uint64_t resolve_iteration_count(const StopRule& stop, double radius) {
    if (stop.kind == StopRule::Kind::iterations) {
        if (stop.iterations < 1) {
            throw InputError("iteration count must be >= 1");
        }
        return stop.iterations;
    }
    return iterations_for_accuracy(stop.epsilon, stop.mode, radius);
}

ConvergenceBounds theoretical_bounds(std::uint64_t t, double radius, double theta) {
    check_radius(radius);
    check_theta(theta);
    if (t < 1) {
        throw InputError("theoretical_bounds: step index must be >= 1");
    }
    const double m2 = radius * radius;
    ConvergenceBounds bounds;
    bounds.q = std::max(theta * theta * m2 / (2.0 * theta - 1.0), m2);
    bounds.parameter = bounds.q / static_cast<double>(t);
    bounds.objective = bounds.q / (2.0 * static_cast<double>(t));
    return bounds;
}

double score_deviation_bound(std::uint64_t t, double radius, double theta,
                             double feature_norm) {
    if (!(feature_norm >= 0.0) || !std::isfinite(feature_norm)) {
        throw InputError("feature norm must be a finite non-negative number");
    }
    return feature_norm * feature_norm * theoretical_bounds(t, radius, theta).parameter;
}

ModelState run_sgd(const SgdConfig& config, const Matrix& rows, const RksFeatureMap& map,
                   const StepHook& hook, SgdRunStats* stats) {
    check_theta(config.theta);
    check_radius(config.ball_radius);
    if (rows.rows() < 1) {
        throw InputError("run_sgd: training data has no rows");
    }
    if (rows.cols() != map.input_dim) {
        throw InputError("run_sgd: data has " + std::to_string(rows.cols()) +
                         " columns but the feature map expects " +
                         std::to_string(map.input_dim));
    }

    const std::uint64_t total = resolve_iteration_count(config.stop, config.ball_radius);
    const auto n = static_cast<std::uint64_t>(rows.rows());
    if (config.sampling == Sampling::without_replacement && total > n) {
        throw InputError("without-replacement training cannot take " +
                         std::to_string(total) + " steps over " + std::to_string(n) +
                         " rows; reduce the step count or sample with replacement");
    }

    Sampler sampler(config.sampling, rows.rows(), config.seed);
    ModelState state;
    state.weights = Vector::Zero(2 * map.expansions);
    state.iteration = 0;
    state.fingerprint = map.fingerprint();
    if (hook) {
        hook(state);
    }

    for (std::uint64_t step = 0; step < total; ++step) {
        const Index row = sampler.next();
        const Vector feature = embed(map, rows.row(row).transpose());
        sgd_step(state, feature, config.theta, config.ball_radius, stats);
        if (hook) {
            hook(state);
        }
    }
    if (stats) {
        stats->steps = total;
    }
    return state;
}

} // namespace expose
