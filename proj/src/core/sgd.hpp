#pragma once

#include <cstdint>
#include <functional>

#include "embedding.hpp"
#include "kernel.hpp"
#include "sampler.hpp"

namespace expose {

// Interpretation of an accuracy target: distance of the objective value from
// its minimum, or Euclidean distance of the iterate from the minimizer.
enum class EpsilonMode { objective, parameter };

struct StopRule {
    enum class Kind { iterations, accuracy };

    Kind kind = Kind::iterations;
    std::uint64_t iterations = 1;
    double epsilon = 0.0;
    EpsilonMode mode = EpsilonMode::objective;

    static StopRule after(std::uint64_t iterations) {
        StopRule rule;
        rule.kind = Kind::iterations;
        rule.iterations = iterations;
        return rule;
    }

    static StopRule accurate_to(double epsilon, EpsilonMode mode) {
        StopRule rule;
        rule.kind = Kind::accuracy;
        rule.epsilon = epsilon;
        rule.mode = mode;
        return rule;
    }
};

struct SgdConfig {
    double theta = 1.0;
    double ball_radius = 1.0;
    StopRule stop = StopRule::after(1);
    std::uint64_t seed = 0;
    Sampling sampling = Sampling::with_replacement;
};

// rescales counts projections that moved the iterate by more than floating
// point noise (candidate norm above radius * (1 + 1e-12)); max_norm is the
// largest candidate norm seen before projection.
struct SgdRunStats {
    std::uint64_t steps = 0;
    std::uint64_t rescales = 0;
    double max_norm = 0.0;
};

// Called with the initial state (iteration 0, zero weights) and then after
// every update step. state.iteration counts completed steps.
using StepHook = std::function<void(const ModelState&)>;

// Gradient of the sampled objective 0.5*<w,w> - <phi(X),w> at w.
Vector stochastic_gradient(const Vector& weights, const Vector& feature);

// Nearest point of the centered ball with the given radius.
Vector project_ball(Vector weights, double radius);

// One projected update with step size theta / (completed steps + 1).
void sgd_step(ModelState& state, const Vector& feature, double theta, double radius,
              SgdRunStats* stats = nullptr);

// Number of steps that guarantees the requested expected accuracy:
// ceil(radius^2 / (2 epsilon)) for the objective gap, ceil(radius^2 /
// epsilon^2) for the parameter distance.
std::uint64_t iterations_for_accuracy(double epsilon, EpsilonMode mode,
                                      double radius = 1.0);

std::uint64_t resolve_iteration_count(const StopRule& stop, double radius = 1.0);

// Guarantees that hold after the step sequence gamma_t = theta / t with
// theta > 1/2 inside a ball of the given radius, starting from zero weights:
// E||w_t - w*||^2 <= parameter and E[f(w_t) - f(w*)] <= objective at step t,
// both equal to q scaled by 1/t and 1/(2t).
struct ConvergenceBounds {
    double parameter = 0.0;
    double objective = 0.0;
    double q = 0.0;
};

ConvergenceBounds theoretical_bounds(std::uint64_t t, double radius, double theta);

// Bound on E|<phi(y), w_t> - <phi(y), w*>|^2 for a query point y whose
// feature vector has the given norm.
double score_deviation_bound(std::uint64_t t, double radius, double theta,
                             double feature_norm = 1.0);

// Runs projected stochastic gradient descent over embedded rows drawn by the
// configured sampler, starting from zero weights. Without-replacement runs
// must not request more steps than there are rows.
ModelState run_sgd(const SgdConfig& config, const Matrix& rows, const RksFeatureMap& map,
                   const StepHook& hook = nullptr, SgdRunStats* stats = nullptr);

} // namespace expose
