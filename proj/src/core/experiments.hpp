#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "data_io.hpp"
#include "dataset.hpp"
#include "sgd.hpp"

namespace expose {

// One diagnostics checkpoint. t counts completed update steps; param_dist is
// the distance of the current weights from the empirical embedding, and
// objective_gap equals half its square by the quadratic identity.
// mean_score_dev averages |score_sgd - score_full| over the test rows.
// err_sgd and err_full are calibrated classification errors of the iterate
// and of the embedding; err_full is constant per run and repeated on every
// record to keep the output flat.
struct DiagnosticsRecord {
    std::uint64_t t = 0;
    double objective_gap = 0.0;
    double param_dist = 0.0;
    double mean_score_dev = 0.0;
    double err_sgd = 0.0;
    double err_full = 0.0;
};

using DiagnosticsSeries = std::vector<DiagnosticsRecord>;

struct ExperimentConfig {
    double bandwidth = 1.0;
    Index expansions = 20000;
    std::int32_t normal_label = 1;
    Index test_size = 10000;
    std::uint64_t eval_every = 200;
    int repetitions = 10;
    std::uint64_t seed = 0;
    double theta = 1.0;
    double ball_radius = 1.0;
    StopRule stop = StopRule::after(1000);
    Sampling sampling = Sampling::without_replacement;
    unsigned threads = 0; // 0 picks the hardware thread count
};

struct ExperimentResult {
    std::vector<DiagnosticsSeries> runs;
    std::vector<std::uint64_t> repetition_seeds;
    std::uint64_t map_seed = 0;
    std::uint64_t split_seed = 0;
    std::uint64_t iterations = 0;
    Index train_rows = 0;
    Index test_rows = 0;
    double wall_seconds = 0.0;
};

// Splits the labeled data into an unlabeled normal training set and a fixed
// labeled test set, embeds the training set once as the reference solution,
// then runs one SGD repetition per derived seed, emitting a record every
// eval_every steps (and at the final step when it is not a multiple).
// Repetitions run concurrently; results are ordered by repetition index, so
// the outcome does not depend on the thread count.
ExperimentResult run_convergence_experiment(const Dataset& data,
                                            const ExperimentConfig& config);

// Pointwise mean over runs of every record field. All runs must share the
// same checkpoint grid.
DiagnosticsSeries aggregate_runs(const std::vector<DiagnosticsSeries>& runs);

// Columns: t,objective_gap,param_dist,mean_score_dev,err_sgd,err_full and,
// when include_bounds is set, bound_param = radius^2/t and bound_obj =
// radius^2/(2t).
void write_diagnostics_csv(const std::string& path, const DiagnosticsSeries& series,
                           bool include_bounds = false, double radius = 1.0);

// Reads the records back, accepting files with or without bound columns.
DiagnosticsSeries read_diagnostics_csv(const std::string& path);

// JSON description of a finished experiment: configuration echo, derived
// seeds, resolved step count, split sizes, generator id and wall-clock time.
void write_run_manifest(const std::string& path, const ExperimentConfig& config,
                        const ExperimentResult& result, const std::string& dataset_name);

} // namespace expose
