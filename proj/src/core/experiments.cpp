#include "experiments.hpp"

#include <algorithm>
#include <atomic>
#include <chrono>
#include <exception>
#include <fstream>
#include <thread>

#include <json.hpp>

#include "rand_util.hpp"
#include "scoring.hpp"
#include "text_util.hpp"

namespace expose {

namespace {

// Keeps the embedded test matrix when it fits in a fixed memory budget;
// otherwise every checkpoint re-embeds the test rows block by block.
class TestScorer {
public:
    TestScorer(const RksFeatureMap& map, const Matrix& rows) : map_(map), rows_(rows) {
        constexpr Index kBudget = Index{1} << 28; // doubles, about 2 GiB
        if (rows.rows() * 2 * map.expansions <= kBudget) {
            phi_ = embed_rows(map, rows);
        }
    }

    Vector scores(const Vector& weights) const {
        if (phi_.size() > 0) {
            return phi_ * weights;
        }
        ModelState state;
        state.weights = weights;
        state.fingerprint = map_.fingerprint();
        return score_rows(map_, state, rows_);
    }

private:
    const RksFeatureMap& map_;
    const Matrix& rows_;
    Matrix phi_;
};

double calibrated_error(const Vector& scores, const std::vector<std::int32_t>& labels) {
    const auto calibration = calibrate_threshold(scores, labels);
    return classification_error(scores, labels, calibration.tau);
}

std::vector<std::uint64_t> checkpoint_grid(std::uint64_t total, std::uint64_t every) {
    std::vector<std::uint64_t> grid;
    for (std::uint64_t t = every; t <= total; t += every) {
        grid.push_back(t);
    }
    if (grid.empty() || grid.back() != total) {
        grid.push_back(total);
    }
    return grid;
}

} // namespace

ExperimentResult run_convergence_experiment(const Dataset& data,
                                            const ExperimentConfig& config) {
    if (config.eval_every < 1) {
        throw InputError("eval_every must be >= 1");
    }
    if (config.repetitions < 1) {
        throw InputError("repetitions must be >= 1");
    }
    if (!data.has_labels()) {
        throw InputError("a convergence experiment needs labeled data");
    }

    const auto start = std::chrono::steady_clock::now();

    ExperimentResult result;
    result.map_seed = derive_seed(config.seed, 0);
    result.split_seed = derive_seed(config.seed, 1);
    for (int i = 0; i < config.repetitions; ++i) {
        result.repetition_seeds.push_back(
            derive_seed(config.seed, 2 + static_cast<std::uint64_t>(i)));
    }

    auto [train, test] = make_anomaly_split(data, config.normal_label,
                                            config.test_size, result.split_seed);
    const auto test_counts = count_labels(test, 1);
    if (test_counts.normal == 0 || test_counts.anomalous == 0) {
        throw InputError("test split drew only one class (" +
                         std::to_string(test_counts.normal) + " normal of " +
                         std::to_string(test.rows()) +
                         " rows); change the seed or test size");
    }
    result.train_rows = train.rows();
    result.test_rows = test.rows();

    const RksFeatureMap map = build_rks_map(make_gaussian_rbf(config.bandwidth),
                                            train.cols(), config.expansions,
                                            result.map_seed);
    const ModelState mean = empirical_embedding(map, train.features);
    const TestScorer scorer(map, test.features);
    const std::vector<std::int32_t>& labels = *test.labels;

    const Vector full_scores = scorer.scores(mean.weights);
    const double err_full = calibrated_error(full_scores, labels);

    const std::uint64_t total = resolve_iteration_count(config.stop, config.ball_radius);
    const auto grid = checkpoint_grid(total, config.eval_every);
    result.iterations = total;
    result.runs.assign(static_cast<std::size_t>(config.repetitions), {});

    auto run_one = [&](int rep) {
        DiagnosticsSeries& series = result.runs[static_cast<std::size_t>(rep)];
        series.reserve(grid.size());

        SgdConfig sgd;
        sgd.theta = config.theta;
        sgd.ball_radius = config.ball_radius;
        sgd.stop = StopRule::after(total);
        sgd.seed = result.repetition_seeds[static_cast<std::size_t>(rep)];
        sgd.sampling = config.sampling;

        auto hook = [&](const ModelState& state) {
            if (state.iteration == 0 ||
                !std::binary_search(grid.begin(), grid.end(), state.iteration)) {
                return;
            }
            DiagnosticsRecord record;
            record.t = state.iteration;
            record.param_dist = (state.weights - mean.weights).norm();
            record.objective_gap = objective_gap(state, mean);
            const Vector scores = scorer.scores(state.weights);
            record.mean_score_dev = (scores - full_scores).cwiseAbs().mean();
            record.err_sgd = calibrated_error(scores, labels);
            record.err_full = err_full;
            series.push_back(record);
        };

        run_sgd(sgd, train.features, map, hook);
    };

    const unsigned hardware = std::max(1u, std::thread::hardware_concurrency());
    const unsigned requested = config.threads == 0 ? hardware : config.threads;
    const unsigned workers = std::min<unsigned>(
        requested, static_cast<unsigned>(config.repetitions));

    if (workers <= 1) {
        for (int rep = 0; rep < config.repetitions; ++rep) {
            run_one(rep);
        }
    } else {
        std::vector<std::exception_ptr> failures(
            static_cast<std::size_t>(config.repetitions));
        std::atomic<int> next{0};
        auto worker = [&] {
            while (true) {
                const int rep = next.fetch_add(1);
                if (rep >= config.repetitions) {
                    return;
                }
                try {
                    run_one(rep);
                } catch (...) {
                    failures[static_cast<std::size_t>(rep)] = std::current_exception();
                }
            }
        };
        std::vector<std::thread> pool;
        pool.reserve(workers);
        for (unsigned i = 0; i < workers; ++i) {
            pool.emplace_back(worker);
        }
        for (auto& thread : pool) {
            thread.join();
        }
        for (const auto& failure : failures) {
            if (failure) {
                std::rethrow_exception(failure);
            }
        }
    }

    result.wall_seconds =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    return result;
}

DiagnosticsSeries aggregate_runs(const std::vector<DiagnosticsSeries>& runs) {
    if (runs.empty()) {
        throw InputError("aggregate_runs: no runs given");
    }
    const std::size_t length = runs.front().size();
    for (std::size_t i = 1; i < runs.size(); ++i) {
        if (runs[i].size() != length) {
            throw InputError("aggregate_runs: run " + std::to_string(i) + " has " +
                             std::to_string(runs[i].size()) + " records; run 0 has " +
                             std::to_string(length));
        }
        for (std::size_t k = 0; k < length; ++k) {
            if (runs[i][k].t != runs[0][k].t) {
                throw InputError("aggregate_runs: run " + std::to_string(i) +
                                 " records t=" + std::to_string(runs[i][k].t) +
                                 " where run 0 records t=" +
                                 std::to_string(runs[0][k].t));
            }
        }
    }

    DiagnosticsSeries mean(length);
    const double scale = 1.0 / static_cast<double>(runs.size());
    for (std::size_t k = 0; k < length; ++k) {
        mean[k].t = runs[0][k].t;
        for (const auto& run : runs) {
            mean[k].objective_gap += run[k].objective_gap;
            mean[k].param_dist += run[k].param_dist;
            mean[k].mean_score_dev += run[k].mean_score_dev;
            mean[k].err_sgd += run[k].err_sgd;
            mean[k].err_full += run[k].err_full;
        }
        mean[k].objective_gap *= scale;
        mean[k].param_dist *= scale;
        mean[k].mean_score_dev *= scale;
        mean[k].err_sgd *= scale;
        mean[k].err_full *= scale;
    }
    return mean;
}

void write_diagnostics_csv(const std::string& path, const DiagnosticsSeries& series,
                           bool include_bounds, double radius) {
    std::ofstream out(path, std::ios::trunc);
    if (!out) {
        throw IoError("cannot open '" + path + "' for writing");
    }
    out << "t,objective_gap,param_dist,mean_score_dev,err_sgd,err_full";
    if (include_bounds) {
        out << ",bound_param,bound_obj";
    }
    out << '\n';
    const double m2 = radius * radius;
    for (const auto& record : series) {
        out << record.t << ',' << format_g17(record.objective_gap) << ','
            << format_g17(record.param_dist) << ','
            << format_g17(record.mean_score_dev) << ',' << format_g17(record.err_sgd)
            << ',' << format_g17(record.err_full);
        if (include_bounds) {
            const auto t = static_cast<double>(record.t);
            out << ',' << format_g17(m2 / t) << ',' << format_g17(m2 / (2.0 * t));
        }
        out << '\n';
    }
    out.flush();
    if (!out) {
        throw IoError("failed while writing '" + path + "'");
    }
}

DiagnosticsSeries read_diagnostics_csv(const std::string& path) {
    std::ifstream in(path);
    if (!in) {
        throw IoError("cannot open '" + path + "' for reading");
    }
    std::string line;
    if (!std::getline(in, line)) {
        throw FormatError("'" + path + "' is empty");
    }
    const std::string prefix = "t,objective_gap,param_dist,mean_score_dev,err_sgd,err_full";
    if (trim(line).substr(0, prefix.size()) != prefix) {
        throw FormatError("'" + path + "' does not look like a diagnostics file");
    }

    DiagnosticsSeries series;
    std::size_t line_no = 1;
    while (std::getline(in, line)) {
        ++line_no;
        const auto trimmed = trim(line);
        if (trimmed.empty()) {
            continue;
        }
        std::vector<std::string_view> cells;
        std::size_t pos = 0;
        while (true) {
            const auto comma = trimmed.find(',', pos);
            if (comma == std::string_view::npos) {
                cells.push_back(trimmed.substr(pos));
                break;
            }
            cells.push_back(trimmed.substr(pos, comma - pos));
            pos = comma + 1;
        }
        if (cells.size() < 6) {
            throw FormatError(path + ":" + std::to_string(line_no) +
                              ": expected at least 6 columns, found " +
                              std::to_string(cells.size()));
        }
        DiagnosticsRecord record;
        double field = 0.0;
        if (!parse_u64(cells[0], record.t)) {
            throw FormatError(path + ":" + std::to_string(line_no) +
                              ": '" + std::string(cells[0]) + "' is not a step index");
        }
        const auto read_field = [&](std::size_t c) {
            if (!parse_double(cells[c], field)) {
                throw FormatError(path + ":" + std::to_string(line_no) + ": '" +
                                  std::string(cells[c]) + "' is not a number");
            }
            return field;
        };
        record.objective_gap = read_field(1);
        record.param_dist = read_field(2);
        record.mean_score_dev = read_field(3);
        record.err_sgd = read_field(4);
        record.err_full = read_field(5);
        series.push_back(record);
    }
    return series;
}

void write_run_manifest(const std::string& path, const ExperimentConfig& config,
                        const ExperimentResult& result,
                        const std::string& dataset_name) {
    nlohmann::json doc;
    doc["format"] = "expose-run-manifest";
    doc["version"] = 1;
    doc["dataset"] = dataset_name;
    doc["generator"] = kGeneratorId;

    nlohmann::json cfg;
    cfg["bandwidth"] = config.bandwidth;
    cfg["expansions"] = config.expansions;
    cfg["normal_label"] = config.normal_label;
    cfg["test_size"] = config.test_size;
    cfg["eval_every"] = config.eval_every;
    cfg["repetitions"] = config.repetitions;
    cfg["seed"] = config.seed;
    cfg["theta"] = config.theta;
    cfg["ball_radius"] = config.ball_radius;
    cfg["sampling"] = sampling_name(config.sampling);
    if (config.stop.kind == StopRule::Kind::iterations) {
        cfg["stop"] = {{"iterations", config.stop.iterations}};
    } else {
        cfg["stop"] = {{"epsilon", config.stop.epsilon},
                       {"epsilon_mode", config.stop.mode == EpsilonMode::objective
                                            ? "objective"
                                            : "parameter"}};
    }
    doc["config"] = cfg;

    doc["derived"] = {{"map_seed", result.map_seed},
                      {"split_seed", result.split_seed},
                      {"repetition_seeds", result.repetition_seeds},
                      {"iterations", result.iterations},
                      {"train_rows", result.train_rows},
                      {"test_rows", result.test_rows}};
    doc["wall_seconds"] = result.wall_seconds;

    std::ofstream out(path, std::ios::trunc);
    if (!out) {
        throw IoError("cannot open '" + path + "' for writing");
    }
    out << doc.dump(2) << '\n';
    out.flush();
    if (!out) {
        throw IoError("failed while writing '" + path + "'");
    }
}

} // namespace expose
