#include <cinttypes>
#include <cstdint>
#include <cstdio>
#include <memory>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "expose/expose.h"

namespace {

struct DatasetDeleter {
    void operator()(expose_dataset* data) const { expose_dataset_free(data); }
};
struct ModelDeleter {
    void operator()(expose_model* model) const { expose_model_free(model); }
};
using DatasetPtr = std::unique_ptr<expose_dataset, DatasetDeleter>;
using ModelPtr = std::unique_ptr<expose_model, ModelDeleter>;

// Exit codes: 0 ok, 2 usage, 3 I/O, 4 data validation, 5 numeric failure.
int exit_code(expose_status status) {
    switch (status) {
        case EXPOSE_OK:
            return 0;
        case EXPOSE_ERROR_IO:
            return 3;
        case EXPOSE_ERROR_ARGUMENT:
        case EXPOSE_ERROR_FORMAT:
            return 4;
        case EXPOSE_ERROR_NUMERIC:
            return 5;
        case EXPOSE_ERROR_INTERNAL:
            break;
    }
    return 1;
}

int report(expose_status status) {
    std::fprintf(stderr, "error: %s\n", expose_last_error());
    return exit_code(status);
}

struct DataFlags {
    std::string path;
    std::string format = "csv";
    std::string labels_path;
    bool csv_has_labels = false;
    bool csv_header = false;
};

void add_data_flags(CLI::App* cmd, DataFlags& flags) {
    cmd->add_option("--data", flags.path, "Input data file")->required();
    cmd->add_option("--format", flags.format, "Input format")
        ->check(CLI::IsMember({"csv", "idx", "kdd"}))
        ->capture_default_str();
    cmd->add_option("--labels", flags.labels_path,
                    "Label file for idx data (optional)");
    cmd->add_flag("--csv-has-labels", flags.csv_has_labels,
                  "Treat the last CSV column as integer labels");
    cmd->add_flag("--csv-header", flags.csv_header,
                  "Skip the first non-blank CSV line");
}

int load_data(const DataFlags& flags, DatasetPtr& out) {
    expose_dataset* raw = nullptr;
    expose_status status = EXPOSE_OK;
    if (flags.format == "csv") {
        status = expose_dataset_load_csv(flags.path.c_str(),
                                         flags.csv_has_labels ? 1 : 0,
                                         flags.csv_header ? 1 : 0, &raw);
    } else if (flags.format == "idx") {
        status = expose_dataset_load_idx(
            flags.path.c_str(),
            flags.labels_path.empty() ? nullptr : flags.labels_path.c_str(), &raw);
    } else {
        status = expose_dataset_load_kdd(flags.path.c_str(), &raw);
    }
    if (status != EXPOSE_OK) {
        return report(status);
    }
    out.reset(raw);
    return 0;
}

expose_sampling parse_sampling(const std::string& name) {
    return name == "without" ? EXPOSE_SAMPLING_WITHOUT_REPLACEMENT
                             : EXPOSE_SAMPLING_WITH_REPLACEMENT;
}

expose_epsilon_mode parse_epsilon_mode(const std::string& name) {
    return name == "parameter" ? EXPOSE_EPSILON_PARAMETER : EXPOSE_EPSILON_OBJECTIVE;
}

int binarized_labels(const expose_dataset* data, int32_t normal_label,
                     std::vector<int32_t>& out) {
    const int64_t rows = expose_dataset_rows(data);
    out.resize(static_cast<std::size_t>(rows));
    if (const auto status = expose_dataset_copy_labels(data, out.data(), rows);
        status != EXPOSE_OK) {
        return report(status);
    }
    for (auto& label : out) {
        label = label == normal_label ? 1 : 0;
    }
    return 0;
}

// features: build a feature map with zero weights and save it.
struct FeaturesArgs {
    int64_t input_dim = 0;
    double bandwidth = 0.0;
    int64_t expansions = 20000;
    std::uint64_t seed = 0;
    std::string output = "model.expose";
};

int run_features(const FeaturesArgs& args) {
    expose_model* raw = nullptr;
    if (const auto status = expose_model_create(args.input_dim, args.expansions,
                                                args.bandwidth, args.seed, &raw);
        status != EXPOSE_OK) {
        return report(status);
    }
    ModelPtr model(raw);
    if (const auto status = expose_model_save(model.get(), args.output.c_str());
        status != EXPOSE_OK) {
        return report(status);
    }
    std::printf("wrote feature map (input_dim=%" PRId64 ", expansions=%" PRId64
                ") to %s\n",
                args.input_dim, args.expansions, args.output.c_str());
    return 0;
}

struct TrainArgs {
    DataFlags data;
    std::string map_path;
    double bandwidth = 1.0;
    int64_t expansions = 20000;
    std::uint64_t seed = 0;
    bool full = false;
    std::uint64_t iterations = 0;
    double epsilon = 0.0;
    std::string epsilon_mode = "objective";
    double theta = 1.0;
    double radius = 1.0;
    std::string sampling = "with";
    std::string output = "model.expose";
    bool has_iterations = false;
    bool has_epsilon = false;
};

int run_train(const TrainArgs& args) {
    DatasetPtr data;
    if (const int code = load_data(args.data, data); code != 0) {
        return code;
    }

    ModelPtr model;
    if (!args.map_path.empty()) {
        expose_model* raw = nullptr;
        if (const auto status = expose_model_load(args.map_path.c_str(), &raw);
            status != EXPOSE_OK) {
            return report(status);
        }
        model.reset(raw);
    } else {
        expose_model* raw = nullptr;
        if (const auto status =
                expose_model_create(expose_dataset_cols(data.get()), args.expansions,
                                    args.bandwidth, args.seed, &raw);
            status != EXPOSE_OK) {
            return report(status);
        }
        model.reset(raw);
    }

    if (args.full) {
        if (const auto status = expose_model_train_full(model.get(), data.get());
            status != EXPOSE_OK) {
            return report(status);
        }
        std::printf("trained on all %" PRId64 " rows\n",
                    expose_dataset_rows(data.get()));
    } else {
        expose_sgd_options options;
        expose_sgd_options_init(&options);
        options.theta = args.theta;
        options.ball_radius = args.radius;
        options.iterations = args.iterations;
        options.epsilon = args.has_epsilon ? args.epsilon : 0.0;
        options.epsilon_mode = parse_epsilon_mode(args.epsilon_mode);
        options.sampling = parse_sampling(args.sampling);
        options.seed = args.seed;

        if (args.has_epsilon) {
            std::uint64_t derived = 0;
            if (const auto status = expose_iterations_for_accuracy(
                    options.epsilon, options.epsilon_mode, options.ball_radius,
                    &derived);
                status != EXPOSE_OK) {
                return report(status);
            }
            std::printf("T = %" PRIu64 "\n", derived);
        }

        std::uint64_t steps = 0;
        if (const auto status =
                expose_model_train_sgd(model.get(), data.get(), &options, &steps);
            status != EXPOSE_OK) {
            return report(status);
        }
        std::printf("trained for %" PRIu64 " steps\n", steps);
    }

    if (const auto status = expose_model_save(model.get(), args.output.c_str());
        status != EXPOSE_OK) {
        return report(status);
    }
    std::printf("wrote model to %s\n", args.output.c_str());
    return 0;
}

struct ScoreArgs {
    DataFlags data;
    std::string model_path;
    std::string output = "scores.csv";
    double threshold = 0.0;
    bool has_threshold = false;
};

int run_score(const ScoreArgs& args) {
    expose_model* raw_model = nullptr;
    if (const auto status = expose_model_load(args.model_path.c_str(), &raw_model);
        status != EXPOSE_OK) {
        return report(status);
    }
    ModelPtr model(raw_model);

    DatasetPtr data;
    if (const int code = load_data(args.data, data); code != 0) {
        return code;
    }

    const int64_t rows = expose_dataset_rows(data.get());
    std::vector<double> scores(static_cast<std::size_t>(rows));
    if (const auto status =
            expose_model_score_dataset(model.get(), data.get(), scores.data(), rows);
        status != EXPOSE_OK) {
        return report(status);
    }

    const double* tau = args.has_threshold ? &args.threshold : nullptr;
    if (const auto status = expose_write_scores_csv(args.output.c_str(), scores.data(),
                                                    rows, nullptr, tau);
        status != EXPOSE_OK) {
        return report(status);
    }
    std::printf("wrote %" PRId64 " scores to %s\n", rows, args.output.c_str());
    return 0;
}

struct EvalArgs {
    DataFlags data;
    std::string model_path;
    int32_t normal_label = 1;
    int folds = 5;
    std::string output;
};

int run_eval(const EvalArgs& args) {
    expose_model* raw_model = nullptr;
    if (const auto status = expose_model_load(args.model_path.c_str(), &raw_model);
        status != EXPOSE_OK) {
        return report(status);
    }
    ModelPtr model(raw_model);

    DatasetPtr data;
    if (const int code = load_data(args.data, data); code != 0) {
        return code;
    }
    if (!expose_dataset_has_labels(data.get())) {
        std::fprintf(stderr, "error: evaluation needs labeled data\n");
        return 4;
    }

    const int64_t rows = expose_dataset_rows(data.get());
    std::vector<double> scores(static_cast<std::size_t>(rows));
    if (const auto status =
            expose_model_score_dataset(model.get(), data.get(), scores.data(), rows);
        status != EXPOSE_OK) {
        return report(status);
    }

    std::vector<int32_t> labels;
    if (const int code = binarized_labels(data.get(), args.normal_label, labels);
        code != 0) {
        return code;
    }

    double tau = 0.0;
    double validation_accuracy = 0.0;
    if (const auto status =
            expose_calibrate_threshold(scores.data(), labels.data(), rows, args.folds,
                                       &tau, &validation_accuracy);
        status != EXPOSE_OK) {
        return report(status);
    }
    double error = 0.0;
    if (const auto status = expose_classification_error(scores.data(), labels.data(),
                                                        rows, tau, &error);
        status != EXPOSE_OK) {
        return report(status);
    }

    std::printf("tau = %.17g\n", tau);
    std::printf("validation_accuracy = %.17g\n", validation_accuracy);
    std::printf("classification_error = %.17g\n", error);

    if (!args.output.empty()) {
        if (const auto status = expose_write_scores_csv(
                args.output.c_str(), scores.data(), rows, labels.data(), &tau);
            status != EXPOSE_OK) {
            return report(status);
        }
        std::printf("wrote %" PRId64 " scores to %s\n", rows, args.output.c_str());
    }
    return 0;
}

struct ConvergenceArgs {
    DataFlags data;
    double bandwidth = 1.0;
    int64_t expansions = 20000;
    std::uint64_t seed = 0;
    std::uint64_t iterations = 1000;
    double epsilon = 0.0;
    std::string epsilon_mode = "objective";
    double theta = 1.0;
    double radius = 1.0;
    std::string sampling = "without";
    std::uint64_t eval_every = 200;
    int repetitions = 10;
    int64_t test_size = 10000;
    int32_t normal_label = 1;
    unsigned threads = 0;
    bool no_bounds = false;
    std::string output = "diagnostics.csv";
    std::string manifest;
    bool has_epsilon = false;
};

int run_convergence(const ConvergenceArgs& args) {
    DatasetPtr data;
    if (const int code = load_data(args.data, data); code != 0) {
        return code;
    }

    expose_experiment_options options;
    expose_experiment_options_init(&options);
    options.bandwidth = args.bandwidth;
    options.expansions = args.expansions;
    options.normal_label = args.normal_label;
    options.test_size = args.test_size;
    options.eval_every = args.eval_every;
    options.repetitions = args.repetitions;
    options.seed = args.seed;
    options.theta = args.theta;
    options.ball_radius = args.radius;
    options.iterations = args.iterations;
    options.epsilon = args.has_epsilon ? args.epsilon : 0.0;
    options.epsilon_mode = parse_epsilon_mode(args.epsilon_mode);
    options.sampling = parse_sampling(args.sampling);
    options.threads = args.threads;
    options.include_bounds = args.no_bounds ? 0 : 1;

    const std::string manifest =
        args.manifest.empty() ? args.output + ".manifest.json" : args.manifest;
    if (const auto status = expose_run_convergence(data.get(), &options,
                                                   args.output.c_str(),
                                                   manifest.c_str());
        status != EXPOSE_OK) {
        return report(status);
    }
    std::printf("wrote diagnostics to %s\n", args.output.c_str());
    std::printf("wrote manifest to %s\n", manifest.c_str());
    return 0;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"expose: kernel embedding anomaly detection"};
    app.require_subcommand(1);
    app.set_version_flag("--version", expose_version());

    FeaturesArgs features_args;
    auto* features = app.add_subcommand(
        "features", "Build a random feature map with zero weights");
    features->add_option("--input-dim", features_args.input_dim, "Data dimension")
        ->required();
    features->add_option("--bandwidth", features_args.bandwidth,
                         "Kernel bandwidth (sigma^2)")
        ->required();
    features->add_option("--expansions", features_args.expansions,
                         "Number of random frequencies")
        ->capture_default_str();
    features->add_option("--seed", features_args.seed, "Frequency generator seed")
        ->capture_default_str();
    features->add_option("--output", features_args.output, "Model file to write")
        ->capture_default_str();

    TrainArgs train_args;
    auto* train = app.add_subcommand("train", "Train a model on a dataset");
    add_data_flags(train, train_args.data);
    auto* train_map =
        train->add_option("--map", train_args.map_path,
                          "Reuse the feature map of an existing model file");
    auto* train_bandwidth = train->add_option("--bandwidth", train_args.bandwidth,
                                              "Kernel bandwidth (sigma^2)")
                                ->capture_default_str();
    auto* train_expansions = train->add_option("--expansions", train_args.expansions,
                                               "Number of random frequencies")
                                 ->capture_default_str();
    train->add_option("--seed", train_args.seed,
                      "Seed for the feature map and the sampler")
        ->capture_default_str();
    auto* train_full = train->add_flag("--full", train_args.full,
                                       "Average the embedded rows exactly");
    auto* train_iterations =
        train->add_option("--iterations", train_args.iterations,
                          "Stochastic gradient step count");
    auto* train_epsilon = train->add_option("--epsilon", train_args.epsilon,
                                            "Accuracy target; derives the step count");
    train->add_option("--epsilon-mode", train_args.epsilon_mode,
                      "What epsilon bounds")
        ->check(CLI::IsMember({"objective", "parameter"}))
        ->capture_default_str();
    train->add_option("--theta", train_args.theta, "Step size scale (> 1/2)")
        ->capture_default_str();
    train->add_option("--radius", train_args.radius, "Weight ball radius")
        ->capture_default_str();
    train->add_option("--sampling", train_args.sampling, "Row sampling mode")
        ->check(CLI::IsMember({"with", "without"}))
        ->capture_default_str();
    train->add_option("--output", train_args.output, "Model file to write")
        ->capture_default_str();
    train_map->excludes(train_bandwidth);
    train_map->excludes(train_expansions);
    train_full->excludes(train_iterations);
    train_full->excludes(train_epsilon);
    train_iterations->excludes(train_epsilon);

    ScoreArgs score_args;
    auto* score = app.add_subcommand("score", "Score dataset rows with a model");
    add_data_flags(score, score_args.data);
    score->add_option("--model", score_args.model_path, "Model file")->required();
    score->add_option("--output", score_args.output, "Score CSV to write")
        ->capture_default_str();
    auto* score_threshold =
        score->add_option("--threshold", score_args.threshold,
                          "Add a prediction column using this threshold");

    EvalArgs eval_args;
    auto* eval = app.add_subcommand(
        "eval", "Calibrate a threshold and report the classification error");
    add_data_flags(eval, eval_args.data);
    eval->add_option("--model", eval_args.model_path, "Model file")->required();
    eval->add_option("--normal-label", eval_args.normal_label,
                     "Label treated as the normal class")
        ->capture_default_str();
    eval->add_option("--folds", eval_args.folds, "Cross-validation folds")
        ->capture_default_str();
    eval->add_option("--output", eval_args.output,
                     "Optional score CSV with labels and predictions");

    ConvergenceArgs conv_args;
    auto* convergence = app.add_subcommand(
        "convergence", "Run repeated SGD training against the exact embedding");
    add_data_flags(convergence, conv_args.data);
    convergence->add_option("--bandwidth", conv_args.bandwidth,
                            "Kernel bandwidth (sigma^2)")
        ->required();
    convergence->add_option("--expansions", conv_args.expansions,
                            "Number of random frequencies")
        ->capture_default_str();
    convergence->add_option("--seed", conv_args.seed, "Master seed")
        ->capture_default_str();
    auto* conv_iterations = convergence
                                ->add_option("--iterations", conv_args.iterations,
                                             "Stochastic gradient step count")
                                ->capture_default_str();
    auto* conv_epsilon =
        convergence->add_option("--epsilon", conv_args.epsilon,
                                "Accuracy target; derives the step count");
    convergence->add_option("--epsilon-mode", conv_args.epsilon_mode,
                            "What epsilon bounds")
        ->check(CLI::IsMember({"objective", "parameter"}))
        ->capture_default_str();
    convergence->add_option("--theta", conv_args.theta, "Step size scale (> 1/2)")
        ->capture_default_str();
    convergence->add_option("--radius", conv_args.radius, "Weight ball radius")
        ->capture_default_str();
    convergence->add_option("--sampling", conv_args.sampling, "Row sampling mode")
        ->check(CLI::IsMember({"with", "without"}))
        ->capture_default_str();
    convergence->add_option("--eval-every", conv_args.eval_every,
                            "Steps between diagnostics records")
        ->capture_default_str();
    convergence->add_option("--repetitions", conv_args.repetitions,
                            "Independent training repetitions")
        ->capture_default_str();
    convergence->add_option("--test-size", conv_args.test_size,
                            "Rows drawn into the test split")
        ->capture_default_str();
    convergence->add_option("--normal-label", conv_args.normal_label,
                            "Label treated as the normal class")
        ->capture_default_str();
    convergence->add_option("--threads", conv_args.threads,
                            "Worker threads (0 = hardware)")
        ->capture_default_str();
    convergence->add_flag("--no-bounds", conv_args.no_bounds,
                          "Leave the bound columns out of the CSV");
    convergence->add_option("--output", conv_args.output, "Diagnostics CSV to write")
        ->capture_default_str();
    convergence->add_option("--manifest", conv_args.manifest,
                            "Manifest path (default: <output>.manifest.json)");
    conv_iterations->excludes(conv_epsilon);

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e) ? 2 : 0;
    } catch (const CLI::CallForAllHelp& e) {
        return app.exit(e) ? 2 : 0;
    } catch (const CLI::CallForVersion& e) {
        return app.exit(e) ? 2 : 0;
    } catch (const CLI::ParseError& e) {
        app.exit(e);
        return 2;
    }

    if (features->parsed()) {
        return run_features(features_args);
    }
    if (train->parsed()) {
        train_args.has_iterations = train_iterations->count() > 0;
        train_args.has_epsilon = train_epsilon->count() > 0;
        if (!train_args.full && !train_args.has_iterations && !train_args.has_epsilon) {
            std::fprintf(stderr,
                         "error: pick one of --full, --iterations or --epsilon\n");
            return 2;
        }
        return run_train(train_args);
    }
    if (score->parsed()) {
        score_args.has_threshold = score_threshold->count() > 0;
        return run_score(score_args);
    }
    if (eval->parsed()) {
        return run_eval(eval_args);
    }
    if (convergence->parsed()) {
        conv_args.has_epsilon = conv_epsilon->count() > 0;
        return run_convergence(conv_args);
    }
    return 2;
}
