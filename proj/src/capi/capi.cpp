#include "expose/expose.h"

#include <cstring>
#include <memory>
#include <new>
#include <string>
#include <utility>
#include <vector>

#include "../core/data_io.hpp"
#include "../core/embedding.hpp"
#include "../core/experiments.hpp"
#include "../core/model_io.hpp"
#include "../core/scoring.hpp"
#include "../core/sgd.hpp"

struct expose_dataset {
    expose::Dataset data;
};

struct expose_model {
    expose::RksFeatureMap map;
    expose::ModelState state;
};

namespace {

thread_local std::string g_last_error;

expose_status fail(expose_status code, std::string message) {
    g_last_error = std::move(message);
    return code;
}

expose_status status_of(const expose::Error& e) {
    switch (e.kind()) {
        case expose::ErrorKind::argument:
            return EXPOSE_ERROR_ARGUMENT;
        case expose::ErrorKind::io:
            return EXPOSE_ERROR_IO;
        case expose::ErrorKind::format:
            return EXPOSE_ERROR_FORMAT;
        case expose::ErrorKind::numeric:
            return EXPOSE_ERROR_NUMERIC;
    }
    return EXPOSE_ERROR_INTERNAL;
}

template <typename Fn>
expose_status guarded(Fn&& fn) {
    g_last_error.clear();
    try {
        return fn();
    } catch (const expose::Error& e) {
        return fail(status_of(e), e.what());
    } catch (const std::bad_alloc&) {
        return fail(EXPOSE_ERROR_INTERNAL, "out of memory");
    } catch (const std::exception& e) {
        return fail(EXPOSE_ERROR_INTERNAL, e.what());
    } catch (...) {
        return fail(EXPOSE_ERROR_INTERNAL, "unknown failure");
    }
}

expose::Sampling to_sampling(expose_sampling mode) {
    return mode == EXPOSE_SAMPLING_WITHOUT_REPLACEMENT
               ? expose::Sampling::without_replacement
               : expose::Sampling::with_replacement;
}

expose::EpsilonMode to_epsilon_mode(expose_epsilon_mode mode) {
    return mode == EXPOSE_EPSILON_PARAMETER ? expose::EpsilonMode::parameter
                                            : expose::EpsilonMode::objective;
}

expose::StopRule to_stop_rule(uint64_t iterations, double epsilon,
                              expose_epsilon_mode mode) {
    if (epsilon > 0.0) {
        return expose::StopRule::accurate_to(epsilon, to_epsilon_mode(mode));
    }
    return expose::StopRule::after(iterations);
}

} // namespace

extern "C" {

const char* expose_version(void) {
    return "1.0.0";
}

const char* expose_last_error(void) {
    return g_last_error.c_str();
}

expose_status expose_dataset_load_csv(const char* path, int has_labels, int has_header,
                                      expose_dataset** out) {
    return guarded([&]() -> expose_status {
        if (!path || !out) {
            return fail(EXPOSE_ERROR_ARGUMENT, "path and out must not be null");
        }
        expose::CsvOptions options;
        options.has_labels = has_labels != 0;
        options.has_header = has_header != 0;
        *out = new expose_dataset{expose::load_csv(path, options)};
        return EXPOSE_OK;
    });
}

expose_status expose_dataset_load_idx(const char* images_path, const char* labels_path,
                                      expose_dataset** out) {
    return guarded([&]() -> expose_status {
        if (!images_path || !out) {
            return fail(EXPOSE_ERROR_ARGUMENT, "images_path and out must not be null");
        }
        const std::string labels = labels_path ? labels_path : "";
        *out = new expose_dataset{expose::load_idx(images_path, labels)};
        return EXPOSE_OK;
    });
}

expose_status expose_dataset_load_kdd(const char* path, expose_dataset** out) {
    return guarded([&]() -> expose_status {
        if (!path || !out) {
            return fail(EXPOSE_ERROR_ARGUMENT, "path and out must not be null");
        }
        *out = new expose_dataset{expose::load_kdd(path)};
        return EXPOSE_OK;
    });
}

expose_status expose_dataset_from_memory(const double* values, int64_t rows,
                                         int64_t cols, const int32_t* labels,
                                         expose_dataset** out) {
    return guarded([&]() -> expose_status {
        if (!values || !out) {
            return fail(EXPOSE_ERROR_ARGUMENT, "values and out must not be null");
        }
        if (rows < 1 || cols < 1) {
            return fail(EXPOSE_ERROR_ARGUMENT,
                        "rows and cols must both be at least 1");
        }
        expose::Matrix features(rows, cols);
        for (int64_t i = 0; i < rows; ++i) {
            for (int64_t j = 0; j < cols; ++j) {
                features(i, j) = values[i * cols + j];
            }
        }
        std::optional<std::vector<int32_t>> label_vec;
        if (labels) {
            label_vec.emplace(labels, labels + rows);
        }
        *out = new expose_dataset{expose::make_dataset(
            std::move(features), std::move(label_vec), "<memory>", "from_memory")};
        return EXPOSE_OK;
    });
}

void expose_dataset_free(expose_dataset* data) {
    delete data;
}

int64_t expose_dataset_rows(const expose_dataset* data) {
    return data ? data->data.rows() : 0;
}

int64_t expose_dataset_cols(const expose_dataset* data) {
    return data ? data->data.cols() : 0;
}

int expose_dataset_has_labels(const expose_dataset* data) {
    return data && data->data.has_labels() ? 1 : 0;
}

expose_status expose_dataset_copy_features(const expose_dataset* data, double* out,
                                           int64_t capacity) {
    return guarded([&]() -> expose_status {
        if (!data || !out) {
            return fail(EXPOSE_ERROR_ARGUMENT, "dataset and out must not be null");
        }
        const int64_t needed = data->data.rows() * data->data.cols();
        if (capacity < needed) {
            return fail(EXPOSE_ERROR_ARGUMENT,
                        "capacity " + std::to_string(capacity) + " is below the " +
                            std::to_string(needed) + " values of the dataset");
        }
        for (expose::Index i = 0; i < data->data.rows(); ++i) {
            for (expose::Index j = 0; j < data->data.cols(); ++j) {
                out[i * data->data.cols() + j] = data->data.features(i, j);
            }
        }
        return EXPOSE_OK;
    });
}

expose_status expose_dataset_copy_labels(const expose_dataset* data, int32_t* out,
                                         int64_t capacity) {
    return guarded([&]() -> expose_status {
        if (!data || !out) {
            return fail(EXPOSE_ERROR_ARGUMENT, "dataset and out must not be null");
        }
        if (!data->data.has_labels()) {
            return fail(EXPOSE_ERROR_ARGUMENT, "dataset has no labels");
        }
        const int64_t needed = data->data.rows();
        if (capacity < needed) {
            return fail(EXPOSE_ERROR_ARGUMENT,
                        "capacity " + std::to_string(capacity) + " is below the " +
                            std::to_string(needed) + " labels of the dataset");
        }
        const auto& labels = *data->data.labels;
        std::memcpy(out, labels.data(), labels.size() * sizeof(int32_t));
        return EXPOSE_OK;
    });
}

expose_status expose_dataset_split(const expose_dataset* data, int32_t normal_label,
                                   int64_t test_size, uint64_t seed,
                                   expose_dataset** train_out,
                                   expose_dataset** test_out) {
    return guarded([&]() -> expose_status {
        if (!data || !train_out || !test_out) {
            return fail(EXPOSE_ERROR_ARGUMENT,
                        "dataset, train_out and test_out must not be null");
        }
        auto [train, test] =
            expose::make_anomaly_split(data->data, normal_label, test_size, seed);
        auto train_handle = std::make_unique<expose_dataset>();
        train_handle->data = std::move(train);
        auto test_handle = std::make_unique<expose_dataset>();
        test_handle->data = std::move(test);
        *train_out = train_handle.release();
        *test_out = test_handle.release();
        return EXPOSE_OK;
    });
}

expose_status expose_model_create(int64_t input_dim, int64_t expansions,
                                  double bandwidth, uint64_t seed,
                                  expose_model** out) {
    return guarded([&]() -> expose_status {
        if (!out) {
            return fail(EXPOSE_ERROR_ARGUMENT, "out must not be null");
        }
        auto model = std::make_unique<expose_model>();
        model->map = expose::build_rks_map(expose::make_gaussian_rbf(bandwidth),
                                           input_dim, expansions, seed);
        model->state.weights = expose::Vector::Zero(2 * model->map.expansions);
        model->state.iteration = 0;
        model->state.fingerprint = model->map.fingerprint();
        *out = model.release();
        return EXPOSE_OK;
    });
}

void expose_model_free(expose_model* model) {
    delete model;
}

expose_status expose_model_save(const expose_model* model, const char* path) {
    return guarded([&]() -> expose_status {
        if (!model || !path) {
            return fail(EXPOSE_ERROR_ARGUMENT, "model and path must not be null");
        }
        expose::save_model(path, {model->map, model->state});
        return EXPOSE_OK;
    });
}

expose_status expose_model_load(const char* path, expose_model** out) {
    return guarded([&]() -> expose_status {
        if (!path || !out) {
            return fail(EXPOSE_ERROR_ARGUMENT, "path and out must not be null");
        }
        expose::ModelBundle bundle = expose::load_model(path);
        auto model = std::make_unique<expose_model>();
        model->map = std::move(bundle.map);
        model->state = std::move(bundle.state);
        *out = model.release();
        return EXPOSE_OK;
    });
}

int64_t expose_model_input_dim(const expose_model* model) {
    return model ? model->map.input_dim : 0;
}

int64_t expose_model_expansions(const expose_model* model) {
    return model ? model->map.expansions : 0;
}

double expose_model_bandwidth(const expose_model* model) {
    return model ? model->map.bandwidth : 0.0;
}

uint64_t expose_model_seed(const expose_model* model) {
    return model ? model->map.seed : 0;
}

uint64_t expose_model_iteration(const expose_model* model) {
    return model ? model->state.iteration : 0;
}

int64_t expose_model_weight_count(const expose_model* model) {
    return model ? model->state.weights.size() : 0;
}

expose_status expose_model_copy_weights(const expose_model* model, double* out,
                                        int64_t capacity) {
    return guarded([&]() -> expose_status {
        if (!model || !out) {
            return fail(EXPOSE_ERROR_ARGUMENT, "model and out must not be null");
        }
        const int64_t needed = model->state.weights.size();
        if (capacity < needed) {
            return fail(EXPOSE_ERROR_ARGUMENT,
                        "capacity " + std::to_string(capacity) + " is below the " +
                            std::to_string(needed) + " weights of the model");
        }
        std::memcpy(out, model->state.weights.data(),
                    static_cast<size_t>(needed) * sizeof(double));
        return EXPOSE_OK;
    });
}

expose_status expose_model_train_full(expose_model* model, const expose_dataset* data) {
    return guarded([&]() -> expose_status {
        if (!model || !data) {
            return fail(EXPOSE_ERROR_ARGUMENT, "model and data must not be null");
        }
        model->state = expose::empirical_embedding(model->map, data->data.features);
        return EXPOSE_OK;
    });
}

void expose_sgd_options_init(expose_sgd_options* options) {
    if (!options) {
        return;
    }
    options->theta = 1.0;
    options->ball_radius = 1.0;
    options->iterations = 1000;
    options->epsilon = 0.0;
    options->epsilon_mode = EXPOSE_EPSILON_OBJECTIVE;
    options->sampling = EXPOSE_SAMPLING_WITH_REPLACEMENT;
    options->seed = 0;
}

expose_status expose_model_train_sgd(expose_model* model, const expose_dataset* data,
                                     const expose_sgd_options* options,
                                     uint64_t* iterations_out) {
    return guarded([&]() -> expose_status {
        if (!model || !data || !options) {
            return fail(EXPOSE_ERROR_ARGUMENT,
                        "model, data and options must not be null");
        }
        expose::SgdConfig config;
        config.theta = options->theta;
        config.ball_radius = options->ball_radius;
        config.stop = to_stop_rule(options->iterations, options->epsilon,
                                   options->epsilon_mode);
        config.seed = options->seed;
        config.sampling = to_sampling(options->sampling);

        expose::SgdRunStats stats;
        model->state = expose::run_sgd(config, data->data.features, model->map,
                                       nullptr, &stats);
        if (iterations_out) {
            *iterations_out = stats.steps;
        }
        return EXPOSE_OK;
    });
}

expose_status expose_model_embed(const expose_model* model, const double* point,
                                 int64_t dim, double* out, int64_t capacity) {
    return guarded([&]() -> expose_status {
        if (!model || !point || !out) {
            return fail(EXPOSE_ERROR_ARGUMENT,
                        "model, point and out must not be null");
        }
        if (dim < 1) {
            return fail(EXPOSE_ERROR_ARGUMENT, "dim must be at least 1");
        }
        const int64_t needed = 2 * model->map.expansions;
        if (capacity < needed) {
            return fail(EXPOSE_ERROR_ARGUMENT,
                        "capacity " + std::to_string(capacity) + " is below the " +
                            std::to_string(needed) + " feature values");
        }
        expose::Vector x(dim);
        std::memcpy(x.data(), point, static_cast<size_t>(dim) * sizeof(double));
        const expose::Vector features = expose::embed(model->map, x);
        std::memcpy(out, features.data(), static_cast<size_t>(needed) * sizeof(double));
        return EXPOSE_OK;
    });
}

expose_status expose_model_score(const expose_model* model, const double* point,
                                 int64_t dim, double* out) {
    return guarded([&]() -> expose_status {
        if (!model || !point || !out) {
            return fail(EXPOSE_ERROR_ARGUMENT,
                        "model, point and out must not be null");
        }
        if (dim < 1) {
            return fail(EXPOSE_ERROR_ARGUMENT, "dim must be at least 1");
        }
        expose::Vector x(dim);
        std::memcpy(x.data(), point, static_cast<size_t>(dim) * sizeof(double));
        *out = expose::score(model->map, model->state, x);
        return EXPOSE_OK;
    });
}

expose_status expose_model_score_dataset(const expose_model* model,
                                         const expose_dataset* data, double* out,
                                         int64_t capacity) {
    return guarded([&]() -> expose_status {
        if (!model || !data || !out) {
            return fail(EXPOSE_ERROR_ARGUMENT,
                        "model, data and out must not be null");
        }
        const int64_t needed = data->data.rows();
        if (capacity < needed) {
            return fail(EXPOSE_ERROR_ARGUMENT,
                        "capacity " + std::to_string(capacity) + " is below the " +
                            std::to_string(needed) + " dataset rows");
        }
        const expose::Vector scores =
            expose::score_rows(model->map, model->state, data->data.features);
        std::memcpy(out, scores.data(), static_cast<size_t>(needed) * sizeof(double));
        return EXPOSE_OK;
    });
}

expose_status expose_iterations_for_accuracy(double epsilon, expose_epsilon_mode mode,
                                             double ball_radius, uint64_t* out) {
    return guarded([&]() -> expose_status {
        if (!out) {
            return fail(EXPOSE_ERROR_ARGUMENT, "out must not be null");
        }
        *out = expose::iterations_for_accuracy(epsilon, to_epsilon_mode(mode),
                                               ball_radius);
        return EXPOSE_OK;
    });
}

expose_status expose_calibrate_threshold(const double* scores, const int32_t* labels,
                                         int64_t count, int max_folds, double* tau_out,
                                         double* validation_accuracy_out) {
    return guarded([&]() -> expose_status {
        if (!scores || !labels) {
            return fail(EXPOSE_ERROR_ARGUMENT, "scores and labels must not be null");
        }
        if (count < 1) {
            return fail(EXPOSE_ERROR_ARGUMENT, "count must be at least 1");
        }
        expose::Vector score_vec(count);
        std::memcpy(score_vec.data(), scores, static_cast<size_t>(count) * sizeof(double));
        const std::vector<int32_t> label_vec(labels, labels + count);
        const auto calibration =
            expose::calibrate_threshold(score_vec, label_vec, max_folds);
        if (tau_out) {
            *tau_out = calibration.tau;
        }
        if (validation_accuracy_out) {
            *validation_accuracy_out = calibration.validation_accuracy;
        }
        return EXPOSE_OK;
    });
}

expose_status expose_classification_error(const double* scores, const int32_t* labels,
                                          int64_t count, double tau, double* out) {
    return guarded([&]() -> expose_status {
        if (!scores || !labels || !out) {
            return fail(EXPOSE_ERROR_ARGUMENT,
                        "scores, labels and out must not be null");
        }
        if (count < 1) {
            return fail(EXPOSE_ERROR_ARGUMENT, "count must be at least 1");
        }
        expose::Vector score_vec(count);
        std::memcpy(score_vec.data(), scores, static_cast<size_t>(count) * sizeof(double));
        const std::vector<int32_t> label_vec(labels, labels + count);
        *out = expose::classification_error(score_vec, label_vec, tau);
        return EXPOSE_OK;
    });
}

expose_status expose_write_scores_csv(const char* path, const double* scores,
                                      int64_t count, const int32_t* labels,
                                      const double* tau) {
    return guarded([&]() -> expose_status {
        if (!path || !scores) {
            return fail(EXPOSE_ERROR_ARGUMENT, "path and scores must not be null");
        }
        if (count < 1) {
            return fail(EXPOSE_ERROR_ARGUMENT, "count must be at least 1");
        }
        expose::Vector score_vec(count);
        std::memcpy(score_vec.data(), scores, static_cast<size_t>(count) * sizeof(double));
        std::vector<int32_t> label_vec;
        if (labels) {
            label_vec.assign(labels, labels + count);
        }
        expose::write_scores_csv(path, score_vec, labels ? &label_vec : nullptr, tau);
        return EXPOSE_OK;
    });
}

void expose_experiment_options_init(expose_experiment_options* options) {
    if (!options) {
        return;
    }
    options->bandwidth = 1.0;
    options->expansions = 20000;
    options->normal_label = 1;
    options->test_size = 10000;
    options->eval_every = 200;
    options->repetitions = 10;
    options->seed = 0;
    options->theta = 1.0;
    options->ball_radius = 1.0;
    options->iterations = 1000;
    options->epsilon = 0.0;
    options->epsilon_mode = EXPOSE_EPSILON_OBJECTIVE;
    options->sampling = EXPOSE_SAMPLING_WITHOUT_REPLACEMENT;
    options->threads = 0;
    options->include_bounds = 1;
}

expose_status expose_run_convergence(const expose_dataset* data,
                                     const expose_experiment_options* options,
                                     const char* csv_path, const char* manifest_path) {
    return guarded([&]() -> expose_status {
        if (!data || !options || !csv_path) {
            return fail(EXPOSE_ERROR_ARGUMENT,
                        "data, options and csv_path must not be null");
        }
        expose::ExperimentConfig config;
        config.bandwidth = options->bandwidth;
        config.expansions = options->expansions;
        config.normal_label = options->normal_label;
        config.test_size = options->test_size;
        config.eval_every = options->eval_every;
        config.repetitions = options->repetitions;
        config.seed = options->seed;
        config.theta = options->theta;
        config.ball_radius = options->ball_radius;
        config.stop = to_stop_rule(options->iterations, options->epsilon,
                                   options->epsilon_mode);
        config.sampling = to_sampling(options->sampling);
        config.threads = options->threads;

        const auto result = expose::run_convergence_experiment(data->data, config);
        const auto mean = expose::aggregate_runs(result.runs);
        expose::write_diagnostics_csv(csv_path, mean, options->include_bounds != 0,
                                      options->ball_radius);
        if (manifest_path && manifest_path[0] != '\0') {
            expose::write_run_manifest(manifest_path, config, result,
                                       data->data.name);
        }
        return EXPOSE_OK;
    });
}

} // extern "C"
