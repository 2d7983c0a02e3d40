#ifndef EXPOSE_H
#define EXPOSE_H

/* C interface to the expose anomaly detection library.
 *
 * All functions that can fail return an expose_status; EXPOSE_OK means
 * success. On failure expose_last_error() returns a thread-local message
 * describing what went wrong. Handles (expose_dataset, expose_model) are
 * opaque; free them with the matching *_free function. Handles are safe to
 * share across threads for read-only use; concurrent mutation of the same
 * handle is not synchronized. Sizes and counts are in elements, not bytes.
 */

#include <stdint.h>

#if defined(_WIN32)
#  if defined(EXPOSE_BUILD)
#    define EXPOSE_API __declspec(dllexport)
#  else
#    define EXPOSE_API __declspec(dllimport)
#  endif
#else
#  define EXPOSE_API __attribute__((visibility("default")))
#endif

#ifdef __cplusplus
extern "C" {
#endif

typedef enum expose_status {
    EXPOSE_OK = 0,
    EXPOSE_ERROR_ARGUMENT = 1, /* invalid value or combination of arguments */
    EXPOSE_ERROR_IO = 2,       /* file cannot be opened, read or written */
    EXPOSE_ERROR_FORMAT = 3,   /* file contents violate the expected format */
    EXPOSE_ERROR_NUMERIC = 4,  /* non-finite values or numeric breakdown */
    EXPOSE_ERROR_INTERNAL = 5  /* unexpected failure inside the library */
} expose_status;

typedef enum expose_sampling {
    EXPOSE_SAMPLING_WITH_REPLACEMENT = 0,
    EXPOSE_SAMPLING_WITHOUT_REPLACEMENT = 1
} expose_sampling;

typedef enum expose_epsilon_mode {
    EXPOSE_EPSILON_OBJECTIVE = 0, /* target gap of the objective value */
    EXPOSE_EPSILON_PARAMETER = 1  /* target distance from the minimizer */
} expose_epsilon_mode;

typedef struct expose_dataset expose_dataset;
typedef struct expose_model expose_model;

EXPOSE_API const char* expose_version(void);

/* Message for the most recent failure on this thread; empty string if the
 * last call succeeded. The pointer stays valid until the next library call
 * on the same thread. */
EXPOSE_API const char* expose_last_error(void);

/* ---- datasets ---------------------------------------------------------- */

/* Numeric CSV; when has_labels is nonzero the last column holds integer
 * class labels. has_header skips the first non-blank line. */
EXPOSE_API expose_status expose_dataset_load_csv(const char* path, int has_labels,
                                                 int has_header,
                                                 expose_dataset** out);

/* IDX image file, pixel bytes scaled to [0,1]. labels_path may be NULL or
 * empty for unlabeled data. */
EXPOSE_API expose_status expose_dataset_load_idx(const char* images_path,
                                                 const char* labels_path,
                                                 expose_dataset** out);

/* Comma-separated network-connection records (41 fields plus a label):
 * 34 continuous columns min-max rescaled to [0,1] followed by one-hot
 * groups for the 7 symbolic columns; labels become 1 for normal traffic,
 * 0 otherwise. */
EXPOSE_API expose_status expose_dataset_load_kdd(const char* path,
                                                 expose_dataset** out);

/* Copies rows*cols values laid out row-major. labels may be NULL. */
EXPOSE_API expose_status expose_dataset_from_memory(const double* values,
                                                    int64_t rows, int64_t cols,
                                                    const int32_t* labels,
                                                    expose_dataset** out);

EXPOSE_API void expose_dataset_free(expose_dataset* data);

EXPOSE_API int64_t expose_dataset_rows(const expose_dataset* data);
EXPOSE_API int64_t expose_dataset_cols(const expose_dataset* data);
EXPOSE_API int expose_dataset_has_labels(const expose_dataset* data);

/* Row-major copy into out; capacity must be at least rows*cols. */
EXPOSE_API expose_status expose_dataset_copy_features(const expose_dataset* data,
                                                      double* out, int64_t capacity);

/* Copy labels into out; capacity must be at least the row count. */
EXPOSE_API expose_status expose_dataset_copy_labels(const expose_dataset* data,
                                                    int32_t* out, int64_t capacity);

/* Draws test_size rows uniformly as a labeled test set (normal_label mapped
 * to 1, everything else to 0); the remaining rows with normal_label become
 * the unlabeled training set. Deterministic given the seed. */
EXPOSE_API expose_status expose_dataset_split(const expose_dataset* data,
                                              int32_t normal_label, int64_t test_size,
                                              uint64_t seed, expose_dataset** train_out,
                                              expose_dataset** test_out);

/* ---- models ------------------------------------------------------------ */

/* A model is a randomized feature map for a Gaussian RBF kernel (bandwidth
 * is the sigma^2 parameter, expansions the number of random frequencies)
 * plus a weight vector of length 2*expansions. A new model has zero weights;
 * training replaces them. */
EXPOSE_API expose_status expose_model_create(int64_t input_dim, int64_t expansions,
                                             double bandwidth, uint64_t seed,
                                             expose_model** out);

EXPOSE_API void expose_model_free(expose_model* model);

EXPOSE_API expose_status expose_model_save(const expose_model* model, const char* path);
EXPOSE_API expose_status expose_model_load(const char* path, expose_model** out);

EXPOSE_API int64_t expose_model_input_dim(const expose_model* model);
EXPOSE_API int64_t expose_model_expansions(const expose_model* model);
EXPOSE_API double expose_model_bandwidth(const expose_model* model);
EXPOSE_API uint64_t expose_model_seed(const expose_model* model);

/* Completed training steps, or the number of averaged rows after full
 * training. */
EXPOSE_API uint64_t expose_model_iteration(const expose_model* model);

EXPOSE_API int64_t expose_model_weight_count(const expose_model* model);
EXPOSE_API expose_status expose_model_copy_weights(const expose_model* model,
                                                   double* out, int64_t capacity);

/* Sets the weights to the mean embedded row of the dataset. */
EXPOSE_API expose_status expose_model_train_full(expose_model* model,
                                                 const expose_dataset* data);

typedef struct expose_sgd_options {
    double theta;       /* step size scale, gamma_t = theta / t; must be > 1/2 */
    double ball_radius; /* weights stay inside this Euclidean ball */
    uint64_t iterations;
    double epsilon; /* > 0 derives the step count from this accuracy target
                     * and ignores the iterations field */
    expose_epsilon_mode epsilon_mode;
    expose_sampling sampling;
    uint64_t seed;
} expose_sgd_options;

/* Fills in the defaults: theta 1, ball_radius 1, iterations 1000, epsilon 0,
 * objective mode, with-replacement sampling, seed 0. */
EXPOSE_API void expose_sgd_options_init(expose_sgd_options* options);

/* Projected stochastic gradient descent from zero weights over the dataset
 * rows. iterations_out (may be NULL) receives the executed step count,
 * which is derived from epsilon when epsilon > 0. */
EXPOSE_API expose_status expose_model_train_sgd(expose_model* model,
                                                const expose_dataset* data,
                                                const expose_sgd_options* options,
                                                uint64_t* iterations_out);

/* Feature vector of one point; out needs capacity 2*expansions. */
EXPOSE_API expose_status expose_model_embed(const expose_model* model,
                                            const double* point, int64_t dim,
                                            double* out, int64_t capacity);

/* Likelihood-style score of one point; higher means more typical. */
EXPOSE_API expose_status expose_model_score(const expose_model* model,
                                            const double* point, int64_t dim,
                                            double* out);

/* Scores every dataset row; out needs capacity equal to the row count. */
EXPOSE_API expose_status expose_model_score_dataset(const expose_model* model,
                                                    const expose_dataset* data,
                                                    double* out, int64_t capacity);

/* Steps needed to reach the accuracy target in expectation. */
EXPOSE_API expose_status expose_iterations_for_accuracy(double epsilon,
                                                        expose_epsilon_mode mode,
                                                        double ball_radius,
                                                        uint64_t* out);

/* ---- score evaluation --------------------------------------------------- */

/* Cross-validated score threshold for binary labels (1 normal, 0 anomaly).
 * Scores at or above the threshold classify as normal. Either output
 * pointer may be NULL. */
EXPOSE_API expose_status expose_calibrate_threshold(const double* scores,
                                                    const int32_t* labels,
                                                    int64_t count, int max_folds,
                                                    double* tau_out,
                                                    double* validation_accuracy_out);

/* Fraction of rows whose thresholded verdict disagrees with the label. */
EXPOSE_API expose_status expose_classification_error(const double* scores,
                                                     const int32_t* labels,
                                                     int64_t count, double tau,
                                                     double* out);

/* Writes index,score[,label][,prediction] rows; labels and tau may be NULL
 * to drop the respective column. */
EXPOSE_API expose_status expose_write_scores_csv(const char* path,
                                                 const double* scores, int64_t count,
                                                 const int32_t* labels,
                                                 const double* tau);

/* ---- convergence experiments -------------------------------------------- */

typedef struct expose_experiment_options {
    double bandwidth;
    int64_t expansions;
    int32_t normal_label;
    int64_t test_size;
    uint64_t eval_every;
    int repetitions;
    uint64_t seed;
    double theta;
    double ball_radius;
    uint64_t iterations;
    double epsilon; /* > 0 derives the step count, as in expose_sgd_options */
    expose_epsilon_mode epsilon_mode;
    expose_sampling sampling;
    unsigned threads;   /* 0 picks the hardware thread count */
    int include_bounds; /* add bound_param and bound_obj columns to the CSV */
} expose_experiment_options;

/* Fills in the defaults: bandwidth 1, expansions 20000, normal_label 1,
 * test_size 10000, eval_every 200, repetitions 10, seed 0, theta 1,
 * ball_radius 1, iterations 1000, epsilon 0, objective mode,
 * without-replacement sampling, threads 0, bounds included. */
EXPOSE_API void expose_experiment_options_init(expose_experiment_options* options);

/* Runs repeated SGD training against the mean embedding of a train/test
 * split of the labeled dataset and writes the per-checkpoint mean curves
 * (objective gap, parameter distance, score deviation, classification
 * errors) to csv_path. manifest_path (may be NULL) receives a JSON record
 * of the configuration, derived seeds and timing. */
EXPOSE_API expose_status expose_run_convergence(const expose_dataset* data,
                                                const expose_experiment_options* options,
                                                const char* csv_path,
                                                const char* manifest_path);

#ifdef __cplusplus
} /* extern "C" */
#endif

#endif /* EXPOSE_H */
