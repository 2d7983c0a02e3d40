/* Plain C consumer of the shared library: verifies the header compiles as C
 * and the exported symbols link and behave. */
#include <expose/expose.h>

#include <math.h>
#include <stdint.h>
#include <stdio.h>
#include <stdlib.h>
#include <string.h>

#define ROWS 12
#define COLS 3
#define EXPANSIONS 16

static int fail(const char* what) {
    fprintf(stderr, "capi_smoke: %s (last_error: %s)\n", what, expose_last_error());
    return 1;
}

int main(void) {
    double values[ROWS * COLS];
    double point[COLS];
    double embedded[2 * EXPANSIONS];
    double weights[2 * EXPANSIONS];
    double score = 0.0;
    double reloaded_score = 0.0;
    double dot = 0.0;
    double norm_sq = 0.0;
    uint64_t steps = 0;
    int i;
    expose_dataset* data = NULL;
    expose_model* model = NULL;
    expose_model* reloaded = NULL;
    expose_sgd_options options;
    const char* model_path = "capi_smoke_model.expose";

    if (expose_version() == NULL || strlen(expose_version()) == 0) {
        return fail("expose_version returned nothing");
    }

    for (i = 0; i < ROWS * COLS; ++i) {
        values[i] = 0.25 * (double)(i % 7) - 0.5;
    }
    if (expose_dataset_from_memory(values, ROWS, COLS, NULL, &data) != EXPOSE_OK) {
        return fail("expose_dataset_from_memory");
    }
    if (expose_dataset_rows(data) != ROWS || expose_dataset_cols(data) != COLS) {
        return fail("dataset shape mismatch");
    }
    if (expose_dataset_has_labels(data) != 0) {
        return fail("unlabeled dataset reports labels");
    }

    if (expose_model_create(COLS, EXPANSIONS, 1.5, 7, &model) != EXPOSE_OK) {
        return fail("expose_model_create");
    }
    if (expose_model_weight_count(model) != 2 * EXPANSIONS) {
        return fail("weight count mismatch");
    }

    for (i = 0; i < COLS; ++i) {
        point[i] = 0.1 * (double)(i + 1);
    }
    if (expose_model_embed(model, point, COLS, embedded, 2 * EXPANSIONS) != EXPOSE_OK) {
        return fail("expose_model_embed");
    }
    for (i = 0; i < 2 * EXPANSIONS; ++i) {
        norm_sq += embedded[i] * embedded[i];
    }
    if (fabs(norm_sq - 1.0) > 1e-12) {
        return fail("embedded point is not unit norm");
    }

    if (expose_model_train_full(model, data) != EXPOSE_OK) {
        return fail("expose_model_train_full");
    }
    if (expose_model_iteration(model) != (uint64_t)ROWS) {
        return fail("iteration after full training");
    }
    if (expose_model_score(model, point, COLS, &score) != EXPOSE_OK) {
        return fail("expose_model_score");
    }
    if (expose_model_copy_weights(model, weights, 2 * EXPANSIONS) != EXPOSE_OK) {
        return fail("expose_model_copy_weights");
    }
    for (i = 0; i < 2 * EXPANSIONS; ++i) {
        dot += embedded[i] * weights[i];
    }
    if (fabs(dot - score) > 1e-12) {
        return fail("score disagrees with embed/weights dot product");
    }

    expose_sgd_options_init(&options);
    options.iterations = 40;
    options.seed = 9;
    if (expose_model_train_sgd(model, data, &options, &steps) != EXPOSE_OK) {
        return fail("expose_model_train_sgd");
    }
    if (steps != 40) {
        return fail("sgd step count mismatch");
    }

    if (expose_model_save(model, model_path) != EXPOSE_OK) {
        return fail("expose_model_save");
    }
    if (expose_model_load(model_path, &reloaded) != EXPOSE_OK) {
        remove(model_path);
        return fail("expose_model_load");
    }
    if (expose_model_score(model, point, COLS, &score) != EXPOSE_OK ||
        expose_model_score(reloaded, point, COLS, &reloaded_score) != EXPOSE_OK) {
        remove(model_path);
        return fail("scoring after reload");
    }
    if (score != reloaded_score) {
        remove(model_path);
        return fail("reloaded model scores differently");
    }

    if (expose_model_create(0, EXPANSIONS, 1.0, 1, &reloaded) !=
        EXPOSE_ERROR_ARGUMENT) {
        remove(model_path);
        return fail("zero input_dim was accepted");
    }
    if (strlen(expose_last_error()) == 0) {
        remove(model_path);
        return fail("failure left last_error empty");
    }

    expose_model_free(reloaded);
    expose_model_free(model);
    expose_dataset_free(data);
    remove(model_path);
    printf("capi smoke ok\n");
    return 0;
}
