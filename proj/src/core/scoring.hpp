#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "embedding.hpp"
#include "kernel.hpp"

namespace expose {

// Likelihood-style score <phi(x), w>. Higher means more typical of the
// training distribution.
double score(const RksFeatureMap& map, const ModelState& state, const Vector& x);

// Scores for every row, computed in blocks so the full embedded matrix never
// exists in memory.
Vector score_rows(const RksFeatureMap& map, const ModelState& state, const Matrix& rows);

enum class Verdict { anomaly = 0, normal = 1 };

// Points scoring at or above the threshold count as normal.
inline Verdict classify(double value, double tau) {
    return value >= tau ? Verdict::normal : Verdict::anomaly;
}

struct ThresholdCalibration {
    double tau = 0.0;
    double validation_accuracy = 0.0; // mean held-out accuracy across folds
    double train_accuracy = 0.0;      // accuracy of tau over all given scores
    int folds = 0;
    std::string method;               // "cv" or "degenerate"
};

// Picks the score threshold by cross-validation: rows are dealt round-robin
// into up to max_folds folds, each fold is scored with the best threshold of
// the remaining folds, and the reported tau is the best threshold over all
// rows. Candidate thresholds are the smallest score, midpoints between
// consecutive distinct sorted scores, and the largest score; accuracy ties
// resolve to the larger threshold. Labels must contain both classes.
ThresholdCalibration calibrate_threshold(const Vector& scores,
                                         const std::vector<std::int32_t>& labels,
                                         int max_folds = 5);

// Fraction of rows whose verdict disagrees with the label.
double classification_error(const Vector& scores,
                            const std::vector<std::int32_t>& labels, double tau);

// Columns: index,score[,label][,prediction]; the prediction column appears
// when a threshold is given and holds 1 for normal, 0 for anomalous.
void write_scores_csv(const std::string& path, const Vector& scores,
                      const std::vector<std::int32_t>* labels = nullptr,
                      const double* tau = nullptr);

} // namespace expose
