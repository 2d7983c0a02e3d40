#include "scoring.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <utility>

#include "text_util.hpp"

namespace expose {

namespace {

void check_labels(const Vector& scores, const std::vector<std::int32_t>& labels,
                  const char* what) {
    if (static_cast<Index>(labels.size()) != scores.size()) {
        throw InputError(std::string(what) + ": " + std::to_string(labels.size()) +
                         " labels for " + std::to_string(scores.size()) + " scores");
    }
    for (std::size_t i = 0; i < labels.size(); ++i) {
        if (labels[i] != 0 && labels[i] != 1) {
            throw InputError(std::string(what) + ": label at row " + std::to_string(i) +
                             " is " + std::to_string(labels[i]) +
                             "; labels must be 0 (anomaly) or 1 (normal)");
        }
    }
}

void check_weights(const RksFeatureMap& map, const ModelState& state, const char* what) {
    check_same_map(state.fingerprint, map.fingerprint(), what);
    if (state.weights.size() != 2 * map.expansions) {
        throw InputError(std::string(what) + ": weight vector has " +
                         std::to_string(state.weights.size()) +
                         " entries; the map needs " +
                         std::to_string(2 * map.expansions));
    }
}

// Sorted (score, label) pairs with prefix class counts, shared by the
// threshold sweep and accuracy evaluation.
struct SweepTable {
    std::vector<double> sorted;
    std::vector<Index> anomalies_below; // among entries strictly before index i
    std::vector<Index> normals_below;
    Index total_normals = 0;

    explicit SweepTable(std::vector<std::pair<double, std::int32_t>> pairs) {
        std::sort(pairs.begin(), pairs.end());
        const auto n = static_cast<Index>(pairs.size());
        sorted.resize(pairs.size());
        anomalies_below.resize(pairs.size() + 1, 0);
        normals_below.resize(pairs.size() + 1, 0);
        for (Index i = 0; i < n; ++i) {
            sorted[static_cast<std::size_t>(i)] = pairs[static_cast<std::size_t>(i)].first;
            const bool normal = pairs[static_cast<std::size_t>(i)].second == 1;
            anomalies_below[static_cast<std::size_t>(i) + 1] =
                anomalies_below[static_cast<std::size_t>(i)] + (normal ? 0 : 1);
            normals_below[static_cast<std::size_t>(i) + 1] =
                normals_below[static_cast<std::size_t>(i)] + (normal ? 1 : 0);
        }
        total_normals = normals_below.back();
    }

    Index correct_at(double tau) const {
        const auto k = static_cast<std::size_t>(
            std::lower_bound(sorted.begin(), sorted.end(), tau) - sorted.begin());
        return anomalies_below[k] + (total_normals - normals_below[k]);
    }
};

struct BestThreshold {
    double tau = 0.0;
    double accuracy = 0.0;
};

BestThreshold best_threshold(const SweepTable& table) {
    std::vector<double> candidates;
    candidates.reserve(table.sorted.size() + 1);
    candidates.push_back(table.sorted.front());
    for (std::size_t i = 1; i < table.sorted.size(); ++i) {
        if (table.sorted[i] != table.sorted[i - 1]) {
            candidates.push_back(table.sorted[i - 1] +
                                 0.5 * (table.sorted[i] - table.sorted[i - 1]));
        }
    }
    if (table.sorted.back() != table.sorted.front()) {
        candidates.push_back(table.sorted.back());
    }

    BestThreshold best;
    best.tau = candidates.front();
    Index best_correct = -1;
    for (double tau : candidates) {
        const Index correct = table.correct_at(tau);
        if (correct >= best_correct) {
            best_correct = correct;
            best.tau = tau;
        }
    }
    best.accuracy = static_cast<double>(best_correct) /
                    static_cast<double>(table.sorted.size());
    return best;
}

SweepTable make_table(const Vector& scores, const std::vector<std::int32_t>& labels,
                      int fold, int fold_count, bool keep_fold) {
    std::vector<std::pair<double, std::int32_t>> pairs;
    pairs.reserve(static_cast<std::size_t>(scores.size()));
    for (Index i = 0; i < scores.size(); ++i) {
        const bool in_fold = fold_count > 0 && static_cast<int>(i % fold_count) == fold;
        if (fold_count == 0 || in_fold == keep_fold) {
            pairs.emplace_back(scores(i), labels[static_cast<std::size_t>(i)]);
        }
    }
    return SweepTable(std::move(pairs));
}

} // namespace

double score(const RksFeatureMap& map, const ModelState& state, const Vector& x) {
    check_weights(map, state, "score");
    return embed(map, x).dot(state.weights);
}

Vector score_rows(const RksFeatureMap& map, const ModelState& state, const Matrix& rows) {
    check_weights(map, state, "score_rows");
    if (rows.cols() != map.input_dim) {
        throw InputError("score_rows: data has " + std::to_string(rows.cols()) +
                         " columns but the feature map expects " +
                         std::to_string(map.input_dim));
    }
    const Index r = map.expansions;
    const double scale = 1.0 / std::sqrt(static_cast<double>(r));
    const auto head = state.weights.head(r);
    const auto tail = state.weights.tail(r);
    constexpr Index kBlock = 256;

    Vector out(rows.rows());
    for (Index start = 0; start < rows.rows(); start += kBlock) {
        const Index count = std::min(kBlock, rows.rows() - start);
        Matrix projected = rows.middleRows(start, count) * map.frequencies.transpose();
        out.segment(start, count) =
            (projected.array().cos().matrix() * head +
             projected.array().sin().matrix() * tail) *
            scale;
    }
    return out;
}

ThresholdCalibration calibrate_threshold(const Vector& scores,
                                         const std::vector<std::int32_t>& labels,
                                         int max_folds) {
    check_labels(scores, labels, "calibrate_threshold");
    if (max_folds < 2) {
        throw InputError("calibrate_threshold: needs at least 2 folds");
    }
    if (!scores.allFinite()) {
        throw NumericError("calibrate_threshold: scores contain non-finite values");
    }
    Index normals = 0;
    for (auto v : labels) {
        normals += v;
    }
    if (normals == 0 || normals == scores.size()) {
        throw InputError("calibrate_threshold: needs both classes, got " +
                         std::to_string(normals) + " normal of " +
                         std::to_string(scores.size()) + " rows");
    }

    ThresholdCalibration result;
    if (scores.minCoeff() == scores.maxCoeff()) {
        // Identical scores carry no signal; the only reachable rule marks
        // everything normal.
        result.tau = scores(0);
        result.train_accuracy =
            static_cast<double>(normals) / static_cast<double>(scores.size());
        result.validation_accuracy = result.train_accuracy;
        result.folds = 0;
        result.method = "degenerate";
        return result;
    }

    const int folds = static_cast<int>(
        std::min<Index>(max_folds, scores.size()));
    double held_out_sum = 0.0;
    for (int k = 0; k < folds; ++k) {
        const SweepTable train = make_table(scores, labels, k, folds, false);
        const SweepTable held = make_table(scores, labels, k, folds, true);
        const BestThreshold choice = best_threshold(train);
        held_out_sum += static_cast<double>(held.correct_at(choice.tau)) /
                        static_cast<double>(held.sorted.size());
    }

    const SweepTable all = make_table(scores, labels, 0, 0, false);
    const BestThreshold overall = best_threshold(all);
    result.tau = overall.tau;
    result.train_accuracy = overall.accuracy;
    result.validation_accuracy = held_out_sum / folds;
    result.folds = folds;
    result.method = "cv";
    return result;
}

double classification_error(const Vector& scores,
                            const std::vector<std::int32_t>& labels, double tau) {
    check_labels(scores, labels, "classification_error");
    if (!std::isfinite(tau)) {
        throw InputError("classification_error: threshold must be finite");
    }
    Index wrong = 0;
    for (Index i = 0; i < scores.size(); ++i) {
        const auto verdict = classify(scores(i), tau);
        const auto truth = labels[static_cast<std::size_t>(i)] == 1 ? Verdict::normal
                                                                    : Verdict::anomaly;
        wrong += verdict != truth ? 1 : 0;
    }
    return static_cast<double>(wrong) / static_cast<double>(scores.size());
}

void write_scores_csv(const std::string& path, const Vector& scores,
                      const std::vector<std::int32_t>* labels, const double* tau) {
    if (labels) {
        check_labels(scores, *labels, "write_scores_csv");
    }
    std::ofstream out(path, std::ios::trunc);
    if (!out) {
        throw IoError("cannot open '" + path + "' for writing");
    }
    out << "index,score";
    if (labels) {
        out << ",label";
    }
    if (tau) {
        out << ",prediction";
    }
    out << '\n';
    for (Index i = 0; i < scores.size(); ++i) {
        out << i << ',' << format_g17(scores(i));
        if (labels) {
            out << ',' << (*labels)[static_cast<std::size_t>(i)];
        }
        if (tau) {
            out << ',' << (classify(scores(i), *tau) == Verdict::normal ? 1 : 0);
        }
        out << '\n';
    }
    out.flush();
    if (!out) {
        throw IoError("failed while writing scores to '" + path + "'");
    }
}

} // namespace expose
