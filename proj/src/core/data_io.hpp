#pragma once

#include <array>
#include <cstdint>
#include <string>
#include <utility>
#include <vector>

#include "dataset.hpp"

namespace expose {

struct CsvOptions {
    bool has_labels = false; // last column holds integer class labels
    bool has_header = false; // skip the first non-blank line
};

// Numeric CSV with optional trailing label column. Errors carry line and
// column numbers; non-finite values are rejected.
Dataset load_csv(const std::string& path, const CsvOptions& options = {});

// Inverse of load_csv for labeled or unlabeled data. Feature values are
// written with enough digits to round-trip bit-exactly.
void write_csv(const std::string& path, const Dataset& data, bool header = true);

// Shape information from an IDX header without reading the payload.
struct IdxInfo {
    std::uint32_t magic = 0;
    std::vector<Index> dims;
};
IdxInfo probe_idx(const std::string& path);

// IDX image file (magic 0x00000803), optionally paired with an IDX label
// file (magic 0x00000801) of matching item count. Pixels are scaled to
// [0, 1] by dividing the raw bytes by 255; labels stay as written (0-9 for
// handwritten digits).
Dataset load_idx(const std::string& images_path, const std::string& labels_path = "");

// Network-connection records: 41 comma-separated input fields and a label.
inline constexpr std::array<int, 7> kKddSymbolicColumns = {1, 2, 3, 6, 11, 20, 21};
inline constexpr int kKddFieldCount = 41;
inline constexpr int kKddContinuousCount = 34;

struct KddRecord {
    std::array<std::string, kKddFieldCount> fields;
    std::string label;
};

// Fitted preprocessing parameters: per-continuous-column min and max, and
// the sorted category vocabulary of each symbolic column. Transformed rows
// hold the 34 rescaled continuous values followed by the one-hot groups in
// symbolic column order.
struct KddTransform {
    std::vector<double> mins;
    std::vector<double> maxes;
    std::vector<std::vector<std::string>> vocabularies;

    Index output_dim() const;
};

std::vector<KddRecord> read_kdd_records(const std::string& path);
Index count_kdd_records(const std::string& path);

KddTransform fit_kdd_transform(const std::vector<KddRecord>& records);

// Continuous values are rescaled to (x - min) / (max - min), clamped to
// [0, 1] for values outside the fitted range; a constant column maps to 0.
// A category missing from the fitted vocabulary is an error. Labels become
// 1 for normal traffic and 0 for everything else.
Dataset apply_kdd_transform(const KddTransform& transform,
                            const std::vector<KddRecord>& records,
                            std::string name = "");

// fit_kdd_transform + apply_kdd_transform over the same records.
Dataset preprocess_kdd(const std::vector<KddRecord>& records, std::string name = "");

// Streams the file twice (fit, then transform) so raw records never sit in
// memory all at once.
Dataset load_kdd(const std::string& path);

void save_kdd_transform(const std::string& path, const KddTransform& transform);
KddTransform load_kdd_transform(const std::string& path);

// Disjoint train/test split for anomaly detection: test_size rows drawn
// uniformly without replacement form the labeled test set (normal_label
// mapped to 1, everything else to 0); the remaining rows with normal_label
// form the unlabeled training set. Deterministic given the seed.
std::pair<Dataset, Dataset> make_anomaly_split(const Dataset& data,
                                               std::int32_t normal_label,
                                               Index test_size, std::uint64_t seed);

} // namespace expose
