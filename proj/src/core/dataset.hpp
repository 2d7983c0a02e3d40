#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "error.hpp"
#include "types.hpp"

namespace expose {

// In-memory dataset. Rows are instances, columns are features. Labels, when
// present, are integer class labels; binarized sets use 1 for normal and 0
// for anomalous instances.
struct Dataset {
    Matrix features;
    std::optional<std::vector<std::int32_t>> labels;
    std::string name;
    std::string provenance;

    Index rows() const { return features.rows(); }
    Index cols() const { return features.cols(); }
    bool has_labels() const { return labels.has_value(); }
};

// Validates shape and finiteness and returns the assembled dataset.
// Throws InputError for an empty matrix or a label vector whose length does
// not match the row count; NumericError for non-finite feature values.
Dataset make_dataset(Matrix features, std::optional<std::vector<std::int32_t>> labels,
                     std::string name = "", std::string provenance = "");

// Rows matching normal_label versus the rest. Requires labels.
struct LabelCounts {
    Index normal = 0;
    Index anomalous = 0;
};
LabelCounts count_labels(const Dataset& data, std::int32_t normal_label = 1);

// Copy of the labels with normal_label mapped to 1 and everything else to 0.
std::vector<std::int32_t> binarize_labels(const std::vector<std::int32_t>& labels,
                                          std::int32_t normal_label);

} // namespace expose
