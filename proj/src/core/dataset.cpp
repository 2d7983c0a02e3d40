#include "dataset.hpp"

#include <string>
#include <utility>

namespace expose {

Dataset make_dataset(Matrix features, std::optional<std::vector<std::int32_t>> labels,
                     std::string name, std::string provenance) {
    if (features.rows() < 1 || features.cols() < 1) {
        throw InputError("dataset must have at least one row and one column, got " +
                         std::to_string(features.rows()) + "x" +
                         std::to_string(features.cols()));
    }
    if (!features.allFinite()) {
        throw NumericError("dataset contains non-finite feature values");
    }
    if (labels && static_cast<Index>(labels->size()) != features.rows()) {
        throw InputError("label count " + std::to_string(labels->size()) +
                         " does not match row count " +
                         std::to_string(features.rows()));
    }

    Dataset out;
    out.features = std::move(features);
    out.labels = std::move(labels);
    out.name = std::move(name);
    out.provenance = std::move(provenance);
    return out;
}

LabelCounts count_labels(const Dataset& data, std::int32_t normal_label) {
    if (!data.has_labels()) {
        throw InputError("dataset '" + data.name + "' has no labels");
    }
    LabelCounts counts;
    for (auto v : *data.labels) {
        if (v == normal_label) {
            ++counts.normal;
        } else {
            ++counts.anomalous;
        }
    }
    return counts;
}

std::vector<std::int32_t> binarize_labels(const std::vector<std::int32_t>& labels,
                                          std::int32_t normal_label) {
    std::vector<std::int32_t> out(labels.size());
    for (std::size_t i = 0; i < labels.size(); ++i) {
        out[i] = labels[i] == normal_label ? 1 : 0;
    }
    return out;
}

} // namespace expose
