#include "data_io.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <limits>
#include <numeric>
#include <random>
#include <set>
#include <string_view>

#include <json.hpp>

#include "text_util.hpp"

namespace expose {

namespace {

std::vector<std::string_view> split_fields(std::string_view line) {
    std::vector<std::string_view> out;
    std::size_t pos = 0;
    while (true) {
        const std::size_t comma = line.find(',', pos);
        if (comma == std::string_view::npos) {
            out.push_back(line.substr(pos));
            return out;
        }
        out.push_back(line.substr(pos, comma - pos));
        pos = comma + 1;
    }
}

std::string location(const std::string& path, std::size_t line, std::size_t column) {
    return path + ":" + std::to_string(line) + ", column " + std::to_string(column);
}

double parse_feature(std::string_view cell, const std::string& path, std::size_t line,
                     std::size_t column) {
    double value = 0.0;
    if (!parse_double(trim(cell), value)) {
        throw FormatError(location(path, line, column) + ": '" + std::string(cell) +
                          "' is not a number");
    }
    if (!std::isfinite(value)) {
        throw FormatError(location(path, line, column) + ": non-finite value '" +
                          std::string(cell) + "'");
    }
    return value;
}

std::int32_t parse_label(std::string_view cell, const std::string& path,
                         std::size_t line, std::size_t column) {
    std::int64_t value = 0;
    if (!parse_i64(trim(cell), value) ||
        value < std::numeric_limits<std::int32_t>::min() ||
        value > std::numeric_limits<std::int32_t>::max()) {
        throw FormatError(location(path, line, column) + ": '" + std::string(cell) +
                          "' is not an integer label");
    }
    return static_cast<std::int32_t>(value);
}

} // namespace

Dataset load_csv(const std::string& path, const CsvOptions& options) {
    std::ifstream in(path);
    if (!in) {
        throw IoError("cannot open '" + path + "' for reading");
    }

    std::vector<double> values;
    std::vector<std::int32_t> labels;
    std::string line;
    std::size_t line_no = 0;
    bool header_pending = options.has_header;
    Index cells_per_row = -1;
    Index rows = 0;

    while (std::getline(in, line)) {
        ++line_no;
        if (trim(line).empty()) {
            continue;
        }
        if (header_pending) {
            header_pending = false;
            continue;
        }
        const auto cells = split_fields(trim(line));
        const auto count = static_cast<Index>(cells.size());
        if (cells_per_row < 0) {
            const Index minimum = options.has_labels ? 2 : 1;
            if (count < minimum) {
                throw FormatError(path + ":" + std::to_string(line_no) + ": a row needs " +
                                  std::to_string(minimum) + " cells, found " +
                                  std::to_string(count));
            }
            cells_per_row = count;
        } else if (count != cells_per_row) {
            throw FormatError(path + ":" + std::to_string(line_no) + ": row has " +
                              std::to_string(count) + " cells; earlier rows have " +
                              std::to_string(cells_per_row));
        }
        for (Index c = 0; c < count; ++c) {
            const auto cell = cells[static_cast<std::size_t>(c)];
            if (trim(cell).empty()) {
                throw FormatError(location(path, line_no, static_cast<std::size_t>(c) + 1) +
                                  ": empty cell");
            }
            if (options.has_labels && c == count - 1) {
                labels.push_back(parse_label(cell, path, line_no,
                                             static_cast<std::size_t>(c) + 1));
            } else {
                values.push_back(parse_feature(cell, path, line_no,
                                               static_cast<std::size_t>(c) + 1));
            }
        }
        ++rows;
    }

    if (rows == 0) {
        throw FormatError("'" + path + "' holds no data rows");
    }

    const Index dim = cells_per_row - (options.has_labels ? 1 : 0);
    Matrix features(rows, dim);
    for (Index i = 0; i < rows; ++i) {
        for (Index j = 0; j < dim; ++j) {
            features(i, j) = values[static_cast<std::size_t>(i * dim + j)];
        }
    }

    std::optional<std::vector<std::int32_t>> label_opt;
    if (options.has_labels) {
        label_opt = std::move(labels);
    }
    return make_dataset(std::move(features), std::move(label_opt), path,
                        "csv:" + path);
}

void write_csv(const std::string& path, const Dataset& data, bool header) {
    std::ofstream out(path, std::ios::trunc);
    if (!out) {
        throw IoError("cannot open '" + path + "' for writing");
    }
    if (header) {
        for (Index j = 0; j < data.cols(); ++j) {
            out << (j ? "," : "") << 'f' << j;
        }
        if (data.has_labels()) {
            out << ",label";
        }
        out << '\n';
    }
    for (Index i = 0; i < data.rows(); ++i) {
        for (Index j = 0; j < data.cols(); ++j) {
            out << (j ? "," : "") << format_g17(data.features(i, j));
        }
        if (data.has_labels()) {
            out << ',' << (*data.labels)[static_cast<std::size_t>(i)];
        }
        out << '\n';
    }
    out.flush();
    if (!out) {
        throw IoError("failed while writing '" + path + "'");
    }
}

namespace {

constexpr std::uint32_t kIdxImagesMagic = 0x00000803;
constexpr std::uint32_t kIdxLabelsMagic = 0x00000801;

std::uint32_t read_be32(std::ifstream& in, const std::string& path) {
    unsigned char bytes[4];
    in.read(reinterpret_cast<char*>(bytes), 4);
    if (in.gcount() != 4) {
        throw FormatError("'" + path + "' ends inside a 4-byte header field");
    }
    return (static_cast<std::uint32_t>(bytes[0]) << 24) |
           (static_cast<std::uint32_t>(bytes[1]) << 16) |
           (static_cast<std::uint32_t>(bytes[2]) << 8) |
           static_cast<std::uint32_t>(bytes[3]);
}

std::string hex32(std::uint32_t value) {
    char buf[11];
    std::snprintf(buf, sizeof(buf), "0x%08x", value);
    return std::string(buf);
}

IdxInfo probe_idx_stream(std::ifstream& in, const std::string& path) {
    IdxInfo info;
    info.magic = read_be32(in, path);
    if ((info.magic & 0xffff0000u) != 0) {
        throw FormatError("'" + path + "' is not an IDX file: magic " +
                          hex32(info.magic) + " does not start with two zero bytes");
    }
    const unsigned ndims = info.magic & 0xffu;
    if (ndims == 0 || ndims > 4) {
        throw FormatError("'" + path + "' declares " + std::to_string(ndims) +
                          " dimensions; expected between 1 and 4");
    }
    for (unsigned i = 0; i < ndims; ++i) {
        info.dims.push_back(static_cast<Index>(read_be32(in, path)));
    }
    return info;
}

std::vector<unsigned char> read_payload(std::ifstream& in, const std::string& path,
                                        std::size_t expected) {
    std::vector<unsigned char> bytes(expected);
    in.read(reinterpret_cast<char*>(bytes.data()),
            static_cast<std::streamsize>(expected));
    if (static_cast<std::size_t>(in.gcount()) != expected) {
        throw FormatError("'" + path + "' payload holds " +
                          std::to_string(in.gcount()) + " bytes; the header promises " +
                          std::to_string(expected));
    }
    return bytes;
}

} // namespace

IdxInfo probe_idx(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) {
        throw IoError("cannot open '" + path + "' for reading");
    }
    return probe_idx_stream(in, path);
}

Dataset load_idx(const std::string& images_path, const std::string& labels_path) {
    std::ifstream images(images_path, std::ios::binary);
    if (!images) {
        throw IoError("cannot open '" + images_path + "' for reading");
    }
    const IdxInfo info = probe_idx_stream(images, images_path);
    if (info.magic != kIdxImagesMagic) {
        throw FormatError("'" + images_path + "' has magic " + hex32(info.magic) +
                          "; an image file needs " + hex32(kIdxImagesMagic));
    }
    const Index count = info.dims[0];
    Index dim = 1;
    for (std::size_t i = 1; i < info.dims.size(); ++i) {
        dim *= info.dims[i];
    }
    if (count < 1 || dim < 1) {
        throw FormatError("'" + images_path + "' declares an empty image set");
    }

    const auto bytes = read_payload(images, images_path,
                                    static_cast<std::size_t>(count) *
                                        static_cast<std::size_t>(dim));
    Matrix features(count, dim);
    for (Index i = 0; i < count; ++i) {
        for (Index j = 0; j < dim; ++j) {
            features(i, j) =
                static_cast<double>(
                    bytes[static_cast<std::size_t>(i) * static_cast<std::size_t>(dim) +
                          static_cast<std::size_t>(j)]) /
                255.0;
        }
    }

    std::optional<std::vector<std::int32_t>> labels;
    if (!labels_path.empty()) {
        std::ifstream label_file(labels_path, std::ios::binary);
        if (!label_file) {
            throw IoError("cannot open '" + labels_path + "' for reading");
        }
        const IdxInfo label_info = probe_idx_stream(label_file, labels_path);
        if (label_info.magic != kIdxLabelsMagic) {
            throw FormatError("'" + labels_path + "' has magic " + hex32(label_info.magic) +
                              "; a label file needs " + hex32(kIdxLabelsMagic));
        }
        if (label_info.dims[0] != count) {
            throw FormatError("image file holds " + std::to_string(count) +
                              " items but label file holds " +
                              std::to_string(label_info.dims[0]));
        }
        const auto label_bytes =
            read_payload(label_file, labels_path, static_cast<std::size_t>(count));
        std::vector<std::int32_t> values(label_bytes.size());
        for (std::size_t i = 0; i < label_bytes.size(); ++i) {
            values[i] = static_cast<std::int32_t>(label_bytes[i]);
        }
        labels = std::move(values);
    }

    return make_dataset(std::move(features), std::move(labels), images_path,
                        "idx:" + images_path + " pixels/255");
}

namespace {

constexpr std::array<int, kKddContinuousCount> continuous_columns() {
    std::array<int, kKddContinuousCount> out{};
    int k = 0;
    for (int c = 0; c < kKddFieldCount; ++c) {
        bool symbolic = false;
        for (int s : kKddSymbolicColumns) {
            symbolic = symbolic || s == c;
        }
        if (!symbolic) {
            out[static_cast<std::size_t>(k++)] = c;
        }
    }
    return out;
}

constexpr auto kKddContinuousColumns = continuous_columns();

struct KddRowView {
    std::array<std::string_view, kKddFieldCount> fields;
    std::string_view label;
};

// Calls fn(row, line_no) for every record in the file.
template <typename Fn>
void scan_kdd(const std::string& path, Fn&& fn) {
    std::ifstream in(path);
    if (!in) {
        throw IoError("cannot open '" + path + "' for reading");
    }
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        const auto trimmed = trim(line);
        if (trimmed.empty()) {
            continue;
        }
        const auto cells = split_fields(trimmed);
        if (cells.size() != kKddFieldCount + 1) {
            throw FormatError(path + ":" + std::to_string(line_no) + ": record has " +
                              std::to_string(cells.size()) + " fields; expected " +
                              std::to_string(kKddFieldCount + 1) +
                              " (41 inputs and a label)");
        }
        KddRowView row;
        for (int c = 0; c < kKddFieldCount; ++c) {
            row.fields[static_cast<std::size_t>(c)] =
                trim(cells[static_cast<std::size_t>(c)]);
        }
        row.label = trim(cells.back());
        fn(row, line_no);
    }
}

bool is_normal_traffic(std::string_view label) {
    return label == "normal" || label == "normal.";
}

struct KddFitState {
    std::array<double, kKddContinuousCount> mins;
    std::array<double, kKddContinuousCount> maxes;
    std::array<std::set<std::string>, kKddSymbolicColumns.size()> vocabularies;
    Index rows = 0;

    KddFitState() {
        mins.fill(std::numeric_limits<double>::infinity());
        maxes.fill(-std::numeric_limits<double>::infinity());
    }

    void update(const KddRowView& row, const std::string& path, std::size_t line_no) {
        for (std::size_t j = 0; j < kKddContinuousColumns.size(); ++j) {
            const int col = kKddContinuousColumns[j];
            const double value = parse_feature(row.fields[static_cast<std::size_t>(col)],
                                               path, line_no,
                                               static_cast<std::size_t>(col) + 1);
            mins[j] = std::min(mins[j], value);
            maxes[j] = std::max(maxes[j], value);
        }
        for (std::size_t s = 0; s < kKddSymbolicColumns.size(); ++s) {
            const int col = kKddSymbolicColumns[s];
            vocabularies[s].emplace(row.fields[static_cast<std::size_t>(col)]);
        }
        ++rows;
    }

    KddTransform transform() const {
        KddTransform out;
        out.mins.assign(mins.begin(), mins.end());
        out.maxes.assign(maxes.begin(), maxes.end());
        for (const auto& vocab : vocabularies) {
            out.vocabularies.emplace_back(vocab.begin(), vocab.end());
        }
        return out;
    }
};

void check_transform_shape(const KddTransform& transform, const char* what) {
    if (transform.mins.size() != kKddContinuousCount ||
        transform.maxes.size() != kKddContinuousCount ||
        transform.vocabularies.size() != kKddSymbolicColumns.size()) {
        throw InputError(std::string(what) + ": transform has " +
                         std::to_string(transform.mins.size()) + " mins, " +
                         std::to_string(transform.maxes.size()) + " maxes and " +
                         std::to_string(transform.vocabularies.size()) +
                         " vocabularies; expected 34, 34 and 7");
    }
}

void fill_kdd_row(const KddTransform& transform, const KddRowView& row,
                  Matrix& features, Index i, const std::string& path,
                  std::size_t line_no) {
    for (std::size_t j = 0; j < kKddContinuousColumns.size(); ++j) {
        const int col = kKddContinuousColumns[j];
        const double value = parse_feature(row.fields[static_cast<std::size_t>(col)],
                                           path, line_no,
                                           static_cast<std::size_t>(col) + 1);
        const double span = transform.maxes[j] - transform.mins[j];
        const double scaled = span > 0.0 ? (value - transform.mins[j]) / span : 0.0;
        features(i, static_cast<Index>(j)) = std::clamp(scaled, 0.0, 1.0);
    }
    Index offset = kKddContinuousCount;
    for (std::size_t s = 0; s < kKddSymbolicColumns.size(); ++s) {
        const auto& vocab = transform.vocabularies[s];
        const auto value = row.fields[static_cast<std::size_t>(kKddSymbolicColumns[s])];
        const auto it = std::lower_bound(vocab.begin(), vocab.end(), value);
        if (it == vocab.end() || *it != value) {
            throw InputError("category '" + std::string(value) + "' in column " +
                             std::to_string(kKddSymbolicColumns[s] + 1) +
                             " was not seen when the transform was fitted");
        }
        features(i, offset + static_cast<Index>(it - vocab.begin())) = 1.0;
        offset += static_cast<Index>(vocab.size());
    }
}

} // namespace

Index KddTransform::output_dim() const {
    Index dim = kKddContinuousCount;
    for (const auto& vocab : vocabularies) {
        dim += static_cast<Index>(vocab.size());
    }
    return dim;
}

std::vector<KddRecord> read_kdd_records(const std::string& path) {
    std::vector<KddRecord> records;
    scan_kdd(path, [&](const KddRowView& row, std::size_t) {
        KddRecord record;
        for (std::size_t c = 0; c < row.fields.size(); ++c) {
            record.fields[c] = std::string(row.fields[c]);
        }
        record.label = std::string(row.label);
        records.push_back(std::move(record));
    });
    return records;
}

Index count_kdd_records(const std::string& path) {
    Index count = 0;
    scan_kdd(path, [&](const KddRowView&, std::size_t) { ++count; });
    return count;
}

namespace {

KddRowView view_of(const KddRecord& record) {
    KddRowView view;
    for (std::size_t c = 0; c < record.fields.size(); ++c) {
        view.fields[c] = record.fields[c];
    }
    view.label = record.label;
    return view;
}

} // namespace

KddTransform fit_kdd_transform(const std::vector<KddRecord>& records) {
    if (records.empty()) {
        throw InputError("cannot fit a transform on zero records");
    }
    KddFitState state;
    for (std::size_t i = 0; i < records.size(); ++i) {
        state.update(view_of(records[i]), "<memory>", i + 1);
    }
    return state.transform();
}

Dataset apply_kdd_transform(const KddTransform& transform,
                            const std::vector<KddRecord>& records, std::string name) {
    check_transform_shape(transform, "apply_kdd_transform");
    if (records.empty()) {
        throw InputError("cannot transform zero records");
    }
    Matrix features = Matrix::Zero(static_cast<Index>(records.size()),
                                   transform.output_dim());
    std::vector<std::int32_t> labels(records.size());
    for (std::size_t i = 0; i < records.size(); ++i) {
        fill_kdd_row(transform, view_of(records[i]), features, static_cast<Index>(i),
                     "<memory>", i + 1);
        labels[i] = is_normal_traffic(records[i].label) ? 1 : 0;
    }
    return make_dataset(std::move(features), std::move(labels), std::move(name),
                        "kdd: 34 continuous min-max to [0,1], 7 one-hot groups");
}

Dataset preprocess_kdd(const std::vector<KddRecord>& records, std::string name) {
    return apply_kdd_transform(fit_kdd_transform(records), records, std::move(name));
}

Dataset load_kdd(const std::string& path) {
    KddFitState state;
    scan_kdd(path, [&](const KddRowView& row, std::size_t line_no) {
        state.update(row, path, line_no);
    });
    if (state.rows == 0) {
        throw FormatError("'" + path + "' holds no records");
    }

    const KddTransform transform = state.transform();
    Matrix features = Matrix::Zero(state.rows, transform.output_dim());
    std::vector<std::int32_t> labels(static_cast<std::size_t>(state.rows));
    Index i = 0;
    scan_kdd(path, [&](const KddRowView& row, std::size_t line_no) {
        fill_kdd_row(transform, row, features, i, path, line_no);
        labels[static_cast<std::size_t>(i)] = is_normal_traffic(row.label) ? 1 : 0;
        ++i;
    });
    if (i != state.rows) {
        throw IoError("'" + path + "' changed between the fitting and transform passes");
    }

    return make_dataset(std::move(features), std::move(labels), path,
                        "kdd:" + path + " 34 continuous min-max to [0,1], 7 one-hot groups");
}

void save_kdd_transform(const std::string& path, const KddTransform& transform) {
    check_transform_shape(transform, "save_kdd_transform");
    nlohmann::json doc;
    doc["format"] = "expose-kdd-transform";
    doc["version"] = 1;
    doc["mins"] = transform.mins;
    doc["maxes"] = transform.maxes;
    doc["vocabularies"] = transform.vocabularies;

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

KddTransform load_kdd_transform(const std::string& path) {
    std::ifstream in(path);
    if (!in) {
        throw IoError("cannot open '" + path + "' for reading");
    }
    nlohmann::json doc;
    try {
        in >> doc;
        if (doc.value("format", "") != "expose-kdd-transform") {
            throw FormatError("'" + path + "' is not a transform file");
        }
        if (doc.value("version", 0) != 1) {
            throw FormatError("transform version in '" + path + "' is not supported");
        }
        KddTransform transform;
        doc.at("mins").get_to(transform.mins);
        doc.at("maxes").get_to(transform.maxes);
        doc.at("vocabularies").get_to(transform.vocabularies);
        check_transform_shape(transform, "load_kdd_transform");
        for (auto& vocab : transform.vocabularies) {
            if (!std::is_sorted(vocab.begin(), vocab.end())) {
                std::sort(vocab.begin(), vocab.end());
            }
        }
        return transform;
    } catch (const nlohmann::json::exception& e) {
        throw FormatError("cannot parse transform file '" + path + "': " + e.what());
    }
}

std::pair<Dataset, Dataset> make_anomaly_split(const Dataset& data,
                                               std::int32_t normal_label,
                                               Index test_size, std::uint64_t seed) {
    if (!data.has_labels()) {
        throw InputError("anomaly split needs labels");
    }
    const auto counts = count_labels(data, normal_label);
    if (counts.normal == 0) {
        throw InputError("label " + std::to_string(normal_label) +
                         " does not occur in dataset '" + data.name + "'");
    }
    const Index n = data.rows();
    if (test_size < 1 || test_size > n) {
        throw InputError("test size " + std::to_string(test_size) +
                         " must be between 1 and " + std::to_string(n));
    }

    std::vector<Index> order(static_cast<std::size_t>(n));
    std::iota(order.begin(), order.end(), Index{0});
    std::mt19937_64 rng(seed);
    for (Index i = 0; i < test_size; ++i) {
        std::uniform_int_distribution<Index> pick(i, n - 1);
        std::swap(order[static_cast<std::size_t>(i)],
                  order[static_cast<std::size_t>(pick(rng))]);
    }

    Matrix test_features(test_size, data.cols());
    std::vector<std::int32_t> test_labels(static_cast<std::size_t>(test_size));
    for (Index i = 0; i < test_size; ++i) {
        const Index row = order[static_cast<std::size_t>(i)];
        test_features.row(i) = data.features.row(row);
        test_labels[static_cast<std::size_t>(i)] =
            (*data.labels)[static_cast<std::size_t>(row)] == normal_label ? 1 : 0;
    }

    std::vector<Index> train_rows;
    for (Index i = test_size; i < n; ++i) {
        const Index row = order[static_cast<std::size_t>(i)];
        if ((*data.labels)[static_cast<std::size_t>(row)] == normal_label) {
            train_rows.push_back(row);
        }
    }
    if (train_rows.empty()) {
        throw InputError("no rows with label " + std::to_string(normal_label) +
                         " remain for training after drawing " +
                         std::to_string(test_size) + " test rows");
    }
    std::sort(train_rows.begin(), train_rows.end());
    Matrix train_features(static_cast<Index>(train_rows.size()), data.cols());
    for (std::size_t i = 0; i < train_rows.size(); ++i) {
        train_features.row(static_cast<Index>(i)) = data.features.row(train_rows[i]);
    }

    const std::string stamp = "split(seed=" + std::to_string(seed) +
                              ", test_size=" + std::to_string(test_size) +
                              ", normal_label=" + std::to_string(normal_label) +
                              ") of " + (data.name.empty() ? "<unnamed>" : data.name);
    Dataset train = make_dataset(std::move(train_features), std::nullopt,
                                 data.name + "/train", "train " + stamp);
    Dataset test = make_dataset(std::move(test_features), std::move(test_labels),
                                data.name + "/test", "test " + stamp);
    return {std::move(train), std::move(test)};
}

} // namespace expose
