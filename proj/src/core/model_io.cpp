#include "model_io.hpp"

#include <charconv>
#include <cstring>
#include <fstream>
#include <iterator>
#include <map>
#include <string_view>
#include <vector>

#include "text_util.hpp"

namespace expose {

namespace {

constexpr char kMagic[] = "EXPOSE-MODEL";
constexpr char kVersion[] = "v1";

std::uint64_t fnv1a(std::uint64_t hash, const char* data, std::size_t size) {
    for (std::size_t i = 0; i < size; ++i) {
        hash ^= static_cast<unsigned char>(data[i]);
        hash *= 1099511628211ULL;
    }
    return hash;
}

void append_le(std::string& out, double value) {
    std::uint64_t bits;
    std::memcpy(&bits, &value, sizeof bits);
    for (int i = 0; i < 8; ++i) {
        out.push_back(static_cast<char>((bits >> (8 * i)) & 0xffu));
    }
}

double decode_le(const char* p) {
    std::uint64_t bits = 0;
    for (int i = 0; i < 8; ++i) {
        bits |= static_cast<std::uint64_t>(static_cast<unsigned char>(p[i])) << (8 * i);
    }
    double value;
    std::memcpy(&value, &bits, sizeof value);
    return value;
}

std::string le_bytes(const Vector& v) {
    std::string out;
    out.reserve(static_cast<std::size_t>(v.size()) * 8);
    for (Index i = 0; i < v.size(); ++i) {
        append_le(out, v(i));
    }
    return out;
}

// Hash of the first regenerated frequency row followed by the weight bytes.
std::uint64_t model_checksum(const RksFeatureMap& map, const Vector& weights) {
    const std::string row = le_bytes(map.frequencies.row(0).transpose());
    const std::string body = le_bytes(weights);
    std::uint64_t hash = fnv1a(14695981039346656037ULL, row.data(), row.size());
    return fnv1a(hash, body.data(), body.size());
}

std::string hex16(std::uint64_t value) {
    char buf[17];
    std::snprintf(buf, sizeof(buf), "%016llx", static_cast<unsigned long long>(value));
    return std::string(buf);
}

bool parse_hex16(std::string_view text, std::uint64_t& out) {
    if (text.size() != 16) {
        return false;
    }
    const char* last = text.data() + text.size();
    auto [ptr, ec] = std::from_chars(text.data(), last, out, 16);
    return ec == std::errc() && ptr == last;
}

std::vector<std::string_view> split_spaces(std::string_view line) {
    std::vector<std::string_view> out;
    std::size_t pos = 0;
    while (pos < line.size()) {
        std::size_t next = line.find(' ', pos);
        if (next == std::string_view::npos) {
            next = line.size();
        }
        if (next > pos) {
            out.push_back(line.substr(pos, next - pos));
        }
        pos = next + 1;
    }
    return out;
}

} // namespace

void save_model(const std::string& path, const ModelBundle& bundle) {
    const RksFeatureMap& map = bundle.map;
    const ModelState& state = bundle.state;
    check_same_map(state.fingerprint, map.fingerprint(), "save_model");
    if (state.weights.size() != 2 * map.expansions) {
        throw InputError("save_model: weight vector has " +
                         std::to_string(state.weights.size()) +
                         " entries; the map needs " +
                         std::to_string(2 * map.expansions));
    }
    if (!state.weights.allFinite()) {
        throw NumericError("save_model: weights contain non-finite values");
    }

    std::string header;
    header += kMagic;
    header += ' ';
    header += kVersion;
    header += " d=" + std::to_string(map.input_dim);
    header += " r=" + std::to_string(map.expansions);
    header += " bandwidth=" + format_g17(map.bandwidth);
    header += " seed=" + std::to_string(map.seed);
    header += " t=" + std::to_string(state.iteration);
    header += " generator=";
    header += kGeneratorId;
    header += " checksum=" + hex16(model_checksum(map, state.weights));
    header += '\n';

    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) {
        throw IoError("cannot open '" + path + "' for writing");
    }
    out << header;
    const std::string body = le_bytes(state.weights);
    out.write(body.data(), static_cast<std::streamsize>(body.size()));
    out.flush();
    if (!out) {
        throw IoError("failed while writing model to '" + path + "'");
    }
}

ModelBundle load_model(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) {
        throw IoError("cannot open '" + path + "' for reading");
    }

    std::string header;
    if (!std::getline(in, header) || header.empty()) {
        throw FormatError("'" + path + "' is not a model file: missing header line");
    }
    const auto tokens = split_spaces(header);
    if (tokens.size() < 2 || tokens[0] != kMagic) {
        throw FormatError("'" + path + "' is not a model file: header does not start with " +
                          std::string(kMagic));
    }
    if (tokens[1] != kVersion) {
        throw FormatError("model version '" + std::string(tokens[1]) +
                          "' is not supported; this build reads " + kVersion);
    }

    std::map<std::string_view, std::string_view> fields;
    for (std::size_t i = 2; i < tokens.size(); ++i) {
        const auto eq = tokens[i].find('=');
        if (eq == std::string_view::npos) {
            throw FormatError("malformed model header token '" + std::string(tokens[i]) + "'");
        }
        fields[tokens[i].substr(0, eq)] = tokens[i].substr(eq + 1);
    }
    for (const char* key : {"d", "r", "bandwidth", "seed", "t", "generator", "checksum"}) {
        if (!fields.count(key)) {
            throw FormatError("model header is missing the '" + std::string(key) + "' field");
        }
    }

    if (fields["generator"] != kGeneratorId) {
        throw FormatError("model was written with generator '" +
                          std::string(fields["generator"]) +
                          "' but this build regenerates frequencies with '" +
                          kGeneratorId + "'");
    }

    std::int64_t dim = 0;
    std::int64_t expansions = 0;
    double bandwidth = 0.0;
    std::uint64_t seed = 0;
    std::uint64_t iteration = 0;
    std::uint64_t declared_checksum = 0;
    if (!parse_i64(fields["d"], dim) || dim < 1) {
        throw FormatError("model header field d='" + std::string(fields["d"]) +
                          "' is not a positive integer");
    }
    if (!parse_i64(fields["r"], expansions) || expansions < 1) {
        throw FormatError("model header field r='" + std::string(fields["r"]) +
                          "' is not a positive integer");
    }
    if (!parse_double(fields["bandwidth"], bandwidth)) {
        throw FormatError("model header field bandwidth='" +
                          std::string(fields["bandwidth"]) + "' is not a number");
    }
    if (!parse_u64(fields["seed"], seed)) {
        throw FormatError("model header field seed='" + std::string(fields["seed"]) +
                          "' is not an unsigned integer");
    }
    if (!parse_u64(fields["t"], iteration)) {
        throw FormatError("model header field t='" + std::string(fields["t"]) +
                          "' is not an unsigned integer");
    }
    if (!parse_hex16(fields["checksum"], declared_checksum)) {
        throw FormatError("model header field checksum='" +
                          std::string(fields["checksum"]) +
                          "' is not 16 hex digits");
    }

    std::string body((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
    const std::size_t expected = static_cast<std::size_t>(2 * expansions) * 8;
    if (body.size() < expected) {
        throw FormatError("model declares " + std::to_string(2 * expansions) +
                          " weights (" + std::to_string(expected) +
                          " payload bytes) but the file holds only " +
                          std::to_string(body.size()) + " bytes");
    }
    if (body.size() > expected) {
        throw FormatError("model payload has " +
                          std::to_string(body.size() - expected) +
                          " trailing bytes after the declared " +
                          std::to_string(2 * expansions) + " weights");
    }

    ModelBundle bundle;
    bundle.map = build_rks_map(make_gaussian_rbf(bandwidth), dim, expansions, seed);
    bundle.state.weights.resize(2 * expansions);
    for (Index i = 0; i < bundle.state.weights.size(); ++i) {
        bundle.state.weights(i) = decode_le(body.data() + static_cast<std::size_t>(i) * 8);
    }

    const std::uint64_t actual = model_checksum(bundle.map, bundle.state.weights);
    if (actual != declared_checksum) {
        throw FormatError("model checksum mismatch: header says " +
                          hex16(declared_checksum) + " but contents hash to " +
                          hex16(actual));
    }
    if (!bundle.state.weights.allFinite()) {
        throw NumericError("model weights contain non-finite values");
    }

    bundle.state.iteration = iteration;
    bundle.state.fingerprint = bundle.map.fingerprint();
    return bundle;
}

} // namespace expose
