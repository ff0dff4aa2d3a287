#pragma once

#include <cstdint>
#include <cstring>
#include <fstream>
#include <set>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include <nlohmann/json.hpp>

#include "polibias/corpus.hpp"
#include "polibias/errors.hpp"
#include "polibias/model.hpp"
#include "polibias/pipeline.hpp"
#include "polibias/vectorizer.hpp"

namespace polibias {

inline constexpr int kModelFormatVersion = 1;

namespace detail {

inline constexpr char kBase64Alphabet[] =
    "ABCDEFGHIJKLMNOPQRSTUVWXYZabcdefghijklmnopqrstuvwxyz0123456789+/";

inline std::string base64_encode(std::span<const std::uint8_t> bytes) {
    std::string out;
    out.reserve((bytes.size() + 2) / 3 * 4);
    std::size_t i = 0;
    for (; i + 3 <= bytes.size(); i += 3) {
        const std::uint32_t v = (static_cast<std::uint32_t>(bytes[i]) << 16) |
                                (static_cast<std::uint32_t>(bytes[i + 1]) << 8) |
                                static_cast<std::uint32_t>(bytes[i + 2]);
        out.push_back(kBase64Alphabet[(v >> 18) & 63]);
        out.push_back(kBase64Alphabet[(v >> 12) & 63]);
        out.push_back(kBase64Alphabet[(v >> 6) & 63]);
        out.push_back(kBase64Alphabet[v & 63]);
    }
    const std::size_t rest = bytes.size() - i;
    if (rest == 1) {
        const std::uint32_t v = static_cast<std::uint32_t>(bytes[i]) << 16;
        out.push_back(kBase64Alphabet[(v >> 18) & 63]);
        out.push_back(kBase64Alphabet[(v >> 12) & 63]);
        out.push_back('=');
        out.push_back('=');
    } else if (rest == 2) {
        const std::uint32_t v = (static_cast<std::uint32_t>(bytes[i]) << 16) |
                                (static_cast<std::uint32_t>(bytes[i + 1]) << 8);
        out.push_back(kBase64Alphabet[(v >> 18) & 63]);
        out.push_back(kBase64Alphabet[(v >> 12) & 63]);
        out.push_back(kBase64Alphabet[(v >> 6) & 63]);
        out.push_back('=');
    }
    return out;
}

inline std::vector<std::uint8_t> base64_decode(std::string_view text) {
    static constexpr auto value_of = [](char c) -> int {
        if (c >= 'A' && c <= 'Z') return c - 'A';
        if (c >= 'a' && c <= 'z') return c - 'a' + 26;
        if (c >= '0' && c <= '9') return c - '0' + 52;
        if (c == '+') return 62;
        if (c == '/') return 63;
        return -1;
    };
    if (text.size() % 4 != 0) throw DataError("base64 payload length is not a multiple of 4");
    std::vector<std::uint8_t> out;
    out.reserve(text.size() / 4 * 3);
    for (std::size_t i = 0; i < text.size(); i += 4) {
        int vals[4];
        int pad = 0;
        for (int k = 0; k < 4; ++k) {
            const char c = text[i + k];
            if (c == '=') {
                if (i + 4 != text.size() || k < 2) throw DataError("invalid base64 padding");
                vals[k] = 0;
                ++pad;
            } else {
                if (pad > 0) throw DataError("invalid base64 padding");
                vals[k] = value_of(c);
                if (vals[k] < 0) throw DataError("invalid base64 character");
            }
        }
        const std::uint32_t v = (static_cast<std::uint32_t>(vals[0]) << 18) |
                                (static_cast<std::uint32_t>(vals[1]) << 12) |
                                (static_cast<std::uint32_t>(vals[2]) << 6) |
                                static_cast<std::uint32_t>(vals[3]);
        out.push_back(static_cast<std::uint8_t>((v >> 16) & 0xFF));
        if (pad < 2) out.push_back(static_cast<std::uint8_t>((v >> 8) & 0xFF));
        if (pad < 1) out.push_back(static_cast<std::uint8_t>(v & 0xFF));
    }
    return out;
}

// float64 array <-> little-endian bytes, independent of host endianness.
inline std::vector<std::uint8_t> doubles_to_le_bytes(std::span<const double> values) {
    std::vector<std::uint8_t> bytes;
    bytes.reserve(values.size() * 8);
    for (const double value : values) {
        std::uint64_t bits;
        std::memcpy(&bits, &value, 8);
        for (int shift = 0; shift < 64; shift += 8)
            bytes.push_back(static_cast<std::uint8_t>((bits >> shift) & 0xFF));
    }
    return bytes;
}

inline std::vector<double> doubles_from_le_bytes(std::span<const std::uint8_t> bytes) {
    if (bytes.size() % 8 != 0) throw DataError("weight payload size is not a multiple of 8");
    std::vector<double> values(bytes.size() / 8);
    for (std::size_t i = 0; i < values.size(); ++i) {
        std::uint64_t bits = 0;
        for (int k = 0; k < 8; ++k)
            bits |= static_cast<std::uint64_t>(bytes[i * 8 + static_cast<std::size_t>(k)]) << (8 * k);
        std::memcpy(&values[i], &bits, 8);
    }
    return values;
}

} // namespace detail

inline nlohmann::ordered_json to_json(const BowConfig& config) {
    return {{"ngram_max", config.ngram_max},
            {"use_tfidf", config.use_tfidf},
            {"min_df", config.min_df},
            {"max_df", config.max_df},
            {"lowercase", config.lowercase}};
}

inline BowConfig bow_config_from_json(const nlohmann::json& j) {
    BowConfig config;
    config.ngram_max = j.value("ngram_max", config.ngram_max);
    config.use_tfidf = j.value("use_tfidf", config.use_tfidf);
    config.min_df = j.value("min_df", config.min_df);
    config.max_df = j.value("max_df", config.max_df);
    config.lowercase = j.value("lowercase", config.lowercase);
    validate(config);
    return config;
}

inline nlohmann::ordered_json to_json(const TrainConfig& config) {
    return {{"gamma", config.gamma},
            {"penalty", std::string(penalty_name(config.penalty))},
            {"tol", config.tol},
            {"max_iter", config.max_iter},
            {"seed", config.seed}};
}

inline TrainConfig train_config_from_json(const nlohmann::json& j) {
    TrainConfig config;
    config.gamma = j.value("gamma", config.gamma);
    if (j.contains("penalty")) config.penalty = penalty_from_name(j.at("penalty").get<std::string>());
    config.tol = j.value("tol", config.tol);
    config.max_iter = j.value("max_iter", config.max_iter);
    config.seed = j.value("seed", config.seed);
    validate(config);
    return config;
}

/// Disjoint manifesto-code sets marking left and right view classes; ships
/// empty and must be configured before the left-right index is available.
struct LrCodeSets {
    std::set<int> left;
    std::set<int> right;

    bool configured() const { return !left.empty() || !right.empty(); }
};

inline void validate(const LrCodeSets& sets) {
    for (const int code : sets.left)
        if (sets.right.count(code))
            throw DataError("manifesto code " + std::to_string(code) +
                            " appears in both the left and right code sets");
}

/// lr = sum of predicted mass on right-set codes minus mass on left-set
/// codes, in [-1, 1]. Classes outside both sets do not contribute.
inline double derive_lr_index(std::span<const double> probabilities,
                              std::span<const std::string> classes, const LrCodeSets& sets) {
    if (probabilities.size() != classes.size())
        throw std::invalid_argument("probability vector length does not match class count");
    if (!sets.configured())
        throw DataError("left/right code sets are not configured; set lr_codes in the config file");
    validate(sets);
    double index = 0.0;
    for (std::size_t k = 0; k < classes.size(); ++k) {
        int code = 0;
        try {
            std::size_t pos = 0;
            code = std::stoi(classes[k], &pos);
            if (pos != classes[k].size()) throw std::invalid_argument(classes[k]);
        } catch (const std::exception&) {
            throw DataError("class label '" + classes[k] + "' is not a manifesto code");
        }
        if (sets.right.count(code)) index += probabilities[k];
        else if (sets.left.count(code)) index -= probabilities[k];
    }
    return index;
}

/// Persisted model: versioned JSON header with the vocabulary in clear
/// text and the float64 weight matrix as a base64 payload, so reloading
/// reproduces predictions bit for bit.
struct ModelFile {
    int format_version = kModelFormatVersion;
    LabelKind task = LabelKind::party;
    TextClassifier classifier;
    TrainConfig train_config;
    std::string generator = "polibias";
};

inline void save_model(const std::string& path, const ModelFile& model) {
    const auto& vocab = model.classifier.vocab;
    const auto& weights = model.classifier.weights;
    if (weights.values.size() != weights.dim * weights.num_classes())
        throw std::invalid_argument("weight matrix size does not match dim x classes");
    if (vocab.dim() != weights.dim)
        throw std::invalid_argument("vocabulary size does not match weight matrix rows");

    nlohmann::ordered_json j;
    j["format_version"] = model.format_version;
    j["task"] = std::string(label_kind_name(model.task));
    nlohmann::ordered_json jv;
    jv["config"] = to_json(vocab.config);
    jv["terms"] = vocab.terms;
    jv["df"] = vocab.df;
    if (vocab.config.use_tfidf) jv["idf"] = vocab.idf;
    j["vocabulary"] = std::move(jv);
    nlohmann::ordered_json jw;
    jw["classes"] = weights.classes;
    jw["dim"] = weights.dim;
    jw["num_classes"] = weights.num_classes();
    jw["data"] = detail::base64_encode(detail::doubles_to_le_bytes(weights.values));
    j["weights"] = std::move(jw);
    j["train_config"] = to_json(model.train_config);
    j["metadata"] = {{"generator", model.generator}};

    std::ofstream out(path, std::ios::binary);
    if (!out) throw DataError("cannot open model file '" + path + "' for writing");
    out << j.dump(2) << '\n';
    if (!out) throw DataError("failed writing model file '" + path + "'");
}

inline ModelFile load_model(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw DataError("cannot open model file '" + path + "'");
    nlohmann::json j;
    try {
        in >> j;
    } catch (const nlohmann::json::exception& e) {
        throw DataError("model file '" + path + "' is not valid JSON: " + e.what());
    }

    ModelFile model;
    try {
        model.format_version = j.at("format_version").get<int>();
        if (model.format_version != kModelFormatVersion)
            throw DataError("model file '" + path + "' has format version " +
                            std::to_string(model.format_version) + ", expected " +
                            std::to_string(kModelFormatVersion));
        model.task = label_kind_from_name(j.at("task").get<std::string>());

        const auto& jv = j.at("vocabulary");
        auto& vocab = model.classifier.vocab;
        vocab.config = bow_config_from_json(jv.at("config"));
        vocab.terms = jv.at("terms").get<std::vector<std::string>>();
        vocab.df = jv.at("df").get<std::vector<std::int64_t>>();
        if (vocab.config.use_tfidf) vocab.idf = jv.at("idf").get<std::vector<double>>();
        if (vocab.df.size() != vocab.terms.size() ||
            (vocab.config.use_tfidf && vocab.idf.size() != vocab.terms.size()))
            throw DataError("model file '" + path + "': vocabulary arrays differ in length");

        const auto& jw = j.at("weights");
        auto& weights = model.classifier.weights;
        weights.classes = jw.at("classes").get<std::vector<std::string>>();
        weights.dim = jw.at("dim").get<std::size_t>();
        const auto num_classes = jw.at("num_classes").get<std::size_t>();
        if (num_classes != weights.classes.size())
            throw DataError("model file '" + path + "': class count mismatch");
        weights.values = detail::doubles_from_le_bytes(
            detail::base64_decode(jw.at("data").get<std::string>()));
        if (weights.values.size() != weights.dim * weights.classes.size())
            throw DataError("model file '" + path + "': weight payload size mismatch");
        if (weights.dim != vocab.dim())
            throw DataError("model file '" + path + "': vocabulary/weight dimension mismatch");

        model.train_config = train_config_from_json(j.at("train_config"));
        if (j.contains("metadata") && j.at("metadata").contains("generator"))
            model.generator = j.at("metadata").at("generator").get<std::string>();
    } catch (const nlohmann::json::exception& e) {
        throw DataError("model file '" + path + "' is malformed: " + e.what());
    }
    return model;
}

} // namespace polibias
