#pragma once

#include <fstream>
#include <optional>
#include <string>

#include <nlohmann/json.hpp>

#include "polibias/corpus.hpp"
#include "polibias/errors.hpp"
#include "polibias/evaluation.hpp"
#include "polibias/model.hpp"
#include "polibias/model_io.hpp"
#include "polibias/vectorizer.hpp"

namespace polibias {

/// Everything the CLI can be told through a single JSON config file.
/// Every key is optional; omitted keys keep the defaults below.
struct AppConfig {
    BowConfig bow;
    TrainConfig train;
    HyperGrid grid = default_hyper_grid();
    GovernmentMap government_map = default_government_map();
    LrCodeSets lr_codes;
    std::string stopwords_path;
    int top_k = 10;
    bool analysis_raw_counts = false;
};

inline HyperGrid hyper_grid_from_json(const nlohmann::json& j) {
    HyperGrid grid = default_hyper_grid();
    if (j.contains("gamma")) grid.gamma = j.at("gamma").get<std::vector<double>>();
    if (j.contains("ngram_max")) grid.ngram_max = j.at("ngram_max").get<std::vector<int>>();
    if (j.contains("use_tfidf")) grid.use_tfidf = j.at("use_tfidf").get<std::vector<bool>>();
    if (j.contains("min_df")) grid.min_df = j.at("min_df").get<std::vector<int>>();
    if (j.contains("max_df")) grid.max_df = j.at("max_df").get<std::vector<double>>();
    validate(grid);
    return grid;
}

inline LrCodeSets lr_codes_from_json(const nlohmann::json& j) {
    LrCodeSets sets;
    if (j.contains("left"))
        for (const auto& code : j.at("left")) sets.left.insert(code.get<int>());
    if (j.contains("right"))
        for (const auto& code : j.at("right")) sets.right.insert(code.get<int>());
    validate(sets);
    return sets;
}

inline AppConfig app_config_from_json(const nlohmann::json& j) {
    AppConfig config;
    try {
        if (j.contains("bow")) config.bow = bow_config_from_json(j.at("bow"));
        if (j.contains("train")) config.train = train_config_from_json(j.at("train"));
        if (j.contains("grid")) config.grid = hyper_grid_from_json(j.at("grid"));
        if (j.contains("government_map"))
            config.government_map = government_map_from_json(j.at("government_map"));
        if (j.contains("lr_codes")) config.lr_codes = lr_codes_from_json(j.at("lr_codes"));
        if (j.contains("stopwords_path"))
            config.stopwords_path = j.at("stopwords_path").get<std::string>();
        if (j.contains("top_k")) {
            config.top_k = j.at("top_k").get<int>();
            if (config.top_k < 1) throw DataError("top_k must be at least 1");
        }
        if (j.contains("analysis")) {
            const auto& ja = j.at("analysis");
            if (ja.contains("use_raw_counts"))
                config.analysis_raw_counts = ja.at("use_raw_counts").get<bool>();
        }
    } catch (const nlohmann::json::exception& e) {
        throw DataError(std::string("config: ") + e.what());
    }
    return config;
}

inline AppConfig load_app_config(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw DataError("cannot open config file '" + path + "'");
    nlohmann::json j;
    try {
        in >> j;
    } catch (const nlohmann::json::exception& e) {
        throw DataError("config file '" + path + "' is not valid JSON: " + e.what());
    }
    if (!j.is_object()) throw DataError("config file '" + path + "' must contain a JSON object");
    try {
        return app_config_from_json(j);
    } catch (const DataError& e) {
        throw DataError("config file '" + path + "': " + e.what());
    }
}

} // namespace polibias
