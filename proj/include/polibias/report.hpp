#pragma once

#include <cstdio>
#include <fstream>
#include <map>
#include <span>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "polibias/analysis.hpp"
#include "polibias/errors.hpp"
#include "polibias/evaluation.hpp"

namespace polibias {

inline PowerIndicators power_indicators_from_json(const nlohmann::json& j) {
    if (!j.is_object()) throw DataError("power indicators must be a JSON object keyed by party");
    PowerIndicators power;
    try {
        for (const auto& [party, entry] : j.items()) {
            PartyPower p;
            p.seats = entry.at("seats").get<std::int64_t>();
            p.gov_member = entry.at("gov").get<bool>();
            if (p.seats < 0) throw DataError("party '" + party + "' has negative seats");
            power[party] = p;
        }
    } catch (const nlohmann::json::exception& e) {
        throw DataError(std::string("power indicators: ") + e.what());
    }
    return power;
}

inline PowerIndicators load_power_indicators(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw DataError("cannot open power indicator file '" + path + "'");
    nlohmann::json j;
    try {
        in >> j;
    } catch (const nlohmann::json::exception& e) {
        throw DataError("power indicator file '" + path + "' is not valid JSON: " + e.what());
    }
    try {
        return power_indicators_from_json(j);
    } catch (const DataError& e) {
        throw DataError("power indicator file '" + path + "': " + e.what());
    }
}

namespace detail {

inline std::string fmt(double value, int precision) {
    char buf[64];
    std::snprintf(buf, sizeof(buf), "%.*f", precision, value);
    return buf;
}

} // namespace detail

/// Accumulates report sections into machine-readable JSON and a markdown
/// rendering of the same content. Sections that cannot be produced are
/// recorded as notices instead of failing the whole report.
class ReportBuilder {
public:
    void add_evaluation(const ClassReport& report, const ConfusionMatrix& cm) {
        nlohmann::ordered_json je;
        nlohmann::ordered_json rows = nlohmann::ordered_json::array();
        for (const auto& m : report.per_class) {
            nlohmann::ordered_json row{{"label", m.label},
                                       {"precision", m.precision},
                                       {"recall", m.recall},
                                       {"f1", m.f1},
                                       {"support", m.support}};
            if (m.degenerate) row["degenerate"] = true;
            rows.push_back(std::move(row));
        }
        je["per_class"] = std::move(rows);
        je["avg_total"] = {{"precision", report.weighted_precision},
                           {"recall", report.weighted_recall},
                           {"f1", report.weighted_f1},
                           {"support", report.total}};
        je["macro"] = {{"precision", report.macro_precision},
                       {"recall", report.macro_recall},
                       {"f1", report.macro_f1}};
        je["accuracy"] = report.accuracy;
        je["confusion"] = {{"classes", cm.classes}, {"counts", cm.counts}};
        json_["evaluation"] = std::move(je);

        md_ += "## Classification report\n\n";
        md_ += "| class | precision | recall | f1-score | support |\n";
        md_ += "| --- | --- | --- | --- | --- |\n";
        for (const auto& m : report.per_class) {
            md_ += "| " + m.label + " | " + detail::fmt(m.precision, 2) + " | " +
                   detail::fmt(m.recall, 2) + " | " + detail::fmt(m.f1, 2) + " | " +
                   std::to_string(m.support) + (m.degenerate ? " (*)" : "") + " |\n";
        }
        md_ += "| avg / total | " + detail::fmt(report.weighted_precision, 2) + " | " +
               detail::fmt(report.weighted_recall, 2) + " | " + detail::fmt(report.weighted_f1, 2) +
               " | " + std::to_string(report.total) + " |\n\n";
        md_ += "Accuracy: " + detail::fmt(report.accuracy, 4) + ". Macro precision/recall/f1: " +
               detail::fmt(report.macro_precision, 4) + " / " +
               detail::fmt(report.macro_recall, 4) + " / " + detail::fmt(report.macro_f1, 4) +
               ".\n";
        bool any_degenerate = false;
        for (const auto& m : report.per_class) any_degenerate |= m.degenerate;
        if (any_degenerate)
            md_ += "(*) at least one metric fell back to the 0/0 = 0 convention.\n";
        md_ += "\n### Confusion matrix (rows: true, columns: predicted)\n\n";
        md_ += "| true \\ predicted |";
        for (const auto& c : cm.classes) md_ += " " + c + " |";
        md_ += "\n| --- |";
        for (std::size_t i = 0; i < cm.classes.size(); ++i) md_ += " --- |";
        md_ += "\n";
        for (std::size_t r = 0; r < cm.classes.size(); ++r) {
            md_ += "| " + cm.classes[r] + " |";
            for (const auto count : cm.counts[r]) md_ += " " + std::to_string(count) + " |";
            md_ += "\n";
        }
        md_ += "\n";
    }

    void add_sentiment(const std::map<std::string, double>& party_means, std::size_t matched_terms) {
        nlohmann::ordered_json js;
        nlohmann::ordered_json means;
        for (const auto& [party, mean] : party_means) means[party] = mean;
        js["party_means"] = std::move(means);
        js["matched_terms"] = matched_terms;
        json_["sentiment"] = std::move(js);

        md_ += "## Mean sentiment index by party\n\n";
        md_ += "| party | mean sentiment |\n| --- | --- |\n";
        for (const auto& [party, mean] : party_means)
            md_ += "| " + party + " | " + detail::fmt(mean, 4) + " |\n";
        md_ += "\nLexicon terms matched in the vocabulary: " + std::to_string(matched_terms) +
               ".\n\n";
    }

    void add_power(const PowerCorrelation& power) {
        json_["power_correlation"] = {{"r_gov", power.r_gov},
                                      {"r_seats", power.r_seats},
                                      {"n_parties", power.n_parties}};
        md_ += "## Sentiment vs. political power\n\n";
        md_ += "| indicator | pearson r |\n| --- | --- |\n";
        md_ += "| government membership | " + detail::fmt(power.r_gov, 4) + " |\n";
        md_ += "| parliament seats | " + detail::fmt(power.r_seats, 4) + " |\n";
        md_ += "\nParties considered: " + std::to_string(power.n_parties) + ".\n\n";
    }

    void add_word_correlations(std::span<const PartyWordCorrelations> correlations) {
        nlohmann::ordered_json jc = nlohmann::ordered_json::array();
        md_ += "## Word-party correlations\n\n";
        for (const auto& pc : correlations) {
            auto dump = [](std::span<const WordCorrelation> words) {
                nlohmann::ordered_json arr = nlohmann::ordered_json::array();
                for (const auto& w : words) arr.push_back({{"term", w.term}, {"r", w.r}});
                return arr;
            };
            jc.push_back({{"party", pc.party},
                          {"top_positive", dump(pc.top_positive)},
                          {"top_negative", dump(pc.top_negative)}});

            md_ += "### " + pc.party + "\n\n";
            md_ += "| rank | highest r | r | lowest r | r |\n| --- | --- | --- | --- | --- |\n";
            const std::size_t rows = std::max(pc.top_positive.size(), pc.top_negative.size());
            for (std::size_t i = 0; i < rows; ++i) {
                md_ += "| " + std::to_string(i + 1) + " | ";
                if (i < pc.top_positive.size())
                    md_ += pc.top_positive[i].term + " | " + detail::fmt(pc.top_positive[i].r, 4);
                else
                    md_ += " | ";
                md_ += " | ";
                if (i < pc.top_negative.size())
                    md_ += pc.top_negative[i].term + " | " + detail::fmt(pc.top_negative[i].r, 4);
                else
                    md_ += " | ";
                md_ += " |\n";
            }
            md_ += "\n";
        }
        json_["word_correlations"] = std::move(jc);
    }

    void add_notice(const std::string& section, const std::string& reason) {
        notices_.push_back(section + ": " + reason);
    }

    nlohmann::ordered_json json() const {
        nlohmann::ordered_json out = json_;
        if (!notices_.empty()) out["notices"] = notices_;
        return out;
    }

    std::string markdown() const {
        std::string out = "# Report\n\n" + md_;
        if (!notices_.empty()) {
            out += "## Notes\n\n";
            for (const auto& notice : notices_) out += "- " + notice + "\n";
        }
        return out;
    }

private:
    nlohmann::ordered_json json_ = nlohmann::ordered_json::object();
    std::string md_;
    std::vector<std::string> notices_;
};

} // namespace polibias
