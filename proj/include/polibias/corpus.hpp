#pragma once

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <map>
#include <optional>
#include <random>
#include <set>
#include <stdexcept>
#include <string>
#include <string_view>
#include <unordered_set>
#include <utility>
#include <vector>

#include <nlohmann/json.hpp>

#include "polibias/errors.hpp"
#include "polibias/random.hpp"

namespace polibias {

enum class Source { parliament, manifesto };
enum class LabelKind { party, government, view };

inline std::string_view label_kind_name(LabelKind kind) {
    switch (kind) {
        case LabelKind::party: return "party";
        case LabelKind::government: return "government";
        case LabelKind::view: return "view";
    }
    return "?";
}

inline LabelKind label_kind_from_name(std::string_view name) {
    if (name == "party") return LabelKind::party;
    if (name == "government") return LabelKind::government;
    if (name == "view") return LabelKind::view;
    throw std::invalid_argument("unknown task '" + std::string(name) +
                                "' (expected party, government or view)");
}

/// One labeled text span: an uninterrupted speech segment or a single
/// annotated manifesto statement.
struct SemanticUnit {
    std::string id;
    std::string text;
    std::string party;               // empty = absent
    std::optional<int> view_code;    // manifesto code, absent for speeches
    int period = 0;
    Source source = Source::parliament;
};

/// Political domain derived from the leading digit of a manifesto code.
struct DomainInfo {
    int id = 0;
    std::string_view name;
};

/// First digit of a 3-digit manifesto code names one of 8 political
/// domains; code 0 is the undefined topic.
inline DomainInfo derive_domain(int code) {
    if (code < 0 || code > 999)
        throw DataError("manifesto code " + std::to_string(code) + " outside [0, 999]");
    static constexpr std::string_view names[] = {
        "undefined",
        "External Relations",
        "Freedom and Democracy",
        "Political System",
        "Economy",
        "Welfare and Quality of Life",
        "Fabric of Society",
        "Social Groups",
    };
    const int id = code / 100;
    return {id, id <= 7 ? names[id] : names[0]};
}

inline std::string render_code3(int code) {
    char buf[8];
    std::snprintf(buf, sizeof(buf), "%03d", code);
    return buf;
}

/// Government parties per legislative period. The plain file form lists
/// only the governing parties and treats everything else as opposition;
/// the extended form also pins the opposition set, making unknown parties
/// an error.
struct GovernmentMap {
    struct Entry {
        std::set<std::string> government;
        std::optional<std::set<std::string>> opposition;
    };
    std::map<int, Entry> periods;
};

inline GovernmentMap default_government_map() {
    GovernmentMap map;
    map.periods[17] = {{"cducsu", "fdp"}, {{"gruene", "linke", "spd"}}};
    map.periods[18] = {{"cducsu", "spd"}, {{"gruene", "linke"}}};
    return map;
}

inline GovernmentMap government_map_from_json(const nlohmann::json& j) {
    if (!j.is_object()) throw DataError("government map must be a JSON object keyed by period");
    GovernmentMap map;
    for (const auto& [key, value] : j.items()) {
        int period = 0;
        try {
            std::size_t pos = 0;
            period = std::stoi(key, &pos);
            if (pos != key.size()) throw std::invalid_argument(key);
        } catch (const std::exception&) {
            throw DataError("government map: period key '" + key + "' is not an integer");
        }
        GovernmentMap::Entry entry;
        const auto read_set = [&](const nlohmann::json& arr, std::set<std::string>& out) {
            if (!arr.is_array()) throw DataError("government map: party list for period " + key + " must be an array");
            for (const auto& p : arr) {
                if (!p.is_string()) throw DataError("government map: party entries must be strings");
                out.insert(p.get<std::string>());
            }
        };
        if (value.is_array()) {
            read_set(value, entry.government);
        } else if (value.is_object() && value.contains("government")) {
            read_set(value.at("government"), entry.government);
            if (value.contains("opposition")) {
                entry.opposition.emplace();
                read_set(value.at("opposition"), *entry.opposition);
            }
        } else {
            throw DataError("government map: period " + key +
                            " must be a party array or {\"government\": [...], \"opposition\": [...]}");
        }
        map.periods[period] = std::move(entry);
    }
    return map;
}

/// government iff the unit's party is in the period's government set.
/// With an explicit opposition set, a party in neither set is an error.
inline std::string derive_government_label(const SemanticUnit& unit, const GovernmentMap& map) {
    if (unit.party.empty())
        throw DataError("unit '" + unit.id + "' has no party label");
    const auto it = map.periods.find(unit.period);
    if (it == map.periods.end())
        throw DataError("legislative period " + std::to_string(unit.period) +
                        " not covered by the government map");
    const auto& entry = it->second;
    if (entry.government.count(unit.party)) return "government";
    if (entry.opposition && !entry.opposition->count(unit.party))
        throw DataError("party '" + unit.party + "' not covered by the government map for period " +
                        std::to_string(unit.period));
    return "opposition";
}

/// Ordered corpus with one label string per unit, derived from the chosen
/// label kind at construction time.
struct LabeledCorpus {
    std::vector<SemanticUnit> units;
    LabelKind label_kind = LabelKind::party;
    std::vector<std::string> labels;   // aligned with units

    std::size_t size() const { return units.size(); }
    bool empty() const { return units.empty(); }
};

/// Builds a corpus for the given classification task, checking that every
/// unit carries the label the task needs and that ids are unique.
inline LabeledCorpus make_labeled(std::vector<SemanticUnit> units, LabelKind kind,
                                  const GovernmentMap& map = default_government_map()) {
    LabeledCorpus corpus;
    corpus.label_kind = kind;
    corpus.labels.reserve(units.size());
    std::unordered_set<std::string> ids;
    ids.reserve(units.size());
    for (const auto& unit : units) {
        if (!ids.insert(unit.id).second)
            throw DataError("duplicate unit id '" + unit.id + "'");
        switch (kind) {
            case LabelKind::party:
                if (unit.party.empty())
                    throw DataError("unit '" + unit.id + "' has no party label");
                corpus.labels.push_back(unit.party);
                break;
            case LabelKind::government:
                corpus.labels.push_back(derive_government_label(unit, map));
                break;
            case LabelKind::view:
                if (!unit.view_code)
                    throw DataError("unit '" + unit.id + "' has no manifesto code");
                corpus.labels.push_back(render_code3(*unit.view_code));
                break;
        }
    }
    corpus.units = std::move(units);
    return corpus;
}

/// Re-derives labels for a different task over the same units.
inline LabeledCorpus relabel(const LabeledCorpus& corpus, LabelKind kind,
                             const GovernmentMap& map = default_government_map()) {
    return make_labeled(corpus.units, kind, map);
}

namespace detail {

inline std::string trim(std::string_view s) {
    constexpr std::string_view ws = " \t\r\n\f\v";
    const auto begin = s.find_first_not_of(ws);
    if (begin == std::string_view::npos) return "";
    const auto end = s.find_last_not_of(ws);
    return std::string(s.substr(begin, end - begin + 1));
}

inline SemanticUnit parse_record(const nlohmann::json& record, Source source,
                                 const std::string& where) {
    const auto require = [&](const char* field) -> const nlohmann::json& {
        if (!record.contains(field))
            throw DataError(where + ": missing field '" + field + "'");
        return record.at(field);
    };
    const auto as_string = [&](const char* field) {
        const auto& v = require(field);
        if (!v.is_string()) throw DataError(where + ": field '" + field + "' must be a string");
        return v.get<std::string>();
    };
    const auto as_int = [&](const char* field) {
        const auto& v = require(field);
        if (!v.is_number_integer()) throw DataError(where + ": field '" + field + "' must be an integer");
        return v.get<int>();
    };

    SemanticUnit unit;
    unit.source = source;
    unit.id = as_string("id");
    if (unit.id.empty()) throw DataError(where + ": empty id");
    unit.text = trim(as_string("text"));
    if (unit.text.empty()) throw DataError(where + ": empty text");
    unit.party = as_string("party");
    unit.period = as_int("period");
    if (source == Source::parliament) {
        if (unit.party.empty()) throw DataError(where + ": empty party");
    } else {
        const int code = as_int("code");
        if (code < 0 || code > 999)
            throw DataError(where + ": manifesto code " + std::to_string(code) + " outside [0, 999]");
        if (code / 100 > 7)
            throw DataError(where + ": manifesto code " + std::to_string(code) +
                            " has no political domain (first digit > 7)");
        unit.view_code = code;
    }
    return unit;
}

} // namespace detail

/// Reads a line-delimited JSON corpus file. Speech files get party
/// labels, manifesto files view labels; use relabel() for other tasks.
inline LabeledCorpus load_corpus(const std::string& path, Source source) {
    std::ifstream in(path);
    if (!in) throw DataError("cannot open corpus file '" + path + "'");

    std::vector<SemanticUnit> units;
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (detail::trim(line).empty()) continue;
        const std::string where = path + ":" + std::to_string(line_no);
        nlohmann::json record;
        try {
            record = nlohmann::json::parse(line);
        } catch (const nlohmann::json::exception& e) {
            throw DataError(where + ": malformed record: " + e.what());
        }
        if (!record.is_object()) throw DataError(where + ": record must be a JSON object");
        units.push_back(detail::parse_record(record, source, where));
    }
    return make_labeled(std::move(units),
                        source == Source::parliament ? LabelKind::party : LabelKind::view);
}

/// Manifesto statements of one party concatenated over one political
/// domain; the document unit for topic-level out-of-domain evaluation.
struct TopicAggregate {
    std::string party;
    int domain = 0;
    std::string text;
    int period = 0;          // first member's period
    std::size_t n_statements = 0;
};

/// Groups statements by (party, domain of the manifesto code) and joins
/// their texts with single spaces in input order. Aggregates come back
/// sorted by party then domain.
inline std::vector<TopicAggregate> aggregate_by_topic(const LabeledCorpus& corpus) {
    std::map<std::pair<std::string, int>, TopicAggregate> groups;
    for (const auto& unit : corpus.units) {
        if (unit.party.empty())
            throw DataError("unit '" + unit.id + "' has no party label");
        if (!unit.view_code)
            throw DataError("unit '" + unit.id + "' has no manifesto code");
        const int domain = derive_domain(*unit.view_code).id;
        auto& agg = groups[{unit.party, domain}];
        if (agg.n_statements == 0) {
            agg.party = unit.party;
            agg.domain = domain;
            agg.period = unit.period;
            agg.text = unit.text;
        } else {
            agg.text += ' ';
            agg.text += unit.text;
        }
        ++agg.n_statements;
    }
    std::vector<TopicAggregate> out;
    out.reserve(groups.size());
    for (auto& [key, agg] : groups) out.push_back(std::move(agg));
    return out;
}

/// Seeded stratified split. Eval gets round(eval_fraction * N) units,
/// apportioned per label by largest remainder; both halves keep the
/// original unit order.
inline std::pair<LabeledCorpus, LabeledCorpus>
split_train_eval(const LabeledCorpus& corpus, double eval_fraction, std::uint64_t seed) {
    if (!(eval_fraction > 0.0 && eval_fraction < 1.0))
        throw std::invalid_argument("eval_fraction must be in (0, 1)");
    if (corpus.empty()) throw DataError("cannot split an empty corpus");

    const std::size_t n = corpus.size();
    const auto eval_total =
        static_cast<std::size_t>(std::llround(eval_fraction * static_cast<double>(n)));

    std::map<std::string, std::vector<std::size_t>> by_label;
    for (std::size_t i = 0; i < n; ++i) by_label[corpus.labels[i]].push_back(i);

    // Per-label quota: floor of the exact share, remainder to the labels
    // with the largest fractional parts (ties lexicographic).
    struct Share {
        std::string label;
        std::size_t quota;
        double fraction;
    };
    std::vector<Share> shares;
    std::size_t assigned = 0;
    for (const auto& [label, indices] : by_label) {
        const double exact = eval_fraction * static_cast<double>(indices.size());
        const auto quota = static_cast<std::size_t>(std::floor(exact));
        shares.push_back({label, quota, exact - static_cast<double>(quota)});
        assigned += quota;
    }
    std::vector<std::size_t> order(shares.size());
    for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
    std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
        if (shares[a].fraction != shares[b].fraction) return shares[a].fraction > shares[b].fraction;
        return shares[a].label < shares[b].label;
    });
    for (std::size_t k = 0; assigned < eval_total && k < order.size(); ++k) {
        auto& share = shares[order[k]];
        if (share.quota < by_label[share.label].size()) {
            ++share.quota;
            ++assigned;
        }
    }

    std::mt19937_64 rng(seed);
    std::vector<bool> in_eval(n, false);
    for (auto& share : shares) {
        auto indices = by_label[share.label];
        deterministic_shuffle(indices, rng);
        for (std::size_t k = 0; k < share.quota; ++k) in_eval[indices[k]] = true;
    }

    LabeledCorpus train, eval;
    train.label_kind = eval.label_kind = corpus.label_kind;
    for (std::size_t i = 0; i < n; ++i) {
        auto& dst = in_eval[i] ? eval : train;
        dst.units.push_back(corpus.units[i]);
        dst.labels.push_back(corpus.labels[i]);
    }
    return {std::move(train), std::move(eval)};
}

} // namespace polibias
