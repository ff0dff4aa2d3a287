// Acceptance gate: one self-contained check per criterion, one PASS/FAIL
// line each, non-zero exit if anything fails. Built as a plain binary so
// the output reads as a checklist rather than a unit-test log.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdarg>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <functional>
#include <map>
#include <random>
#include <string>
#include <tuple>
#include <vector>

#include <sys/wait.h>

#include "polibias/analysis.hpp"
#include "polibias/corpus.hpp"
#include "polibias/evaluation.hpp"
#include "polibias/model.hpp"
#include "polibias/pipeline.hpp"
#include "polibias/vectorizer.hpp"

using namespace polibias;

namespace {

struct Outcome {
    bool pass = false;
    std::string detail;
};

std::string fmt(const char* format, ...) {
    char buf[512];
    va_list args;
    va_start(args, format);
    std::vsnprintf(buf, sizeof(buf), format, args);
    va_end(args);
    return buf;
}

double seconds_since(std::chrono::steady_clock::time_point start) {
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
}

// ---------------------------------------------------------------- 1 ----

Outcome check_gradient() {
    const auto start = std::chrono::steady_clock::now();
    std::mt19937_64 rng(42);
    std::uniform_real_distribution<double> value(0.5, 3.0);
    std::uniform_real_distribution<double> weight(-1.0, 1.0);
    const double h = 1e-5;
    double max_rel = 0.0;

    for (int instance = 0; instance < 20; ++instance) {
        const std::size_t d = 2 + rng() % 9;   // <= 10
        const std::size_t k = 2 + rng() % 3;   // <= 4
        const std::size_t n = 1 + rng() % 8;   // <= 8

        DocTermMatrix data;
        data.dim = d;
        std::vector<std::string> classes;
        for (std::size_t c = 0; c < k; ++c) classes.push_back("c" + std::to_string(c));
        std::vector<std::string> labels;
        for (std::size_t i = 0; i < n; ++i) {
            SparseVector x;
            x.dim = d;
            for (std::size_t f = 0; f < d; ++f)
                if (rng() % 5 < 3) x.entries.push_back({f, value(rng)});
            data.ids.push_back("i" + std::to_string(i));
            data.rows.push_back(std::move(x));
            labels.push_back(classes[rng() % k]);
        }

        Weights w;
        w.dim = d;
        w.classes = classes;
        w.values.resize(d * k);
        for (auto& v : w.values) v = weight(rng);

        for (const Penalty penalty : {Penalty::frobenius_squared, Penalty::frobenius}) {
            for (const double gamma : {0.0, 0.1, 10.0}) {
                const auto grad = gradient(w, data, labels, gamma, penalty);
                for (std::size_t j = 0; j < w.values.size(); ++j) {
                    Weights wp = w, wm = w;
                    wp.values[j] += h;
                    wm.values[j] -= h;
                    const double fd = (objective(wp, data, labels, gamma, penalty) -
                                       objective(wm, data, labels, gamma, penalty)) /
                                      (2.0 * h);
                    const double rel = std::abs(grad[j] - fd) /
                                       std::max({1.0, std::abs(grad[j]), std::abs(fd)});
                    max_rel = std::max(max_rel, rel);
                }
            }
        }
    }

    const double elapsed = seconds_since(start);
    if (max_rel > 1e-5)
        return {false, fmt("max relative error %.3e exceeds 1e-5", max_rel)};
    if (elapsed >= 5.0) return {false, fmt("took %.2fs, limit is 5s", elapsed)};
    return {true, fmt("20 instances x both penalties x 3 gammas, max rel err %.2e (%.2fs)",
                      max_rel, elapsed)};
}

// ---------------------------------------------------------------- 2 ----

Outcome check_optimizer() {
    const auto start = std::chrono::steady_clock::now();
    std::mt19937_64 rng(7);

    DocTermMatrix data;
    data.dim = 6;
    std::vector<std::string> labels;
    for (int i = 0; i < 40; ++i) {
        const bool first = i < 20;
        SparseVector x;
        x.dim = 6;
        const std::size_t base = first ? 0 : 3;
        x.entries.push_back({base + rng() % 3, 1.0 + static_cast<double>(rng() % 3)});
        std::size_t other = base + rng() % 3;
        if (other == x.entries[0].first) other = base + (other - base + 1) % 3;
        x.entries.push_back({other, 1.0 + static_cast<double>(rng() % 3)});
        std::sort(x.entries.begin(), x.entries.end());
        data.ids.push_back("i" + std::to_string(i));
        data.rows.push_back(std::move(x));
        labels.push_back(first ? "a" : "b");
    }

    TrainConfig config;
    config.gamma = 1e-4;
    const auto [weights, report] = train(data, labels, config);

    std::size_t correct = 0;
    for (std::size_t i = 0; i < data.rows.size(); ++i)
        if (predict(data.rows[i], weights) == labels[i]) ++correct;
    const double accuracy = static_cast<double>(correct) / 40.0;

    const double bound = 0.05 * 40.0 * std::log(2.0);
    bool monotone = true;
    for (std::size_t i = 1; i < report.objective_history.size(); ++i)
        if (report.objective_history[i] > report.objective_history[i - 1] + 1e-12)
            monotone = false;

    const double elapsed = seconds_since(start);
    if (accuracy != 1.0) return {false, fmt("training accuracy %.4f, expected 1.0", accuracy)};
    if (report.final_objective > bound)
        return {false, fmt("final objective %.4f exceeds bound %.4f", report.final_objective,
                           bound)};
    if (!monotone) return {false, "objective history is not monotone non-increasing"};
    if (elapsed >= 5.0) return {false, fmt("took %.2fs, limit is 5s", elapsed)};
    return {true, fmt("accuracy 1.0, objective %.4f <= %.4f, monotone history (%.2fs)",
                      report.final_objective, bound, elapsed)};
}

// ---------------------------------------------------------------- 3 ----

Outcome check_softmax() {
    std::mt19937_64 rng(11);
    std::uniform_real_distribution<double> weight(-5.0, 5.0);
    std::uniform_real_distribution<double> shift(-50.0, 50.0);
    double max_sum_err = 0.0, max_shift_err = 0.0;

    for (int round = 0; round < 100; ++round) {
        const std::size_t d = 1 + rng() % 8;
        const std::size_t k = 2 + rng() % 4;

        SparseVector x;
        x.dim = d;
        x.entries.push_back({0, 1.0});  // anchor so a weight-row shift moves every score equally
        for (std::size_t f = 1; f < d; ++f)
            if (rng() % 2) x.entries.push_back({f, weight(rng)});

        Weights w;
        w.dim = d;
        for (std::size_t c = 0; c < k; ++c) w.classes.push_back("c" + std::to_string(c));
        w.values.resize(d * k);
        for (auto& v : w.values) v = weight(rng);

        const auto p = softmax_probs(x, w);
        double sum = 0.0;
        for (const double v : p) {
            if (v < 0.0) return {false, "negative probability"};
            sum += v;
        }
        max_sum_err = std::max(max_sum_err, std::abs(sum - 1.0));

        Weights w2 = w;
        const double c = shift(rng);
        for (std::size_t j = 0; j < k; ++j) w2.values[j] += c;  // feature 0 row
        const auto p2 = softmax_probs(x, w2);
        for (std::size_t j = 0; j < k; ++j)
            max_shift_err = std::max(max_shift_err, std::abs(p[j] - p2[j]));
    }

    if (max_sum_err > 1e-12) return {false, fmt("normalization error %.3e", max_sum_err)};
    if (max_shift_err > 1e-12) return {false, fmt("shift-invariance error %.3e", max_shift_err)};
    return {true, fmt("100 pairs, max normalization err %.2e, max shift err %.2e", max_sum_err,
                      max_shift_err)};
}

// ---------------------------------------------------------------- 4 ----

LabeledCorpus grid_toy_corpus() {
    LabeledCorpus corpus;
    corpus.label_kind = LabelKind::party;
    auto add = [&](const std::string& id, const std::string& text, const std::string& label) {
        SemanticUnit u;
        u.id = id;
        u.text = text;
        u.party = label;
        u.period = 17;
        corpus.units.push_back(std::move(u));
        corpus.labels.push_back(label);
    };
    // five docs per class separable on unigrams...
    add("l0", "arbeit lohn", "links");
    add("l1", "arbeit rente", "links");
    add("l2", "lohn rente", "links");
    add("l3", "arbeit lohn rente", "links");
    add("l4", "rente lohn", "links");
    add("r0", "steuer zins", "rechts");
    add("r1", "steuer markt", "rechts");
    add("r2", "zins markt", "rechts");
    add("r3", "steuer zins markt", "rechts");
    add("r4", "markt zins", "rechts");
    // ...and four per class that only word order distinguishes
    add("l5", "gut sozial", "links");
    add("l6", "gut sozial heute", "links");
    add("l7", "jetzt gut sozial", "links");
    add("l8", "gut sozial jetzt", "links");
    add("r5", "sozial gut", "rechts");
    add("r6", "sozial gut heute", "rechts");
    add("r7", "jetzt sozial gut", "rechts");
    add("r8", "sozial gut jetzt", "rechts");
    return corpus;
}

Outcome check_grid_oracle() {
    const LabeledCorpus corpus = grid_toy_corpus();
    HyperGrid grid;
    grid.gamma = {0.01, 100.0};
    grid.ngram_max = {1, 2};
    grid.use_tfidf = {false};
    grid.min_df = {1};
    grid.max_df = {1.0};
    const TrainConfig base;

    for (const std::uint64_t seed : {101ULL, 202ULL, 303ULL}) {
        const CvResult cv = grid_search(corpus, grid, base, 3, seed);

        // brute-force oracle: plain nested loops, nothing shared with
        // grid_search beyond the fold assignment and the fit primitives
        const auto folds = kfold_indices(corpus.size(), 3, corpus.labels, seed);
        double best_mean = -1.0;
        double best_gamma = 0.0;
        int best_ngram = 0;
        for (const double gamma : grid.gamma) {
            for (const int ngram : grid.ngram_max) {
                double sum = 0.0;
                for (std::size_t f = 0; f < folds.size(); ++f) {
                    LabeledCorpus train_part, test_part;
                    train_part.label_kind = test_part.label_kind = corpus.label_kind;
                    for (std::size_t g = 0; g < folds.size(); ++g) {
                        for (const std::size_t i : folds[g]) {
                            auto& dest = (g == f) ? test_part : train_part;
                            dest.units.push_back(corpus.units[i]);
                            dest.labels.push_back(corpus.labels[i]);
                        }
                    }
                    BowConfig bow;
                    bow.ngram_max = ngram;
                    TrainConfig config = base;
                    config.gamma = gamma;
                    const auto fitted = fit_classifier(train_part, bow, config);
                    std::size_t correct = 0;
                    for (std::size_t i = 0; i < test_part.size(); ++i)
                        if (predict_text(fitted.first, test_part.units[i].text).first ==
                            test_part.labels[i])
                            ++correct;
                    sum += static_cast<double>(correct) / static_cast<double>(test_part.size());
                }
                const double mean = sum / 3.0;
                const bool better = mean > best_mean ||
                                    (mean == best_mean && (gamma > best_gamma ||
                                                           (gamma == best_gamma &&
                                                            ngram < best_ngram)));
                if (better) {
                    best_mean = mean;
                    best_gamma = gamma;
                    best_ngram = ngram;
                }
            }
        }

        if (cv.best().gamma != best_gamma || cv.best().bow.ngram_max != best_ngram)
            return {false, fmt("seed %llu: grid picked gamma=%g ngram=%d, oracle gamma=%g ngram=%d",
                               static_cast<unsigned long long>(seed), cv.best().gamma,
                               cv.best().bow.ngram_max, best_gamma, best_ngram)};
        if (std::abs(cv.best_mean_accuracy() - best_mean) > 1e-12)
            return {false, fmt("seed %llu: best mean accuracy differs (%.12f vs %.12f)",
                               static_cast<unsigned long long>(seed), cv.best_mean_accuracy(),
                               best_mean)};
    }
    return {true, "2x2 grid matches the brute-force oracle for seeds 101, 202, 303"};
}

// ---------------------------------------------------------------- 5 ----

Outcome check_metric_identities() {
    ConfusionMatrix hand;
    hand.classes = {"a", "b"};
    hand.counts = {{1, 1}, {0, 1}};
    const ClassReport hand_report = class_report(hand);
    if (hand_report.accuracy != 2.0 / 3.0)
        return {false, fmt("hand example accuracy %.17g != 2/3", hand_report.accuracy)};
    for (const auto& m : hand_report.per_class)
        if (m.f1 != 2.0 / 3.0)
            return {false, fmt("hand example f1(%s) %.17g != 2/3", m.label.c_str(), m.f1)};

    std::mt19937_64 rng(23);
    double max_err = 0.0;
    for (int round = 0; round < 30; ++round) {
        const std::size_t k = 2 + rng() % 4;
        ConfusionMatrix cm;
        for (std::size_t c = 0; c < k; ++c) cm.classes.push_back("c" + std::to_string(c));
        cm.counts.assign(k, std::vector<std::int64_t>(k, 0));
        for (auto& row : cm.counts)
            for (auto& cell : row) cell = static_cast<std::int64_t>(rng() % 10);
        if (cm.total() == 0) cm.counts[0][0] = 1;
        const ClassReport report = class_report(cm);
        max_err = std::max(max_err, std::abs(report.weighted_recall - report.accuracy));
    }
    if (max_err > 1e-12)
        return {false, fmt("weighted recall deviates from accuracy by %.3e", max_err)};
    return {true, fmt("hand example exact, weighted recall == accuracy (max err %.2e, 30 rounds)",
                      max_err)};
}

// ---------------------------------------------------------------- 6 ----

std::vector<std::string> brute_ngrams(const std::vector<std::string>& tokens, int ngram_max) {
    std::vector<std::string> out;
    for (int n = 1; n <= ngram_max; ++n) {
        for (std::size_t i = 0; i + static_cast<std::size_t>(n) <= tokens.size(); ++i) {
            std::string gram = tokens[i];
            for (int j = 1; j < n; ++j) gram += " " + tokens[i + static_cast<std::size_t>(j)];
            out.push_back(std::move(gram));
        }
    }
    return out;
}

Outcome check_vectorizer() {
    std::mt19937_64 rng(31);
    const std::vector<std::string> alphabet{"aa", "bb", "cc", "dd", "ee", "ff", "gg"};

    for (int round = 0; round < 200; ++round) {
        std::vector<std::string> tokens;
        const std::size_t len = rng() % 9;  // up to 8 tokens
        for (std::size_t i = 0; i < len; ++i) tokens.push_back(alphabet[rng() % alphabet.size()]);
        for (int ngram_max = 1; ngram_max <= 3; ++ngram_max)
            if (extract_ngrams(tokens, ngram_max) != brute_ngrams(tokens, ngram_max))
                return {false, fmt("ngram enumeration mismatch (round %d, n=%d)", round, ngram_max)};
    }

    int corpora = 0;
    double max_norm_err = 0.0;
    while (corpora < 50) {
        std::vector<std::string> docs;
        const std::size_t n = 2 + rng() % 10;
        for (std::size_t i = 0; i < n; ++i) {
            std::string text;
            const std::size_t len = rng() % 13;
            for (std::size_t t = 0; t < len; ++t) {
                if (!text.empty()) text += ' ';
                text += alphabet[rng() % alphabet.size()];
            }
            docs.push_back(std::move(text));
        }

        BowConfig config;
        config.ngram_max = 1 + static_cast<int>(rng() % 3);
        config.use_tfidf = true;
        config.min_df = 1 + static_cast<int>(rng() % 3);
        config.max_df = std::vector<double>{0.5, 0.8, 1.0}[rng() % 3];

        Vocabulary vocab;
        try {
            vocab = fit_vocabulary(docs, config);
        } catch (const DataError&) {
            continue;  // pruning emptied the vocabulary; draw a fresh corpus
        }
        ++corpora;

        for (std::size_t t = 0; t < vocab.terms.size(); ++t) {
            std::int64_t df = 0;
            for (const auto& doc : docs) {
                const auto grams = brute_ngrams(tokenize(doc), config.ngram_max);
                if (std::find(grams.begin(), grams.end(), vocab.terms[t]) != grams.end()) ++df;
            }
            if (df != vocab.df[t])
                return {false, fmt("df mismatch for '%s': %lld recorded vs %lld recounted",
                                   vocab.terms[t].c_str(),
                                   static_cast<long long>(vocab.df[t]),
                                   static_cast<long long>(df))};
            if (df < config.min_df)
                return {false, fmt("term '%s' kept with df below min_df", vocab.terms[t].c_str())};
            if (static_cast<double>(df) / static_cast<double>(n) > config.max_df + 1e-12)
                return {false, fmt("term '%s' kept with df above max_df", vocab.terms[t].c_str())};
        }

        for (const auto& doc : docs) {
            const SparseVector x = transform(doc, vocab);
            const double norm = l2_norm(x);
            if (norm != 0.0) max_norm_err = std::max(max_norm_err, std::abs(norm - 1.0));
        }
    }

    if (max_norm_err > 1e-9) return {false, fmt("tf-idf norm error %.3e", max_norm_err)};
    return {true, fmt("ngrams match brute force, df bounds hold on 50 corpora, "
                      "max tf-idf norm err %.2e",
                      max_norm_err)};
}

// ---------------------------------------------------------------- 7 ----

Outcome check_sentiment() {
    SparseVector x;
    x.dim = 2;
    x.entries = {{0, 1.0}, {1, 3.0}};
    SentimentVector sentiment;
    sentiment.values.dim = 2;
    sentiment.values.entries = {{0, 1.0}};
    sentiment.matched = 1;

    const double index = sentiment_index(x, sentiment);
    if (std::abs(index - 0.31622776601683794) > 1e-9)
        return {false, fmt("cosine example %.17g deviates from 1/sqrt(10)", index)};

    for (const double scale : {0.001, 7.0, 1000.0}) {
        SparseVector scaled = x;
        for (auto& [feature, value] : scaled.entries) value *= scale;
        if (std::abs(sentiment_index(scaled, sentiment) - index) > 1e-12)
            return {false, fmt("scale invariance broken at factor %g", scale)};
    }

    const std::map<std::string, double> means{
        {"pa", 1.0}, {"pb", 1.0}, {"pc", 0.0}, {"pd", 0.0}};
    PowerIndicators power;
    power["pa"] = {10, true};
    power["pb"] = {20, true};
    power["pc"] = {30, false};
    power["pd"] = {5, false};
    const PowerCorrelation pc = power_correlation(means, power);
    if (std::abs(pc.r_gov - 1.0) > 1e-12)
        return {false, fmt("r_gov %.17g, expected 1.0", pc.r_gov)};
    return {true, fmt("cosine 0.3162 ok, scale invariant, synthetic r_gov = %.1f", pc.r_gov)};
}

// ---------------------------------------------------------------- 8 ----

std::string slurp(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

Outcome check_determinism() {
    namespace fs = std::filesystem;
    const std::string cli = POLIBIAS_CLI_PATH;
    const std::string data = POLIBIAS_DATA_DIR;
    std::mt19937_64 rng(std::random_device{}());
    const fs::path root = fs::temp_directory_path() / ("polibias_accept_" + std::to_string(rng()));

    auto shell = [](const std::string& cmd) {
        const int status = std::system((cmd + " > /dev/null 2>&1").c_str());
        return status != -1 && WIFEXITED(status) && WEXITSTATUS(status) == 0;
    };

    for (const char* run : {"a", "b"}) {
        const fs::path dir = root / run;
        fs::create_directories(dir);
        const std::string model = (dir / "model.json").string();
        if (!shell(cli + " train " + data + "/speeches.jsonl --model " + model + " --seed 7"))
            return {false, "train run failed"};
        if (!shell(cli + " predict " + data + "/speeches.jsonl --model " + model + " --out " +
                   (dir / "pred.jsonl").string()))
            return {false, "predict run failed"};
        if (!shell(cli + " report " + data + "/speeches.jsonl --model " + model +
                   " --lexicon-pos " + data + "/lexicon_positive.txt --lexicon-neg " + data +
                   "/lexicon_negative.txt --power " + data + "/power_17.json --stopwords " + data +
                   "/stopwords_de.txt --out " + (dir / "report").string()))
            return {false, "report run failed"};
    }

    for (const char* name : {"model.json", "pred.jsonl", "report.json", "report.md"}) {
        const auto a = slurp(root / "a" / name);
        const auto b = slurp(root / "b" / name);
        if (a.empty()) return {false, fmt("%s is empty", name)};
        if (a != b) {
            std::error_code ec;
            fs::remove_all(root, ec);
            return {false, fmt("%s differs between runs", name)};
        }
    }
    std::error_code ec;
    fs::remove_all(root, ec);
    return {true, "train/predict/report byte-identical across two runs"};
}

// ---------------------------------------------------------------- 9 ----

Outcome check_aggregation() {
    const std::vector<std::string> parties{"p1", "p2", "p3", "p4", "p5"};
    const std::map<std::string, int> skip{{"p1", 2}, {"p2", 5}, {"p3", 7}, {"p4", 0}};

    std::vector<SemanticUnit> units;
    std::size_t expected_cells = 0;
    for (std::size_t p = 0; p < parties.size(); ++p) {
        for (int domain = 0; domain <= 7; ++domain) {
            const auto it = skip.find(parties[p]);
            if (it != skip.end() && it->second == domain) continue;
            ++expected_cells;
            const int statements = 1 + (static_cast<int>(p) + domain) % 3;
            for (int s = 0; s < statements; ++s) {
                SemanticUnit u;
                u.id = parties[p] + "_" + std::to_string(domain) + "_" + std::to_string(s);
                u.text = "satz " + std::to_string(domain) + " " + std::to_string(s);
                u.party = parties[p];
                u.view_code = domain * 100 + 1;
                u.period = 17;
                u.source = Source::manifesto;
                units.push_back(std::move(u));
            }
        }
    }
    const std::size_t total_units = units.size();

    const LabeledCorpus corpus = make_labeled(std::move(units), LabelKind::view);
    const auto aggregates = aggregate_by_topic(corpus);

    if (expected_cells != 36)
        return {false, fmt("test construction broken: %zu cells", expected_cells)};
    if (aggregates.size() != 36)
        return {false, fmt("%zu aggregates, expected 36", aggregates.size())};
    std::size_t statement_sum = 0;
    for (std::size_t i = 0; i < aggregates.size(); ++i) {
        statement_sum += aggregates[i].n_statements;
        if (i > 0) {
            const auto& prev = aggregates[i - 1];
            const auto& cur = aggregates[i];
            if (std::tie(prev.party, prev.domain) >= std::tie(cur.party, cur.domain))
                return {false, "aggregates are not strictly sorted by (party, domain)"};
        }
    }
    if (statement_sum != total_units)
        return {false, fmt("statement counts sum to %zu, expected %zu", statement_sum,
                           total_units)};
    return {true, "5 parties, 4 empty cells -> exactly 36 aggregates, counts consistent"};
}

} // namespace

int main() {
    struct Criterion {
        int number;
        const char* name;
        std::function<Outcome()> run;
    };
    const std::vector<Criterion> criteria{
        {1, "gradient vs central differences", check_gradient},
        {2, "optimizer on separable data", check_optimizer},
        {3, "softmax invariants", check_softmax},
        {4, "grid search vs brute-force oracle", check_grid_oracle},
        {5, "metric identities", check_metric_identities},
        {6, "vectorizer contracts", check_vectorizer},
        {7, "sentiment correctness", check_sentiment},
        {8, "end-to-end determinism", check_determinism},
        {9, "topic aggregation", check_aggregation},
    };

    int failures = 0;
    for (const auto& criterion : criteria) {
        Outcome outcome;
        try {
            outcome = criterion.run();
        } catch (const std::exception& e) {
            outcome = {false, std::string("exception: ") + e.what()};
        }
        std::printf("criterion %2d: %s  %s — %s\n", criterion.number,
                    outcome.pass ? "PASS" : "FAIL", criterion.name, outcome.detail.c_str());
        if (!outcome.pass) ++failures;
    }
    std::printf("criterion 10: SKIP  full-data reproduction — original corpora and lexicon "
                "are not bundled; not part of CI\n");

    if (failures > 0) {
        std::printf("acceptance: %d criterion(s) FAILED\n", failures);
        return 1;
    }
    std::printf("acceptance: 9 passed, 1 skipped\n");
    return 0;
}
