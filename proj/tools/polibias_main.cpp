// polibias — train, tune, and analyse political-bias text classifiers.
//
// Subcommands: train, grid, predict, evaluate, aggregate, report.
// Exit codes: 0 ok, 1 usage error, 2 data error, 3 numerical failure.

#include <cstdio>
#include <fstream>
#include <iostream>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <nlohmann/json.hpp>

#include "polibias/analysis.hpp"
#include "polibias/config.hpp"
#include "polibias/corpus.hpp"
#include "polibias/errors.hpp"
#include "polibias/evaluation.hpp"
#include "polibias/model_io.hpp"
#include "polibias/pipeline.hpp"
#include "polibias/report.hpp"

namespace {

using namespace polibias;

Source parse_source(const std::string& name, LabelKind task) {
    if (name == "speech" || name == "parliament") return Source::parliament;
    if (name == "manifesto") return Source::manifesto;
    if (name == "auto")
        return task == LabelKind::view ? Source::manifesto : Source::parliament;
    throw std::invalid_argument("unknown source '" + name + "' (use speech, manifesto, or auto)");
}

AppConfig load_config_opt(const std::string& path) {
    return path.empty() ? AppConfig{} : load_app_config(path);
}

void write_text(const std::string& path, const std::string& content) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw DataError("cannot open output file '" + path + "' for writing");
    out << content;
    if (!out) throw DataError("failed writing output file '" + path + "'");
}

// Writes to the given path, or to stdout when the path is empty.
void emit(const std::string& path, const std::string& content) {
    if (path.empty())
        std::cout << content;
    else
        write_text(path, content);
}

void print_fit_report(const FitReport& report) {
    std::printf("iterations=%d converged=%s objective=%.6f grad_sup_norm=%.3e\n",
                report.iterations, report.converged ? "true" : "false", report.final_objective,
                report.final_grad_sup_norm);
}

nlohmann::ordered_json grid_point_json(const GridPoint& point) {
    return {{"gamma", point.gamma},
            {"ngram_max", point.bow.ngram_max},
            {"use_tfidf", point.bow.use_tfidf},
            {"min_df", point.bow.min_df},
            {"max_df", point.bow.max_df}};
}

nlohmann::ordered_json cv_result_json(const CvResult& cv) {
    nlohmann::ordered_json results = nlohmann::ordered_json::array();
    for (const auto& r : cv.results) {
        nlohmann::ordered_json jr = grid_point_json(r.point);
        jr["fold_accuracy"] = r.fold_accuracy;
        jr["mean_accuracy"] = r.mean_accuracy;
        results.push_back(std::move(jr));
    }
    return {{"results", std::move(results)},
            {"best_index", cv.best_index},
            {"best", grid_point_json(cv.best())},
            {"best_mean_accuracy", cv.best_mean_accuracy()},
            {"tie_break", cv.tie_break}};
}

struct TrainArgs {
    std::string corpus_path;
    std::string model_path;
    std::string task = "party";
    std::string config_path;
    std::string source = "auto";
    std::optional<std::uint64_t> seed;
    double eval_fraction = 0.0;
    bool run_grid = false;
    int folds = 3;
};

int cmd_train(const TrainArgs& args) {
    AppConfig config = load_config_opt(args.config_path);
    if (args.seed) config.train.seed = *args.seed;
    const LabelKind task = label_kind_from_name(args.task);

    auto loaded = load_corpus(args.corpus_path, parse_source(args.source, task));
    LabeledCorpus corpus = relabel(loaded, task, config.government_map);

    LabeledCorpus train_part = std::move(corpus);
    std::optional<LabeledCorpus> eval_part;
    if (args.eval_fraction != 0.0) {
        auto [tr, ev] = split_train_eval(train_part, args.eval_fraction, config.train.seed);
        std::printf("split: train=%zu eval=%zu\n", tr.size(), ev.size());
        train_part = std::move(tr);
        eval_part = std::move(ev);
    }

    if (args.run_grid) {
        const CvResult cv =
            grid_search(train_part, config.grid, config.train, args.folds, config.train.seed);
        const GridPoint& best = cv.best();
        config.bow = best.bow;
        config.train.gamma = best.gamma;
        std::printf(
            "grid: best gamma=%g ngram_max=%d use_tfidf=%s min_df=%d max_df=%g "
            "mean_accuracy=%.4f\n",
            best.gamma, best.bow.ngram_max, best.bow.use_tfidf ? "true" : "false", best.bow.min_df,
            best.bow.max_df, cv.best_mean_accuracy());
    }

    auto [classifier, fit_report] = fit_classifier(train_part, config.bow, config.train);
    std::printf("trained: n=%zu d=%zu classes=%zu\n", train_part.size(), classifier.vocab.dim(),
                classifier.weights.num_classes());
    print_fit_report(fit_report);

    if (eval_part) {
        const auto [report, cm] = evaluate(classifier, *eval_part);
        std::printf("eval: accuracy=%.4f n=%lld\n", report.accuracy,
                    static_cast<long long>(report.total));
    }

    ModelFile model;
    model.task = task;
    model.classifier = std::move(classifier);
    model.train_config = config.train;
    save_model(args.model_path, model);
    std::printf("wrote %s\n", args.model_path.c_str());
    return 0;
}

struct GridArgs {
    std::string corpus_path;
    std::string task = "party";
    std::string config_path;
    std::string source = "auto";
    std::string out_path;
    std::optional<std::uint64_t> seed;
    int folds = 3;
};

int cmd_grid(const GridArgs& args) {
    AppConfig config = load_config_opt(args.config_path);
    if (args.seed) config.train.seed = *args.seed;
    const LabelKind task = label_kind_from_name(args.task);

    auto loaded = load_corpus(args.corpus_path, parse_source(args.source, task));
    const LabeledCorpus corpus = relabel(loaded, task, config.government_map);

    const CvResult cv =
        grid_search(corpus, config.grid, config.train, args.folds, config.train.seed);
    emit(args.out_path, cv_result_json(cv).dump(2) + "\n");
    if (!args.out_path.empty())
        std::printf("grid: %zu points, best mean_accuracy=%.4f, wrote %s\n", cv.results.size(),
                    cv.best_mean_accuracy(), args.out_path.c_str());
    return 0;
}

struct PredictArgs {
    std::string input_path;
    std::string model_path;
    std::string config_path;
    std::string out_path;
};

int cmd_predict(const PredictArgs& args) {
    const AppConfig config = load_config_opt(args.config_path);
    const ModelFile model = load_model(args.model_path);

    std::ifstream in(args.input_path);
    if (!in) throw DataError("cannot open input file '" + args.input_path + "'");

    // Prediction input only needs id and text; label fields may be absent.
    std::string lines;
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (detail::trim(line).empty()) continue;
        const std::string where = args.input_path + ":" + std::to_string(line_no);
        nlohmann::json record;
        try {
            record = nlohmann::json::parse(line);
        } catch (const nlohmann::json::exception& e) {
            throw DataError(where + ": malformed record: " + e.what());
        }
        if (!record.is_object() || !record.contains("id") || !record.at("id").is_string() ||
            !record.contains("text") || !record.at("text").is_string())
            throw DataError(where + ": record needs string fields 'id' and 'text'");
        const auto id = record.at("id").get<std::string>();
        const auto text = record.at("text").get<std::string>();

        const SparseVector x = transform(text, model.classifier.vocab);
        const auto [label, probs] = predict_proba(x, model.classifier.weights);

        nlohmann::ordered_json out;
        out["id"] = id;
        out["label"] = label;
        nlohmann::ordered_json jp;
        for (std::size_t k = 0; k < probs.size(); ++k)
            jp[model.classifier.weights.classes[k]] = probs[k];
        out["probabilities"] = std::move(jp);
        if (x.entries.empty()) out["degenerate"] = true;
        if (model.task == LabelKind::view) {
            const DomainInfo domain = derive_domain(std::stoi(label));
            out["domain"] = {{"id", domain.id}, {"name", domain.name}};
            if (config.lr_codes.configured())
                out["lr_index"] =
                    derive_lr_index(probs, model.classifier.weights.classes, config.lr_codes);
        }
        lines += out.dump() + "\n";
    }
    emit(args.out_path, lines);
    return 0;
}

struct EvaluateArgs {
    std::string corpus_path;
    std::string model_path;
    std::string config_path;
    std::string source = "auto";
    std::string out_path;
};

nlohmann::ordered_json evaluation_json(const ClassReport& report, const ConfusionMatrix& cm) {
    ReportBuilder builder;
    builder.add_evaluation(report, cm);
    return builder.json().at("evaluation");
}

int cmd_evaluate(const EvaluateArgs& args) {
    const AppConfig config = load_config_opt(args.config_path);
    const ModelFile model = load_model(args.model_path);

    auto loaded = load_corpus(args.corpus_path, parse_source(args.source, model.task));
    const LabeledCorpus corpus = relabel(loaded, model.task, config.government_map);

    const auto [report, cm] = evaluate(model.classifier, corpus);
    emit(args.out_path, evaluation_json(report, cm).dump(2) + "\n");
    if (!args.out_path.empty())
        std::printf("eval: accuracy=%.4f n=%lld, wrote %s\n", report.accuracy,
                    static_cast<long long>(report.total), args.out_path.c_str());
    return 0;
}

struct AggregateArgs {
    std::string corpus_path;
    std::string out_path;
};

int cmd_aggregate(const AggregateArgs& args) {
    const LabeledCorpus corpus = load_corpus(args.corpus_path, Source::manifesto);
    const auto aggregates = aggregate_by_topic(corpus);

    // Output doubles as a speech corpus: one document per (party, domain).
    std::string lines;
    for (const auto& agg : aggregates) {
        nlohmann::ordered_json record;
        record["id"] = agg.party + "/" + std::to_string(agg.domain);
        record["text"] = agg.text;
        record["party"] = agg.party;
        record["period"] = agg.period;
        record["domain"] = agg.domain;
        record["domain_name"] = derive_domain(agg.domain * 100).name;
        record["n_statements"] = agg.n_statements;
        lines += record.dump() + "\n";
    }
    emit(args.out_path, lines);
    if (!args.out_path.empty())
        std::printf("aggregated %zu statements into %zu topics, wrote %s\n", corpus.size(),
                    aggregates.size(), args.out_path.c_str());
    return 0;
}

struct ReportArgs {
    std::string corpus_path;
    std::string model_path;
    std::string config_path;
    std::string source = "auto";
    std::string lexicon_pos;
    std::string lexicon_neg;
    std::string power_path;
    std::string stopwords_path;
    std::optional<int> top_k;
    std::string out_base = "report";
};

int cmd_report(const ReportArgs& args) {
    const AppConfig config = load_config_opt(args.config_path);
    const ModelFile model = load_model(args.model_path);
    const Vocabulary& vocab = model.classifier.vocab;

    auto loaded = load_corpus(args.corpus_path, parse_source(args.source, model.task));
    const LabeledCorpus corpus = relabel(loaded, model.task, config.government_map);

    ReportBuilder builder;

    const auto [class_rep, cm] = evaluate(model.classifier, corpus);
    builder.add_evaluation(class_rep, cm);

    // Sentiment and power sections are optional; missing inputs degrade
    // to notices so a partial report still comes out schema-valid.
    std::optional<std::map<std::string, double>> party_means;
    if (!args.lexicon_pos.empty() && !args.lexicon_neg.empty()) {
        const SentimentLexicon lexicon = load_lexicon(args.lexicon_pos, args.lexicon_neg);
        const SentimentVector sentiment = build_sentiment_vector(vocab, lexicon);
        party_means = party_mean_sentiment(corpus, vocab, sentiment);
        builder.add_sentiment(*party_means, sentiment.matched);
    } else {
        builder.add_notice("sentiment", "skipped (no lexicon provided)");
    }

    if (!args.power_path.empty()) {
        if (party_means) {
            const PowerIndicators power = load_power_indicators(args.power_path);
            builder.add_power(power_correlation(*party_means, power));
        } else {
            builder.add_notice("power_correlation", "skipped (sentiment section unavailable)");
        }
    } else {
        builder.add_notice("power_correlation", "skipped (no power indicator file provided)");
    }

    std::set<std::string> label_set(corpus.labels.begin(), corpus.labels.end());
    if (label_set.size() >= 2) {
        std::string stopword_path = args.stopwords_path.empty() ? config.stopwords_path
                                                                : args.stopwords_path;
        const auto stopwords =
            stopword_path.empty() ? std::unordered_set<std::string>{} : load_stopwords(stopword_path);

        DocTermMatrix matrix;
        if (config.analysis_raw_counts) {
            matrix.dim = vocab.dim();
            for (const auto& unit : corpus.units) {
                matrix.ids.push_back(unit.id);
                matrix.rows.push_back(transform_counts(unit.text, vocab));
            }
        } else {
            matrix = transform_corpus(corpus, vocab);
        }

        const auto top_k = static_cast<std::size_t>(args.top_k.value_or(config.top_k));
        std::vector<PartyWordCorrelations> correlations;
        for (const auto& label : label_set)
            correlations.push_back(
                word_label_correlation(matrix, corpus.labels, label, vocab, stopwords, top_k));
        builder.add_word_correlations(correlations);
    } else {
        builder.add_notice("word_correlations", "skipped (needs at least 2 distinct labels)");
    }

    const std::string json_path = args.out_base + ".json";
    const std::string md_path = args.out_base + ".md";
    write_text(json_path, builder.json().dump(2) + "\n");
    write_text(md_path, builder.markdown());
    std::printf("wrote %s and %s\n", json_path.c_str(), md_path.c_str());
    return 0;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"Political-bias text classification and analysis"};
    app.require_subcommand(1);

    TrainArgs train_args;
    auto* train_cmd = app.add_subcommand("train", "Fit a classifier and save the model");
    train_cmd->add_option("corpus", train_args.corpus_path, "Corpus JSONL file")->required();
    train_cmd->add_option("--model", train_args.model_path, "Model output path")->required();
    train_cmd->add_option("--task", train_args.task, "Label task: party, government, view");
    train_cmd->add_option("--config", train_args.config_path, "JSON config file");
    train_cmd->add_option("--source", train_args.source, "Corpus kind: speech, manifesto, auto");
    train_cmd->add_option("--seed", train_args.seed, "Seed override for split/CV");
    train_cmd->add_option("--eval-fraction", train_args.eval_fraction,
                          "Held-out fraction in (0,1); 0 trains on everything");
    train_cmd->add_flag("--grid", train_args.run_grid, "Grid-search hyperparameters first");
    train_cmd->add_option("--folds", train_args.folds, "CV folds for --grid");

    GridArgs grid_args;
    auto* grid_cmd = app.add_subcommand("grid", "Cross-validated hyperparameter search");
    grid_cmd->add_option("corpus", grid_args.corpus_path, "Corpus JSONL file")->required();
    grid_cmd->add_option("--task", grid_args.task, "Label task: party, government, view");
    grid_cmd->add_option("--config", grid_args.config_path, "JSON config file");
    grid_cmd->add_option("--source", grid_args.source, "Corpus kind: speech, manifesto, auto");
    grid_cmd->add_option("--seed", grid_args.seed, "Seed override for fold assignment");
    grid_cmd->add_option("--folds", grid_args.folds, "Number of CV folds");
    grid_cmd->add_option("--out", grid_args.out_path, "Result JSON path (default stdout)");

    PredictArgs predict_args;
    auto* predict_cmd = app.add_subcommand("predict", "Predict labels for JSONL documents");
    predict_cmd->add_option("input", predict_args.input_path, "JSONL with id and text fields")
        ->required();
    predict_cmd->add_option("--model", predict_args.model_path, "Model file")->required();
    predict_cmd->add_option("--config", predict_args.config_path, "JSON config file");
    predict_cmd->add_option("--out", predict_args.out_path, "Output JSONL path (default stdout)");

    EvaluateArgs evaluate_args;
    auto* evaluate_cmd = app.add_subcommand("evaluate", "Score a model on a labeled corpus");
    evaluate_cmd->add_option("corpus", evaluate_args.corpus_path, "Corpus JSONL file")->required();
    evaluate_cmd->add_option("--model", evaluate_args.model_path, "Model file")->required();
    evaluate_cmd->add_option("--config", evaluate_args.config_path, "JSON config file");
    evaluate_cmd->add_option("--source", evaluate_args.source,
                             "Corpus kind: speech, manifesto, auto");
    evaluate_cmd->add_option("--out", evaluate_args.out_path, "Report JSON path (default stdout)");

    AggregateArgs aggregate_args;
    auto* aggregate_cmd =
        app.add_subcommand("aggregate", "Merge manifesto statements into per-party topics");
    aggregate_cmd->add_option("corpus", aggregate_args.corpus_path, "Manifesto JSONL file")
        ->required();
    aggregate_cmd->add_option("--out", aggregate_args.out_path,
                              "Output JSONL path (default stdout)");

    ReportArgs report_args;
    auto* report_cmd =
        app.add_subcommand("report", "Full JSON + markdown report for a model and corpus");
    report_cmd->add_option("corpus", report_args.corpus_path, "Corpus JSONL file")->required();
    report_cmd->add_option("--model", report_args.model_path, "Model file")->required();
    report_cmd->add_option("--config", report_args.config_path, "JSON config file");
    report_cmd->add_option("--source", report_args.source, "Corpus kind: speech, manifesto, auto");
    report_cmd->add_option("--lexicon-pos", report_args.lexicon_pos, "Positive sentiment lexicon");
    report_cmd->add_option("--lexicon-neg", report_args.lexicon_neg, "Negative sentiment lexicon");
    report_cmd->add_option("--power", report_args.power_path, "Power indicator JSON file");
    report_cmd->add_option("--stopwords", report_args.stopwords_path, "Stopword list");
    report_cmd->add_option("--k", report_args.top_k, "Top-k terms per correlation list");
    report_cmd->add_option("--out", report_args.out_base,
                           "Output basename; writes <out>.json and <out>.md");

    try {
        app.parse(argc, argv);
        if (*train_cmd) return cmd_train(train_args);
        if (*grid_cmd) return cmd_grid(grid_args);
        if (*predict_cmd) return cmd_predict(predict_args);
        if (*evaluate_cmd) return cmd_evaluate(evaluate_args);
        if (*aggregate_cmd) return cmd_aggregate(aggregate_args);
        if (*report_cmd) return cmd_report(report_args);
        return 1;
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : 1;
    } catch (const DataError& e) {
        std::cerr << "data error: " << e.what() << "\n";
        return 2;
    } catch (const NumericalError& e) {
        std::cerr << "numerical error: " << e.what() << "\n";
        return 3;
    } catch (const std::invalid_argument& e) {
        std::cerr << "usage error: " << e.what() << "\n";
        return 1;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
}
