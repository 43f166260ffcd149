// hedgen: corpus tools, candidate generation, classifier-guided reranking
// and evaluation for hedged tutoring dialogue, behind one executable.
#include <algorithm>
#include <chrono>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <thread>

#include <CLI11.hpp>
#include <json.hpp>

#include "hedgen/analysis.hpp"
#include "hedgen/classifier.hpp"
#include "hedgen/corpus.hpp"
#include "hedgen/digest.hpp"
#include "hedgen/error.hpp"
#include "hedgen/external.hpp"
#include "hedgen/generate.hpp"
#include "hedgen/metrics.hpp"
#include "hedgen/ngram.hpp"
#include "hedgen/pipeline.hpp"
#include "hedgen/rerank.hpp"
#include "hedgen/text.hpp"

namespace {

using hedgen::HedgeLabel;
using nlohmann::json;

std::string slurp(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw hedgen::IoError("cannot open file: " + path);
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

hedgen::HistoryWindow read_history_file(const std::string& path) {
    hedgen::HistoryWindow history;
    std::ifstream in(path);
    if (!in) throw hedgen::IoError("cannot open history file: " + path);
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (line.empty()) continue;
        json j = json::parse(line, nullptr, false);
        if (j.is_discarded()) {
            throw hedgen::IoError("invalid JSON in history line " + std::to_string(line_no));
        }
        hedgen::Turn turn;
        const std::string speaker = j.value("speaker", "tutee");
        turn.speaker = speaker == "tutor" ? hedgen::Speaker::Tutor : hedgen::Speaker::Tutee;
        turn.text = j.at("text").get<std::string>();
        history.turns.push_back(std::move(turn));
    }
    history.window_size = static_cast<int>(history.turns.size());
    history.target_position = static_cast<int>(history.turns.size()) + 1;
    return history;
}

// Lines of either {"text": ...} records (extra fields allowed) or raw text.
struct LabeledText {
    std::string text;
    std::optional<HedgeLabel> label;
};

std::vector<LabeledText> read_text_lines(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw hedgen::IoError("cannot open file: " + path);
    std::vector<LabeledText> out;
    std::string line;
    while (std::getline(in, line)) {
        if (line.empty()) continue;
        LabeledText item;
        json j = json::parse(line, nullptr, false);
        if (!j.is_discarded() && j.is_object() && j.contains("text")) {
            item.text = j["text"].get<std::string>();
            if (j.contains("hedge") && !j["hedge"].is_null()) {
                item.label = j["hedge"].get<int>() == 1 ? HedgeLabel::Hedge : HedgeLabel::NonHedge;
            }
        } else {
            item.text = line;
        }
        out.push_back(std::move(item));
    }
    return out;
}

void write_text_file(const std::string& path, const std::string& body) {
    std::ofstream out(path);
    if (!out) throw hedgen::IoError("cannot write file: " + path);
    out << body;
    if (body.empty() || body.back() != '\n') out << "\n";
}

hedgen::GeneratorFn make_generator(const std::string& model_path, const std::string& endpoint,
                                   const hedgen::DecodingConfig& decoding,
                                   std::optional<hedgen::NGramModel>& model_slot) {
    if (!endpoint.empty()) {
        return [endpoint, decoding](const hedgen::HistoryWindow& history) {
            return hedgen::external_generate(endpoint, history, decoding);
        };
    }
    model_slot = hedgen::NGramModel::load(model_path);
    const hedgen::NGramModel* model = &*model_slot;
    return [model, decoding](const hedgen::HistoryWindow& history) {
        return hedgen::beam_generate(*model, history, decoding);
    };
}

void add_decoding_flags(CLI::App* cmd, hedgen::DecodingConfig& decoding) {
    cmd->add_option("--pool-size", decoding.pool_size, "candidates per pool");
    cmd->add_option("--beam-width", decoding.beam_width, "live beam width (0 = pool size)");
    cmd->add_option("--max-tokens", decoding.max_tokens, "generation length cap");
    cmd->add_option("--no-repeat-ngram", decoding.no_repeat_ngram, "ban repeated n-grams of this size");
    cmd->add_option("--repetition-penalty", decoding.repetition_penalty, "penalty for re-emitting a token");
}

int run_ingest(const std::string& in, const std::string& out, const std::string& stats_path) {
    hedgen::Corpus corpus = hedgen::merge_clauses_to_turns(hedgen::read_clauses_file(in));
    corpus.provenance = hedgen::file_digest(in);
    hedgen::write_corpus_file(corpus, out);
    const hedgen::CorpusStats stats = hedgen::corpus_stats(corpus);
    if (!stats_path.empty()) write_text_file(stats_path, hedgen::corpus_stats_json(stats));
    std::cout << "ingested " << stats.dialogues << " dialogues, " << stats.turns << " turns ("
              << stats.all.hedge << " hedge / " << stats.all.non_hedge << " non-hedge)\n";
    return 0;
}

int run_split(const std::string& in, const hedgen::SplitSpec& spec, const std::string& out_dir) {
    namespace fs = std::filesystem;
    hedgen::Corpus corpus = hedgen::read_corpus_file(in);
    hedgen::SplitResult parts = hedgen::split_dataset(corpus, spec);
    fs::create_directories(out_dir);
    hedgen::write_corpus_file(parts.train, (fs::path(out_dir) / "train.jsonl").string());
    hedgen::write_corpus_file(parts.validation, (fs::path(out_dir) / "validation.jsonl").string());
    hedgen::write_corpus_file(parts.test, (fs::path(out_dir) / "test.jsonl").string());
    std::cout << "split " << corpus.dialogues.size() << " dialogues into " << parts.train.dialogues.size()
              << "/" << parts.validation.dialogues.size() << "/" << parts.test.dialogues.size() << "\n";
    return 0;
}

int run_balance(const std::string& in, std::uint64_t seed, const std::string& out) {
    hedgen::Corpus test = hedgen::read_corpus_file(in);
    std::vector<hedgen::Turn> balanced = hedgen::balance_test_set(test, seed);
    hedgen::write_turns_file(balanced, out);
    std::cout << "balanced test set: " << balanced.size() << " turns\n";
    return 0;
}

int run_train(const std::string& in, const hedgen::TrainOptions& options, const std::string& out) {
    hedgen::Corpus corpus = hedgen::read_corpus_file(in);
    hedgen::NGramModel model = hedgen::train_ngram(corpus, options);
    model.save(out);
    std::cout << "trained order-" << model.order() << " model, |V|=" << model.vocab().size()
              << ", digest " << model.digest() << "\n";
    return 0;
}

int run_serve_stub(const std::string& model_path, const std::string& fixture_path, int port) {
    std::unique_ptr<hedgen::StubServer> server;
    if (!fixture_path.empty()) {
        server = std::make_unique<hedgen::StubServer>(slurp(fixture_path));
    } else {
        server = std::make_unique<hedgen::StubServer>(hedgen::NGramModel::load(model_path));
    }
    const int bound = server->start(port);
    std::cout << "serving /generate on http://127.0.0.1:" << bound << std::endl;
    for (;;) std::this_thread::sleep_for(std::chrono::seconds(3600));
}

int run_generate(const std::string& model_path, const std::string& endpoint,
                 const std::string& history_path, const hedgen::DecodingConfig& decoding,
                 const std::string& out) {
    const hedgen::HistoryWindow history =
        history_path.empty() ? hedgen::HistoryWindow{} : read_history_file(history_path);
    std::optional<hedgen::NGramModel> model;
    hedgen::GeneratorFn generate = make_generator(model_path, endpoint, decoding, model);
    const hedgen::CandidatePool pool = generate(history);

    json candidates = json::array();
    for (const auto& c : pool.candidates) {
        candidates.push_back({{"text", c.text}, {"log_prob", c.score}});
    }
    json j;
    j["candidates"] = candidates;
    j["requested"] = pool.requested;
    if (!pool.note.empty()) j["note"] = pool.note;
    const std::string body = j.dump(2);
    if (out.empty()) {
        std::cout << body << "\n";
    } else {
        write_text_file(out, body);
        std::cout << "wrote " << pool.candidates.size() << " candidates to " << out << "\n";
    }
    return 0;
}

int run_rerank(const std::string& model_path, const std::string& endpoint, const std::string& lexicon,
               const std::string& test_path, const std::string& targets_path, int window,
               const hedgen::DecodingConfig& decoding, const std::string& out) {
    const hedgen::RuleSet rules = hedgen::read_lexicon_file(lexicon);
    const hedgen::Corpus test = hedgen::read_corpus_file(test_path);

    std::vector<hedgen::Turn> targets;
    if (targets_path.empty()) {
        for (const auto& d : test.dialogues) {
            for (const auto& t : d.turns) {
                if (t.speaker == hedgen::Speaker::Tutor) targets.push_back(t);
            }
        }
    } else {
        targets = hedgen::read_turns_file(targets_path);
    }

    std::optional<hedgen::NGramModel> model;
    hedgen::GeneratorFn generate = make_generator(model_path, endpoint, decoding, model);
    std::vector<hedgen::RerankItem> items = hedgen::rerank_corpus(targets, test, window, generate, rules);
    hedgen::write_rerank_items_file(items, out);

    std::size_t matched = 0, errors = 0;
    for (const auto& item : items) {
        if (!item.error.empty()) ++errors;
        else if (item.result.matched) ++matched;
    }
    std::cout << "reranked " << items.size() << " turns: " << matched << " matched, "
              << items.size() - matched - errors << " fell back, " << errors << " failed\n";
    return 0;
}

int run_classify(const std::string& lexicon, const std::string& in, const std::string& out) {
    const hedgen::RuleSet rules = hedgen::read_lexicon_file(lexicon);
    const auto items = read_text_lines(in);
    std::ostringstream body;
    for (const auto& item : items) {
        body << hedgen::verdict_json(hedgen::classify_text(item.text, rules)) << "\n";
    }
    if (out.empty()) {
        std::cout << body.str();
    } else {
        write_text_file(out, body.str());
    }
    return 0;
}

int run_evaluate(const std::string& pred_path, const std::string& gold_path, const std::string& lexicon,
                 const std::string& model_path, const std::string& test_corpus, const std::string& out) {
    const auto pred = read_text_lines(pred_path);
    const auto gold = read_text_lines(gold_path);
    if (pred.size() != gold.size()) {
        throw hedgen::StructuralError("pred and gold line counts differ: " + std::to_string(pred.size()) +
                                      " vs " + std::to_string(gold.size()));
    }

    std::optional<hedgen::RuleSet> rules;
    if (!lexicon.empty()) rules = hedgen::read_lexicon_file(lexicon);
    auto label_of = [&](const LabeledText& item) {
        if (item.label) return *item.label;
        if (!rules) {
            throw hedgen::ConfigError("records carry no hedge labels; pass --lexicon to classify them");
        }
        return hedgen::classify_text(item.text, *rules).label;
    };

    std::vector<std::string> pred_texts, gold_texts;
    std::vector<HedgeLabel> pred_labels, gold_labels;
    for (std::size_t i = 0; i < pred.size(); ++i) {
        pred_texts.push_back(pred[i].text);
        gold_texts.push_back(gold[i].text);
        pred_labels.push_back(label_of(pred[i]));
        gold_labels.push_back(label_of(gold[i]));
    }

    hedgen::MetricReport report;
    report.pairs = pred_texts.size();
    report.bleu1 = hedgen::bleu(pred_texts, gold_texts, 1);
    report.bleu2 = hedgen::bleu(pred_texts, gold_texts, 2);
    report.rouge_l = hedgen::rouge_l(pred_texts, gold_texts);
    report.chrf = hedgen::chrf(pred_texts, gold_texts);
    const hedgen::StrategyF1 f1 = hedgen::strategy_f1(pred_labels, gold_labels);
    report.f1_hedge_binary = f1.binary;
    report.f1_macro = f1.macro;
    report.tp = f1.tp;
    report.fp = f1.fp;
    report.fn = f1.fn;
    report.tn = f1.tn;

    if (!model_path.empty()) {
        const hedgen::NGramModel model = hedgen::NGramModel::load(model_path);
        if (!test_corpus.empty()) {
            report.perplexity = hedgen::perplexity(model, hedgen::read_corpus_file(test_corpus));
        } else {
            report.perplexity = hedgen::perplexity_text(model, gold_texts);
        }
    }

    const std::string body = hedgen::metric_report_json(report);
    if (out.empty()) {
        std::cout << body << "\n";
    } else {
        write_text_file(out, body);
        std::cout << "wrote report to " << out << "\n";
    }
    return 0;
}

int run_analyze(const std::string& results_path, const std::string& annotations_path,
                const std::string& audit_lexicon, const std::string& lexicon, const std::string& out) {
    const std::vector<hedgen::RerankItem> items = hedgen::read_rerank_items_file(results_path);

    hedgen::AuditAnnotations annotations;
    const hedgen::AuditAnnotations* annotations_ptr = nullptr;
    if (!annotations_path.empty()) {
        annotations = hedgen::read_annotations_file(annotations_path);
        annotations_ptr = &annotations;
    }
    std::optional<hedgen::RuleSet> rules;
    if (!audit_lexicon.empty()) {
        rules = hedgen::read_lexicon_file(audit_lexicon);
    } else if (!lexicon.empty()) {
        rules = hedgen::read_lexicon_file(lexicon);
    }

    const hedgen::AnalysisReport report =
        hedgen::analyze_items(items, annotations_ptr, rules ? &*rules : nullptr);
    const std::string body = hedgen::analysis_report_json(report);
    if (out.empty()) {
        std::cout << body << "\n";
    } else {
        write_text_file(out, body);
        std::cout << "wrote analysis to " << out << "\n";
    }
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"hedge-aware dialogue generation toolkit"};
    app.require_subcommand(1);

    // ingest
    std::string in, out, stats_path;
    auto* ingest = app.add_subcommand("ingest", "merge clause annotations into a turn corpus");
    ingest->add_option("--in", in, "clause-level JSONL")->required();
    ingest->add_option("--out", out, "turn corpus JSONL")->required();
    ingest->add_option("--stats", stats_path, "also write corpus statistics JSON");

    // split
    hedgen::SplitSpec split_spec;
    std::string split_out_dir = "out";
    auto* split = app.add_subcommand("split", "split a corpus by dialogue");
    split->add_option("--in", in, "turn corpus JSONL")->required();
    split->add_option("--train", split_spec.train, "train ratio");
    split->add_option("--validation", split_spec.validation, "validation ratio");
    split->add_option("--test", split_spec.test, "test ratio");
    split->add_option("--seed", split_spec.seed, "shuffle seed")->required();
    split->add_option("--out-dir", split_out_dir, "directory for train/validation/test.jsonl");

    // balance
    std::uint64_t seed = 0;
    auto* balance = app.add_subcommand("balance", "balance hedge classes in a test corpus");
    balance->add_option("--in", in, "test corpus JSONL")->required();
    balance->add_option("--seed", seed, "sampling seed")->required();
    balance->add_option("--out", out, "balanced turn list JSONL")->required();

    // train
    hedgen::TrainOptions train_options;
    bool no_eos = false;
    auto* train = app.add_subcommand("train", "train the n-gram generator");
    train->add_option("--in", in, "training corpus JSONL")->required();
    train->add_option("--out", out, "model file")->required();
    train->add_option("--order", train_options.order, "n-gram order");
    train->add_option("--window", train_options.window, "history turns in the conditioning context");
    train->add_option("--uniform-floor", train_options.uniform_floor, "uniform smoothing mass");
    train->add_option("--weights", train_options.weights, "interpolation weights, one per order");
    train->add_flag("--no-eos", no_eos, "do not model the end-of-turn transition");

    // serve-stub
    std::string model_path, fixture_path, endpoint;
    int port = 0;
    auto* serve = app.add_subcommand("serve-stub", "serve /generate from a model or canned fixture");
    serve->add_option("--model", model_path, "model file to decode from");
    serve->add_option("--fixture", fixture_path, "canned response body to replay");
    serve->add_option("--port", port, "port (0 = ephemeral)");

    // generate
    hedgen::DecodingConfig decoding;
    std::string history_path;
    auto* generate = app.add_subcommand("generate", "produce a candidate pool for one history");
    generate->add_option("--model", model_path, "model file");
    generate->add_option("--endpoint", endpoint, "external generator URL");
    generate->add_option("--history", history_path, "history window JSONL ({speaker,text} per line)");
    generate->add_option("--out", out, "write the pool here instead of stdout");
    add_decoding_flags(generate, decoding);

    // rerank
    std::string lexicon, targets_path;
    int window = 4;
    auto* rerank = app.add_subcommand("rerank", "classifier-guided selection over generated pools");
    rerank->add_option("--model", model_path, "model file");
    rerank->add_option("--endpoint", endpoint, "external generator URL");
    rerank->add_option("--lexicon", lexicon, "hedge lexicon JSONL")->required();
    rerank->add_option("--test", in, "test corpus JSONL")->required();
    rerank->add_option("--targets", targets_path, "balanced turn list; default is every tutor turn");
    rerank->add_option("--window", window, "history turns per item");
    rerank->add_option("--out", out, "results JSONL")->required();
    add_decoding_flags(rerank, decoding);

    // classify
    auto* classify = app.add_subcommand("classify", "rule verdicts for a file of utterances");
    classify->add_option("--lexicon", lexicon, "hedge lexicon JSONL")->required();
    classify->add_option("--in", in, "utterances, one JSON record or raw line each")->required();
    classify->add_option("--out", out, "verdicts JSONL (stdout if omitted)");

    // evaluate
    std::string pred_path, gold_path, test_corpus;
    auto* evaluate = app.add_subcommand("evaluate", "score predictions against references");
    evaluate->add_option("--pred", pred_path, "predicted utterances")->required();
    evaluate->add_option("--gold", gold_path, "reference utterances")->required();
    evaluate->add_option("--lexicon", lexicon, "lexicon for labeling unlabeled records");
    evaluate->add_option("--model", model_path, "model for perplexity");
    evaluate->add_option("--test-corpus", test_corpus, "corpus for history-conditioned perplexity");
    evaluate->add_option("--out", out, "report JSON (stdout if omitted)");

    // analyze
    std::string results_path, annotations_path, audit_lexicon;
    auto* analyze = app.add_subcommand("analyze", "error taxonomy over reranking results");
    analyze->add_option("--results", results_path, "reranking results JSONL")->required();
    analyze->add_option("--audit", annotations_path, "human audit annotations JSONL");
    analyze->add_option("--audit-lexicon", audit_lexicon, "oracle ruleset for auditing");
    analyze->add_option("--lexicon", lexicon, "fallback audit ruleset");
    analyze->add_option("--out", out, "report JSON (stdout if omitted)");

    // run
    std::string config_path, override_input, override_output, override_lexicon, override_endpoint;
    std::optional<std::uint64_t> override_seed;
    std::optional<int> override_pool, override_window;
    auto* run = app.add_subcommand("run", "full pipeline from clauses to analysis");
    run->add_option("--config", config_path, "run configuration JSON")->required();
    run->add_option("--seed", override_seed, "override config seed");
    run->add_option("--input", override_input, "override input clauses");
    run->add_option("--output-dir", override_output, "override output directory");
    run->add_option("--lexicon", override_lexicon, "override lexicon");
    run->add_option("--endpoint", override_endpoint, "override generator endpoint");
    run->add_option("--pool-size", override_pool, "override decoding pool size");
    run->add_option("--window", override_window, "override history window");

    CLI11_PARSE(app, argc, argv);

    try {
        if (ingest->parsed()) return run_ingest(in, out, stats_path);
        if (split->parsed()) return run_split(in, split_spec, split_out_dir);
        if (balance->parsed()) return run_balance(in, seed, out);
        if (train->parsed()) {
            train_options.append_eos = !no_eos;
            return run_train(in, train_options, out);
        }
        if (serve->parsed()) {
            if (model_path.empty() == fixture_path.empty()) {
                std::cerr << "serve-stub needs exactly one of --model or --fixture\n";
                return 2;
            }
            return run_serve_stub(model_path, fixture_path, port);
        }
        if (generate->parsed()) {
            if (model_path.empty() == endpoint.empty()) {
                std::cerr << "generate needs exactly one of --model or --endpoint\n";
                return 2;
            }
            return run_generate(model_path, endpoint, history_path, decoding, out);
        }
        if (rerank->parsed()) {
            if (model_path.empty() == endpoint.empty()) {
                std::cerr << "rerank needs exactly one of --model or --endpoint\n";
                return 2;
            }
            return run_rerank(model_path, endpoint, lexicon, in, targets_path, window, decoding, out);
        }
        if (classify->parsed()) return run_classify(lexicon, in, out);
        if (evaluate->parsed()) {
            return run_evaluate(pred_path, gold_path, lexicon, model_path, test_corpus, out);
        }
        if (analyze->parsed()) {
            return run_analyze(results_path, annotations_path, audit_lexicon, lexicon, out);
        }
        if (run->parsed()) {
            std::ifstream cfg(config_path);
            if (!cfg) throw hedgen::IoError("cannot open config file: " + config_path);
            std::ostringstream ss;
            ss << cfg.rdbuf();
            hedgen::RunConfig config = hedgen::parse_run_config(ss.str());
            if (override_seed) {
                config.seed = *override_seed;
                config.seed_set = true;
            }
            if (!override_input.empty()) config.input = override_input;
            if (!override_output.empty()) config.output_dir = override_output;
            if (!override_lexicon.empty()) config.lexicon = override_lexicon;
            if (!override_endpoint.empty()) config.endpoint = override_endpoint;
            if (override_pool) config.decoding.pool_size = *override_pool;
            if (override_window) config.window = *override_window;

            const auto issues = hedgen::validate_run_config(config);
            if (!issues.empty()) {
                std::cerr << "invalid config:\n";
                for (const auto& issue : issues) std::cerr << "  - " << issue << "\n";
                return 2;
            }
            const hedgen::RunManifest manifest = hedgen::run_pipeline(config);
            std::cout << "pipeline done; manifest at " << config.output_dir << "/manifest.json ("
                      << manifest.stages.size() << " stages)\n";
            return 0;
        }
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
    return 0;
}
