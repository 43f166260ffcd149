#include "hedgen/pipeline.hpp"

#include <chrono>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <sstream>

#include <json.hpp>

#include "hedgen/analysis.hpp"
#include "hedgen/classifier.hpp"
#include "hedgen/digest.hpp"
#include "hedgen/error.hpp"
#include "hedgen/external.hpp"
#include "hedgen/metrics.hpp"
#include "hedgen/rerank.hpp"

namespace hedgen {

namespace fs = std::filesystem;
using nlohmann::json;

RunConfig parse_run_config(const std::string& json_text) {
    json j;
    try {
        j = json::parse(json_text);
    } catch (const json::parse_error& e) {
        throw IoError(std::string("config is not valid JSON: ") + e.what());
    }
    if (!j.is_object()) throw IoError("config must be a JSON object");

    RunConfig config;
    if (j.contains("seed")) {
        config.seed = j["seed"].get<std::uint64_t>();
        config.seed_set = true;
    }
    config.window = j.value("window", 4);
    config.input = j.value("input", "");
    config.output_dir = j.value("output_dir", "out");
    config.lexicon = j.value("lexicon", "");
    if (j.contains("split")) {
        const auto& s = j["split"];
        config.split.train = s.value("train", 0.6);
        config.split.validation = s.value("validation", 0.2);
        config.split.test = s.value("test", 0.2);
    }
    if (j.contains("decoding")) {
        const auto& d = j["decoding"];
        config.decoding.pool_size = d.value("pool_size", 50);
        config.decoding.beam_width = d.value("beam_width", 0);
        config.decoding.max_tokens = d.value("max_tokens", 30);
        config.decoding.no_repeat_ngram = d.value("no_repeat_ngram", 2);
        config.decoding.repetition_penalty = d.value("repetition_penalty", 1.2);
    }
    if (j.contains("ngram")) {
        const auto& n = j["ngram"];
        config.train.order = n.value("order", 3);
        config.train.uniform_floor = n.value("uniform_floor", 0.01);
        if (n.contains("weights")) config.train.weights = n["weights"].get<std::vector<double>>();
    }
    if (j.contains("generator")) {
        config.endpoint = j["generator"].value("endpoint", "");
    }
    if (j.contains("audit")) {
        config.audit_annotations = j["audit"].value("annotations", "");
        config.audit_lexicon = j["audit"].value("lexicon", "");
    }
    return config;
}

std::vector<std::string> validate_run_config(const RunConfig& config) {
    std::vector<std::string> issues;
    if (!config.seed_set) issues.push_back("seed: required but missing");
    if (config.input.empty()) {
        issues.push_back("input: required but missing");
    } else if (!fs::exists(config.input)) {
        issues.push_back("input: file does not exist: " + config.input);
    }
    if (config.lexicon.empty()) {
        issues.push_back("lexicon: required but missing");
    } else if (!fs::exists(config.lexicon)) {
        issues.push_back("lexicon: file does not exist: " + config.lexicon);
    }
    const double sum = config.split.train + config.split.validation + config.split.test;
    if (std::abs(sum - 1.0) > 1e-9) {
        std::ostringstream ss;
        ss << "split: ratios sum to " << sum << ", expected 1";
        issues.push_back(ss.str());
    }
    for (double ratio : {config.split.train, config.split.validation, config.split.test}) {
        if (ratio <= 0.0 || ratio >= 1.0) {
            issues.push_back("split: each ratio must lie in (0,1)");
            break;
        }
    }
    if (config.window < 1) issues.push_back("window: must be positive");
    if (config.decoding.pool_size < 1) issues.push_back("decoding.pool_size: must be positive");
    if (config.decoding.max_tokens < 1) issues.push_back("decoding.max_tokens: must be positive");
    if (config.decoding.repetition_penalty < 1.0) {
        issues.push_back("decoding.repetition_penalty: must be at least 1");
    }
    if (config.decoding.no_repeat_ngram < 0) {
        issues.push_back("decoding.no_repeat_ngram: must be non-negative");
    }
    if (config.train.order < 1) issues.push_back("ngram.order: must be at least 1");
    if (config.train.uniform_floor < 0.0 || config.train.uniform_floor >= 1.0) {
        issues.push_back("ngram.uniform_floor: must lie in [0,1)");
    }
    if (!config.train.weights.empty() &&
        static_cast<int>(config.train.weights.size()) != config.train.order) {
        issues.push_back("ngram.weights: need one weight per order");
    }
    if (!config.audit_annotations.empty() && !fs::exists(config.audit_annotations)) {
        issues.push_back("audit.annotations: file does not exist: " + config.audit_annotations);
    }
    if (!config.audit_lexicon.empty() && !fs::exists(config.audit_lexicon)) {
        issues.push_back("audit.lexicon: file does not exist: " + config.audit_lexicon);
    }
    return issues;
}

RunConfig load_run_config(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw IoError("cannot open config file: " + path);
    std::ostringstream ss;
    ss << in.rdbuf();
    RunConfig config = parse_run_config(ss.str());
    const auto issues = validate_run_config(config);
    if (!issues.empty()) {
        std::string message = "invalid config:";
        for (const auto& issue : issues) message += "\n  - " + issue;
        throw ConfigError(message);
    }
    return config;
}

namespace {

class StageRunner {
  public:
    StageRunner(RunManifest& manifest, std::string output_dir)
        : manifest_(manifest), output_dir_(std::move(output_dir)) {}

    template <typename Fn>
    void run(const std::string& name, Fn&& fn) {
        StageRecord record;
        record.name = name;
        const auto start = std::chrono::steady_clock::now();
        try {
            fn(record);
        } catch (const std::exception& e) {
            throw StructuralError("stage '" + name + "' failed: " + e.what());
        }
        record.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
        manifest_.stages.push_back(std::move(record));
    }

    std::string path(const std::string& file) const { return (fs::path(output_dir_) / file).string(); }

    static void note_output(StageRecord& record, const std::string& path) {
        record.outputs.emplace_back(path, file_digest(path));
    }

  private:
    RunManifest& manifest_;
    std::string output_dir_;
};

}  // namespace

RunManifest run_pipeline(const RunConfig& config) {
    {
        const auto issues = validate_run_config(config);
        if (!issues.empty()) {
            std::string message = "invalid config:";
            for (const auto& issue : issues) message += "\n  - " + issue;
            throw ConfigError(message);
        }
    }
    fs::create_directories(config.output_dir);

    RunManifest manifest;
    manifest.seed = config.seed;
    manifest.corpus_digest = file_digest(config.input);
    {
        // The digest covers the effective configuration, not the file bytes,
        // so a reordered config document digests identically.
        json j;
        j["seed"] = config.seed;
        j["window"] = config.window;
        j["input_digest"] = manifest.corpus_digest;
        j["lexicon_digest"] = file_digest(config.lexicon);
        j["split"] = {config.split.train, config.split.validation, config.split.test};
        j["decoding"] = {config.decoding.pool_size, config.decoding.beam_width, config.decoding.max_tokens,
                         config.decoding.no_repeat_ngram, config.decoding.repetition_penalty};
        j["ngram"] = {{"order", config.train.order},
                      {"floor", config.train.uniform_floor},
                      {"weights", config.train.weights}};
        j["endpoint"] = config.endpoint;
        manifest.config_digest = hex_digest(j.dump());
    }

    StageRunner stages(manifest, config.output_dir);
    const RuleSet rules = read_lexicon_file(config.lexicon);

    Corpus corpus;
    stages.run("ingest", [&](StageRecord& record) {
        corpus = merge_clauses_to_turns(read_clauses_file(config.input));
        corpus.provenance = manifest.corpus_digest;
        write_corpus_file(corpus, stages.path("corpus.jsonl"));
        StageRunner::note_output(record, stages.path("corpus.jsonl"));
    });

    SplitResult parts;
    stages.run("split", [&](StageRecord& record) {
        SplitSpec spec = config.split;
        spec.seed = derive_seed(config.seed, "split");
        parts = split_dataset(corpus, spec);
        write_corpus_file(parts.train, stages.path("train.jsonl"));
        write_corpus_file(parts.validation, stages.path("validation.jsonl"));
        write_corpus_file(parts.test, stages.path("test.jsonl"));
        StageRunner::note_output(record, stages.path("train.jsonl"));
        StageRunner::note_output(record, stages.path("validation.jsonl"));
        StageRunner::note_output(record, stages.path("test.jsonl"));
    });

    std::vector<Turn> balanced;
    stages.run("balance", [&](StageRecord& record) {
        balanced = balance_test_set(parts.test, derive_seed(config.seed, "balance"));
        write_turns_file(balanced, stages.path("balanced.jsonl"));
        StageRunner::note_output(record, stages.path("balanced.jsonl"));
    });

    NGramModel model;
    stages.run("train", [&](StageRecord& record) {
        TrainOptions options = config.train;
        options.window = config.window;
        options.append_eos = true;  // decoding needs a learned end-of-turn
        model = train_ngram(parts.train, options);
        model.save(stages.path("model.json"));
        StageRunner::note_output(record, stages.path("model.json"));
    });

    std::vector<RerankItem> items;
    stages.run("rerank", [&](StageRecord& record) {
        GeneratorFn generate;
        if (config.endpoint.empty()) {
            generate = [&](const HistoryWindow& history) {
                return beam_generate(model, history, config.decoding);
            };
        } else {
            generate = [&](const HistoryWindow& history) {
                return external_generate(config.endpoint, history, config.decoding);
            };
        }
        items = rerank_corpus(balanced, parts.test, config.window, generate, rules);
        write_rerank_items_file(items, stages.path("results.jsonl"));
        StageRunner::note_output(record, stages.path("results.jsonl"));
    });

    stages.run("evaluate", [&](StageRecord& record) {
        const RuleSet* audit = &rules;
        RuleSet audit_rules;
        if (!config.audit_lexicon.empty()) {
            audit_rules = read_lexicon_file(config.audit_lexicon);
            audit = &audit_rules;
        }
        MetricReport report = evaluate_items(items, *audit);
        report.perplexity = perplexity(model, parts.test);
        std::ofstream out(stages.path("report.json"));
        out << metric_report_json(report) << "\n";
        out.close();
        StageRunner::note_output(record, stages.path("report.json"));
    });

    stages.run("analyze", [&](StageRecord& record) {
        AuditAnnotations annotations;
        const AuditAnnotations* annotations_ptr = nullptr;
        if (!config.audit_annotations.empty()) {
            annotations = read_annotations_file(config.audit_annotations);
            annotations_ptr = &annotations;
        }
        RuleSet audit_rules;
        const RuleSet* audit = &rules;
        if (!config.audit_lexicon.empty()) {
            audit_rules = read_lexicon_file(config.audit_lexicon);
            audit = &audit_rules;
        }
        AnalysisReport report = analyze_items(items, annotations_ptr, audit);
        std::ofstream out(stages.path("analysis.json"));
        out << analysis_report_json(report) << "\n";
        out.close();
        StageRunner::note_output(record, stages.path("analysis.json"));
    });

    {
        std::ofstream out((fs::path(config.output_dir) / "manifest.json").string());
        out << manifest_json(manifest) << "\n";
    }
    return manifest;
}

std::string manifest_json(const RunManifest& manifest) {
    json stages = json::array();
    for (const StageRecord& s : manifest.stages) {
        json outputs = json::array();
        for (const auto& [path, digest] : s.outputs) {
            outputs.push_back({{"path", path}, {"digest", digest}});
        }
        stages.push_back({{"name", s.name}, {"seconds", s.seconds}, {"outputs", outputs}});
    }
    json j;
    j["config_digest"] = manifest.config_digest;
    j["corpus_digest"] = manifest.corpus_digest;
    j["seed"] = manifest.seed;
    j["stages"] = stages;
    return j.dump(2);
}

}  // namespace hedgen
