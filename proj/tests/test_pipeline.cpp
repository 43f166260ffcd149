#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include "hedgen/error.hpp"
#include "hedgen/external.hpp"
#include "hedgen/metrics.hpp"
#include "hedgen/pipeline.hpp"
#include "hedgen/rerank.hpp"

using namespace hedgen;
namespace fs = std::filesystem;

namespace {

RunConfig small_run(const std::string& output_dir) {
    RunConfig config;
    config.seed = 41;
    config.seed_set = true;
    config.input = HEDGEN_DATA_DIR "/sample_clauses.jsonl";
    config.lexicon = HEDGEN_DATA_DIR "/lexicon.jsonl";
    config.output_dir = output_dir;
    config.decoding.pool_size = 12;
    config.decoding.max_tokens = 12;
    return config;
}

std::string slurp(const std::string& path) {
    std::ifstream in(path);
    REQUIRE(in);
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

}  // namespace

TEST_CASE("config documents parse field by field") {
    RunConfig c = parse_run_config(R"({
        "seed": 7,
        "window": 6,
        "input": "clauses.jsonl",
        "output_dir": "somewhere",
        "lexicon": "lex.jsonl",
        "split": {"train": 0.5, "validation": 0.25, "test": 0.25},
        "decoding": {"pool_size": 25, "beam_width": 40, "max_tokens": 20,
                     "no_repeat_ngram": 3, "repetition_penalty": 1.5},
        "ngram": {"order": 2, "uniform_floor": 0.05, "weights": [0.3, 0.7]},
        "generator": {"endpoint": "http://127.0.0.1:8100"},
        "audit": {"annotations": "ann.jsonl", "lexicon": "audit_lex.jsonl"}
    })");
    CHECK(c.seed == 7);
    CHECK(c.seed_set);
    CHECK(c.window == 6);
    CHECK(c.input == "clauses.jsonl");
    CHECK(c.output_dir == "somewhere");
    CHECK(c.split.train == 0.5);
    CHECK(c.split.test == 0.25);
    CHECK(c.decoding.pool_size == 25);
    CHECK(c.decoding.beam_width == 40);
    CHECK(c.decoding.max_tokens == 20);
    CHECK(c.decoding.no_repeat_ngram == 3);
    CHECK(c.decoding.repetition_penalty == 1.5);
    CHECK(c.train.order == 2);
    CHECK(c.train.uniform_floor == 0.05);
    CHECK(c.train.weights == std::vector<double>{0.3, 0.7});
    CHECK(c.endpoint == "http://127.0.0.1:8100");
    CHECK(c.audit_annotations == "ann.jsonl");
    CHECK(c.audit_lexicon == "audit_lex.jsonl");
}

TEST_CASE("absent config keys fall back to defaults") {
    RunConfig c = parse_run_config("{}");
    CHECK_FALSE(c.seed_set);
    CHECK(c.window == 4);
    CHECK(c.output_dir == "out");
    CHECK(c.split.train == 0.6);
    CHECK(c.decoding.pool_size == 50);
    CHECK(c.decoding.repetition_penalty == 1.2);
    CHECK(c.train.order == 3);
    CHECK(c.endpoint.empty());
}

TEST_CASE("malformed config documents fail with the parser's message") {
    CHECK_THROWS_AS(parse_run_config("{oops"), IoError);
    CHECK_THROWS_AS(parse_run_config("[1,2,3]"), IoError);
    try {
        parse_run_config("{\"seed\": }");
        FAIL("expected IoError");
    } catch (const IoError& e) {
        CHECK(std::string(e.what()).find("not valid JSON") != std::string::npos);
    }
}

TEST_CASE("validation reports every problem at once") {
    RunConfig c;  // nothing set
    auto issues = validate_run_config(c);
    REQUIRE(issues.size() >= 3);
    bool seed = false, input = false, lexicon = false;
    for (const auto& issue : issues) {
        if (issue.rfind("seed:", 0) == 0) seed = true;
        if (issue.rfind("input:", 0) == 0) input = true;
        if (issue.rfind("lexicon:", 0) == 0) lexicon = true;
    }
    CHECK(seed);
    CHECK(input);
    CHECK(lexicon);

    RunConfig bad = small_run("unused");
    bad.split.test = 0.1;  // ratios now sum to 0.9
    bad.decoding.pool_size = 0;
    bad.train.uniform_floor = 1.0;
    auto more = validate_run_config(bad);
    REQUIRE(more.size() == 3);
    CHECK(more[0].rfind("split:", 0) == 0);
    CHECK(more[1].rfind("decoding.pool_size:", 0) == 0);
    CHECK(more[2].rfind("ngram.uniform_floor:", 0) == 0);

    CHECK(validate_run_config(small_run("ok")).empty());
}

TEST_CASE("load_run_config folds all issues into one error") {
    const std::string path = "runcfg_tmp.json";
    {
        std::ofstream out(path);
        out << R"({"input": "no/such/clauses.jsonl"})";
    }
    try {
        load_run_config(path);
        FAIL("expected ConfigError");
    } catch (const ConfigError& e) {
        const std::string what = e.what();
        CHECK(what.find("invalid config:") != std::string::npos);
        CHECK(what.find("seed:") != std::string::npos);
        CHECK(what.find("input:") != std::string::npos);
        CHECK(what.find("lexicon:") != std::string::npos);
    }
    std::remove(path.c_str());
    CHECK_THROWS_AS(load_run_config("no/such/config.json"), IoError);
}

TEST_CASE("the pipeline runs end to end and reproduces itself") {
    RunConfig a = small_run("pl_out_a");
    RunManifest ma = run_pipeline(a);

    REQUIRE(ma.stages.size() == 7);
    const std::vector<std::string> names = {"ingest",  "split",    "balance", "train",
                                            "rerank",  "evaluate", "analyze"};
    for (std::size_t i = 0; i < names.size(); ++i) CHECK(ma.stages[i].name == names[i]);
    for (const auto& stage : ma.stages) {
        CHECK(stage.seconds >= 0.0);
        for (const auto& [path, digest] : stage.outputs) {
            CHECK(fs::exists(path));
            CHECK(digest.size() == 16);  // fnv64 hex
        }
    }
    CHECK(fs::exists("pl_out_a/manifest.json"));
    CHECK(fs::exists("pl_out_a/corpus.jsonl"));
    CHECK(fs::exists("pl_out_a/model.json"));

    // the metric report is a readable artifact with live values
    MetricReport report = metric_report_from_json(slurp("pl_out_a/report.json"));
    CHECK(report.pairs > 0);
    REQUIRE(report.perplexity.has_value());
    CHECK(*report.perplexity > 1.0);

    // byte-identical rerun into another directory
    RunConfig b = small_run("pl_out_b");
    RunManifest mb = run_pipeline(b);
    CHECK(mb.config_digest == ma.config_digest);  // output_dir is not part of the config digest
    CHECK(mb.corpus_digest == ma.corpus_digest);
    REQUIRE(mb.stages.size() == ma.stages.size());
    for (std::size_t i = 0; i < ma.stages.size(); ++i) {
        REQUIRE(mb.stages[i].outputs.size() == ma.stages[i].outputs.size());
        for (std::size_t k = 0; k < ma.stages[i].outputs.size(); ++k) {
            CHECK(mb.stages[i].outputs[k].second == ma.stages[i].outputs[k].second);
        }
    }

    // a different seed reshuffles the run
    RunConfig c = small_run("pl_out_c");
    c.seed = 42;
    RunManifest mc = run_pipeline(c);
    CHECK(mc.config_digest != ma.config_digest);

    const std::string manifest_text = manifest_json(ma);
    CHECK(manifest_text.find("\"config_digest\"") != std::string::npos);
    CHECK(manifest_text.find("\"stages\"") != std::string::npos);

    fs::remove_all("pl_out_a");
    fs::remove_all("pl_out_b");
    fs::remove_all("pl_out_c");
}

TEST_CASE("the rerank stage can source candidates from the wire") {
    StubServer server(std::string(
        R"({"candidates":[{"text":"i think it works","log_prob":-1.0},)"
        R"({"text":"now divide both sides","log_prob":-2.0}]})"));
    server.start();

    RunConfig config = small_run("pl_out_ext");
    config.endpoint = server.endpoint();
    config.decoding.pool_size = 2;
    RunManifest manifest = run_pipeline(config);
    REQUIRE(manifest.stages.size() == 7);

    // every item picked from the canned pool; hedged golds match the hedged
    // candidate and plain golds the plain one, so strategy F1 is perfect
    MetricReport report = metric_report_from_json(slurp("pl_out_ext/report.json"));
    CHECK(report.pairs > 0);
    CHECK(report.f1_hedge_binary == doctest::Approx(1.0));
    CHECK(report.f1_macro == doctest::Approx(1.0));

    auto items = read_rerank_items_file("pl_out_ext/results.jsonl");
    REQUIRE_FALSE(items.empty());
    for (const auto& item : items) {
        CHECK(item.error.empty());
        CHECK(item.result.chosen.source == CandidateSource::External);
    }
    fs::remove_all("pl_out_ext");
}

TEST_CASE("invalid configs never start a run") {
    RunConfig config = small_run("pl_out_never");
    config.seed_set = false;
    CHECK_THROWS_AS(run_pipeline(config), ConfigError);
    CHECK_FALSE(fs::exists("pl_out_never"));
}

TEST_CASE("a failing stage names itself") {
    const std::string broken = "broken_clauses_tmp.jsonl";
    {
        std::ofstream out(broken);
        out << "{oops\n";
    }
    RunConfig config = small_run("pl_out_broken");
    config.input = broken;
    try {
        run_pipeline(config);
        FAIL("expected StructuralError");
    } catch (const StructuralError& e) {
        CHECK(std::string(e.what()).find("stage 'ingest' failed") != std::string::npos);
    }
    std::remove(broken.c_str());
    fs::remove_all("pl_out_broken");
}
