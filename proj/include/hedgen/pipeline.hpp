#pragma once

#include <cstdint>
#include <string>
#include <utility>
#include <vector>

#include "hedgen/corpus.hpp"
#include "hedgen/generate.hpp"
#include "hedgen/ngram.hpp"

namespace hedgen {

struct RunConfig {
    std::uint64_t seed = 0;
    bool seed_set = false;  // the seed is mandatory; 0 is a legal value
    int window = 4;
    std::string input;       // clause-level JSONL
    std::string output_dir = "out";
    std::string lexicon;
    SplitSpec split;         // ratios only; stage seeds derive from `seed`
    DecodingConfig decoding;
    TrainOptions train;      // order/weights/floor; window and EOS are set by the run
    std::string endpoint;    // external generator; empty runs the n-gram in-process
    std::string audit_annotations;  // optional human audit labels
    std::string audit_lexicon;      // optional oracle ruleset for auditing
};

// Parses the JSON document; throws IoError with the parser's location on
// malformed input. Field validation is separate so all problems can be
// reported together.
RunConfig parse_run_config(const std::string& json_text);

// Every problem with the config, one message per field. Empty means valid.
std::vector<std::string> validate_run_config(const RunConfig& config);

// parse + validate; throws ConfigError carrying the full issue list.
RunConfig load_run_config(const std::string& path);

struct StageRecord {
    std::string name;
    double seconds = 0.0;
    // (path, digest) per artifact the stage wrote.
    std::vector<std::pair<std::string, std::string>> outputs;
};

struct RunManifest {
    std::string config_digest;
    std::string corpus_digest;
    std::uint64_t seed = 0;
    std::vector<StageRecord> stages;
};

// Executes ingest, split, balance, train, rerank, evaluate, analyze in
// order, writing every intermediate artifact under output_dir plus a
// manifest.json. Identical config and inputs reproduce identical artifact
// digests. A stage failure throws with the stage's name in the message.
RunManifest run_pipeline(const RunConfig& config);

std::string manifest_json(const RunManifest& manifest);

}  // namespace hedgen
