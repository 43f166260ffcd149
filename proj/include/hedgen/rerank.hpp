#pragma once

#include <functional>
#include <string>
#include <vector>

#include "hedgen/classifier.hpp"
#include "hedgen/corpus.hpp"
#include "hedgen/generate.hpp"

namespace hedgen {

// The strategy the chosen utterance should realize.
using TargetStrategy = HedgeLabel;

struct RerankResult {
    Candidate chosen;
    // True when the pool contained at least one candidate of the target
    // strategy; false means `chosen` is the fallback (global score maximum).
    bool matched = false;
    int chosen_rank = 0;  // 1-based position in score order
    int pool_match_count = 0;
    // Verdicts for the whole pool, parallel to its score order — the audit
    // trail the analysis stage consumes.
    std::vector<HedgeVerdict> verdicts;
};

// Classifier-guided selection: take the highest-scored candidate whose
// verdict matches the target, or fall back to the overall highest-scored
// candidate when none does. Ties break toward the earlier pool index.
RerankResult rerank(const CandidatePool& pool, TargetStrategy target, const RuleSet& rules);

// One reranking item of a corpus run: the gold tutor turn, its history, and
// what selection did.
struct RerankItem {
    Turn gold;
    HistoryWindow history;
    RerankResult result;
    // Non-empty when the generator failed on this item; `result` is then
    // empty and the run carried on.
    std::string error;
};

using GeneratorFn = std::function<CandidatePool(const HistoryWindow&)>;

// Runs the selection over every turn of `targets` (gold label = target
// strategy), pulling candidate pools from `generate`. Items whose generation
// fails are recorded with their error and skipped, not fatal.
std::vector<RerankItem> rerank_corpus(const std::vector<Turn>& targets, const Corpus& corpus,
                                      int window, const GeneratorFn& generate,
                                      const RuleSet& rules);

std::string rerank_item_json(const RerankItem& item);
std::vector<RerankItem> read_rerank_items_file(const std::string& path);
void write_rerank_items_file(const std::vector<RerankItem>& items, const std::string& path);

}  // namespace hedgen
