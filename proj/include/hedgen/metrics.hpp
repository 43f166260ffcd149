#pragma once

#include <cstddef>
#include <optional>
#include <string>
#include <vector>

#include "hedgen/classifier.hpp"
#include "hedgen/corpus.hpp"
#include "hedgen/ngram.hpp"
#include "hedgen/rerank.hpp"

namespace hedgen {

// Corpus-level BLEU-n on the 0..100 scale: modified n-gram precision with
// clipping, geometric mean over orders 1..n, brevity penalty exp(1 - r/c)
// when the candidate side is shorter. Orders >= 2 with zero matches get
// add-one smoothing; a zero unigram match stays a hard zero.
double bleu(const std::vector<std::string>& candidates, const std::vector<std::string>& references,
            int n);

// Sentence-level LCS F1 (beta = 1) averaged over pairs, scaled to 0..100.
double rouge_l(const std::vector<std::string>& candidates,
               const std::vector<std::string>& references);

// Character n-gram F-score, orders 1..6, recall weight beta = 2, whitespace
// stripped before extraction. Statistics aggregate over the corpus; orders
// with no grams on either side do not count toward the average.
double chrf(const std::vector<std::string>& candidates, const std::vector<std::string>& references);

// exp of the mean negative log-probability per token. The corpus form scores
// every tutor turn conditioned on its history window (plus the end-of-turn
// transition when the model was trained with one); the text form conditions
// on BOS only.
double perplexity(const NGramModel& model, const Corpus& corpus);
double perplexity_text(const NGramModel& model, const std::vector<std::string>& texts);

struct StrategyF1 {
    double binary = 0.0;  // Hedge as the positive class
    double macro = 0.0;   // mean of the two per-class F1s
    std::size_t tp = 0, fp = 0, fn = 0, tn = 0;
};

StrategyF1 strategy_f1(const std::vector<HedgeLabel>& predicted, const std::vector<HedgeLabel>& gold);

struct MetricReport {
    double bleu1 = 0.0;
    double bleu2 = 0.0;
    double rouge_l = 0.0;
    double chrf = 0.0;
    std::optional<double> perplexity;
    double f1_hedge_binary = 0.0;
    double f1_macro = 0.0;
    // Slots for externally computed neural metrics, merged into the report
    // when a scorer supplies them.
    std::optional<double> bert_score;
    std::optional<double> bart_score;
    std::size_t pairs = 0;
    std::size_t skipped = 0;  // items that carried a generation error
    std::size_t tp = 0, fp = 0, fn = 0, tn = 0;
};

// Scores chosen texts against gold turns. Prediction labels come from
// re-classifying each chosen text with `audit_rules`; gold labels from the
// gold turns. Items with a recorded error are skipped and counted.
MetricReport evaluate_items(const std::vector<RerankItem>& items, const RuleSet& audit_rules);

std::string metric_report_json(const MetricReport& report);
MetricReport metric_report_from_json(const std::string& text);

}  // namespace hedgen
