#pragma once

#include <map>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "hedgen/classifier.hpp"
#include "hedgen/corpus.hpp"
#include "hedgen/rerank.hpp"

namespace hedgen {

enum class ErrorDirection { OverGeneration, UnderGeneration };
enum class ErrorCause { ClassificationError, GoalMismatch };

const char* to_string(ErrorDirection d);
const char* to_string(ErrorCause c);

// One strategy mismatch: the generated utterance's audited label disagrees
// with the gold turn's label.
struct ErrorRecord {
    std::string dialogue_id;
    int turn_index = 0;
    ErrorDirection direction = ErrorDirection::OverGeneration;
    ErrorCause cause = ErrorCause::GoalMismatch;
    RapportBand rapport_band = RapportBand::Unknown;
    bool fallback_used = false;
};

// Human audit labels for generated utterances, keyed by the gold turn they
// answer. Overrides any oracle ruleset where present.
struct AuditAnnotations {
    std::map<std::pair<std::string, int>, HedgeLabel> labels;
};

AuditAnnotations read_annotations_file(const std::string& path);

// None when the audited label of the generated text equals the gold label.
// Otherwise the direction follows the two labels, and the cause is
// ClassificationError when the reranking classifier's verdict on the chosen
// text disagrees with the audit, GoalMismatch otherwise.
std::optional<ErrorRecord> classify_mismatch(const RerankItem& item, HedgeLabel audit_label);

// GoalMismatch counts per direction and rapport band.
struct RapportTable {
    std::size_t over_high = 0, over_medium = 0, over_low = 0, over_unknown = 0;
    std::size_t under_high = 0, under_medium = 0, under_low = 0, under_unknown = 0;
};

RapportTable stratify_by_rapport(const std::vector<ErrorRecord>& records);

// Direction proportions and, within each direction, cause proportions.
// Shares are fractions in [0,1]; each non-empty grouping sums to 1.
struct ErrorSummary {
    std::size_t total = 0;
    std::size_t over = 0, under = 0;
    double over_share = 0.0, under_share = 0.0;
    std::size_t over_classification = 0, over_goal = 0;
    std::size_t under_classification = 0, under_goal = 0;
    double over_classification_share = 0.0, over_goal_share = 0.0;
    double under_classification_share = 0.0, under_goal_share = 0.0;
};

ErrorSummary error_summary(const std::vector<ErrorRecord>& records);

struct AnalysisReport {
    std::vector<ErrorRecord> records;
    std::size_t items = 0;            // usable reranking items examined
    std::size_t skipped_error = 0;    // items that carried a generation error
    std::size_t skipped_no_audit = 0;  // items with no audit label available
    ErrorSummary summary;
    RapportTable table;
    // Gold hedge turns per rapport band over the examined items.
    std::size_t gold_hedge_low = 0, gold_hedge_medium = 0, gold_hedge_high = 0,
                gold_hedge_unknown = 0;
};

// Audit label per item: the annotation entry when present, else the oracle
// ruleset's verdict, else the item is skipped and counted. At least one
// source must be given.
AnalysisReport analyze_items(const std::vector<RerankItem>& items,
                             const AuditAnnotations* annotations, const RuleSet* audit_rules);

std::string analysis_report_json(const AnalysisReport& report);

}  // namespace hedgen
