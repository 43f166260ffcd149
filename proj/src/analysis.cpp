#include "hedgen/analysis.hpp"

#include <fstream>

#include <json.hpp>

#include "hedgen/error.hpp"

namespace hedgen {

using nlohmann::json;

const char* to_string(ErrorDirection d) {
    return d == ErrorDirection::OverGeneration ? "over_generation" : "under_generation";
}

const char* to_string(ErrorCause c) {
    return c == ErrorCause::ClassificationError ? "classification_error" : "goal_mismatch";
}

AuditAnnotations read_annotations_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw IoError("cannot open annotations file: " + path);
    AuditAnnotations annotations;
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (line.empty() || line[0] == '#') continue;
        json j = json::parse(line, nullptr, false);
        if (j.is_discarded()) {
            throw IoError("invalid JSON in annotations line " + std::to_string(line_no));
        }
        const auto key = std::make_pair(j.at("dialogue_id").get<std::string>(),
                                        j.at("turn_index").get<int>());
        annotations.labels[key] =
            j.at("hedge").get<int>() == 1 ? HedgeLabel::Hedge : HedgeLabel::NonHedge;
    }
    return annotations;
}

std::optional<ErrorRecord> classify_mismatch(const RerankItem& item, HedgeLabel audit_label) {
    if (audit_label == item.gold.hedge_label) return std::nullopt;

    ErrorRecord record;
    record.dialogue_id = item.gold.dialogue_id;
    record.turn_index = item.gold.turn_index;
    record.direction = audit_label == HedgeLabel::Hedge ? ErrorDirection::OverGeneration
                                                        : ErrorDirection::UnderGeneration;
    record.rapport_band = rapport_band(item.gold.rapport);
    record.fallback_used = !item.result.matched;

    // The classifier's own verdict on the chosen candidate sits in the pool
    // audit trail at the chosen rank.
    HedgeLabel classifier_label = HedgeLabel::NonHedge;
    if (item.result.chosen_rank >= 1 &&
        static_cast<std::size_t>(item.result.chosen_rank) <= item.result.verdicts.size()) {
        classifier_label = item.result.verdicts[static_cast<std::size_t>(item.result.chosen_rank - 1)].label;
    }
    record.cause = classifier_label != audit_label ? ErrorCause::ClassificationError
                                                   : ErrorCause::GoalMismatch;
    return record;
}

RapportTable stratify_by_rapport(const std::vector<ErrorRecord>& records) {
    RapportTable table;
    for (const ErrorRecord& r : records) {
        if (r.cause != ErrorCause::GoalMismatch) continue;
        const bool over = r.direction == ErrorDirection::OverGeneration;
        switch (r.rapport_band) {
            case RapportBand::High: (over ? table.over_high : table.under_high)++; break;
            case RapportBand::Medium: (over ? table.over_medium : table.under_medium)++; break;
            case RapportBand::Low: (over ? table.over_low : table.under_low)++; break;
            case RapportBand::Unknown: (over ? table.over_unknown : table.under_unknown)++; break;
        }
    }
    return table;
}

ErrorSummary error_summary(const std::vector<ErrorRecord>& records) {
    ErrorSummary s;
    s.total = records.size();
    for (const ErrorRecord& r : records) {
        const bool classification = r.cause == ErrorCause::ClassificationError;
        if (r.direction == ErrorDirection::OverGeneration) {
            ++s.over;
            (classification ? s.over_classification : s.over_goal)++;
        } else {
            ++s.under;
            (classification ? s.under_classification : s.under_goal)++;
        }
    }
    if (s.total > 0) {
        s.over_share = static_cast<double>(s.over) / static_cast<double>(s.total);
        s.under_share = static_cast<double>(s.under) / static_cast<double>(s.total);
    }
    if (s.over > 0) {
        s.over_classification_share = static_cast<double>(s.over_classification) / static_cast<double>(s.over);
        s.over_goal_share = static_cast<double>(s.over_goal) / static_cast<double>(s.over);
    }
    if (s.under > 0) {
        s.under_classification_share =
            static_cast<double>(s.under_classification) / static_cast<double>(s.under);
        s.under_goal_share = static_cast<double>(s.under_goal) / static_cast<double>(s.under);
    }
    return s;
}

AnalysisReport analyze_items(const std::vector<RerankItem>& items,
                             const AuditAnnotations* annotations, const RuleSet* audit_rules) {
    if (!annotations && !audit_rules) {
        throw ConfigError("analysis needs an annotations file or an audit ruleset");
    }
    AnalysisReport report;
    for (const RerankItem& item : items) {
        if (!item.error.empty()) {
            ++report.skipped_error;
            continue;
        }
        std::optional<HedgeLabel> audit;
        if (annotations) {
            auto it = annotations->labels.find({item.gold.dialogue_id, item.gold.turn_index});
            if (it != annotations->labels.end()) audit = it->second;
        }
        if (!audit && audit_rules) {
            audit = classify_text(item.result.chosen.text, *audit_rules).label;
        }
        if (!audit) {
            ++report.skipped_no_audit;
            continue;
        }
        ++report.items;
        if (item.gold.hedge_label == HedgeLabel::Hedge) {
            switch (rapport_band(item.gold.rapport)) {
                case RapportBand::Low: ++report.gold_hedge_low; break;
                case RapportBand::Medium: ++report.gold_hedge_medium; break;
                case RapportBand::High: ++report.gold_hedge_high; break;
                case RapportBand::Unknown: ++report.gold_hedge_unknown; break;
            }
        }
        if (auto record = classify_mismatch(item, *audit)) {
            report.records.push_back(*record);
        }
    }
    report.summary = error_summary(report.records);
    report.table = stratify_by_rapport(report.records);
    return report;
}

std::string analysis_report_json(const AnalysisReport& report) {
    json j;
    j["items"] = report.items;
    j["skipped"] = {{"generation_error", report.skipped_error}, {"no_audit", report.skipped_no_audit}};

    const ErrorSummary& s = report.summary;
    j["errors"] = {
        {"total", s.total},
        {"over_generation",
         {{"count", s.over},
          {"share", s.over_share},
          {"classification_error", {{"count", s.over_classification}, {"share", s.over_classification_share}}},
          {"goal_mismatch", {{"count", s.over_goal}, {"share", s.over_goal_share}}}}},
        {"under_generation",
         {{"count", s.under},
          {"share", s.under_share},
          {"classification_error", {{"count", s.under_classification}, {"share", s.under_classification_share}}},
          {"goal_mismatch", {{"count", s.under_goal}, {"share", s.under_goal_share}}}}},
    };

    const RapportTable& t = report.table;
    j["goal_mismatch_by_rapport"] = {
        {"over_generation",
         {{"high", t.over_high}, {"medium", t.over_medium}, {"low", t.over_low}, {"unknown", t.over_unknown}}},
        {"under_generation",
         {{"high", t.under_high},
          {"medium", t.under_medium},
          {"low", t.under_low},
          {"unknown", t.under_unknown}}},
    };

    j["gold_hedges_by_rapport"] = {{"low", report.gold_hedge_low},
                                   {"medium", report.gold_hedge_medium},
                                   {"high", report.gold_hedge_high},
                                   {"unknown", report.gold_hedge_unknown}};

    json records = json::array();
    for (const ErrorRecord& r : report.records) {
        records.push_back({{"dialogue_id", r.dialogue_id},
                           {"turn_index", r.turn_index},
                           {"direction", to_string(r.direction)},
                           {"cause", to_string(r.cause)},
                           {"rapport_band", to_string(r.rapport_band)},
                           {"fallback_used", r.fallback_used}});
    }
    j["records"] = records;
    return j.dump(2);
}

}  // namespace hedgen
