#include "hedgen/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <sstream>

#include <json.hpp>

#include "hedgen/error.hpp"
#include "hedgen/text.hpp"

namespace hedgen {

using nlohmann::json;

namespace {

void require_paired(std::size_t c, std::size_t r) {
    if (c != r) {
        throw StructuralError("candidate/reference lists differ in length: " + std::to_string(c) +
                              " vs " + std::to_string(r));
    }
}

// Token n-gram counts keyed by the joined gram.
std::map<std::string, std::size_t> gram_counts(const std::vector<std::string>& tokens, int k) {
    std::map<std::string, std::size_t> counts;
    if (static_cast<int>(tokens.size()) < k) return counts;
    for (std::size_t i = 0; i + static_cast<std::size_t>(k) <= tokens.size(); ++i) {
        std::string key = tokens[i];
        for (int j = 1; j < k; ++j) {
            key += ' ';
            key += tokens[i + static_cast<std::size_t>(j)];
        }
        ++counts[key];
    }
    return counts;
}

std::size_t clipped_matches(const std::map<std::string, std::size_t>& cand,
                            const std::map<std::string, std::size_t>& ref) {
    std::size_t m = 0;
    for (const auto& [gram, count] : cand) {
        auto it = ref.find(gram);
        if (it != ref.end()) m += std::min(count, it->second);
    }
    return m;
}

double f_score(double p, double r, double beta) {
    const double denom = beta * beta * p + r;
    if (denom == 0.0) return 0.0;
    return (1.0 + beta * beta) * p * r / denom;
}

std::size_t lcs_length(const std::vector<std::string>& a, const std::vector<std::string>& b) {
    std::vector<std::size_t> prev(b.size() + 1, 0), cur(b.size() + 1, 0);
    for (std::size_t i = 1; i <= a.size(); ++i) {
        for (std::size_t j = 1; j <= b.size(); ++j) {
            cur[j] = a[i - 1] == b[j - 1] ? prev[j - 1] + 1 : std::max(prev[j], cur[j - 1]);
        }
        std::swap(prev, cur);
    }
    return prev[b.size()];
}

}  // namespace

double bleu(const std::vector<std::string>& candidates, const std::vector<std::string>& references,
            int n) {
    require_paired(candidates.size(), references.size());
    if (n < 1 || n > 3) throw ConfigError("bleu order must be 1, 2 or 3");

    std::vector<std::size_t> match(static_cast<std::size_t>(n), 0);
    std::vector<std::size_t> total(static_cast<std::size_t>(n), 0);
    std::size_t c_len = 0, r_len = 0;
    for (std::size_t i = 0; i < candidates.size(); ++i) {
        const auto c = tokenize(candidates[i]);
        const auto r = tokenize(references[i]);
        c_len += c.size();
        r_len += r.size();
        for (int k = 1; k <= n; ++k) {
            const auto cg = gram_counts(c, k);
            const auto rg = gram_counts(r, k);
            match[static_cast<std::size_t>(k) - 1] += clipped_matches(cg, rg);
            if (static_cast<int>(c.size()) >= k) {
                total[static_cast<std::size_t>(k) - 1] += c.size() - static_cast<std::size_t>(k) + 1;
            }
        }
    }
    if (c_len == 0) return 0.0;

    double log_sum = 0.0;
    for (int k = 1; k <= n; ++k) {
        const std::size_t m = match[static_cast<std::size_t>(k) - 1];
        const std::size_t t = total[static_cast<std::size_t>(k) - 1];
        double p;
        if (t == 0) {
            p = 1.0;  // no k-grams exist at this order; it cannot discriminate
        } else if (m == 0) {
            if (k == 1) return 0.0;
            p = 1.0 / (static_cast<double>(t) + 1.0);
        } else {
            p = static_cast<double>(m) / static_cast<double>(t);
        }
        log_sum += std::log(p) / n;
    }
    const double bp = c_len > r_len
                          ? 1.0
                          : std::exp(1.0 - static_cast<double>(r_len) / static_cast<double>(c_len));
    return 100.0 * bp * std::exp(log_sum);
}

double rouge_l(const std::vector<std::string>& candidates,
               const std::vector<std::string>& references) {
    require_paired(candidates.size(), references.size());
    if (candidates.empty()) return 0.0;
    double sum = 0.0;
    for (std::size_t i = 0; i < candidates.size(); ++i) {
        const auto c = tokenize(candidates[i]);
        const auto r = tokenize(references[i]);
        if (c.empty() && r.empty()) {
            sum += 1.0;
            continue;
        }
        if (c.empty() || r.empty()) continue;
        const std::size_t lcs = lcs_length(c, r);
        if (lcs == 0) continue;
        const double p = static_cast<double>(lcs) / static_cast<double>(c.size());
        const double rec = static_cast<double>(lcs) / static_cast<double>(r.size());
        sum += f_score(p, rec, 1.0);
    }
    return 100.0 * sum / static_cast<double>(candidates.size());
}

double chrf(const std::vector<std::string>& candidates, const std::vector<std::string>& references) {
    require_paired(candidates.size(), references.size());
    constexpr int kMaxOrder = 6;
    constexpr double kBeta = 2.0;

    std::vector<std::size_t> match(kMaxOrder, 0), c_total(kMaxOrder, 0), r_total(kMaxOrder, 0);
    for (std::size_t i = 0; i < candidates.size(); ++i) {
        const std::string c = squash_for_chars(candidates[i]);
        const std::string r = squash_for_chars(references[i]);
        for (int k = 1; k <= kMaxOrder; ++k) {
            std::map<std::string, std::size_t> cg, rg;
            if (static_cast<int>(c.size()) >= k) {
                for (std::size_t p = 0; p + static_cast<std::size_t>(k) <= c.size(); ++p) {
                    ++cg[c.substr(p, static_cast<std::size_t>(k))];
                }
            }
            if (static_cast<int>(r.size()) >= k) {
                for (std::size_t p = 0; p + static_cast<std::size_t>(k) <= r.size(); ++p) {
                    ++rg[r.substr(p, static_cast<std::size_t>(k))];
                }
            }
            match[static_cast<std::size_t>(k) - 1] += clipped_matches(cg, rg);
            for (const auto& [gram, count] : cg) c_total[static_cast<std::size_t>(k) - 1] += count;
            for (const auto& [gram, count] : rg) r_total[static_cast<std::size_t>(k) - 1] += count;
        }
    }

    double p_sum = 0.0, r_sum = 0.0;
    int effective = 0;
    for (int k = 0; k < kMaxOrder; ++k) {
        if (c_total[static_cast<std::size_t>(k)] == 0 && r_total[static_cast<std::size_t>(k)] == 0) {
            continue;
        }
        ++effective;
        if (c_total[static_cast<std::size_t>(k)] > 0) {
            p_sum += static_cast<double>(match[static_cast<std::size_t>(k)]) /
                     static_cast<double>(c_total[static_cast<std::size_t>(k)]);
        }
        if (r_total[static_cast<std::size_t>(k)] > 0) {
            r_sum += static_cast<double>(match[static_cast<std::size_t>(k)]) /
                     static_cast<double>(r_total[static_cast<std::size_t>(k)]);
        }
    }
    if (effective == 0) return 0.0;
    return 100.0 * f_score(p_sum / effective, r_sum / effective, kBeta);
}

double perplexity(const NGramModel& model, const Corpus& corpus) {
    double log_sum = 0.0;
    std::size_t n_tokens = 0;
    for (const Dialogue& d : corpus.dialogues) {
        for (int pos = 1; pos <= static_cast<int>(d.turns.size()); ++pos) {
            const Turn& turn = d.turns[static_cast<std::size_t>(pos - 1)];
            if (turn.speaker != Speaker::Tutor) continue;
            HistoryWindow history = build_history(d, pos, model.window());
            std::vector<TokenId> context = model.context_ids(history);
            std::vector<TokenId> targets = model.vocab().encode(tokenize(turn.text));
            if (model.append_eos()) targets.push_back(Vocabulary::kEos);
            log_sum += model.sequence_log_prob_ids(context, targets);
            n_tokens += targets.size();
        }
    }
    if (n_tokens == 0) throw StructuralError("perplexity is undefined: no tutor tokens to score");
    return std::exp(-log_sum / static_cast<double>(n_tokens));
}

double perplexity_text(const NGramModel& model, const std::vector<std::string>& texts) {
    const std::vector<TokenId> context{Vocabulary::kBos};
    double log_sum = 0.0;
    std::size_t n_tokens = 0;
    for (const std::string& text : texts) {
        std::vector<TokenId> targets = model.vocab().encode(tokenize(text));
        if (model.append_eos()) targets.push_back(Vocabulary::kEos);
        log_sum += model.sequence_log_prob_ids(context, targets);
        n_tokens += targets.size();
    }
    if (n_tokens == 0) throw StructuralError("perplexity is undefined: no tokens to score");
    return std::exp(-log_sum / static_cast<double>(n_tokens));
}

namespace {

double f1_from_counts(std::size_t tp, std::size_t fp, std::size_t fn) {
    const double p = tp + fp == 0 ? 0.0 : static_cast<double>(tp) / static_cast<double>(tp + fp);
    const double r = tp + fn == 0 ? 0.0 : static_cast<double>(tp) / static_cast<double>(tp + fn);
    return f_score(p, r, 1.0);
}

}  // namespace

StrategyF1 strategy_f1(const std::vector<HedgeLabel>& predicted, const std::vector<HedgeLabel>& gold) {
    require_paired(predicted.size(), gold.size());
    StrategyF1 out;
    for (std::size_t i = 0; i < predicted.size(); ++i) {
        const bool p = predicted[i] == HedgeLabel::Hedge;
        const bool g = gold[i] == HedgeLabel::Hedge;
        if (p && g) ++out.tp;
        else if (p && !g) ++out.fp;
        else if (!p && g) ++out.fn;
        else ++out.tn;
    }
    out.binary = f1_from_counts(out.tp, out.fp, out.fn);
    // NonHedge-positive view swaps the roles of the error cells.
    const double non_hedge = f1_from_counts(out.tn, out.fn, out.fp);
    out.macro = (out.binary + non_hedge) / 2.0;
    return out;
}

MetricReport evaluate_items(const std::vector<RerankItem>& items, const RuleSet& audit_rules) {
    std::vector<std::string> chosen, gold_texts;
    std::vector<HedgeLabel> pred_labels, gold_labels;
    MetricReport report;
    for (const RerankItem& item : items) {
        if (!item.error.empty()) {
            ++report.skipped;
            continue;
        }
        chosen.push_back(item.result.chosen.text);
        gold_texts.push_back(item.gold.text);
        pred_labels.push_back(classify_text(item.result.chosen.text, audit_rules).label);
        gold_labels.push_back(item.gold.hedge_label);
    }
    report.pairs = chosen.size();
    if (!chosen.empty()) {
        report.bleu1 = bleu(chosen, gold_texts, 1);
        report.bleu2 = bleu(chosen, gold_texts, 2);
        report.rouge_l = hedgen::rouge_l(chosen, gold_texts);
        report.chrf = hedgen::chrf(chosen, gold_texts);
        const StrategyF1 f1 = strategy_f1(pred_labels, gold_labels);
        report.f1_hedge_binary = f1.binary;
        report.f1_macro = f1.macro;
        report.tp = f1.tp;
        report.fp = f1.fp;
        report.fn = f1.fn;
        report.tn = f1.tn;
    }
    return report;
}

std::string metric_report_json(const MetricReport& report) {
    json j;
    j["bleu1"] = report.bleu1;
    j["bleu2"] = report.bleu2;
    j["rouge_l"] = report.rouge_l;
    j["chrf"] = report.chrf;
    j["perplexity"] = report.perplexity ? json(*report.perplexity) : json(nullptr);
    j["f1_hedge_binary"] = report.f1_hedge_binary;
    j["f1_macro"] = report.f1_macro;
    if (report.bert_score) j["bert_score"] = *report.bert_score;
    if (report.bart_score) j["bart_score"] = *report.bart_score;
    j["counts"] = {{"pairs", report.pairs}, {"skipped", report.skipped}, {"tp", report.tp},
                   {"fp", report.fp},       {"fn", report.fn},           {"tn", report.tn}};
    return j.dump(2);
}

MetricReport metric_report_from_json(const std::string& text) {
    json j = json::parse(text, nullptr, false);
    if (j.is_discarded() || !j.is_object()) throw IoError("invalid metric report JSON");
    MetricReport report;
    report.bleu1 = j.value("bleu1", 0.0);
    report.bleu2 = j.value("bleu2", 0.0);
    report.rouge_l = j.value("rouge_l", 0.0);
    report.chrf = j.value("chrf", 0.0);
    if (j.contains("perplexity") && !j["perplexity"].is_null()) {
        report.perplexity = j["perplexity"].get<double>();
    }
    report.f1_hedge_binary = j.value("f1_hedge_binary", 0.0);
    report.f1_macro = j.value("f1_macro", 0.0);
    if (j.contains("bert_score")) report.bert_score = j["bert_score"].get<double>();
    if (j.contains("bart_score")) report.bart_score = j["bart_score"].get<double>();
    if (j.contains("counts")) {
        const auto& c = j["counts"];
        report.pairs = c.value("pairs", static_cast<std::size_t>(0));
        report.skipped = c.value("skipped", static_cast<std::size_t>(0));
        report.tp = c.value("tp", static_cast<std::size_t>(0));
        report.fp = c.value("fp", static_cast<std::size_t>(0));
        report.fn = c.value("fn", static_cast<std::size_t>(0));
        report.tn = c.value("tn", static_cast<std::size_t>(0));
    }
    return report;
}

}  // namespace hedgen
