#include "hedgen/rerank.hpp"

#include <algorithm>
#include <fstream>
#include <numeric>
#include <sstream>

#include <json.hpp>

#include "hedgen/error.hpp"

namespace hedgen {

using nlohmann::json;

RerankResult rerank(const CandidatePool& pool, TargetStrategy target, const RuleSet& rules) {
    if (pool.candidates.empty()) throw StructuralError("cannot rerank an empty candidate pool");

    // Defensive resort; stable so equal scores keep their pool order.
    std::vector<std::size_t> order(pool.candidates.size());
    std::iota(order.begin(), order.end(), 0);
    std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
        return pool.candidates[a].score > pool.candidates[b].score;
    });

    RerankResult result;
    result.verdicts.reserve(order.size());
    int best_match = -1;
    for (std::size_t rank = 0; rank < order.size(); ++rank) {
        const Candidate& c = pool.candidates[order[rank]];
        HedgeVerdict v = classify_text(c.text, rules);
        if (v.label == target) {
            ++result.pool_match_count;
            if (best_match < 0) best_match = static_cast<int>(rank);
        }
        result.verdicts.push_back(std::move(v));
    }

    if (best_match >= 0) {
        result.matched = true;
        result.chosen_rank = best_match + 1;
        result.chosen = pool.candidates[order[static_cast<std::size_t>(best_match)]];
    } else {
        result.matched = false;
        result.chosen_rank = 1;
        result.chosen = pool.candidates[order[0]];
    }
    return result;
}

std::vector<RerankItem> rerank_corpus(const std::vector<Turn>& targets, const Corpus& corpus,
                                      int window, const GeneratorFn& generate,
                                      const RuleSet& rules) {
    std::vector<RerankItem> items;
    items.reserve(targets.size());
    for (const Turn& gold : targets) {
        RerankItem item;
        item.gold = gold;
        try {
            const Dialogue* dialogue = corpus.find_dialogue(gold.dialogue_id);
            if (!dialogue) {
                throw StructuralError("turn references unknown dialogue '" + gold.dialogue_id + "'");
            }
            int position = 0;
            for (std::size_t i = 0; i < dialogue->turns.size(); ++i) {
                if (dialogue->turns[i].turn_index == gold.turn_index) {
                    position = static_cast<int>(i) + 1;
                    break;
                }
            }
            if (position == 0) {
                throw StructuralError("turn " + std::to_string(gold.turn_index) +
                                      " not found in dialogue '" + gold.dialogue_id + "'");
            }
            item.history = build_history(*dialogue, position, window);
            CandidatePool pool = generate(item.history);
            item.result = rerank(pool, gold.hedge_label, rules);
        } catch (const std::exception& e) {
            item.error = e.what();
        }
        items.push_back(std::move(item));
    }
    return items;
}

namespace {

json verdict_to_json(const HedgeVerdict& v) {
    json j;
    j["label"] = v.label == HedgeLabel::Hedge ? 1 : 0;
    json fired = json::array();
    for (const auto& m : v.fired) {
        fired.push_back({{"rule", m.rule_id}, {"begin", m.begin}, {"end", m.end}});
    }
    j["fired"] = fired;
    json subs = json::array();
    for (Subcategory s : v.subcategories) subs.push_back(to_string(s));
    j["subcategories"] = subs;
    return j;
}

HedgeVerdict verdict_from_json(const json& j) {
    HedgeVerdict v;
    v.label = j.at("label").get<int>() == 1 ? HedgeLabel::Hedge : HedgeLabel::NonHedge;
    for (const auto& m : j.at("fired")) {
        v.fired.push_back(RuleMatch{m.at("rule").get<std::string>(), m.at("begin").get<std::size_t>(),
                                    m.at("end").get<std::size_t>()});
    }
    for (const auto& s : j.at("subcategories")) {
        if (auto sub = subcategory_from_string(s.get<std::string>())) v.subcategories.insert(*sub);
    }
    return v;
}

}  // namespace

std::string rerank_item_json(const RerankItem& item) {
    json j;
    j["dialogue_id"] = item.gold.dialogue_id;
    j["turn_index"] = item.gold.turn_index;
    j["gold_text"] = item.gold.text;
    j["gold_label"] = item.gold.hedge_label == HedgeLabel::Hedge ? 1 : 0;
    if (item.gold.rapport) {
        j["rapport"] = *item.gold.rapport;
    } else {
        j["rapport"] = nullptr;
    }
    if (!item.error.empty()) {
        j["error"] = item.error;
        return j.dump();
    }
    j["chosen_text"] = item.result.chosen.text;
    j["chosen_score"] = item.result.chosen.score;
    j["source"] = item.result.chosen.source == CandidateSource::External ? "external" : "ngram";
    j["matched"] = item.result.matched;
    j["chosen_rank"] = item.result.chosen_rank;
    j["pool_match_count"] = item.result.pool_match_count;
    json verdicts = json::array();
    for (const auto& v : item.result.verdicts) verdicts.push_back(verdict_to_json(v));
    j["verdicts"] = verdicts;
    return j.dump();
}

void write_rerank_items_file(const std::vector<RerankItem>& items, const std::string& path) {
    std::ofstream out(path);
    if (!out) throw IoError("cannot write results file: " + path);
    for (const auto& item : items) out << rerank_item_json(item) << "\n";
}

std::vector<RerankItem> read_rerank_items_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw IoError("cannot open results file: " + path);
    std::vector<RerankItem> items;
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (line.empty()) continue;
        json j = json::parse(line, nullptr, false);
        if (j.is_discarded()) throw IoError("invalid JSON in results line " + std::to_string(line_no));
        RerankItem item;
        item.gold.dialogue_id = j.at("dialogue_id").get<std::string>();
        item.gold.turn_index = j.at("turn_index").get<int>();
        item.gold.speaker = Speaker::Tutor;
        item.gold.text = j.at("gold_text").get<std::string>();
        item.gold.hedge_label = j.at("gold_label").get<int>() == 1 ? HedgeLabel::Hedge : HedgeLabel::NonHedge;
        if (j.contains("rapport") && !j["rapport"].is_null()) {
            item.gold.rapport = j["rapport"].get<double>();
        }
        if (j.contains("error")) {
            item.error = j["error"].get<std::string>();
            items.push_back(std::move(item));
            continue;
        }
        item.result.chosen.text = j.at("chosen_text").get<std::string>();
        item.result.chosen.score = j.at("chosen_score").get<double>();
        item.result.chosen.source =
            j.at("source").get<std::string>() == "external" ? CandidateSource::External : CandidateSource::NGram;
        item.result.matched = j.at("matched").get<bool>();
        item.result.chosen_rank = j.at("chosen_rank").get<int>();
        item.result.pool_match_count = j.at("pool_match_count").get<int>();
        for (const auto& v : j.at("verdicts")) item.result.verdicts.push_back(verdict_from_json(v));
        items.push_back(std::move(item));
    }
    return items;
}

}  // namespace hedgen
