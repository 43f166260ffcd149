#include "hedgen/classifier.hpp"

#include <algorithm>
#include <fstream>
#include <sstream>
#include <unordered_set>

#include <json.hpp>

#include "hedgen/error.hpp"
#include "hedgen/text.hpp"

namespace hedgen {

using nlohmann::json;

RuleSet::RuleSet(std::vector<HedgeRule> rules) : rules_(std::move(rules)) {
    std::unordered_set<std::string> ids;
    for (const auto& r : rules_) {
        if (r.pattern.empty()) throw ConfigError("rule '" + r.id + "' has an empty pattern");
        if (!ids.insert(r.id).second) throw ConfigError("duplicate rule id '" + r.id + "'");
    }
    // Priority total-orders rules; id disambiguates equal priorities.
    std::stable_sort(rules_.begin(), rules_.end(), [](const HedgeRule& a, const HedgeRule& b) {
        if (a.priority != b.priority) return a.priority > b.priority;
        return a.id < b.id;
    });
}

const HedgeRule* RuleSet::find(const std::string& id) const {
    for (const auto& r : rules_) {
        if (r.id == id) return &r;
    }
    return nullptr;
}

RuleSet RuleSet::extended(const std::vector<HedgeRule>& extra) const {
    std::vector<HedgeRule> all = rules_;
    all.insert(all.end(), extra.begin(), extra.end());
    return RuleSet(std::move(all));
}

namespace {

bool pattern_matches_at(const HedgeRule& rule, const std::vector<std::string>& tokens, std::size_t pos) {
    if (pos + rule.pattern.size() > tokens.size()) return false;
    for (std::size_t k = 0; k < rule.pattern.size(); ++k) {
        const std::string& p = rule.pattern[k];
        if (p != "*" && p != tokens[pos + k]) return false;
    }
    if (!rule.blocked_left.empty() && pos > 0) {
        const std::string& left = tokens[pos - 1];
        for (const auto& b : rule.blocked_left) {
            if (left == b) return false;
        }
    }
    return true;
}

}  // namespace

HedgeVerdict classify(const std::vector<std::string>& tokens, const RuleSet& rules) {
    HedgeVerdict verdict;
    for (const auto& rule : rules.rules()) {
        for (std::size_t pos = 0; pos + rule.pattern.size() <= tokens.size(); ++pos) {
            if (pattern_matches_at(rule, tokens, pos)) {
                verdict.fired.push_back(RuleMatch{rule.id, pos, pos + rule.pattern.size()});
                verdict.subcategories.insert(rule.subcategory);
            }
        }
    }
    if (!verdict.fired.empty()) verdict.label = HedgeLabel::Hedge;
    return verdict;
}

HedgeVerdict classify_text(const std::string& text, const RuleSet& rules) {
    return classify(tokenize(text), rules);
}

std::map<Subcategory, double> subcategory_distribution(const std::vector<std::string>& texts,
                                                       const RuleSet& rules) {
    std::map<Subcategory, std::size_t> counts;
    std::size_t total = 0;
    for (const auto& text : texts) {
        HedgeVerdict v = classify_text(text, rules);
        for (Subcategory s : v.subcategories) {
            ++counts[s];
            ++total;
        }
    }
    std::map<Subcategory, double> dist;
    for (const auto& [sub, n] : counts) dist[sub] = static_cast<double>(n) / static_cast<double>(total);
    return dist;
}

RuleSet read_lexicon_jsonl(std::istream& in) {
    std::vector<HedgeRule> rules;
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (line.empty() || line[0] == '#') continue;
        json rec = json::parse(line, nullptr, false);
        if (rec.is_discarded()) throw IoError("invalid JSON in lexicon line " + std::to_string(line_no));
        HedgeRule rule;
        rule.id = rec.at("id").get<std::string>();
        auto sub = subcategory_from_string(rec.at("subcategory").get<std::string>());
        if (!sub) throw IoError("unknown subcategory in lexicon line " + std::to_string(line_no));
        rule.subcategory = *sub;
        rule.pattern = tokenize(rec.at("pattern").get<std::string>());
        rule.priority = rec.value("priority", 0);
        if (rec.contains("blocked_left")) {
            for (const auto& b : rec["blocked_left"]) rule.blocked_left.push_back(to_lower(b.get<std::string>()));
        }
        rules.push_back(std::move(rule));
    }
    return RuleSet(std::move(rules));
}

RuleSet read_lexicon_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw IoError("cannot open lexicon file: " + path);
    return read_lexicon_jsonl(in);
}

void write_lexicon_file(const RuleSet& rules, const std::string& path) {
    std::ofstream out(path);
    if (!out) throw IoError("cannot write lexicon file: " + path);
    for (const auto& r : rules.rules()) {
        json rec;
        rec["id"] = r.id;
        rec["subcategory"] = to_string(r.subcategory);
        rec["pattern"] = join_tokens(r.pattern);
        rec["priority"] = r.priority;
        if (!r.blocked_left.empty()) rec["blocked_left"] = r.blocked_left;
        out << rec.dump() << "\n";
    }
}

std::string verdict_json(const HedgeVerdict& verdict) {
    json j;
    j["label"] = verdict.label == HedgeLabel::Hedge ? 1 : 0;
    json fired = json::array();
    for (const auto& m : verdict.fired) {
        fired.push_back({{"rule", m.rule_id}, {"begin", m.begin}, {"end", m.end}});
    }
    j["fired"] = fired;
    json subs = json::array();
    for (Subcategory s : verdict.subcategories) subs.push_back(to_string(s));
    j["subcategories"] = subs;
    return j.dump();
}

}  // namespace hedgen
