#pragma once

#include <iosfwd>
#include <map>
#include <set>
#include <string>
#include <vector>

#include "hedgen/corpus.hpp"

namespace hedgen {

// One lexicon entry. The pattern is a sequence of tokens matched contiguously
// against tokenized text; "*" matches any single token. Matching is
// token-exact, so "can" never fires inside "cannot".
struct HedgeRule {
    std::string id;
    Subcategory subcategory = Subcategory::Propositional;
    std::vector<std::string> pattern;
    int priority = 0;
    // The match is suppressed when the token immediately before it is one of
    // these ("like" as a verb after "i"/"you"/...).
    std::vector<std::string> blocked_left;
};

struct RuleMatch {
    std::string rule_id;
    std::size_t begin = 0;  // token span [begin, end)
    std::size_t end = 0;
};

struct HedgeVerdict {
    HedgeLabel label = HedgeLabel::NonHedge;
    std::vector<RuleMatch> fired;  // all matches, priority order then position
    std::set<Subcategory> subcategories;
};

class RuleSet {
  public:
    RuleSet() = default;
    explicit RuleSet(std::vector<HedgeRule> rules);

    const std::vector<HedgeRule>& rules() const { return rules_; }
    std::size_t size() const { return rules_.size(); }
    const HedgeRule* find(const std::string& id) const;

    // A copy with extra rules appended; the base set is immutable.
    RuleSet extended(const std::vector<HedgeRule>& extra) const;

  private:
    std::vector<HedgeRule> rules_;
};

// Pure rule classification over tokenized text. All matching rules are
// reported; the label is Hedge iff any rule fired.
HedgeVerdict classify(const std::vector<std::string>& tokens, const RuleSet& rules);
HedgeVerdict classify_text(const std::string& text, const RuleSet& rules);

// Proportion of each hedge subcategory over the fired verdicts of `texts`.
// Each text contributes each of its subcategories once. Empty when no text
// fires any rule; sums to 1 otherwise.
std::map<Subcategory, double> subcategory_distribution(const std::vector<std::string>& texts,
                                                       const RuleSet& rules);

// Lexicon file: line-delimited JSON {id, subcategory, pattern, priority}
// with optional blocked_left.
RuleSet read_lexicon_jsonl(std::istream& in);
RuleSet read_lexicon_file(const std::string& path);
void write_lexicon_file(const RuleSet& rules, const std::string& path);

std::string verdict_json(const HedgeVerdict& verdict);

}  // namespace hedgen
