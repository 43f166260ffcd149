#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <sstream>

#include "hedgen/classifier.hpp"
#include "hedgen/error.hpp"
#include "hedgen/rng.hpp"
#include "hedgen/text.hpp"

using namespace hedgen;

namespace {

const RuleSet& lexicon() {
    static RuleSet rules = read_lexicon_file(HEDGEN_DATA_DIR "/lexicon.jsonl");
    return rules;
}

HedgeRule rule(const std::string& id, Subcategory sub, const std::string& pattern, int priority = 0) {
    HedgeRule r;
    r.id = id;
    r.subcategory = sub;
    r.pattern = tokenize(pattern);
    r.priority = priority;
    return r;
}

bool fired(const HedgeVerdict& v, const std::string& rule_id) {
    for (const auto& m : v.fired) {
        if (m.rule_id == rule_id) return true;
    }
    return false;
}

}  // namespace

TEST_CASE("canonical tutor utterances get the expected tags") {
    SUBCASE("stacked subjectivizer and propositional") {
        HedgeVerdict v = classify_text("I think you could move the x over", lexicon());
        CHECK(v.label == HedgeLabel::Hedge);
        CHECK(v.subcategories == std::set<Subcategory>{Subcategory::Propositional, Subcategory::Subjectivizer});
        REQUIRE(v.fired.size() == 2);
        // higher-priority rule reported first, spans in token coordinates
        CHECK(v.fired[0].rule_id == "subj_i_think");
        CHECK(v.fired[0].begin == 0);
        CHECK(v.fired[0].end == 2);
        CHECK(v.fired[1].rule_id == "prop_could");
        CHECK(v.fired[1].begin == 3);
        CHECK(v.fired[1].end == 4);
    }
    SUBCASE("propositional simile") {
        HedgeVerdict v = classify_text("it's kind of like a fraction", lexicon());
        CHECK(v.label == HedgeLabel::Hedge);
        CHECK(v.subcategories == std::set<Subcategory>{Subcategory::Propositional});
        CHECK(fired(v, "prop_kind_of"));
        CHECK(fired(v, "prop_like"));  // "of" on the left does not block
    }
    SUBCASE("apology") {
        HedgeVerdict v = classify_text("I'm sorry but you have to do your homework", lexicon());
        CHECK(v.label == HedgeLabel::Hedge);
        CHECK(v.subcategories == std::set<Subcategory>{Subcategory::Apologizer});
        REQUIRE(v.fired.size() == 1);
        CHECK(v.fired[0].begin == 1);
    }
    SUBCASE("a plain instruction stays clean") {
        HedgeVerdict v = classify_text("move the three to the other side", lexicon());
        CHECK(v.label == HedgeLabel::NonHedge);
        CHECK(v.fired.empty());
        CHECK(v.subcategories.empty());
    }
}

TEST_CASE("matching is token-exact, never substring") {
    CHECK(classify_text("mayhem ensued", lexicon()).label == HedgeLabel::NonHedge);
    HedgeVerdict v = classify_text("the mayor may come", lexicon());
    REQUIRE(v.fired.size() == 1);
    CHECK(v.fired[0].rule_id == "prop_may");
    CHECK(v.fired[0].begin == 2);
    // "maybe" is its own token, so only the maybe rule fires on it
    HedgeVerdict mb = classify_text("maybe", lexicon());
    REQUIRE(mb.fired.size() == 1);
    CHECK(mb.fired[0].rule_id == "prop_maybe");
}

TEST_CASE("punctuation does not glue words to patterns") {
    // tokenizer detaches the comma, so the bigram still matches
    CHECK(classify_text("Sorry, I think so.", lexicon()).subcategories ==
          std::set<Subcategory>{Subcategory::Apologizer, Subcategory::Subjectivizer});
}

TEST_CASE("blocked_left suppresses verb-sense 'like' only when preceded") {
    CHECK(classify_text("i like this one", lexicon()).label == HedgeLabel::NonHedge);
    CHECK(classify_text("you like math", lexicon()).label == HedgeLabel::NonHedge);
    CHECK(classify_text("it sounds like a fraction", lexicon()).label == HedgeLabel::Hedge);
    // at the start of the utterance there is nothing to block on
    CHECK(classify_text("like i said", lexicon()).label == HedgeLabel::Hedge);
}

TEST_CASE("wildcard matches exactly one token") {
    RuleSet rules({rule("w", Subcategory::Propositional, "not * sure")});
    CHECK(classify_text("i am not quite sure", rules).label == HedgeLabel::Hedge);
    CHECK(classify_text("not really sure about it", rules).label == HedgeLabel::Hedge);
    CHECK(classify_text("not sure", rules).label == HedgeLabel::NonHedge);
    CHECK(classify_text("not at all sure", rules).label == HedgeLabel::NonHedge);
}

TEST_CASE("every occurrence is reported") {
    HedgeVerdict v = classify_text("sorry sorry", lexicon());
    REQUIRE(v.fired.size() == 2);
    CHECK(v.fired[0].begin == 0);
    CHECK(v.fired[1].begin == 1);
}

TEST_CASE("ruleset validates and orders its rules") {
    CHECK_THROWS_AS(RuleSet({rule("a", Subcategory::Propositional, "")}), ConfigError);
    CHECK_THROWS_AS(RuleSet({rule("a", Subcategory::Propositional, "x"),
                             rule("a", Subcategory::Extender, "y")}),
                    ConfigError);

    RuleSet rules({rule("b_low", Subcategory::Propositional, "x", 1),
                   rule("a_high", Subcategory::Propositional, "y", 9),
                   rule("a_also_high", Subcategory::Propositional, "z", 9)});
    REQUIRE(rules.size() == 3);
    CHECK(rules.rules()[0].id == "a_also_high");  // ties break by id
    CHECK(rules.rules()[1].id == "a_high");
    CHECK(rules.rules()[2].id == "b_low");
    CHECK(rules.find("b_low") != nullptr);
    CHECK(rules.find("nope") == nullptr);
}

TEST_CASE("extended leaves the base set untouched") {
    RuleSet base({rule("a", Subcategory::Propositional, "perhaps", 5)});
    RuleSet bigger = base.extended({rule("b", Subcategory::Extender, "and so on", 7)});
    CHECK(base.size() == 1);
    CHECK(bigger.size() == 2);
    CHECK(bigger.rules()[0].id == "b");  // resorted by priority
    CHECK(classify_text("and so on", base).label == HedgeLabel::NonHedge);
    CHECK(classify_text("and so on", bigger).label == HedgeLabel::Hedge);
}

TEST_CASE("adding rules never un-hedges a text") {
    const std::vector<std::string> texts = {
        "i think you could move the x over", "move the three to the other side",
        "it's kind of like a fraction",      "maybe check the answer",
        "good job",                          "sorry my bad",
        "now divide both sides",             "that is sort of right or something",
    };
    Rng rng(404);
    RuleSet current = lexicon();
    for (int round = 0; round < 50; ++round) {
        std::string word = "extra" + std::to_string(rng.uniform(1000));
        RuleSet next = current.extended({rule("gen_" + std::to_string(round),
                                              Subcategory::Propositional, word,
                                              static_cast<int>(rng.uniform(20)))});
        for (const auto& text : texts) {
            if (classify_text(text, current).label == HedgeLabel::Hedge) {
                CHECK(classify_text(text, next).label == HedgeLabel::Hedge);
            }
        }
        current = next;
    }
}

TEST_CASE("subcategory distribution counts each text once per subcategory") {
    const std::vector<std::string> texts = {"i think so", "maybe i think it works", "sorry"};
    auto dist = subcategory_distribution(texts, lexicon());
    REQUIRE(dist.size() == 3);
    CHECK(dist[Subcategory::Subjectivizer] == doctest::Approx(0.5));
    CHECK(dist[Subcategory::Propositional] == doctest::Approx(0.25));
    CHECK(dist[Subcategory::Apologizer] == doctest::Approx(0.25));

    double total = 0.0;
    for (const auto& [sub, share] : dist) total += share;
    CHECK(total == doctest::Approx(1.0));

    CHECK(subcategory_distribution({"nothing here"}, lexicon()).empty());
}

TEST_CASE("lexicon files skip comments and validate entries") {
    std::istringstream in(
        "# comment line\n"
        "\n"
        R"({"id":"r1","subcategory":"extender","pattern":"And Stuff","priority":3})"
        "\n");
    RuleSet rules = read_lexicon_jsonl(in);
    REQUIRE(rules.size() == 1);
    CHECK(rules.rules()[0].pattern == std::vector<std::string>{"and", "stuff"});  // patterns tokenize

    std::istringstream bad_json("{oops");
    CHECK_THROWS_AS(read_lexicon_jsonl(bad_json), IoError);
    std::istringstream bad_sub(R"({"id":"r","subcategory":"mystery","pattern":"x"})");
    CHECK_THROWS_AS(read_lexicon_jsonl(bad_sub), IoError);
}

TEST_CASE("the shipped lexicon loads and covers all four subcategories") {
    const RuleSet& rules = lexicon();
    CHECK(rules.size() == 17);
    std::set<Subcategory> seen;
    for (const auto& r : rules.rules()) seen.insert(r.subcategory);
    CHECK(seen.size() == 4);
}

TEST_CASE("verdict serializes with spans and subcategory names") {
    std::string j = verdict_json(classify_text("i think so", lexicon()));
    CHECK(j.find("\"label\":1") != std::string::npos);
    CHECK(j.find("\"rule\":\"subj_i_think\"") != std::string::npos);
    CHECK(j.find("\"subjectivizer\"") != std::string::npos);
    std::string none = verdict_json(classify_text("fine", lexicon()));
    CHECK(none.find("\"label\":0") != std::string::npos);
}
