#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cstdio>
#include <string>
#include <vector>

#include "hedgen/error.hpp"
#include "hedgen/rerank.hpp"
#include "hedgen/rng.hpp"

using namespace hedgen;

namespace {

const RuleSet& lexicon() {
    static RuleSet rules = read_lexicon_file(HEDGEN_DATA_DIR "/lexicon.jsonl");
    return rules;
}

CandidatePool pool_of(const std::vector<std::pair<std::string, double>>& entries) {
    CandidatePool pool;
    for (const auto& [text, score] : entries) pool.candidates.push_back({text, score, CandidateSource::NGram});
    pool.requested = static_cast<int>(entries.size());
    return pool;
}

const std::vector<std::string> kHedged = {
    "i think it works", "maybe this one", "sorry about that", "kind of tricky",
    "it could be five or something",
};
const std::vector<std::string> kPlain = {
    "move the three", "now divide both sides", "good job", "the answer is ten", "try again",
};

}  // namespace

TEST_CASE("the best on-strategy candidate wins, not the best overall") {
    CandidatePool pool = pool_of({{"move the three", -1.0},
                                  {"now divide both sides", -2.0},
                                  {"i think you could move it", -3.0},
                                  {"maybe so", -4.0}});

    RerankResult hedge = rerank(pool, HedgeLabel::Hedge, lexicon());
    CHECK(hedge.matched);
    CHECK(hedge.chosen.text == "i think you could move it");
    CHECK(hedge.chosen_rank == 3);
    CHECK(hedge.pool_match_count == 2);
    REQUIRE(hedge.verdicts.size() == 4);
    CHECK(hedge.verdicts[2].label == HedgeLabel::Hedge);
    CHECK(hedge.verdicts[0].label == HedgeLabel::NonHedge);

    RerankResult plain = rerank(pool, HedgeLabel::NonHedge, lexicon());
    CHECK(plain.matched);
    CHECK(plain.chosen.text == "move the three");
    CHECK(plain.chosen_rank == 1);
    CHECK(plain.pool_match_count == 2);
}

TEST_CASE("with no on-strategy candidate the top of the pool is the fallback") {
    CandidatePool pool = pool_of({{"move the three", -1.5}, {"good job", -2.5}});
    RerankResult r = rerank(pool, HedgeLabel::Hedge, lexicon());
    CHECK_FALSE(r.matched);
    CHECK(r.chosen.text == "move the three");
    CHECK(r.chosen_rank == 1);
    CHECK(r.pool_match_count == 0);
}

TEST_CASE("an unsorted pool is ranked by score before selection") {
    CandidatePool pool = pool_of({{"maybe so", -3.0},
                                  {"move the three", -1.0},
                                  {"i think so", -2.0}});
    RerankResult r = rerank(pool, HedgeLabel::Hedge, lexicon());
    CHECK(r.chosen.text == "i think so");  // best-scored hedge, not first hedge in the vector
    CHECK(r.chosen_rank == 2);
    // equal scores keep their pool order
    CandidatePool tie = pool_of({{"i think so", -2.0}, {"maybe so", -2.0}});
    RerankResult t = rerank(tie, HedgeLabel::Hedge, lexicon());
    CHECK(t.chosen.text == "i think so");
    CHECK(t.chosen_rank == 1);
}

TEST_CASE("an empty pool cannot be reranked") {
    CHECK_THROWS_AS(rerank(CandidatePool{}, HedgeLabel::Hedge, lexicon()), StructuralError);
}

TEST_CASE("selection invariants hold over seeded random pools") {
    Rng rng(515);
    for (int trial = 0; trial < 200; ++trial) {
        const std::size_t size = 1 + rng.uniform(20);
        CandidatePool pool;
        for (std::size_t i = 0; i < size; ++i) {
            const bool hedge = rng.uniform(2) == 0;
            const auto& bank = hedge ? kHedged : kPlain;
            pool.candidates.push_back(
                {bank[rng.uniform(bank.size())], -10.0 * rng.uniform_real(), CandidateSource::NGram});
        }
        pool.requested = static_cast<int>(size);
        const TargetStrategy target = rng.uniform(2) == 0 ? HedgeLabel::Hedge : HedgeLabel::NonHedge;

        RerankResult r = rerank(pool, target, lexicon());

        REQUIRE(r.verdicts.size() == size);
        CHECK(r.chosen_rank >= 1);
        CHECK(r.chosen_rank <= static_cast<int>(size));

        // the chosen text really is in the pool
        bool present = false;
        for (const auto& c : pool.candidates) {
            if (c.text == r.chosen.text && c.score == r.chosen.score) present = true;
        }
        CHECK(present);

        int matches = 0;
        for (const auto& v : r.verdicts) {
            if (v.label == target) ++matches;
        }
        CHECK(r.pool_match_count == matches);

        if (r.matched) {
            // on-strategy, and nothing better-scored was on-strategy
            CHECK(classify_text(r.chosen.text, lexicon()).label == target);
            for (int rank = 0; rank < r.chosen_rank - 1; ++rank) {
                CHECK(r.verdicts[static_cast<std::size_t>(rank)].label != target);
            }
        } else {
            CHECK(matches == 0);
            CHECK(r.chosen_rank == 1);
            for (const auto& c : pool.candidates) CHECK(c.score <= r.chosen.score);
        }
    }
}

TEST_CASE("appending weaker off-strategy candidates never changes the choice") {
    CandidatePool pool = pool_of({{"move the three", -1.0}, {"i think so", -2.0}});
    RerankResult before = rerank(pool, HedgeLabel::Hedge, lexicon());
    pool.candidates.push_back({"good job", -9.0, CandidateSource::NGram});
    pool.candidates.push_back({"try again", -10.0, CandidateSource::NGram});
    RerankResult after = rerank(pool, HedgeLabel::Hedge, lexicon());
    CHECK(after.chosen.text == before.chosen.text);
    CHECK(after.chosen_rank == before.chosen_rank);

    // a stronger on-strategy candidate takes over
    pool.candidates.push_back({"maybe this", -0.5, CandidateSource::NGram});
    RerankResult better = rerank(pool, HedgeLabel::Hedge, lexicon());
    CHECK(better.chosen.text == "maybe this");
    CHECK(better.chosen_rank == 1);
}

TEST_CASE("rerank_corpus walks targets, builds histories, and survives failures") {
    // dialogue: tutee question, tutor answer, tutee ack, tutor wrap-up
    Corpus corpus;
    Dialogue d;
    d.id = "d1";
    auto mk = [&](int idx, Speaker sp, const std::string& text, HedgeLabel label) {
        Turn t;
        t.dialogue_id = "d1";
        t.turn_index = idx;
        t.speaker = sp;
        t.text = text;
        t.hedge_label = label;
        return t;
    };
    d.turns = {mk(0, Speaker::Tutee, "what next", HedgeLabel::NonHedge),
               mk(1, Speaker::Tutor, "i think you divide", HedgeLabel::Hedge),
               mk(2, Speaker::Tutee, "ok", HedgeLabel::NonHedge),
               mk(3, Speaker::Tutor, "now simplify", HedgeLabel::NonHedge)};
    corpus.dialogues.push_back(d);

    std::vector<Turn> targets = {d.turns[1], d.turns[3]};
    std::vector<std::size_t> seen_history_sizes;
    GeneratorFn generate = [&](const HistoryWindow& h) {
        seen_history_sizes.push_back(h.turns.size());
        return pool_of({{"i think it works", -1.0}, {"now divide both sides", -2.0}});
    };

    auto items = rerank_corpus(targets, corpus, 2, generate, lexicon());
    REQUIRE(items.size() == 2);
    CHECK(seen_history_sizes == std::vector<std::size_t>{1, 2});  // window of 2 caps the second
    CHECK(items[0].error.empty());
    CHECK(items[0].gold.hedge_label == HedgeLabel::Hedge);
    CHECK(items[0].result.matched);
    CHECK(items[0].result.chosen.text == "i think it works");
    CHECK(items[1].result.matched);
    CHECK(items[1].result.chosen.text == "now divide both sides");

    SUBCASE("a throwing generator marks only its item") {
        int calls = 0;
        GeneratorFn flaky = [&](const HistoryWindow& h) {
            if (++calls == 1) throw ExternalError(ExternalError::Kind::Transport, "boom");
            return generate(h);
        };
        auto flaky_items = rerank_corpus(targets, corpus, 2, flaky, lexicon());
        REQUIRE(flaky_items.size() == 2);
        CHECK(flaky_items[0].error.find("boom") != std::string::npos);
        CHECK(flaky_items[0].result.verdicts.empty());
        CHECK(flaky_items[1].error.empty());
        CHECK(flaky_items[1].result.matched);
    }

    SUBCASE("targets that do not resolve are recorded, not thrown") {
        Turn ghost = mk(9, Speaker::Tutor, "missing", HedgeLabel::NonHedge);
        ghost.dialogue_id = "nope";
        Turn bad_index = mk(7, Speaker::Tutor, "missing", HedgeLabel::NonHedge);
        auto broken = rerank_corpus({ghost, bad_index}, corpus, 2, generate, lexicon());
        REQUIRE(broken.size() == 2);
        CHECK(broken[0].error.find("unknown dialogue") != std::string::npos);
        CHECK(broken[1].error.find("not found") != std::string::npos);
    }
}

TEST_CASE("rerank items round-trip through the results file") {
    RerankItem ok;
    ok.gold.dialogue_id = "d1";
    ok.gold.turn_index = 3;
    ok.gold.speaker = Speaker::Tutor;
    ok.gold.text = "i think you divide";
    ok.gold.hedge_label = HedgeLabel::Hedge;
    ok.gold.rapport = 4.25;
    ok.result = rerank(pool_of({{"move the three", -1.0}, {"i think so", -2.0}}),
                       HedgeLabel::Hedge, lexicon());

    RerankItem failed;
    failed.gold.dialogue_id = "d2";
    failed.gold.turn_index = 1;
    failed.gold.text = "now simplify";
    failed.gold.hedge_label = HedgeLabel::NonHedge;
    failed.error = "generator endpoint unreachable";

    const std::string path = "rerank_roundtrip_tmp.jsonl";
    write_rerank_items_file({ok, failed}, path);
    auto back = read_rerank_items_file(path);
    std::remove(path.c_str());

    REQUIRE(back.size() == 2);
    CHECK(back[0].gold.dialogue_id == "d1");
    CHECK(back[0].gold.turn_index == 3);
    CHECK(back[0].gold.text == "i think you divide");
    CHECK(back[0].gold.hedge_label == HedgeLabel::Hedge);
    CHECK(back[0].gold.rapport == doctest::Approx(4.25));
    CHECK(back[0].error.empty());
    CHECK(back[0].result.matched == ok.result.matched);
    CHECK(back[0].result.chosen_rank == ok.result.chosen_rank);
    CHECK(back[0].result.pool_match_count == ok.result.pool_match_count);
    CHECK(back[0].result.chosen.text == ok.result.chosen.text);
    CHECK(back[0].result.chosen.score == doctest::Approx(ok.result.chosen.score));
    CHECK(back[0].result.chosen.source == CandidateSource::NGram);
    REQUIRE(back[0].result.verdicts.size() == ok.result.verdicts.size());
    for (std::size_t i = 0; i < ok.result.verdicts.size(); ++i) {
        CHECK(back[0].result.verdicts[i].label == ok.result.verdicts[i].label);
        CHECK(back[0].result.verdicts[i].fired.size() == ok.result.verdicts[i].fired.size());
        CHECK(back[0].result.verdicts[i].subcategories == ok.result.verdicts[i].subcategories);
    }
    CHECK(back[1].error == "generator endpoint unreachable");
    CHECK(back[1].gold.hedge_label == HedgeLabel::NonHedge);
    CHECK(back[1].result.verdicts.empty());

    CHECK_THROWS_AS(read_rerank_items_file("no/such/file.jsonl"), IoError);
}
