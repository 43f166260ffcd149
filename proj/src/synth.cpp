#include "hedgen/synth.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <string>

#include "hedgen/rng.hpp"

namespace hedgen {

namespace {

const char* kVerbs[] = {"move", "add", "divide", "subtract", "simplify", "check", "cancel", "flip"};
const char* kObjects[] = {"three", "x", "fraction", "sides", "answer", "two", "numerator", "equation"};
const char* kNumbers[] = {"two", "three", "five", "seven", "ten"};
const char* kFillers[] = {"so yeah", "okay", "alright so", "hmm let me see"};

template <std::size_t N>
const char* pick(Rng& rng, const char* (&pool)[N]) {
    return pool[rng.uniform(N)];
}

struct TutorLine {
    std::string text;
    HedgeLabel label;
    std::optional<Subcategory> subcategory;
};

TutorLine hedged_tutor(Rng& rng) {
    const char* verb = pick(rng, kVerbs);
    const char* obj = pick(rng, kObjects);
    const char* num = pick(rng, kNumbers);
    switch (rng.uniform(13)) {
        case 0: return {std::string("i think you could ") + verb + " the " + obj, HedgeLabel::Hedge, Subcategory::Subjectivizer};
        case 1: return {std::string("you could ") + verb + " the " + obj + " first", HedgeLabel::Hedge, Subcategory::Propositional};
        case 2: return {std::string("it's kind of like a ") + obj, HedgeLabel::Hedge, Subcategory::Propositional};
        case 3: return {std::string("maybe try to ") + verb + " the " + obj, HedgeLabel::Hedge, Subcategory::Propositional};
        case 4: return {std::string("sorry but you have to ") + verb + " the " + obj, HedgeLabel::Hedge, Subcategory::Apologizer};
        case 5: return {std::string("you might want to ") + verb + " the " + obj + " or something", HedgeLabel::Hedge, Subcategory::Extender};
        case 6: return {std::string("i guess we should ") + verb + " the " + obj + " now", HedgeLabel::Hedge, Subcategory::Subjectivizer};
        case 7: return {"that is sort of right i think", HedgeLabel::Hedge, Subcategory::Propositional};
        case 8: return {std::string("probably the ") + obj + " goes first", HedgeLabel::Hedge, Subcategory::Propositional};
        case 9: return {std::string("i believe the answer is ") + num, HedgeLabel::Hedge, Subcategory::Subjectivizer};
        case 10: return {"i think so", HedgeLabel::Hedge, Subcategory::Subjectivizer};
        case 11: return {"sorry my bad", HedgeLabel::Hedge, Subcategory::Apologizer};
        default: return {"maybe yeah", HedgeLabel::Hedge, Subcategory::Propositional};
    }
}

TutorLine plain_tutor(Rng& rng) {
    const char* verb = pick(rng, kVerbs);
    const char* obj = pick(rng, kObjects);
    const char* num = pick(rng, kNumbers);
    switch (rng.uniform(10)) {
        case 0: return {std::string(verb) + " the " + obj + " to the other side", HedgeLabel::NonHedge, {}};
        case 1: return {std::string("now ") + verb + " the " + obj, HedgeLabel::NonHedge, {}};
        case 2: return {"that is the right answer", HedgeLabel::NonHedge, {}};
        case 3: return {std::string("write the ") + obj + " down", HedgeLabel::NonHedge, {}};
        case 4: return {std::string("what do you get for the ") + obj, HedgeLabel::NonHedge, {}};
        case 5: return {std::string("remember to ") + verb + " the " + obj, HedgeLabel::NonHedge, {}};
        case 6: return {std::string("the answer is ") + num, HedgeLabel::NonHedge, {}};
        case 7: return {"good job", HedgeLabel::NonHedge, {}};
        case 8: return {"try again", HedgeLabel::NonHedge, {}};
        default: return {std::string("look at the ") + obj, HedgeLabel::NonHedge, {}};
    }
}

TutorLine hedged_tutee(Rng& rng) {
    switch (rng.uniform(3)) {
        case 0: return {"i think i got it", HedgeLabel::Hedge, Subcategory::Subjectivizer};
        case 1: return {"maybe this one", HedgeLabel::Hedge, Subcategory::Propositional};
        default: return {"i could try that", HedgeLabel::Hedge, Subcategory::Propositional};
    }
}

TutorLine plain_tutee(Rng& rng) {
    const char* obj = pick(rng, kObjects);
    const char* num = pick(rng, kNumbers);
    switch (rng.uniform(8)) {
        case 0: return {std::string("um i moved the ") + obj, HedgeLabel::NonHedge, {}};
        case 1: return {"wait what do i do", HedgeLabel::NonHedge, {}};
        case 2: return {std::string("so the x is ") + num, HedgeLabel::NonHedge, {}};
        case 3: return {"okay i see it", HedgeLabel::NonHedge, {}};
        case 4: return {std::string("is it ") + num, HedgeLabel::NonHedge, {}};
        case 5: return {std::string("i got ") + num, HedgeLabel::NonHedge, {}};
        case 6: return {"this is hard", HedgeLabel::NonHedge, {}};
        default: return {"hmm i like this one", HedgeLabel::NonHedge, {}};  // "like" blocked after "i"
    }
}

double round1(double x) { return std::round(x * 10.0) / 10.0; }

}  // namespace

std::vector<Clause> synth_clauses(const SynthConfig& config) {
    Rng rng(config.seed);
    std::vector<Clause> clauses;

    for (int d = 0; d < config.dialogues; ++d) {
        char id[16];
        std::snprintf(id, sizeof(id), "syn-%03d", d);
        const double base_rapport = 1.0 + 6.0 * rng.uniform_real();
        const int pairs = 3 + static_cast<int>(rng.uniform(2));

        int turn_index = 0;
        for (int p = 0; p < pairs; ++p) {
            for (Speaker speaker : {Speaker::Tutee, Speaker::Tutor}) {
                TutorLine line;
                if (speaker == Speaker::Tutor) {
                    line = rng.uniform_real() < config.hedge_rate ? hedged_tutor(rng) : plain_tutor(rng);
                } else {
                    line = rng.uniform_real() < config.tutee_hedge_rate ? hedged_tutee(rng) : plain_tutee(rng);
                }

                std::optional<double> rapport;
                if (rng.uniform_real() >= config.missing_rapport_rate) {
                    const double jitter = rng.uniform_real() - 0.5;
                    rapport = round1(std::clamp(base_rapport + jitter, 1.0, 7.0));
                }

                Clause clause;
                clause.dialogue_id = id;
                clause.turn_index = turn_index;
                clause.speaker = speaker;
                clause.rapport = rapport;

                // Sometimes the turn arrives as a plain filler clause plus
                // the content clause, exercising the merge path.
                if (rng.uniform_real() < config.clause_split_rate) {
                    Clause filler = clause;
                    filler.text = pick(rng, kFillers);
                    filler.hedge_label = HedgeLabel::NonHedge;
                    clauses.push_back(std::move(filler));
                }
                clause.text = line.text;
                clause.hedge_label = line.label;
                clause.subcategory = line.subcategory;
                clauses.push_back(std::move(clause));
                ++turn_index;
            }
        }
    }
    return clauses;
}

}  // namespace hedgen
