#pragma once

#include <cstdint>
#include <vector>

#include "hedgen/corpus.hpp"

namespace hedgen {

// Knobs for the bundled synthetic tutoring corpus. Tutor turns are drawn
// from templates whose hedges are exactly the bundled lexicon's patterns, so
// rule verdicts and planted labels agree by construction.
struct SynthConfig {
    int dialogues = 200;
    std::uint64_t seed = 318;
    double hedge_rate = 0.45;           // tutor turns that hedge
    double tutee_hedge_rate = 0.15;     // tutee turns that hedge
    double clause_split_rate = 0.25;    // turns emitted as two clauses
    double missing_rapport_rate = 0.08;  // turns with no rapport annotation
};

// Deterministic clause stream in ingestion order, ready for
// merge_clauses_to_turns or JSONL export.
std::vector<Clause> synth_clauses(const SynthConfig& config);

}  // namespace hedgen
