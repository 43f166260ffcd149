#pragma once

#include <string>
#include <vector>

#include "hedgen/corpus.hpp"
#include "hedgen/ngram.hpp"

namespace hedgen {

struct DecodingConfig {
    // Number of candidates requested from one decoding pass.
    int pool_size = 50;
    // Live hypotheses kept per step; 0 means pool_size.
    int beam_width = 0;
    int max_tokens = 30;
    // Ban any token that would repeat an n-gram of this size within the
    // generated sequence; 0 disables the ban.
    int no_repeat_ngram = 2;
    // Divides the probability of tokens already generated in the hypothesis
    // (log-domain: multiplies their negative log-probs). 1.0 disables it.
    double repetition_penalty = 1.2;
};

enum class CandidateSource { NGram, External };

struct Candidate {
    std::string text;
    // Cumulative (penalized) log-probability at termination.
    double score = 0.0;
    CandidateSource source = CandidateSource::NGram;
};

struct CandidatePool {
    std::vector<Candidate> candidates;  // score-descending
    int requested = 0;
    // Non-empty when the pool came up short of `requested`.
    std::string note;
};

// Beam search over the model's generation targets, conditioned on the
// flattened history. Deterministic: ties break on the token-id sequence.
CandidatePool beam_generate(const NGramModel& model, const HistoryWindow& history,
                            const DecodingConfig& config);

}  // namespace hedgen
