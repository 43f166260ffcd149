#include "hedgen/generate.hpp"

#include <algorithm>
#include <cmath>
#include <set>
#include <utility>

#include "hedgen/error.hpp"
#include "hedgen/text.hpp"

namespace hedgen {

namespace {

struct Hypothesis {
    std::vector<TokenId> tokens;  // generated tokens only, no context
    double score = 0.0;
    bool finished = false;
};

bool better(const Hypothesis& a, const Hypothesis& b) {
    if (a.score != b.score) return a.score > b.score;
    return a.tokens < b.tokens;
}

// True when appending `next` would repeat an n-gram already present in the
// generated sequence.
bool repeats_ngram(const std::vector<TokenId>& tokens, TokenId next, int n) {
    if (n <= 0 || static_cast<int>(tokens.size()) < n - 1) return false;
    std::vector<TokenId> gram(tokens.end() - (n - 1), tokens.end());
    gram.push_back(next);
    if (static_cast<int>(tokens.size()) < n) return false;
    for (std::size_t i = 0; i + static_cast<std::size_t>(n) <= tokens.size(); ++i) {
        if (std::equal(gram.begin(), gram.end(), tokens.begin() + static_cast<std::ptrdiff_t>(i))) {
            return true;
        }
    }
    return false;
}

}  // namespace

CandidatePool beam_generate(const NGramModel& model, const HistoryWindow& history,
                            const DecodingConfig& config) {
    if (config.pool_size < 1) throw ConfigError("pool size must be positive");
    if (config.max_tokens < 1) throw ConfigError("max_tokens must be positive");
    if (config.repetition_penalty < 1.0) throw ConfigError("repetition penalty must be at least 1");
    const int beam_width = config.beam_width > 0 ? config.beam_width : config.pool_size;

    const std::vector<TokenId> context = model.context_ids(history);
    const std::vector<TokenId> targets = model.generation_targets();

    std::vector<Hypothesis> live{Hypothesis{}};
    std::vector<Hypothesis> finished;

    std::vector<TokenId> stream;
    for (int step = 0; step < config.max_tokens && !live.empty(); ++step) {
        std::vector<Hypothesis> expanded;
        for (const Hypothesis& hyp : live) {
            stream.assign(context.begin(), context.end());
            stream.insert(stream.end(), hyp.tokens.begin(), hyp.tokens.end());
            const std::set<TokenId> emitted(hyp.tokens.begin(), hyp.tokens.end());

            bool any = false;
            for (TokenId next : targets) {
                const bool is_eos = next == Vocabulary::kEos;
                if (is_eos && hyp.tokens.empty()) continue;  // no empty candidates
                if (!is_eos && repeats_ngram(hyp.tokens, next, config.no_repeat_ngram)) continue;
                double log_p = std::log(model.prob(stream, next));
                if (!is_eos && emitted.count(next)) log_p *= config.repetition_penalty;
                Hypothesis child = hyp;
                child.score += log_p;
                if (is_eos) {
                    child.finished = true;
                    finished.push_back(std::move(child));
                } else {
                    child.tokens.push_back(next);
                    expanded.push_back(std::move(child));
                }
                any = true;
            }
            if (!any) {
                // Every expansion banned: the hypothesis terminates as-is.
                Hypothesis done = hyp;
                done.finished = true;
                finished.push_back(std::move(done));
            }
        }
        std::sort(expanded.begin(), expanded.end(), better);
        if (static_cast<int>(expanded.size()) > beam_width) {
            expanded.resize(static_cast<std::size_t>(beam_width));
        }
        live = std::move(expanded);
    }
    for (Hypothesis& hyp : live) {
        hyp.finished = true;
        finished.push_back(std::move(hyp));
    }

    std::sort(finished.begin(), finished.end(), better);
    if (static_cast<int>(finished.size()) > config.pool_size) {
        finished.resize(static_cast<std::size_t>(config.pool_size));
    }

    CandidatePool pool;
    pool.requested = config.pool_size;
    for (const Hypothesis& hyp : finished) {
        std::vector<std::string> words;
        words.reserve(hyp.tokens.size());
        for (TokenId id : hyp.tokens) words.push_back(model.vocab().token_of(id));
        pool.candidates.push_back({join_tokens(words), hyp.score, CandidateSource::NGram});
    }
    if (static_cast<int>(pool.candidates.size()) < config.pool_size) {
        pool.note = "pool produced " + std::to_string(pool.candidates.size()) + " of " +
                    std::to_string(config.pool_size) + " requested candidates";
    }
    return pool;
}

}  // namespace hedgen
