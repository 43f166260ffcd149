#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <unordered_map>
#include <vector>

#include "hedgen/corpus.hpp"

namespace hedgen {

using TokenId = std::int32_t;

// Token <-> id bijection with dense ids. The four reserved tokens always
// occupy ids 0..3.
class Vocabulary {
  public:
    static constexpr TokenId kBos = 0;
    static constexpr TokenId kEos = 1;
    static constexpr TokenId kUnk = 2;
    static constexpr TokenId kSep = 3;

    Vocabulary();

    TokenId add(const std::string& token);
    TokenId id_of(const std::string& token) const;  // kUnk for unknown tokens
    const std::string& token_of(TokenId id) const;
    bool contains(const std::string& token) const;
    std::size_t size() const { return tokens_.size(); }

    std::vector<TokenId> encode(const std::vector<std::string>& tokens) const;

    const std::vector<std::string>& tokens() const { return tokens_; }

  private:
    std::vector<std::string> tokens_;
    std::unordered_map<std::string, TokenId> ids_;
};

struct TrainOptions {
    int order = 3;
    // Interpolation weights for orders 1..order, summing to 1. Empty picks
    // weights proportional to the order (higher orders trusted more).
    std::vector<double> weights;
    // Mass reserved for the uniform-over-vocabulary floor, keeping every
    // next-token probability strictly positive. Zero disables the floor.
    double uniform_floor = 0.01;
    // History turns flattened into the conditioning context.
    int window = 4;
    // Count an end-of-turn transition after each target turn. Off by default;
    // the pipeline turns it on so decoding can terminate naturally.
    bool append_eos = false;
};

// Interpolated maximum-likelihood n-gram model over tutor turns, conditioned
// on flattened dialogue history. Per order, an unseen context falls back to
// the uniform distribution; the floor then mixes in uniform mass
// unconditionally:
//
//   p(w | ctx) = (1 - floor) * sum_k weight_k * q_k(w | ctx)  +  floor / |V|
//
// where q_k is the ML estimate when the (k-1)-token context was seen and
// 1/|V| otherwise. Immutable after training; safe to share across threads.
class NGramModel {
  public:
    NGramModel() = default;

    int order() const { return order_; }
    int window() const { return window_; }
    bool append_eos() const { return append_eos_; }
    const std::vector<double>& weights() const { return weights_; }
    double uniform_floor() const { return uniform_floor_; }
    const Vocabulary& vocab() const { return vocab_; }

    // Interpolated probability of `next` given the full preceding token
    // stream (flattened history + emitted prefix; short streams are
    // BOS-padded). Sums to 1 over the vocabulary for any context.
    double prob(std::span<const TokenId> context, TokenId next) const;

    // Raw ML estimate at order |context_gram| + 1; 0 when the context was
    // never seen. Exposed for inspection and oracle tests.
    double ml_prob(std::span<const TokenId> context_gram, TokenId next) const;

    // Sum of log p over exactly the tokens of `text` (OOV mapped to UNK),
    // conditioned on the flattened history. No end-of-turn term is added.
    double sequence_log_prob(const HistoryWindow& history, const std::string& text) const;
    double sequence_log_prob_ids(std::span<const TokenId> context, std::span<const TokenId> targets) const;

    // Tokens the model has observed as generation targets (unigram count
    // > 0), in id order. Decoding expands over exactly this set.
    std::vector<TokenId> generation_targets() const;

    std::vector<TokenId> context_ids(const HistoryWindow& history) const;

    // Canonical JSON with embedded vocabulary, weights and count tables.
    // Identical models serialize to identical bytes.
    std::string to_json() const;
    static NGramModel from_json(const std::string& text);
    void save(const std::string& path) const;
    static NGramModel load(const std::string& path);
    std::string digest() const;

    friend NGramModel train_ngram(const Corpus& corpus, const TrainOptions& options);
    friend NGramModel uniform_model(const std::vector<std::string>& tokens);

  private:
    using CountTable = std::unordered_map<std::string, std::uint64_t>;

    static std::string pack_key(std::span<const TokenId> ids);

    void add_count(std::span<const TokenId> gram);
    void train_stream(std::span<const TokenId> context, std::span<const TokenId> targets);

    int order_ = 1;
    int window_ = 4;
    bool append_eos_ = false;
    std::vector<double> weights_{1.0};
    double uniform_floor_ = 0.01;
    Vocabulary vocab_;
    std::vector<CountTable> gram_counts_;     // [k-1] holds k-gram counts
    std::vector<CountTable> context_totals_;  // [k-1] holds (k-1)-context totals
};

// Trains on every tutor turn of the corpus, conditioned on its history
// window. The vocabulary covers all turns of both speakers.
NGramModel train_ngram(const Corpus& corpus, const TrainOptions& options);

// A model with the given extra tokens and no counts: every next-token
// distribution is exactly uniform over the vocabulary.
NGramModel uniform_model(const std::vector<std::string>& tokens);

// History turns as a token stream: speaker tag ("t:"/"s:"), the turn's
// tokens, then a separator, for each turn in order.
std::vector<std::string> flatten_history(const HistoryWindow& history);

}  // namespace hedgen
