#include "hedgen/ngram.hpp"

#include <algorithm>
#include <cmath>
#include <cstring>
#include <fstream>
#include <sstream>

#include <json.hpp>

#include "hedgen/digest.hpp"
#include "hedgen/error.hpp"
#include "hedgen/text.hpp"

namespace hedgen {

using nlohmann::json;

namespace {

const char* kReserved[] = {"<s>", "</s>", "<unk>", "<sep>"};
const char* kTutorTag = "t:";
const char* kTuteeTag = "s:";

}  // namespace

Vocabulary::Vocabulary() {
    for (const char* t : kReserved) add(t);
}

TokenId Vocabulary::add(const std::string& token) {
    auto it = ids_.find(token);
    if (it != ids_.end()) return it->second;
    TokenId id = static_cast<TokenId>(tokens_.size());
    tokens_.push_back(token);
    ids_.emplace(token, id);
    return id;
}

TokenId Vocabulary::id_of(const std::string& token) const {
    auto it = ids_.find(token);
    return it == ids_.end() ? kUnk : it->second;
}

const std::string& Vocabulary::token_of(TokenId id) const {
    if (id < 0 || static_cast<std::size_t>(id) >= tokens_.size()) {
        throw BoundsError("token id " + std::to_string(id) + " outside vocabulary of " +
                          std::to_string(tokens_.size()));
    }
    return tokens_[static_cast<std::size_t>(id)];
}

bool Vocabulary::contains(const std::string& token) const { return ids_.count(token) > 0; }

std::vector<TokenId> Vocabulary::encode(const std::vector<std::string>& tokens) const {
    std::vector<TokenId> ids;
    ids.reserve(tokens.size());
    for (const auto& t : tokens) ids.push_back(id_of(t));
    return ids;
}

std::vector<std::string> flatten_history(const HistoryWindow& history) {
    std::vector<std::string> out;
    for (const Turn& turn : history.turns) {
        out.push_back(turn.speaker == Speaker::Tutor ? kTutorTag : kTuteeTag);
        for (auto& tok : tokenize(turn.text)) out.push_back(std::move(tok));
        out.push_back(kReserved[Vocabulary::kSep]);
    }
    return out;
}

std::string NGramModel::pack_key(std::span<const TokenId> ids) {
    std::string key(ids.size() * sizeof(TokenId), '\0');
    if (!ids.empty()) std::memcpy(key.data(), ids.data(), key.size());
    return key;
}

void NGramModel::add_count(std::span<const TokenId> gram) {
    const std::size_t k = gram.size();
    ++gram_counts_[k - 1][pack_key(gram)];
    ++context_totals_[k - 1][pack_key(gram.first(k - 1))];
}

void NGramModel::train_stream(std::span<const TokenId> context, std::span<const TokenId> targets) {
    // Stream = BOS padding + context + targets; every target position
    // contributes one k-gram per order.
    std::vector<TokenId> stream(static_cast<std::size_t>(order_) - 1, Vocabulary::kBos);
    stream.insert(stream.end(), context.begin(), context.end());
    for (TokenId target : targets) {
        stream.push_back(target);
        for (int k = 1; k <= order_; ++k) {
            add_count(std::span<const TokenId>(stream).last(static_cast<std::size_t>(k)));
        }
    }
}

double NGramModel::ml_prob(std::span<const TokenId> context_gram, TokenId next) const {
    const std::size_t k = context_gram.size() + 1;
    if (k > static_cast<std::size_t>(order_)) {
        throw ConfigError("context of " + std::to_string(context_gram.size()) + " tokens exceeds model order " +
                          std::to_string(order_));
    }
    auto total_it = context_totals_[k - 1].find(pack_key(context_gram));
    if (total_it == context_totals_[k - 1].end() || total_it->second == 0) return 0.0;
    std::vector<TokenId> gram(context_gram.begin(), context_gram.end());
    gram.push_back(next);
    auto count_it = gram_counts_[k - 1].find(pack_key(gram));
    const std::uint64_t count = count_it == gram_counts_[k - 1].end() ? 0 : count_it->second;
    return static_cast<double>(count) / static_cast<double>(total_it->second);
}

double NGramModel::prob(std::span<const TokenId> context, TokenId next) const {
    const double uniform = 1.0 / static_cast<double>(vocab_.size());
    double p = 0.0;
    for (int k = 1; k <= order_; ++k) {
        const double w = weights_[static_cast<std::size_t>(k) - 1];
        if (w == 0.0) continue;
        // BOS-pad short contexts so every order sees exactly k-1 tokens.
        std::vector<TokenId> ctx;
        const std::size_t need = static_cast<std::size_t>(k) - 1;
        if (context.size() >= need) {
            ctx.assign(context.end() - static_cast<std::ptrdiff_t>(need), context.end());
        } else {
            ctx.assign(need - context.size(), Vocabulary::kBos);
            ctx.insert(ctx.end(), context.begin(), context.end());
        }
        auto total_it = context_totals_[static_cast<std::size_t>(k) - 1].find(pack_key(ctx));
        if (total_it == context_totals_[static_cast<std::size_t>(k) - 1].end()) {
            p += w * uniform;  // unseen context: this order falls back to uniform
        } else {
            ctx.push_back(next);
            auto count_it = gram_counts_[static_cast<std::size_t>(k) - 1].find(pack_key(ctx));
            const std::uint64_t count = count_it == gram_counts_[static_cast<std::size_t>(k) - 1].end()
                                            ? 0
                                            : count_it->second;
            p += w * static_cast<double>(count) / static_cast<double>(total_it->second);
        }
    }
    return (1.0 - uniform_floor_) * p + uniform_floor_ * uniform;
}

double NGramModel::sequence_log_prob_ids(std::span<const TokenId> context,
                                         std::span<const TokenId> targets) const {
    std::vector<TokenId> stream(context.begin(), context.end());
    double log_p = 0.0;
    for (TokenId target : targets) {
        log_p += std::log(prob(stream, target));
        stream.push_back(target);
    }
    return log_p;
}

std::vector<TokenId> NGramModel::context_ids(const HistoryWindow& history) const {
    // The separator closing the last history turn doubles as the boundary
    // before the target turn, so higher orders stay history-sensitive.
    return vocab_.encode(flatten_history(history));
}

double NGramModel::sequence_log_prob(const HistoryWindow& history, const std::string& text) const {
    return sequence_log_prob_ids(context_ids(history), vocab_.encode(tokenize(text)));
}

std::vector<TokenId> NGramModel::generation_targets() const {
    std::vector<TokenId> out;
    if (gram_counts_.empty()) return out;
    const CountTable& unigrams = gram_counts_[0];
    for (TokenId id = 0; static_cast<std::size_t>(id) < vocab_.size(); ++id) {
        auto it = unigrams.find(pack_key(std::span<const TokenId>(&id, 1)));
        if (it != unigrams.end() && it->second > 0) out.push_back(id);
    }
    return out;
}

NGramModel train_ngram(const Corpus& corpus, const TrainOptions& options) {
    if (options.order < 1) throw ConfigError("n-gram order must be at least 1");
    if (corpus.dialogues.empty()) throw StructuralError("cannot train on an empty corpus");
    if (options.window < 1) throw ConfigError("history window must be positive");
    if (!(options.uniform_floor >= 0.0 && options.uniform_floor < 1.0)) {
        throw ConfigError("uniform floor must lie in [0,1)");
    }

    NGramModel model;
    model.order_ = options.order;
    model.window_ = options.window;
    model.append_eos_ = options.append_eos;
    model.uniform_floor_ = options.uniform_floor;
    model.gram_counts_.assign(static_cast<std::size_t>(options.order), {});
    model.context_totals_.assign(static_cast<std::size_t>(options.order), {});

    if (options.weights.empty()) {
        // Proportional to order: (1, 2, ..., n) / (n(n+1)/2).
        model.weights_.clear();
        const double denom = options.order * (options.order + 1) / 2.0;
        for (int k = 1; k <= options.order; ++k) model.weights_.push_back(k / denom);
    } else {
        if (static_cast<int>(options.weights.size()) != options.order) {
            throw ConfigError("expected " + std::to_string(options.order) + " interpolation weights, got " +
                              std::to_string(options.weights.size()));
        }
        double sum = 0.0;
        for (double w : options.weights) {
            if (w < 0.0) throw ConfigError("interpolation weights must be non-negative");
            sum += w;
        }
        if (std::abs(sum - 1.0) > 1e-9) throw ConfigError("interpolation weights must sum to 1");
        model.weights_ = options.weights;
    }

    model.vocab_.add(kTutorTag);
    model.vocab_.add(kTuteeTag);
    for (const auto& d : corpus.dialogues) {
        for (const auto& t : d.turns) {
            for (const auto& tok : tokenize(t.text)) model.vocab_.add(tok);
        }
    }

    for (const auto& d : corpus.dialogues) {
        for (int pos = 1; pos <= static_cast<int>(d.turns.size()); ++pos) {
            const Turn& turn = d.turns[static_cast<std::size_t>(pos - 1)];
            if (turn.speaker != Speaker::Tutor) continue;
            HistoryWindow history = build_history(d, pos, options.window);
            std::vector<TokenId> context = model.context_ids(history);
            std::vector<TokenId> targets = model.vocab_.encode(tokenize(turn.text));
            if (options.append_eos) targets.push_back(Vocabulary::kEos);
            model.train_stream(context, targets);
        }
    }
    return model;
}

NGramModel uniform_model(const std::vector<std::string>& tokens) {
    NGramModel model;
    model.order_ = 1;
    model.weights_ = {1.0};
    model.uniform_floor_ = 0.0;
    model.gram_counts_.assign(1, {});
    model.context_totals_.assign(1, {});
    for (const auto& t : tokens) model.vocab_.add(t);
    return model;
}

namespace {

std::string key_to_text(const std::string& packed) {
    std::ostringstream ss;
    const std::size_t n = packed.size() / sizeof(TokenId);
    for (std::size_t i = 0; i < n; ++i) {
        TokenId id;
        std::memcpy(&id, packed.data() + i * sizeof(TokenId), sizeof(TokenId));
        if (i > 0) ss << ' ';
        ss << id;
    }
    return ss.str();
}

std::string key_from_text(const std::string& text) {
    std::istringstream ss(text);
    std::string key;
    TokenId id;
    while (ss >> id) {
        key.append(reinterpret_cast<const char*>(&id), sizeof(TokenId));
    }
    return key;
}

}  // namespace

std::string NGramModel::to_json() const {
    json j;
    j["format"] = "hedgen-ngram";
    j["version"] = 1;
    j["order"] = order_;
    j["window"] = window_;
    j["append_eos"] = append_eos_;
    j["weights"] = weights_;
    j["uniform_floor"] = uniform_floor_;
    j["vocab"] = vocab_.tokens();
    json counts = json::object();
    for (int k = 1; k <= order_; ++k) {
        json table = json::object();
        for (const auto& [key, count] : gram_counts_[static_cast<std::size_t>(k) - 1]) {
            table[key_to_text(key)] = count;
        }
        counts[std::to_string(k)] = std::move(table);
    }
    j["counts"] = counts;
    return j.dump();
}

NGramModel NGramModel::from_json(const std::string& text) {
    json j = json::parse(text, nullptr, false);
    if (j.is_discarded() || !j.is_object() || j.value("format", "") != "hedgen-ngram") {
        throw IoError("not a valid n-gram model file");
    }
    NGramModel model;
    model.order_ = j.at("order").get<int>();
    model.window_ = j.at("window").get<int>();
    model.append_eos_ = j.at("append_eos").get<bool>();
    model.weights_ = j.at("weights").get<std::vector<double>>();
    model.uniform_floor_ = j.at("uniform_floor").get<double>();
    model.gram_counts_.assign(static_cast<std::size_t>(model.order_), {});
    model.context_totals_.assign(static_cast<std::size_t>(model.order_), {});

    const auto tokens = j.at("vocab").get<std::vector<std::string>>();
    for (std::size_t i = 0; i < tokens.size(); ++i) {
        TokenId id = model.vocab_.add(tokens[i]);
        if (id != static_cast<TokenId>(i)) throw IoError("model vocabulary is not dense");
    }

    for (const auto& [order_text, table] : j.at("counts").items()) {
        const int k = std::stoi(order_text);
        if (k < 1 || k > model.order_) throw IoError("count table order " + order_text + " out of range");
        for (const auto& [key_text, count] : table.items()) {
            const std::string key = key_from_text(key_text);
            const std::uint64_t c = count.get<std::uint64_t>();
            model.gram_counts_[static_cast<std::size_t>(k) - 1][key] = c;
            model.context_totals_[static_cast<std::size_t>(k) - 1][key.substr(0, key.size() - sizeof(TokenId))] += c;
        }
    }
    return model;
}

void NGramModel::save(const std::string& path) const {
    std::ofstream out(path);
    if (!out) throw IoError("cannot write model file: " + path);
    out << to_json() << "\n";
}

NGramModel NGramModel::load(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw IoError("cannot open model file: " + path);
    std::ostringstream ss;
    ss << in.rdbuf();
    return from_json(ss.str());
}

std::string NGramModel::digest() const { return hex_digest(to_json()); }

}  // namespace hedgen
