// Brute-force reference implementations the fast paths are checked against.
// Deliberately written as the naive textbook computation, sharing no code
// with the library versions.
#pragma once

#include <algorithm>
#include <cmath>
#include <map>
#include <set>
#include <string>
#include <vector>

#include "hedgen/generate.hpp"
#include "hedgen/ngram.hpp"
#include "hedgen/rng.hpp"
#include "hedgen/text.hpp"

namespace oracle {

inline std::vector<std::vector<std::string>> ngrams_of(const std::vector<std::string>& tokens, int k) {
    std::vector<std::vector<std::string>> grams;
    for (std::size_t i = 0; i + static_cast<std::size_t>(k) <= tokens.size(); ++i) {
        grams.emplace_back(tokens.begin() + static_cast<std::ptrdiff_t>(i),
                           tokens.begin() + static_cast<std::ptrdiff_t>(i + static_cast<std::size_t>(k)));
    }
    return grams;
}

// Count how many grams of `a` can be matched against `b`, consuming matches.
inline std::size_t clipped(const std::vector<std::vector<std::string>>& a,
                           std::vector<std::vector<std::string>> b) {
    std::size_t n = 0;
    for (const auto& gram : a) {
        auto it = std::find(b.begin(), b.end(), gram);
        if (it != b.end()) {
            b.erase(it);
            ++n;
        }
    }
    return n;
}

inline double bleu(const std::vector<std::string>& cands, const std::vector<std::string>& refs, int n) {
    std::vector<std::size_t> match(static_cast<std::size_t>(n), 0), total(static_cast<std::size_t>(n), 0);
    std::size_t c_len = 0, r_len = 0;
    for (std::size_t i = 0; i < cands.size(); ++i) {
        const auto c = hedgen::tokenize(cands[i]);
        const auto r = hedgen::tokenize(refs[i]);
        c_len += c.size();
        r_len += r.size();
        for (int k = 1; k <= n; ++k) {
            const auto cg = ngrams_of(c, k);
            match[static_cast<std::size_t>(k) - 1] += clipped(cg, ngrams_of(r, k));
            total[static_cast<std::size_t>(k) - 1] += cg.size();
        }
    }
    if (c_len == 0) return 0.0;
    double product = 1.0;
    for (int k = 1; k <= n; ++k) {
        const double m = static_cast<double>(match[static_cast<std::size_t>(k) - 1]);
        const double t = static_cast<double>(total[static_cast<std::size_t>(k) - 1]);
        double p;
        if (t == 0.0) p = 1.0;
        else if (m == 0.0) {
            if (k == 1) return 0.0;
            p = 1.0 / (t + 1.0);
        } else p = m / t;
        product *= std::pow(p, 1.0 / n);
    }
    const double bp = c_len > r_len ? 1.0 : std::exp(1.0 - static_cast<double>(r_len) / static_cast<double>(c_len));
    return 100.0 * bp * product;
}

inline std::size_t lcs(const std::vector<std::string>& a, const std::vector<std::string>& b) {
    std::vector<std::vector<std::size_t>> dp(a.size() + 1, std::vector<std::size_t>(b.size() + 1, 0));
    for (std::size_t i = 1; i <= a.size(); ++i) {
        for (std::size_t j = 1; j <= b.size(); ++j) {
            dp[i][j] = a[i - 1] == b[j - 1] ? dp[i - 1][j - 1] + 1
                                            : std::max(dp[i - 1][j], dp[i][j - 1]);
        }
    }
    return dp[a.size()][b.size()];
}

inline double rouge_l(const std::vector<std::string>& cands, const std::vector<std::string>& refs) {
    if (cands.empty()) return 0.0;
    double sum = 0.0;
    for (std::size_t i = 0; i < cands.size(); ++i) {
        const auto c = hedgen::tokenize(cands[i]);
        const auto r = hedgen::tokenize(refs[i]);
        if (c.empty() && r.empty()) {
            sum += 1.0;
            continue;
        }
        if (c.empty() || r.empty()) continue;
        const double l = static_cast<double>(lcs(c, r));
        if (l == 0.0) continue;
        const double p = l / static_cast<double>(c.size());
        const double rec = l / static_cast<double>(r.size());
        sum += 2.0 * p * rec / (p + rec);
    }
    return 100.0 * sum / static_cast<double>(cands.size());
}

inline std::vector<std::string> char_ngrams(const std::string& s, int k) {
    std::vector<std::string> grams;
    for (std::size_t i = 0; i + static_cast<std::size_t>(k) <= s.size(); ++i) {
        grams.push_back(s.substr(i, static_cast<std::size_t>(k)));
    }
    return grams;
}

inline double chrf(const std::vector<std::string>& cands, const std::vector<std::string>& refs) {
    const int max_order = 6;
    const double beta = 2.0;
    std::vector<double> match(max_order, 0), ct(max_order, 0), rt(max_order, 0);
    for (std::size_t i = 0; i < cands.size(); ++i) {
        const std::string c = hedgen::squash_for_chars(cands[i]);
        const std::string r = hedgen::squash_for_chars(refs[i]);
        for (int k = 1; k <= max_order; ++k) {
            auto cg = char_ngrams(c, k);
            auto rg = char_ngrams(r, k);
            ct[static_cast<std::size_t>(k) - 1] += static_cast<double>(cg.size());
            rt[static_cast<std::size_t>(k) - 1] += static_cast<double>(rg.size());
            // consume-on-match clipping
            for (const auto& gram : cg) {
                auto it = std::find(rg.begin(), rg.end(), gram);
                if (it != rg.end()) {
                    rg.erase(it);
                    match[static_cast<std::size_t>(k) - 1] += 1.0;
                }
            }
        }
    }
    double ps = 0.0, rs = 0.0;
    int eff = 0;
    for (int k = 0; k < max_order; ++k) {
        if (ct[static_cast<std::size_t>(k)] == 0.0 && rt[static_cast<std::size_t>(k)] == 0.0) continue;
        ++eff;
        if (ct[static_cast<std::size_t>(k)] > 0.0) ps += match[static_cast<std::size_t>(k)] / ct[static_cast<std::size_t>(k)];
        if (rt[static_cast<std::size_t>(k)] > 0.0) rs += match[static_cast<std::size_t>(k)] / rt[static_cast<std::size_t>(k)];
    }
    if (eff == 0) return 0.0;
    const double p = ps / eff, r = rs / eff;
    const double denom = beta * beta * p + r;
    return denom == 0.0 ? 0.0 : 100.0 * (1.0 + beta * beta) * p * r / denom;
}

// Interpolated next-token probability rebuilt from the model's raw count
// tables, deciding "context seen" by whether the ML distribution sums to 1.
inline double interp_prob(const hedgen::NGramModel& model, std::vector<hedgen::TokenId> stream,
                          hedgen::TokenId next) {
    const double v = static_cast<double>(model.vocab().size());
    double p = 0.0;
    for (int k = 1; k <= model.order(); ++k) {
        std::vector<hedgen::TokenId> ctx;
        const int need = k - 1;
        for (int i = 0; i < need - static_cast<int>(stream.size()); ++i) ctx.push_back(hedgen::Vocabulary::kBos);
        const std::size_t take = std::min(static_cast<std::size_t>(need), stream.size());
        ctx.insert(ctx.end(), stream.end() - static_cast<std::ptrdiff_t>(take), stream.end());

        double mass = 0.0;
        for (hedgen::TokenId w = 0; w < static_cast<hedgen::TokenId>(model.vocab().size()); ++w) {
            mass += model.ml_prob(ctx, w);
        }
        const double q = mass > 0.5 ? model.ml_prob(ctx, next) : 1.0 / v;
        p += model.weights()[static_cast<std::size_t>(k) - 1] * q;
    }
    return (1.0 - model.uniform_floor()) * p + model.uniform_floor() / v;
}

// Every terminated decoding path, found by exhaustive recursion under the
// same constraints beam search applies.
struct EnumHyp {
    std::vector<hedgen::TokenId> tokens;
    double score = 0.0;
};

inline void enumerate_paths(const hedgen::NGramModel& model, const std::vector<hedgen::TokenId>& context,
                            const hedgen::DecodingConfig& config, EnumHyp hyp,
                            std::vector<EnumHyp>& done) {
    if (static_cast<int>(hyp.tokens.size()) == config.max_tokens) {
        done.push_back(hyp);
        return;
    }
    std::vector<hedgen::TokenId> stream = context;
    stream.insert(stream.end(), hyp.tokens.begin(), hyp.tokens.end());

    bool any = false;
    for (hedgen::TokenId next : model.generation_targets()) {
        const bool is_eos = next == hedgen::Vocabulary::kEos;
        if (is_eos && hyp.tokens.empty()) continue;
        if (!is_eos && config.no_repeat_ngram > 0) {
            const int n = config.no_repeat_ngram;
            if (static_cast<int>(hyp.tokens.size()) >= n) {
                std::vector<hedgen::TokenId> gram(hyp.tokens.end() - (n - 1), hyp.tokens.end());
                gram.push_back(next);
                bool repeat = false;
                for (std::size_t i = 0; i + static_cast<std::size_t>(n) <= hyp.tokens.size(); ++i) {
                    if (std::equal(gram.begin(), gram.end(), hyp.tokens.begin() + static_cast<std::ptrdiff_t>(i))) {
                        repeat = true;
                        break;
                    }
                }
                if (repeat) continue;
            }
        }
        double lp = std::log(model.prob(stream, next));
        if (!is_eos &&
            std::find(hyp.tokens.begin(), hyp.tokens.end(), next) != hyp.tokens.end()) {
            lp *= config.repetition_penalty;
        }
        EnumHyp child = hyp;
        child.score += lp;
        if (is_eos) {
            done.push_back(child);
        } else {
            child.tokens.push_back(next);
            enumerate_paths(model, context, config, child, done);
        }
        any = true;
    }
    if (!any) done.push_back(hyp);
}

inline std::vector<EnumHyp> enumerate_pool(const hedgen::NGramModel& model,
                                           const std::vector<hedgen::TokenId>& context,
                                           const hedgen::DecodingConfig& config) {
    std::vector<EnumHyp> done;
    enumerate_paths(model, context, config, EnumHyp{}, done);
    std::sort(done.begin(), done.end(), [](const EnumHyp& a, const EnumHyp& b) {
        if (a.score != b.score) return a.score > b.score;
        return a.tokens < b.tokens;
    });
    if (static_cast<int>(done.size()) > config.pool_size) {
        done.resize(static_cast<std::size_t>(config.pool_size));
    }
    return done;
}

// Seeded sentence pairs over a small shared vocabulary; every sentence has
// at least two tokens so bigram statistics are never vacuous.
inline std::pair<std::vector<std::string>, std::vector<std::string>> random_pairs(std::uint64_t seed,
                                                                                  std::size_t count) {
    static const char* words[] = {"the", "cat", "sat", "on", "a", "mat", "dog", "ran",
                                  "fast", "home", "big", "red"};
    hedgen::Rng rng(seed);
    auto sentence = [&] {
        const std::size_t len = 2 + rng.uniform(7);
        std::string s;
        for (std::size_t i = 0; i < len; ++i) {
            if (i > 0) s += ' ';
            s += words[rng.uniform(12)];
        }
        return s;
    };
    std::vector<std::string> cands, refs;
    for (std::size_t i = 0; i < count; ++i) {
        cands.push_back(sentence());
        refs.push_back(sentence());
    }
    return {cands, refs};
}

}  // namespace oracle
