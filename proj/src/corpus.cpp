#include "hedgen/corpus.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <fstream>
#include <numeric>
#include <set>
#include <sstream>
#include <unordered_map>

#include <json.hpp>

#include "hedgen/digest.hpp"
#include "hedgen/error.hpp"
#include "hedgen/rng.hpp"
#include "hedgen/text.hpp"

namespace hedgen {

using nlohmann::json;

RapportBand rapport_band(std::optional<double> rapport) {
    if (!rapport) return RapportBand::Unknown;
    double r = *rapport;
    if (r < 3.0) return RapportBand::Low;
    if (r < 5.0) return RapportBand::Medium;
    return RapportBand::High;
}

const char* to_string(Speaker s) { return s == Speaker::Tutor ? "tutor" : "tutee"; }
const char* to_string(HedgeLabel l) { return l == HedgeLabel::Hedge ? "hedge" : "non_hedge"; }

const char* to_string(Subcategory s) {
    switch (s) {
        case Subcategory::Apologizer: return "apologizer";
        case Subcategory::Extender: return "extender";
        case Subcategory::Propositional: return "propositional";
        case Subcategory::Subjectivizer: return "subjectivizer";
    }
    return "?";
}

const char* to_string(RapportBand b) {
    switch (b) {
        case RapportBand::High: return "high";
        case RapportBand::Medium: return "medium";
        case RapportBand::Low: return "low";
        case RapportBand::Unknown: return "unknown";
    }
    return "?";
}

std::optional<Subcategory> subcategory_from_string(const std::string& s) {
    if (s == "apologizer") return Subcategory::Apologizer;
    if (s == "extender") return Subcategory::Extender;
    if (s == "propositional") return Subcategory::Propositional;
    if (s == "subjectivizer") return Subcategory::Subjectivizer;
    return std::nullopt;
}

std::size_t Corpus::turn_count() const {
    std::size_t n = 0;
    for (const auto& d : dialogues) n += d.turns.size();
    return n;
}

const Dialogue* Corpus::find_dialogue(const std::string& id) const {
    for (const auto& d : dialogues) {
        if (d.id == id) return &d;
    }
    return nullptr;
}

Corpus merge_clauses_to_turns(const std::vector<Clause>& clauses) {
    Corpus corpus;
    std::unordered_map<std::string, std::size_t> dialogue_index;

    std::size_t i = 0;
    while (i < clauses.size()) {
        const std::string& did = clauses[i].dialogue_id;
        const int tidx = clauses[i].turn_index;

        // Collect the contiguous group for this (dialogue, turn_index).
        std::size_t j = i;
        while (j < clauses.size() && clauses[j].dialogue_id == did && clauses[j].turn_index == tidx) ++j;

        Turn turn;
        turn.dialogue_id = did;
        turn.turn_index = tidx;
        turn.speaker = clauses[i].speaker;

        if (tidx < 0) {
            throw StructuralError("negative turn_index " + std::to_string(tidx) + " in dialogue '" + did + "'");
        }

        std::vector<std::string> pieces;
        double rapport_sum = 0.0;
        std::size_t rapport_n = 0;
        for (std::size_t k = i; k < j; ++k) {
            const Clause& c = clauses[k];
            if (c.speaker != turn.speaker) {
                throw StructuralError("mixed speakers in dialogue '" + did + "' turn " + std::to_string(tidx));
            }
            std::string piece = normalize_whitespace(c.text);
            if (piece.empty()) {
                throw StructuralError("empty clause text in dialogue '" + did + "' turn " + std::to_string(tidx));
            }
            pieces.push_back(piece);
            if (c.hedge_label == HedgeLabel::Hedge) turn.hedge_label = HedgeLabel::Hedge;
            if (c.rapport) {
                rapport_sum += *c.rapport;
                ++rapport_n;
            }
        }
        turn.text = join_tokens(pieces);
        if (rapport_n > 0) turn.rapport = rapport_sum / static_cast<double>(rapport_n);

        auto it = dialogue_index.find(did);
        if (it == dialogue_index.end()) {
            dialogue_index.emplace(did, corpus.dialogues.size());
            corpus.dialogues.push_back(Dialogue{did, {}});
            it = dialogue_index.find(did);
        }
        Dialogue& dlg = corpus.dialogues[it->second];
        if (!dlg.turns.empty() && dlg.turns.back().turn_index > tidx) {
            throw StructuralError("turn_index goes backwards in dialogue '" + did + "' at turn " +
                                  std::to_string(tidx));
        }
        dlg.turns.push_back(std::move(turn));
        i = j;
    }
    return corpus;
}

HistoryWindow build_history(const Dialogue& dialogue, int position, int window_size) {
    const int m = static_cast<int>(dialogue.turns.size());
    if (position < 1 || position > m) {
        throw BoundsError("turn position " + std::to_string(position) + " outside dialogue '" + dialogue.id +
                          "' with " + std::to_string(m) + " turns");
    }
    if (window_size < 1) throw ConfigError("history window size must be positive");

    HistoryWindow window;
    window.dialogue_id = dialogue.id;
    window.target_position = position;
    window.window_size = window_size;
    const int first = std::max(1, position - window_size);
    for (int p = first; p < position; ++p) window.turns.push_back(dialogue.turns[p - 1]);
    return window;
}

namespace {

// Largest-remainder apportionment of n into three parts.
std::array<std::size_t, 3> part_sizes(std::size_t n, const SplitSpec& spec) {
    const double ratios[3] = {spec.train, spec.validation, spec.test};
    std::array<std::size_t, 3> sizes{};
    double fracs[3];
    std::size_t assigned = 0;
    for (int k = 0; k < 3; ++k) {
        double exact = ratios[k] * static_cast<double>(n);
        sizes[k] = static_cast<std::size_t>(std::floor(exact));
        fracs[k] = exact - std::floor(exact);
        assigned += sizes[k];
    }
    // Hand out the remainder by largest fractional part, ties to earlier parts.
    std::array<int, 3> order{0, 1, 2};
    std::stable_sort(order.begin(), order.end(), [&](int a, int b) { return fracs[a] > fracs[b]; });
    for (std::size_t r = 0; r < n - assigned; ++r) ++sizes[order[r % 3]];
    return sizes;
}

void validate_ratios(const SplitSpec& spec) {
    const double ratios[3] = {spec.train, spec.validation, spec.test};
    for (double r : ratios) {
        if (!(r > 0.0 && r < 1.0)) throw ConfigError("split ratios must each lie in (0,1)");
    }
    if (std::abs(spec.train + spec.validation + spec.test - 1.0) > 1e-9) {
        throw ConfigError("split ratios must sum to 1");
    }
}

}  // namespace

SplitResult split_dataset(const Corpus& corpus, const SplitSpec& spec) {
    validate_ratios(spec);
    const std::size_t n = corpus.dialogues.size();
    if (n < 3) {
        throw StructuralError("cannot split " + std::to_string(n) + " dialogues into 3 parts");
    }

    std::vector<std::size_t> order(n);
    std::iota(order.begin(), order.end(), 0);
    Rng rng(spec.seed);
    rng.shuffle(order);

    const auto sizes = part_sizes(n, spec);
    SplitResult result;
    Corpus* parts[3] = {&result.train, &result.validation, &result.test};
    std::size_t cursor = 0;
    for (int k = 0; k < 3; ++k) {
        std::vector<std::size_t> picked(order.begin() + cursor, order.begin() + cursor + sizes[k]);
        cursor += sizes[k];
        // Keep corpus order within each part so output is stable.
        std::sort(picked.begin(), picked.end());
        for (std::size_t idx : picked) parts[k]->dialogues.push_back(corpus.dialogues[idx]);
        parts[k]->provenance = corpus.provenance;
    }
    return result;
}

std::vector<Turn> balance_test_set(const Corpus& test, std::uint64_t seed) {
    std::vector<const Turn*> hedges;
    std::vector<const Turn*> non_hedges;
    for (const auto& d : test.dialogues) {
        for (const auto& t : d.turns) {
            if (t.speaker != Speaker::Tutor) continue;
            (t.hedge_label == HedgeLabel::Hedge ? hedges : non_hedges).push_back(&t);
        }
    }
    if (non_hedges.size() < hedges.size()) {
        throw StructuralError("cannot balance test set: " + std::to_string(hedges.size()) + " hedge turns but only " +
                              std::to_string(non_hedges.size()) + " non-hedge turns");
    }

    // Seeded sample of non-hedge turns, one per hedge turn.
    std::vector<std::size_t> order(non_hedges.size());
    std::iota(order.begin(), order.end(), 0);
    Rng rng(seed);
    rng.shuffle(order);
    std::vector<bool> selected(non_hedges.size(), false);
    for (std::size_t k = 0; k < hedges.size(); ++k) selected[order[k]] = true;

    std::vector<Turn> out;
    std::size_t non_hedge_pos = 0;
    for (const auto& d : test.dialogues) {
        for (const auto& t : d.turns) {
            if (t.speaker != Speaker::Tutor) continue;
            if (t.hedge_label == HedgeLabel::Hedge) {
                out.push_back(t);
            } else {
                if (selected[non_hedge_pos]) out.push_back(t);
                ++non_hedge_pos;
            }
        }
    }
    return out;
}

CorpusStats corpus_stats(const Corpus& corpus) {
    CorpusStats st;
    st.dialogues = corpus.dialogues.size();
    for (const auto& d : corpus.dialogues) {
        for (const auto& t : d.turns) {
            ++st.turns;
            LabelCounts& sp = t.speaker == Speaker::Tutor ? st.tutor : st.tutee;
            if (t.hedge_label == HedgeLabel::Hedge) {
                ++st.all.hedge;
                ++sp.hedge;
                switch (rapport_band(t.rapport)) {
                    case RapportBand::Low: ++st.hedge_low; break;
                    case RapportBand::Medium: ++st.hedge_medium; break;
                    case RapportBand::High: ++st.hedge_high; break;
                    case RapportBand::Unknown: ++st.hedge_unknown; break;
                }
            } else {
                ++st.all.non_hedge;
                ++sp.non_hedge;
            }
        }
    }
    return st;
}

namespace {

Clause clause_from_json(const json& rec, std::size_t line_no) {
    auto fail = [&](const std::string& what) -> void {
        throw IoError("clause record on line " + std::to_string(line_no) + ": " + what);
    };
    Clause c;
    if (!rec.contains("dialogue_id") || !rec["dialogue_id"].is_string()) fail("missing string dialogue_id");
    c.dialogue_id = rec["dialogue_id"].get<std::string>();
    if (!rec.contains("turn_index") || !rec["turn_index"].is_number_integer()) fail("missing integer turn_index");
    c.turn_index = rec["turn_index"].get<int>();
    if (!rec.contains("speaker") || !rec["speaker"].is_string()) fail("missing string speaker");
    const std::string sp = rec["speaker"].get<std::string>();
    if (sp == "tutor") {
        c.speaker = Speaker::Tutor;
    } else if (sp == "tutee") {
        c.speaker = Speaker::Tutee;
    } else {
        fail("speaker must be 'tutor' or 'tutee', got '" + sp + "'");
    }
    if (!rec.contains("text") || !rec["text"].is_string()) fail("missing string text");
    c.text = rec["text"].get<std::string>();
    if (!rec.contains("hedge") || !rec["hedge"].is_number_integer()) fail("missing 0/1 hedge");
    const int h = rec["hedge"].get<int>();
    if (h != 0 && h != 1) fail("hedge must be 0 or 1");
    c.hedge_label = h == 1 ? HedgeLabel::Hedge : HedgeLabel::NonHedge;
    if (rec.contains("subcategory") && !rec["subcategory"].is_null()) {
        c.subcategory = subcategory_from_string(rec["subcategory"].get<std::string>());
    }
    if (rec.contains("rapport") && !rec["rapport"].is_null()) {
        double r = rec["rapport"].get<double>();
        if (r < 1.0 || r > 7.0) fail("rapport outside [1,7]");
        c.rapport = r;
    }
    return c;
}

json turn_to_json(const Turn& t) {
    json rec;
    rec["dialogue_id"] = t.dialogue_id;
    rec["turn_index"] = t.turn_index;
    rec["speaker"] = to_string(t.speaker);
    rec["text"] = t.text;
    rec["hedge"] = t.hedge_label == HedgeLabel::Hedge ? 1 : 0;
    rec["subcategory"] = nullptr;
    if (t.rapport) {
        rec["rapport"] = *t.rapport;
    } else {
        rec["rapport"] = nullptr;
    }
    return rec;
}

}  // namespace

std::vector<Clause> read_clauses_jsonl(std::istream& in) {
    std::vector<Clause> clauses;
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (line.empty()) continue;
        json rec = json::parse(line, nullptr, false);
        if (rec.is_discarded()) throw IoError("invalid JSON on line " + std::to_string(line_no));
        clauses.push_back(clause_from_json(rec, line_no));
    }
    return clauses;
}

std::vector<Clause> read_clauses_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw IoError("cannot open corpus file: " + path);
    auto clauses = read_clauses_jsonl(in);
    return clauses;
}

void write_corpus_jsonl(const Corpus& corpus, std::ostream& out) {
    for (const auto& d : corpus.dialogues) {
        for (const auto& t : d.turns) out << turn_to_json(t).dump() << "\n";
    }
}

void write_corpus_file(const Corpus& corpus, const std::string& path) {
    std::ofstream out(path);
    if (!out) throw IoError("cannot write corpus file: " + path);
    write_corpus_jsonl(corpus, out);
}

Corpus read_corpus_jsonl(std::istream& in) {
    // Turn-granularity records parse as single-clause turns and re-merge.
    auto clauses = read_clauses_jsonl(in);
    return merge_clauses_to_turns(clauses);
}

Corpus read_corpus_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw IoError("cannot open corpus file: " + path);
    Corpus corpus = read_corpus_jsonl(in);
    corpus.provenance = file_digest(path);
    return corpus;
}

void write_turns_jsonl(const std::vector<Turn>& turns, std::ostream& out) {
    for (const auto& t : turns) out << turn_to_json(t).dump() << "\n";
}

void write_turns_file(const std::vector<Turn>& turns, const std::string& path) {
    std::ofstream out(path);
    if (!out) throw IoError("cannot write turns file: " + path);
    write_turns_jsonl(turns, out);
}

std::vector<Turn> read_turns_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw IoError("cannot open turns file: " + path);
    std::vector<Turn> turns;
    for (const Clause& c : read_clauses_jsonl(in)) {
        Turn t;
        t.dialogue_id = c.dialogue_id;
        t.turn_index = c.turn_index;
        t.speaker = c.speaker;
        t.text = normalize_whitespace(c.text);
        t.hedge_label = c.hedge_label;
        t.rapport = c.rapport;
        turns.push_back(std::move(t));
    }
    return turns;
}

std::string corpus_stats_json(const CorpusStats& st) {
    json j;
    j["dialogues"] = st.dialogues;
    j["turns"] = st.turns;
    j["hedge"] = st.all.hedge;
    j["non_hedge"] = st.all.non_hedge;
    j["tutor"] = {{"hedge", st.tutor.hedge}, {"non_hedge", st.tutor.non_hedge}};
    j["tutee"] = {{"hedge", st.tutee.hedge}, {"non_hedge", st.tutee.non_hedge}};
    j["hedge_by_rapport"] = {{"low", st.hedge_low},
                             {"medium", st.hedge_medium},
                             {"high", st.hedge_high},
                             {"unknown", st.hedge_unknown}};
    return j.dump(2);
}

}  // namespace hedgen
