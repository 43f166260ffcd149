#pragma once

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

namespace hedgen {

enum class Speaker { Tutor, Tutee };
enum class HedgeLabel { NonHedge, Hedge };
enum class Subcategory { Apologizer, Extender, Propositional, Subjectivizer };

// Rapport is annotated on a 1..7 scale. Band edges are half-open on the left
// (low [1,3), medium [3,5), high [5,7]) so every value maps to exactly one band.
enum class RapportBand { High, Medium, Low, Unknown };

RapportBand rapport_band(std::optional<double> rapport);

const char* to_string(Speaker s);
const char* to_string(HedgeLabel l);
const char* to_string(Subcategory s);
const char* to_string(RapportBand b);
std::optional<Subcategory> subcategory_from_string(const std::string& s);

// One annotated clause, the unit of the input corpus.
struct Clause {
    std::string dialogue_id;
    int turn_index = 0;
    Speaker speaker = Speaker::Tutor;
    std::string text;
    HedgeLabel hedge_label = HedgeLabel::NonHedge;
    std::optional<Subcategory> subcategory;
    std::optional<double> rapport;
};

// One speaker turn. Text is the clause texts concatenated in order; the turn
// is a hedge iff any constituent clause was; rapport is the mean of whatever
// clause rapport values were present.
struct Turn {
    std::string dialogue_id;
    int turn_index = 0;
    Speaker speaker = Speaker::Tutor;
    std::string text;
    HedgeLabel hedge_label = HedgeLabel::NonHedge;
    std::optional<double> rapport;
};

struct Dialogue {
    std::string id;
    std::vector<Turn> turns;
};

struct Corpus {
    std::vector<Dialogue> dialogues;
    std::string provenance;  // digest of the source file, empty if built in memory

    std::size_t turn_count() const;
    const Dialogue* find_dialogue(const std::string& id) const;
};

// The up-to-`window_size` turns preceding a target turn, in chronological
// order. Both speakers are included.
struct HistoryWindow {
    std::string dialogue_id;
    int target_position = 0;  // 1-based position of the target within its dialogue
    int window_size = 0;
    std::vector<Turn> turns;
};

struct SplitSpec {
    double train = 0.6;
    double validation = 0.2;
    double test = 0.2;
    std::uint64_t seed = 0;
};

struct SplitResult {
    Corpus train;
    Corpus validation;
    Corpus test;
};

struct LabelCounts {
    std::size_t hedge = 0;
    std::size_t non_hedge = 0;
    std::size_t total() const { return hedge + non_hedge; }
};

struct CorpusStats {
    std::size_t dialogues = 0;
    std::size_t turns = 0;
    LabelCounts all;
    LabelCounts tutor;
    LabelCounts tutee;
    // Hedge turns stratified by rapport band, all speakers.
    std::size_t hedge_low = 0;
    std::size_t hedge_medium = 0;
    std::size_t hedge_high = 0;
    std::size_t hedge_unknown = 0;
};

// Merges clause-level annotations into turns. Clauses must arrive grouped by
// (dialogue_id, turn_index); a turn is a hedge iff at least one of its clauses
// is. Empty input yields an empty corpus.
Corpus merge_clauses_to_turns(const std::vector<Clause>& clauses);

// History for the turn at 1-based position `position` in `dialogue`: the
// preceding min(window_size, position - 1) turns.
HistoryWindow build_history(const Dialogue& dialogue, int position, int window_size);

// Deterministic split by dialogue (not by turn, so no history leaks across
// parts). Part sizes follow largest-remainder rounding of the ratios.
SplitResult split_dataset(const Corpus& corpus, const SplitSpec& spec);

// All tutor hedge turns plus an equally sized seeded sample of tutor
// non-hedge turns, in corpus order.
std::vector<Turn> balance_test_set(const Corpus& test, std::uint64_t seed);

CorpusStats corpus_stats(const Corpus& corpus);

// Line-delimited JSON, one clause per line:
// {"dialogue_id","turn_index","speaker","text","hedge","subcategory","rapport"}
std::vector<Clause> read_clauses_jsonl(std::istream& in);
std::vector<Clause> read_clauses_file(const std::string& path);

// Turn-granularity corpora use the same record shape.
void write_corpus_jsonl(const Corpus& corpus, std::ostream& out);
void write_corpus_file(const Corpus& corpus, const std::string& path);
Corpus read_corpus_jsonl(std::istream& in);
Corpus read_corpus_file(const std::string& path);

void write_turns_jsonl(const std::vector<Turn>& turns, std::ostream& out);
void write_turns_file(const std::vector<Turn>& turns, const std::string& path);
std::vector<Turn> read_turns_file(const std::string& path);

std::string corpus_stats_json(const CorpusStats& stats);

}  // namespace hedgen
