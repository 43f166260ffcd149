// Writes the bundled synthetic tutoring corpus as clause-level JSONL.
// data/sample_clauses.jsonl in the repository was produced by this tool.
#include <fstream>
#include <iostream>

#include <CLI11.hpp>
#include <json.hpp>

#include "hedgen/corpus.hpp"
#include "hedgen/synth.hpp"

int main(int argc, char** argv) {
    CLI::App app{"synthetic corpus fixture generator"};
    hedgen::SynthConfig config;
    std::string out = "sample_clauses.jsonl";
    app.add_option("--dialogues", config.dialogues, "number of dialogues");
    app.add_option("--seed", config.seed, "generation seed");
    app.add_option("--hedge-rate", config.hedge_rate, "fraction of tutor turns that hedge");
    app.add_option("--out", out, "output path");
    CLI11_PARSE(app, argc, argv);

    std::ofstream file(out);
    if (!file) {
        std::cerr << "cannot write " << out << "\n";
        return 1;
    }
    std::size_t lines = 0;
    for (const hedgen::Clause& c : hedgen::synth_clauses(config)) {
        nlohmann::json j;
        j["dialogue_id"] = c.dialogue_id;
        j["turn_index"] = c.turn_index;
        j["speaker"] = to_string(c.speaker);
        j["text"] = c.text;
        j["hedge"] = c.hedge_label == hedgen::HedgeLabel::Hedge ? 1 : 0;
        j["subcategory"] = c.subcategory ? nlohmann::json(to_string(*c.subcategory)) : nlohmann::json(nullptr);
        j["rapport"] = c.rapport ? nlohmann::json(*c.rapport) : nlohmann::json(nullptr);
        file << j.dump() << "\n";
        ++lines;
    }
    std::cout << "wrote " << lines << " clauses to " << out << "\n";
    return 0;
}
