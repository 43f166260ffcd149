#include "hedgen/text.hpp"

#include <cctype>

namespace hedgen {

namespace {

bool is_space(char c) { return std::isspace(static_cast<unsigned char>(c)) != 0; }

// Punctuation that gets detached from word edges. Apostrophes are not listed:
// contractions keep their shape.
bool is_detachable(char c) {
    switch (c) {
        case '.': case ',': case '!': case '?': case ';': case ':':
        case '"': case '(': case ')': case '[': case ']': case '{': case '}':
        case '*': case '~': case '/': case '\\': case '<': case '>':
            return true;
        default:
            return false;
    }
}

}  // namespace

std::string to_lower(std::string_view text) {
    std::string out;
    out.reserve(text.size());
    for (char c : text) out.push_back(static_cast<char>(std::tolower(static_cast<unsigned char>(c))));
    return out;
}

std::vector<std::string> tokenize(std::string_view text) {
    std::vector<std::string> tokens;
    std::string lowered = to_lower(text);
    std::size_t i = 0;
    while (i < lowered.size()) {
        while (i < lowered.size() && is_space(lowered[i])) ++i;
        if (i >= lowered.size()) break;
        std::size_t j = i;
        while (j < lowered.size() && !is_space(lowered[j])) ++j;
        std::string_view chunk(lowered.data() + i, j - i);
        i = j;

        // Peel leading punctuation.
        std::size_t begin = 0;
        while (begin < chunk.size() && is_detachable(chunk[begin])) {
            tokens.emplace_back(1, chunk[begin]);
            ++begin;
        }
        // Find the trailing punctuation run.
        std::size_t end = chunk.size();
        while (end > begin && is_detachable(chunk[end - 1])) --end;
        if (end > begin) tokens.emplace_back(chunk.substr(begin, end - begin));
        for (std::size_t k = end; k < chunk.size(); ++k) tokens.emplace_back(1, chunk[k]);
    }
    return tokens;
}

std::string join_tokens(const std::vector<std::string>& tokens) {
    std::string out;
    for (std::size_t i = 0; i < tokens.size(); ++i) {
        if (i > 0) out.push_back(' ');
        out += tokens[i];
    }
    return out;
}

std::string normalize_whitespace(std::string_view text) {
    std::string out;
    bool pending_space = false;
    for (char c : text) {
        if (is_space(c)) {
            pending_space = !out.empty();
        } else {
            if (pending_space) out.push_back(' ');
            pending_space = false;
            out.push_back(c);
        }
    }
    return out;
}

std::string squash_for_chars(std::string_view text) {
    std::string out;
    for (char c : text) {
        if (!is_space(c)) out.push_back(static_cast<char>(std::tolower(static_cast<unsigned char>(c))));
    }
    return out;
}

}  // namespace hedgen
