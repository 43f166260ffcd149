#pragma once

#include <string>
#include <string_view>
#include <vector>

namespace hedgen {

// Corpus-wide tokenization convention: lowercase, whitespace split, leading
// and trailing punctuation detached into their own tokens. Word-internal
// apostrophes and hyphens stay put ("i'm", "x-axis"), so disfluent speech
// survives verbatim.
std::vector<std::string> tokenize(std::string_view text);

std::string to_lower(std::string_view text);

// Space-joins tokens.
std::string join_tokens(const std::vector<std::string>& tokens);

// Collapses runs of whitespace to single spaces and trims the ends.
std::string normalize_whitespace(std::string_view text);

// All characters of `text` minus whitespace, lowercased. Character n-gram
// metrics operate on this.
std::string squash_for_chars(std::string_view text);

}  // namespace hedgen
