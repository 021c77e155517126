#pragma once

#include <string>
#include <string_view>
#include <unordered_set>

// Word lists shipped in data/ and compiled into the library.
namespace neuron::lexicons {

std::string_view stopwords_text();
std::string_view verbs_text();
std::string_view prepositions_text();

// Parses one-token-per-line text; blank lines and '#' comments are skipped.
std::unordered_set<std::string> parse_word_list(std::string_view text);

}  // namespace neuron::lexicons
