#include <cctype>

#include "blamestyle/syntax.hpp"

namespace blamestyle {

std::vector<std::string> tokenize_words(std::string_view source) {
  std::vector<std::string> out;
  std::size_t i = 0;
  const auto word_char = [](char c) { return std::isalnum(static_cast<unsigned char>(c)) || c == '_'; };
  while (i < source.size()) {
    const char c = source[i];
    if (std::isspace(static_cast<unsigned char>(c))) {
      ++i;
    } else if (word_char(c)) {
      std::size_t j = i;
      while (j < source.size() && word_char(source[j])) ++j;
      out.emplace_back(source.substr(i, j - i));
      i = j;
    } else if (c == '"' || c == '\'') {
      // Literal body collapses to one placeholder; an unterminated literal
      // stops at end of line.
      std::size_t j = i + 1;
      while (j < source.size() && source[j] != c && source[j] != '\n') j += source[j] == '\\' ? 2 : 1;
      i = (j < source.size() && source[j] == c) ? j + 1 : std::min(j, source.size());
      out.emplace_back(c == '"' ? "STR" : "CHR");
    } else {
      out.emplace_back(1, c);
      ++i;
    }
  }
  return out;
}

}  // namespace blamestyle
