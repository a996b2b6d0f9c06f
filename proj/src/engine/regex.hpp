#pragma once

#include <optional>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "util.hpp"

namespace graminfer::engine {

// Small regular-expression engine used for terminal patterns. Dialect is the
// common core: character classes, escapes, '.', alternation, grouping and the
// ? * + quantifiers. Backreferences, lookaround and anchors are rejected at
// compile time. '{' and '}' are ordinary characters.
//
// Matching runs an NFA simulation over code points and reports the longest
// accepting prefix, which is exactly what a longest-match lexer needs.
// Greediness suffixes like '*?' are accepted and ignored: under
// longest-prefix semantics they do not change the matched language.
class Regex {
 public:
  // Returns the compiled regex or a diagnostic string.
  static Result<Regex, std::string> compile(std::string_view pattern);

  // Length (in code points) of the longest prefix of `input` this regex
  // matches; nullopt if nothing matches (a zero-length match yields 0).
  std::optional<size_t> match_prefix(std::u32string_view input) const;

  bool matches_empty() const;
  const std::string& pattern() const { return pattern_; }

 private:
  struct CharClass {
    std::vector<std::pair<char32_t, char32_t>> ranges;  // inclusive, sorted
    bool negated = false;
    bool contains(char32_t c) const;
  };
  struct State {
    // (class index, target state); -1 class index marks an epsilon edge.
    std::vector<std::pair<int, int>> edges;
  };

  friend class RegexParser;

  std::string pattern_;
  std::vector<CharClass> classes_;
  std::vector<State> states_;
  int start_ = 0;
  int accept_ = 0;

  void add_closure(int state, std::vector<bool>& set) const;
};

}  // namespace graminfer::engine
