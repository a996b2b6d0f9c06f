#pragma once

#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "engine/errors.hpp"
#include "util.hpp"

namespace graminfer::engine {

struct Alternation;

enum class Quant { One, Opt, Star, Plus };

struct Atom {
  enum class Kind { RuleRef, TerminalRef, Literal, Regex, Group };
  Kind kind;
  std::string text;  // ref name, decoded literal text, or regex pattern
  std::shared_ptr<Alternation> group;
  SourcePos pos;
};

struct Item {
  Atom atom;
  Quant quant = Quant::One;
};

using Sequence = std::vector<Item>;

struct Alternative {
  Sequence items;
  std::optional<std::string> alias;
};

struct Alternation {
  std::vector<Alternative> alternatives;
};

// Terminal bodies are restricted: one regex, one literal, or an alternation
// of literals. Anything else is a notation syntax error.
struct TerminalBody {
  enum class Kind { Regex, Literals };
  Kind kind;
  std::string regex_pattern;
  std::vector<std::string> literals;
  SourcePos pos;
};

struct IgnoreEntry {
  bool is_literal;
  std::string value;  // terminal name or decoded literal text
  SourcePos pos;
};

// Parsed grammar notation. Definition order is preserved; the lexer uses it
// for tie-breaking.
struct GrammarAst {
  std::vector<std::pair<std::string, Alternation>> rules;
  std::vector<std::pair<std::string, TerminalBody>> terminals;
  std::vector<IgnoreEntry> ignores;
  std::vector<std::string> imports;

  const Alternation* find_rule(std::string_view name) const {
    for (auto& [n, alt] : rules)
      if (n == name) return &alt;
    return nullptr;
  }
  const TerminalBody* find_terminal(std::string_view name) const {
    for (auto& [n, b] : terminals)
      if (n == name) return &b;
    return nullptr;
  }
};

// Parses grammar notation text: definitions `name : body` (lowercase rules,
// UPPERCASE terminals), `|` alternatives with optional `-> alias`, atoms
// (refs, "literal", /regex/, groups), ? * + quantifiers, and the %import /
// %ignore directives. `//` comments run to end of line. A body continues
// across lines until a line starts with `name :` or a directive.
Result<GrammarAst, EngineError> parse_notation(std::string_view text);

}  // namespace graminfer::engine
