#pragma once

#include <optional>
#include <string>
#include <vector>

namespace graminfer::engine {

// Grammar-validity kinds (NotationSyntax..ReduceReduceConflict) fail grammar
// compilation; NoTerminalMatches and UnexpectedToken are parse-time errors.
// The two groups never overlap: compile() only ever returns the first group,
// tokenize()/parse() only the second.
enum class ErrorKind {
  NotationSyntax,
  UnknownImport,
  UndefinedSymbol,
  MissingStartRule,
  EmptyMatchTerminal,
  ReduceReduceConflict,
  NoTerminalMatches,
  UnexpectedToken,
};

struct SourcePos {
  int line = 0;  // 1-based
  int col = 0;   // 1-based, in code points
};

struct EngineError {
  ErrorKind kind;
  // Meaning depends on kind: symbol/terminal name, offending lexeme, or the
  // unmatched text fragment.
  std::string subject;
  // Terminal name of an unexpected token.
  std::string terminal;
  // Free-form detail for NotationSyntax / conflict kinds.
  std::string detail;
  std::optional<SourcePos> pos;
  // Sorted terminal names admissible at the failure point.
  std::vector<std::string> expected;

  bool is_parse_error() const {
    return kind == ErrorKind::NoTerminalMatches || kind == ErrorKind::UnexpectedToken;
  }

  static EngineError notation_syntax(std::string detail, SourcePos pos);
  static EngineError unknown_import(std::string name);
  static EngineError undefined_symbol(std::string name);
  static EngineError missing_start_rule();
  static EngineError empty_match_terminal(std::string name);
  static EngineError reduce_reduce(std::string detail);
  static EngineError no_terminal_matches(std::string fragment, SourcePos pos);
  static EngineError unexpected_token(std::string lexeme, std::string terminal, SourcePos pos,
                                      std::vector<std::string> expected);
};

// Renders the message fed back to the LLM and surfaced in reports. The three
// message shapes observed in the wild must stay stable:
//   Rule '{name}' used but not defined
//   Unexpected token '{lexeme}' ({terminal}) at line {l}, column {c}. Expected one of: {names}
//   No terminal matches '{text}' in the current parser context, at line {l} col {c}
std::string format_error(const EngineError& e);

}  // namespace graminfer::engine
