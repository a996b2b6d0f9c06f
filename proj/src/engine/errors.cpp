#include "engine/errors.hpp"

#include <sstream>

namespace graminfer::engine {

EngineError EngineError::notation_syntax(std::string detail, SourcePos pos) {
  EngineError e;
  e.kind = ErrorKind::NotationSyntax;
  e.detail = std::move(detail);
  e.pos = pos;
  return e;
}

EngineError EngineError::unknown_import(std::string name) {
  EngineError e;
  e.kind = ErrorKind::UnknownImport;
  e.subject = std::move(name);
  return e;
}

EngineError EngineError::undefined_symbol(std::string name) {
  EngineError e;
  e.kind = ErrorKind::UndefinedSymbol;
  e.subject = std::move(name);
  return e;
}

EngineError EngineError::missing_start_rule() {
  EngineError e;
  e.kind = ErrorKind::MissingStartRule;
  return e;
}

EngineError EngineError::empty_match_terminal(std::string name) {
  EngineError e;
  e.kind = ErrorKind::EmptyMatchTerminal;
  e.subject = std::move(name);
  return e;
}

EngineError EngineError::reduce_reduce(std::string detail) {
  EngineError e;
  e.kind = ErrorKind::ReduceReduceConflict;
  e.detail = std::move(detail);
  return e;
}

EngineError EngineError::no_terminal_matches(std::string fragment, SourcePos pos) {
  EngineError e;
  e.kind = ErrorKind::NoTerminalMatches;
  e.subject = std::move(fragment);
  e.pos = pos;
  return e;
}

EngineError EngineError::unexpected_token(std::string lexeme, std::string terminal, SourcePos pos,
                                          std::vector<std::string> expected) {
  EngineError e;
  e.kind = ErrorKind::UnexpectedToken;
  e.subject = std::move(lexeme);
  e.terminal = std::move(terminal);
  e.pos = pos;
  e.expected = std::move(expected);
  return e;
}

std::string format_error(const EngineError& e) {
  std::ostringstream os;
  switch (e.kind) {
    case ErrorKind::NotationSyntax:
      os << "Syntax error in grammar at line " << (e.pos ? e.pos->line : 0) << " column "
         << (e.pos ? e.pos->col : 0) << ": " << e.detail;
      break;
    case ErrorKind::UnknownImport:
      os << "Unknown import 'common." << e.subject << "'";
      break;
    case ErrorKind::UndefinedSymbol:
      os << "Rule '" << e.subject << "' used but not defined";
      break;
    case ErrorKind::MissingStartRule:
      os << "Grammar must define a 'start' rule";
      break;
    case ErrorKind::EmptyMatchTerminal:
      os << "Terminal '" << e.subject << "' may match the empty string";
      break;
    case ErrorKind::ReduceReduceConflict:
      os << "Reduce/reduce conflict " << e.detail;
      break;
    case ErrorKind::NoTerminalMatches:
      os << "No terminal matches '" << e.subject << "' in the current parser context, at line "
         << (e.pos ? e.pos->line : 0) << " col " << (e.pos ? e.pos->col : 0);
      break;
    case ErrorKind::UnexpectedToken: {
      os << "Unexpected token '" << e.subject << "' (" << e.terminal << ") at line "
         << (e.pos ? e.pos->line : 0) << ", column " << (e.pos ? e.pos->col : 0)
         << ". Expected one of: ";
      for (size_t i = 0; i < e.expected.size(); ++i) {
        if (i) os << ", ";
        os << e.expected[i];
      }
      break;
    }
  }
  return os.str();
}

}  // namespace graminfer::engine
