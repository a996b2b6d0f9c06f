#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <variant>
#include <vector>

#include "engine/ast.hpp"
#include "engine/regex.hpp"

namespace graminfer::engine {

// One lowered production: pure BNF, no quantifiers or groups. An empty rhs is
// an epsilon production (only ever introduced by lowering).
struct Production {
  std::string lhs;
  std::vector<std::string> rhs;
  std::optional<std::string> alias;
  bool synthetic_lhs = false;

  std::string to_string() const;
};

// Lexer entry. Literal terminals beat regex terminals on equal match length;
// earlier definition beats later.
struct LexTerminal {
  std::string name;
  bool literal_kind = false;
  std::vector<std::u32string> literals;  // decoded text, literal kind only
  std::optional<Regex> regex;
  bool synthetic = false;
};

struct LoweredGrammar {
  std::vector<Production> productions;
  std::vector<LexTerminal> terminals;
  std::vector<std::string> ignored;

  const LexTerminal* find_terminal(std::string_view name) const {
    for (auto& t : terminals)
      if (t.name == name) return &t;
    return nullptr;
  }
};

struct Token {
  std::string terminal;
  std::string lexeme;
  size_t byte_offset = 0;
  int line = 1;
  int col = 1;
};

struct ParseTree {
  std::string label;
  bool splice = false;  // unaliased synthetic rule; inlined into the parent
  std::vector<std::variant<ParseTree, Token>> children;
};

std::string format_tree(const ParseTree& tree);

// A compiled grammar: lowered productions, LALR(1) action/goto tables and the
// lexer spec. Immutable after build_tables and safe to share across threads;
// tokenize/parse keep all state on their own stack.
class CompiledGrammar {
 public:
  const std::vector<std::string>& warnings() const { return warnings_; }
  const LoweredGrammar& lowered() const { return lowered_; }
  size_t state_count() const { return actions_.size(); }

  Result<std::vector<Token>, EngineError> tokenize(std::string_view input) const;
  Result<ParseTree, EngineError> parse(std::string_view input) const;

 private:
  friend class TableBuilder;

  struct TokenRun {
    std::vector<Token> tokens;
    std::vector<int> tids;
    SourcePos eof;
  };
  Result<TokenRun, EngineError> scan(std::string_view input) const;

  LoweredGrammar lowered_;
  std::vector<std::string> warnings_;

  std::map<std::string, int, std::less<>> terminal_ids_;  // name -> tid; $END == eof_tid_
  int eof_tid_ = 0;
  std::vector<bool> ignored_tid_;
  std::vector<bool> drop_from_tree_;  // synthetic literal tokens

  // action_[state][tid]: 0 error, tid+1.. encoded below
  static constexpr int kAccept = INT32_MAX;
  std::vector<std::vector<int>> actions_;  // >0: shift to v-1; <0: reduce -v-1
  std::vector<std::vector<int>> gotos_;    // state x nonterminal -> state+1, 0 none
  std::map<std::string, int, std::less<>> nonterminal_ids_;
};

// Compilation stages. `compile` chains all of them.
Result<GrammarAst, EngineError> resolve_imports(GrammarAst ast);
std::optional<EngineError> validate_references(const GrammarAst& ast);
Result<LoweredGrammar, EngineError> lower_to_bnf(const GrammarAst& ast);
Result<CompiledGrammar, EngineError> build_tables(LoweredGrammar lowered);
Result<CompiledGrammar, EngineError> compile(std::string_view source);

// The fixed `%import common.*` table: name -> regex pattern.
const std::vector<std::pair<std::string, std::string>>& builtin_terminals();

}  // namespace graminfer::engine
