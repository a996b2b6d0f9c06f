#include <algorithm>

#include "engine/compile.hpp"

namespace graminfer::engine {

namespace {

// Display form for lexemes inside tree dumps: keep them on one line.
std::string escape_for_display(std::string_view s) {
  std::string out;
  for (char c : s) {
    switch (c) {
      case '\n': out += "\\n"; break;
      case '\t': out += "\\t"; break;
      case '\r': out += "\\r"; break;
      default: out.push_back(c);
    }
  }
  return out;
}

void format_tree_into(const ParseTree& t, int depth, std::string& out) {
  out.append(static_cast<size_t>(depth) * 2, ' ');
  out += t.label;
  out.push_back('\n');
  for (auto& child : t.children) {
    if (std::holds_alternative<Token>(child)) {
      const Token& tok = std::get<Token>(child);
      out.append(static_cast<size_t>(depth + 1) * 2, ' ');
      out += tok.terminal + " '" + escape_for_display(tok.lexeme) + "'\n";
    } else {
      format_tree_into(std::get<ParseTree>(child), depth + 1, out);
    }
  }
}

}  // namespace

std::string format_tree(const ParseTree& tree) {
  std::string out;
  format_tree_into(tree, 0, out);
  return out;
}

Result<CompiledGrammar::TokenRun, EngineError> CompiledGrammar::scan(
    std::string_view input) const {
  DecodedText dec = utf8_decode_offsets(input);
  const size_t n = dec.cps.size();

  // Line/column per code point, plus the end-of-input position.
  std::vector<int> lines(n + 1), cols(n + 1);
  {
    int line = 1, col = 1;
    for (size_t i = 0; i < n; ++i) {
      lines[i] = line;
      cols[i] = col;
      if (dec.cps[i] == U'\n') {
        ++line;
        col = 1;
      } else {
        ++col;
      }
    }
    lines[n] = line;
    cols[n] = col;
  }

  TokenRun run;
  run.eof = {lines[n], cols[n]};
  const auto& terms = lowered_.terminals;
  size_t pos = 0;
  while (pos < n) {
    std::u32string_view rest(dec.cps.data() + pos, n - pos);
    size_t best_len = 0;
    int best = -1;
    bool best_literal = false;
    for (size_t ti = 0; ti < terms.size(); ++ti) {
      const LexTerminal& t = terms[ti];
      size_t len = 0;
      if (t.literal_kind) {
        for (const std::u32string& lit : t.literals) {
          if (lit.size() > len && lit.size() <= rest.size() &&
              rest.compare(0, lit.size(), lit) == 0)
            len = lit.size();
        }
      } else if (t.regex) {
        len = t.regex->match_prefix(rest).value_or(0);
      }
      if (len == 0) continue;
      bool wins = len > best_len || (len == best_len && t.literal_kind && !best_literal);
      if (wins) {
        best_len = len;
        best = static_cast<int>(ti);
        best_literal = t.literal_kind;
      }
    }
    if (best < 0) {
      size_t frag_len = std::min<size_t>(10, n - pos);
      std::string fragment = utf8_encode(rest.substr(0, frag_len));
      return EngineError::no_terminal_matches(std::move(fragment), {lines[pos], cols[pos]});
    }
    if (!ignored_tid_[static_cast<size_t>(best)]) {
      Token tok;
      tok.terminal = terms[static_cast<size_t>(best)].name;
      tok.lexeme = std::string(
          input.substr(dec.byte_offsets[pos], dec.byte_offsets[pos + best_len] -
                                                  dec.byte_offsets[pos]));
      tok.byte_offset = dec.byte_offsets[pos];
      tok.line = lines[pos];
      tok.col = cols[pos];
      run.tids.push_back(best);
      run.tokens.push_back(std::move(tok));
    }
    pos += best_len;
  }
  return run;
}

Result<std::vector<Token>, EngineError> CompiledGrammar::tokenize(std::string_view input) const {
  auto run = scan(input);
  if (!run.ok()) return run.error();
  return std::move(run.value().tokens);
}

Result<ParseTree, EngineError> CompiledGrammar::parse(std::string_view input) const {
  auto scanned = scan(input);
  if (!scanned.ok()) return scanned.error();
  TokenRun& run = scanned.value();

  std::vector<int> state_stack{0};
  std::vector<std::variant<ParseTree, Token>> node_stack;

  // Productions re-interned for the driver (kept simple; grammars are small).
  const auto& prods = lowered_.productions;

  size_t ti = 0;
  const size_t ntok = run.tokens.size();
  while (true) {
    int state = state_stack.back();
    int tid = ti < ntok ? run.tids[ti] : eof_tid_;
    int act = actions_[static_cast<size_t>(state)][static_cast<size_t>(tid)];

    if (act == kAccept) break;
    if (act > 0) {
      if (ti >= ntok) {
        // Cannot happen: $END has no shift actions.
        break;
      }
      state_stack.push_back(act - 1);
      node_stack.emplace_back(std::move(run.tokens[ti]));
      ++ti;
      continue;
    }
    if (act < 0) {
      const Production& p = prods[static_cast<size_t>(-act - 1)];
      size_t k = p.rhs.size();
      ParseTree node;
      node.label = p.alias ? *p.alias : p.lhs;
      node.splice = p.synthetic_lhs && !p.alias;
      for (size_t i = node_stack.size() - k; i < node_stack.size(); ++i) {
        auto& child = node_stack[i];
        if (std::holds_alternative<Token>(child)) {
          Token& tok = std::get<Token>(child);
          int ctid = terminal_ids_.at(tok.terminal);
          if (drop_from_tree_[static_cast<size_t>(ctid)]) continue;
          node.children.emplace_back(std::move(tok));
        } else {
          ParseTree& sub = std::get<ParseTree>(child);
          if (sub.splice) {
            for (auto& gc : sub.children) node.children.emplace_back(std::move(gc));
          } else {
            node.children.emplace_back(std::move(sub));
          }
        }
      }
      state_stack.resize(state_stack.size() - k);
      node_stack.resize(node_stack.size() - k);
      int nt = nonterminal_ids_.at(p.lhs);
      int go = gotos_[static_cast<size_t>(state_stack.back())][static_cast<size_t>(nt)];
      state_stack.push_back(go - 1);
      node_stack.emplace_back(std::move(node));
      continue;
    }

    // Error: collect the admissible terminals of the current state.
    std::vector<std::string> expected;
    const auto& row = actions_[static_cast<size_t>(state)];
    for (auto& [name, id] : terminal_ids_) {
      if (row[static_cast<size_t>(id)] != 0) expected.push_back(name);
    }
    if (row[static_cast<size_t>(eof_tid_)] != 0) expected.push_back("$END");
    std::sort(expected.begin(), expected.end());
    std::string lexeme;
    std::string terminal = "$END";
    SourcePos pos = run.eof;
    if (ti < ntok) {
      lexeme = run.tokens[ti].lexeme;
      terminal = run.tokens[ti].terminal;
      pos = {run.tokens[ti].line, run.tokens[ti].col};
    }
    return EngineError::unexpected_token(std::move(lexeme), std::move(terminal), pos,
                                         std::move(expected));
  }

  // Accept: the node stack holds exactly the start symbol's tree.
  if (node_stack.size() == 1 && std::holds_alternative<ParseTree>(node_stack[0]))
    return std::move(std::get<ParseTree>(node_stack[0]));
  ParseTree root;
  root.label = "start";
  for (auto& n : node_stack) {
    if (std::holds_alternative<ParseTree>(n))
      root.children.emplace_back(std::move(std::get<ParseTree>(n)));
    else
      root.children.emplace_back(std::move(std::get<Token>(n)));
  }
  return root;
}

}  // namespace graminfer::engine
