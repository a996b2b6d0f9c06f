#include <cctype>

#include "engine/ast.hpp"
#include "engine/regex.hpp"
#include "util.hpp"

namespace graminfer::engine {

namespace {

bool is_rule_name(std::string_view s) {
  if (s.empty() || !(std::islower(static_cast<unsigned char>(s[0])) || s[0] == '_')) return false;
  for (char c : s)
    if (!(std::islower(static_cast<unsigned char>(c)) ||
          std::isdigit(static_cast<unsigned char>(c)) || c == '_'))
      return false;
  return true;
}

bool is_terminal_name(std::string_view s) {
  if (s.empty() || !(std::isupper(static_cast<unsigned char>(s[0])) || s[0] == '_')) return false;
  for (char c : s)
    if (!(std::isupper(static_cast<unsigned char>(c)) ||
          std::isdigit(static_cast<unsigned char>(c)) || c == '_'))
      return false;
  return true;
}

struct NotationToken {
  enum class Kind {
    Name,
    Colon,
    Pipe,
    Arrow,
    LParen,
    RParen,
    Question,
    Star,
    Plus,
    String,
    Regex,
    Percent,
    Dot,
    End,
  };
  Kind kind;
  std::string text;
  SourcePos pos;
  bool line_start = false;  // first token on its physical line
};

using TK = NotationToken::Kind;

class NotationLexer {
 public:
  explicit NotationLexer(std::string_view text) : cps_(utf8_decode(text)) {}

  Result<std::vector<NotationToken>, EngineError> run() {
    std::vector<NotationToken> out;
    bool line_fresh = true;
    while (i_ < cps_.size()) {
      char32_t c = cps_[i_];
      if (c == U'\n') {
        advance();
        line_fresh = true;
        continue;
      }
      if (c == U' ' || c == U'\t' || c == U'\r') {
        advance();
        continue;
      }
      if (c == U'/' && i_ + 1 < cps_.size() && cps_[i_ + 1] == U'/') {
        while (i_ < cps_.size() && cps_[i_] != U'\n') advance();
        continue;
      }
      NotationToken tok;
      tok.pos = here();
      tok.line_start = line_fresh;
      line_fresh = false;
      if (auto err = lex_one(tok)) return *err;
      out.push_back(std::move(tok));
    }
    NotationToken end;
    end.kind = TK::End;
    end.pos = here();
    end.line_start = true;
    out.push_back(end);
    return out;
  }

 private:
  std::u32string cps_;
  size_t i_ = 0;
  int line_ = 1;
  int col_ = 1;

  SourcePos here() const { return {line_, col_}; }
  void advance() {
    if (cps_[i_] == U'\n') {
      ++line_;
      col_ = 1;
    } else {
      ++col_;
    }
    ++i_;
  }

  std::optional<EngineError> lex_one(NotationToken& tok) {
    char32_t c = cps_[i_];
    switch (c) {
      case U':': tok.kind = TK::Colon; advance(); return {};
      case U'|': tok.kind = TK::Pipe; advance(); return {};
      case U'(': tok.kind = TK::LParen; advance(); return {};
      case U')': tok.kind = TK::RParen; advance(); return {};
      case U'?': tok.kind = TK::Question; advance(); return {};
      case U'*': tok.kind = TK::Star; advance(); return {};
      case U'+': tok.kind = TK::Plus; advance(); return {};
      case U'%': tok.kind = TK::Percent; advance(); return {};
      case U'.': tok.kind = TK::Dot; advance(); return {};
      case U'-':
        if (i_ + 1 < cps_.size() && cps_[i_ + 1] == U'>') {
          tok.kind = TK::Arrow;
          advance();
          advance();
          return {};
        }
        return EngineError::notation_syntax("unexpected character '-'", tok.pos);
      case U'"': return lex_string(tok);
      case U'/': return lex_regex(tok);
      default:
        if (c == U'_' || (c < 128 && std::isalpha(static_cast<int>(c)))) return lex_name(tok);
        return EngineError::notation_syntax("unexpected character '" + utf8_encode_one(c) + "'",
                                            tok.pos);
    }
  }

  std::optional<EngineError> lex_name(NotationToken& tok) {
    std::u32string name;
    while (i_ < cps_.size()) {
      char32_t c = cps_[i_];
      if (c == U'_' || (c < 128 && std::isalnum(static_cast<int>(c)))) {
        name.push_back(c);
        advance();
      } else {
        break;
      }
    }
    tok.kind = TK::Name;
    tok.text = utf8_encode(name);
    return {};
  }

  std::optional<EngineError> lex_string(NotationToken& tok) {
    SourcePos start = here();
    advance();  // opening quote
    std::u32string value;
    while (true) {
      if (i_ >= cps_.size() || cps_[i_] == U'\n')
        return EngineError::notation_syntax("unterminated string literal", start);
      char32_t c = cps_[i_];
      if (c == U'"') {
        advance();
        break;
      }
      if (c == U'\\') {
        advance();
        if (i_ >= cps_.size() || cps_[i_] == U'\n')
          return EngineError::notation_syntax("unterminated string literal", start);
        char32_t e = cps_[i_];
        switch (e) {
          case U'\\': value.push_back(U'\\'); break;
          case U'"': value.push_back(U'"'); break;
          case U'\'': value.push_back(U'\''); break;
          case U'n': value.push_back(U'\n'); break;
          case U't': value.push_back(U'\t'); break;
          case U'r': value.push_back(U'\r'); break;
          case U'f': value.push_back(U'\f'); break;
          case U'v': value.push_back(U'\v'); break;
          case U'0': value.push_back(U'\0'); break;
          default:
            return EngineError::notation_syntax(
                "unknown string escape '\\" + utf8_encode_one(e) + "'", here());
        }
        advance();
      } else {
        value.push_back(c);
        advance();
      }
    }
    tok.kind = TK::String;
    tok.text = utf8_encode(value);
    return {};
  }

  std::optional<EngineError> lex_regex(NotationToken& tok) {
    SourcePos start = here();
    advance();  // opening slash
    std::u32string pattern;
    while (true) {
      if (i_ >= cps_.size() || cps_[i_] == U'\n')
        return EngineError::notation_syntax("unterminated regex literal", start);
      char32_t c = cps_[i_];
      if (c == U'/') {
        advance();
        break;
      }
      if (c == U'\\') {
        advance();
        if (i_ >= cps_.size() || cps_[i_] == U'\n')
          return EngineError::notation_syntax("unterminated regex literal", start);
        char32_t e = cps_[i_];
        if (e == U'/') {
          pattern.push_back(U'/');
        } else {
          pattern.push_back(U'\\');
          pattern.push_back(e);
        }
        advance();
      } else {
        pattern.push_back(c);
        advance();
      }
    }
    if (i_ < cps_.size() && cps_[i_] < 128 && std::isalpha(static_cast<int>(cps_[i_])))
      return EngineError::notation_syntax("regex flags are not supported", here());
    tok.kind = TK::Regex;
    tok.text = utf8_encode(pattern);
    return {};
  }
};

class NotationParser {
 public:
  explicit NotationParser(std::vector<NotationToken> toks) : toks_(std::move(toks)) {}

  Result<GrammarAst, EngineError> run() {
    while (cur().kind != TK::End) {
      std::optional<EngineError> err;
      if (cur().kind == TK::Percent)
        err = parse_directive();
      else
        err = parse_definition();
      if (err) return *err;
    }
    return std::move(ast_);
  }

 private:
  std::vector<NotationToken> toks_;
  size_t i_ = 0;
  GrammarAst ast_;

  const NotationToken& cur() const { return toks_[i_]; }
  const NotationToken& next() const { return toks_[std::min(i_ + 1, toks_.size() - 1)]; }
  const NotationToken& take() { return toks_[i_++]; }

  // True when the current token opens a new definition or directive line;
  // rule bodies stop here regardless of group nesting.
  bool at_boundary() const {
    const NotationToken& t = cur();
    if (t.kind == TK::End) return true;
    if (!t.line_start) return false;
    if (t.kind == TK::Percent) return true;
    return t.kind == TK::Name && next().kind == TK::Colon && next().pos.line == t.pos.line;
  }

  std::optional<EngineError> parse_directive() {
    take();  // '%'
    if (cur().kind != TK::Name)
      return EngineError::notation_syntax("expected directive name after '%'", cur().pos);
    NotationToken name = take();
    if (name.text == "import") {
      if (cur().kind != TK::Name || cur().text != "common")
        return EngineError::notation_syntax("only '%import common.<NAME>' is supported",
                                            cur().pos);
      take();
      if (cur().kind != TK::Dot)
        return EngineError::notation_syntax("expected '.' in %import", cur().pos);
      take();
      if (cur().kind != TK::Name)
        return EngineError::notation_syntax("expected a name after '%import common.'", cur().pos);
      ast_.imports.push_back(take().text);
      return {};
    }
    if (name.text == "ignore") {
      IgnoreEntry entry;
      entry.pos = cur().pos;
      if (cur().kind == TK::Name && is_terminal_name(cur().text)) {
        entry.is_literal = false;
        entry.value = take().text;
      } else if (cur().kind == TK::String) {
        entry.is_literal = true;
        entry.value = take().text;
      } else {
        return EngineError::notation_syntax("expected a terminal name or literal after '%ignore'",
                                            cur().pos);
      }
      ast_.ignores.push_back(std::move(entry));
      return {};
    }
    return EngineError::notation_syntax("unknown directive '%" + name.text + "'", name.pos);
  }

  std::optional<EngineError> parse_definition() {
    if (cur().kind != TK::Name)
      return EngineError::notation_syntax("expected a rule or terminal definition", cur().pos);
    NotationToken name = take();
    if (cur().kind != TK::Colon)
      return EngineError::notation_syntax("expected ':' after '" + name.text + "'", cur().pos);
    take();

    bool rule = is_rule_name(name.text);
    bool terminal = !rule && is_terminal_name(name.text);
    if (!rule && !terminal)
      return EngineError::notation_syntax(
          "invalid name '" + name.text + "' (rules are lower_case, terminals UPPER_CASE)",
          name.pos);
    if (ast_.find_rule(name.text) || ast_.find_terminal(name.text))
      return EngineError::notation_syntax("'" + name.text + "' is defined twice", name.pos);

    Alternation body;
    if (auto err = parse_alternation(body, /*in_group=*/false)) return *err;
    if (rule) {
      ast_.rules.emplace_back(name.text, std::move(body));
      return {};
    }
    TerminalBody tb;
    tb.pos = name.pos;
    if (auto err = to_terminal_body(body, tb)) return *err;
    ast_.terminals.emplace_back(name.text, std::move(tb));
    return {};
  }

  std::optional<EngineError> parse_alternation(Alternation& out, bool in_group) {
    while (true) {
      Alternative alt;
      SourcePos alt_pos = cur().pos;
      while (!at_boundary() && cur().kind != TK::Pipe && cur().kind != TK::Arrow &&
             !(in_group && cur().kind == TK::RParen)) {
        Item item;
        if (auto err = parse_item(item)) return *err;
        alt.items.push_back(std::move(item));
      }
      if (cur().kind == TK::Arrow && !at_boundary()) {
        take();
        if (cur().kind != TK::Name)
          return EngineError::notation_syntax("expected alias name after '->'", cur().pos);
        alt.alias = take().text;
      }
      if (alt.items.empty())
        return EngineError::notation_syntax("empty alternative", alt_pos);
      out.alternatives.push_back(std::move(alt));
      if (cur().kind == TK::Pipe && !at_boundary()) {
        take();
        continue;
      }
      break;
    }
    return {};
  }

  std::optional<EngineError> parse_item(Item& out) {
    if (auto err = parse_atom(out.atom)) return *err;
    if (!at_boundary()) {
      switch (cur().kind) {
        case TK::Question: out.quant = Quant::Opt; take(); break;
        case TK::Star: out.quant = Quant::Star; take(); break;
        case TK::Plus: out.quant = Quant::Plus; take(); break;
        default: break;
      }
    }
    if (!at_boundary() &&
        (cur().kind == TK::Question || cur().kind == TK::Star || cur().kind == TK::Plus))
      return EngineError::notation_syntax("duplicate quantifier", cur().pos);
    return {};
  }

  std::optional<EngineError> parse_atom(Atom& out) {
    const NotationToken& t = cur();
    out.pos = t.pos;
    switch (t.kind) {
      case TK::Name: {
        if (is_rule_name(t.text))
          out.kind = Atom::Kind::RuleRef;
        else if (is_terminal_name(t.text))
          out.kind = Atom::Kind::TerminalRef;
        else
          return EngineError::notation_syntax("invalid symbol name '" + t.text + "'", t.pos);
        out.text = take().text;
        return {};
      }
      case TK::String:
        out.kind = Atom::Kind::Literal;
        out.text = take().text;
        return {};
      case TK::Regex: {
        out.kind = Atom::Kind::Regex;
        out.text = take().text;
        auto compiled = Regex::compile(out.text);
        if (!compiled.ok())
          return EngineError::notation_syntax("bad regex: " + compiled.error(), out.pos);
        return {};
      }
      case TK::LParen: {
        SourcePos open = take().pos;
        out.kind = Atom::Kind::Group;
        out.group = std::make_shared<Alternation>();
        if (auto err = parse_alternation(*out.group, /*in_group=*/true)) return *err;
        if (cur().kind != TK::RParen)
          return EngineError::notation_syntax("unclosed '('", open);
        take();
        return {};
      }
      case TK::RParen:
        return EngineError::notation_syntax("unmatched ')'", t.pos);
      default:
        return EngineError::notation_syntax("unexpected token in rule body", t.pos);
    }
  }

  std::optional<EngineError> to_terminal_body(const Alternation& body, TerminalBody& out) {
    // Single regex alternative.
    if (body.alternatives.size() == 1 && body.alternatives[0].items.size() == 1 &&
        body.alternatives[0].items[0].atom.kind == Atom::Kind::Regex &&
        body.alternatives[0].items[0].quant == Quant::One && !body.alternatives[0].alias) {
      out.kind = TerminalBody::Kind::Regex;
      out.regex_pattern = body.alternatives[0].items[0].atom.text;
      return {};
    }
    // Otherwise: an alternation of plain literals.
    out.kind = TerminalBody::Kind::Literals;
    for (const Alternative& alt : body.alternatives) {
      if (alt.alias)
        return EngineError::notation_syntax("aliases are not allowed in terminal definitions",
                                            alt.items.empty() ? out.pos : alt.items[0].atom.pos);
      if (alt.items.size() != 1 || alt.items[0].quant != Quant::One)
        return EngineError::notation_syntax(
            "terminal bodies must be one regex, one literal, or literals separated by '|'",
            alt.items.empty() ? out.pos : alt.items[0].atom.pos);
      const Atom& atom = alt.items[0].atom;
      if (atom.kind != Atom::Kind::Literal)
        return EngineError::notation_syntax(
            "terminals cannot be composed from other symbols or regex alternations", atom.pos);
      out.literals.push_back(atom.text);
    }
    return {};
  }
};

}  // namespace

Result<GrammarAst, EngineError> parse_notation(std::string_view text) {
  NotationLexer lexer(text);
  auto toks = lexer.run();
  if (!toks.ok()) return toks.error();
  NotationParser parser(std::move(toks).take());
  return parser.run();
}

}  // namespace graminfer::engine
