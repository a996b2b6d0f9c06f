#include "engine/compile.hpp"

#include <algorithm>
#include <cctype>
#include <set>
#include <sstream>

namespace graminfer::engine {

std::string Production::to_string() const {
  std::string out = lhs + " ->";
  if (rhs.empty()) return out + " <empty>";
  for (auto& s : rhs) out += " " + s;
  return out;
}

const std::vector<std::pair<std::string, std::string>>& builtin_terminals() {
  static const std::vector<std::pair<std::string, std::string>> table = {
      {"DIGIT", R"([0-9])"},
      {"LETTER", R"([a-zA-Z])"},
      {"INT", R"([0-9]+)"},
      {"FLOAT", R"([0-9]+\.[0-9]+([eE][+-]?[0-9]+)?)"},
      {"NUMBER", R"(([0-9]+\.[0-9]+([eE][+-]?[0-9]+)?)|([0-9]+))"},
      {"SIGNED_NUMBER", R"([+-]?(([0-9]+\.[0-9]+([eE][+-]?[0-9]+)?)|([0-9]+)))"},
      {"CNAME", R"([a-zA-Z_][a-zA-Z0-9_]*)"},
      {"ESCAPED_STRING", R"("(\\.|[^"\\])*")"},
      {"WS", "[ \\t\\r\\n]+"},
      {"NEWLINE", R"((\r?\n)+)"},
  };
  return table;
}

Result<GrammarAst, EngineError> resolve_imports(GrammarAst ast) {
  for (const std::string& name : ast.imports) {
    const auto& table = builtin_terminals();
    auto it = std::find_if(table.begin(), table.end(),
                           [&](const auto& e) { return e.first == name; });
    if (it == table.end()) return EngineError::unknown_import(name);
    if (ast.find_terminal(name)) continue;  // user definition shadows the builtin
    TerminalBody body;
    body.kind = TerminalBody::Kind::Regex;
    body.regex_pattern = it->second;
    ast.terminals.emplace_back(name, std::move(body));
  }
  return ast;
}

namespace {

// Pre-order walk over every symbol reference, in source order.
std::optional<EngineError> check_alternation(const GrammarAst& ast, const Alternation& alt) {
  for (const Alternative& a : alt.alternatives) {
    for (const Item& item : a.items) {
      const Atom& atom = item.atom;
      switch (atom.kind) {
        case Atom::Kind::RuleRef:
          if (!ast.find_rule(atom.text)) return EngineError::undefined_symbol(atom.text);
          break;
        case Atom::Kind::TerminalRef:
          if (!ast.find_terminal(atom.text)) return EngineError::undefined_symbol(atom.text);
          break;
        case Atom::Kind::Group:
          if (auto err = check_alternation(ast, *atom.group)) return err;
          break;
        default:
          break;
      }
    }
  }
  return {};
}

}  // namespace

std::optional<EngineError> validate_references(const GrammarAst& ast) {
  for (auto& [name, body] : ast.rules) {
    if (auto err = check_alternation(ast, body)) return err;
  }
  for (const IgnoreEntry& ig : ast.ignores) {
    if (!ig.is_literal && !ast.find_terminal(ig.value))
      return EngineError::undefined_symbol(ig.value);
  }
  if (!ast.find_rule("start")) return EngineError::missing_start_rule();
  return {};
}

// --- Lowering ----------------------------------------------------------------

namespace {

const char* punct_name(char32_t c) {
  switch (c) {
    case U'!': return "BANG";
    case U'"': return "DQUOTE";
    case U'#': return "HASH";
    case U'$': return "DOLLAR";
    case U'%': return "PERCENT";
    case U'&': return "AMPERSAND";
    case U'\'': return "QUOTE";
    case U'(': return "LPAR";
    case U')': return "RPAR";
    case U'*': return "STAR";
    case U'+': return "PLUS";
    case U',': return "COMMA";
    case U'-': return "MINUS";
    case U'.': return "DOT";
    case U'/': return "SLASH";
    case U':': return "COLON";
    case U';': return "SEMICOLON";
    case U'<': return "LESSTHAN";
    case U'=': return "EQUAL";
    case U'>': return "MORETHAN";
    case U'?': return "QMARK";
    case U'@': return "AT";
    case U'[': return "LSQB";
    case U'\\': return "BACKSLASH";
    case U']': return "RSQB";
    case U'^': return "CIRCUMFLEX";
    case U'_': return "UNDERSCORE";
    case U'`': return "BACKQUOTE";
    case U'{': return "LBRACE";
    case U'|': return "VBAR";
    case U'}': return "RBRACE";
    case U'~': return "TILDE";
    default: return nullptr;
  }
}

class Lowerer {
 public:
  explicit Lowerer(const GrammarAst& ast) : ast_(ast) {}

  Result<LoweredGrammar, EngineError> run() {
    for (auto& [name, body] : ast_.terminals) {
      if (auto err = add_user_terminal(name, body)) return *err;
    }
    for (auto& [name, body] : ast_.rules) {
      taken_.insert(name);
      lower_rule(name, body, /*synthetic=*/false);
    }
    for (const IgnoreEntry& ig : ast_.ignores) {
      std::string name = ig.is_literal ? keyword_terminal(ig.value) : ig.value;
      if (std::find(out_.ignored.begin(), out_.ignored.end(), name) == out_.ignored.end())
        out_.ignored.push_back(name);
    }
    return std::move(out_);
  }

 private:
  const GrammarAst& ast_;
  LoweredGrammar out_;
  int counter_ = 0;
  std::map<std::string, std::string> literal_names_;  // literal text -> terminal
  std::map<std::string, std::string> regex_names_;    // pattern -> terminal
  std::set<std::string> taken_;

  std::optional<EngineError> add_user_terminal(const std::string& name,
                                               const TerminalBody& body) {
    taken_.insert(name);
    LexTerminal lt;
    lt.name = name;
    if (body.kind == TerminalBody::Kind::Regex) {
      auto re = Regex::compile(body.regex_pattern);
      if (!re.ok())
        return EngineError::notation_syntax("bad regex: " + re.error(), body.pos);
      lt.regex = std::move(re).take();
      regex_names_.emplace(body.regex_pattern, name);
    } else {
      lt.literal_kind = true;
      for (const std::string& s : body.literals) lt.literals.push_back(utf8_decode(s));
      if (body.literals.size() == 1) literal_names_.emplace(body.literals[0], name);
    }
    out_.terminals.push_back(std::move(lt));
    return {};
  }

  std::string fresh_name(const char* kind) {
    std::string name;
    do {
      name = "__" + std::string(kind) + "_" + std::to_string(counter_++);
    } while (taken_.count(name));
    taken_.insert(name);
    return name;
  }

  std::string keyword_terminal(const std::string& text) {
    auto it = literal_names_.find(text);
    if (it != literal_names_.end()) return it->second;
    std::string base;
    bool word = !text.empty() && (std::isalpha(static_cast<unsigned char>(text[0])) ||
                                  text[0] == '_');
    if (word) {
      for (char c : text) {
        if (!(std::isalnum(static_cast<unsigned char>(c)) || c == '_')) {
          word = false;
          break;
        }
      }
    }
    if (word) {
      base = text;
      std::transform(base.begin(), base.end(), base.begin(),
                     [](unsigned char c) { return std::toupper(c); });
    } else {
      std::u32string cps = utf8_decode(text);
      if (cps.size() == 1 && punct_name(cps[0])) base = punct_name(cps[0]);
    }
    std::string name;
    if (base.empty()) {
      name = fresh_name("ANON");
    } else {
      name = "__" + base;
      while (taken_.count(name)) name = "__" + base + "_" + std::to_string(counter_++);
      taken_.insert(name);
    }
    LexTerminal lt;
    lt.name = name;
    lt.literal_kind = true;
    lt.literals.push_back(utf8_decode(text));
    lt.synthetic = true;
    out_.terminals.push_back(std::move(lt));
    literal_names_.emplace(text, name);
    return name;
  }

  std::string regex_atom_terminal(const std::string& pattern) {
    auto it = regex_names_.find(pattern);
    if (it != regex_names_.end()) return it->second;
    std::string name = fresh_name("ANON");
    LexTerminal lt;
    lt.name = name;
    auto re = Regex::compile(pattern);
    // Pattern was validated when the notation was parsed.
    lt.regex = std::move(re).take();
    lt.synthetic = true;
    out_.terminals.push_back(std::move(lt));
    regex_names_.emplace(pattern, name);
    return name;
  }

  void lower_rule(const std::string& lhs, const Alternation& body, bool synthetic) {
    for (const Alternative& alt : body.alternatives) {
      Production p;
      p.lhs = lhs;
      p.alias = alt.alias;
      p.synthetic_lhs = synthetic;
      for (const Item& item : alt.items) p.rhs.push_back(lower_item(item));
      out_.productions.push_back(std::move(p));
    }
  }

  std::string lower_item(const Item& item) {
    std::string sym = lower_atom(item.atom);
    switch (item.quant) {
      case Quant::One:
        return sym;
      case Quant::Opt: {
        std::string name = fresh_name("opt");
        out_.productions.push_back({name, {sym}, std::nullopt, true});
        out_.productions.push_back({name, {}, std::nullopt, true});
        return name;
      }
      case Quant::Star: {
        std::string name = fresh_name("star");
        out_.productions.push_back({name, {name, sym}, std::nullopt, true});
        out_.productions.push_back({name, {}, std::nullopt, true});
        return name;
      }
      case Quant::Plus: {
        std::string name = fresh_name("plus");
        out_.productions.push_back({name, {name, sym}, std::nullopt, true});
        out_.productions.push_back({name, {sym}, std::nullopt, true});
        return name;
      }
    }
    return sym;
  }

  std::string lower_atom(const Atom& atom) {
    switch (atom.kind) {
      case Atom::Kind::RuleRef:
      case Atom::Kind::TerminalRef:
        return atom.text;
      case Atom::Kind::Literal:
        return keyword_terminal(atom.text);
      case Atom::Kind::Regex:
        return regex_atom_terminal(atom.text);
      case Atom::Kind::Group: {
        std::string name = fresh_name("group");
        lower_rule(name, *atom.group, /*synthetic=*/true);
        return name;
      }
    }
    return atom.text;
  }
};

}  // namespace

Result<LoweredGrammar, EngineError> lower_to_bnf(const GrammarAst& ast) {
  return Lowerer(ast).run();
}

// --- LALR(1) table construction ----------------------------------------------

namespace {

// Canonical LR(1) states merged by core. Small grammars only, so the direct
// construction is fine.
struct Lr1Item {
  int prod;
  int dot;
  int la;  // terminal id
  auto operator<=>(const Lr1Item&) const = default;
};

}  // namespace

class TableBuilder {
 public:
  explicit TableBuilder(LoweredGrammar lowered) : g_(std::move(lowered)) {}

  Result<CompiledGrammar, EngineError> run() {
    if (auto err = check_terminals()) return *err;
    intern_symbols();
    compute_nullable_first();
    build_canonical();
    merge_cores();
    return emit_tables();
  }

 private:
  LoweredGrammar g_;
  CompiledGrammar out_;

  int num_terminals_ = 0;     // includes $END
  int eof_ = 0;
  std::vector<std::string> terminal_names_;
  std::vector<std::string> nonterminal_names_;
  std::map<std::string, int, std::less<>> nt_ids_;
  std::map<std::string, int, std::less<>> t_ids_;

  // productions with symbols interned: >=0 terminal id, <0 nonterminal ~id
  struct IProd {
    int lhs;
    std::vector<int> rhs;
  };
  std::vector<IProd> iprods_;
  std::vector<std::vector<int>> by_lhs_;
  int accept_prod_ = 0;

  std::vector<bool> nullable_;
  std::vector<std::set<int>> first_;

  using ItemSet = std::set<Lr1Item>;
  std::vector<ItemSet> states_;
  std::vector<std::map<int, int>> transitions_;  // symbol key -> state (key: t or ~nt)

  std::vector<int> merged_of_;                  // canonical -> merged id
  int num_merged_ = 0;
  std::vector<ItemSet> merged_items_;
  std::vector<std::map<int, int>> merged_trans_;

  static bool is_nt(int sym) { return sym < 0; }
  static int nt_of(int sym) { return ~sym; }

  std::optional<EngineError> check_terminals() {
    for (const LexTerminal& t : g_.terminals) {
      if (t.literal_kind) {
        for (auto& lit : t.literals)
          if (lit.empty()) return EngineError::empty_match_terminal(t.name);
      } else if (t.regex && t.regex->matches_empty()) {
        return EngineError::empty_match_terminal(t.name);
      }
    }
    return {};
  }

  void intern_symbols() {
    for (const LexTerminal& t : g_.terminals) {
      t_ids_.emplace(t.name, static_cast<int>(terminal_names_.size()));
      terminal_names_.push_back(t.name);
    }
    eof_ = static_cast<int>(terminal_names_.size());
    terminal_names_.push_back("$END");
    num_terminals_ = static_cast<int>(terminal_names_.size());

    for (const Production& p : g_.productions) {
      if (!nt_ids_.count(p.lhs)) {
        nt_ids_.emplace(p.lhs, static_cast<int>(nonterminal_names_.size()));
        nonterminal_names_.push_back(p.lhs);
      }
    }
    // Augmented accept production goes last.
    int accept_nt = static_cast<int>(nonterminal_names_.size());
    nt_ids_.emplace("$accept", accept_nt);
    nonterminal_names_.push_back("$accept");

    by_lhs_.assign(nonterminal_names_.size(), {});
    for (const Production& p : g_.productions) {
      IProd ip;
      ip.lhs = nt_ids_.at(p.lhs);
      for (const std::string& s : p.rhs) {
        auto t = t_ids_.find(s);
        if (t != t_ids_.end())
          ip.rhs.push_back(t->second);
        else
          ip.rhs.push_back(~nt_ids_.at(s));
      }
      by_lhs_[static_cast<size_t>(ip.lhs)].push_back(static_cast<int>(iprods_.size()));
      iprods_.push_back(std::move(ip));
    }
    accept_prod_ = static_cast<int>(iprods_.size());
    iprods_.push_back({accept_nt, {~nt_ids_.at("start")}});
    by_lhs_[static_cast<size_t>(accept_nt)].push_back(accept_prod_);
  }

  void compute_nullable_first() {
    size_t n = nonterminal_names_.size();
    nullable_.assign(n, false);
    first_.assign(n, {});
    bool changed = true;
    while (changed) {
      changed = false;
      for (const IProd& p : iprods_) {
        size_t lhs = static_cast<size_t>(p.lhs);
        bool all_nullable = true;
        for (int sym : p.rhs) {
          if (is_nt(sym)) {
            size_t nt = static_cast<size_t>(nt_of(sym));
            for (int t : first_[nt])
              if (first_[lhs].insert(t).second) changed = true;
            if (!nullable_[nt]) {
              all_nullable = false;
              break;
            }
          } else {
            if (first_[lhs].insert(sym).second) changed = true;
            all_nullable = false;
            break;
          }
        }
        if (all_nullable && !nullable_[lhs]) {
          nullable_[lhs] = true;
          changed = true;
        }
      }
    }
  }

  // FIRST of the suffix rhs[from..] followed by lookahead la.
  std::set<int> first_of_suffix(const IProd& p, size_t from, int la) const {
    std::set<int> out;
    for (size_t i = from; i < p.rhs.size(); ++i) {
      int sym = p.rhs[i];
      if (!is_nt(sym)) {
        out.insert(sym);
        return out;
      }
      size_t nt = static_cast<size_t>(nt_of(sym));
      out.insert(first_[nt].begin(), first_[nt].end());
      if (!nullable_[nt]) return out;
    }
    out.insert(la);
    return out;
  }

  void close(ItemSet& items) const {
    std::vector<Lr1Item> work(items.begin(), items.end());
    while (!work.empty()) {
      Lr1Item it = work.back();
      work.pop_back();
      const IProd& p = iprods_[static_cast<size_t>(it.prod)];
      if (it.dot >= static_cast<int>(p.rhs.size())) continue;
      int sym = p.rhs[static_cast<size_t>(it.dot)];
      if (!is_nt(sym)) continue;
      std::set<int> las = first_of_suffix(p, static_cast<size_t>(it.dot) + 1, it.la);
      for (int prod : by_lhs_[static_cast<size_t>(nt_of(sym))]) {
        for (int la : las) {
          Lr1Item ni{prod, 0, la};
          if (items.insert(ni).second) work.push_back(ni);
        }
      }
    }
  }

  void build_canonical() {
    ItemSet start;
    start.insert({accept_prod_, 0, eof_});
    close(start);
    std::map<ItemSet, int> ids;
    ids.emplace(start, 0);
    states_.push_back(std::move(start));
    transitions_.emplace_back();
    for (size_t si = 0; si < states_.size(); ++si) {
      // Deterministic symbol order: terminals ascending, then nonterminals.
      std::set<int> syms;
      for (const Lr1Item& it : states_[si]) {
        const IProd& p = iprods_[static_cast<size_t>(it.prod)];
        if (it.dot < static_cast<int>(p.rhs.size()))
          syms.insert(p.rhs[static_cast<size_t>(it.dot)]);
      }
      std::vector<int> ordered(syms.begin(), syms.end());
      std::stable_sort(ordered.begin(), ordered.end(), [](int a, int b) {
        bool na = is_nt(a), nb = is_nt(b);
        if (na != nb) return !na;
        return na ? nt_of(a) < nt_of(b) : a < b;
      });
      for (int sym : ordered) {
        ItemSet next;
        for (const Lr1Item& it : states_[si]) {
          const IProd& p = iprods_[static_cast<size_t>(it.prod)];
          if (it.dot < static_cast<int>(p.rhs.size()) &&
              p.rhs[static_cast<size_t>(it.dot)] == sym)
            next.insert({it.prod, it.dot + 1, it.la});
        }
        close(next);
        auto [pos, inserted] = ids.emplace(next, static_cast<int>(states_.size()));
        if (inserted) {
          states_.push_back(std::move(next));
          transitions_.emplace_back();
        }
        transitions_[si][sym] = pos->second;
      }
    }
  }

  void merge_cores() {
    std::map<std::vector<std::pair<int, int>>, int> core_ids;
    merged_of_.assign(states_.size(), 0);
    for (size_t si = 0; si < states_.size(); ++si) {
      std::vector<std::pair<int, int>> core;
      for (const Lr1Item& it : states_[si]) core.emplace_back(it.prod, it.dot);
      core.erase(std::unique(core.begin(), core.end()), core.end());
      auto [pos, inserted] = core_ids.emplace(std::move(core), num_merged_);
      if (inserted) ++num_merged_;
      merged_of_[si] = pos->second;
    }
    merged_items_.assign(static_cast<size_t>(num_merged_), {});
    merged_trans_.assign(static_cast<size_t>(num_merged_), {});
    for (size_t si = 0; si < states_.size(); ++si) {
      size_t m = static_cast<size_t>(merged_of_[si]);
      merged_items_[m].insert(states_[si].begin(), states_[si].end());
      for (auto& [sym, to] : transitions_[si]) merged_trans_[m][sym] = merged_of_[to];
    }
  }

  std::string render_prod(int prod) const {
    const IProd& ip = iprods_[static_cast<size_t>(prod)];
    std::string out = nonterminal_names_[static_cast<size_t>(ip.lhs)] + " ->";
    if (ip.rhs.empty()) return out + " <empty>";
    for (int sym : ip.rhs)
      out += " " + (is_nt(sym) ? nonterminal_names_[static_cast<size_t>(nt_of(sym))]
                               : terminal_names_[static_cast<size_t>(sym)]);
    return out;
  }

  Result<CompiledGrammar, EngineError> emit_tables() {
    size_t nstates = static_cast<size_t>(num_merged_);
    size_t nts = nonterminal_names_.size();
    out_.actions_.assign(nstates, std::vector<int>(static_cast<size_t>(num_terminals_), 0));
    out_.gotos_.assign(nstates, std::vector<int>(nts, 0));

    for (size_t m = 0; m < nstates; ++m) {
      // Reduce candidates per lookahead.
      std::map<int, std::vector<int>> reduces;
      for (const Lr1Item& it : merged_items_[m]) {
        const IProd& p = iprods_[static_cast<size_t>(it.prod)];
        if (it.dot == static_cast<int>(p.rhs.size())) reduces[it.la].push_back(it.prod);
      }
      for (auto& [la, prods] : reduces) {
        std::sort(prods.begin(), prods.end());
        prods.erase(std::unique(prods.begin(), prods.end()), prods.end());
      }

      for (int t = 0; t < num_terminals_; ++t) {
        auto sh = merged_trans_[m].find(t);
        bool has_shift = sh != merged_trans_[m].end();
        auto rd = reduces.find(t);
        const std::vector<int>* rprods = rd == reduces.end() ? nullptr : &rd->second;

        if (rprods && rprods->size() > 1) {
          std::ostringstream os;
          os << "in state " << m << " on " << terminal_names_[static_cast<size_t>(t)] << ": ";
          for (size_t i = 0; i < rprods->size(); ++i) {
            if (i) os << " vs ";
            os << render_prod((*rprods)[i]);
          }
          return EngineError::reduce_reduce(os.str());
        }
        if (has_shift && rprods) {
          std::ostringstream os;
          os << "shift/reduce conflict in state " << m << " on "
             << terminal_names_[static_cast<size_t>(t)] << ": resolved as shift over reduce ("
             << render_prod((*rprods)[0]) << ")";
          out_.warnings_.push_back(os.str());
        }
        if (has_shift) {
          out_.actions_[m][static_cast<size_t>(t)] = sh->second + 1;
        } else if (rprods) {
          int prod = (*rprods)[0];
          out_.actions_[m][static_cast<size_t>(t)] =
              prod == accept_prod_ ? CompiledGrammar::kAccept : -(prod + 1);
        }
      }
      for (auto& [sym, to] : merged_trans_[m]) {
        if (is_nt(sym)) out_.gotos_[m][static_cast<size_t>(nt_of(sym))] = to + 1;
      }
    }

    out_.terminal_ids_ = t_ids_;
    out_.eof_tid_ = eof_;
    out_.nonterminal_ids_ = nt_ids_;
    out_.ignored_tid_.assign(g_.terminals.size(), false);
    out_.drop_from_tree_.assign(g_.terminals.size(), false);
    for (const std::string& name : g_.ignored)
      out_.ignored_tid_[static_cast<size_t>(t_ids_.at(name))] = true;
    for (size_t i = 0; i < g_.terminals.size(); ++i)
      out_.drop_from_tree_[i] = g_.terminals[i].synthetic && g_.terminals[i].literal_kind;
    out_.lowered_ = std::move(g_);
    return std::move(out_);
  }
};

Result<CompiledGrammar, EngineError> build_tables(LoweredGrammar lowered) {
  return TableBuilder(std::move(lowered)).run();
}

Result<CompiledGrammar, EngineError> compile(std::string_view source) {
  auto ast = parse_notation(source);
  if (!ast.ok()) return ast.error();
  auto resolved = resolve_imports(std::move(ast).take());
  if (!resolved.ok()) return resolved.error();
  if (auto err = validate_references(resolved.value())) return *err;
  auto lowered = lower_to_bnf(resolved.value());
  if (!lowered.ok()) return lowered.error();
  return build_tables(std::move(lowered).take());
}

}  // namespace graminfer::engine
