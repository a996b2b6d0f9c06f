#include "engine/regex.hpp"

#include <algorithm>

namespace graminfer::engine {

namespace {

constexpr char32_t kMaxCp = 0x10FFFF;

using Ranges = std::vector<std::pair<char32_t, char32_t>>;

Ranges normalize(Ranges r) {
  std::sort(r.begin(), r.end());
  Ranges out;
  for (auto& p : r) {
    if (!out.empty() && p.first <= out.back().second + 1 && out.back().second >= p.first - 1) {
      out.back().second = std::max(out.back().second, p.second);
    } else {
      out.push_back(p);
    }
  }
  return out;
}

Ranges complement(const Ranges& sorted) {
  Ranges out;
  char32_t next = 0;
  for (auto& p : sorted) {
    if (p.first > next) out.push_back({next, p.first - 1});
    next = p.second + 1;
    if (next == 0) return out;  // wrapped past kMaxCp
  }
  if (next <= kMaxCp) out.push_back({next, kMaxCp});
  return out;
}

Ranges digit_ranges() { return {{U'0', U'9'}}; }
Ranges word_ranges() { return {{U'0', U'9'}, {U'A', U'Z'}, {U'_', U'_'}, {U'a', U'z'}}; }
Ranges space_ranges() {
  return {{U'\t', U'\t'}, {U'\n', U'\n'}, {U'\v', U'\v'}, {U'\f', U'\f'},
          {U'\r', U'\r'}, {U' ', U' '}};
}

}  // namespace

bool Regex::CharClass::contains(char32_t c) const {
  bool in = false;
  for (auto& r : ranges) {
    if (c >= r.first && c <= r.second) {
      in = true;
      break;
    }
  }
  return in != negated;
}

// Recursive-descent pattern parser building the Thompson NFA directly.
class RegexParser {
 public:
  RegexParser(Regex& re, std::u32string cps) : re_(re), cps_(std::move(cps)) {}

  // Returns an error string, or empty on success.
  std::string run() {
    auto frag = parse_alt();
    if (!err_.empty()) return err_;
    if (pos_ != cps_.size()) {
      if (peek() == U')') return "unmatched ')'";
      return "unexpected character in pattern";
    }
    re_.start_ = frag.first;
    re_.accept_ = frag.second;
    return "";
  }

 private:
  using Frag = std::pair<int, int>;  // start state, accept state

  Regex& re_;
  std::u32string cps_;
  size_t pos_ = 0;
  std::string err_;

  bool at_end() const { return pos_ >= cps_.size(); }
  char32_t peek(size_t d = 0) const { return pos_ + d < cps_.size() ? cps_[pos_ + d] : 0; }
  char32_t take() { return cps_[pos_++]; }

  int new_state() {
    re_.states_.emplace_back();
    return static_cast<int>(re_.states_.size()) - 1;
  }
  void eps(int from, int to) { re_.states_[from].edges.push_back({-1, to}); }
  int add_class(Regex::CharClass cc) {
    cc.ranges = normalize(std::move(cc.ranges));
    re_.classes_.push_back(std::move(cc));
    return static_cast<int>(re_.classes_.size()) - 1;
  }
  Frag class_frag(Regex::CharClass cc) {
    int s = new_state(), a = new_state();
    re_.states_[s].edges.push_back({add_class(std::move(cc)), a});
    return {s, a};
  }
  Frag empty_frag() {
    int s = new_state(), a = new_state();
    eps(s, a);
    return {s, a};
  }

  void fail(std::string msg) {
    if (err_.empty()) err_ = std::move(msg);
  }

  Frag parse_alt() {
    Frag left = parse_concat();
    while (!at_end() && peek() == U'|' && err_.empty()) {
      take();
      Frag right = parse_concat();
      int s = new_state(), a = new_state();
      eps(s, left.first);
      eps(s, right.first);
      eps(left.second, a);
      eps(right.second, a);
      left = {s, a};
    }
    return left;
  }

  Frag parse_concat() {
    Frag acc = empty_frag();
    bool first = true;
    while (!at_end() && peek() != U'|' && peek() != U')' && err_.empty()) {
      Frag piece = parse_piece();
      if (!err_.empty()) break;
      if (first) {
        acc = piece;
        first = false;
      } else {
        eps(acc.second, piece.first);
        acc = {acc.first, piece.second};
      }
    }
    return acc;
  }

  Frag parse_piece() {
    Frag atom = parse_atom();
    while (!at_end() && err_.empty()) {
      char32_t q = peek();
      if (q != U'*' && q != U'+' && q != U'?') break;
      take();
      int s = new_state(), a = new_state();
      eps(s, atom.first);
      eps(atom.second, a);
      if (q == U'*' || q == U'?') eps(s, a);
      if (q == U'*' || q == U'+') eps(atom.second, atom.first);
      atom = {s, a};
    }
    return atom;
  }

  Frag parse_atom() {
    if (at_end()) return empty_frag();
    char32_t c = take();
    switch (c) {
      case U'(': {
        if (!at_end() && peek() == U'?') {
          take();
          char32_t k = at_end() ? 0 : peek();
          if (k == U':') {
            take();
          } else if (k == U'=' || k == U'!' || k == U'<') {
            fail("lookaround is not supported");
            return empty_frag();
          } else {
            fail("unsupported '(?' group");
            return empty_frag();
          }
        }
        Frag inner = parse_alt();
        if (at_end() || peek() != U')') {
          fail("missing ')'");
          return inner;
        }
        take();
        return inner;
      }
      case U'[':
        return parse_class();
      case U'.': {
        Regex::CharClass cc;
        cc.ranges = {{U'\n', U'\n'}, {U'\r', U'\r'}};
        cc.negated = true;
        return class_frag(std::move(cc));
      }
      case U'\\':
        return parse_escape();
      case U'*':
      case U'+':
      case U'?':
        fail("quantifier with nothing to repeat");
        return empty_frag();
      case U'^':
      case U'$':
        fail("anchors are not supported");
        return empty_frag();
      default: {
        Regex::CharClass cc;
        cc.ranges = {{c, c}};
        return class_frag(std::move(cc));
      }
    }
  }

  // Escape outside a character class, as an NFA fragment.
  Frag parse_escape() {
    Ranges r;
    char32_t lit = 0;
    if (!escape_common(r, lit)) return empty_frag();
    Regex::CharClass cc;
    if (!r.empty())
      cc.ranges = std::move(r);
    else
      cc.ranges = {{lit, lit}};
    return class_frag(std::move(cc));
  }

  // Shared escape handling. On success either fills `ranges` (class
  // shorthands like \d, already complemented for \D etc.) or sets `lit`
  // to a single code point.
  bool escape_common(Ranges& ranges, char32_t& lit) {
    if (at_end()) {
      fail("dangling '\\'");
      return false;
    }
    char32_t c = take();
    switch (c) {
      case U'n': lit = U'\n'; return true;
      case U't': lit = U'\t'; return true;
      case U'r': lit = U'\r'; return true;
      case U'f': lit = U'\f'; return true;
      case U'v': lit = U'\v'; return true;
      case U'0': lit = U'\0'; return true;
      case U'd': ranges = digit_ranges(); return true;
      case U'D': ranges = complement(normalize(digit_ranges())); return true;
      case U'w': ranges = word_ranges(); return true;
      case U'W': ranges = complement(normalize(word_ranges())); return true;
      case U's': ranges = space_ranges(); return true;
      case U'S': ranges = complement(normalize(space_ranges())); return true;
      case U'x':
      case U'u': {
        size_t want = c == U'x' ? 2 : 4;
        char32_t v = 0;
        for (size_t i = 0; i < want; ++i) {
          char32_t h = at_end() ? 0 : take();
          int d;
          if (h >= U'0' && h <= U'9')
            d = static_cast<int>(h - U'0');
          else if (h >= U'a' && h <= U'f')
            d = static_cast<int>(h - U'a') + 10;
          else if (h >= U'A' && h <= U'F')
            d = static_cast<int>(h - U'A') + 10;
          else {
            fail("bad hex escape");
            return false;
          }
          v = v * 16 + static_cast<char32_t>(d);
        }
        lit = v;
        return true;
      }
      case U'b':
      case U'B':
        fail("word-boundary assertions are not supported");
        return false;
      default:
        if (c >= U'1' && c <= U'9') {
          fail("backreferences are not supported");
          return false;
        }
        if ((c >= U'a' && c <= U'z') || (c >= U'A' && c <= U'Z')) {
          fail("unknown escape '\\" + utf8_encode_one(c) + "'");
          return false;
        }
        lit = c;  // escaped punctuation stands for itself
        return true;
    }
  }

  Frag parse_class() {
    Regex::CharClass cc;
    if (!at_end() && peek() == U'^') {
      take();
      cc.negated = true;
    }
    while (true) {
      if (at_end()) {
        fail("missing ']'");
        return empty_frag();
      }
      if (peek() == U']') {
        take();
        break;
      }
      char32_t lo;
      Ranges sub;
      if (peek() == U'\\') {
        take();
        char32_t lit = 0;
        if (!escape_common(sub, lit)) return empty_frag();
        if (!sub.empty()) {
          // Class shorthand inside a class: union its ranges in.
          for (auto& p : sub) cc.ranges.push_back(p);
          continue;
        }
        lo = lit;
      } else {
        lo = take();
      }
      if (!at_end() && peek() == U'-' && peek(1) != U']' && pos_ + 1 < cps_.size()) {
        take();
        char32_t hi;
        if (peek() == U'\\') {
          take();
          Ranges s2;
          char32_t lit2 = 0;
          if (!escape_common(s2, lit2)) return empty_frag();
          if (!s2.empty()) {
            fail("class shorthand cannot bound a range");
            return empty_frag();
          }
          hi = lit2;
        } else {
          hi = take();
        }
        if (hi < lo) {
          fail("invalid character range");
          return empty_frag();
        }
        cc.ranges.push_back({lo, hi});
      } else {
        cc.ranges.push_back({lo, lo});
      }
    }
    return class_frag(std::move(cc));
  }
};

Result<Regex, std::string> Regex::compile(std::string_view pattern) {
  Regex re;
  re.pattern_ = std::string(pattern);
  RegexParser parser(re, utf8_decode(pattern));
  std::string err = parser.run();
  if (!err.empty()) return err;
  return re;
}

void Regex::add_closure(int state, std::vector<bool>& set) const {
  if (set[static_cast<size_t>(state)]) return;
  set[static_cast<size_t>(state)] = true;
  for (auto& [cls, to] : states_[static_cast<size_t>(state)].edges) {
    if (cls < 0) add_closure(to, set);
  }
}

std::optional<size_t> Regex::match_prefix(std::u32string_view input) const {
  std::vector<bool> cur(states_.size(), false);
  add_closure(start_, cur);
  std::optional<size_t> best;
  if (cur[static_cast<size_t>(accept_)]) best = 0;
  for (size_t i = 0; i < input.size(); ++i) {
    std::vector<bool> next(states_.size(), false);
    bool any = false;
    for (size_t s = 0; s < states_.size(); ++s) {
      if (!cur[s]) continue;
      for (auto& [cls, to] : states_[s].edges) {
        if (cls >= 0 && classes_[static_cast<size_t>(cls)].contains(input[i])) {
          add_closure(to, next);
          any = true;
        }
      }
    }
    if (!any) break;
    cur = std::move(next);
    if (cur[static_cast<size_t>(accept_)]) best = i + 1;
  }
  return best;
}

bool Regex::matches_empty() const {
  std::vector<bool> cur(states_.size(), false);
  add_closure(start_, cur);
  return cur[static_cast<size_t>(accept_)];
}

}  // namespace graminfer::engine
