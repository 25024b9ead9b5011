#pragma once

// Feature-augmented two-level rules.
//
// A rule relates a lexical:surface focus pair to left and right contexts
// (regular expressions over pairs) and carries a feature constraint that
// must unify with every morpheme its matched span overlaps:
//
//   rule e_grave_t e:è <=> _ $C +:0 e where [spelling_type=change_e_è, muet={y,fut_cond_e}]
//
// Operators: `=>` (the pair may only occur in context), `<=` (in context
// the lexical symbol must be realised as the focus surface) and `<=>`.
// Rules are applied interpretively: candidate alignments are enumerated
// from the feasible pairs and checked against every rule.

#include <algorithm>
#include <cstdint>
#include <functional>
#include <limits>
#include <map>
#include <memory>
#include <optional>
#include <set>
#include <span>
#include <sstream>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "lingware/featstruct.hpp"
#include "lingware/unicode.hpp"

namespace lingware::twolevel {

/// Lexical or surface symbol. Ordinary symbols are Unicode code points.
using Sym = char32_t;

inline constexpr Sym kNull = 0;                // `0` in rule files
inline constexpr Sym kWordBoundary = 0xE000;   // `##`
inline constexpr Sym kBoundary = U'+';

class RuleError : public std::runtime_error {
public:
  using std::runtime_error::runtime_error;
};

inline Sym parse_symbol(std::string_view tok) {
  if (tok == "0") return kNull;
  if (tok == "##") return kWordBoundary;
  if (tok == "sp") return U' ';
  auto cps = utf8::decode(utf8::nfc(tok));
  if (cps.size() != 1) throw RuleError("not a single symbol: '" + std::string(tok) + "'");
  return cps[0];
}

inline std::string symbol_name(Sym s) {
  if (s == kNull) return "0";
  if (s == kWordBoundary) return "##";
  if (s == U' ') return "sp";
  return utf8::encode(s);
}

struct SymbolPair {
  Sym lex = kNull;
  Sym surf = kNull;
  friend auto operator<=>(const SymbolPair&, const SymbolPair&) = default;
};

inline std::string pair_name(SymbolPair p) { return symbol_name(p.lex) + ":" + symbol_name(p.surf); }

/// Declared feasible pairs. Identity pairs x:x are feasible for every
/// symbol without declaration.
class Alphabet {
public:
  void add(SymbolPair p) {
    if (p.lex == kNull && p.surf == kNull) throw RuleError("pair 0:0 is not allowed");
    if (p.lex == kNull) throw RuleError("epenthesis pairs (0:x) are not supported: " + pair_name(p));
    pairs_.insert(p);
  }

  bool feasible(SymbolPair p) const { return p.lex == p.surf ? p.lex != kNull : pairs_.count(p) != 0; }

  /// Surface symbols available for a lexical symbol; identity first.
  std::vector<Sym> surfaces(Sym lex) const {
    std::vector<Sym> out;
    if (!identity_blocked_.count(lex)) out.push_back(lex);
    for (auto it = pairs_.lower_bound({lex, 0}); it != pairs_.end() && it->lex == lex; ++it)
      if (it->surf != lex) out.push_back(it->surf);
    return out;
  }

  /// Lexical symbols with no identity realisation (e.g. `+`, `##`).
  void block_identity(Sym lex) { identity_blocked_.insert(lex); }

  const std::set<SymbolPair>& declared() const { return pairs_; }

private:
  std::set<SymbolPair> pairs_;
  std::set<Sym> identity_blocked_;
};

// ---------------------------------------------------------------------------
// Context patterns

struct SymSet {
  bool any = true;
  bool negate = false;
  std::vector<Sym> syms;  // sorted

  static SymSet all() { return {}; }
  static SymSet one(Sym s) { return SymSet{false, false, {s}}; }

  bool contains(Sym s) const {
    if (any) return true;
    bool in = std::binary_search(syms.begin(), syms.end(), s);
    return negate ? !in : in;
  }
};

struct PairPred {
  SymSet lex;
  SymSet surf;
  bool matches(SymbolPair p) const { return lex.contains(p.lex) && surf.contains(p.surf); }
};

/// Regular expression over pair predicates.
struct Pattern {
  enum class Op { Pred, Edge, Seq, Alt, Star, Opt };
  Op op = Op::Seq;
  PairPred pred;
  std::vector<Pattern> kids;

  /// Maximum number of pairs consumed, or nullopt if unbounded.
  std::optional<std::size_t> max_length() const {
    switch (op) {
      case Op::Pred: return 1;
      case Op::Edge: return 0;
      case Op::Star: return std::nullopt;
      case Op::Opt: return kids[0].max_length();
      case Op::Seq: {
        std::size_t n = 0;
        for (const auto& k : kids) {
          auto m = k.max_length();
          if (!m) return std::nullopt;
          n += *m;
        }
        return n;
      }
      case Op::Alt: {
        std::size_t n = 0;
        for (const auto& k : kids) {
          auto m = k.max_length();
          if (!m) return std::nullopt;
          n = std::max(n, *m);
        }
        return n;
      }
    }
    return 0;
  }

  Pattern reversed() const {
    Pattern p = *this;
    for (auto& k : p.kids) k = k.reversed();
    if (op == Op::Seq) std::reverse(p.kids.begin(), p.kids.end());
    return p;
  }

  void collect_preds(std::vector<const PairPred*>& out) const {
    if (op == Op::Pred) out.push_back(&pred);
    for (const auto& k : kids) k.collect_preds(out);
  }
};

/// Thompson NFA; matched either forwards or (built from the reversed
/// pattern) backwards from a focus position.
class Nfa {
public:
  explicit Nfa(const Pattern& p) {
    int start = build(p, add_match());
    start_ = start;
  }

  /// Fewest pairs consumed by a match that starts next to the focus, or
  /// -1. `step` is +1 (right context) or -1 (left context). Positions at or
  /// beyond `limit` (right) are treated as not yet known.
  template <class PairAt>
  int shortest(PairAt&& pair_at, int from, int step, int total, int limit) const {
    std::vector<char> cur(states_.size(), 0), next(states_.size(), 0);
    int pos = from;
    closure(start_, pos, step, total, cur);
    for (int consumed = 0;; ++consumed) {
      if (cur[match_]) return consumed;
      if (pos < 0 || pos >= total || (step > 0 && pos >= limit)) return -1;
      SymbolPair p = pair_at(pos);
      std::fill(next.begin(), next.end(), 0);
      bool alive = false;
      int npos = pos + step;
      for (std::size_t s = 0; s < states_.size(); ++s) {
        if (!cur[s] || states_[s].type != Type::Pred) continue;
        if (preds_[states_[s].pred].matches(p)) {
          closure(states_[s].out1, npos, step, total, next);
          alive = true;
        }
      }
      if (!alive) return -1;
      std::swap(cur, next);
      pos = npos;
    }
  }

private:
  enum class Type { Pred, Split, Edge, Match, Jump };
  struct State {
    Type type;
    int pred = -1;
    int out1 = -1, out2 = -1;
  };

  int add(State s) {
    states_.push_back(s);
    return static_cast<int>(states_.size() - 1);
  }

  int add_match() {
    match_ = add({Type::Match});
    return match_;
  }

  // Builds the fragment for `p` continuing to `next`; returns its entry.
  int build(const Pattern& p, int next) {
    switch (p.op) {
      case Pattern::Op::Pred: {
        preds_.push_back(p.pred);
        return add({Type::Pred, static_cast<int>(preds_.size() - 1), next});
      }
      case Pattern::Op::Edge:
        return add({Type::Edge, -1, next});
      case Pattern::Op::Seq: {
        int entry = next;
        for (auto it = p.kids.rbegin(); it != p.kids.rend(); ++it) entry = build(*it, entry);
        return entry;
      }
      case Pattern::Op::Alt: {
        if (p.kids.empty()) return next;
        int entry = build(p.kids.back(), next);
        for (int i = static_cast<int>(p.kids.size()) - 2; i >= 0; --i) {
          int k = build(p.kids[i], next);
          entry = add({Type::Split, -1, k, entry});
        }
        return entry;
      }
      case Pattern::Op::Opt: {
        int k = build(p.kids[0], next);
        return add({Type::Split, -1, k, next});
      }
      case Pattern::Op::Star: {
        int split = add({Type::Split, -1, -1, next});
        int k = build(p.kids[0], split);
        states_[split].out1 = k;
        return split;
      }
    }
    return next;
  }

  void closure(int s, int pos, int step, int total, std::vector<char>& set) const {
    if (s < 0 || set[s]) return;
    set[s] = 1;
    const State& st = states_[s];
    switch (st.type) {
      case Type::Split:
        closure(st.out1, pos, step, total, set);
        closure(st.out2, pos, step, total, set);
        break;
      case Type::Edge:
        if ((step > 0 && pos == total) || (step < 0 && pos == -1)) closure(st.out1, pos, step, total, set);
        break;
      case Type::Jump:
        closure(st.out1, pos, step, total, set);
        break;
      default:
        break;
    }
  }

  std::vector<State> states_;
  std::vector<PairPred> preds_;
  int start_ = -1;
  int match_ = -1;
};

// ---------------------------------------------------------------------------
// Rules

enum class Operator { ContextRestriction, SurfaceCoercion, Composite };

inline std::string operator_name(Operator op) {
  switch (op) {
    case Operator::ContextRestriction: return "=>";
    case Operator::SurfaceCoercion: return "<=";
    case Operator::Composite: return "<=>";
  }
  return "?";
}

struct SpellingRule {
  std::string name;
  SymbolPair focus;
  Operator op = Operator::Composite;
  Pattern left;
  Pattern right;
  bool optional = false;
  FeatureStructure constraint = FeatureStructure::any();
  std::string source;  // original text, for diagnostics

  bool restricts() const { return op != Operator::SurfaceCoercion; }
  bool coerces() const { return op != Operator::ContextRestriction; }
};

/// One morpheme (or word token) of an alignment: its lexical symbols and
/// the features rule constraints are checked against.
struct Segment {
  std::u32string lexical;
  const FeatureStructure* features = nullptr;  // null: no constraint checking
};

struct Alignment {
  std::vector<SymbolPair> pairs;
  std::vector<int> owner;  // segment index per pair

  std::string surface() const {
    std::u32string s;
    for (auto p : pairs)
      if (p.surf != kNull) s.push_back(p.surf);
    return utf8::encode(s);
  }

  std::string surface_of(int seg) const {
    std::u32string s;
    for (std::size_t i = 0; i < pairs.size(); ++i)
      if (owner[i] == seg && pairs[i].surf != kNull) s.push_back(pairs[i].surf);
    return utf8::encode(s);
  }

  std::string lexical() const {
    std::string s;
    for (auto p : pairs) s += p.lex == kWordBoundary ? std::string(" ") : utf8::encode(p.lex);
    return s;
  }
};

class CompiledSpelling {
public:
  /// Validates and indexes the rules. Throws RuleError naming the rule on
  /// an undeclared pair or a duplicate name.
  static CompiledSpelling compile(std::vector<SpellingRule> rules, Alphabet alphabet) {
    CompiledSpelling c;
    std::set<std::string> names;
    for (const auto& r : rules) {
      if (!names.insert(r.name).second) throw RuleError("duplicate rule name '" + r.name + "'");
      if (!alphabet.feasible(r.focus))
        throw RuleError("rule '" + r.name + "': focus pair " + pair_name(r.focus) + " is not in the alphabet");
      if (r.optional && r.op != Operator::ContextRestriction)
        throw RuleError("rule '" + r.name + "': optional rules must use the => operator");
      std::vector<const PairPred*> preds;
      r.left.collect_preds(preds);
      r.right.collect_preds(preds);
      for (const auto* p : preds) {
        if (!p->lex.any && !p->lex.negate && p->lex.syms.size() == 1 && !p->surf.any && !p->surf.negate &&
            p->surf.syms.size() == 1) {
          SymbolPair cp{p->lex.syms[0], p->surf.syms[0]};
          if (!alphabet.feasible(cp))
            throw RuleError("rule '" + r.name + "': context pair " + pair_name(cp) + " is not in the alphabet");
        }
      }
    }
    c.alphabet_ = std::move(alphabet);
    c.rules_ = std::move(rules);
    c.max_right_ = 0;
    for (std::size_t i = 0; i < c.rules_.size(); ++i) {
      const auto& r = c.rules_[i];
      c.left_.emplace_back(std::make_unique<Nfa>(r.left.reversed()));
      c.right_.emplace_back(std::make_unique<Nfa>(r.right));
      if (auto m = r.right.max_length(); m && c.max_right_ != kUnbounded)
        c.max_right_ = std::max(c.max_right_, *m);
      else
        c.max_right_ = kUnbounded;
      if (r.restricts()) c.licensers_[r.focus].push_back(i);
      if (r.coerces()) c.coercers_[r.focus.lex].push_back(i);
    }
    return c;
  }

  const Alphabet& alphabet() const { return alphabet_; }
  const std::vector<SpellingRule>& rules() const { return rules_; }

  bool restricted(SymbolPair p) const { return licensers_.count(p) != 0; }

  /// All surface realisations licensed by the rules for a segment sequence.
  std::vector<Alignment> realize(std::span<const Segment> segments) const {
    std::vector<SymbolPair> lex;
    std::vector<int> owner;
    for (std::size_t s = 0; s < segments.size(); ++s)
      for (Sym c : segments[s].lexical) {
        lex.push_back({c, kNull});
        owner.push_back(static_cast<int>(s));
      }
    Checker chk(*this, segments);
    std::vector<Alignment> out;
    Alignment cur;
    cur.pairs = lex;
    cur.owner = owner;
    int n = static_cast<int>(lex.size());
    int lag = max_right_ == kUnbounded ? n : static_cast<int>(max_right_);
    std::vector<std::vector<Sym>> options(n);
    for (int i = 0; i < n; ++i) options[i] = alphabet_.surfaces(lex[i].lex);
    std::function<void(int)> dfs = [&](int i) {
      if (i == n) {
        for (int j = std::max(0, n - lag); j < n; ++j)
          if (!chk.ok_at(cur, j, n)) return;
        out.push_back(cur);
        return;
      }
      for (Sym s : options[i]) {
        cur.pairs[i].surf = s;
        int j = i - lag;
        if (j >= 0 && !chk.ok_at(cur, j, i + 1)) continue;
        dfs(i + 1);
      }
    };
    dfs(0);
    return out;
  }

  /// Full check of a complete alignment.
  bool admissible(const Alignment& a, std::span<const Segment> segments) const {
    Checker chk(*this, segments);
    int n = static_cast<int>(a.pairs.size());
    for (int j = 0; j < n; ++j) {
      if (!alphabet_.feasible(a.pairs[j])) return false;
      if (!chk.ok_at(a, j, n)) return false;
    }
    return true;
  }

private:
  static constexpr std::size_t kUnbounded = std::numeric_limits<std::size_t>::max();

  // Per-call constraint cache over (rule, segment).
  class Checker {
  public:
    Checker(const CompiledSpelling& c, std::span<const Segment> segs)
        : c_(c), segs_(segs), cache_(c.rules_.size() * std::max<std::size_t>(segs.size(), 1), -1) {}

    bool ok_at(const Alignment& a, int j, int limit) {
      SymbolPair p = a.pairs[j];
      if (auto it = c_.licensers_.find(p); it != c_.licensers_.end()) {
        bool licensed = false;
        for (std::size_t r : it->second)
          if (context_holds(r, a, j, limit)) { licensed = true; break; }
        if (!licensed) return false;
      }
      if (auto it = c_.coercers_.find(p.lex); it != c_.coercers_.end()) {
        for (std::size_t r : it->second) {
          if (c_.rules_[r].focus.surf == p.surf) continue;
          if (context_holds(r, a, j, limit)) return false;
        }
      }
      return true;
    }

  private:
    bool context_holds(std::size_t r, const Alignment& a, int j, int limit) {
      int total = static_cast<int>(a.pairs.size());
      auto at = [&a](int i) { return a.pairs[i]; };
      int l = c_.left_[r]->shortest(at, j - 1, -1, total, total);
      if (l < 0) return false;
      int rr = c_.right_[r]->shortest(at, j + 1, +1, total, limit);
      if (rr < 0) return false;
      const auto& rule = c_.rules_[r];
      if (rule.constraint.kind() == FeatureStructure::Kind::Any) return true;
      int lo = j - l, hi = j + rr;
      int last_owner = -1;
      for (int i = lo; i <= hi; ++i) {
        int o = a.owner[i];
        if (o == last_owner) continue;
        last_owner = o;
        if (!constraint_ok(r, o)) return false;
      }
      return true;
    }

    bool constraint_ok(std::size_t r, int seg) {
      const FeatureStructure* fs = segs_[seg].features;
      if (!fs) return true;
      auto& slot = cache_[r * segs_.size() + seg];
      if (slot < 0) slot = FeatureStructure::unify(*fs, c_.rules_[r].constraint) ? 1 : 0;
      return slot == 1;
    }

    const CompiledSpelling& c_;
    std::span<const Segment> segs_;
    std::vector<signed char> cache_;
  };

  Alphabet alphabet_;
  std::vector<SpellingRule> rules_;
  std::vector<std::unique_ptr<Nfa>> left_, right_;
  std::map<SymbolPair, std::vector<std::size_t>> licensers_;
  std::map<Sym, std::vector<std::size_t>> coercers_;
  std::size_t max_right_ = 0;
};

// ---------------------------------------------------------------------------
// Rule-file reader
//
//   // comment
//   pair e:è é:è +:0 +:t
//   boundary +            (lexical symbols with no identity realisation)
//   set C = b c d f g ...
//   set NH = @ except -
//   rule <name> [optional] <pair> <op> <left> _ <right> [where <FS>]

namespace detail {

struct RuleFileState {
  std::map<std::string, SymSet> sets;
};

inline std::vector<std::string> context_tokens(std::string_view s) {
  std::vector<std::string> out;
  std::string cur;
  auto flush = [&] {
    if (!cur.empty()) out.push_back(cur);
    cur.clear();
  };
  for (std::size_t i = 0; i < s.size(); ++i) {
    char c = s[i];
    if (c == ' ' || c == '\t') { flush(); continue; }
    if (c == '(' || c == '|') { flush(); out.emplace_back(1, c); continue; }
    if (c == ')') {
      flush();
      std::string t(1, c);
      if (i + 1 < s.size() && (s[i + 1] == '*' || s[i + 1] == '?')) t += s[++i];
      out.push_back(t);
      continue;
    }
    cur += c;
  }
  flush();
  return out;
}

inline SymSet side_set(std::string_view tok, const RuleFileState& st) {
  if (tok.empty() || tok == "@") return SymSet::all();
  if (tok[0] == '$') {
    auto it = st.sets.find(std::string(tok.substr(1)));
    if (it == st.sets.end()) throw RuleError("unknown set '" + std::string(tok) + "'");
    return it->second;
  }
  return SymSet::one(parse_symbol(tok));
}

inline Pattern pred_token(std::string_view tok, const RuleFileState& st) {
  Pattern p;
  if (tok == ".#.") {
    p.op = Pattern::Op::Edge;
    return p;
  }
  p.op = Pattern::Op::Pred;
  // Split at the first ':' that is not the whole token.
  auto colon = tok.find(':');
  if (colon == std::string_view::npos || tok.size() == 1) {
    p.pred.lex = side_set(tok, st);
    p.pred.surf = SymSet::all();
  } else {
    p.pred.lex = side_set(tok.substr(0, colon), st);
    p.pred.surf = side_set(tok.substr(colon + 1), st);
  }
  return p;
}

class PatternParser {
public:
  PatternParser(std::vector<std::string> toks, const RuleFileState& st) : toks_(std::move(toks)), st_(st) {}

  Pattern parse() {
    Pattern p = alt();
    if (i_ != toks_.size()) throw RuleError("unexpected '" + toks_[i_] + "' in context");
    return p;
  }

private:
  Pattern alt() {
    Pattern first = seq();
    if (i_ >= toks_.size() || toks_[i_] != "|") return first;
    Pattern a;
    a.op = Pattern::Op::Alt;
    a.kids.push_back(std::move(first));
    while (i_ < toks_.size() && toks_[i_] == "|") {
      ++i_;
      a.kids.push_back(seq());
    }
    return a;
  }

  Pattern seq() {
    Pattern s;
    s.op = Pattern::Op::Seq;
    while (i_ < toks_.size() && toks_[i_] != "|" && toks_[i_][0] != ')') {
      const std::string& t = toks_[i_];
      if (t == "(") {
        ++i_;
        Pattern inner = alt();
        if (i_ >= toks_.size() || toks_[i_][0] != ')') throw RuleError("unbalanced parentheses in context");
        const std::string& close = toks_[i_++];
        s.kids.push_back(postfix(std::move(inner), close.size() > 1 ? close[1] : 0));
        continue;
      }
      ++i_;
      char post = 0;
      std::string_view body = t;
      if (body.size() > 1 && (body.back() == '*' || body.back() == '?') && body != ".#.") {
        post = body.back();
        body.remove_suffix(1);
      }
      s.kids.push_back(postfix(pred_token(body, st_), post));
    }
    return s;
  }

  static Pattern postfix(Pattern p, char op) {
    if (!op) return p;
    Pattern w;
    w.op = op == '*' ? Pattern::Op::Star : Pattern::Op::Opt;
    w.kids.push_back(std::move(p));
    return w;
  }

  std::vector<std::string> toks_;
  const RuleFileState& st_;
  std::size_t i_ = 0;
};

inline std::vector<std::string> split_ws(std::string_view s) {
  std::vector<std::string> out;
  std::istringstream in{std::string(s)};
  std::string t;
  while (in >> t) out.push_back(t);
  return out;
}

}  // namespace detail

struct RuleFile {
  Alphabet alphabet;
  std::vector<SpellingRule> rules;
};

inline RuleFile read_rule_file(std::string_view text, const std::string& origin = "<rules>") {
  RuleFile rf;
  detail::RuleFileState st;
  std::istringstream in{std::string(text)};
  std::string line;
  int lineno = 0;
  auto fail = [&](const std::string& msg) -> RuleError {
    return RuleError(origin + ":" + std::to_string(lineno) + ": " + msg);
  };
  while (std::getline(in, line)) {
    ++lineno;
    if (auto hash = line.find("//"); hash != std::string::npos) line.erase(hash);
    auto toks = detail::split_ws(line);
    if (toks.empty()) continue;
    try {
      const std::string& kw = toks[0];
      if (kw == "pair") {
        for (std::size_t i = 1; i < toks.size(); ++i) {
          auto c = toks[i].find(':', 1);
          if (c == std::string::npos) throw fail("malformed pair '" + toks[i] + "'");
          rf.alphabet.add({parse_symbol(toks[i].substr(0, c)), parse_symbol(toks[i].substr(c + 1))});
        }
      } else if (kw == "boundary") {
        for (std::size_t i = 1; i < toks.size(); ++i) rf.alphabet.block_identity(parse_symbol(toks[i]));
      } else if (kw == "set") {
        if (toks.size() < 3 || toks[2] != "=") throw fail("expected 'set NAME = ...'");
        SymSet s;
        std::size_t i = 3;
        if (i < toks.size() && toks[i] == "@") {
          ++i;
          if (i < toks.size() && toks[i] == "except") {
            ++i;
            s.any = false;
            s.negate = true;
          }
        } else {
          s.any = false;
        }
        for (; i < toks.size(); ++i) {
          if (toks[i][0] == '$') {
            auto it = st.sets.find(toks[i].substr(1));
            if (it == st.sets.end() || it->second.any || it->second.negate) throw fail("cannot splice set " + toks[i]);
            s.syms.insert(s.syms.end(), it->second.syms.begin(), it->second.syms.end());
          } else {
            s.syms.push_back(parse_symbol(toks[i]));
          }
        }
        std::sort(s.syms.begin(), s.syms.end());
        s.syms.erase(std::unique(s.syms.begin(), s.syms.end()), s.syms.end());
        st.sets[toks[1]] = s;
      } else if (kw == "rule") {
        SpellingRule r;
        r.source = line;
        std::string body = line.substr(line.find("rule") + 4);
        std::string where;
        if (auto w = body.find(" where "); w != std::string::npos) {
          where = body.substr(w + 7);
          body.erase(w);
        }
        auto bt = detail::split_ws(body);
        std::size_t i = 0;
        if (bt.size() < 3) throw fail("incomplete rule");
        r.name = bt[i++];
        if (bt[i] == "optional") {
          r.optional = true;
          ++i;
        }
        if (i + 1 >= bt.size()) throw fail("incomplete rule '" + r.name + "'");
        auto c = bt[i].find(':', 1);
        if (c == std::string::npos) throw fail("rule '" + r.name + "': focus must be a pair");
        r.focus = {parse_symbol(bt[i].substr(0, c)), parse_symbol(bt[i].substr(c + 1))};
        ++i;
        const std::string& op = bt[i++];
        if (op == "=>") r.op = Operator::ContextRestriction;
        else if (op == "<=") r.op = Operator::SurfaceCoercion;
        else if (op == "<=>") r.op = Operator::Composite;
        else throw fail("rule '" + r.name + "': unknown operator '" + op + "'");
        // Re-tokenise the context part so parentheses need no spaces.
        std::string ctx;
        for (std::size_t k = i; k < bt.size(); ++k) ctx += bt[k] + " ";
        auto toks2 = detail::context_tokens(ctx);
        auto us = std::find(toks2.begin(), toks2.end(), "_");
        if (us == toks2.end()) throw fail("rule '" + r.name + "': missing '_' focus marker");
        r.left = detail::PatternParser({toks2.begin(), us}, st).parse();
        r.right = detail::PatternParser({us + 1, toks2.end()}, st).parse();
        if (!where.empty()) r.constraint = FeatureStructure::parse(where);
        rf.rules.push_back(std::move(r));
      } else {
        throw fail("unknown directive '" + kw + "'");
      }
    } catch (const RuleError& e) {
      std::string msg = e.what();
      if (msg.rfind(origin, 0) == 0) throw;
      throw fail(msg);
    } catch (const SyntaxError& e) {
      throw fail(std::string("feature constraint: ") + e.what());
    }
  }
  return rf;
}

inline CompiledSpelling compile_rule_file(std::string_view text, const std::string& origin = "<rules>") {
  auto rf = read_rule_file(text, origin);
  try {
    return CompiledSpelling::compile(std::move(rf.rules), std::move(rf.alphabet));
  } catch (const RuleError& e) {
    throw RuleError(origin + ": " + e.what());
  }
}

}  // namespace lingware::twolevel
