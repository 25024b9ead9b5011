#pragma once

// Grammar compiler: feature declarations, phrase-structure rules over
// feature-structure categories, and the lexicon (full forms, stems for the
// morphology, and parametrised lexical macros).
//
// Directives (any file may contain any of them):
//
//   category S VP NP ...
//   feature inv = inverted uninverted ...   closed value set
//   feature agr                             open value
//   thread wh : S VP NP PP V                threaded categories
//   default vg = none : S VP V              filled in when not mentioned
//   default mother overt = y : NP           ... on mothers and entries only
//   start S[root=y]
//   let NAME = text                         textual macro, used as $NAME
//   rule ID: M --> D1 ... Dn ; sem: TERM    #k in TERM is Dk's semantics
//   lex FORM: Cat[...] ; sem: TERM
//   stem FORM: Cat[...] ; sem: TERM
//   macro NAME(P, Q) ... end                lexical macro, applied as @NAME(a, b)
//
// A thread T is a pair [i=.., o=..] on every category of the thread set.
// Rules that do not mention T get it chained left to right through their
// threaded daughters; rules that mention it must do so on every threaded
// element. Lexical entries and empty rules pass T through unchanged.
//
// fn, n, a1, a2, ... are the term encoding (semterm.hpp) and need no
// declaration.

#include <algorithm>
#include <cctype>
#include <functional>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <regex>
#include <set>
#include <sstream>
#include <stdexcept>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

#include "lingware/featstruct.hpp"
#include "lingware/morphology.hpp"
#include "lingware/sandhi.hpp"
#include "lingware/semterm.hpp"
#include "lingware/textutil.hpp"

namespace lingware::grammar {

class GrammarError : public std::runtime_error {
public:
  using std::runtime_error::runtime_error;
};

struct Source {
  std::string origin;
  std::string text;
};

struct FeatureDecl {
  std::string name;
  std::vector<std::string> values;  // empty: open
};

struct ThreadDecl {
  std::string name;
  std::set<std::string> categories;
};

struct DefaultDecl {
  std::string attr;
  std::string value;  // FS text
  std::set<std::string> categories;
  bool mother_only = false;  // not applied to rule daughters
};

struct Rule {
  std::string id;
  std::string mother;
  std::vector<std::string> daughters;
  FeatureStructure fs;  // [m=.., d1=.., ..., dn=..]
  std::string origin;
  int line = 0;

  bool empty() const { return daughters.empty(); }
};

struct LexEntry {
  std::string form;  // citation form (surface word for morphology results)
  std::string cat;
  FeatureStructure fs;
  std::string origin;
  int line = 0;
  std::string lexical;  // morpheme sequence for analysed words, else empty
};

struct Macro {
  std::string name;
  std::vector<std::string> params;
  std::vector<std::string> body;
  std::string origin;
  int line = 0;
};

class Grammar;

/// Compiles grammar sources on top of an already loaded morphology
/// (spelling rules and morphotax) and sandhi component.
inline std::unique_ptr<Grammar> compile_grammar(const std::vector<Source>& sources,
                                         std::unique_ptr<morph::Morphology> morph = nullptr,
                                         std::unique_ptr<sandhi::Sandhi> sandhi = nullptr);

class Grammar {
public:
  const std::vector<std::string>& categories() const { return categories_; }
  bool has_category(std::string_view c) const {
    return std::find(categories_.begin(), categories_.end(), c) != categories_.end();
  }
  const std::map<std::string, FeatureDecl>& features() const { return features_; }
  const std::vector<ThreadDecl>& threads() const { return threads_; }
  const std::vector<DefaultDecl>& defaults() const { return defaults_; }
  const FeatureStructure& start() const { return start_; }
  const std::string& start_text() const { return start_text_; }
  const std::vector<Rule>& rules() const { return rules_; }
  const std::vector<LexEntry>& lexicon() const { return lexicon_; }
  const std::vector<LexEntry>& stems() const { return stems_; }
  const std::map<std::string, Macro>& macros() const { return macros_; }
  const morph::Morphology& morphology() const { return *morph_; }
  const sandhi::Sandhi& sandhi() const { return *sandhi_; }

  const Rule* rule(std::string_view id) const {
    for (const auto& r : rules_)
      if (r.id == id) return &r;
    return nullptr;
  }

  bool threaded(std::string_view thread, std::string_view cat) const {
    for (const auto& t : threads_)
      if (t.name == thread) return t.categories.count(std::string(cat)) > 0;
    return false;
  }

  /// Rules whose first daughter has category `cat`.
  const std::vector<std::size_t>& rules_by_first(const std::string& cat) const {
    static const std::vector<std::size_t> none;
    auto it = by_first_.find(cat);
    return it == by_first_.end() ? none : it->second;
  }
  const std::vector<std::size_t>& rules_by_mother(const std::string& cat) const {
    static const std::vector<std::size_t> none;
    auto it = by_mother_.find(cat);
    return it == by_mother_.end() ? none : it->second;
  }
  const std::vector<std::size_t>& empty_rules() const { return empty_; }

  /// Lexical categories for one token: full-form entries plus morphological
  /// analyses of the form.
  std::vector<LexEntry> lookup(std::string_view form) const {
    std::string f = utf8::nfc(form);
    {
      std::lock_guard lock(cache_mutex_);
      if (auto it = lookup_cache_.find(f); it != lookup_cache_.end()) return it->second;
    }
    std::vector<LexEntry> out;
    auto [b, e] = by_form_.equal_range(f);
    for (auto it = b; it != e; ++it) out.push_back(lexicon_[it->second]);
    if (f.find(' ') == std::string::npos && !f.empty() && f[0] != '-')
      for (auto& a : morph_->analyze(f))
        if (auto le = from_analysis(a, f)) out.push_back(std::move(*le));
    std::lock_guard lock(cache_mutex_);
    lookup_cache_.emplace(f, out);
    return out;
  }

  /// True when some token reading exists for `form`.
  bool known(std::string_view form) const { return !lookup(form).empty(); }

  /// Every lexical entry usable in generation: full forms and every word
  /// the morphology can build from the stems.
  const std::vector<LexEntry>& generation_lexicon() const {
    std::lock_guard lock(gen_mutex_);
    if (!gen_lexicon_) build_generation_lexicon();
    return *gen_lexicon_;
  }

  /// Expands @name(args) into lexicon lines.
  std::vector<std::string> expand_macro(const std::string& name, const std::vector<std::string>& args) const {
    auto it = macros_.find(name);
    if (it == macros_.end()) throw GrammarError("unknown macro '" + name + "'");
    const Macro& m = it->second;
    if (args.size() != m.params.size())
      throw GrammarError("macro '" + name + "' takes " + std::to_string(m.params.size()) + " argument(s), got " +
                         std::to_string(args.size()));
    std::vector<std::string> out;
    for (std::string line : m.body) {
      // Longest parameter names first so $AB is not split as $A + B.
      std::vector<std::size_t> order(m.params.size());
      for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
      std::sort(order.begin(), order.end(),
                [&](auto a, auto b) { return m.params[a].size() > m.params[b].size(); });
      for (auto i : order) {
        std::string key = "$" + m.params[i];
        for (auto p = line.find(key); p != std::string::npos; p = line.find(key, p + args[i].size()))
          line.replace(p, key.size(), args[i]);
      }
      out.push_back(line);
    }
    return out;
  }

  /// Declarations, rules and lexicon in the input syntax; compiling this
  /// text again gives an equivalent grammar.
  std::string pretty() const;

  /// The sandhi vocabulary: every full-form citation.
  std::vector<std::string> citation_forms() const {
    std::set<std::string> s;
    for (const auto& e : lexicon_) s.insert(e.form);
    return {s.begin(), s.end()};
  }

  /// Thread, default and category completion for a lexical structure.
  std::optional<FeatureStructure> complete_lexical(FeatureStructure fs, const std::string& cat) const;

private:
  friend class Compiler;
  friend std::unique_ptr<Grammar> compile_grammar(const std::vector<Source>&, std::unique_ptr<morph::Morphology>,
                                                  std::unique_ptr<sandhi::Sandhi>);

  std::optional<LexEntry> from_analysis(const morph::WordAnalysis& a, const std::string& surface) const {
    auto fs = complete_lexical(a.features, a.category);
    if (!fs) return std::nullopt;
    LexEntry e;
    e.form = surface;
    e.cat = a.category;
    e.fs = std::move(*fs);
    e.origin = "morphology:" + a.rule;
    e.lexical = a.lexical();
    return e;
  }

  void build_generation_lexicon() const;
  void index();

  std::vector<std::string> categories_;
  std::map<std::string, FeatureDecl> features_;
  std::vector<ThreadDecl> threads_;
  std::vector<DefaultDecl> defaults_;
  FeatureStructure start_ = FeatureStructure::any();
  std::string start_text_;
  std::vector<Rule> rules_;
  std::vector<LexEntry> lexicon_;
  std::vector<LexEntry> stems_;
  std::map<std::string, Macro> macros_;
  std::map<std::string, std::string> lets_;
  std::unique_ptr<morph::Morphology> morph_ = std::make_unique<morph::Morphology>();
  std::unique_ptr<sandhi::Sandhi> sandhi_ = std::make_unique<sandhi::Sandhi>();

  std::unordered_map<std::string, std::vector<std::size_t>> by_first_, by_mother_;
  std::vector<std::size_t> empty_;
  std::unordered_multimap<std::string, std::size_t> by_form_;
  mutable std::unordered_map<std::string, std::vector<LexEntry>> lookup_cache_;
  mutable std::optional<std::vector<LexEntry>> gen_lexicon_;
  mutable std::mutex cache_mutex_, gen_mutex_;
};

namespace detail {

inline Symbol S(std::string_view s) { return sym(s); }

/// Adds `extra` (attribute list text) to a category's FS text.
inline std::string with_extra(const std::string& fs, const std::string& extra) {
  if (extra.empty()) return fs.empty() ? "[]" : fs;
  std::string t = text::trim(fs);
  if (t.empty() || t == "_") return "[" + extra + "]";
  auto insert_into = [&](std::size_t open) {
    std::string rest = text::trim(t.substr(open + 1));
    return t.substr(0, open + 1) + extra + (rest.size() > 0 && rest[0] != ']' ? ", " : "") + rest;
  };
  if (t[0] == '[') return insert_into(0);
  if (t[0] == '?') {
    auto colon = t.find(':');
    if (colon == std::string::npos) return t + ":[" + extra + "]";
    if (colon + 1 < t.size() && t[colon + 1] == '[') return insert_into(colon + 1);
  }
  throw SyntaxError("category features must be a structure", 0);
}

/// Splits "a, [b, c], d" at top-level commas.
inline std::vector<std::string> split_args(std::string_view s) {
  std::vector<std::string> out;
  int depth = 0;
  std::string cur;
  bool quoted = false;
  for (char c : s) {
    if (c == '"') quoted = !quoted;
    if (!quoted) {
      if (c == '[' || c == '(' || c == '{') ++depth;
      if (c == ']' || c == ')' || c == '}') --depth;
      if (c == ',' && depth == 0) {
        out.push_back(text::trim(cur));
        cur.clear();
        continue;
      }
    }
    cur += c;
  }
  if (!text::trim(cur).empty() || !out.empty()) out.push_back(text::trim(cur));
  return out;
}

/// Top-level `attr=value` pairs of a printed structure.
inline std::map<std::string, std::string> top_level(const std::string& printed) {
  std::map<std::string, std::string> out;
  std::string t = text::trim(printed);
  if (t.size() < 2 || t.front() != '[') return out;
  for (const auto& part : split_args(t.substr(1, t.size() - 2))) {
    auto eq = part.find('=');
    if (eq == std::string::npos) continue;
    out[text::trim(part.substr(0, eq))] = text::trim(part.substr(eq + 1));
  }
  return out;
}

inline std::string escape_regex(const std::string& s) {
  static const std::regex special(R"([.^$|()\[\]{}*+?\\])");
  return std::regex_replace(s, special, R"(\$&)");
}

}  // namespace detail

inline std::optional<FeatureStructure> Grammar::complete_lexical(FeatureStructure fs, const std::string& cat) const {
  using detail::S;
  if (fs.kind() == FeatureStructure::Kind::Any) fs = FeatureStructure();
  auto u = FeatureStructure::unify(fs, FeatureStructure::parse("[cat=" + cat + "]"));
  if (!u) return std::nullopt;
  for (const auto& t : threads_) {
    if (!t.categories.count(cat) || u->follow(u->root(), S(t.name))) continue;
    u = FeatureStructure::unify(*u, FeatureStructure::parse("[" + t.name + "=[i=?T, o=?T]]"));
    if (!u) return std::nullopt;
  }
  for (const auto& d : defaults_) {
    if (!d.categories.count(cat) || u->follow(u->root(), S(d.attr))) continue;
    Symbol a = S(d.attr);
    u = FeatureStructure::unify_path(*u, std::span<const Symbol>(&a, 1), FeatureStructure::parse(d.value));
    if (!u) return std::nullopt;
  }
  return u;
}

inline void Grammar::index() {
  by_first_.clear();
  by_mother_.clear();
  empty_.clear();
  by_form_.clear();
  lookup_cache_.clear();
  gen_lexicon_.reset();
  for (std::size_t i = 0; i < rules_.size(); ++i) {
    by_mother_[rules_[i].mother].push_back(i);
    if (rules_[i].empty()) empty_.push_back(i);
    else by_first_[rules_[i].daughters[0]].push_back(i);
  }
  for (std::size_t i = 0; i < lexicon_.size(); ++i) by_form_.emplace(lexicon_[i].form, i);
}

inline void Grammar::build_generation_lexicon() const {
  std::vector<LexEntry> out = lexicon_;
  std::set<std::vector<const morph::MorphemeEntry*>> seen;
  const auto& entries = morph_->entries();
  for (const auto& p : morph_->productions()) {
    std::vector<const morph::MorphemeEntry*> seq;
    std::function<void(std::size_t)> rec = [&](std::size_t k) {
      if (k == p.daughters.size()) {
        if (!seen.insert(seq).second) return;
        auto analyses = morph_->check_morphotax(seq);
        if (analyses.empty()) return;
        auto surfaces = morph_->realize(seq);
        for (const auto& a : analyses)
          for (const auto& s : surfaces)
            if (auto le = from_analysis(a, s)) out.push_back(std::move(*le));
        return;
      }
      for (const auto& e : entries) {
        if (e.category != p.daughters[k] || e.is_affix() != (k > 0)) continue;
        seq.push_back(&e);
        rec(k + 1);
        seq.pop_back();
      }
    };
    rec(0);
  }
  gen_lexicon_ = std::move(out);
}

}  // namespace lingware::grammar

namespace lingware::grammar {

class Compiler {
public:
  explicit Compiler(Grammar& g) : g_(g) {}

  void run(const std::vector<Source>& sources) {
    std::vector<Pending> pending;
    for (const auto& src : sources) declarations(src, pending);
    for (const auto& p : pending) content(p);
    g_.index();
  }

private:
  struct Pending {
    std::string origin;
    int line;
    std::string text;
  };

  GrammarError fail(const Pending& p, const std::string& msg) const {
    return GrammarError(p.origin + ":" + std::to_string(p.line) + ": " + msg);
  }

  // Pass 1: macros and declarations; everything else is queued.
  void declarations(const Source& src, std::vector<Pending>& pending) {
    std::istringstream in(src.text);
    std::string raw, rest;
    int lineno = 0;
    Macro* open = nullptr;
    while (std::getline(in, raw)) {
      ++lineno;
      std::string t = text::trim(text::strip_comment(raw));
      if (open) {
        if (t == "end") open = nullptr;
        else if (!t.empty()) open->body.push_back(t);
        rest += "\n";
        continue;
      }
      if (text::starts_with_word(t, "macro")) {
        auto lp = t.find('('), rp = t.rfind(')');
        Pending at{src.origin, lineno, t};
        if (lp == std::string::npos || rp == std::string::npos || rp < lp) throw fail(at, "expected 'macro NAME(P, ...)'");
        Macro m;
        m.name = text::trim(t.substr(5, lp - 5));
        for (auto& p : detail::split_args(t.substr(lp + 1, rp - lp - 1))) m.params.push_back(p);
        m.origin = src.origin;
        m.line = lineno;
        if (g_.macros_.count(m.name)) throw fail(at, "duplicate macro '" + m.name + "'");
        open = &g_.macros_[m.name];
        *open = std::move(m);
        rest += "\n";
        continue;
      }
      rest += raw + "\n";
    }
    if (open) throw GrammarError(src.origin + ": macro '" + open->name + "' is missing 'end'");

    for (const auto& line : text::logical_lines(rest)) {
      Pending p{src.origin, line.number, line.text};
      const std::string& t = line.text;
      try {
        if (text::starts_with_word(t, "category")) {
          for (auto& c : twolevel::detail::split_ws(t.substr(8)))
            if (!g_.has_category(c)) g_.categories_.push_back(c);
        } else if (text::starts_with_word(t, "feature")) {
          auto body = t.substr(7);
          FeatureDecl d;
          auto eq = body.find('=');
          d.name = text::trim(body.substr(0, eq));
          if (eq != std::string::npos) d.values = twolevel::detail::split_ws(body.substr(eq + 1));
          if (d.name.empty()) throw fail(p, "expected 'feature NAME [= values]'");
          g_.features_[d.name] = d;
        } else if (text::starts_with_word(t, "thread")) {
          auto colon = t.find(':');
          if (colon == std::string::npos) throw fail(p, "expected 'thread NAME : categories'");
          ThreadDecl d;
          d.name = text::trim(t.substr(6, colon - 6));
          for (auto& c : twolevel::detail::split_ws(t.substr(colon + 1))) d.categories.insert(c);
          g_.threads_.push_back(d);
          g_.features_[d.name] = {d.name, {}};
        } else if (text::starts_with_word(t, "default")) {
          auto eq = t.find('='), colon = t.rfind(':');
          if (eq == std::string::npos || colon == std::string::npos || colon < eq)
            throw fail(p, "expected 'default ATTR = VALUE : categories'");
          DefaultDecl d;
          d.attr = text::trim(t.substr(7, eq - 7));
          if (text::starts_with_word(d.attr, "mother")) {
            d.mother_only = true;
            d.attr = text::trim(d.attr.substr(6));
          }
          d.value = text::trim(t.substr(eq + 1, colon - eq - 1));
          FeatureStructure::parse(d.value);
          for (auto& c : twolevel::detail::split_ws(t.substr(colon + 1))) d.categories.insert(c);
          g_.defaults_.push_back(d);
        } else if (text::starts_with_word(t, "start")) {
          g_.start_text_ = text::trim(t.substr(5));
          pending.push_back(p);
        } else if (text::starts_with_word(t, "let")) {
          auto eq = t.find('=');
          if (eq == std::string::npos) throw fail(p, "expected 'let NAME = text'");
          g_.lets_[text::trim(t.substr(3, eq - 3))] = text::trim(t.substr(eq + 1));
        } else if (text::starts_with_word(t, "rule") || text::starts_with_word(t, "lex") ||
                   text::starts_with_word(t, "stem") || t[0] == '@') {
          pending.push_back(p);
        } else {
          throw fail(p, "unknown directive");
        }
      } catch (const SyntaxError& e) {
        throw fail(p, e.what());
      }
    }
  }

  std::string expand_lets(const Pending& p, std::string s) const {
    static const std::regex ref(R"(\$([A-Za-z_][A-Za-z0-9_]*))");
    for (int round = 0; round < 16; ++round) {
      std::smatch m;
      if (!std::regex_search(s, m, ref)) return s;
      auto it = g_.lets_.find(m[1].str());
      if (it == g_.lets_.end()) throw fail(p, "unknown macro $" + m[1].str());
      s.replace(static_cast<std::size_t>(m.position(0)), static_cast<std::size_t>(m.length(0)), it->second);
      round = 0;
      if (s.size() > 100000) break;
    }
    throw fail(p, "recursive let expansion");
  }

  // Pass 2.
  void content(const Pending& p) {
    try {
      if (text::starts_with_word(p.text, "start")) return start(p);
      if (p.text[0] == '@') return apply_macro(p);
      std::string t = expand_lets(p, p.text);
      if (text::starts_with_word(t, "rule")) return rule(p, t);
      lexical(p, t);
    } catch (const SyntaxError& e) {
      throw fail(p, e.what());
    }
  }

  void start(const Pending& p) {
    auto cats = text::split_categories(g_.start_text_);
    if (cats.size() != 1) throw fail(p, "start needs one category");
    auto fs = cats[0].fs.empty() ? FeatureStructure() : FeatureStructure::parse(cats[0].fs);
    auto u = FeatureStructure::unify(fs, FeatureStructure::parse("[cat=" + cats[0].cat + "]"));
    if (!u) throw fail(p, "start category clash");
    check_category(p, cats[0].cat);
    check(p, *u, 0);
    g_.start_ = *u;
  }

  void apply_macro(const Pending& p) {
    auto lp = p.text.find('('), rp = p.text.rfind(')');
    if (lp == std::string::npos || rp == std::string::npos || rp < lp) throw fail(p, "expected '@name(args)'");
    std::string name = text::trim(p.text.substr(1, lp - 1));
    std::vector<std::string> lines;
    try {
      lines = g_.expand_macro(name, detail::split_args(p.text.substr(lp + 1, rp - lp - 1)));
    } catch (const GrammarError& e) {
      throw fail(p, e.what());
    }
    for (const auto& l : lines) {
      if (!l.empty() && l[0] == '@') throw fail(p, "macro bodies cannot apply macros");
      Pending q{p.origin, p.line, l};
      std::string t = expand_lets(q, l);
      if (text::starts_with_word(t, "rule")) throw fail(p, "macro bodies hold lexical entries only");
      lexical(q, t);
    }
  }

  static std::pair<std::string, std::string> split_sem(const std::string& s) {
    auto k = s.find("; sem:");
    if (k == std::string::npos) return {text::trim(s), ""};
    return {text::trim(s.substr(0, k)), text::trim(s.substr(k + 6))};
  }

  void check_category(const Pending& p, const std::string& c) const {
    if (!g_.has_category(c)) throw fail(p, "undeclared category '" + c + "'");
  }

  static bool is_term_attr(const std::string& a) {
    if (a == "fn" || a == "n") return true;
    return a.size() > 1 && a[0] == 'a' && std::all_of(a.begin() + 1, a.end(), [](char c) { return c >= '0' && c <= '9'; });
  }

  /// Undeclared attributes and out-of-range atom values under `from`.
  void check(const Pending& p, const FeatureStructure& fs, FeatureStructure::NodeId from) const {
    std::vector<FeatureStructure::NodeId> stack{from};
    std::set<FeatureStructure::NodeId> seen;
    while (!stack.empty()) {
      auto n = stack.back();
      stack.pop_back();
      if (!seen.insert(n).second) continue;
      for (const auto& arc : fs.node(n).arcs) {
        const std::string& name = sym_name(arc.attr);
        // Term encodings (see semterm.hpp) may sit under any argument feature.
        if (name == "sem" || is_term_attr(name)) continue;
        const auto& target = fs.node(arc.target);
        if (name == "cat") {
          for (auto a : target.atoms) check_category(p, sym_name(a));
          continue;
        }
        if (name == "i" || name == "o") {
          stack.push_back(arc.target);
          continue;
        }
        auto it = g_.features_.find(name);
        if (it == g_.features_.end()) throw fail(p, "undeclared feature '" + name + "'");
        if (!it->second.values.empty() && target.kind == FeatureStructure::Kind::Atom)
          for (auto a : target.atoms)
            if (std::find(it->second.values.begin(), it->second.values.end(), sym_name(a)) == it->second.values.end())
              throw fail(p, "value '" + sym_name(a) + "' is not declared for feature '" + name + "'");
        stack.push_back(arc.target);
      }
    }
  }

  void rule(const Pending& p, const std::string& t) {
    auto [body, sem] = split_sem(t.substr(4));
    auto colon = body.find(':');
    auto arrow = body.find("-->");
    if (colon == std::string::npos || arrow == std::string::npos || arrow < colon)
      throw fail(p, "expected 'rule ID: Mother --> Daughters'");
    Rule r;
    r.id = text::trim(body.substr(0, colon));
    r.origin = p.origin;
    r.line = p.line;
    if (const Rule* other = g_.rule(r.id))
      throw fail(p, "duplicate rule id '" + r.id + "' (first defined at " + other->origin + ":" +
                        std::to_string(other->line) + ")");
    auto lhs = text::split_categories(body.substr(colon + 1, arrow - colon - 1));
    auto rhs = text::split_categories(body.substr(arrow + 3));
    if (lhs.size() != 1) throw fail(p, "rule '" + r.id + "' needs exactly one mother");
    r.mother = lhs[0].cat;
    check_category(p, r.mother);
    std::vector<std::string> texts{lhs[0].fs};
    for (auto& d : rhs) {
      check_category(p, d.cat);
      r.daughters.push_back(d.cat);
      texts.push_back(d.fs);
    }
    if (!sem.empty()) {
      static const std::regex hole(R"(#(\d+))");
      std::set<std::size_t> used;
      for (std::sregex_iterator it(sem.begin(), sem.end(), hole), end; it != end; ++it) {
        std::size_t k = std::stoul((*it)[1].str());
        if (k == 0 || k > r.daughters.size())
          throw fail(p, "rule '" + r.id + "': template hole #" + std::to_string(k) + " is unbound (" +
                            std::to_string(r.daughters.size()) + " daughter(s))");
        used.insert(k);
      }
      std::string term_text = std::regex_replace(sem, hole, "?_D$1");
      SemTerm term = SemTerm::parse(term_text);
      // Template variables must be bound by some category.
      static const std::regex var(R"(\?([A-Za-z0-9_'.]+))");
      std::string all;
      for (auto& x : texts) all += " " + x + " ";
      for (std::sregex_iterator it(term_text.begin(), term_text.end(), var), end; it != end; ++it) {
        std::string v = (*it)[1].str();
        if (v.rfind("_D", 0) == 0) continue;
        std::regex occurs("\\?" + detail::escape_regex(v) + "(?![A-Za-z0-9_'.])");
        if (!std::regex_search(all, occurs))
          throw fail(p, "rule '" + r.id + "': template variable ?" + v + " is unbound");
      }
      texts[0] = detail::with_extra(texts[0], "sem=" + term.fs_text());
      for (auto k : used) texts[k] = detail::with_extra(texts[k], "sem=?_D" + std::to_string(k));
    }
    std::string all = "[m=" + morph::detail::fs_or_empty(texts[0]);
    for (std::size_t i = 1; i < texts.size(); ++i) all += ", d" + std::to_string(i) + "=" + morph::detail::fs_or_empty(texts[i]);
    FeatureStructure fs = FeatureStructure::parse(all + "]");

    std::vector<std::pair<std::string, std::string>> elems{{"m", r.mother}};
    for (std::size_t i = 0; i < r.daughters.size(); ++i) elems.push_back({"d" + std::to_string(i + 1), r.daughters[i]});
    auto need = [&](std::optional<FeatureStructure> u, const std::string& what) {
      if (!u) throw fail(p, "rule '" + r.id + "': " + what);
      return std::move(*u);
    };
    for (auto& [e, c] : elems) {
      Symbol path[] = {sym(e), sym("cat")};
      fs = need(FeatureStructure::unify_path(fs, path, FeatureStructure::atom(c)), "category clash on " + e);
    }
    for (auto& [e, c] : elems) check(p, fs, *fs.path({e}));
    for (const auto& th : g_.threads_) fs = thread(p, r, fs, elems, th);
    for (const auto& d : g_.defaults_)
      for (auto& [e, c] : elems) {
        if (!d.categories.count(c) || fs.path({e, d.attr}) || (d.mother_only && e != "m")) continue;
        Symbol path[] = {sym(e), sym(d.attr)};
        fs = need(FeatureStructure::unify_path(fs, path, FeatureStructure::parse(d.value)), "default " + d.attr + " clashes");
      }
    r.fs = std::move(fs);
    g_.rules_.push_back(std::move(r));
  }

  FeatureStructure thread(const Pending& p, const Rule& r, FeatureStructure fs,
                          const std::vector<std::pair<std::string, std::string>>& elems, const ThreadDecl& th) const {
    std::vector<std::string> threaded;
    bool mentioned = false;
    for (auto& [e, c] : elems) {
      bool in = th.categories.count(c) > 0;
      bool has = fs.path({e, th.name}).has_value();
      if (has && !in) throw fail(p, "rule '" + r.id + "': thread " + th.name + " on unthreaded category " + c);
      if (in) threaded.push_back(e);
      mentioned = mentioned || has;
    }
    if (mentioned) {
      for (auto& e : threaded)
        if (!fs.path({e, th.name}))
          throw fail(p, "rule '" + r.id + "': thread " + th.name + " must be given on every threaded element (missing on " +
                            e + ")");
      return fs;
    }
    if (threaded.empty()) return fs;
    std::string chain = "[";
    bool mother = threaded.front() == "m";
    std::size_t k = 0;
    std::string first = mother ? "?T0" : "none";
    std::vector<std::string> ds(threaded.begin() + (mother ? 1 : 0), threaded.end());
    std::string prev = first;
    for (std::size_t i = 0; i < ds.size(); ++i) {
      std::string next = "?T" + std::to_string(++k);
      if (!mother && i + 1 == ds.size()) next = "none";
      chain += (i ? ", " : "") + ds[i] + "=[" + th.name + "=[i=" + prev + ", o=" + next + "]]";
      prev = next;
    }
    if (mother) chain += std::string(ds.empty() ? "" : ", ") + "m=[" + th.name + "=[i=?T0, o=" + prev + "]]";
    auto u = FeatureStructure::unify(fs, FeatureStructure::parse(chain + "]"));
    if (!u) throw fail(p, "rule '" + r.id + "': thread " + th.name + " clashes");
    return std::move(*u);
  }

  void lexical(const Pending& p, const std::string& t) {
    bool stem = text::starts_with_word(t, "stem");
    if (!stem && !text::starts_with_word(t, "lex")) throw fail(p, "expected a lexical entry");
    auto [body, sem] = split_sem(t.substr(stem ? 4 : 3));
    auto colon = body.find(':');
    if (colon == std::string::npos) throw fail(p, "expected 'FORM: Category'");
    LexEntry e;
    e.form = utf8::nfc(text::trim(body.substr(0, colon)));
    e.origin = p.origin;
    e.line = p.line;
    if (e.form.empty()) throw fail(p, "empty form");
    auto cats = text::split_categories(body.substr(colon + 1));
    if (cats.size() != 1) throw fail(p, "expected exactly one category");
    e.cat = cats[0].cat;
    check_category(p, e.cat);
    std::string fs_text = cats[0].fs;
    if (!sem.empty()) fs_text = detail::with_extra(fs_text, "sem=" + SemTerm::parse(sem).fs_text());
    FeatureStructure fs = fs_text.empty() ? FeatureStructure() : FeatureStructure::parse(fs_text);
    auto done = g_.complete_lexical(fs, e.cat);
    if (!done) throw fail(p, "entry '" + e.form + "' clashes with category defaults");
    check(p, *done, 0);
    e.fs = std::move(*done);
    if (stem) {
      morph::MorphemeEntry m;
      m.form = e.form;
      m.category = e.cat;
      m.features = e.fs;
      g_.morph_->add_morpheme(std::move(m));
      g_.stems_.push_back(std::move(e));
    } else {
      g_.lexicon_.push_back(std::move(e));
    }
  }

  Grammar& g_;
};

inline std::unique_ptr<Grammar> compile_grammar(const std::vector<Source>& sources,
                                                std::unique_ptr<morph::Morphology> morph,
                                                std::unique_ptr<sandhi::Sandhi> sandhi) {
  auto g = std::make_unique<Grammar>();
  if (morph) g->morph_ = std::move(morph);
  if (sandhi) g->sandhi_ = std::move(sandhi);
  Compiler(*g).run(sources);
  g->sandhi_->add_vocabulary(g->citation_forms());
  return g;
}

inline std::string Grammar::pretty() const {
  std::ostringstream out;
  out << "category";
  for (const auto& c : categories_) out << ' ' << c;
  out << "\n";
  for (const auto& [name, d] : features_) {
    bool is_thread = false;
    for (const auto& t : threads_) is_thread = is_thread || t.name == name;
    if (is_thread) continue;
    out << "feature " << name;
    if (!d.values.empty()) {
      out << " =";
      for (const auto& v : d.values) out << ' ' << v;
    }
    out << "\n";
  }
  for (const auto& t : threads_) {
    out << "thread " << t.name << " :";
    for (const auto& c : t.categories) out << ' ' << c;
    out << "\n";
  }
  for (const auto& d : defaults_) {
    out << "default " << (d.mother_only ? "mother " : "") << d.attr << " = " << d.value << " :";
    for (const auto& c : d.categories) out << ' ' << c;
    out << "\n";
  }
  if (!start_text_.empty()) out << "start " << start_text_ << "\n";
  for (const auto& r : rules_) {
    auto parts = detail::top_level(r.fs.str());
    out << "rule " << r.id << ": " << r.mother << ' ' << parts["m"] << " -->";
    for (std::size_t i = 0; i < r.daughters.size(); ++i)
      out << ' ' << r.daughters[i] << ' ' << parts["d" + std::to_string(i + 1)];
    out << "\n";
  }
  for (const auto& e : lexicon_) out << "lex " << e.form << ": " << e.cat << ' ' << e.fs.str() << "\n";
  for (const auto& e : stems_) out << "stem " << e.form << ": " << e.cat << ' ' << e.fs.str() << "\n";
  return out.str();
}

}  // namespace lingware::grammar
