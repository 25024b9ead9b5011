#pragma once

// Generation: semantic term -> surface strings through the same grammar.
//
// Top-down search from the start category. Daughters are expanded
// semantic head first: a daughter whose `sem` is already instantiated goes
// before one whose semantics only becomes known through sharing (subjects,
// fronted phrases, the fronted verb of an inversion). A daughter that is
// not ready yet is suspended as a hole and generated once unification
// elsewhere binds its semantics; holes still open at the top are filled
// with their smallest realisations. Results are memoized per (goal
// structure, remaining depth). Every candidate is rendered through sandhi
// and parsed again; only strings whose analyses include the input
// semantics are returned.

#include <cstddef>
#include <algorithm>
#include <map>
#include <optional>
#include <set>
#include <stdexcept>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

#include "lingware/featstruct.hpp"
#include "lingware/grammar.hpp"
#include "lingware/parser.hpp"
#include "lingware/sandhi.hpp"
#include "lingware/semterm.hpp"
#include "lingware/unicode.hpp"

namespace lingware::generator {

struct Options {
  int max_depth = 12;                 // rule applications on any path
  std::size_t max_phrases = 4000;     // per goal
  std::size_t max_candidates = 2000;  // complete sentences before filtering
  bool filter = true;                 // keep only strings that parse back
  std::size_t max_edges = 50000;      // for the parses made while filtering
};

struct Result {
  std::vector<std::string> strings;
  std::size_t candidates = 0;
  bool exceeded = false;
};

/// Canonical form for comparing sentences: NFC, single spaces, no final
/// punctuation or leading inverted marks, first letter lower case.
inline std::string normalize_sentence(std::string_view s) {
  std::string t = sandhi::Sandhi::normalize(s);
  while (!t.empty() && (t.back() == '?' || t.back() == '!' || t.back() == '.')) {
    t.pop_back();
    t = text::trim(t);
  }
  for (std::string_view lead : {"¿", "¡"})
    while (t.rfind(lead, 0) == 0) t = text::trim(t.substr(lead.size()));
  return utf8::lower_first(t);
}

class Generator {
public:
  explicit Generator(const grammar::Grammar& g) : g_(g), parser_(g) {
    for (const auto& e : g_.generation_lexicon()) lex_by_cat_[e.cat].push_back(&e);
    for (std::size_t i = 0; i < 16; ++i) dsym_.push_back(sym("d" + std::to_string(i + 1)));
  }

  Result generate(const SemTerm& sem, const Options& opt = {}) const {
    Result res;
    auto goal = FeatureStructure::unify(g_.start(), FeatureStructure::parse("[sem=" + sem.fs_text() + "]"));
    if (!goal) return res;
    Search search(*this, opt);
    auto sentences = search.sentences(*goal, opt.max_depth);
    res.exceeded = search.exceeded || sentences.size() >= opt.max_candidates;
    std::set<std::string> seen;
    for (const auto& toks : sentences) {
      ++res.candidates;
      std::string s;
      try {
        s = utf8::upper_first(g_.sandhi().render(toks));
      } catch (const std::exception&) {
        continue;
      }
      if (!seen.insert(s).second) continue;
      if (opt.filter && !parses_to(s, sem, opt)) continue;
      res.strings.push_back(s);
    }
    return res;
  }

  std::vector<std::string> generate_strings(const SemTerm& sem, const Options& opt = {}) const {
    return generate(sem, opt).strings;
  }

  /// True when `text` is among the strings generated from one of its own
  /// readings. Throws std::invalid_argument when the text does not parse.
  bool roundtrip_check(std::string_view text, const Options& opt = {}) const {
    auto r = parser_.parse(text, {.max_edges = opt.max_edges});
    if (r.status != parser::Status::Ok) throw std::invalid_argument("roundtrip_check: text does not parse");
    std::string want = normalize_sentence(text);
    for (const auto& sem : r.semantics())
      for (const auto& s : generate(sem, opt).strings)
        if (normalize_sentence(s) == want) return true;
    return false;
  }

  const parser::Parser& parser() const { return parser_; }

private:
  // A token, or a placeholder for a suspended constituent (hole >= 0).
  struct Piece {
    int hole = -1;
    sandhi::LexToken tok;
  };
  using Pieces = std::vector<Piece>;

  // fs is [m=<category>, h0=<goal>, h1=...]: the constituent plus the
  // goals of constituents still to be generated, sharing preserved.
  struct Phrase {
    FeatureStructure fs;
    Pieces pieces;
    std::vector<std::pair<int, int>> holes;  // (hole id, depth)
  };

  bool parses_to(const std::string& s, const SemTerm& sem, const Options& opt) const {
    auto r = parser_.parse(s, {.max_edges = opt.max_edges});
    for (const auto& t : r.semantics())
      if (SemTerm::equivalent(t, sem)) return true;
    return false;
  }

  class Search {
  public:
    Search(const Generator& gen, const Options& opt) : G_(gen), g_(gen.g_), opt_(opt), m_(sym("m")), sem_(sym("sem")) {}

    bool exceeded = false;

    /// Complete sentences for a goal: top-level holes are forced.
    std::vector<sandhi::TokenSeq> sentences(const FeatureStructure& goal, int depth) {
      std::vector<sandhi::TokenSeq> out;
      for (const auto& ph : gen(goal, depth)) {
        State st{ph.fs, {ph.pieces}, {true}, ph.holes, next_id(ph.holes)};
        std::vector<State> done;
        resolve({st}, true, done);
        for (auto& d : done) {
          sandhi::TokenSeq toks;
          for (const auto& p : d.parts[0]) toks.push_back(p.tok);
          out.push_back(std::move(toks));
          if (out.size() >= opt_.max_candidates) return out;
        }
      }
      return out;
    }

    std::vector<Phrase> gen(const FeatureStructure& goal, int depth) {
      std::string key = goal.str() + "#" + std::to_string(depth);
      if (auto it = memo_.find(key); it != memo_.end()) return it->second;
      // Guard against re-entering an identical goal (unary cycles).
      if (!active_.insert(key).second) return {};
      std::vector<Phrase> out;
      std::string cat = category(goal);
      if (auto it = G_.lex_by_cat_.find(cat); it != G_.lex_by_cat_.end())
        for (const auto* e : it->second)
          if (auto u = FeatureStructure::unify(goal, e->fs))
            out.push_back({FeatureStructure::embed(std::span<const Symbol>(&m_, 1), *u), {{-1, sandhi::LexToken::make(e->form)}}, {}});
      if (depth > 0)
        for (auto r : g_.rules_by_mother(cat)) {
          const auto& rule = g_.rules()[r];
          auto inst = FeatureStructure::unify_path(rule.fs, std::span<const Symbol>(&m_, 1), goal);
          if (!inst) continue;
          expand(rule, std::move(*inst), depth, out);
          if (out.size() > opt_.max_phrases) {
            exceeded = true;
            break;
          }
        }
      active_.erase(key);
      memo_.emplace(key, out);
      return out;
    }

  private:
    struct State {
      FeatureStructure fs;
      std::vector<Pieces> parts;
      std::vector<bool> done;
      std::vector<std::pair<int, int>> holes;
      int next = 0;
    };

    static int next_id(const std::vector<std::pair<int, int>>& holes) {
      int n = 0;
      for (auto [h, d] : holes) n = std::max(n, h + 1);
      return n;
    }

    static Symbol hole_sym(int h) { return sym("h" + std::to_string(h)); }

    static std::string category(const FeatureStructure& fs) {
      auto c = fs.path({"cat"});
      if (!c) return {};
      auto a = fs.atom_value(*c);
      return a ? sym_name(*a) : std::string();
    }

    bool bound_at(const FeatureStructure& fs, Symbol top) const {
      Symbol path[2] = {top, sem_};
      auto n = fs.path(std::span<const Symbol>(path, 2));
      return n && fs.node(*n).kind != FeatureStructure::Kind::Any;
    }

    // Worth generating now: the semantics is known, or the category is
    // purely lexical and at most one word fits.
    bool ready(const FeatureStructure& fs, Symbol top) const {
      if (bound_at(fs, top)) return true;
      auto n = fs.follow(fs.root(), top);
      if (!n) return false;
      auto goal = fs.sub(*n);
      std::string cat = category(goal);
      if (!g_.rules_by_mother(cat).empty()) return false;
      auto it = G_.lex_by_cat_.find(cat);
      if (it == G_.lex_by_cat_.end()) return true;
      int fits = 0;
      for (const auto* e : it->second)
        if (FeatureStructure::unify(goal, e->fs) && ++fits > 1) return false;
      return true;
    }

    // Attach phrase `ph` at root attribute `at` of st.fs; its holes get
    // fresh ids. Returns the pieces with renumbered holes.
    std::optional<State> attach(const State& st, Symbol at, const Phrase& ph, Pieces& pieces) const {
      std::vector<std::pair<Symbol, FeatureStructure::NodeId>> parts;
      parts.push_back({at, *ph.fs.follow(ph.fs.root(), m_)});
      State s2{FeatureStructure(), st.parts, st.done, st.holes, st.next};
      std::map<int, int> renum;
      for (auto [h, d] : ph.holes) {
        int nh = s2.next++;
        renum[h] = nh;
        parts.push_back({hole_sym(nh), *ph.fs.follow(ph.fs.root(), hole_sym(h))});
        s2.holes.push_back({nh, d});
      }
      auto u = FeatureStructure::unify(st.fs, ph.fs.project(std::move(parts)));
      if (!u) return std::nullopt;
      s2.fs = std::move(*u);
      pieces = ph.pieces;
      for (auto& p : pieces)
        if (p.hole >= 0) p.hole = renum.at(p.hole);
      return s2;
    }

    // Generate pending holes whose semantics is known (all of them when
    // `force`), until none can move.
    void resolve(std::vector<State> states, bool force, std::vector<State>& out) {
      while (!states.empty()) {
        std::vector<State> next;
        for (auto& st : states) {
          int pick = -1;
          for (std::size_t i = 0; i < st.holes.size() && pick < 0; ++i)
            if (ready(st.fs, hole_sym(st.holes[i].first))) pick = static_cast<int>(i);
          // A constituent with no semantics of its own (an agreement
          // pronoun, say) gets its smallest realisations only.
          bool shallow = false;
          if (pick < 0 && force && !st.holes.empty()) pick = 0, shallow = true;
          if (pick < 0) {
            out.push_back(std::move(st));
            continue;
          }
          auto [h, depth] = st.holes[static_cast<std::size_t>(pick)];
          Symbol hs = hole_sym(h);
          State base = st;
          base.holes.erase(base.holes.begin() + pick);
          auto goal = st.fs.sub(*st.fs.follow(st.fs.root(), hs));
          std::size_t before = next.size();
          for (int d = shallow ? 0 : depth; d <= depth && next.size() == before; ++d)
            for (const auto& ph : gen(goal, d)) {
              Pieces pieces;
              auto s2 = attach(base, hs, ph, pieces);
              if (!s2) continue;
              for (auto& part : s2->parts)
                for (std::size_t i = 0; i < part.size(); ++i)
                  if (part[i].hole == h) {
                    part.erase(part.begin() + static_cast<std::ptrdiff_t>(i));
                    part.insert(part.begin() + static_cast<std::ptrdiff_t>(i), pieces.begin(), pieces.end());
                    break;
                  }
              next.push_back(std::move(*s2));
              if (next.size() > opt_.max_phrases) {
                exceeded = true;
                break;
              }
            }
        }
        states = std::move(next);
      }
    }

    void expand(const grammar::Rule& rule, FeatureStructure inst, int depth, std::vector<Phrase>& out) {
      std::size_t n = rule.daughters.size();
      std::vector<State> states;
      states.push_back({std::move(inst), std::vector<Pieces>(n), std::vector<bool>(n, false), {}, 0});
      for (std::size_t step = 0; step < n && !states.empty(); ++step) {
        std::vector<State> next;
        for (auto& st : states) {
          // Semantic heads first, then determinate words; anything else
          // is suspended as a hole.
          std::size_t k = n;
          for (std::size_t i = 0; i < n && k == n; ++i)
            if (!st.done[i] && bound_at(st.fs, G_.dsym_[i])) k = i;
          for (std::size_t i = 0; i < n && k == n; ++i)
            if (!st.done[i] && ready(st.fs, G_.dsym_[i])) k = i;
          if (k == n) {
            for (std::size_t i = 0; i < n; ++i) {
              if (st.done[i]) continue;
              int h = st.next++;
              auto node = st.fs.follow(st.fs.root(), G_.dsym_[i]);
              Symbol hs = hole_sym(h);
              auto u = FeatureStructure::unify(st.fs, FeatureStructure::embed(std::span<const Symbol>(&hs, 1), FeatureStructure::any()));
              std::pair<FeatureStructure::NodeId, FeatureStructure::NodeId> link{*u->follow(u->root(), hs), *u->follow(u->root(), G_.dsym_[i])};
              st.fs = *FeatureStructure::equate(*u, std::span(&link, 1));
              st.holes.push_back({h, depth - 1});
              st.parts[i] = {{h, {}}};
              st.done[i] = true;
            }
            next.push_back(std::move(st));
            continue;
          }
          auto node = st.fs.follow(st.fs.root(), G_.dsym_[k]);
          if (!node) continue;
          for (const auto& ph : gen(st.fs.sub(*node), depth - 1)) {
            Pieces pieces;
            auto s2 = attach(st, G_.dsym_[k], ph, pieces);
            if (!s2) continue;
            s2->parts[k] = std::move(pieces);
            s2->done[k] = true;
            next.push_back(std::move(*s2));
            if (next.size() > opt_.max_phrases) {
              exceeded = true;
              break;
            }
          }
        }
        // Holes whose semantics got bound are generated right away.
        states.clear();
        resolve(std::move(next), false, states);
      }
      for (auto& st : states) {
        std::vector<std::pair<Symbol, FeatureStructure::NodeId>> parts;
        parts.push_back({m_, *st.fs.follow(st.fs.root(), m_)});
        Phrase ph;
        for (auto [h, d] : st.holes) parts.push_back({hole_sym(h), *st.fs.follow(st.fs.root(), hole_sym(h))});
        ph.fs = st.fs.project(std::move(parts));
        ph.holes = st.holes;
        for (auto& p : st.parts) ph.pieces.insert(ph.pieces.end(), p.begin(), p.end());
        out.push_back(std::move(ph));
      }
    }

    const Generator& G_;
    const grammar::Grammar& g_;
    const Options& opt_;
    Symbol m_, sem_;
    std::unordered_map<std::string, std::vector<Phrase>> memo_;
    std::set<std::string> active_;
  };

  const grammar::Grammar& g_;
  parser::Parser parser_;
  std::map<std::string, std::vector<const grammar::LexEntry*>> lex_by_cat_;
  std::vector<Symbol> dsym_;
};

}  // namespace lingware::generator
