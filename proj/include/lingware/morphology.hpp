#pragma once

// Morphotax and word-level analysis/synthesis on top of the two-level
// spelling rules.
//
// Morphotax file:
//
//   default stem [spelling_type=plain]
//   default affix [muet=n]
//   affix +e: vaff[muet=y, tense=pres, agr=[per={1,3}, num=sg]]
//   stem chameau: N[gen=masc]              (stems normally come from the lexicon)
//   prod v_fin: V ?M:[agr=?A, tense=?T] --> V ?M vaff[agr=?A, tense=?T]
//
// Variables are shared across the whole production.

#include <deque>
#include <map>
#include <optional>
#include <set>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "lingware/featstruct.hpp"
#include "lingware/semterm.hpp"
#include "lingware/textutil.hpp"
#include "lingware/twolevel.hpp"
#include "lingware/unicode.hpp"

namespace lingware::morph {

class MorphError : public std::runtime_error {
public:
  using std::runtime_error::runtime_error;
};

struct MorphemeEntry {
  std::string form;       // lexical form, NFC; affixes start with '+'
  std::string category;   // major category (V, N, vaff, ...)
  FeatureStructure features;
  std::optional<SemTerm> sem;  // affix contribution, stored under `sem`

  bool is_affix() const { return !form.empty() && form[0] == '+'; }
};

struct ProductionRule {
  std::string name;
  std::string mother;
  std::vector<std::string> daughters;  // daughters[0] is the stem
  FeatureStructure equations;          // [m=.., d1=.., d2=..]
  std::string source;
};

struct WordAnalysis {
  std::vector<const MorphemeEntry*> morphemes;
  std::string rule;
  std::string category;
  FeatureStructure features;

  std::string lexical() const {
    std::string s;
    for (const auto* m : morphemes) s += m->form;
    return s;
  }
};

class Morphology {
public:
  Morphology() : spelling_(twolevel::CompiledSpelling::compile({}, {})) {}
  explicit Morphology(twolevel::CompiledSpelling spelling) : spelling_(std::move(spelling)) {}

  const twolevel::CompiledSpelling& spelling() const { return spelling_; }
  void set_spelling(twolevel::CompiledSpelling s) { spelling_ = std::move(s); }

  const MorphemeEntry& add_morpheme(MorphemeEntry e) {
    e.form = utf8::nfc(e.form);
    if (e.sem) {
      auto with = FeatureStructure::unify(e.features, FeatureStructure::parse("[sem=" + e.sem->fs_text() + "]"));
      if (!with) throw MorphError("affix " + e.form + ": semantics clash with features");
      e.features = std::move(*with);
    }
    entries_.push_back(std::move(e));
    const MorphemeEntry* p = &entries_.back();
    (p->is_affix() ? affix_trie_ : stem_trie_).insert(utf8::decode(p->form), p);
    return *p;
  }

  void add_production(ProductionRule r) {
    for (const auto& p : productions_)
      if (p.name == r.name) throw MorphError("duplicate production '" + r.name + "'");
    max_affixes_ = std::max(max_affixes_, r.daughters.size() - 1);
    productions_.push_back(std::move(r));
  }

  void set_default(bool affix, FeatureStructure fs) { (affix ? affix_default_ : stem_default_) = std::move(fs); }

  const std::vector<ProductionRule>& productions() const { return productions_; }
  const std::deque<MorphemeEntry>& entries() const { return entries_; }

  std::vector<const MorphemeEntry*> find(std::string_view form) const {
    std::vector<const MorphemeEntry*> out;
    std::string f = utf8::nfc(form);
    for (const auto& e : entries_)
      if (e.form == f) out.push_back(&e);
    return out;
  }

  /// Features used for spelling-rule constraints: the morpheme's own
  /// features completed with the stem/affix defaults where unspecified.
  FeatureStructure spelling_features(const MorphemeEntry& m) const {
    const FeatureStructure& def = m.is_affix() ? affix_default_ : stem_default_;
    FeatureStructure out = m.features;
    if (def.kind() != FeatureStructure::Kind::Complex || out.kind() != FeatureStructure::Kind::Complex) return out;
    for (const auto& arc : def.node(def.root()).arcs) {
      if (out.follow(out.root(), arc.attr)) continue;
      Symbol a = arc.attr;
      auto u = FeatureStructure::unify_path(out, std::span<const Symbol>(&a, 1), def.sub(arc.target));
      if (u) out = std::move(*u);
    }
    return out;
  }

  /// All analyses of a morpheme sequence licensed by a production rule.
  std::vector<WordAnalysis> check_morphotax(std::span<const MorphemeEntry* const> ms) const {
    std::vector<WordAnalysis> out;
    if (ms.empty()) return out;
    for (const auto& r : productions_) {
      if (r.daughters.size() != ms.size()) continue;
      bool cats = true;
      for (std::size_t i = 0; i < ms.size() && cats; ++i) cats = r.daughters[i] == ms[i]->category;
      if (!cats || ms[0]->is_affix()) continue;
      std::optional<FeatureStructure> fs = r.equations;
      for (std::size_t i = 0; i < ms.size() && fs; ++i) {
        Symbol d = sym("d" + std::to_string(i + 1));
        fs = FeatureStructure::unify_path(*fs, std::span<const Symbol>(&d, 1), ms[i]->features);
      }
      if (!fs) continue;
      auto m = fs->path({"m"});
      WordAnalysis wa;
      wa.morphemes.assign(ms.begin(), ms.end());
      wa.rule = r.name;
      wa.category = r.mother;
      wa.features = m ? fs->sub(*m) : FeatureStructure();
      out.push_back(std::move(wa));
    }
    return out;
  }

  /// Surface strings for a morpheme sequence. Throws if no production
  /// admits the sequence.
  std::vector<std::string> synthesize(std::span<const MorphemeEntry* const> ms) const {
    if (check_morphotax(ms).empty()) throw MorphError("no production admits " + join_forms(ms));
    return realize(ms);
  }

  /// Surfaces for a lexical string such as "pay+e": every reading of each
  /// piece that some production admits. Empty when none does.
  std::vector<std::string> synthesize_lexical(std::string_view lexical) const {
    std::vector<std::string> parts;
    std::string lex = utf8::nfc(lexical);
    std::size_t b = 0;
    for (std::size_t i = 1; i <= lex.size(); ++i)
      if (i == lex.size() || lex[i] == '+') {
        parts.push_back(lex.substr(b, i - b));
        b = i;
      }
    std::set<std::string> out;
    std::vector<const MorphemeEntry*> seq;
    auto rec = [&](auto& self, std::size_t i) -> void {
      if (i == parts.size()) {
        if (!check_morphotax(seq).empty())
          for (auto& s : realize(seq)) out.insert(s);
        return;
      }
      for (const auto* e : find(parts[i])) {
        seq.push_back(e);
        self(self, i + 1);
        seq.pop_back();
      }
    };
    if (!lex.empty()) rec(rec, 0);
    return {out.begin(), out.end()};
  }

  /// Spelling only, without the morphotax check.
  std::vector<std::string> realize(std::span<const MorphemeEntry* const> ms) const {
    std::vector<FeatureStructure> feats;
    feats.reserve(ms.size());
    std::vector<twolevel::Segment> segs;
    for (const auto* m : ms) feats.push_back(spelling_features(*m));
    for (std::size_t i = 0; i < ms.size(); ++i) segs.push_back({utf8::decode(ms[i]->form), &feats[i]});
    std::set<std::string> uniq;
    for (const auto& a : spelling_.realize(segs)) uniq.insert(a.surface());
    return {uniq.begin(), uniq.end()};
  }

  /// Every morpheme sequence (with its morphotax result) whose synthesis
  /// yields `surface`.
  std::vector<WordAnalysis> analyze(std::string_view surface_text) const {
    std::u32string surface = utf8::decode(utf8::nfc(surface_text));
    std::vector<WordAnalysis> out;
    std::vector<const MorphemeEntry*> seq;
    std::vector<twolevel::SymbolPair> pairs;
    search(surface, 0, &stem_trie_, seq, pairs, out);
    return out;
  }

  static std::string join_forms(std::span<const MorphemeEntry* const> ms) {
    std::string s;
    for (const auto* m : ms) s += m->form;
    return s;
  }

private:
  struct Trie {
    std::map<char32_t, std::unique_ptr<Trie>> next;
    std::vector<const MorphemeEntry*> here;

    void insert(const std::u32string& key, const MorphemeEntry* e) {
      Trie* t = this;
      for (char32_t c : key) {
        auto& n = t->next[c];
        if (!n) n = std::make_unique<Trie>();
        t = n.get();
      }
      t->here.push_back(e);
    }
  };

  // Walks the current trie node, pairing each lexical symbol with a
  // feasible surface symbol consistent with the input.
  void search(const std::u32string& surface, std::size_t spos, const Trie* node,
              std::vector<const MorphemeEntry*>& seq, std::vector<twolevel::SymbolPair>& pairs,
              std::vector<WordAnalysis>& out) const {
    for (const MorphemeEntry* e : node->here) {
      seq.push_back(e);
      if (spos == surface.size()) finish(seq, pairs, out);
      if (seq.size() <= max_affixes_) search(surface, spos, &affix_trie_, seq, pairs, out);
      seq.pop_back();
    }
    for (const auto& [lex, child] : node->next) {
      for (char32_t s : spelling_.alphabet().surfaces(lex)) {
        if (s != twolevel::kNull && (spos >= surface.size() || surface[spos] != s)) continue;
        pairs.push_back({lex, s});
        search(surface, spos + (s == twolevel::kNull ? 0 : 1), child.get(), seq, pairs, out);
        pairs.pop_back();
      }
    }
  }

  void finish(const std::vector<const MorphemeEntry*>& seq, const std::vector<twolevel::SymbolPair>& pairs,
              std::vector<WordAnalysis>& out) const {
    auto results = check_morphotax(seq);
    if (results.empty()) return;
    std::vector<FeatureStructure> feats;
    feats.reserve(seq.size());
    std::vector<twolevel::Segment> segs;
    twolevel::Alignment a;
    a.pairs = pairs;
    for (std::size_t i = 0; i < seq.size(); ++i) {
      feats.push_back(spelling_features(*seq[i]));
      auto lex = utf8::decode(seq[i]->form);
      segs.push_back({lex, &feats[i]});
      a.owner.insert(a.owner.end(), lex.size(), static_cast<int>(i));
    }
    if (!spelling_.admissible(a, segs)) return;
    for (auto& r : results) {
      bool dup = false;
      for (const auto& o : out)
        if (o.morphemes == r.morphemes && o.rule == r.rule) dup = true;
      if (!dup) out.push_back(std::move(r));
    }
  }

  twolevel::CompiledSpelling spelling_;
  std::deque<MorphemeEntry> entries_;
  Trie stem_trie_, affix_trie_;
  std::vector<ProductionRule> productions_;
  std::size_t max_affixes_ = 0;
  FeatureStructure stem_default_, affix_default_;
};

// ---------------------------------------------------------------------------
// Morphotax file reader

namespace detail {

inline std::string fs_or_empty(const std::string& s) { return s.empty() ? "_" : s; }

}  // namespace detail

inline void read_morphotax(Morphology& morph, std::string_view content, const std::string& origin = "<morphotax>") {
  for (const auto& line : text::logical_lines(content)) {
    auto fail = [&](const std::string& msg) {
      return MorphError(origin + ":" + std::to_string(line.number) + ": " + msg);
    };
    const std::string& t = line.text;
    try {
      if (text::starts_with_word(t, "default")) {
        auto rest = text::trim(t.substr(7));
        bool affix = text::starts_with_word(rest, "affix");
        if (!affix && !text::starts_with_word(rest, "stem")) throw fail("expected 'default stem' or 'default affix'");
        morph.set_default(affix, FeatureStructure::parse(text::trim(rest.substr(affix ? 5 : 4))));
      } else if (text::starts_with_word(t, "affix") || text::starts_with_word(t, "stem")) {
        bool affix = t[0] == 'a';
        auto body = text::trim(t.substr(affix ? 5 : 4));
        std::string sem;
        if (auto s = body.find("; sem:"); s != std::string::npos) {
          sem = text::trim(body.substr(s + 6));
          body = text::trim(body.substr(0, s));
        }
        auto colon = body.find(':');
        if (colon == std::string::npos) throw fail("expected 'form: Category'");
        MorphemeEntry e;
        e.form = text::trim(body.substr(0, colon));
        if (affix != (!e.form.empty() && e.form[0] == '+'))
          throw fail(affix ? "affix forms start with '+'" : "stem forms must not start with '+'");
        auto cats = text::split_categories(body.substr(colon + 1));
        if (cats.size() != 1) throw fail("expected exactly one category");
        e.category = cats[0].cat;
        e.features = cats[0].fs.empty() ? FeatureStructure() : FeatureStructure::parse(cats[0].fs);
        if (!sem.empty()) e.sem = SemTerm::parse(sem);
        morph.add_morpheme(std::move(e));
      } else if (text::starts_with_word(t, "prod")) {
        auto body = text::trim(t.substr(4));
        auto colon = body.find(':');
        auto arrow = body.find("-->");
        if (colon == std::string::npos || arrow == std::string::npos || arrow < colon)
          throw fail("expected 'prod NAME: Mother --> Stem Affix...'");
        ProductionRule r;
        r.name = text::trim(body.substr(0, colon));
        r.source = t;
        auto lhs = text::split_categories(body.substr(colon + 1, arrow - colon - 1));
        auto rhs = text::split_categories(body.substr(arrow + 3));
        if (lhs.size() != 1) throw fail("production '" + r.name + "' needs one mother");
        if (rhs.empty()) throw fail("production '" + r.name + "' needs a stem daughter");
        r.mother = lhs[0].cat;
        std::string eq = "[m=" + detail::fs_or_empty(lhs[0].fs);
        for (std::size_t i = 0; i < rhs.size(); ++i) {
          r.daughters.push_back(rhs[i].cat);
          eq += ", d" + std::to_string(i + 1) + "=" + detail::fs_or_empty(rhs[i].fs);
        }
        r.equations = FeatureStructure::parse(eq + "]");
        morph.add_production(std::move(r));
      } else {
        throw fail("unknown directive");
      }
    } catch (const SyntaxError& e) {
      throw fail(e.what());
    } catch (const MorphError& e) {
      std::string m = e.what();
      if (m.rfind(origin, 0) == 0) throw;
      throw fail(m);
    }
  }
}

}  // namespace lingware::morph
