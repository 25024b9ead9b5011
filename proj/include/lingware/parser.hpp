#pragma once

// Bottom-up (left-corner triggered) chart parser over unification rules.
// Complete constituents with equal spans and equal structures are packed;
// empty rules (gaps) are seeded at every position.

#include <cstddef>
#include <deque>
#include <map>
#include <set>
#include <tuple>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

#include "lingware/featstruct.hpp"
#include "lingware/grammar.hpp"
#include "lingware/sandhi.hpp"
#include "lingware/semterm.hpp"

namespace lingware::parser {

struct Tree {
  std::string cat;
  std::string word;  // lexical leaves only
  std::string rule;  // empty for lexical leaves
  std::vector<Tree> kids;

  bool gap() const { return word.empty() && kids.empty(); }

  std::string str() const {
    std::string s = "[" + cat;
    if (!word.empty()) s += " " + word;
    for (const auto& k : kids) s += " " + k.str();
    return s + "]";
  }

  /// Categories of the empty constituents, left to right.
  std::vector<std::string> gaps() const {
    std::vector<std::string> out;
    collect_gaps(out);
    return out;
  }

private:
  void collect_gaps(std::vector<std::string>& out) const {
    if (gap()) out.push_back(cat);
    for (const auto& k : kids) k.collect_gaps(out);
  }
};

struct Analysis {
  FeatureStructure fs;  // root category
  SemTerm sem = SemTerm::var("X1");
  std::vector<Tree> trees;  // every derivation (bounded)
  sandhi::TokenSeq tokens;

  std::string feature(std::string_view attr) const {
    auto n = fs.path({attr});
    if (!n) return {};
    auto a = fs.atom_value(*n);
    return a ? sym_name(*a) : std::string();
  }
};

enum class Status { Ok, NoParse, ResourceExceeded };

inline const char* status_name(Status s) {
  switch (s) {
    case Status::Ok: return "ok";
    case Status::NoParse: return "no-parse";
    case Status::ResourceExceeded: return "resource-exceeded";
  }
  return "?";
}

struct ParseResult {
  Status status = Status::NoParse;
  std::vector<Analysis> analyses;
  std::vector<sandhi::Segmented> segmentations;
  std::size_t edges = 0;
  char terminal = 0;

  std::vector<SemTerm> semantics() const {
    std::vector<SemTerm> out;
    for (const auto& a : analyses) {
      bool dup = false;
      for (const auto& s : out) dup = dup || SemTerm::equivalent(s, a.sem);
      if (!dup) out.push_back(a.sem);
    }
    return out;
  }
};

struct Options {
  std::size_t max_edges = 50000;
  std::size_t max_trees = 32;
};

class Parser {
public:
  explicit Parser(const grammar::Grammar& g) : g_(g) {
    for (std::size_t i = 0; i < 16; ++i) dsym_.push_back(sym("d" + std::to_string(i + 1)));
  }

  std::vector<sandhi::Segmented> tokenize(std::string_view text) const {
    auto known = [this](std::string_view piece) {
      std::vector<std::string> out;
      if (g_.known(piece)) out.emplace_back(piece);
      return out;
    };
    return g_.sandhi().segment(text, known);
  }

  ParseResult parse(std::string_view text, const Options& opt = {}) const {
    ParseResult res;
    res.segmentations = tokenize(text);
    bool exceeded = false;
    for (const auto& seg : res.segmentations) {
      res.terminal = seg.terminal;
      ParseResult one = parse_tokens(seg.tokens, opt);
      res.edges += one.edges;
      if (one.status == Status::ResourceExceeded) exceeded = true;
      for (auto& a : one.analyses) add_analysis(res.analyses, std::move(a));
    }
    if (exceeded) res.status = Status::ResourceExceeded;
    else res.status = res.analyses.empty() ? Status::NoParse : Status::Ok;
    return res;
  }

  ParseResult parse_tokens(const sandhi::TokenSeq& tokens, const Options& opt = {}) const {
    Chart chart(*this, tokens, opt);
    return chart.run();
  }

  const grammar::Grammar& grammar() const { return g_; }

private:
  static void add_analysis(std::vector<Analysis>& out, Analysis a) {
    for (auto& o : out) {
      if (FeatureStructure::equal(o.fs, a.fs)) {
        for (auto& t : a.trees) {
          bool seen = false;
          for (const auto& u : o.trees) seen = seen || u.str() == t.str();
          if (!seen) o.trees.push_back(std::move(t));
        }
        return;
      }
    }
    out.push_back(std::move(a));
  }

  struct Derivation {
    int rule = -1;  // -1: lexical
    std::string word;
    std::vector<int> kids;
  };

  struct Item {
    int start, end;
    std::string cat;
    FeatureStructure fs;
    std::vector<Derivation> derivations;
  };

  struct Active {
    int start, end;
    int rule;
    std::size_t dot;
    FeatureStructure fs;  // rule instance
    std::vector<int> kids;
  };

  class Chart {
  public:
    Chart(const Parser& p, const sandhi::TokenSeq& tokens, const Options& opt)
        : p_(p), g_(p.g_), tokens_(tokens), opt_(opt) {}

    ParseResult run() {
      ParseResult res;
      int n = static_cast<int>(tokens_.size());
      for (int i = 0; i < n; ++i) {
        auto entries = g_.lookup(tokens_[static_cast<std::size_t>(i)].form);
        if (entries.empty()) return res;
        for (auto& e : entries) add_item(i, i + 1, e.cat, std::move(e.fs), {-1, tokens_[static_cast<std::size_t>(i)].form, {}});
      }
      for (int i = 0; i <= n; ++i)
        for (auto r : g_.empty_rules()) {
          const auto& rule = g_.rules()[r];
          auto m = rule.fs.path({"m"});
          add_item(i, i, rule.mother, rule.fs.sub(*m), {static_cast<int>(r), {}, {}});
        }
      while (!agenda_.empty()) {
        if (items_.size() + actives_.size() > opt_.max_edges) {
          res.status = Status::ResourceExceeded;
          res.edges = items_.size() + actives_.size();
          return res;
        }
        auto [is_item, id] = agenda_.front();
        agenda_.pop_front();
        if (is_item) process_item(id);
        else process_active(id);
      }
      res.edges = items_.size() + actives_.size();
      const std::string& start_cat = start_category();
      for (int id : by_start_[{0, start_cat}]) {
        const Item& it = items_[static_cast<std::size_t>(id)];
        if (it.end != n) continue;
        auto u = FeatureStructure::unify(it.fs, g_.start());
        if (!u) continue;
        Analysis a;
        a.fs = std::move(*u);
        auto sem = a.fs.path({"sem"});
        a.sem = sem ? SemTerm::from_fs(a.fs, *sem) : SemTerm::var("X1");
        a.trees = trees(id, opt_.max_trees);
        a.tokens = tokens_;
        add_analysis(res.analyses, std::move(a));
      }
      res.status = res.analyses.empty() ? Status::NoParse : Status::Ok;
      return res;
    }

  private:
    const std::string& start_category() {
      auto c = g_.start().path({"cat"});
      static const std::string none;
      if (!c) return none;
      start_cat_ = sym_name(*g_.start().atom_value(*c));
      return start_cat_;
    }

    void add_item(int s, int e, const std::string& cat, FeatureStructure fs, Derivation d) {
      auto& bucket = by_span_[{s, e, cat}];
      for (int id : bucket) {
        Item& it = items_[static_cast<std::size_t>(id)];
        if (FeatureStructure::equal(it.fs, fs)) {
          for (const auto& o : it.derivations)
            if (o.rule == d.rule && o.word == d.word && o.kids == d.kids) return;
          it.derivations.push_back(std::move(d));
          return;
        }
      }
      int id = static_cast<int>(items_.size());
      items_.push_back({s, e, cat, std::move(fs), {std::move(d)}});
      bucket.push_back(id);
      agenda_.push_back({true, id});
    }

    void add_active(Active a) {
      const auto& rule = g_.rules()[static_cast<std::size_t>(a.rule)];
      if (a.dot == rule.daughters.size()) {
        auto m = a.fs.path({"m"});
        add_item(a.start, a.end, rule.mother, a.fs.sub(*m), {a.rule, {}, a.kids});
        return;
      }
      int id = static_cast<int>(actives_.size());
      actives_.push_back(std::move(a));
      agenda_.push_back({false, id});
    }

    void extend(const Active& a, int item_id) {
      const Item& it = items_[static_cast<std::size_t>(item_id)];
      auto node = a.fs.path(std::span<const Symbol>(&p_.dsym_[a.dot], 1));
      std::optional<FeatureStructure> u =
          node ? FeatureStructure::unify_at(a.fs, *node, it.fs, it.fs.root())
               : FeatureStructure::unify_path(a.fs, std::span<const Symbol>(&p_.dsym_[a.dot], 1), it.fs);
      if (!u) return;
      Active b{a.start, it.end, a.rule, a.dot + 1, std::move(*u), a.kids};
      b.kids.push_back(item_id);
      add_active(std::move(b));
    }

    void process_item(int id) {
      // Copy the fields used: items_ may grow below.
      int s = items_[static_cast<std::size_t>(id)].start;
      std::string cat = items_[static_cast<std::size_t>(id)].cat;
      // Indexed only once processed, so each item/active pair meets once.
      by_start_[{s, cat}].push_back(id);
      for (auto r : g_.rules_by_first(cat)) {
        const auto& rule = g_.rules()[r];
        Active a{s, s, static_cast<int>(r), 0, rule.fs, {}};
        extend(a, id);
      }
      auto it = by_need_.find({s, cat});
      if (it == by_need_.end()) return;
      std::vector<int> waiting = it->second;
      for (int aid : waiting) {
        Active a = actives_[static_cast<std::size_t>(aid)];
        extend(a, id);
      }
    }

    void process_active(int id) {
      Active a = actives_[static_cast<std::size_t>(id)];
      const auto& rule = g_.rules()[static_cast<std::size_t>(a.rule)];
      by_need_[{a.end, rule.daughters[a.dot]}].push_back(id);
      auto it = by_start_.find({a.end, rule.daughters[a.dot]});
      if (it == by_start_.end()) return;
      std::vector<int> ready = it->second;
      for (int iid : ready) extend(a, iid);
    }

    std::vector<Tree> trees(int id, std::size_t limit) {
      std::vector<Tree> out;
      // A packed item may derive itself through unary or empty material;
      // such cyclic derivations add no new trees.
      if (!on_path_.insert(id).second) return out;
      const Item& it = items_[static_cast<std::size_t>(id)];
      std::set<std::string> seen;
      for (const auto& d : it.derivations) {
        if (out.size() >= limit) break;
        if (d.rule < 0) {
          Tree t{it.cat, d.word, {}, {}};
          if (seen.insert(t.str()).second) out.push_back(std::move(t));
          continue;
        }
        const std::string& rid = g_.rules()[static_cast<std::size_t>(d.rule)].id;
        std::vector<std::vector<Tree>> kid_trees;
        for (int k : d.kids) kid_trees.push_back(trees(k, limit));
        std::vector<std::vector<Tree>> combos{{}};
        for (const auto& kt : kid_trees) {
          std::vector<std::vector<Tree>> next;
          for (const auto& c : combos)
            for (const auto& t : kt) {
              if (next.size() >= limit) break;
              auto c2 = c;
              c2.push_back(t);
              next.push_back(std::move(c2));
            }
          combos = std::move(next);
        }
        for (auto& c : combos) {
          if (out.size() >= limit) break;
          Tree t{it.cat, {}, rid, std::move(c)};
          if (seen.insert(t.str()).second) out.push_back(std::move(t));
        }
      }
      on_path_.erase(id);
      return out;
    }

    const Parser& p_;
    const grammar::Grammar& g_;
    const sandhi::TokenSeq& tokens_;
    const Options& opt_;
    std::string start_cat_;
    std::set<int> on_path_;
    std::vector<Item> items_;
    std::vector<Active> actives_;
    std::deque<std::pair<bool, int>> agenda_;
    std::map<std::tuple<int, int, std::string>, std::vector<int>> by_span_;
    std::map<std::pair<int, std::string>, std::vector<int>> by_start_;
    std::map<std::pair<int, std::string>, std::vector<int>> by_need_;
  };

  const grammar::Grammar& g_;
  std::vector<Symbol> dsym_;
};

}  // namespace lingware::parser
