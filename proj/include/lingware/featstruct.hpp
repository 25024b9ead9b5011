#pragma once

// Feature structures: rooted acyclic attribute-value graphs with
// reentrancy and disjunctive atomic leaves, plus non-destructive
// unification, subsumption and a bracketed text syntax.
//
//   [num=sg, agr=?X, subj=[agr=?X], muet={y,fut_cond_e}]
//
// `?Name` marks a shared node; `?Name:value` shares and constrains it;
// `_` is an anonymous unconstrained node.

#include <algorithm>
#include <cstdint>
#include <deque>
#include <functional>
#include <map>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <string_view>
#include <unordered_map>
#include <utility>
#include <vector>

#include "lingware/symbol.hpp"

namespace lingware {

/// Parse failure in one of the textual formats, with a byte offset into
/// the text that was being read.
class SyntaxError : public std::runtime_error {
public:
  SyntaxError(const std::string& what, std::size_t pos)
      : std::runtime_error(what + " at offset " + std::to_string(pos)), position_(pos) {}
  std::size_t position() const noexcept { return position_; }

private:
  std::size_t position_;
};

class FeatureStructure {
public:
  using NodeId = std::uint32_t;

  enum class Kind : std::uint8_t {
    Any,      // unconstrained; unifies with anything
    Atom,     // non-empty set of symbols (disjunction)
    Complex,  // attribute -> node map; `[]` is the empty complex node
  };

  struct Arc {
    Symbol attr;
    NodeId target;
  };

  struct Node {
    Kind kind = Kind::Any;
    std::vector<Symbol> atoms;  // sorted, unique; Atom nodes only
    std::vector<Arc> arcs;      // sorted by attr; Complex nodes only
  };

  /// The empty complex structure `[]`.
  FeatureStructure() : nodes_(1) { nodes_[0].kind = Kind::Complex; }

  static FeatureStructure any() {
    FeatureStructure fs;
    fs.nodes_[0].kind = Kind::Any;
    return fs;
  }

  static FeatureStructure atom(Symbol s) { return atoms({s}); }
  static FeatureStructure atom(std::string_view s) { return atom(sym(s)); }

  static FeatureStructure atoms(std::vector<Symbol> values) {
    if (values.empty()) throw std::invalid_argument("atomic value set must be non-empty");
    std::sort(values.begin(), values.end());
    values.erase(std::unique(values.begin(), values.end()), values.end());
    FeatureStructure fs;
    fs.nodes_[0].kind = Kind::Atom;
    fs.nodes_[0].atoms = std::move(values);
    return fs;
  }

  static FeatureStructure parse(std::string_view text);
  std::string str() const;

  NodeId root() const noexcept { return 0; }
  std::size_t size() const noexcept { return nodes_.size(); }
  const Node& node(NodeId id) const { return nodes_[id]; }
  Kind kind(NodeId id = 0) const { return nodes_[id].kind; }

  std::optional<NodeId> follow(NodeId from, Symbol attr) const {
    const auto& arcs = nodes_[from].arcs;
    auto it = std::lower_bound(arcs.begin(), arcs.end(), attr,
                               [](const Arc& a, Symbol s) { return a.attr < s; });
    if (it == arcs.end() || it->attr != attr) return std::nullopt;
    return it->target;
  }

  std::optional<NodeId> path(std::span<const Symbol> attrs, NodeId from = 0) const {
    NodeId cur = from;
    for (Symbol a : attrs) {
      auto next = follow(cur, a);
      if (!next) return std::nullopt;
      cur = *next;
    }
    return cur;
  }

  std::optional<NodeId> path(std::initializer_list<std::string_view> attrs, NodeId from = 0) const {
    std::vector<Symbol> syms;
    for (auto a : attrs) syms.push_back(sym(a));
    return path(std::span<const Symbol>(syms), from);
  }

  /// Single atom at `id`, if the node is an atom set of size one.
  std::optional<Symbol> atom_value(NodeId id) const {
    const auto& n = nodes_[id];
    if (n.kind != Kind::Atom || n.atoms.size() != 1) return std::nullopt;
    return n.atoms.front();
  }

  /// Copy of the substructure rooted at `id`, sharing preserved.
  FeatureStructure sub(NodeId id) const;

  /// New structure `[a1=n1, a2=n2, ...]` over nodes of this one, sharing
  /// between them preserved.
  FeatureStructure project(std::vector<std::pair<Symbol, NodeId>> parts) const;

  /// Most general structure subsumed by both, or nullopt on failure.
  static std::optional<FeatureStructure> unify(const FeatureStructure& a, const FeatureStructure& b) {
    return unify_at(a, a.root(), b, b.root());
  }

  /// Unify node `an` of `a` with node `bn` of `b`; the result is rooted at
  /// a's root. Inputs are untouched.
  static std::optional<FeatureStructure> unify_at(const FeatureStructure& a, NodeId an,
                                                  const FeatureStructure& b, NodeId bn);

  /// Unify `b` into `a` at the end of `path` (created if missing).
  static std::optional<FeatureStructure> unify_path(const FeatureStructure& a,
                                                    std::span<const Symbol> path,
                                                    const FeatureStructure& b) {
    if (auto n = a.path(path)) return unify_at(a, *n, b, b.root());
    return unify(a, embed(path, b));
  }

  /// `[p1=[p2=...[pn=b]]]`
  static FeatureStructure embed(std::span<const Symbol> path, const FeatureStructure& b);

  /// Merge pairs of nodes inside one structure (used by the reader for
  /// repeated `?X:value` constraints).
  static std::optional<FeatureStructure> equate(const FeatureStructure& fs,
                                                std::span<const std::pair<NodeId, NodeId>> pairs);

  /// True iff every instantiation of b is one of a.
  static bool subsumes(const FeatureStructure& a, const FeatureStructure& b);

  /// Isomorphism, i.e. equality modulo variable renaming.
  static bool equal(const FeatureStructure& a, const FeatureStructure& b);

  friend bool operator==(const FeatureStructure& a, const FeatureStructure& b) { return equal(a, b); }

  /// Hash consistent with equal() within one process.
  std::size_t hash() const;

  /// Number of nodes reachable from the root that are shared (in-degree > 1).
  std::vector<std::uint32_t> in_degrees() const;

  /// Build directly from nodes (root at 0). Validates the invariants.
  static FeatureStructure from_nodes(std::vector<Node> nodes) {
    FeatureStructure fs;
    fs.nodes_ = std::move(nodes);
    fs.validate();
    return fs;
  }

  void validate() const;

  /// Like from_nodes() but without validation or sorting; callers must
  /// validate afterwards.
  static FeatureStructure from_nodes_unchecked(std::vector<Node> nodes) {
    FeatureStructure fs;
    fs.nodes_ = std::move(nodes);
    return fs;
  }

private:
  struct Engine;

  std::vector<Node> nodes_;
};

// ---------------------------------------------------------------------------
// Unification engine: union-find over the disjoint union of the input
// node sets, then a copy-out of everything reachable from the root with
// cycle detection.

struct FeatureStructure::Engine {
  using Kind = FeatureStructure::Kind;
  using Arc = FeatureStructure::Arc;

  struct ArcList {
    const Arc* ptr = nullptr;
    std::uint32_t size = 0;
    std::uint32_t offset = 0;  // added to every target
  };

  std::vector<NodeId> parent;
  std::vector<Kind> kind;
  std::vector<const std::vector<Symbol>*> atoms;
  std::vector<ArcList> arcs;
  std::deque<std::vector<Symbol>> atom_pool;
  std::deque<std::vector<Arc>> arc_pool;
  std::vector<std::pair<NodeId, NodeId>> stack;
  std::vector<std::int64_t> out_id;
  std::vector<std::uint8_t> state;
  std::vector<Arc> scratch;

  void load(std::span<const FeatureStructure* const> parts) {
    std::size_t total = 0;
    for (auto* p : parts) total += p->nodes_.size();
    parent.resize(total);
    kind.resize(total);
    atoms.resize(total);
    arcs.resize(total);
    atom_pool.clear();
    arc_pool.clear();
    stack.clear();
    std::uint32_t off = 0;
    for (auto* p : parts) {
      for (std::size_t i = 0; i < p->nodes_.size(); ++i) {
        const auto& n = p->nodes_[i];
        parent[off + i] = static_cast<NodeId>(off + i);
        kind[off + i] = n.kind;
        atoms[off + i] = &n.atoms;
        arcs[off + i] = ArcList{n.arcs.data(), static_cast<std::uint32_t>(n.arcs.size()), off};
      }
      off += static_cast<std::uint32_t>(p->nodes_.size());
    }
  }

  NodeId find(NodeId x) {
    while (parent[x] != x) {
      parent[x] = parent[parent[x]];
      x = parent[x];
    }
    return x;
  }

  bool merge(NodeId x0, NodeId y0) {
    stack.emplace_back(x0, y0);
    while (!stack.empty()) {
      auto [a, b] = stack.back();
      stack.pop_back();
      NodeId x = find(a), y = find(b);
      if (x == y) continue;
      Kind kx = kind[x], ky = kind[y];
      if (ky == Kind::Any) { parent[y] = x; continue; }
      if (kx == Kind::Any) { parent[x] = y; continue; }
      if (kx != ky) return false;
      if (kx == Kind::Atom) {
        const auto& ax = *atoms[x];
        const auto& ay = *atoms[y];
        if (ax == ay) { parent[y] = x; continue; }
        std::vector<Symbol> both;
        std::set_intersection(ax.begin(), ax.end(), ay.begin(), ay.end(), std::back_inserter(both));
        if (both.empty()) return false;
        atom_pool.push_back(std::move(both));
        atoms[x] = &atom_pool.back();
        parent[y] = x;
        continue;
      }
      // Complex/Complex: pair up shared attributes, adopt the rest.
      ArcList lx = arcs[x], ly = arcs[y];
      std::uint32_t i = 0, j = 0;
      bool adds = false;
      while (i < lx.size && j < ly.size) {
        Symbol sx = lx.ptr[i].attr, sy = ly.ptr[j].attr;
        if (sx == sy) {
          stack.emplace_back(lx.ptr[i].target + lx.offset, ly.ptr[j].target + ly.offset);
          ++i; ++j;
        } else if (sx < sy) {
          ++i;
        } else {
          adds = true;
          ++j;
        }
      }
      if (j < ly.size) adds = true;
      if (adds) {
        scratch.clear();
        i = 0; j = 0;
        while (i < lx.size || j < ly.size) {
          if (j >= ly.size || (i < lx.size && lx.ptr[i].attr < ly.ptr[j].attr)) {
            scratch.push_back({lx.ptr[i].attr, lx.ptr[i].target + lx.offset});
            ++i;
          } else if (i >= lx.size || ly.ptr[j].attr < lx.ptr[i].attr) {
            scratch.push_back({ly.ptr[j].attr, ly.ptr[j].target + ly.offset});
            ++j;
          } else {
            scratch.push_back({lx.ptr[i].attr, lx.ptr[i].target + lx.offset});
            ++i; ++j;
          }
        }
        arc_pool.push_back(scratch);
        const auto& stored = arc_pool.back();
        arcs[x] = ArcList{stored.data(), static_cast<std::uint32_t>(stored.size()), 0};
      }
      parent[y] = x;
    }
    return true;
  }

  // Copy out; returns false on a cycle.
  bool build(NodeId rep, std::vector<Node>& out, NodeId& id_out) {
    if (state[rep] == 2) { id_out = static_cast<NodeId>(out_id[rep]); return true; }
    if (state[rep] == 1) return false;
    state[rep] = 1;
    auto id = static_cast<NodeId>(out.size());
    out.emplace_back();
    out_id[rep] = id;
    out[id].kind = kind[rep];
    if (kind[rep] == Kind::Atom) {
      out[id].atoms = *atoms[rep];
    } else if (kind[rep] == Kind::Complex) {
      ArcList l = arcs[rep];
      std::vector<Arc> built;
      built.reserve(l.size);
      for (std::uint32_t k = 0; k < l.size; ++k) {
        NodeId child;
        if (!build(find(l.ptr[k].target + l.offset), out, child)) return false;
        built.push_back({l.ptr[k].attr, child});
      }
      out[id].arcs = std::move(built);
    }
    state[rep] = 2;
    id_out = id;
    return true;
  }

  std::optional<FeatureStructure> extract(NodeId root) {
    out_id.assign(parent.size(), -1);
    state.assign(parent.size(), 0);
    FeatureStructure fs;
    fs.nodes_.clear();
    NodeId r;
    if (!build(find(root), fs.nodes_, r)) return std::nullopt;
    return fs;
  }

  static Engine& local() {
    thread_local Engine e;
    return e;
  }
};

inline std::optional<FeatureStructure> FeatureStructure::unify_at(const FeatureStructure& a, NodeId an,
                                                                  const FeatureStructure& b, NodeId bn) {
  auto& e = Engine::local();
  const FeatureStructure* parts[] = {&a, &b};
  e.load(parts);
  auto off = static_cast<NodeId>(a.nodes_.size());
  if (!e.merge(an, off + bn)) return std::nullopt;
  return e.extract(a.root());
}

inline std::optional<FeatureStructure> FeatureStructure::equate(
    const FeatureStructure& fs, std::span<const std::pair<NodeId, NodeId>> pairs) {
  auto& e = Engine::local();
  const FeatureStructure* parts[] = {&fs};
  e.load(parts);
  for (auto [x, y] : pairs)
    if (!e.merge(x, y)) return std::nullopt;
  return e.extract(fs.root());
}

inline FeatureStructure FeatureStructure::embed(std::span<const Symbol> path, const FeatureStructure& b) {
  if (path.empty()) return b;
  FeatureStructure out;
  out.nodes_.clear();
  auto depth = static_cast<NodeId>(path.size());
  for (NodeId i = 0; i < depth; ++i) {
    Node n;
    n.kind = Kind::Complex;
    n.arcs.push_back({path[i], i + 1});
    out.nodes_.push_back(std::move(n));
  }
  for (const auto& n : b.nodes_) {
    Node c = n;
    for (auto& arc : c.arcs) arc.target += depth;
    out.nodes_.push_back(std::move(c));
  }
  return out;
}

inline FeatureStructure FeatureStructure::sub(NodeId id) const {
  if (id == 0) return *this;
  std::vector<std::int64_t> map(nodes_.size(), -1);
  FeatureStructure out;
  out.nodes_.clear();
  std::function<NodeId(NodeId)> copy = [&](NodeId n) -> NodeId {
    if (map[n] >= 0) return static_cast<NodeId>(map[n]);
    auto nid = static_cast<NodeId>(out.nodes_.size());
    map[n] = nid;
    out.nodes_.push_back(Node{nodes_[n].kind, nodes_[n].atoms, {}});
    std::vector<Arc> arcs;
    arcs.reserve(nodes_[n].arcs.size());
    for (const auto& a : nodes_[n].arcs) arcs.push_back({a.attr, copy(a.target)});
    out.nodes_[nid].arcs = std::move(arcs);
    return nid;
  };
  copy(id);
  return out;
}

inline FeatureStructure FeatureStructure::project(std::vector<std::pair<Symbol, NodeId>> parts) const {
  std::sort(parts.begin(), parts.end());
  std::vector<std::int64_t> map(nodes_.size(), -1);
  FeatureStructure out;
  std::function<NodeId(NodeId)> copy = [&](NodeId n) -> NodeId {
    if (map[n] >= 0) return static_cast<NodeId>(map[n]);
    auto nid = static_cast<NodeId>(out.nodes_.size());
    map[n] = nid;
    out.nodes_.push_back(Node{nodes_[n].kind, nodes_[n].atoms, {}});
    std::vector<Arc> arcs;
    arcs.reserve(nodes_[n].arcs.size());
    for (const auto& a : nodes_[n].arcs) arcs.push_back({a.attr, copy(a.target)});
    out.nodes_[nid].arcs = std::move(arcs);
    return nid;
  };
  std::vector<Arc> top;
  for (const auto& [attr, n] : parts) top.push_back({attr, copy(n)});
  out.nodes_[0].arcs = std::move(top);
  return out;
}

inline bool FeatureStructure::subsumes(const FeatureStructure& a, const FeatureStructure& b) {
  std::vector<std::int64_t> map(a.nodes_.size(), -1);
  std::vector<std::pair<NodeId, NodeId>> stack{{a.root(), b.root()}};
  while (!stack.empty()) {
    auto [x, y] = stack.back();
    stack.pop_back();
    if (map[x] >= 0) {
      if (map[x] != static_cast<std::int64_t>(y)) return false;
      continue;
    }
    map[x] = y;
    const Node& nx = a.nodes_[x];
    const Node& ny = b.nodes_[y];
    switch (nx.kind) {
      case Kind::Any:
        break;
      case Kind::Atom:
        if (ny.kind != Kind::Atom) return false;
        if (!std::includes(nx.atoms.begin(), nx.atoms.end(), ny.atoms.begin(), ny.atoms.end())) return false;
        break;
      case Kind::Complex:
        if (ny.kind != Kind::Complex) return false;
        for (const auto& arc : nx.arcs) {
          auto t = b.follow(y, arc.attr);
          if (!t) return false;
          stack.emplace_back(arc.target, *t);
        }
        break;
    }
  }
  return true;
}

inline bool FeatureStructure::equal(const FeatureStructure& a, const FeatureStructure& b) {
  if (a.nodes_.size() != b.nodes_.size()) return false;
  std::vector<std::int64_t> fwd(a.nodes_.size(), -1), bwd(b.nodes_.size(), -1);
  std::vector<std::pair<NodeId, NodeId>> stack{{a.root(), b.root()}};
  while (!stack.empty()) {
    auto [x, y] = stack.back();
    stack.pop_back();
    if (fwd[x] >= 0 || bwd[y] >= 0) {
      if (fwd[x] != static_cast<std::int64_t>(y) || bwd[y] != static_cast<std::int64_t>(x)) return false;
      continue;
    }
    fwd[x] = y;
    bwd[y] = x;
    const Node& nx = a.nodes_[x];
    const Node& ny = b.nodes_[y];
    if (nx.kind != ny.kind || nx.atoms != ny.atoms || nx.arcs.size() != ny.arcs.size()) return false;
    for (std::size_t i = 0; i < nx.arcs.size(); ++i) {
      if (nx.arcs[i].attr != ny.arcs[i].attr) return false;
      stack.emplace_back(nx.arcs[i].target, ny.arcs[i].target);
    }
  }
  return true;
}

inline std::size_t FeatureStructure::hash() const {
  std::vector<std::int64_t> order(nodes_.size(), -1);
  std::size_t h = 0x9e3779b97f4a7c15ULL;
  auto mix = [&h](std::size_t v) { h ^= v + 0x9e3779b97f4a7c15ULL + (h << 6) + (h >> 2); };
  std::int64_t next = 0;
  std::function<void(NodeId)> walk = [&](NodeId n) {
    if (order[n] >= 0) { mix(0xabcdefULL + static_cast<std::size_t>(order[n])); return; }
    order[n] = next++;
    const Node& node = nodes_[n];
    mix(static_cast<std::size_t>(node.kind));
    for (Symbol s : node.atoms) mix(s);
    for (const auto& arc : node.arcs) {
      mix(arc.attr * 31u + 7u);
      walk(arc.target);
    }
  };
  walk(root());
  return h;
}

inline std::vector<std::uint32_t> FeatureStructure::in_degrees() const {
  std::vector<std::uint32_t> deg(nodes_.size(), 0);
  std::vector<bool> seen(nodes_.size(), false);
  std::vector<NodeId> stack{root()};
  deg[root()] = 1;
  seen[root()] = true;
  while (!stack.empty()) {
    NodeId n = stack.back();
    stack.pop_back();
    for (const auto& arc : nodes_[n].arcs) {
      ++deg[arc.target];
      if (!seen[arc.target]) {
        seen[arc.target] = true;
        stack.push_back(arc.target);
      }
    }
  }
  return deg;
}

inline void FeatureStructure::validate() const {
  if (nodes_.empty()) throw std::invalid_argument("feature structure has no root");
  std::vector<std::uint8_t> state(nodes_.size(), 0);
  std::function<void(NodeId)> walk = [&](NodeId n) {
    if (n >= nodes_.size()) throw std::invalid_argument("arc to missing node");
    if (state[n] == 1) throw std::invalid_argument("cyclic feature structure");
    if (state[n] == 2) return;
    state[n] = 1;
    const Node& node = nodes_[n];
    if (node.kind == Kind::Atom && node.atoms.empty()) throw std::invalid_argument("empty atomic value set");
    if (node.kind != Kind::Complex && !node.arcs.empty()) throw std::invalid_argument("arcs on non-complex node");
    for (std::size_t i = 1; i < node.arcs.size(); ++i)
      if (node.arcs[i - 1].attr >= node.arcs[i].attr) throw std::invalid_argument("duplicate or unsorted attribute");
    for (const auto& arc : node.arcs) walk(arc.target);
    state[n] = 2;
  };
  walk(root());
}

// ---------------------------------------------------------------------------
// Text syntax

namespace detail {

inline bool is_ident_char(char c) {
  auto u = static_cast<unsigned char>(c);
  if (u >= 0x80) return true;
  if ((c >= 'a' && c <= 'z') || (c >= 'A' && c <= 'Z') || (c >= '0' && c <= '9')) return true;
  switch (c) {
    case '_': case '\'': case '#': case '+': case '-': case '.': case '*': case '/': case '%': case '@':
      return true;
    default:
      return false;
  }
}

class FsReader {
public:
  explicit FsReader(std::string_view text) : text_(text) {}

  FeatureStructure read_all() {
    FeatureStructure::NodeId root = read_value();
    skip_ws();
    if (pos_ != text_.size()) throw SyntaxError("trailing characters in feature structure", pos_);
    return finish(root);
  }

  // Reads one value starting at the current position; used by callers that
  // embed feature structures inside larger formats.
  FeatureStructure::NodeId read_value() {
    skip_ws();
    if (pos_ >= text_.size()) throw SyntaxError("unexpected end of feature structure", pos_);
    char c = text_[pos_];
    if (c == '[') return read_complex();
    if (c == '{') return read_set();
    if (c == '?') return read_var();
    if (c == '_' && (pos_ + 1 >= text_.size() || !is_ident_char(text_[pos_ + 1]))) {
      ++pos_;
      return new_node(FeatureStructure::Kind::Any);
    }
    Symbol s = read_symbol();
    auto id = new_node(FeatureStructure::Kind::Atom);
    nodes_[id].atoms = {s};
    return id;
  }

  std::size_t position() const { return pos_; }

  FeatureStructure finish(FeatureStructure::NodeId root) {
    // Renumber so the root comes first.
    std::vector<FeatureStructure::Node> nodes = nodes_;
    if (root != 0) {
      std::swap(nodes[0], nodes[root]);
      for (auto& n : nodes)
        for (auto& a : n.arcs) {
          if (a.target == root) a.target = 0;
          else if (a.target == 0) a.target = root;
        }
      for (auto& [x, y] : equations_) {
        if (x == root) x = 0; else if (x == 0) x = root;
        if (y == root) y = 0; else if (y == 0) y = root;
      }
    }
    for (auto& n : nodes)
      std::sort(n.arcs.begin(), n.arcs.end(), [](const auto& l, const auto& r) { return l.attr < r.attr; });
    FeatureStructure raw = FeatureStructure::from_nodes_unchecked(std::move(nodes));
    // equate() also compacts away nodes orphaned by `?X:value` and rejects cycles.
    auto solved = FeatureStructure::equate(raw, equations_);
    if (!solved) throw SyntaxError("inconsistent or cyclic constraints on a shared variable", pos_);
    return *solved;
  }

private:
  void skip_ws() {
    while (pos_ < text_.size() && (text_[pos_] == ' ' || text_[pos_] == '\t' || text_[pos_] == '\n' || text_[pos_] == '\r'))
      ++pos_;
  }

  void expect(char c) {
    skip_ws();
    if (pos_ >= text_.size() || text_[pos_] != c)
      throw SyntaxError(std::string("expected '") + c + "'", pos_);
    ++pos_;
  }

  FeatureStructure::NodeId new_node(FeatureStructure::Kind k) {
    nodes_.push_back(FeatureStructure::Node{k, {}, {}});
    return static_cast<FeatureStructure::NodeId>(nodes_.size() - 1);
  }

  Symbol read_symbol() {
    skip_ws();
    if (pos_ < text_.size() && text_[pos_] == '"') {
      std::size_t start = ++pos_;
      while (pos_ < text_.size() && text_[pos_] != '"') ++pos_;
      if (pos_ >= text_.size()) throw SyntaxError("unterminated quoted symbol", start);
      std::string_view s = text_.substr(start, pos_ - start);
      ++pos_;
      return sym(s);
    }
    std::size_t start = pos_;
    while (pos_ < text_.size() && is_ident_char(text_[pos_])) ++pos_;
    if (start == pos_) throw SyntaxError("expected a symbol", pos_);
    return sym(text_.substr(start, pos_ - start));
  }

  FeatureStructure::NodeId read_complex() {
    std::size_t open = pos_;
    expect('[');
    auto id = new_node(FeatureStructure::Kind::Complex);
    skip_ws();
    if (pos_ < text_.size() && text_[pos_] == ']') { ++pos_; return id; }
    for (;;) {
      Symbol attr = read_symbol();
      expect('=');
      auto child = read_value();
      // A repeated attribute conjoins both values.
      bool repeated = false;
      for (const auto& a : nodes_[id].arcs)
        if (a.attr == attr) {
          equations_.emplace_back(a.target, child);
          repeated = true;
        }
      if (!repeated) nodes_[id].arcs.push_back({attr, child});
      skip_ws();
      if (pos_ < text_.size() && text_[pos_] == ',') { ++pos_; continue; }
      if (pos_ < text_.size() && text_[pos_] == ']') { ++pos_; break; }
      throw SyntaxError("expected ',' or ']' in structure opened", open);
    }
    return id;
  }

  FeatureStructure::NodeId read_set() {
    expect('{');
    std::vector<Symbol> values;
    for (;;) {
      skip_ws();
      if (pos_ < text_.size() && (text_[pos_] == '[' || text_[pos_] == '{' || text_[pos_] == '?'))
        throw SyntaxError("disjunction is only allowed between atomic values", pos_);
      values.push_back(read_symbol());
      skip_ws();
      if (pos_ < text_.size() && text_[pos_] == ',') { ++pos_; continue; }
      if (pos_ < text_.size() && text_[pos_] == '}') { ++pos_; break; }
      throw SyntaxError("expected ',' or '}' in value set", pos_);
    }
    std::sort(values.begin(), values.end());
    values.erase(std::unique(values.begin(), values.end()), values.end());
    auto id = new_node(FeatureStructure::Kind::Atom);
    nodes_[id].atoms = std::move(values);
    return id;
  }

  FeatureStructure::NodeId read_var() {
    expect('?');
    std::size_t start = pos_;
    while (pos_ < text_.size() && is_ident_char(text_[pos_])) ++pos_;
    if (start == pos_) throw SyntaxError("expected variable name after '?'", pos_);
    std::string name(text_.substr(start, pos_ - start));
    FeatureStructure::NodeId id;
    if (auto it = vars_.find(name); it != vars_.end()) {
      id = it->second;
    } else {
      id = new_node(FeatureStructure::Kind::Any);
      vars_.emplace(name, id);
    }
    if (pos_ < text_.size() && text_[pos_] == ':') {
      ++pos_;
      auto value = read_value();
      if (nodes_[id].kind == FeatureStructure::Kind::Any && nodes_[id].arcs.empty() && !constrained_[id]) {
        // First constraint: take the value's content directly.
        nodes_[id] = nodes_[value];
        nodes_[value] = FeatureStructure::Node{};
      } else {
        equations_.emplace_back(id, value);
      }
      constrained_[id] = true;
    }
    return id;
  }

  std::string_view text_;
  std::size_t pos_ = 0;
  std::vector<FeatureStructure::Node> nodes_;
  std::map<std::string, FeatureStructure::NodeId> vars_;
  std::map<FeatureStructure::NodeId, bool> constrained_;
  std::vector<std::pair<FeatureStructure::NodeId, FeatureStructure::NodeId>> equations_;
};

}  // namespace detail

inline FeatureStructure FeatureStructure::parse(std::string_view text) {
  detail::FsReader reader(text);
  return reader.read_all();
}

inline std::string FeatureStructure::str() const {
  auto deg = in_degrees();
  std::vector<int> var(nodes_.size(), -1);
  int next_var = 0;
  std::string out;
  std::function<void(NodeId)> write = [&](NodeId n) {
    const Node& node = nodes_[n];
    bool shared = deg[n] > 1;
    if (shared) {
      if (var[n] >= 0) {
        out += "?X" + std::to_string(var[n]);
        return;
      }
      var[n] = ++next_var;
      out += "?X" + std::to_string(var[n]);
      if (node.kind == Kind::Any) return;
      out += ':';
    }
    switch (node.kind) {
      case Kind::Any:
        out += '_';
        break;
      case Kind::Atom: {
        std::vector<std::string> names;
        for (Symbol s : node.atoms) names.push_back(sym_name(s));
        std::sort(names.begin(), names.end());
        auto emit = [&out](const std::string& s) {
          bool plain = !s.empty() && std::all_of(s.begin(), s.end(), detail::is_ident_char);
          if (plain && s != "_") out += s;
          else out += '"' + s + '"';
        };
        if (names.size() == 1) {
          emit(names[0]);
        } else {
          out += '{';
          for (std::size_t i = 0; i < names.size(); ++i) {
            if (i) out += ',';
            emit(names[i]);
          }
          out += '}';
        }
        break;
      }
      case Kind::Complex: {
        std::vector<std::pair<std::string, NodeId>> arcs;
        for (const auto& a : node.arcs) arcs.emplace_back(sym_name(a.attr), a.target);
        std::sort(arcs.begin(), arcs.end());
        out += '[';
        for (std::size_t i = 0; i < arcs.size(); ++i) {
          if (i) out += ", ";
          out += arcs[i].first;
          out += '=';
          write(arcs[i].second);
        }
        out += ']';
        break;
      }
    }
  };
  write(root());
  return out;
}

}  // namespace lingware

template <>
struct std::hash<lingware::FeatureStructure> {
  std::size_t operator()(const lingware::FeatureStructure& fs) const { return fs.hash(); }
};
