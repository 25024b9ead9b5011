#pragma once

// QLF-lite semantic terms: constants, variables and compound terms,
//
//   whq(?X, aimer(jean, q(wh, ?X, femme(?X))))
//
// Terms live inside feature structures under the `sem` feature, encoded as
// atoms (constants), unconstrained nodes (variables) and
// [fn=f, n=arity, a1=..., aN=...] (compounds), so that composition is
// plain unification.

#include <map>
#include <string>
#include <string_view>
#include <vector>

#include "lingware/featstruct.hpp"

namespace lingware {

class SemTerm {
public:
  enum class Kind { Var, Const, Compound };

  static SemTerm var(std::string name) { return SemTerm(Kind::Var, std::move(name), {}); }
  static SemTerm constant(std::string name) { return SemTerm(Kind::Const, std::move(name), {}); }
  static SemTerm compound(std::string functor, std::vector<SemTerm> args) {
    return SemTerm(Kind::Compound, std::move(functor), std::move(args));
  }

  Kind kind() const { return kind_; }
  const std::string& name() const { return name_; }
  const std::vector<SemTerm>& args() const { return args_; }

  static SemTerm parse(std::string_view text);
  std::string str() const;

  /// Feature-structure text for this term; variables keep their `?Name`
  /// so the text can be spliced into a larger structure sharing them.
  std::string fs_text() const {
    switch (kind_) {
      case Kind::Var: return "?" + name_;
      case Kind::Const: return quote(name_);
      case Kind::Compound: {
        std::string out = "[fn=" + quote(name_) + ", n=" + std::to_string(args_.size());
        for (std::size_t i = 0; i < args_.size(); ++i) out += ", a" + std::to_string(i + 1) + "=" + args_[i].fs_text();
        return out + "]";
      }
    }
    return {};
  }

  FeatureStructure to_fs() const { return FeatureStructure::parse(fs_text()); }

  /// Read a term back out of node `id`. Unconstrained or functor-less
  /// nodes become variables named X1, X2, ... in order of first occurrence.
  static SemTerm from_fs(const FeatureStructure& fs, FeatureStructure::NodeId id) {
    std::map<FeatureStructure::NodeId, std::string> names;
    return from_fs_impl(fs, id, names);
  }
  static SemTerm from_fs(const FeatureStructure& fs) { return from_fs(fs, fs.root()); }

  /// Equality modulo variable renaming.
  static bool equivalent(const SemTerm& a, const SemTerm& b) { return FeatureStructure::equal(a.to_fs(), b.to_fs()); }

  bool closed() const {
    if (kind_ == Kind::Var) return false;
    for (const auto& a : args_)
      if (!a.closed()) return false;
    return true;
  }

private:
  SemTerm(Kind k, std::string name, std::vector<SemTerm> args) : kind_(k), name_(std::move(name)), args_(std::move(args)) {}

  static std::string quote(const std::string& s) {
    bool plain = !s.empty() && s != "_";
    for (char c : s)
      if (!detail::is_ident_char(c)) plain = false;
    return plain ? s : "\"" + s + "\"";
  }

  static SemTerm from_fs_impl(const FeatureStructure& fs, FeatureStructure::NodeId id,
                              std::map<FeatureStructure::NodeId, std::string>& names) {
    const auto& node = fs.node(id);
    auto as_var = [&]() {
      auto it = names.find(id);
      if (it == names.end()) it = names.emplace(id, "X" + std::to_string(names.size() + 1)).first;
      return var(it->second);
    };
    if (node.kind == FeatureStructure::Kind::Atom) {
      std::string s;
      for (std::size_t i = 0; i < node.atoms.size(); ++i) {
        if (i) s += '|';
        s += sym_name(node.atoms[i]);
      }
      return constant(s);
    }
    if (node.kind == FeatureStructure::Kind::Any) return as_var();
    auto fn = fs.follow(id, sym("fn"));
    if (!fn || !fs.atom_value(*fn)) return as_var();
    std::vector<SemTerm> args;
    for (std::size_t i = 1;; ++i) {
      auto a = fs.follow(id, sym("a" + std::to_string(i)));
      if (!a) break;
      args.push_back(from_fs_impl(fs, *a, names));
    }
    return compound(sym_name(*fs.atom_value(*fn)), std::move(args));
  }

  Kind kind_;
  std::string name_;
  std::vector<SemTerm> args_;
};

namespace detail {

class TermReader {
public:
  explicit TermReader(std::string_view t) : t_(t) {}

  SemTerm read() {
    SemTerm term = term_();
    ws();
    if (p_ != t_.size()) throw SyntaxError("trailing characters in term", p_);
    return term;
  }

private:
  void ws() {
    while (p_ < t_.size() && (t_[p_] == ' ' || t_[p_] == '\t' || t_[p_] == '\n')) ++p_;
  }

  std::string ident() {
    ws();
    if (p_ < t_.size() && t_[p_] == '"') {
      auto start = ++p_;
      while (p_ < t_.size() && t_[p_] != '"') ++p_;
      if (p_ >= t_.size()) throw SyntaxError("unterminated quoted name", start);
      return std::string(t_.substr(start, p_++ - start));
    }
    auto start = p_;
    while (p_ < t_.size() && is_ident_char(t_[p_])) ++p_;
    if (start == p_) throw SyntaxError("expected a name", p_);
    return std::string(t_.substr(start, p_ - start));
  }

  SemTerm term_() {
    ws();
    if (p_ >= t_.size()) throw SyntaxError("unexpected end of term", p_);
    if (t_[p_] == '?') {
      ++p_;
      return SemTerm::var(ident());
    }
    std::string name = ident();
    ws();
    if (p_ < t_.size() && t_[p_] == '(') {
      ++p_;
      std::vector<SemTerm> args;
      for (;;) {
        args.push_back(term_());
        ws();
        if (p_ < t_.size() && t_[p_] == ',') { ++p_; continue; }
        if (p_ < t_.size() && t_[p_] == ')') { ++p_; break; }
        throw SyntaxError("expected ',' or ')' in term", p_);
      }
      return SemTerm::compound(std::move(name), std::move(args));
    }
    return SemTerm::constant(std::move(name));
  }

  std::string_view t_;
  std::size_t p_ = 0;
};

}  // namespace detail

inline SemTerm SemTerm::parse(std::string_view text) { return detail::TermReader(text).read(); }

inline std::string SemTerm::str() const {
  switch (kind_) {
    case Kind::Var: return "?" + name_;
    case Kind::Const: return quote(name_);
    case Kind::Compound: {
      std::string out = quote(name_) + "(";
      for (std::size_t i = 0; i < args_.size(); ++i) {
        if (i) out += ", ";
        out += args_[i].str();
      }
      return out + ")";
    }
  }
  return {};
}

}  // namespace lingware
