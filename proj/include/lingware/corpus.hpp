#pragma once

// Regression corpus. One check per line:
//
//   OK <sentence>                       parses
//   NO <sentence>                       has no parse
//   EQ <s1> ||| <s2>                    same semantics, modulo renaming
//   GEN <term> ||| <a; b> ||| <c; d>    generation includes a, b and excludes c, d
//   MORPH <lexical> -> <surf1[,surf2]>  exact synthesis set; each surface analyses back
//   SANDHI <tokens> -> <surface>        rendering (tokens split on '|' if present)
//
// Blank lines and lines starting with '#' are ignored. Lines run on a
// thread pool; the report keeps file order.

#include <algorithm>
#include <atomic>
#include <cstddef>
#include <memory>
#include <set>
#include <sstream>
#include <string>
#include <string_view>
#include <thread>
#include <vector>

#include "lingware/generator.hpp"
#include "lingware/grammar.hpp"
#include "lingware/parser.hpp"
#include "lingware/semterm.hpp"
#include "lingware/textutil.hpp"

namespace lingware::corpus {

struct Options {
  std::size_t max_edges = 50000;
  int max_depth = 12;
  bool roundtrip = true;  // OK lines must also come back from generation
  unsigned threads = 0;   // 0: hardware concurrency
};

struct LineResult {
  int line = 0;
  std::string directive;
  std::string text;
  bool pass = false;
  bool exceeded = false;  // some bound was hit
  std::string detail;
};

struct Report {
  std::vector<LineResult> lines;
  std::vector<std::string> warnings;

  std::size_t passed() const {
    return static_cast<std::size_t>(std::count_if(lines.begin(), lines.end(), [](auto& l) { return l.pass; }));
  }
  std::size_t failed() const { return lines.size() - passed(); }
  bool ok() const { return failed() == 0; }

  /// One status token per line, then a summary.
  std::string format() const {
    std::ostringstream out;
    for (const auto& w : warnings) out << "WARN " << w << "\n";
    for (const auto& l : lines) {
      out << (l.pass ? "PASS" : "FAIL") << " " << l.line << " " << l.directive << " " << l.text;
      if (!l.detail.empty()) out << " :: " << l.detail;
      out << "\n";
    }
    out << "SUMMARY " << lines.size() << " checks, " << passed() << " passed, " << failed() << " failed\n";
    return out.str();
  }
};

namespace detail {

inline std::vector<std::string> split_on(std::string_view s, std::string_view sep) {
  std::vector<std::string> out;
  std::size_t b = 0;
  for (;;) {
    auto p = s.find(sep, b);
    out.push_back(text::trim(s.substr(b, p == std::string_view::npos ? std::string_view::npos : p - b)));
    if (p == std::string_view::npos) return out;
    b = p + sep.size();
  }
}

inline std::set<std::string> normalized_list(std::string_view s) {
  std::set<std::string> out;
  for (auto& x : split_on(s, ";"))
    if (!x.empty()) out.insert(generator::normalize_sentence(x));
  return out;
}

inline std::string join(const std::set<std::string>& xs) {
  std::string s;
  for (const auto& x : xs) s += (s.empty() ? "" : ", ") + x;
  return s;
}

class Runner {
public:
  Runner(const grammar::Grammar& g, const Options& opt) : g_(g), opt_(opt), gen_(g) {}

  void check(LineResult& r) const {
    try {
      if (r.directive == "OK") ok(r);
      else if (r.directive == "NO") no(r);
      else if (r.directive == "EQ") eq(r);
      else if (r.directive == "GEN") gen(r);
      else if (r.directive == "MORPH") morph(r);
      else if (r.directive == "SANDHI") sandhi(r);
      else r.detail = "unknown directive";
    } catch (const std::exception& e) {
      r.pass = false;
      r.detail = std::string("error: ") + e.what();
    }
  }

private:
  parser::ParseResult parse(std::string_view s) const { return gen_.parser().parse(s, {.max_edges = opt_.max_edges}); }

  generator::Options gen_options() const {
    generator::Options o;
    o.max_depth = opt_.max_depth;
    o.max_edges = opt_.max_edges;
    return o;
  }

  void ok(LineResult& r) const {
    auto p = parse(r.text);
    r.exceeded = p.status == parser::Status::ResourceExceeded;
    if (p.status != parser::Status::Ok) {
      r.detail = parser::status_name(p.status);
      return;
    }
    if (opt_.roundtrip && !gen_.roundtrip_check(r.text, gen_options())) {
      r.detail = "parses but is not regenerated";
      return;
    }
    r.pass = true;
  }

  void no(LineResult& r) const {
    auto p = parse(r.text);
    r.exceeded = p.status == parser::Status::ResourceExceeded;
    r.pass = p.status == parser::Status::NoParse;
    if (!r.pass) r.detail = p.status == parser::Status::Ok ? "parsed: " + p.analyses.front().sem.str() : parser::status_name(p.status);
  }

  void eq(LineResult& r) const {
    auto parts = split_on(r.text, "|||");
    if (parts.size() != 2) {
      r.detail = "malformed EQ line";
      return;
    }
    auto a = parse(parts[0]), b = parse(parts[1]);
    r.exceeded = a.status == parser::Status::ResourceExceeded || b.status == parser::Status::ResourceExceeded;
    if (a.status != parser::Status::Ok || b.status != parser::Status::Ok) {
      r.detail = std::string("statuses ") + parser::status_name(a.status) + " / " + parser::status_name(b.status);
      return;
    }
    auto covered = [](const std::vector<SemTerm>& xs, const std::vector<SemTerm>& ys) {
      return std::all_of(xs.begin(), xs.end(), [&](const SemTerm& x) {
        return std::any_of(ys.begin(), ys.end(), [&](const SemTerm& y) { return SemTerm::equivalent(x, y); });
      });
    };
    auto sa = a.semantics(), sb = b.semantics();
    r.pass = covered(sa, sb) && covered(sb, sa);
    if (!r.pass) r.detail = "semantics differ";
  }

  void gen(LineResult& r) const {
    auto parts = split_on(r.text, "|||");
    if (parts.size() < 2 || parts.size() > 3) {
      r.detail = "malformed GEN line";
      return;
    }
    auto res = gen_.generate(SemTerm::parse(parts[0]), gen_options());
    r.exceeded = res.exceeded;
    std::set<std::string> got;
    for (const auto& s : res.strings) got.insert(generator::normalize_sentence(s));
    std::set<std::string> missing, unwanted;
    for (const auto& s : normalized_list(parts[1]))
      if (!got.count(s)) missing.insert(s);
    if (parts.size() == 3)
      for (const auto& s : normalized_list(parts[2]))
        if (got.count(s)) unwanted.insert(s);
    r.pass = missing.empty() && unwanted.empty() && !res.exceeded;
    if (!missing.empty()) r.detail += "missing: " + join(missing) + " ";
    if (!unwanted.empty()) r.detail += "unwanted: " + join(unwanted) + " ";
    if (res.exceeded) r.detail += "bound exceeded ";
    if (!r.pass) r.detail += "(got: " + join(got) + ")";
  }

  void morph(LineResult& r) const {
    auto parts = split_on(r.text, "->");
    if (parts.size() != 2 || parts[0].empty()) {
      r.detail = "malformed MORPH line";
      return;
    }
    std::set<std::string> want;
    for (auto& s : split_on(parts[1], ","))
      if (!s.empty()) want.insert(utf8::nfc(s));
    auto v = g_.morphology().synthesize_lexical(parts[0]);
    std::set<std::string> got(v.begin(), v.end());
    if (got != want) {
      r.detail = "synthesised {" + join(got) + "}";
      return;
    }
    std::string lex = utf8::nfc(parts[0]);
    for (const auto& s : want) {
      bool back = false;
      for (const auto& a : g_.morphology().analyze(s)) back = back || a.lexical() == lex;
      if (!back) {
        r.detail = s + " does not analyse as " + lex;
        return;
      }
    }
    r.pass = true;
  }

  void sandhi(LineResult& r) const {
    auto parts = split_on(r.text, "->");
    if (parts.size() != 2) {
      r.detail = "malformed SANDHI line";
      return;
    }
    sandhi::TokenSeq toks;
    if (parts[0].find('|') != std::string::npos) {
      for (auto& t : split_on(parts[0], "|"))
        if (!t.empty()) toks.push_back(sandhi::LexToken::make(t));
    } else {
      std::istringstream in(parts[0]);
      for (std::string t; in >> t;) toks.push_back(sandhi::LexToken::make(t));
    }
    std::string got = g_.sandhi().render(toks);
    r.pass = got == utf8::nfc(parts[1]);
    if (!r.pass) r.detail = "rendered '" + got + "'";
  }

  const grammar::Grammar& g_;
  Options opt_;
  generator::Generator gen_;
};

}  // namespace detail

inline Report run_corpus_text(const grammar::Grammar& g, std::string_view content, const Options& opt = {}) {
  Report rep;
  std::istringstream in{std::string(content)};
  std::string raw;
  int lineno = 0;
  while (std::getline(in, raw)) {
    ++lineno;
    std::string s = text::trim(raw);
    if (s.empty() || s[0] == '#') continue;
    LineResult r;
    r.line = lineno;
    auto sp = s.find_first_of(" \t");
    r.directive = s.substr(0, sp);
    r.text = sp == std::string::npos ? std::string() : text::trim(std::string_view(s).substr(sp));
    rep.lines.push_back(std::move(r));
  }
  if (rep.lines.empty()) {
    rep.warnings.push_back("corpus has no checks");
    return rep;
  }
  detail::Runner runner(g, opt);
  // Build the generation lexicon once before the workers start.
  g.generation_lexicon();
  unsigned n = opt.threads ? opt.threads : std::max(1u, std::thread::hardware_concurrency());
  n = std::min<unsigned>(n, static_cast<unsigned>(rep.lines.size()));
  std::atomic<std::size_t> next{0};
  auto work = [&] {
    for (std::size_t i; (i = next.fetch_add(1)) < rep.lines.size();) runner.check(rep.lines[i]);
  };
  std::vector<std::jthread> pool;
  for (unsigned t = 1; t < n; ++t) pool.emplace_back(work);
  work();
  pool.clear();
  return rep;
}

inline Report run_corpus(const grammar::Grammar& g, const std::string& path, const Options& opt = {}) {
  return run_corpus_text(g, text::read_file(path), opt);
}

}  // namespace lingware::corpus
