// lingware_cli: parse, generate, morphology, sandhi and corpus runs over a
// language pack.
//
// Exit codes: 0 success, 1 empty result or failed check, 2 resource bound
// hit, 64 usage error, 70 pack failed to load.

#include <algorithm>
#include <cstdio>
#include <iostream>
#include <memory>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "lingware/corpus.hpp"
#include "lingware/generator.hpp"
#include "lingware/pack.hpp"
#include "lingware/parser.hpp"
#include "lingware/sandhi.hpp"
#include "lingware/semterm.hpp"
#include "lingware/unicode.hpp"

namespace lw = lingware;

namespace {

constexpr int kOk = 0, kEmpty = 1, kBound = 2, kUsage = 64, kPack = 70;

struct UsageError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct PackError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

std::unique_ptr<lw::grammar::Grammar> load(const std::string& lang) {
  try {
    return lw::pack::load(lang);
  } catch (const std::exception& e) {
    throw PackError(e.what());
  }
}

std::string join(const std::vector<std::string>& words) {
  std::string s;
  for (const auto& w : words) s += (s.empty() ? "" : " ") + w;
  return lw::utf8::nfc(s);
}

lw::sandhi::TokenSeq tokens_of(const std::string& text) {
  lw::sandhi::TokenSeq toks;
  std::vector<std::string> parts;
  if (text.find('|') != std::string::npos) {
    std::stringstream in(text);
    for (std::string t; std::getline(in, t, '|');) parts.push_back(lw::text::trim(t));
  } else {
    std::istringstream in(text);
    for (std::string t; in >> t;) parts.push_back(t);
  }
  for (const auto& p : parts)
    if (!p.empty()) toks.push_back(lw::sandhi::LexToken::make(p));
  return toks;
}

int cmd_parse(const std::string& lang, const std::string& text, std::size_t max_edges, bool all_trees) {
  auto g = load(lang);
  lw::parser::Parser parser(*g);
  auto r = parser.parse(text, {.max_edges = max_edges});
  for (const auto& a : r.analyses) {
    std::cout << "inv=" << a.feature("inv") << " " << a.sem.str() << "\n";
    std::size_t n = all_trees ? a.trees.size() : std::min<std::size_t>(1, a.trees.size());
    for (std::size_t i = 0; i < n; ++i) std::cout << "  " << a.trees[i].str() << "\n";
  }
  std::cerr << r.analyses.size() << " analyses, " << r.edges << " edges, " << lw::parser::status_name(r.status) << "\n";
  if (r.status == lw::parser::Status::ResourceExceeded) return kBound;
  return r.analyses.empty() ? kEmpty : kOk;
}

int cmd_generate(const std::string& lang, const std::string& term, int max_depth, std::size_t max_edges) {
  lw::SemTerm sem = lw::SemTerm::var("X");
  try {
    sem = lw::SemTerm::parse(term);
  } catch (const std::exception& e) {
    throw UsageError(std::string("malformed term: ") + e.what());
  }
  auto g = load(lang);
  lw::generator::Generator gen(*g);
  lw::generator::Options opt;
  opt.max_depth = max_depth;
  opt.max_edges = max_edges;
  auto r = gen.generate(sem, opt);
  std::set<std::string> out(r.strings.begin(), r.strings.end());
  for (const auto& s : out) std::cout << s << "\n";
  if (r.exceeded) std::cerr << "generation bound exceeded\n";
  if (out.empty()) return r.exceeded ? kBound : kEmpty;
  return kOk;
}

int cmd_morph(const std::string& dir, const std::string& lang, const std::string& input) {
  auto g = load(lang);
  const auto& m = g->morphology();
  std::set<std::string> out;
  if (dir == "synth") {
    for (auto& s : m.synthesize_lexical(input)) out.insert(s);
  } else {
    for (auto& a : m.analyze(input)) out.insert(a.lexical());
  }
  for (const auto& s : out) std::cout << s << "\n";
  return out.empty() ? kEmpty : kOk;
}

int cmd_sandhi(const std::string& dir, const std::string& lang, const std::string& input) {
  auto g = load(lang);
  if (dir == "render") {
    auto toks = tokens_of(input);
    if (toks.empty()) return kEmpty;
    std::cout << g->sandhi().render(toks) << "\n";
    return kOk;
  }
  lw::parser::Parser parser(*g);
  std::set<std::string> out;
  for (const auto& seg : parser.tokenize(input)) out.insert(lw::sandhi::join_tokens(seg.tokens, " | "));
  for (const auto& s : out) std::cout << s << "\n";
  return out.empty() ? kEmpty : kOk;
}

int cmd_corpus(const std::string& lang, const std::string& file, const lw::corpus::Options& opt) {
  auto g = load(lang);
  std::string path = file.empty() ? lw::pack::corpus_path(lang) : file;
  lw::corpus::Report rep;
  try {
    rep = lw::corpus::run_corpus(*g, path, opt);
  } catch (const std::exception& e) {
    throw UsageError(e.what());
  }
  std::cout << rep.format();
  return rep.ok() ? kOk : kEmpty;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Bidirectional French/Spanish grammar engine"};
  app.require_subcommand(1);
  const std::vector<std::string> langs{"fr", "es"};

  std::string lang = "fr";
  std::vector<std::string> words;
  std::size_t max_edges = 50000;
  int max_depth = 12;
  bool all_trees = false;

  auto* parse = app.add_subcommand("parse", "Analyse a sentence");
  parse->add_option("--lang", lang, "Language pack")->check(CLI::IsMember(langs));
  parse->add_option("--max-edges", max_edges, "Chart edge cap");
  parse->add_flag("--all-trees", all_trees, "Print every derivation");
  parse->add_option("text", words, "Sentence")->required();

  auto* generate = app.add_subcommand("generate", "Realise a semantic term");
  generate->add_option("--lang", lang, "Language pack")->check(CLI::IsMember(langs));
  generate->add_option("--max-depth", max_depth, "Rule applications per path");
  generate->add_option("--max-edges", max_edges, "Edge cap for the parse filter");
  generate->add_option("term", words, "Semantic term")->required();

  std::string input;
  auto* morph = app.add_subcommand("morph", "Word analysis and synthesis");
  morph->require_subcommand(1);
  for (const char* dir : {"an", "synth"}) {
    auto* sub = morph->add_subcommand(dir, dir == std::string("an") ? "surface -> morphemes" : "morphemes -> surface");
    sub->add_option("lang", lang, "Language pack")->required()->check(CLI::IsMember(langs));
    sub->add_option("input", input, "Word or stem+affix string")->required();
  }

  auto* sandhi = app.add_subcommand("sandhi", "Inter-word rendering and segmentation");
  sandhi->require_subcommand(1);
  for (const char* dir : {"render", "segment"}) {
    auto* sub = sandhi->add_subcommand(dir, dir == std::string("render") ? "tokens -> text" : "text -> tokens");
    sub->add_option("lang", lang, "Language pack")->required()->check(CLI::IsMember(langs));
    sub->add_option("input", input, "Tokens (space or '|' separated) or text")->required();
  }

  auto* corpus = app.add_subcommand("corpus", "Regression corpus");
  corpus->require_subcommand(1);
  auto* run = corpus->add_subcommand("run", "Run a corpus file");
  std::string file;
  bool no_roundtrip = false;
  unsigned threads = 0;
  run->add_option("lang", lang, "Language pack")->required()->check(CLI::IsMember(langs));
  run->add_option("file", file, "Corpus file (default: the pack's corpus)");
  run->add_option("--max-edges", max_edges, "Chart edge cap");
  run->add_option("--max-depth", max_depth, "Generation depth bound");
  run->add_option("--threads", threads, "Worker threads (0: all cores)");
  run->add_flag("--no-roundtrip", no_roundtrip, "OK lines only need to parse");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    std::cerr << e.what() << "\n" << app.help();
    return kUsage;
  }

  try {
    if (*parse) return cmd_parse(lang, join(words), max_edges, all_trees);
    if (*generate) return cmd_generate(lang, join(words), max_depth, max_edges);
    for (auto* sub : morph->get_subcommands())
      if (*sub) return cmd_morph(sub->get_name(), lang, lw::utf8::nfc(input));
    for (auto* sub : sandhi->get_subcommands())
      if (*sub) return cmd_sandhi(sub->get_name(), lang, lw::utf8::nfc(input));
    if (*run) {
      lw::corpus::Options opt;
      opt.max_edges = max_edges;
      opt.max_depth = max_depth;
      opt.roundtrip = !no_roundtrip;
      opt.threads = threads;
      return cmd_corpus(lang, file, opt);
    }
  } catch (const UsageError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kUsage;
  } catch (const PackError& e) {
    std::cerr << "error loading pack: " << e.what() << "\n";
    return kPack;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kUsage;
  }
  return kUsage;
}
