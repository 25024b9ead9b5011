#pragma once

// Language packs: a directory per language holding
//
//   features syntax lexicon morph-rules morphotax sandhi corpus
//
// compiled into one Grammar. LINGWARE_PACK_DIR overrides the install
// location.

#include <cstdlib>
#include <filesystem>
#include <functional>
#include <memory>
#include <string>
#include <vector>

#include "lingware/grammar.hpp"
#include "lingware/morphology.hpp"
#include "lingware/sandhi.hpp"
#include "lingware/textutil.hpp"
#include "lingware/twolevel.hpp"

#ifndef LINGWARE_DEFAULT_PACK_DIR
#define LINGWARE_DEFAULT_PACK_DIR "lingware"
#endif

namespace lingware::pack {

inline std::string pack_dir() {
  if (const char* env = std::getenv("LINGWARE_PACK_DIR"); env && *env) return env;
  return LINGWARE_DEFAULT_PACK_DIR;
}

/// Files of one pack, read but not compiled. Tests edit these for
/// ablations before calling compile().
struct PackFiles {
  std::string lang;
  std::vector<grammar::Source> grammar;  // features, syntax, lexicon
  std::string morph_rules, morphotax, sandhi;
};

inline PackFiles read_pack(const std::string& lang, const std::string& root = pack_dir()) {
  namespace fs = std::filesystem;
  fs::path dir = fs::path(root) / lang;
  if (!fs::is_directory(dir)) throw grammar::GrammarError("no pack directory " + dir.string());
  auto read = [&](const char* name) {
    fs::path p = dir / name;
    return fs::exists(p) ? text::read_file(p.string()) : std::string();
  };
  PackFiles f;
  f.lang = lang;
  for (const char* name : {"features", "syntax", "lexicon"}) f.grammar.push_back({lang + "/" + name, read(name)});
  f.morph_rules = read("morph-rules");
  f.morphotax = read("morphotax");
  f.sandhi = read("sandhi");
  return f;
}

inline std::unique_ptr<grammar::Grammar> compile(const PackFiles& f) {
  auto morph = std::make_unique<morph::Morphology>(twolevel::compile_rule_file(f.morph_rules, f.lang + "/morph-rules"));
  morph::read_morphotax(*morph, f.morphotax, f.lang + "/morphotax");
  auto sandhi = std::make_unique<sandhi::Sandhi>(sandhi::Sandhi::from_text(f.sandhi, f.lang + "/sandhi"));
  return grammar::compile_grammar(f.grammar, std::move(morph), std::move(sandhi));
}

inline std::unique_ptr<grammar::Grammar> load(const std::string& lang, const std::string& root = pack_dir()) {
  return compile(read_pack(lang, root));
}

inline std::unique_ptr<grammar::Grammar> load_french() { return load("fr"); }
inline std::unique_ptr<grammar::Grammar> load_spanish() { return load("es"); }

inline std::string corpus_path(const std::string& lang, const std::string& root = pack_dir()) {
  return (std::filesystem::path(root) / lang / "corpus").string();
}

}  // namespace lingware::pack
