// Acceptance run: one PASS/FAIL line per criterion, exit status 1 if any
// criterion fails.

#include <array>
#include <chrono>
#include <cstdio>
#include <functional>
#include <iostream>
#include <random>

#include "lingware/corpus.hpp"
#include "packs.hpp"
#include "random_fs.hpp"

namespace lt = lingware::testing;
namespace ps = lingware::parser;
using lingware::FeatureStructure;
using lingware::SemTerm;
using Set = std::set<std::string>;
using Clock = std::chrono::steady_clock;

namespace {

struct Check {
  std::vector<std::string> problems;
  void require(bool ok, const std::string& what) {
    if (!ok) problems.push_back(what);
  }
};

double seconds_since(Clock::time_point t) { return std::chrono::duration<double>(Clock::now() - t).count(); }

Set analyses(const lingware::morph::Morphology& m, const std::string& surface) {
  Set out;
  for (const auto& a : m.analyze(surface)) out.insert(a.lexical());
  return out;
}

void morphology(Check& c, std::string& note) {
  auto t0 = Clock::now();
  const auto& m = lt::french().morphology();
  const std::pair<const char*, Set> cases[] = {
      {"chameau+e", {"chamelle"}},     {"peign+rai", {"peindrai"}},    {"pay+e", {"paie", "paye"}},
      {"cadet+e", {"cadette"}},        {"complet+e", {"complète"}},    {"achet+e", {"achète"}},
      {"affrét+e", {"affrète"}},       {"appel+erai", {"appellerai"}}, {"appel+e", {"appelle"}},
      {"céd+erai", {"céderai"}},       {"céd+e", {"cède"}},            {"cheval+s", {"chevaux"}},
  };
  for (const auto& [lex, want] : cases) {
    auto v = m.synthesize_lexical(lex);
    Set got(v.begin(), v.end());
    c.require(got == want, std::string("synthesis of ") + lex);
    for (const auto& s : want) c.require(analyses(m, s).count(lex) == 1, s + " does not analyse as " + lex);
  }
  c.require(analyses(m, "cèderai").empty(), "cèderai accepted");
  double secs = seconds_since(t0);
  c.require(secs < 5.0, "runtime over 5 s");
  note = std::to_string(std::size(cases)) + " alternations, " + std::to_string(secs).substr(0, 5) + " s";
}

void sandhi(Check& c, std::string& note) {
  lingware::sandhi::Sandhi s = lingware::sandhi::Sandhi::from_text(
      lingware::text::read_file(lingware::pack::pack_dir() + "/fr/sandhi"), "fr/sandhi");
  const std::vector<std::string> function_words = {"le", "la", "les", "de", "à", "je", "ce", "cet", "que", "il",
                                                   "ils", "-", "--", "est-ce que"};
  const Set content = {"homme", "ai", "puis", "avoir", "soir", "#onze", "vol", "vols", "aime", "vont",
                       "Atlanta", "Indianapolis"};
  s.add_vocabulary(function_words);
  auto known = [&](std::string_view p) {
    std::vector<std::string> r;
    if (content.count(std::string(p))) r.emplace_back(p);
    for (const auto& w : function_words)
      if (w == p) r.push_back(w);
    return r;
  };
  auto segments = [&](const std::string& text) {
    Set out;
    for (const auto& seg : s.segment(text, known)) out.insert(lingware::sandhi::join_tokens(seg.tokens, "|"));
    return out;
  };
  struct Case {
    std::vector<const char*> tokens;
    const char* surface;
    bool invertible;
  };
  const Case cases[] = {
      {{"le", "homme"}, "l'homme", true},
      {{"je", "ai"}, "j'ai", true},
      {{"est-ce que", "il"}, "est-ce qu'il", true},
      {{"le", "#onze"}, "le onze", true},
      {{"de", "le", "vol"}, "du vol", true},
      {{"à", "les", "vols"}, "aux vols", true},
      {{"de", "le", "homme"}, "de l'homme", true},
      {{"cet", "soir"}, "ce soir", false},
      {{"puis", "-", "je", "avoir"}, "puis-je avoir", true},
      {{"aime", "-", "il"}, "aime-t-il", true},
      {{"vont", "-", "ils"}, "vont-ils", true},
      {{"Atlanta", "--", "Indianapolis"}, "Atlanta - Indianapolis", true},
  };
  int segmented = 0;
  for (const auto& k : cases) {
    lingware::sandhi::TokenSeq toks;
    std::string joined;
    for (auto t : k.tokens) {
      toks.push_back(lingware::sandhi::LexToken::make(t));
      joined += (joined.empty() ? "" : "|") + std::string(t);
    }
    c.require(s.render(toks) == k.surface, std::string("render ") + k.surface);
    if (k.invertible) {
      ++segmented;
      c.require(segments(k.surface).count(joined) == 1, std::string("segment ") + k.surface);
    }
  }
  c.require(segments("l'onze").empty(), "l'onze segmented");
  c.require(segments("du homme").empty(), "du homme segmented");
  note = std::to_string(std::size(cases)) + " renderings, " + std::to_string(segmented) + " segmentations, 2 negatives";
}

bool has_reading(const ps::ParseResult& r, const std::string& inv, const std::string& sem) {
  auto want = SemTerm::parse(sem);
  for (const auto& a : r.analyses)
    if (a.feature("inv") == inv && SemTerm::equivalent(a.sem, want)) return true;
  return false;
}

bool same_semantics(const std::string& a, const std::string& b) {
  auto sa = lt::parse(lt::french(), a).semantics(), sb = lt::parse(lt::french(), b).semantics();
  auto covered = [](const std::vector<SemTerm>& xs, const std::vector<SemTerm>& ys) {
    for (const auto& x : xs) {
      bool f = false;
      for (const auto& y : ys) f = f || SemTerm::equivalent(x, y);
      if (!f) return false;
    }
    return true;
  };
  return !sa.empty() && covered(sa, sb) && covered(sb, sa);
}

void french_parsing(Check& c, std::string& note) {
  const std::vector<std::array<const char*, 3>> figure = {
      {"Aime-t-il Marie ?", "inverted", "ynq(aimer(pron(il), marie))"},
      {"Est-ce que Jean aime Marie ?", "est_ce_que", "ynq(aimer(jean, marie))"},
      {"Jean aime-t-il Marie ?", "complex", "ynq(aimer(jean, marie))"},
      {"Quel homme aime Marie ?", "uninverted", "whq(?X, aimer(q(wh, ?X, homme(?X)), marie))"},
      {"Quelle femme aime-t-il ?", "inverted", "whq(?X, aimer(pron(il), q(wh, ?X, femme(?X))))"},
      {"Quelle femme est-ce que Jean aime ?", "est_ce_que", "whq(?X, aimer(jean, q(wh, ?X, femme(?X))))"},
      {"Quelle femme Jean aime-t-il ?", "complex", "whq(?X, aimer(jean, q(wh, ?X, femme(?X))))"},
      {"Combien ça coûte ?", "pseudo", "whq(?X, coûter(pron(ça), q(howmany, ?X, thing(?X))))"},
  };
  for (const auto& [s, inv, sem] : figure)
    c.require(has_reading(lt::parse(lt::french(), s), inv, sem), std::string(s) + " as " + inv);
  c.require(same_semantics("Est-ce que Jean aime Marie ?", "Jean aime-t-il Marie ?"), "Y-N pair");
  c.require(same_semantics("Quelle femme est-ce que Jean aime ?", "Quelle femme Jean aime-t-il ?"), "WH pair");
  note = "8 labeled questions, 2 equivalence pairs";
}

void french_rejections(Check& c, std::string& note) {
  const char* starred[] = {
      "Quelle est le premier vol ?",
      "Quels est le premier vol ?",
      "Laquelle de ces vols part ?",
      "Quelle femme Jean aime ?",
      "Quand est-ce que le prochain vol est ?",
      "Combien de vols est-ce qu'il y a ?",
      "Quels vols en partance de Dallas y a-t-il ?",
      "Combien coûte ça pour aller à Boston ?",
  };
  for (const char* s : starred) c.require(lt::parse(lt::french(), s).analyses.empty(), std::string(s) + " parsed");
  note = std::to_string(std::size(starred)) + " strings, 0 parses expected";
}

void clitic_structure(Check& c, std::string& note) {
  struct Golden {
    const char* text;
    const char* tree;
    std::vector<std::string> gaps;
  };
  const Golden golden[] = {
      {"Est-ce que vous le voulez ?", "[S [S [EstCeQue est-ce que] [S [NP vous] [VP [V [Cl le] [V voulez]] [NP]]]]]",
       {"NP"}},
      {"Combien en avez-vous ?",
       "[S [S [NP combien] [S [V [Cl en] [V avez]] [Hyph -] [S [NP vous] [VP [V] [NP [NP] [PP]]]]]]]",
       {"V", "NP", "PP"}},
  };
  for (const auto& g : golden) {
    auto r = lt::parse(lt::french(), g.text);
    bool one = r.analyses.size() == 1 && r.analyses[0].trees.size() == 1;
    c.require(one, std::string(g.text) + ": expected one derivation");
    if (!one) continue;
    c.require(r.analyses[0].trees[0].str() == g.tree, std::string(g.text) + ": tree " + r.analyses[0].trees[0].str());
    c.require(r.analyses[0].trees[0].gaps() == g.gaps, std::string(g.text) + ": gap inventory");
  }
  note = "2 golden trees";
}

// Runs the pack corpora once; criteria 6 and 9 both read the reports.
struct CorpusRuns {
  lingware::corpus::Report fr, es;
  double seconds = 0;
};

void generation(Check& c, std::string& note, const CorpusRuns& runs) {
  lingware::generator::Generator gen(lt::french());
  auto out = lt::normalized(gen.generate_strings(SemTerm::parse("ynq(aimer(jean, marie))")));
  c.require(out == Set{"est-ce que Jean aime Marie", "jean aime-t-il Marie"}, "ynq(aimer(jean, marie)) set");

  auto from = [&](const std::string& s) {
    auto sems = lt::parse(lt::french(), s).semantics();
    return sems.size() == 1 ? lt::normalized(gen.generate_strings(sems[0])) : Set{};
  };
  auto heavy = from("Quels vols y a-t-il en partance de Dallas ?");
  c.require(heavy.count("quels vols y a-t-il en partance de Dallas") == 1, "heavy NP: licensed form missing");
  c.require(heavy.count("quels vols en partance de Dallas y a-t-il") == 0, "heavy NP: blocked form generated");
  auto ca = from("Combien ça coûte pour aller à Boston ?");
  c.require(ca.count("combien ça coûte pour aller à Boston") == 1, "ça: licensed form missing");
  c.require(ca.count("combien coûte ça pour aller à Boston") == 0, "ça: inverted form generated");

  int ok = 0, total = 0;
  for (const auto* rep : {&runs.fr, &runs.es})
    for (const auto& l : rep->lines)
      if (l.directive == "OK") {
        ++total;
        if (l.pass) ++ok;
        else c.require(false, "roundtrip: " + l.text + " (" + l.detail + ")");
      }
  c.require(total >= 30, "fewer than 30 OK sentences");
  note = "roundtrip " + std::to_string(ok) + "/" + std::to_string(total) + " OK sentences";
}

void spanish(Check& c, std::string& note) {
  auto accepts = [](const std::string& s) { return lt::parse(lt::spanish(), s).status == ps::Status::Ok; };
  auto r = lt::parse(lt::spanish(), "Quiero un vuelo.");
  bool prodrop = false;
  for (const auto& s : r.semantics())
    prodrop = prodrop || SemTerm::equivalent(s, SemTerm::parse("decl(querer(pron(yo), q(un, ?X, vuelo(?X))))"));
  c.require(prodrop, "prodrop");
  c.require(accepts("Enséñeme los vuelos que sirva una comida."), "sirva under imperative");
  c.require(!accepts("Enséñeme los vuelos que sirve una comida."), "sirve under imperative accepted");
  c.require(accepts("¿Cuál es el primer vuelo que sirve una comida?"), "sirve under interrogative");
  c.require(analyses(lt::spanish().morphology(), "enséñeme").count("enseñ+e+me") == 1, "Enséñeme analysis");
  note = "prodrop, relative mood, enclitic morphology";
}

void kernel(Check& c, std::string& note) {
  int failures = 0;
  auto eq = [](const std::optional<FeatureStructure>& a, const std::optional<FeatureStructure>& b) {
    return a.has_value() == b.has_value() && (!a || FeatureStructure::equal(*a, *b));
  };
  for (int i = 0; i < 1000; ++i) {
    std::mt19937 rng(static_cast<unsigned>(i) * 104729u + 3u);
    lt::RandomFs make(rng);
    FeatureStructure a = make.make(), b = make.make(), d = make.make();
    bool ok = eq(FeatureStructure::unify(a, a), a);
    auto ab = FeatureStructure::unify(a, b), ba = FeatureStructure::unify(b, a);
    ok = ok && eq(ab, ba);
    if (ab) ok = ok && FeatureStructure::subsumes(a, *ab) && FeatureStructure::subsumes(b, *ab);
    auto bd = FeatureStructure::unify(b, d);
    std::optional<FeatureStructure> left = ab ? FeatureStructure::unify(*ab, d) : std::nullopt;
    std::optional<FeatureStructure> right = bd ? FeatureStructure::unify(a, *bd) : std::nullopt;
    ok = ok && eq(left, right);
    if (!ok) ++failures;
  }
  c.require(failures == 0, std::to_string(failures) + " law violations");
  note = "1000 triples, " + std::to_string(failures) + " failures";
}

void whole_suite(Check& c, std::string& note, const CorpusRuns& runs) {
  std::size_t checks = 0, exceeded = 0;
  for (const auto* rep : {&runs.fr, &runs.es}) {
    checks += rep->lines.size();
    for (const auto& l : rep->lines) {
      if (l.exceeded) ++exceeded;
      if (!l.pass) c.require(false, "line " + std::to_string(l.line) + ": " + l.text);
    }
  }
  c.require(exceeded == 0, std::to_string(exceeded) + " checks hit a bound");
  c.require(runs.seconds < 60.0, "over 60 s");
  note = std::to_string(checks) + " checks in " + std::to_string(runs.seconds).substr(0, 5) + " s";
}

}  // namespace

int main() {
  CorpusRuns runs;
  auto t0 = Clock::now();
  runs.fr = lingware::corpus::run_corpus(lt::french(), lingware::pack::corpus_path("fr"));
  runs.es = lingware::corpus::run_corpus(lt::spanish(), lingware::pack::corpus_path("es"));
  runs.seconds = seconds_since(t0);

  const std::vector<std::pair<const char*, std::function<void(Check&, std::string&)>>> criteria = {
      {"morphology", morphology},
      {"sandhi", sandhi},
      {"french parsing", french_parsing},
      {"french rejections", french_rejections},
      {"clitic structure", clitic_structure},
      {"generation", [&](Check& c, std::string& n) { generation(c, n, runs); }},
      {"spanish", spanish},
      {"kernel properties", kernel},
      {"whole suite", [&](Check& c, std::string& n) { whole_suite(c, n, runs); }},
  };
  int failed = 0, i = 0;
  for (const auto& [name, fn] : criteria) {
    Check c;
    std::string note;
    try {
      fn(c, note);
    } catch (const std::exception& e) {
      c.problems.push_back(std::string("exception: ") + e.what());
    }
    bool pass = c.problems.empty();
    failed += !pass;
    std::printf("%s %d %s: %s\n", pass ? "PASS" : "FAIL", ++i, name, note.c_str());
    for (const auto& p : c.problems) std::printf("    %s\n", p.c_str());
  }
  std::printf("%d/%zu criteria passed\n", static_cast<int>(criteria.size()) - failed, criteria.size());
  return failed ? 1 : 0;
}
