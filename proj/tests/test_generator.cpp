#include <gtest/gtest.h>

#include "packs.hpp"

namespace lt = lingware::testing;
namespace gn = lingware::generator;
using lingware::SemTerm;
using Set = std::set<std::string>;

namespace {

const gn::Generator& french_gen() {
  static gn::Generator g(lt::french());
  return g;
}

Set generate(const std::string& term) { return lt::normalized(french_gen().generate_strings(SemTerm::parse(term))); }

// Semantics of the single reading of `s`.
SemTerm reading(const std::string& s) {
  auto sems = lt::parse(lt::french(), s).semantics();
  EXPECT_EQ(sems.size(), 1u) << s;
  return sems.empty() ? SemTerm::var("X") : sems.front();
}

}  // namespace

TEST(Generator, YesNoQuestionHasExactlyTwoForms) {
  EXPECT_EQ(generate("ynq(aimer(jean, marie))"), (Set{"est-ce que Jean aime Marie", "jean aime-t-il Marie"}));
}

TEST(Generator, HeavyNounPhraseStaysInPlace) {
  auto out = lt::normalized(french_gen().generate_strings(reading("Quels vols y a-t-il en partance de Dallas ?")));
  EXPECT_TRUE(out.count("quels vols y a-t-il en partance de Dallas"));
  EXPECT_FALSE(out.count("quels vols en partance de Dallas y a-t-il"));
}

TEST(Generator, CaIsNotInverted) {
  auto out = lt::normalized(french_gen().generate_strings(reading("Combien ça coûte pour aller à Boston ?")));
  EXPECT_TRUE(out.count("combien ça coûte pour aller à Boston"));
  EXPECT_FALSE(out.count("combien coûte ça pour aller à Boston"));
}

TEST(Generator, ClitizedImperative) {
  EXPECT_EQ(generate("imp(donner(pron(vous), pron(les), pron(me)))"), (Set{"donnez-les-moi"}));
}

// Every output parses back to the input term.
TEST(Generator, OutputsParseBack) {
  for (const char* t : {"ynq(aimer(jean, marie))", "decl(aimer(jean, marie))",
                        "whq(?X, aimer(jean, q(wh, ?X, femme(?X))))", "ynq(vouloir(pron(vous), pron(le)))"}) {
    auto sem = SemTerm::parse(t);
    auto res = french_gen().generate(sem);
    EXPECT_FALSE(res.strings.empty()) << t;
    EXPECT_FALSE(res.exceeded) << t;
    for (const auto& s : res.strings) {
      bool back = false;
      for (const auto& r : lt::parse(lt::french(), s).semantics()) back = back || SemTerm::equivalent(r, sem);
      EXPECT_TRUE(back) << t << " -> " << s;
    }
  }
}

TEST(Generator, Unrealizable) {
  EXPECT_TRUE(generate("ynq(voler(jean, marie))").empty());
  EXPECT_TRUE(generate("nonsense").empty());
}

TEST(Generator, RoundTrip) {
  for (const char* s : {"Aime-t-il Marie ?", "Est-ce que Jean aime Marie ?", "Jean aime-t-il Marie ?",
                        "Quel homme aime Marie ?", "Quelle femme aime-t-il ?", "Quelle femme est-ce que Jean aime ?",
                        "Quelle femme Jean aime-t-il ?", "Combien ça coûte ?", "Est-ce que vous le voulez ?",
                        "Combien en avez-vous ?"})
    EXPECT_TRUE(french_gen().roundtrip_check(s)) << s;
}

TEST(Generator, RoundTripNeedsAParse) {
  EXPECT_THROW(french_gen().roundtrip_check("Quelle femme Jean aime ?"), std::invalid_argument);
}

TEST(Generator, NormalizeSentence) {
  EXPECT_EQ(gn::normalize_sentence("Est-ce que Jean aime Marie ?"), "est-ce que Jean aime Marie");
  EXPECT_EQ(gn::normalize_sentence("¿Sirve  el vuelo una comida?"), "sirve el vuelo una comida");
}

TEST(Generator, DepthBound) {
  gn::Options o;
  o.max_depth = 2;
  auto res = french_gen().generate(SemTerm::parse("ynq(aimer(jean, marie))"), o);
  EXPECT_TRUE(res.strings.empty());
}
