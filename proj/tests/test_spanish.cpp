#include <gtest/gtest.h>

#include "packs.hpp"

namespace lt = lingware::testing;
namespace ps = lingware::parser;
using lingware::SemTerm;
using Set = std::set<std::string>;

namespace {

bool parses(const std::string& s) { return lt::parse(lt::spanish(), s).status == ps::Status::Ok; }

}  // namespace

TEST(Spanish, ProdropFillsSubject) {
  auto r = lt::parse(lt::spanish(), "Quiero un vuelo.");
  ASSERT_EQ(r.status, ps::Status::Ok);
  auto want = SemTerm::parse("decl(querer(pron(yo), q(un, ?X, vuelo(?X))))");
  bool found = false;
  for (const auto& s : r.semantics()) found = found || SemTerm::equivalent(s, want);
  EXPECT_TRUE(found);
  EXPECT_TRUE(parses("Compramos un billete."));
}

TEST(Spanish, RelativeMoodFollowsMatrix) {
  EXPECT_TRUE(parses("Enséñeme los vuelos que sirva una comida."));
  EXPECT_FALSE(parses("Enséñeme los vuelos que sirve una comida."));
  EXPECT_TRUE(parses("¿Cuál es el primer vuelo que sirve una comida?"));
  EXPECT_FALSE(parses("¿Cuál es el primer vuelo que sirva una comida?"));
  EXPECT_TRUE(parses("Juan quiere el vuelo que sirve una comida."));
  EXPECT_FALSE(parses("Juan quiere el vuelo que sirva una comida."));
}

TEST(Spanish, EncliticMorphology) {
  const auto& m = lt::spanish().morphology();
  Set an;
  for (const auto& a : m.analyze("enséñeme")) an.insert(a.lexical());
  EXPECT_TRUE(an.count("enseñ+e+me"));
  auto v = m.synthesize_lexical("enseñ+e+me+lo");
  EXPECT_EQ(Set(v.begin(), v.end()), (Set{"enséñemelo"}));
  v = m.synthesize_lexical("enseñ+e");
  EXPECT_EQ(Set(v.begin(), v.end()), (Set{"enseñe"}));
}

TEST(Spanish, EncliticSentence) {
  auto r = lt::parse(lt::spanish(), "Enséñeme los vuelos.");
  ASSERT_EQ(r.status, ps::Status::Ok);
  auto want = SemTerm::parse("imp(enseñar(pron(usted), q(le, ?X, vuelo(?X)), pron(yo)))");
  bool found = false;
  for (const auto& s : r.semantics()) found = found || SemTerm::equivalent(s, want);
  EXPECT_TRUE(found);
  EXPECT_FALSE(parses("Enseñe me los vuelos."));
}

TEST(Spanish, InversionWithoutHyphen) {
  EXPECT_TRUE(parses("¿Sirve el vuelo una comida?"));
  EXPECT_FALSE(parses("¿Sirve-él una comida?"));
}

TEST(Spanish, Contractions) {
  const auto& s = lt::spanish().sandhi();
  lingware::sandhi::TokenSeq t;
  for (const char* f : {"a", "el", "vuelo"}) t.push_back(lingware::sandhi::LexToken::make(f));
  EXPECT_EQ(s.render(t), "al vuelo");
}

TEST(Spanish, Generation) {
  lingware::generator::Generator g(lt::spanish());
  auto out = lt::normalized(g.generate_strings(SemTerm::parse(
      "imp(enseñar(pron(usted), q(le, ?X1, and(vuelo(?X1), servir(?X1, q(un, ?X2, comida(?X2))))), pron(yo)))")));
  EXPECT_TRUE(out.count("enséñeme los vuelos que sirva una comida"));
  EXPECT_FALSE(out.count("enséñeme los vuelos que sirve una comida"));
  EXPECT_TRUE(g.roundtrip_check("Quiero un vuelo."));
  EXPECT_TRUE(g.roundtrip_check("¿Qué vuelos sirven una comida?"));
}
