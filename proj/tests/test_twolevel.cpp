#include <gtest/gtest.h>

#include <algorithm>
#include <set>

#include "lingware/morphology.hpp"
#include "lingware/textutil.hpp"
#include "lingware/twolevel.hpp"

namespace tl = lingware::twolevel;
namespace mo = lingware::morph;

namespace {

std::string pack_file(const std::string& rel) {
  return lingware::text::read_file(std::string(LINGWARE_DEFAULT_PACK_DIR) + "/" + rel);
}

// Stems and affixes for the spelling alternations; the production rules
// are deliberately minimal.
const char* kMorphotax = R"(
default stem [spelling_type=plain]
default affix [muet=n]
stem chameau: N[spelling_type=eau_elle]
stem cadet: A[spelling_type=double]
stem complet: A[spelling_type=change_e_è]
stem grand: A
stem prix: N
stem cheval: N[spelling_type=al_aux]
stem bal: N
stem jeu: N
stem pay: V[conj=er, spelling_type=y_i_opt]
stem achet: V[conj=er, spelling_type=change_e_è]
stem affrét: V[conj=er, spelling_type=change_é_è]
stem appel: V[conj=er, spelling_type=double]
stem céd: V[conj=er, spelling_type=change_é_è]
stem mang: V[conj=er]
stem plac: V[conj=er]
stem peign: V[conj=re]
affix +e: vaff[conj=er, muet=y, per=3]
affix +ons: vaff[conj={er,re}, per=1]
affix +erai: vaff[conj=er, muet=fut_cond_e, per=1]
affix +rai: vaff[conj=re, per=1]
affix +ez: vaff[conj=er, per=2]
affix +e: fem[muet=y]
affix +s: pl[]
prod v: V[per=?P] --> V[conj=?C] vaff[conj=?C, per=?P]
prod n_pl: N --> N pl
prod n_fem: N --> N fem
prod a_fem: A --> A fem
prod a_pl: A --> A pl
prod a_fem_pl: A --> A fem pl
prod bare_n: N --> N
prod bare_a: A --> A
)";

class FrenchSpelling : public ::testing::Test {
protected:
  static void SetUpTestSuite() {
    morph_ = new mo::Morphology(tl::compile_rule_file(pack_file("fr/morph-rules"), "fr/morph-rules"));
    mo::read_morphotax(*morph_, kMorphotax, "test");
  }
  static void TearDownTestSuite() { delete morph_; }

  static std::set<std::string> synth(const std::string& lexical) {
    // Split "stem+aff+aff" and try every reading of each piece.
    std::vector<std::string> parts;
    std::size_t b = 0;
    for (std::size_t i = 1; i <= lexical.size(); ++i)
      if (i == lexical.size() || lexical[i] == '+') {
        parts.push_back(lexical.substr(b, i - b));
        b = i;
      }
    std::set<std::string> out;
    std::vector<const mo::MorphemeEntry*> seq;
    std::function<void(std::size_t)> rec = [&](std::size_t i) {
      if (i == parts.size()) {
        if (!morph_->check_morphotax(seq).empty())
          for (auto& s : morph_->synthesize(seq)) out.insert(s);
        return;
      }
      for (const auto* e : morph_->find(parts[i])) {
        seq.push_back(e);
        rec(i + 1);
        seq.pop_back();
      }
    };
    rec(0);
    return out;
  }

  static std::set<std::string> analyses(const std::string& surface) {
    std::set<std::string> out;
    for (const auto& a : morph_->analyze(surface)) out.insert(a.lexical());
    return out;
  }

  static mo::Morphology* morph_;
};

mo::Morphology* FrenchSpelling::morph_ = nullptr;

using Set = std::set<std::string>;

}  // namespace

TEST(RuleFile, EmptyRuleSetIsIdentity) {
  auto c = tl::compile_rule_file("");
  std::vector<tl::Segment> segs{{U"chat", nullptr}};
  auto r = c.realize(segs);
  ASSERT_EQ(r.size(), 1u);
  EXPECT_EQ(r[0].surface(), "chat");
}

TEST(RuleFile, UndeclaredPairNamesTheRule) {
  try {
    tl::compile_rule_file("pair e:è\nrule bad_one o:ö <=> _ e\n");
    FAIL();
  } catch (const tl::RuleError& e) {
    EXPECT_NE(std::string(e.what()).find("bad_one"), std::string::npos);
  }
  try {
    tl::compile_rule_file("pair e:è\nrule ctx e:è <=> a:b _\n");
    FAIL();
  } catch (const tl::RuleError& e) {
    EXPECT_NE(std::string(e.what()).find("ctx"), std::string::npos);
  }
}

TEST(RuleFile, DuplicateNamesRejected) {
  EXPECT_THROW(tl::compile_rule_file("pair e:è\nrule r e:è <=> _ t\nrule r e:è <=> _ d\n"), tl::RuleError);
}

TEST(RuleFile, OptionalNeedsRestrictionOperator) {
  EXPECT_THROW(tl::compile_rule_file("pair y:i\nrule o optional y:i <=> _ e\n"), tl::RuleError);
  EXPECT_NO_THROW(tl::compile_rule_file("pair y:i\nrule o optional y:i => _ e\n"));
}

TEST(RuleFile, FrenchFileHasOneLetterPerRule) {
  auto rf = tl::read_rule_file(pack_file("fr/morph-rules"));
  EXPECT_GE(rf.rules.size(), 20u);
  // Every focus is a single symbol pair by construction; also check no two
  // rules share a name and all compile together.
  EXPECT_NO_THROW(tl::CompiledSpelling::compile(rf.rules, rf.alphabet));
}

TEST(Contexts, AlternationAndRepetition) {
  auto c = tl::compile_rule_file(
      "pair a:b\n"
      "rule r a:b <=> (x | y y) _ z* .#.\n");
  auto surf = [&](std::u32string s) {
    std::vector<tl::Segment> segs{{s, nullptr}};
    std::set<std::string> out;
    for (auto& a : c.realize(segs)) out.insert(a.surface());
    return out;
  };
  EXPECT_EQ(surf(U"xa"), Set{"xb"});
  EXPECT_EQ(surf(U"yyazz"), Set{"yybzz"});
  EXPECT_EQ(surf(U"yazz"), Set{"yazz"});
  EXPECT_EQ(surf(U"xazq"), Set{"xazq"});
}

TEST_F(FrenchSpelling, MultiLetterChanges) {
  EXPECT_EQ(synth("chameau+e"), Set{"chamelle"});
  EXPECT_EQ(synth("peign+rai"), Set{"peindrai"});
  EXPECT_EQ(synth("peign+ons"), Set{"peignons"});
}

TEST_F(FrenchSpelling, OptionalRule) { EXPECT_EQ(synth("pay+e"), (Set{"paie", "paye"})); }

TEST_F(FrenchSpelling, DoublingAndGrave) {
  EXPECT_EQ(synth("cadet+e"), Set{"cadette"});
  EXPECT_EQ(synth("complet+e"), Set{"complète"});
  EXPECT_EQ(synth("achet+e"), Set{"achète"});
  EXPECT_EQ(synth("affrét+e"), Set{"affrète"});
  EXPECT_EQ(synth("appel+erai"), Set{"appellerai"});
  EXPECT_EQ(synth("appel+e"), Set{"appelle"});
  EXPECT_EQ(synth("appel+ez"), Set{"appelez"});
  EXPECT_EQ(synth("céd+erai"), Set{"céderai"});
  EXPECT_EQ(synth("céd+e"), Set{"cède"});
  EXPECT_EQ(synth("cadet+e+s"), Set{"cadettes"});
}

TEST_F(FrenchSpelling, OtherAlternations) {
  EXPECT_EQ(synth("mang+ons"), Set{"mangeons"});
  EXPECT_EQ(synth("plac+ons"), Set{"plaçons"});
  EXPECT_EQ(synth("cheval+s"), Set{"chevaux"});
  EXPECT_EQ(synth("bal+s"), Set{"bals"});
  EXPECT_EQ(synth("chameau+s"), Set{"chameaux"});
  EXPECT_EQ(synth("jeu+s"), Set{"jeux"});
  EXPECT_EQ(synth("prix+s"), Set{"prix"});
  EXPECT_EQ(synth("grand+e+s"), Set{"grandes"});
}

TEST_F(FrenchSpelling, Analysis) {
  EXPECT_EQ(analyses("chamelle"), Set{"chameau+e"});
  EXPECT_EQ(analyses("paie"), Set{"pay+e"});
  EXPECT_EQ(analyses("paye"), Set{"pay+e"});
  EXPECT_EQ(analyses("céderai"), Set{"céd+erai"});
  EXPECT_TRUE(analyses("cèderai").empty());
  EXPECT_EQ(analyses("peindrai"), Set{"peign+rai"});
  EXPECT_EQ(analyses("appellerai"), Set{"appel+erai"});
  EXPECT_TRUE(analyses("appelerai").empty());
  EXPECT_TRUE(analyses("cadete").empty());
  EXPECT_EQ(analyses("prix"), (Set{"prix", "prix+s"}));
}

TEST_F(FrenchSpelling, WrongClassFailsMorphotax) {
  auto stem = morph_->find("peign");
  auto aff = morph_->find("+erai");
  ASSERT_EQ(stem.size(), 1u);
  ASSERT_EQ(aff.size(), 1u);
  std::vector<const mo::MorphemeEntry*> seq{stem[0], aff[0]};
  EXPECT_TRUE(morph_->check_morphotax(seq).empty());
  EXPECT_THROW(morph_->synthesize(seq), mo::MorphError);
  auto bare = morph_->find("grand");
  std::vector<const mo::MorphemeEntry*> one{bare[0]};
  auto r = morph_->check_morphotax(one);
  ASSERT_EQ(r.size(), 1u);
}
