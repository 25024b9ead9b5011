#include <gtest/gtest.h>

#include <random>

#include "lingware/featstruct.hpp"
#include "random_fs.hpp"

using lingware::FeatureStructure;
using FS = lingware::FeatureStructure;

namespace {

FS P(std::string_view s) { return FS::parse(s); }

bool eq(const std::optional<FS>& a, const FS& b) { return a && FS::equal(*a, b); }

}  // namespace

TEST(Unify, DisjointAttributesMerge) {
  EXPECT_TRUE(eq(FS::unify(P("[num=sg]"), P("[gen=fem]")), P("[num=sg, gen=fem]")));
}

TEST(Unify, ClashingAtomsFail) { EXPECT_FALSE(FS::unify(P("[num=sg]"), P("[num=pl]"))); }

TEST(Unify, AtomSetsIntersect) {
  auto r = FS::unify(P("[muet={y,fut_cond_e}]"), P("[muet={y,n}]"));
  ASSERT_TRUE(r);
  EXPECT_EQ(r->str(), "[muet=y]");
}

TEST(Unify, ReentrancyPropagates) {
  auto r = FS::unify(P("[agr=?X, subj=[agr=?X]]"), P("[agr=[num=sg]]"));
  ASSERT_TRUE(r);
  auto n = r->path({"subj", "agr", "num"});
  ASSERT_TRUE(n);
  EXPECT_EQ(lingware::sym_name(*r->atom_value(*n)), "sg");
}

TEST(Unify, AtomAgainstComplexFails) {
  EXPECT_FALSE(FS::unify(P("[agr=sg]"), P("[agr=[num=sg]]")));
}

TEST(Unify, InputsUntouched) {
  FS a = P("[a=?X, b=?X]");
  FS b = P("[a=x]");
  std::string before = a.str();
  auto r = FS::unify(a, b);
  ASSERT_TRUE(r);
  EXPECT_EQ(a.str(), before);
  EXPECT_EQ(b.str(), "[a=x]");
}

TEST(Unify, SharedNodeBecomesCyclicFails) {
  // a and a.f are the same node: no finite structure satisfies it.
  EXPECT_FALSE(FS::unify(P("[a=?X, b=?X]"), P("[a=[f=?Y], b=?Y]")));
}

TEST(Unify, SharedValuesStaySharedAfterUnify) {
  auto r = FS::unify(P("[a=?X, b=?X]"), P("[a={p,q}]"));
  ASSERT_TRUE(r);
  EXPECT_EQ(r->str(), "[a=?X1:{p,q}, b=?X1]");
}

TEST(Subsumes, EmptySubsumesAnything) {
  EXPECT_TRUE(FS::subsumes(P("[]"), P("[num=sg]")));
  EXPECT_FALSE(FS::subsumes(P("[num=sg]"), P("[]")));
}

TEST(Subsumes, SetContainment) {
  EXPECT_TRUE(FS::subsumes(P("[muet={y,n}]"), P("[muet=y]")));
  EXPECT_FALSE(FS::subsumes(P("[muet=y]"), P("[muet={y,n}]")));
}

TEST(Subsumes, SharingIsMoreSpecific) {
  FS shared = P("[a=?X, b=?X]");
  FS separate = P("[a=_, b=_]");
  EXPECT_TRUE(FS::subsumes(separate, shared));
  EXPECT_FALSE(FS::subsumes(shared, separate));
}

TEST(Equal, ModuloRenaming) {
  EXPECT_TRUE(FS::equal(P("[a=?X, b=?X]"), P("[b=?Q, a=?Q]")));
  EXPECT_FALSE(FS::equal(P("[num=sg]"), P("[num=pl]")));
  FS x = P("[f=[g=h]]");
  EXPECT_TRUE(FS::equal(x, x));
}

TEST(ReadWrite, Basic) {
  EXPECT_EQ(P("[num=sg]").str(), "[num=sg]");
  EXPECT_EQ(P("[muet={fut_cond_e,y}]").str(), "[muet={fut_cond_e,y}]");
  EXPECT_EQ(P("[subj=[agr=?A], agr=?A]").str(), "[agr=?X1, subj=[agr=?X1]]");
  EXPECT_EQ(P("?V:[a=b]").str(), "[a=b]");
}

TEST(ReadWrite, QuotedSymbols) {
  FS f = P("[form=\"est-ce que\", x='quoted']");
  auto v = f.atom_value(*f.path({"form"}));
  ASSERT_TRUE(v);
  EXPECT_EQ(lingware::sym_name(*v), "est-ce que");
  EXPECT_TRUE(FS::equal(FS::parse(f.str()), f));
}

TEST(ReadWrite, SyntaxErrorsCarryPosition) {
  try {
    P("[num=sg,, gen=m]");
    FAIL() << "expected error";
  } catch (const lingware::SyntaxError& e) {
    EXPECT_GT(e.position(), 0u);
  }
  EXPECT_THROW(P("[a=b, a=c]"), lingware::SyntaxError);
  EXPECT_THROW(P("[a={b,[c=d]}]"), lingware::SyntaxError);
  EXPECT_THROW(P("[a=b"), lingware::SyntaxError);
  EXPECT_THROW(P("[a=?X:b, c=?X:d]"), lingware::SyntaxError);
}

TEST(ReadWrite, CyclicTextRejected) { EXPECT_THROW(P("?X:[a=?X]"), lingware::SyntaxError); }

TEST(Path, EmbedAndUnifyPath) {
  std::vector<lingware::Symbol> p{lingware::sym("subj"), lingware::sym("agr")};
  FS e = FS::embed(p, P("[num=pl]"));
  EXPECT_EQ(e.str(), "[subj=[agr=[num=pl]]]");
  auto r = FS::unify_path(P("[subj=[agr=[per=3]]]"), p, P("[num=pl]"));
  ASSERT_TRUE(r);
  EXPECT_EQ(r->str(), "[subj=[agr=[num=pl, per=3]]]");
}

// Randomized algebraic laws ------------------------------------------------

class UnifyLaws : public ::testing::TestWithParam<int> {};

TEST_P(UnifyLaws, Hold) {
  std::mt19937 rng(static_cast<unsigned>(GetParam()) * 7919u + 17u);
  lingware::testing::RandomFs gen(rng);
  FS a = gen.make(), b = gen.make(), c = gen.make();

  // Idempotence and identity element.
  EXPECT_TRUE(eq(FS::unify(a, a), a)) << a.str();
  EXPECT_TRUE(eq(FS::unify(a, FS::any()), a)) << a.str();

  // Commutativity.
  auto ab = FS::unify(a, b), ba = FS::unify(b, a);
  ASSERT_EQ(ab.has_value(), ba.has_value()) << a.str() << " / " << b.str();
  if (ab) {
    EXPECT_TRUE(FS::equal(*ab, *ba)) << ab->str() << " vs " << ba->str();
    // Result is subsumed by both inputs.
    EXPECT_TRUE(FS::subsumes(a, *ab)) << a.str() << " !<= " << ab->str();
    EXPECT_TRUE(FS::subsumes(b, *ab)) << b.str() << " !<= " << ab->str();
    // Round trip through text.
    EXPECT_TRUE(FS::equal(FS::parse(ab->str()), *ab)) << ab->str();
  }

  // Associativity.
  auto bc = FS::unify(b, c);
  std::optional<FS> l = ab ? FS::unify(*ab, c) : std::nullopt;
  std::optional<FS> r = bc ? FS::unify(a, *bc) : std::nullopt;
  ASSERT_EQ(l.has_value(), r.has_value()) << a.str() << " / " << b.str() << " / " << c.str();
  if (l) EXPECT_TRUE(FS::equal(*l, *r)) << l->str() << " vs " << r->str();

  // Equality agrees with mutual subsumption.
  bool e = FS::equal(a, b);
  EXPECT_EQ(e, FS::subsumes(a, b) && FS::subsumes(b, a)) << a.str() << " / " << b.str();
}

INSTANTIATE_TEST_SUITE_P(Randomized, UnifyLaws, ::testing::Range(0, 1000));
