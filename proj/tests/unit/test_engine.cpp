#include <gtest/gtest.h>

#include "equivalence.hpp"
#include "fixtures.hpp"
#include "nora/engine.hpp"
#include "nora/error.hpp"

using namespace nora;

namespace {

std::set<std::string> strs(const std::vector<GroundAtom>& v) {
  std::set<std::string> out;
  for (const auto& a : v) out.insert(a.str());
  return out;
}

}  // namespace

TEST(Engine, SixRuleFragmentModel) {
  const Program& w = fixture::world("nora_mini.lp");
  const Story s = Story::parse(fixture::kLolaStory, w);
  const auto res = answer_sets(w, s);
  ASSERT_EQ(res.refinement_count(), 1u);
  ASSERT_TRUE(res.consistent());
  const std::set<std::string> expected{
      "living_in_same_place(ram,irfan)", "living_in_same_place(lola,ram)",   "living_in_same_place(ram,lola)",
      "living_in_same_place(irfan,ram)", "living_in_same_place(lola,irfan)", "living_in_same_place(irfan,lola)",
      "living_in_same_place(ram,ram)",   "living_in_same_place(lola,lola)",  "living_in_same_place(irfan,irfan)",
      "school_mates_with(ram,irfan)",    "parent_of(lola,ram)",              "belongs_to(ram,underage)",
      "living_in(irfan,calcutta)",       "living_in(ram,calcutta)",          "living_in(lola,calcutta)",
      "is_agegroup(underage)"};
  EXPECT_EQ(strs(res.answer_set(0).atoms), expected);
  EXPECT_EQ(res.entailed().size(), 12u);
  EXPECT_EQ(res.relations("lola", "irfan"), (std::set<std::string>{"living_in_same_place"}));
}

TEST(Engine, LayersFollowDerivationRounds) {
  const Program& w = fixture::world("nora_mini.lp");
  const auto res = answer_sets(w, Story::parse(fixture::kLolaStory, w));
  const auto as = res.answer_set(0);
  EXPECT_EQ(as.layers.at(GroundAtom::parse("parent_of(lola,ram)")), 0u);
  EXPECT_EQ(as.layers.at(GroundAtom::parse("belongs_to(ram,underage)")), 1u);
  EXPECT_EQ(as.layers.at(GroundAtom::parse("living_in_same_place(lola,ram)")), 2u);
}

TEST(Engine, AmbiguityAndConstraints) {
  const Program& w = fixture::nora_world();
  const Story s = Story::parse(fixture::kMaryStory, w);
  const auto res = answer_sets(w, s);
  EXPECT_EQ(res.refinement_count(), 4u);
  EXPECT_EQ(res.ref_plus_indices().size(), 2u);
  EXPECT_EQ(res.ref_minus_indices().size(), 2u);
  EXPECT_EQ(res.relations("mary", "rome"), (std::set<std::string>{"living_in"}));
  EXPECT_TRUE(res.relations("eve", "ann").empty());
  for (std::size_t k : res.ref_minus_indices()) {
    EXPECT_FALSE(res.violations(k).empty());
    const auto ref = res.refinement(k);
    EXPECT_EQ(ref.facts.size(), s.facts().size() + 2);
  }
  EXPECT_EQ(entailed_relations(w, s, "mary", "rome"), (std::set<std::string>{"living_in"}));
}

TEST(Engine, EightRefinementsHalfConsistent) {
  const Program& w = fixture::nora_world();
  const auto res = answer_sets(w, Story::parse(fixture::kRyanStory, w));
  EXPECT_EQ(res.refinement_count(), 8u);
  EXPECT_EQ(res.ref_plus_indices().size(), 4u);
  const auto e = res.entailed();
  EXPECT_NE(std::find(e.begin(), e.end(), GroundAtom::parse("living_in(ryan,kgp)")), e.end());
}

TEST(Engine, EnumerationOrderMatchesSelections) {
  const Program& w = fixture::nora_world();
  const Story s = Story::parse(fixture::kRyanStory, w);
  const auto refs = enumerate_refinements(s);
  ASSERT_EQ(refs.size(), 8u);
  EXPECT_EQ(refinement_count(s), 8u);
  const auto res = answer_sets(w, s);
  for (std::size_t k = 0; k < refs.size(); ++k) {
    EXPECT_EQ(refs[k].index, k);
    EXPECT_EQ(refs[k].selection, res.refinement(k).selection);
    EXPECT_EQ(refs[k].facts, res.refinement(k).facts);
  }
  EXPECT_THROW(enumerate_refinements(s, 7), RefinementOverflow);
  EngineOptions opts;
  opts.refinement_cap = 4;
  EXPECT_THROW(answer_sets(w, s, opts), RefinementOverflow);
}

TEST(Engine, GroundForwardChainAndConstraints) {
  const Program w = parse_program("q(Y,X) :- p(X,Y), X != Y.\nr(X) :- q(X,Y).\n:- r(X), p(X,Y).\n");
  const Story s = Story::parse("p(a,b). p(b,b).", w);
  const auto rules = ground(w, s);
  std::vector<GroundRule> definite, constraints;
  for (const auto& r : rules) (r.head ? definite : constraints).push_back(r);
  EXPECT_EQ(definite.size(), 2u + 4u);  // q over ordered distinct pairs, r over all pairs
  EXPECT_EQ(constraints.size(), 4u);
  const auto cl = forward_chain(s.facts(), definite);
  EXPECT_TRUE(cl.contains(GroundAtom::parse("q(b,a)")));
  EXPECT_TRUE(cl.contains(GroundAtom::parse("r(b)")));
  EXPECT_FALSE(cl.contains(GroundAtom::parse("q(b,b)")));
  EXPECT_EQ(cl.layers.at(GroundAtom::parse("r(b)")), 2u);
  const auto bad = check_constraints(cl, constraints);
  ASSERT_EQ(bad.size(), 1u);
  EXPECT_EQ(to_string(bad[0]), ":- r(b), p(b,b).");
  EXPECT_FALSE(answer_sets(w, s).consistent());
  EXPECT_THROW(answer_sets(w, s).relations("a", "b"), InconsistentStory);
}

TEST(Engine, UnknownBodyPredicate) {
  const Program w = parse_program("q(X) :- ghost(X).");
  EXPECT_THROW(answer_sets(w, Story::parse("p(a).", w)), UnknownPredicateError);
  EXPECT_NO_THROW(answer_sets(w, Story::parse("ghost(a).", w)));
}

TEST(Engine, QueryEntitiesMustExist) {
  const Program& w = fixture::nora_world();
  const auto res = answer_sets(w, Story::parse(fixture::kSeanStory, w));
  EXPECT_THROW(res.relations("sean", "nobody"), StoryError);
}

TEST(Engine, TypingFactsOnlyWhenRulesUseThem) {
  const Program typed = parse_program("story_relation(knows,person,person).\nf(X,Y) :- knows(X,Y), is_person(X).");
  const auto r1 = answer_sets(typed, Story::parse("knows(a,b).", typed));
  EXPECT_TRUE(r1.holds(0, GroundAtom::parse("is_person(a)")));
  EXPECT_TRUE(r1.holds(0, GroundAtom::parse("f(a,b)")));
  for (const auto& e : r1.entailed()) EXPECT_NE(e.predicate, "is_person");
  const Program plain = parse_program("story_relation(knows,person,person).\nf(X,Y) :- knows(X,Y).");
  EXPECT_FALSE(answer_sets(plain, Story::parse("knows(a,b).", plain)).holds(0, GroundAtom::parse("is_person(a)")));
}

TEST(EngineOracle, TinyProgramsAgree) {
  oracle::EquivalenceStats stats;
  for (std::uint64_t seed = 1; seed <= 250; ++seed) {
    const auto c = oracle::tiny_case(seed);
    const auto diff = oracle::compare_with_engine(c, &stats);
    ASSERT_TRUE(diff.empty()) << "seed " << seed << ": " << diff << "\nworld:\n" << c.world << "story:\n" << c.story;
  }
  EXPECT_GT(stats.proofs, 250u);
}
