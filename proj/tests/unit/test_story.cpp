#include <gtest/gtest.h>

#include "fixtures.hpp"
#include "nora/error.hpp"
#include "nora/story.hpp"
#include "oracles.hpp"

using namespace nora;

TEST(Story, EntitiesAndKinds) {
  const Program& w = fixture::nora_world();
  const Story s = Story::parse(fixture::kMaryStory, w);
  std::vector<std::string> names;
  for (const auto& e : s.entities()) names.push_back(e.name);
  EXPECT_EQ(names, (std::vector<std::string>{"john", "mary", "bob", "rome", "eve", "paris", "ann", "paul"}));
  EXPECT_EQ(s.kind_of("rome"), EntityKind::Place);
  EXPECT_EQ(s.kind_of("paris"), EntityKind::Place);
  EXPECT_EQ(s.kind_of("eve"), EntityKind::Person);
  EXPECT_FALSE(s.kind_of("nobody"));
  EXPECT_EQ(s.person_count(), 6u);
  EXPECT_EQ(s.place_count(), 2u);
  EXPECT_EQ(s.facts().size(), 4u);
  EXPECT_EQ(s.ambiguous().size(), 2u);
  EXPECT_EQ(s.fact_count(), 6u);
}

TEST(Story, ReservedConstantsAreNotEntities) {
  const Program& w = fixture::nora_world();
  const Story s = Story::parse("belongs_to(ryan,underage). child_of(ryan,kim).", w);
  EXPECT_EQ(s.entity_count(), 2u);
  EXPECT_EQ(s.kind_of("underage"), EntityKind::Reserved);
  EXPECT_TRUE(s.reserved().count("underage"));
}

TEST(Story, TypingFactsDeclareKinds) {
  const Program& w = fixture::nora_world();
  const Story s = Story::parse("is_place(home). is_person(al). colleague_of(al,bo).", w);
  EXPECT_EQ(s.kind_of("home"), EntityKind::Place);
  EXPECT_EQ(s.entities().front().name, "home");
  EXPECT_TRUE(s.facts().size() == 1);
  EXPECT_THROW(Story::parse("is_place(al). is_person(al).", w), StoryError);
  EXPECT_THROW(Story::parse("is_person(underage).", w), StoryError);
}

TEST(Story, RejectsRulesAndOverlappingAlternatives) {
  const Program& w = fixture::nora_world();
  EXPECT_THROW(Story::parse("child_of(X,Y) :- parent_of(Y,X).", w), StoryError);
  EXPECT_THROW(Story::parse(":- child_of(a,b).", w), StoryError);
  EXPECT_THROW(Story::parse("1{child_of(a,b); child_of(a,c)}1. 1{child_of(a,b); child_of(a,d)}1.", w), StoryError);
  EXPECT_THROW(Story::parse("child_of(a,b", w), ParseError);
}

TEST(Story, SelectionsInEnumerationOrder) {
  AmbiguousFact one{1, 1, {GroundAtom{"p", {"a", "b"}}, GroundAtom{"p", {"a", "c"}}, GroundAtom{"p", {"a", "d"}}}};
  using Sel = std::vector<std::vector<std::size_t>>;
  EXPECT_EQ(one.selections(), (Sel{{0}, {1}, {2}}));
  AmbiguousFact many = one;
  many.upper = 3;
  EXPECT_EQ(many.selections(), (Sel{{0}, {1}, {2}, {0, 1}, {0, 2}, {1, 2}, {0, 1, 2}}));
  EXPECT_TRUE(one.exactly_one());
  EXPECT_FALSE(many.exactly_one());
}

TEST(Story, MutatorsRevalidate) {
  const Program& w = fixture::nora_world();
  Story s = Story::parse("child_of(a,b). child_of(b,c).", w);
  EXPECT_THROW(s.add_fact(GroundAtom{"child_of", {"a", "zed"}}), StoryError);
  s.add_entity("zed", EntityKind::Person);
  s.add_fact(GroundAtom{"child_of", {"a", "zed"}});
  EXPECT_TRUE(s.has_fact(GroundAtom{"child_of", {"a", "zed"}}));
  EXPECT_THROW(s.add_entity("zed", EntityKind::Place), StoryError);
  EXPECT_THROW(s.add_fact(GroundAtom{"is_person", {"a"}}), StoryError);

  s.replace_with_ambiguous(GroundAtom{"child_of", {"a", "b"}},
                           AmbiguousFact{1, 1, {GroundAtom{"child_of", {"a", "b"}}, GroundAtom{"child_of", {"a", "c"}}}});
  EXPECT_FALSE(s.has_fact(GroundAtom{"child_of", {"a", "b"}}));
  EXPECT_EQ(s.ambiguous().size(), 1u);
  EXPECT_TRUE(s.remove_fact(GroundAtom{"child_of", {"b", "c"}}));
  EXPECT_FALSE(s.remove_fact(GroundAtom{"child_of", {"b", "c"}}));
}

TEST(Story, RenamingKeepsOrderAndReserved) {
  const Program& w = fixture::nora_world();
  const Story s = Story::parse("belongs_to(ryan,underage). child_of(ryan,kim).", w);
  const Story r = s.renamed({{"ryan", "p0"}, {"kim", "p1"}, {"underage", "oops"}});
  EXPECT_EQ(r.facts().front(), (GroundAtom{"belongs_to", {"p0", "underage"}}));
  EXPECT_EQ(r.entities()[1].name, "p1");
  EXPECT_THROW(s.renamed({{"ryan", "kim"}}), StoryError);
  EXPECT_THROW(s.renamed({{"ryan", "underage"}}), StoryError);
}

TEST(Story, GroundAtomParse) {
  EXPECT_EQ(GroundAtom::parse("living_in(bob,rome)"), (GroundAtom{"living_in", {"bob", "rome"}}));
  EXPECT_EQ(GroundAtom::parse("p(a)").str(), "p(a)");
  EXPECT_THROW(GroundAtom::parse("p(X)"), Error);
  EXPECT_THROW(GroundAtom::parse("p(a). q(b)"), ParseError);
}

TEST(StoryProperty, SerializeRoundTrips) {
  const Program& w = fixture::nora_world();
  for (auto text : {fixture::kMaryStory, fixture::kRyanStory, fixture::kRobStory, fixture::kSeanStory}) {
    const Story s = Story::parse(text, w);
    EXPECT_EQ(Story::parse(s.serialize(), w), s);
  }
  for (std::uint64_t seed = 1; seed <= 200; ++seed) {
    const auto c = oracle::tiny_case(seed);
    const Program tw = parse_program(c.world);
    const Story s = Story::parse(c.story, tw);
    ASSERT_EQ(Story::parse(s.serialize(), tw), s) << c.story;
  }
}
