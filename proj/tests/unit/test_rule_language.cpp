#include <gtest/gtest.h>

#include "fixtures.hpp"
#include "nora/error.hpp"
#include "nora/rule_language.hpp"
#include "oracles.hpp"

using namespace nora;

TEST(RuleLanguage, ParsesEveryRuleKind) {
  const Program p = parse_program(
      "lisp(Y,X) :- school_mates_with(Y,X).\n"
      ":- belongs_to(X,underage), parent_of(X,Y).\n"
      "is_agegroup(underage).\n"
      "1{living_in(bob,paris); living_in(bob,rome)}1.\n"
      "other(X,Z) :- lisp(X,Z), X != Z.\n");
  ASSERT_EQ(p.size(), 5u);
  EXPECT_EQ(p.rules()[0].kind, Rule::Kind::Definite);
  EXPECT_EQ(p.rules()[1].kind, Rule::Kind::Constraint);
  EXPECT_FALSE(p.rules()[1].head);
  EXPECT_EQ(p.rules()[2].kind, Rule::Kind::Fact);
  EXPECT_EQ(p.rules()[3].kind, Rule::Kind::CardinalityFact);
  EXPECT_EQ(p.rules()[3].choices.size(), 2u);
  EXPECT_EQ(p.rules()[3].bounds, (Bounds{1, 1}));
  ASSERT_EQ(p.rules()[4].body.size(), 2u);
  EXPECT_TRUE(std::holds_alternative<Inequality>(p.rules()[4].body[1]));
  EXPECT_EQ(p.arities().at("lisp"), 2u);
  EXPECT_EQ(p.rules()[1].line, 2u);
}

TEST(RuleLanguage, VariablesAreUppercaseOrUnderscore) {
  const Program p = parse_program("p(X,_y) :- q(X,_y,abc).");
  const auto& head = *p.rules()[0].head;
  EXPECT_TRUE(head.args[0].is_var());
  EXPECT_TRUE(head.args[1].is_var());
  EXPECT_FALSE(std::get<Atom>(p.rules()[0].body[0]).args[2].is_var());
}

TEST(RuleLanguage, ConstantsInFirstOccurrenceOrder) {
  const Program p = parse_program("b(x). a(X) :- c(X,y), X != z. d(y).");
  EXPECT_EQ(p.constants(), (std::vector<std::string>{"x", "y", "z"}));
  EXPECT_TRUE(p.has_constant("z"));
  EXPECT_FALSE(p.has_constant("X"));
}

TEST(RuleLanguage, CommentsAndDirectives) {
  const Program p = parse_program("% comment\n#show lisp/2.\n#const n = 3.\np(a). % trailing\n");
  EXPECT_EQ(p.size(), 1u);
  ASSERT_EQ(p.warnings().size(), 2u);
  EXPECT_NE(p.warnings()[0].find("#show"), std::string::npos);
  EXPECT_NE(p.warnings()[1].find("line 3"), std::string::npos);
}

TEST(RuleLanguage, SyntaxErrorsCarryPosition) {
  try {
    parse_program("p(a).\nq(X :- r(X).");
    FAIL() << "expected ParseError";
  } catch (const ParseError& e) {
    EXPECT_EQ(e.line(), 2u);
    EXPECT_EQ(e.column(), 5u);
  }
  EXPECT_THROW(parse_program("p(a)"), ParseError);
  EXPECT_THROW(parse_program("p(a) :- ."), ParseError);
  EXPECT_THROW(parse_program("p(a) & q."), ParseError);
  EXPECT_THROW(parse_program("p(X)."), ParseError);
}

TEST(RuleLanguage, ArityMismatchIsReported) {
  try {
    parse_program("p(a,b).\nq(X) :- p(X).");
    FAIL() << "expected ArityError";
  } catch (const ArityError& e) {
    EXPECT_EQ(e.predicate(), "p");
    EXPECT_EQ(e.line(), 2u);
  }
}

TEST(RuleLanguage, CardinalityBounds) {
  EXPECT_NO_THROW(parse_program("1{p(a,b); p(a,c); p(a,d)}3."));
  EXPECT_NO_THROW(parse_program("1{p(a,b); p(a,c)}2."));
  EXPECT_THROW(parse_program("2{p(a,b); p(a,c)}2."), BoundsError);
  EXPECT_THROW(parse_program("1{p(a,b); p(a,c)}3."), BoundsError);
  EXPECT_THROW(parse_program("1{p(a,b)}1."), BoundsError);
  EXPECT_THROW(parse_program("{p(a,b); p(a,c)}1."), BoundsError);
  EXPECT_THROW(parse_program("1{p(a,b); p(a,c)}."), BoundsError);
  EXPECT_THROW(parse_program("1{p(a,b); q(a,c)}1."), BoundsError);
  EXPECT_THROW(parse_program("1{p(a,b); p(c,b)}1."), BoundsError);
  EXPECT_THROW(parse_program("1{p(a,b); p(a,b)}1."), BoundsError);
  EXPECT_THROW(parse_program("1{p(a,b), p(a,c)}1."), ParseError);
}

TEST(RuleLanguage, ProgramAddChecksStructure) {
  Program p;
  Rule r;
  r.kind = Rule::Kind::Definite;
  r.head = Atom{"p", {Term::var("X")}};
  EXPECT_THROW(p.add(r), ParseError);
  r.body.push_back(Atom{"q", {Term::var("X")}});
  EXPECT_NO_THROW(p.add(r));
  Rule bad = r;
  bad.body = {Atom{"q", {Term::var("X"), Term::var("Y")}}};
  EXPECT_THROW(p.add(bad), ArityError);
}

TEST(RuleLanguage, InputAndDefinedPredicates) {
  const Program p = parse_program(
      "story_relation(knows,person,person). story_property(has_property,tall). gender_marker(belongs_to_group,male).\n"
      "friend(X,Y) :- knows(X,Y), has_property(X,tall).\n"
      "odd(X) :- mystery(X).\n");
  const auto inputs = p.input_predicates();
  EXPECT_TRUE(inputs.count("knows"));
  EXPECT_TRUE(inputs.count("has_property"));
  EXPECT_TRUE(inputs.count("belongs_to_group"));
  EXPECT_TRUE(inputs.count("is_person"));
  EXPECT_TRUE(p.defined_predicates().count("friend"));
  EXPECT_EQ(undeclared_body_predicates(p), (std::vector<std::string>{"mystery"}));
}

TEST(RuleLanguage, ShippedWorldsAreClosed) {
  for (const char* w : {"nora.lp", "nora_mini.lp", "grandma_mini.lp", "daughter_mini.lp"}) {
    const Program& p = fixture::world(w);
    EXPECT_FALSE(p.empty()) << w;
    if (std::string(w) != "nora_mini.lp") {
      EXPECT_TRUE(undeclared_body_predicates(p).empty()) << w;
    }
  }
}

TEST(RuleLanguage, FileErrorsNameThePath) {
  EXPECT_THROW(parse_program_file("/nonexistent/world.lp"), IoError);
}

TEST(RuleLanguage, PrintedRules) {
  const Program p = parse_program("p(X,Y) :- q(X,Z), r(Z,Y), X != Y.\n:- p(X,X).\n1{s(a,b); s(a,c)}2.");
  EXPECT_EQ(to_string(p.rules()[0]), "p(X,Y) :- q(X,Z), r(Z,Y), X != Y.");
  EXPECT_EQ(to_string(p.rules()[1]), ":- p(X,X).");
  EXPECT_EQ(to_string(p.rules()[2]), "1{s(a,b); s(a,c)}2.");
}

TEST(RuleLanguageProperty, SerializeRoundTrips) {
  for (std::uint64_t seed = 1; seed <= 300; ++seed) {
    const auto c = oracle::tiny_case(seed);
    const Program p = parse_program(c.world);
    const Program q = parse_program(serialize_program(p));
    ASSERT_EQ(p, q) << "seed " << seed << "\n" << c.world;
    EXPECT_EQ(serialize_program(q), serialize_program(p));
  }
  const Program& nora = fixture::nora_world();
  EXPECT_EQ(parse_program(serialize_program(nora)), nora);
}
