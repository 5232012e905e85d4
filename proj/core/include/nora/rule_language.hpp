#pragma once

#include <cstddef>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

namespace nora {

struct Term {
  enum class Kind { Variable, Constant };
  Kind kind = Kind::Constant;
  std::string name;

  static Term var(std::string n) { return {Kind::Variable, std::move(n)}; }
  static Term constant(std::string n) { return {Kind::Constant, std::move(n)}; }
  bool is_var() const noexcept { return kind == Kind::Variable; }
  friend bool operator==(const Term&, const Term&) = default;
};

struct Atom {
  std::string predicate;
  std::vector<Term> args;

  bool ground() const noexcept;
  friend bool operator==(const Atom&, const Atom&) = default;
};

struct Inequality {
  Term lhs;
  Term rhs;
  friend bool operator==(const Inequality&, const Inequality&) = default;
};

using BodyLiteral = std::variant<Atom, Inequality>;

struct Bounds {
  int lower = 1;
  int upper = 1;
  friend bool operator==(const Bounds&, const Bounds&) = default;
};

struct Rule {
  enum class Kind { Definite, Constraint, Fact, CardinalityFact };
  Kind kind = Kind::Fact;
  std::optional<Atom> head;
  std::vector<BodyLiteral> body;
  std::optional<Bounds> bounds;
  std::vector<Atom> choices;
  std::size_t line = 0;  // source line, 0 when built in code

  // Structural equality; the source line is ignored.
  friend bool operator==(const Rule& a, const Rule& b) {
    return a.kind == b.kind && a.head == b.head && a.body == b.body && a.bounds == b.bounds &&
           a.choices == b.choices;
  }
};

class Program {
 public:
  Program() = default;

  // Appends a rule after checking it against the predicate table.
  void add(Rule r);

  const std::vector<Rule>& rules() const noexcept { return rules_; }
  const std::map<std::string, std::size_t>& arities() const noexcept { return arities_; }
  // Constants occurring anywhere in the program, in first-occurrence order.
  const std::vector<std::string>& constants() const noexcept { return constants_; }
  bool has_constant(std::string_view c) const;
  const std::vector<std::string>& warnings() const noexcept { return warnings_; }
  void add_warning(std::string w) { warnings_.push_back(std::move(w)); }

  // Predicates that occur in a rule head, a fact or a cardinality choice.
  std::set<std::string> defined_predicates() const;
  // Story-level input predicates declared through story_relation/2..3,
  // story_property/2 and gender_marker/2 bookkeeping facts, plus the typing
  // predicates is_person/1 and is_place/1.
  std::set<std::string> input_predicates() const;

  bool empty() const noexcept { return rules_.empty(); }
  std::size_t size() const noexcept { return rules_.size(); }

  friend bool operator==(const Program& a, const Program& b) { return a.rules_ == b.rules_; }

 private:
  std::vector<Rule> rules_;
  std::map<std::string, std::size_t> arities_;
  std::vector<std::string> constants_;
  std::set<std::string> constant_set_;
  std::vector<std::string> warnings_;
};

// Parses rule text. Clingo directives (#show, #const, ...) are skipped and
// reported in Program::warnings().
Program parse_program(std::string_view text);
Program parse_program_file(const std::string& path);

std::string serialize_program(const Program& p);
std::string to_string(const Term& t);
std::string to_string(const Atom& a);
std::string to_string(const Rule& r);

// Checks that every body predicate is defined or declared as a story input.
// Returns the offending predicate names (empty when the world is closed).
std::vector<std::string> undeclared_body_predicates(const Program& world);

inline constexpr std::string_view kPersonType = "is_person";
inline constexpr std::string_view kPlaceType = "is_place";

}  // namespace nora
