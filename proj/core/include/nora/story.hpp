#pragma once

#include <compare>
#include <cstddef>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <string_view>
#include <vector>

#include "nora/rule_language.hpp"

namespace nora {

struct GroundAtom {
  std::string predicate;
  std::vector<std::string> args;

  GroundAtom() = default;
  GroundAtom(std::string p, std::vector<std::string> a) : predicate(std::move(p)), args(std::move(a)) {}

  std::string str() const;
  Atom to_atom() const;
  static GroundAtom from_atom(const Atom& a);
  // Parses "pred(a,b)". Throws ParseError.
  static GroundAtom parse(std::string_view text);

  friend auto operator<=>(const GroundAtom&, const GroundAtom&) = default;
  friend bool operator==(const GroundAtom&, const GroundAtom&) = default;
};

enum class EntityKind { Person, Place, Reserved };

std::string_view to_string(EntityKind k);

struct Entity {
  std::string name;
  EntityKind kind = EntityKind::Person;
  friend bool operator==(const Entity&, const Entity&) = default;
};

struct AmbiguousFact {
  int lower = 1;
  int upper = 1;
  std::vector<GroundAtom> choices;

  bool exactly_one() const noexcept { return upper == 1; }
  // Admissible selections as sorted choice-index lists, in enumeration order:
  // by size, then lexicographically.
  std::vector<std::vector<std::size_t>> selections() const;
  friend bool operator==(const AmbiguousFact&, const AmbiguousFact&) = default;
};

// A story: plain facts, ambiguous facts and typed entities. Entities keep
// first-appearance order, which fixes tie-breaking in proof search.
class Story {
 public:
  Story() = default;

  // Builds a story from parsed facts. Constants that occur in `world` are
  // reserved. is_person/is_place facts declare kinds; otherwise the second
  // argument of living_in is a place and everything else a person.
  static Story from_program(const Program& facts, const Program& world);
  static Story parse(std::string_view text, const Program& world);

  const std::vector<GroundAtom>& facts() const noexcept { return facts_; }
  const std::vector<AmbiguousFact>& ambiguous() const noexcept { return ambiguous_; }
  // Persons and places in first-appearance order.
  const std::vector<Entity>& entities() const noexcept { return entities_; }
  const std::set<std::string>& reserved() const noexcept { return reserved_; }

  std::optional<EntityKind> kind_of(std::string_view name) const;
  bool has_fact(const GroundAtom& a) const;
  std::size_t person_count() const;
  std::size_t place_count() const;
  std::size_t entity_count() const;
  // Plain plus ambiguous facts.
  std::size_t fact_count() const noexcept { return facts_.size() + ambiguous_.size(); }

  // Mutators used by the generator and the stitcher; each re-validates.
  void add_entity(const std::string& name, EntityKind kind);
  void add_fact(const GroundAtom& a);
  bool remove_fact(const GroundAtom& a);
  void add_ambiguous(AmbiguousFact f);
  // Replaces plain fact `a` by an ambiguous fact containing it.
  void replace_with_ambiguous(const GroundAtom& a, AmbiguousFact f);

  // Applies an entity renaming (unmapped names keep theirs). Order is kept.
  Story renamed(const std::map<std::string, std::string>& mapping) const;

  // Rule text: typing facts, plain facts, ambiguous facts.
  std::string serialize() const;

  friend bool operator==(const Story&, const Story&) = default;

 private:
  void note_constants(const GroundAtom& a);
  void check_overlap(const AmbiguousFact& f) const;

  std::vector<GroundAtom> facts_;
  std::vector<AmbiguousFact> ambiguous_;
  std::vector<Entity> entities_;
  std::set<std::string> reserved_;
};

bool is_typing_predicate(std::string_view p);

}  // namespace nora
