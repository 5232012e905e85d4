#pragma once

#include <cstddef>
#include <cstdint>
#include <map>
#include <memory>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include "nora/rule_language.hpp"
#include "nora/story.hpp"

namespace nora {

namespace detail {
struct Solution;
}

inline constexpr std::size_t kDefaultRefinementCap = 4096;

struct Refinement {
  std::size_t index = 0;
  // Per ambiguous fact, the indices of the choices made true.
  std::vector<std::vector<std::size_t>> selection;
  std::vector<GroundAtom> facts;
};

struct AnswerSet {
  std::vector<GroundAtom> atoms;  // sorted
  std::size_t origin = 0;         // refinement index
  std::map<GroundAtom, std::uint32_t> layers;

  bool contains(const GroundAtom& a) const { return layers.count(a) > 0; }
};

struct GroundRule {
  std::size_t rule_index = 0;
  std::optional<GroundAtom> head;  // absent for constraints
  std::vector<GroundAtom> body;
  friend auto operator<=>(const GroundRule&, const GroundRule&) = default;
  friend bool operator==(const GroundRule&, const GroundRule&) = default;
};

std::string to_string(const GroundRule& r);

struct Closure {
  std::map<GroundAtom, std::uint32_t> layers;
  bool contains(const GroundAtom& a) const { return layers.count(a) > 0; }
  std::size_t size() const noexcept { return layers.size(); }
};

// All instantiations of the program's definite rules and constraints over
// the constant universe (story entities, reserved and program constants).
// Instantiations whose inequalities bind equal constants are dropped.
std::vector<GroundRule> ground(const Program& program, const Story& story);

// Least fixpoint of the ground definite rules (constraints are ignored).
Closure forward_chain(const std::vector<GroundAtom>& facts, const std::vector<GroundRule>& rules);

// Ground constraints whose bodies hold in the closure.
std::vector<GroundRule> check_constraints(const Closure& closure, const std::vector<GroundRule>& constraints);

std::vector<Refinement> enumerate_refinements(const Story& story, std::size_t cap = kDefaultRefinementCap);
// Product of per-fact admissible selection counts (saturates at SIZE_MAX).
std::size_t refinement_count(const Story& story);

struct EngineOptions {
  std::size_t refinement_cap = kDefaultRefinementCap;
};

class EntailmentResult {
 public:
  EntailmentResult() = default;
  explicit EntailmentResult(std::shared_ptr<detail::Solution> s) : sol_(std::move(s)) {}

  std::size_t refinement_count() const;
  const std::vector<std::size_t>& ref_plus_indices() const;
  const std::vector<std::size_t>& ref_minus_indices() const;
  bool consistent() const { return !ref_plus_indices().empty(); }

  std::vector<AnswerSet> ref_plus() const;
  std::vector<Refinement> ref_minus() const;
  AnswerSet answer_set(std::size_t refinement) const;
  Refinement refinement(std::size_t index) const;
  bool holds(std::size_t refinement, const GroundAtom& a) const;
  std::vector<GroundRule> violations(std::size_t refinement) const;

  std::vector<GroundAtom> entailed() const;
  // R for (x, y): predicates p with p(x,y) in every answer set.
  // Throws InconsistentStory when there is no answer set.
  std::set<std::string> relations(const std::string& x, const std::string& y) const;

  const Story& story() const;
  const Program& world() const;
  const detail::Solution& solution() const { return *sol_; }
  std::shared_ptr<const detail::Solution> shared() const { return sol_; }

 private:
  std::shared_ptr<detail::Solution> sol_;
};

EntailmentResult answer_sets(const Program& world, const Story& story, const EngineOptions& opts = {});
EntailmentResult answer_sets(std::shared_ptr<const Program> world, std::shared_ptr<const Story> story,
                             const EngineOptions& opts = {});

std::set<std::string> entailed_relations(const Program& world, const Story& story, const std::string& x,
                                         const std::string& y);

}  // namespace nora
