#pragma once

#include <cstddef>
#include <optional>
#include <string>
#include <vector>

#include "nora/engine.hpp"

namespace nora {

struct ProofStep {
  std::size_t rule_index = 0;
  std::optional<GroundAtom> derived;  // absent for the final step of a contradiction proof
  std::vector<GroundAtom> premises;
  friend bool operator==(const ProofStep&, const ProofStep&) = default;
};

struct Proof {
  std::optional<GroundAtom> goal;  // absent for a contradiction proof
  std::vector<ProofStep> steps;    // premises precede their uses
  std::size_t refinement = 0;
  // Order-independent identity of the step multiset.
  std::string key;

  std::size_t size() const noexcept { return steps.size(); }
  bool contradiction() const noexcept { return !goal; }
  // Premises that no step derives, in first-use order.
  std::vector<GroundAtom> leaves() const;
};

struct ProofOptions {
  // Search nodes allowed per proof before SearchBudgetExceeded is raised.
  std::size_t node_budget = 500'000;
};

// Globally minimal proof of `goal` in one refinement, or of the refinement's
// inconsistency when goal is nullopt. Throws ProofError if not derivable.
Proof minimal_proof(const EntailmentResult& res, std::size_t refinement, const std::optional<GroundAtom>& goal,
                    const ProofOptions& opts = {});

// One line per fact and step, e.g.
//   Fact: school_mates_with(ram,irfan)
//   1. living_in_same_place(ram,irfan) :- school_mates_with(ram,irfan).
std::string format_trace(const Proof& proof);

}  // namespace nora
