#pragma once

#include <cstdint>
#include <optional>
#include <unordered_map>
#include <unordered_set>
#include <vector>

#include "solution.hpp"

namespace nora::detail {

struct IdProof {
  AtomId goal = kNone;  // kNone for a contradiction proof
  std::vector<const Support*> steps;  // topological; the last step derives the goal
  std::vector<std::uint32_t> key;     // canonical step multiset
  std::size_t size() const noexcept { return steps.size(); }
};

// Exact minimum-size proof by branch and bound between the layer bound and a
// layered greedy proof. Throws SearchBudgetExceeded past `budget` nodes.
IdProof search_proof(const Context& ctx, const Model& m, AtomId goal, std::size_t budget);

// All proofs of exactly `size` steps, deduplicated by key and sorted by it,
// stopping after `cap` of them (then *capped is set).
std::vector<IdProof> search_all_proofs(const Context& ctx, const Model& m, AtomId goal, std::size_t size,
                                       std::size_t budget, std::size_t cap, bool* capped = nullptr);

// Per-model proof memo. When every support of a goal has a single derived
// premise, the goal's proof is composed from the premises' cached proofs;
// the result is the one search_proof would return.
class ProofCache {
 public:
  ProofCache(const Context& ctx, const Model& m, std::size_t budget) : ctx_(ctx), m_(m), budget_(budget) {}
  const IdProof& get(AtomId goal);  // kNone for the contradiction proof
  // Every minimal proof of `goal` (at most kAllCap, sorted by key). Falls
  // back to get(goal) alone when enumeration exceeds the node budget.
  const std::vector<IdProof>& all(AtomId goal);

  static constexpr std::size_t kAllCap = 64;

 private:
  std::optional<IdProof> compose(AtomId goal);

  const Context& ctx_;
  const Model& m_;
  std::size_t budget_;
  std::unordered_map<AtomId, IdProof> done_;
  std::unordered_map<AtomId, std::vector<IdProof>> all_;
  std::unordered_set<AtomId> over_budget_;
  std::unordered_set<AtomId> active_;
};

// Story-fact leaves (plain facts and selected choices) of a proof.
std::vector<AtomId> story_leaves(const Context& ctx, const Model& m, const IdProof& p);

}  // namespace nora::detail
