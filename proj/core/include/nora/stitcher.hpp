#pragma once

#include <cstddef>
#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "nora/dataset.hpp"
#include "nora/instance.hpp"
#include "nora/rule_language.hpp"

namespace nora {

// Replace `lemma`, a binary fact about two base entities, by the donor story.
// `renaming` maps donor entity names to stitched names; the donor's query
// source and target must land on the lemma's arguments and every other donor
// entity on a name the base does not use. Unmapped donor entities keep their
// names. A plan without a lemma is a no-op stitch.
struct StitchPlan {
  std::optional<GroundAtom> lemma;
  std::map<std::string, std::string> renaming;
};

struct StitchOptions {
  bool allow_ambiguous = false;
  ProofOptions proof;
};

// Entity renaming to p0, p1, ... and loc0, loc1, ... in story order.
std::map<std::string, std::string> canonical_renaming(const Story& story);

// Stitches `donor` into `base` and renames the result with `rename_after`
// (canonical_renaming of the union when nullopt). Labels, metrics and the
// hard-ambiguous flag are recomputed on the stitched story. The result's
// lineage holds this single step. Throws StitchError.
ProblemInstance stitch(const Program& world, const ProblemInstance& base, const ProblemInstance& donor,
                       const StitchPlan& plan, const std::optional<std::map<std::string, std::string>>& rename_after,
                       const std::string& id, const StitchOptions& opts = {});

struct ExpandOptions {
  std::size_t rounds = 1;
  std::uint64_t seed = 1;
  // (lemma, donor) pairs tried per base and round.
  std::size_t candidate_cap = 16;
  unsigned jobs = 1;
  std::string id_prefix = "x";
  StitchOptions stitch;
};

struct ExpandReport {
  std::size_t bases = 0;
  std::size_t stitched = 0;  // successful stitch calls
  std::size_t failed = 0;    // candidate pairs rejected by stitch
};

// For each pool instance, stitches up to `rounds` times with randomly chosen
// compatible donors and keeps the first state admitted by `target`. A state
// admitted before any stitch is kept unchanged. Stitched outputs are named
// id_prefix + running index in pool order.
std::vector<ProblemInstance> recursive_expand(const Program& world, const std::vector<ProblemInstance>& pool,
                                              const SplitSpec& target, const ExpandOptions& opts = {},
                                              ExpandReport* report = nullptr);

// Rebuilds a stitched instance from its lineage and the component pool. An
// instance without lineage is looked up in the pool by id.
ProblemInstance replay(const Program& world, const std::vector<ProblemInstance>& pool, const ProblemInstance& record,
                       const StitchOptions& opts = {});

}  // namespace nora
