#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <map>
#include <memory>
#include <string>
#include <string_view>
#include <vector>

#include "nora/instance.hpp"
#include "nora/proof.hpp"
#include "nora/rng.hpp"
#include "nora/rule_language.hpp"
#include "nora/story.hpp"

namespace nora {

struct IntRange {
  int lo = 0;
  int hi = 0;
  friend bool operator==(const IntRange&, const IntRange&) = default;
};

struct GenConfig {
  double person_percent = 0.75;
  double no_gender_assign = 0.3;
  IntRange entities{20, 50};
  IntRange facts{30, 75};
  IntRange ambiguous{0, 3};
  double exactly_one_weight = 0.5;  // P(bounds 1..1); otherwise 1..k
  double three_choice_weight = 0.3;  // P(k = 3); otherwise k = 2
  // Fraction of facts that may be gender facts.
  double max_gender_share = 0.35;
  std::uint64_t seed = 1;
  std::map<std::string, double> predicate_weights;  // default weight 1
  int max_rejections_per_slot = 50;
  int max_story_retries = 20;
  std::size_t max_refinements = 64;

  // Throws Error naming the offending field.
  void validate() const;
  // "key = value" lines; '#' starts a comment. Unknown keys are errors.
  static GenConfig parse(std::string_view text);
  static GenConfig load(const std::filesystem::path& path);
  std::string to_text() const;

  friend bool operator==(const GenConfig&, const GenConfig&) = default;
};

// Story-level vocabulary declared by a world program.
struct Vocabulary {
  struct Relation {
    std::string predicate;
    EntityKind first = EntityKind::Person;
    EntityKind second = EntityKind::Person;
  };
  struct Property {
    std::string predicate;
    std::string value;
  };
  std::vector<Relation> relations;
  std::vector<Property> properties;
  std::vector<Property> genders;

  // Throws Error when the world declares no story relations.
  static Vocabulary from_world(const Program& world);
};

struct GenRecord {
  Story story;
  std::uint64_t seed = 0;
  double person_percent = 0.0;
  double no_gender_assign = 0.0;
  std::size_t rejections = 0;  // discarded facts, all attempts
  std::size_t attempts = 1;    // story attempts used

  friend bool operator==(const GenRecord&, const GenRecord&) = default;
};

// Throws GenerationFailure after cfg.max_story_retries failed attempts.
GenRecord generate_story(const Program& world, const GenConfig& cfg, Rng& rng);
GenRecord generate_story(const Program& world, const GenConfig& cfg, std::uint64_t seed);

struct HarvestOptions {
  std::string id_prefix;
  ProofOptions proof;
};

struct HarvestResult {
  std::vector<ProblemInstance> instances;
  std::size_t skipped = 0;  // queries dropped on SearchBudgetExceeded
};

// One instance per (source, target) pair of an entailed binary atom over two
// distinct story entities. Pairs follow the sorted entailed-atom order.
HarvestResult harvest_instances(const Program& world, const Story& story, const HarvestOptions& opts = {});

struct BatchItem {
  std::size_t index = 0;
  bool ok = false;
  GenRecord record;
  std::vector<ProblemInstance> instances;
  std::size_t skipped = 0;
  std::string error;  // set when !ok
};

// Generates and harvests `count` stories. Story i uses derive_seed(cfg.seed, i);
// results are ordered by index whatever `jobs` is.
std::vector<BatchItem> generate_batch(const Program& world, const GenConfig& cfg, std::size_t count,
                                      unsigned jobs = 1, const ProofOptions& proof = {});

}  // namespace nora
