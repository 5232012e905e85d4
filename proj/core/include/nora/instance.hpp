#pragma once

#include <cstddef>
#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include "nora/metrics.hpp"
#include "nora/story.hpp"

namespace nora {

// One stitching step: `lemma` (a base story fact) was replaced by the donor
// story renamed with `renaming`, then every entity was renamed by `rename_after`.
// A step with an empty donor only applies `rename_after`.
struct LineageStep {
  std::string base;
  std::string donor;
  std::string lemma;
  std::map<std::string, std::string> renaming;
  std::map<std::string, std::string> rename_after;
  friend bool operator==(const LineageStep&, const LineageStep&) = default;
};

struct Provenance {
  std::uint64_t seed = 0;
  std::size_t story_index = 0;
  double person_percent = 0.0;
  double no_gender_assign = 0.0;
  std::size_t rejections = 0;
  std::string origin = "sampled";  // "sampled" or "stitched"
  std::vector<LineageStep> lineage;
  friend bool operator==(const Provenance&, const Provenance&) = default;
};

struct ProblemInstance {
  std::string id;
  Story story;
  std::string source;
  std::string target;
  std::vector<std::string> labels;  // R, sorted
  MetricBundle metrics;
  bool hard_ambiguous = false;
  Provenance provenance;

  bool ambiguous() const noexcept { return !story.ambiguous().empty(); }
  friend bool operator==(const ProblemInstance&, const ProblemInstance&) = default;
};

}  // namespace nora
