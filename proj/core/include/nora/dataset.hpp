#pragma once

#include <cstddef>
#include <filesystem>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "nora/generator.hpp"
#include "nora/instance.hpp"
#include "nora/metrics.hpp"
#include "nora/rule_language.hpp"

namespace nora {

// ---------------------------------------------------------------------------
// Split specifications

struct Bound {
  enum class Cmp { Any, Lt, Le, Eq, Ge, Gt };
  Cmp cmp = Cmp::Any;
  Rational value;

  bool admits(const Rational& x) const;
  bool admits(std::uint32_t x) const { return admits(Rational(x, 1)); }
  std::string str() const;  // "<=6", ">1.5" is written as ">3/2", "-" for Any
  static Bound parse(std::string_view text);

  friend bool operator==(const Bound&, const Bound&) = default;
};

struct SplitSpec {
  std::string name;
  Bound depth, width, bl, opec;
  // Depth bound must also hold on a consistent refinement's own proof.
  bool positive_refinement = false;
  bool allow_ambiguous = true;

  bool admits(const ProblemInstance& inst) const;
  // Human-readable reasons the instance fails the bounds (empty when admitted).
  std::vector<std::string> violations(const ProblemInstance& inst) const;

  friend bool operator==(const SplitSpec&, const SplitSpec&) = default;
};

// Named presets: train-a, train-na, test-d, test-w, test-bl, test-opec,
// test-in-dist and the -na variants, plus v1.1-* presets.
SplitSpec split_preset(std::string_view name);
std::vector<std::string> split_preset_names();

std::vector<ProblemInstance> filter_split(const std::vector<ProblemInstance>& pool, const SplitSpec& spec);

// Labels used by `test` that never occur in `train`, sorted.
std::vector<std::string> unseen_labels(const std::vector<ProblemInstance>& train,
                                       const std::vector<ProblemInstance>& test);
// Drops test instances whose label set uses a label unseen in training.
std::vector<ProblemInstance> restrict_to_seen_labels(const std::vector<ProblemInstance>& train,
                                                     const std::vector<ProblemInstance>& test);

// ---------------------------------------------------------------------------
// Balancing

enum class Metric { Depth, Width, Bl, Opec };
inline constexpr Metric kAllMetrics[] = {Metric::Depth, Metric::Width, Metric::Bl, Metric::Opec};
std::string_view to_string(Metric m);

struct BinSpec {
  int depth = 3;
  int width = 3;
  int bl = 2;
  // OPEC uses the fixed bins {0} and {>= 1}.
};

// Equal-width bins over the observed [min, max] of each metric, frozen on the
// pool they were built from; a value on a bin edge goes to the lower bin.
class Binning {
 public:
  Binning() = default;
  Binning(const std::vector<MetricBundle>& pool, const BinSpec& spec);

  // Number of bins, or 1 when the metric is constant on the pool.
  int bins(Metric m) const;
  int bin_of(Metric m, const MetricBundle& mb) const;
  // Per-bin counts of `pool`.
  std::vector<std::size_t> marginal(Metric m, const std::vector<MetricBundle>& pool) const;

 private:
  struct Axis {
    int bins = 1;
    Rational lo, hi;
  };
  const Axis& axis(Metric m) const { return axes_[static_cast<int>(m)]; }
  Axis axes_[4];
};

struct BalanceOptions {
  int max_passes = 20;
  double tolerance = 1.25;  // largest non-empty bin <= tolerance * smallest
};

struct BalanceReport {
  std::vector<std::size_t> kept;  // indices into the input, ascending
  int passes = 0;
  bool balanced = false;
};

// True when every metric's non-empty bins are within the tolerance.
bool is_balanced(const std::vector<MetricBundle>& pool, const Binning& bins, double tolerance);

BalanceReport balance_indices(const std::vector<MetricBundle>& pool, const BinSpec& bins,
                              const BalanceOptions& opts = {});
std::vector<ProblemInstance> balance_by_rejection(const std::vector<ProblemInstance>& pool, const BinSpec& bins,
                                                  const BalanceOptions& opts = {}, BalanceReport* report = nullptr);

// ---------------------------------------------------------------------------
// Labels and encodings

bool label_hard_ambiguous(const Program& world, const ProblemInstance& inst);

struct EncodedGraph {
  struct Node {
    int id = 0;
    std::string name;
    std::string kind;  // "person", "place" or "amb"
    friend bool operator==(const Node&, const Node&) = default;
  };
  struct Edge {
    int from = 0;
    int to = 0;
    std::string label;
    friend bool operator==(const Edge&, const Edge&) = default;
  };
  std::vector<Node> nodes;
  std::vector<Edge> edges;
  int source = 0;
  int target = 0;
  std::vector<std::string> labels;

  std::size_t amb_count() const;
  friend bool operator==(const EncodedGraph&, const EncodedGraph&) = default;
};

inline constexpr std::string_view kAmbExactlyOne = "amb_exactly_one";
inline constexpr std::string_view kAmbAtLeastOne = "amb_at_least_one";

// Binary facts become labelled edges, facts over a reserved constant c become
// self-loops labelled is_<c>, and each ambiguous fact p(x, y1..yk) becomes
// x -p-> amb_i plus amb_i -> y_j edges tagged with its bound kind.
EncodedGraph encode_graph(const Program& world, const Story& story, const std::string& source,
                          const std::string& target, const std::vector<std::string>& labels = {});
std::string to_dot(const EncodedGraph& g);

// ---------------------------------------------------------------------------
// Line-delimited records

inline constexpr std::string_view kInstanceSchema = "nora-instance/1";

std::string to_json_line(const Program& world, const ProblemInstance& inst);
ProblemInstance from_json_line(const Program& world, std::string_view line);

void export_jsonl(const Program& world, const std::vector<ProblemInstance>& instances,
                  const std::filesystem::path& path);
std::vector<ProblemInstance> import_jsonl(const Program& world, const std::filesystem::path& path);

// ---------------------------------------------------------------------------
// Validation

struct Violation {
  std::string id;
  std::string message;
  friend bool operator==(const Violation&, const Violation&) = default;
};

struct ValidateOptions {
  std::optional<SplitSpec> split;
  // Entity and fact ranges checked on sampled (not stitched) stories.
  std::optional<GenConfig> ranges;
  ProofOptions proof;
};

// Re-solves every story and compares labels, metrics and the hard-ambiguous
// flag with the recorded values, then checks the optional split and ranges.
std::vector<Violation> validate_instances(const Program& world, const std::vector<ProblemInstance>& instances,
                                          const ValidateOptions& opts = {});

}  // namespace nora
