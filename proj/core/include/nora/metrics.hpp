#pragma once

#include <compare>
#include <cstddef>
#include <cstdint>
#include <map>
#include <memory>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include "nora/engine.hpp"
#include "nora/proof.hpp"

namespace nora {

struct Rational {
  std::int64_t num = 0;
  std::int64_t den = 1;

  Rational() = default;
  Rational(std::int64_t n, std::int64_t d);

  double value() const noexcept { return static_cast<double>(num) / static_cast<double>(den); }
  std::string str() const;  // "5/3", or "2" when integral
  static Rational parse(const std::string& s);

  friend bool operator==(const Rational&, const Rational&) = default;
  friend std::strong_ordering operator<=>(const Rational& a, const Rational& b) {
    return a.num * b.den <=> b.num * a.den;
  }
};

struct MetricBundle {
  std::uint32_t max_depth = 0;
  std::uint32_t max_width = 1;
  Rational max_bl;
  std::uint32_t max_opec = 0;
  // Max depth over consistent refinements only; used for hardness bounds
  // that must hold on a positive refinement.
  std::uint32_t depth_positive = 0;

  friend bool operator==(const MetricBundle&, const MetricBundle&) = default;
};

// Binary story facts as an undirected multigraph over persons and places.
// Returns the facts from `facts` lying on no simple path between a and b;
// facts that are not binary over two distinct entities are always included.
std::vector<GroundAtom> off_path_edges(const Story& story, const std::vector<GroundAtom>& facts, const std::string& a,
                                       const std::string& b);
std::vector<GroundAtom> off_path_edges(const Story& story, const std::string& a, const std::string& b);

// Steps divided by distinct non-reserved entities mentioned in the proof.
Rational backtrack_load(const Proof& proof, const Story& story);

// Story-fact leaves of `proof` that are off-path for (a, b) in `facts`.
std::uint32_t opec(const Proof& proof, const Story& story, const std::vector<GroundAtom>& facts, const std::string& a,
                   const std::string& b);

// Proof and metric computations over one solved story. Caches proofs per
// (refinement, goal); not safe for concurrent use.
class Analyzer {
 public:
  explicit Analyzer(EntailmentResult res, ProofOptions opts = {});
  ~Analyzer();
  Analyzer(Analyzer&&) noexcept;
  Analyzer& operator=(Analyzer&&) noexcept;

  const EntailmentResult& result() const noexcept { return res_; }

  Proof proof(std::size_t refinement, const GroundAtom& goal);
  Proof contradiction(std::size_t refinement);

  std::uint32_t depth(const std::string& a, const std::string& b, const std::set<std::string>& rels);
  std::uint32_t width(const GroundAtom& fact);
  MetricBundle metrics(const std::string& a, const std::string& b, const std::set<std::string>& rels);
  // Hard-ambiguous label for query (a, b) with label set rels.
  bool hard_ambiguous(const std::string& a, const std::string& b, const std::set<std::string>& rels);

 private:
  struct Impl;
  EntailmentResult res_;
  std::unique_ptr<Impl> impl_;
};

// Convenience wrappers solving from scratch.
std::uint32_t depth(const Program& world, const Story& story, const std::string& a, const std::string& b,
                    const std::set<std::string>& rels);
std::uint32_t width(const Program& world, const Story& story, const GroundAtom& fact);
MetricBundle compute_metrics(const Program& world, const Story& story, const std::string& a, const std::string& b,
                             const std::set<std::string>& rels);

}  // namespace nora
