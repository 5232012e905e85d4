#include "invariance.hpp"

#include <algorithm>
#include <map>
#include <random>
#include <sstream>
#include <vector>

#include "nora/engine.hpp"
#include "nora/error.hpp"
#include "nora/generator.hpp"
#include "nora/metrics.hpp"
#include "nora/rule_language.hpp"
#include "nora/story.hpp"
#include "oracles.hpp"

namespace invariance {

namespace {

std::string show(const nora::MetricBundle& m) {
  std::ostringstream os;
  os << "d=" << m.max_depth << " w=" << m.max_width << " bl=" << m.max_bl.str() << " opec=" << m.max_opec
     << " dpos=" << m.depth_positive;
  return os.str();
}

const nora::Program& grandma_world() {
  static const nora::Program p = nora::parse_program_file(std::string(NORA_TEST_WORLDS) + "/grandma_mini.lp");
  return p;
}

// Story text with its fact lines shuffled.
std::string shuffled_text(const nora::Story& s, std::mt19937_64& rng) {
  std::vector<std::string> lines;
  std::istringstream in(s.serialize());
  for (std::string line; std::getline(in, line);)
    if (!line.empty()) lines.push_back(line);
  std::shuffle(lines.begin(), lines.end(), rng);
  std::string out;
  for (const auto& l : lines) out += l + "\n";
  return out;
}

}  // namespace

std::string metric_invariance_case(std::uint64_t seed) {
  std::mt19937_64 rng(seed * 0x9e3779b97f4a7c15ULL + 7);
  nora::Program owned;
  const nora::Program* world = nullptr;
  nora::Story story;
  if (seed % 2 == 0) {
    const auto c = oracle::tiny_case(seed);
    owned = nora::parse_program(c.world);
    world = &owned;
    story = nora::Story::parse(c.story, *world);
  } else {
    world = &grandma_world();
    nora::GenConfig cfg;
    cfg.entities = {3, 6};
    cfg.facts = {3, 7};
    cfg.ambiguous = {0, 1};
    cfg.person_percent = 1.0;
    try {
      story = nora::generate_story(*world, cfg, seed).story;
    } catch (const nora::GenerationFailure&) {
      return metric_invariance_case(seed + 0x100000000ULL);
    }
  }
  // Queries are only posed on stories with at least one answer set.
  if (nora::answer_sets(*world, story).ref_plus_indices().empty())
    return metric_invariance_case(seed + 0x100000000ULL);

  std::vector<std::string> names;
  for (const auto& e : story.entities()) names.push_back(e.name);
  if (names.size() < 2) return metric_invariance_case(seed + 0x100000000ULL);
  const std::string a = names[rng() % names.size()];
  std::string b = a;
  while (b == a) b = names[rng() % names.size()];

  std::vector<std::size_t> perm(names.size());
  for (std::size_t i = 0; i < perm.size(); ++i) perm[i] = i;
  std::shuffle(perm.begin(), perm.end(), rng);
  std::map<std::string, std::string> mapping;
  for (std::size_t i = 0; i < names.size(); ++i) mapping[names[i]] = "z" + std::to_string(perm[i]) + "_" + names[i];
  const nora::Story moved = nora::Story::parse(shuffled_text(story.renamed(mapping), rng), *world);

  const auto r1 = nora::entailed_relations(*world, story, a, b);
  const auto r2 = nora::entailed_relations(*world, moved, mapping.at(a), mapping.at(b));
  const auto m1 = nora::compute_metrics(*world, story, a, b, r1);
  const auto m2 = nora::compute_metrics(*world, moved, mapping.at(a), mapping.at(b), r2);
  if (r1 == r2 && m1 == m2) return "";
  std::ostringstream os;
  os << "seed " << seed << " query (" << a << "," << b << "): " << show(m1) << " vs " << show(m2)
     << (r1 == r2 ? "" : " (labels differ)") << "\n"
     << story.serialize();
  return os.str();
}

}  // namespace invariance
