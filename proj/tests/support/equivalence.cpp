#include "equivalence.hpp"

#include <map>
#include <sstream>

#include "nora/engine.hpp"
#include "nora/error.hpp"
#include "nora/proof.hpp"

namespace oracle {

namespace {

AtomSet without_typing(const AtomSet& s) {
  AtomSet out;
  for (const auto& a : s)
    if (!nora::is_typing_predicate(a.predicate)) out.insert(a);
  return out;
}

std::string show(const AtomSet& s) {
  std::string out = "{";
  for (const auto& a : s) out += (out.size() > 1 ? " " : "") + a.str();
  return out + "}";
}

}  // namespace

std::string compare_with_engine(const TinyCase& c, EquivalenceStats* stats) {
  const nora::Program world = nora::parse_program(c.world);
  const nora::Story story = nora::Story::parse(c.story, world);
  const World w = make_world(world, story);
  const auto ms = models(w, story);
  const auto res = nora::answer_sets(world, story);

  if (res.refinement_count() != ms.size())
    return "refinement count " + std::to_string(res.refinement_count()) + " vs oracle " + std::to_string(ms.size());

  // Oracle models keyed by their selected choice atoms.
  AtomSet choice_atoms;
  for (const auto& f : story.ambiguous()) choice_atoms.insert(f.choices.begin(), f.choices.end());
  std::map<AtomSet, const Model*> by_selection;
  for (const auto& m : ms) {
    AtomSet key;
    for (const auto& a : m.base)
      if (choice_atoms.count(a)) key.insert(a);
    by_selection[key] = &m;
  }

  std::size_t consistent = 0;
  for (std::size_t k = 0; k < res.refinement_count(); ++k) {
    const auto ref = res.refinement(k);
    AtomSet key;
    for (const auto& a : ref.facts)
      if (choice_atoms.count(a)) key.insert(a);
    auto it = by_selection.find(key);
    if (it == by_selection.end()) return "refinement " + std::to_string(k) + " has no oracle counterpart";
    const Model& m = *it->second;
    const bool engine_ok =
        std::find(res.ref_plus_indices().begin(), res.ref_plus_indices().end(), k) != res.ref_plus_indices().end();
    if (engine_ok != m.consistent) return "refinement " + std::to_string(k) + " consistency differs";
    if (stats) ++stats->refinements;
    const auto as = res.answer_set(k);
    const AtomSet engine_atoms = without_typing(AtomSet(as.atoms.begin(), as.atoms.end()));
    const AtomSet oracle_atoms = without_typing(m.atoms);
    if (engine_ok && engine_atoms != oracle_atoms)
      return "answer set " + std::to_string(k) + " differs:\n  engine " + show(engine_atoms) + "\n  oracle " +
             show(oracle_atoms);
    consistent += engine_ok;

    std::vector<std::optional<GroundAtom>> goals;
    if (engine_ok) {
      for (const auto& a : m.atoms)
        if (!m.base.count(a)) goals.emplace_back(a);
    } else {
      goals.emplace_back(std::nullopt);
    }
    for (const auto& goal : goals) {
      bool capped = false;
      const auto want = min_steps(w, m.base, goal, 4'000'000, &capped);
      if (capped) {
        if (stats) ++stats->capped;
        continue;
      }
      const std::string what = goal ? goal->str() : std::string("contradiction");
      if (!want) return "oracle finds no proof of " + what + " in refinement " + std::to_string(k);
      const nora::Proof p = nora::minimal_proof(res, k, goal);
      if (p.size() != *want)
        return "proof of " + what + " in refinement " + std::to_string(k) + " has " + std::to_string(p.size()) +
               " steps, oracle " + std::to_string(*want) + "\n" + nora::format_trace(p);
      if (auto why = check_proof(w, m.base, p); !why.empty())
        return "proof of " + what + " is invalid: " + why + "\n" + nora::format_trace(p);
      if (stats) ++stats->proofs;
    }
  }

  if (!consistent) return {};
  std::vector<GroundAtom> eng = res.entailed();
  const AtomSet engine_entailed(eng.begin(), eng.end());
  const AtomSet oracle_entailed = entailed(w, story, ms);
  if (engine_entailed != oracle_entailed)
    return "entailed atoms differ:\n  engine " + show(engine_entailed) + "\n  oracle " + show(oracle_entailed);
  for (const auto& x : story.entities())
    for (const auto& y : story.entities()) {
      const auto a = res.relations(x.name, y.name);
      const auto b = relations(ms, x.name, y.name);
      if (a != b) return "R(" + x.name + "," + y.name + ") differs";
      if (nora::entailed_relations(world, story, x.name, y.name) != b)
        return "entailed_relations(" + x.name + "," + y.name + ") differs";
    }
  return {};
}

}  // namespace oracle
