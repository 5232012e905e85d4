#include "nora/stitcher.hpp"

#include <algorithm>
#include <atomic>
#include <set>
#include <thread>

#include "nora/engine.hpp"
#include "nora/error.hpp"
#include "nora/rng.hpp"

namespace nora {

std::map<std::string, std::string> canonical_renaming(const Story& story) {
  std::map<std::string, std::string> out;
  std::size_t persons = 0, places = 0;
  for (const auto& e : story.entities())
    out[e.name] = e.kind == EntityKind::Place ? "loc" + std::to_string(places++) : "p" + std::to_string(persons++);
  return out;
}

namespace {

using Kind = StitchError::Kind;

std::string mapped(const std::map<std::string, std::string>& m, const std::string& n) {
  auto it = m.find(n);
  return it == m.end() ? n : it->second;
}

GroundAtom rename_atom(const GroundAtom& a, const Story& story, const std::map<std::string, std::string>& m) {
  GroundAtom b = a;
  for (auto& c : b.args)
    if (!story.reserved().count(c)) c = mapped(m, c);
  return b;
}

// Union of base (minus the lemma) and the renamed donor.
Story united(const Program& world, const ProblemInstance& base, const ProblemInstance& donor, const StitchPlan& plan) {
  const GroundAtom& lemma = *plan.lemma;
  const Story& bs = base.story;
  const Story& ds = donor.story;
  if (lemma.args.size() != 2) throw StitchError(Kind::LemmaMismatch, "lemma '" + lemma.str() + "' is not binary");
  for (const auto& a : lemma.args) {
    auto k = bs.kind_of(a);
    if (!k || *k == EntityKind::Reserved)
      throw StitchError(Kind::LemmaMismatch, "lemma argument '" + a + "' is not a base entity");
  }
  if (std::find(donor.labels.begin(), donor.labels.end(), lemma.predicate) == donor.labels.end())
    throw StitchError(Kind::LemmaMismatch,
                      "donor " + donor.id + " does not entail '" + lemma.predicate + "' for its query");
  if (ds.has_fact(GroundAtom{lemma.predicate, {donor.source, donor.target}}))
    throw StitchError(Kind::LemmaMismatch, "donor " + donor.id + " states '" + lemma.predicate + "' as a story fact");
  if (mapped(plan.renaming, donor.source) != lemma.args[0] || mapped(plan.renaming, donor.target) != lemma.args[1])
    throw StitchError(Kind::LemmaMismatch, "renamed donor query does not match lemma '" + lemma.str() + "'");

  std::set<std::string> images;
  for (const auto& e : ds.entities()) {
    const std::string n = mapped(plan.renaming, e.name);
    if (!images.insert(n).second)
      throw StitchError(Kind::RenamingCollision, "renaming maps two donor entities to '" + n + "'");
    if (world.has_constant(n) || bs.reserved().count(n))
      throw StitchError(Kind::RenamingCollision, "renaming maps '" + e.name + "' to reserved constant '" + n + "'");
    const bool aligned = e.name == donor.source || e.name == donor.target;
    auto bk = bs.kind_of(n);
    if (bk && !aligned)
      throw StitchError(Kind::RenamingCollision, "donor entity '" + e.name + "' collides with base entity '" + n + "'");
    if (bk && *bk != e.kind)
      throw StitchError(Kind::RenamingCollision,
                        "'" + e.name + "' and '" + n + "' are of different kinds");
  }

  Story s;
  for (const auto& r : bs.reserved()) s.add_entity(r, EntityKind::Reserved);
  for (const auto& r : ds.reserved()) s.add_entity(r, EntityKind::Reserved);
  for (const auto& e : bs.entities()) s.add_entity(e.name, e.kind);
  for (const auto& e : ds.entities()) s.add_entity(mapped(plan.renaming, e.name), e.kind);
  for (const auto& f : bs.facts())
    if (f != lemma) s.add_fact(f);
  for (const auto& f : bs.ambiguous()) s.add_ambiguous(f);
  for (const auto& f : ds.facts()) s.add_fact(rename_atom(f, ds, plan.renaming));
  for (const auto& f : ds.ambiguous()) {
    AmbiguousFact g = f;
    for (auto& c : g.choices) c = rename_atom(c, ds, plan.renaming);
    try {
      s.add_ambiguous(std::move(g));
    } catch (const StoryError& e) {
      throw StitchError(Kind::RenamingCollision, e.what());
    }
  }
  return s;
}

}  // namespace

ProblemInstance stitch(const Program& world, const ProblemInstance& base, const ProblemInstance& donor,
                       const StitchPlan& plan, const std::optional<std::map<std::string, std::string>>& rename_after,
                       const std::string& id, const StitchOptions& opts) {
  const bool noop = !plan.lemma;
  if (!opts.allow_ambiguous && (base.ambiguous() || (!noop && donor.ambiguous())))
    throw StitchError(Kind::AmbiguousInput, "ambiguous stories are not stitched unless allowed");

  Story joined = noop ? base.story : united(world, base, donor, plan);
  const auto after = rename_after ? *rename_after : canonical_renaming(joined);
  Story story;
  try {
    story = joined.renamed(after);
  } catch (const StoryError& e) {
    throw StitchError(Kind::RenamingCollision, e.what());
  }
  for (const auto& e : story.entities())
    if (world.has_constant(e.name))
      throw StitchError(Kind::RenamingCollision, "final renaming produces reserved constant '" + e.name + "'");

  ProblemInstance out;
  out.id = id;
  out.source = mapped(after, base.source);
  out.target = mapped(after, base.target);

  Analyzer an(answer_sets(world, story), opts.proof);
  if (!an.result().consistent())
    throw StitchError(Kind::Inconsistent, "stitched story has no answer set");
  const std::set<std::string> rels = an.result().relations(out.source, out.target);
  for (const auto& l : base.labels)
    if (!rels.count(l))
      throw StitchError(Kind::LemmaMismatch,
                        "stitched story no longer entails " + l + "(" + out.source + "," + out.target + ")");
  out.labels.assign(rels.begin(), rels.end());
  out.metrics = an.metrics(out.source, out.target, rels);
  out.hard_ambiguous = !story.ambiguous().empty() && an.hard_ambiguous(out.source, out.target, rels);
  out.story = std::move(story);
  out.provenance.origin = "stitched";
  out.provenance.lineage.push_back(
      {base.id, noop ? std::string() : donor.id, noop ? std::string() : plan.lemma->str(), plan.renaming, after});
  return out;
}

namespace {

std::string step_id(const std::string& base, const std::string& donor) { return base + "+" + donor; }

// Story-fact premises of the minimal proofs of the base query.
std::vector<GroundAtom> lemma_candidates(const Program& world, const ProblemInstance& inst, const ProofOptions& po) {
  Analyzer an(answer_sets(world, inst.story), po);
  const auto& res = an.result();
  if (!res.consistent()) return {};
  std::set<GroundAtom> out;
  for (std::size_t r : res.ref_plus_indices())
    for (const auto& l : inst.labels) {
      const Proof p = an.proof(r, GroundAtom{l, {inst.source, inst.target}});
      for (const auto& leaf : p.leaves()) {
        if (leaf.args.size() != 2 || leaf.args[0] == leaf.args[1] || !inst.story.has_fact(leaf)) continue;
        auto k0 = inst.story.kind_of(leaf.args[0]), k1 = inst.story.kind_of(leaf.args[1]);
        if (k0 && k1 && *k0 != EntityKind::Reserved && *k1 != EntityKind::Reserved) out.insert(leaf);
      }
    }
  return {out.begin(), out.end()};
}

struct Chain {
  std::optional<ProblemInstance> result;
  std::size_t stitched = 0;
  std::size_t failed = 0;
};

Chain expand_one(const Program& world, const std::vector<ProblemInstance>& pool, std::size_t index,
                 const SplitSpec& target, const ExpandOptions& opts) {
  Chain chain;
  ProblemInstance cur = pool[index];
  if (target.admits(cur)) {
    chain.result = cur;
    return chain;
  }
  Rng rng(derive_seed(opts.seed, index));
  std::vector<LineageStep> lineage;
  for (std::size_t round = 0; round < opts.rounds; ++round) {
    std::vector<std::pair<GroundAtom, std::size_t>> pairs;
    try {
      for (const auto& lemma : lemma_candidates(world, cur, opts.stitch.proof))
        for (std::size_t d = 0; d < pool.size(); ++d) {
          const auto& donor = pool[d];
          if (d == index || (!opts.stitch.allow_ambiguous && donor.ambiguous())) continue;
          if (!std::binary_search(donor.labels.begin(), donor.labels.end(), lemma.predicate)) continue;
          if (donor.story.has_fact(GroundAtom{lemma.predicate, {donor.source, donor.target}})) continue;
          if (donor.story.kind_of(donor.source) != cur.story.kind_of(lemma.args[0]) ||
              donor.story.kind_of(donor.target) != cur.story.kind_of(lemma.args[1]))
            continue;
          pairs.emplace_back(lemma, d);
        }
    } catch (const SearchBudgetExceeded&) {
      break;
    }
    for (std::size_t i = 0; i + 1 < pairs.size(); ++i)
      std::swap(pairs[i], pairs[i + rng.below(pairs.size() - i)]);
    if (pairs.size() > opts.candidate_cap) pairs.resize(opts.candidate_cap);

    bool advanced = false;
    for (const auto& [lemma, d] : pairs) {
      const auto& donor = pool[d];
      StitchPlan plan{lemma, {}};
      for (const auto& e : donor.story.entities()) plan.renaming[e.name] = "d_" + e.name;
      plan.renaming[donor.source] = lemma.args[0];
      plan.renaming[donor.target] = lemma.args[1];
      try {
        ProblemInstance next = stitch(world, cur, donor, plan, std::nullopt, step_id(cur.id, donor.id), opts.stitch);
        lineage.push_back(next.provenance.lineage.front());
        next.provenance.lineage = lineage;
        cur = std::move(next);
        ++chain.stitched;
        advanced = true;
        break;
      } catch (const StitchError&) {
        ++chain.failed;
      } catch (const SearchBudgetExceeded&) {
        ++chain.failed;
      }
    }
    if (!advanced) break;
    if (target.admits(cur)) {
      cur.provenance.seed = opts.seed;
      cur.provenance.story_index = index;
      chain.result = std::move(cur);
      break;
    }
  }
  return chain;
}

}  // namespace

std::vector<ProblemInstance> recursive_expand(const Program& world, const std::vector<ProblemInstance>& pool,
                                              const SplitSpec& target, const ExpandOptions& opts,
                                              ExpandReport* report) {
  std::set<std::string> ids;
  for (const auto& p : pool)
    if (!ids.insert(p.id).second) throw Error("duplicate instance id '" + p.id + "' in stitching pool");

  std::vector<Chain> chains(pool.size());
  std::atomic<std::size_t> next{0};
  auto work = [&] {
    for (std::size_t i; (i = next.fetch_add(1)) < pool.size();) {
      if (!opts.stitch.allow_ambiguous && pool[i].ambiguous()) continue;
      chains[i] = expand_one(world, pool, i, target, opts);
    }
  };
  const unsigned jobs = std::max(1u, opts.jobs);
  if (jobs == 1 || pool.size() < 2) {
    work();
  } else {
    std::vector<std::thread> ts;
    for (unsigned t = 0; t < jobs; ++t) ts.emplace_back(work);
    for (auto& t : ts) t.join();
  }

  std::vector<ProblemInstance> out;
  ExpandReport rep;
  std::size_t n = 0;
  for (std::size_t i = 0; i < pool.size(); ++i) {
    auto& c = chains[i];
    if (!opts.stitch.allow_ambiguous && pool[i].ambiguous()) continue;
    ++rep.bases;
    rep.stitched += c.stitched;
    rep.failed += c.failed;
    if (!c.result) continue;
    if (c.result->provenance.origin == "stitched") c.result->id = opts.id_prefix + std::to_string(n++);
    out.push_back(std::move(*c.result));
  }
  if (report) *report = rep;
  return out;
}

ProblemInstance replay(const Program& world, const std::vector<ProblemInstance>& pool, const ProblemInstance& record,
                       const StitchOptions& opts) {
  const auto& steps = record.provenance.lineage;
  auto find = [&](const std::string& id) -> const ProblemInstance& {
    for (const auto& p : pool)
      if (p.id == id) return p;
    throw Error("lineage of " + record.id + " refers to missing instance '" + id + "'");
  };
  if (steps.empty()) return find(record.id);
  std::optional<ProblemInstance> cur;
  std::vector<LineageStep> lineage;
  for (std::size_t k = 0; k < steps.size(); ++k) {
    const auto& st = steps[k];
    const ProblemInstance& base = cur && cur->id == st.base ? *cur : find(st.base);
    StitchPlan plan;
    if (!st.donor.empty()) plan = {GroundAtom::parse(st.lemma), st.renaming};
    const ProblemInstance& donor = st.donor.empty() ? base : find(st.donor);
    const std::string id = k + 1 == steps.size() ? record.id : step_id(st.base, st.donor);
    ProblemInstance next = stitch(world, base, donor, plan, st.rename_after, id, opts);
    lineage.push_back(next.provenance.lineage.front());
    next.provenance.lineage = lineage;
    cur = std::move(next);
  }
  const auto& src = record.provenance;
  cur->provenance.seed = src.seed;
  cur->provenance.story_index = src.story_index;
  cur->provenance.person_percent = src.person_percent;
  cur->provenance.no_gender_assign = src.no_gender_assign;
  cur->provenance.rejections = src.rejections;
  return *cur;
}

}  // namespace nora
