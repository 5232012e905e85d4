#include "nora/metrics.hpp"

#include <algorithm>
#include <charconv>
#include <functional>
#include <numeric>

#include "nora/error.hpp"
#include "proof_search.hpp"

namespace nora {

Rational::Rational(std::int64_t n, std::int64_t d) {
  if (d == 0) throw Error("rational with zero denominator");
  if (d < 0) n = -n, d = -d;
  const std::int64_t g = std::gcd(n < 0 ? -n : n, d);
  num = g ? n / g : 0;
  den = g ? d / g : 1;
}

std::string Rational::str() const {
  if (den == 1) return std::to_string(num);
  return std::to_string(num) + "/" + std::to_string(den);
}

Rational Rational::parse(const std::string& s) {
  auto whole = [&](const std::string& t) -> std::int64_t {
    std::int64_t v = 0;
    auto [p, ec] = std::from_chars(t.data(), t.data() + t.size(), v);
    if (t.empty() || ec != std::errc() || p != t.data() + t.size()) throw Error("malformed rational '" + s + "'");
    return v;
  };
  if (auto slash = s.find('/'); slash != std::string::npos)
    return Rational(whole(s.substr(0, slash)), whole(s.substr(slash + 1)));
  if (auto dot = s.find('.'); dot != std::string::npos) {
    const std::string frac = s.substr(dot + 1);
    if (frac.empty() || frac.size() > 9 || frac.find_first_not_of("0123456789") != std::string::npos)
      throw Error("malformed rational '" + s + "'");
    std::int64_t scale = 1;
    for (std::size_t i = 0; i < frac.size(); ++i) scale *= 10;
    const std::string ip = s.substr(0, dot);
    const bool neg = !ip.empty() && ip[0] == '-';
    const std::int64_t w = ip.empty() || ip == "-" ? 0 : whole(ip);
    const std::int64_t f = whole(frac);
    return Rational(w * scale + (neg ? -f : f), scale);
  }
  return Rational(whole(s), 1);
}

// ---------------------------------------------------------------------------
// Off-path edges

namespace {

struct Edge {
  std::size_t u, v, fact;  // fact == npos for the virtual query edge
};

// Edge-biconnected blocks (Hopcroft-Tarjan); returns block id per edge.
std::vector<std::size_t> edge_blocks(std::size_t n, const std::vector<Edge>& edges) {
  std::vector<std::vector<std::pair<std::size_t, std::size_t>>> adj(n);
  for (std::size_t i = 0; i < edges.size(); ++i) {
    adj[edges[i].u].push_back({edges[i].v, i});
    adj[edges[i].v].push_back({edges[i].u, i});
  }
  std::vector<std::size_t> disc(n, 0), low(n, 0), block(edges.size(), 0);
  std::vector<std::size_t> stack;
  std::size_t timer = 0, blocks = 0;
  std::function<void(std::size_t, std::size_t)> dfs = [&](std::size_t u, std::size_t via) {
    disc[u] = low[u] = ++timer;
    for (auto [v, e] : adj[u]) {
      if (e == via) continue;
      if (!disc[v]) {
        stack.push_back(e);
        dfs(v, e);
        low[u] = std::min(low[u], low[v]);
        if (low[v] >= disc[u]) {
          ++blocks;
          for (;;) {
            const std::size_t top = stack.back();
            stack.pop_back();
            block[top] = blocks;
            if (top == e) break;
          }
        }
      } else if (disc[v] < disc[u]) {
        stack.push_back(e);
        low[u] = std::min(low[u], disc[v]);
      }
    }
  };
  for (std::size_t u = 0; u < n; ++u)
    if (!disc[u]) dfs(u, edges.size());
  return block;
}

}  // namespace

std::vector<GroundAtom> off_path_edges(const Story& story, const std::vector<GroundAtom>& facts, const std::string& a,
                                       const std::string& b) {
  std::map<std::string, std::size_t> node;
  for (const auto& e : story.entities()) node.emplace(e.name, node.size());
  std::vector<Edge> edges;
  std::vector<bool> off(facts.size(), true);
  for (std::size_t i = 0; i < facts.size(); ++i) {
    const auto& f = facts[i];
    if (f.args.size() != 2 || f.args[0] == f.args[1]) continue;
    auto u = node.find(f.args[0]), v = node.find(f.args[1]);
    if (u == node.end() || v == node.end()) continue;
    edges.push_back({u->second, v->second, i});
  }
  auto u = node.find(a), v = node.find(b);
  if (u != node.end() && v != node.end() && a != b) {
    const std::size_t virt = edges.size();
    edges.push_back({u->second, v->second, std::string::npos});
    const auto block = edge_blocks(node.size(), edges);
    for (std::size_t i = 0; i < virt; ++i)
      if (block[i] == block[virt]) off[edges[i].fact] = false;
  }
  std::vector<GroundAtom> out;
  for (std::size_t i = 0; i < facts.size(); ++i)
    if (off[i]) out.push_back(facts[i]);
  return out;
}

std::vector<GroundAtom> off_path_edges(const Story& story, const std::string& a, const std::string& b) {
  return off_path_edges(story, story.facts(), a, b);
}

Rational backtrack_load(const Proof& proof, const Story& story) {
  if (proof.steps.empty()) throw ProofError("backtrack load of an empty proof");
  std::set<std::string> ents;
  auto note = [&](const GroundAtom& g) {
    for (const auto& c : g.args) {
      auto k = story.kind_of(c);
      if (k && *k != EntityKind::Reserved) ents.insert(c);
    }
  };
  for (const auto& s : proof.steps) {
    if (s.derived) note(*s.derived);
    for (const auto& p : s.premises) note(p);
  }
  if (ents.empty()) throw ProofError("proof mentions no entities");
  return Rational(static_cast<std::int64_t>(proof.steps.size()), static_cast<std::int64_t>(ents.size()));
}

std::uint32_t opec(const Proof& proof, const Story& story, const std::vector<GroundAtom>& facts, const std::string& a,
                   const std::string& b) {
  const auto off = off_path_edges(story, facts, a, b);
  const std::set<GroundAtom> off_set(off.begin(), off.end());
  std::uint32_t n = 0;
  for (const auto& leaf : proof.leaves())
    if (off_set.count(leaf)) ++n;
  return n;
}

// ---------------------------------------------------------------------------
// Analyzer

Proof to_public_proof(const detail::Context& ctx, const detail::Model& m, const detail::IdProof& ip);

using detail::AtomId;
using detail::kNone;

struct Analyzer::Impl {
  const detail::Solution& sol;
  ProofOptions opts;
  std::map<std::size_t, detail::ProofCache> caches;
  std::map<std::tuple<std::size_t, std::string, std::string>, std::set<AtomId>> off_cache;

  detail::ProofCache& cache(std::size_t i) {
    auto it = caches.find(i);
    if (it == caches.end())
      it = caches.try_emplace(i, *sol.ctx, sol.models[i], opts.node_budget).first;
    return it->second;
  }

  const detail::IdProof& proof(std::size_t i, AtomId g) { return cache(i).get(g); }
  const detail::IdProof& bottom(std::size_t i) { return cache(i).get(kNone); }
  const std::vector<detail::IdProof>& all(std::size_t i, AtomId g) { return cache(i).all(g); }

  AtomId goal(const std::string& r, const std::string& a, const std::string& b) const {
    return sol.ctx->find_atom(GroundAtom{r, {a, b}});
  }

  std::vector<GroundAtom> refinement_facts(std::size_t i) const {
    const auto& ctx = *sol.ctx;
    std::vector<GroundAtom> facts = ctx.story->facts();
    const auto& m = sol.models[i];
    for (std::size_t f = 0; f < m.selection.size(); ++f)
      for (std::size_t c : ctx.selections[f][m.selection[f]]) facts.push_back(ctx.story->ambiguous()[f].choices[c]);
    return facts;
  }

  const std::set<AtomId>& off_path(std::size_t i, const std::string& a, const std::string& b) {
    auto key = std::make_tuple(i, a, b);
    auto it = off_cache.find(key);
    if (it != off_cache.end()) return it->second;
    std::set<AtomId> ids;
    for (const auto& g : off_path_edges(*sol.ctx->story, refinement_facts(i), a, b)) ids.insert(sol.ctx->find_atom(g));
    return off_cache.emplace(key, std::move(ids)).first->second;
  }

  Rational bl(const detail::Model& m, const detail::IdProof& p) const {
    const auto& ctx = *sol.ctx;
    std::set<detail::Sym> ents;
    auto note = [&](AtomId a) {
      for (detail::Sym c : ctx.atoms.args(a))
        if (!ctx.reserved(c)) ents.insert(c);
    };
    for (const detail::Support* s : p.steps) {
      if (s->head != kNone) note(s->head);
      for (AtomId q : m.premises_of(*s)) note(q);
    }
    if (ents.empty()) throw ProofError("proof mentions no entities");
    return Rational(static_cast<std::int64_t>(p.size()), static_cast<std::int64_t>(ents.size()));
  }

  std::uint32_t opec(std::size_t i, const detail::IdProof& p, const std::string& a, const std::string& b) {
    const auto& off = off_path(i, a, b);
    std::uint32_t n = 0;
    for (AtomId leaf : detail::story_leaves(*sol.ctx, sol.models[i], p))
      if (off.count(leaf)) ++n;
    return n;
  }
};

Analyzer::Analyzer(EntailmentResult res, ProofOptions opts)
    : res_(std::move(res)), impl_(std::make_unique<Impl>(Impl{res_.solution(), opts, {}, {}})) {}
Analyzer::~Analyzer() = default;
Analyzer::Analyzer(Analyzer&&) noexcept = default;
Analyzer& Analyzer::operator=(Analyzer&&) noexcept = default;

Proof Analyzer::proof(std::size_t refinement, const GroundAtom& goal) {
  const auto& sol = res_.solution();
  const AtomId g = sol.ctx->find_atom(goal);
  if (g == kNone || !sol.models.at(refinement).has(g))
    throw ProofError("goal '" + goal.str() + "' is not derivable in refinement " + std::to_string(refinement));
  return to_public_proof(*sol.ctx, sol.models[refinement], impl_->proof(refinement, g));
}

Proof Analyzer::contradiction(std::size_t refinement) {
  const auto& sol = res_.solution();
  return to_public_proof(*sol.ctx, sol.models.at(refinement), impl_->bottom(refinement));
}

namespace {

using KeySet = std::set<std::vector<std::uint32_t>>;

// Fewest keys meeting every set: the number of distinct derivations needed
// when each refinement may use any of its minimal proofs. Exact branch and
// bound, falling back to the greedy cover past a node limit.
std::size_t min_cover(const std::vector<KeySet>& sets) {
  if (sets.empty()) return 0;
  std::map<std::vector<std::uint32_t>, std::size_t> ids;
  std::set<std::vector<std::size_t>> uniq;
  for (const auto& ks : sets) {
    std::vector<std::size_t> row;
    for (const auto& k : ks) row.push_back(ids.emplace(k, ids.size()).first->second);
    uniq.insert(std::move(row));
  }
  const std::vector<std::vector<std::size_t>> rows(uniq.begin(), uniq.end());
  std::vector<char> chosen(ids.size(), 0);
  auto covered = [&](const std::vector<std::size_t>& row) {
    return std::any_of(row.begin(), row.end(), [&](std::size_t k) { return chosen[k] != 0; });
  };

  std::size_t best = 0;
  {
    std::vector<std::size_t> hits(ids.size());
    for (;;) {
      std::fill(hits.begin(), hits.end(), 0);
      bool open = false;
      for (const auto& row : rows)
        if (!covered(row)) {
          open = true;
          for (std::size_t k : row) ++hits[k];
        }
      if (!open) break;
      chosen[static_cast<std::size_t>(std::max_element(hits.begin(), hits.end()) - hits.begin())] = 1;
      ++best;
    }
    std::fill(chosen.begin(), chosen.end(), 0);
  }

  std::size_t nodes = 0;
  std::function<void(std::size_t)> go = [&](std::size_t used) {
    if (++nodes > 200000 || used >= best) return;
    const std::vector<std::size_t>* pick = nullptr;
    for (const auto& row : rows)
      if (!covered(row) && (pick == nullptr || row.size() < pick->size())) pick = &row;
    if (pick == nullptr) {
      best = used;
      return;
    }
    if (used + 1 >= best) return;
    for (std::size_t k : *pick) {
      chosen[k] = 1;
      go(used + 1);
      chosen[k] = 0;
    }
  };
  go(0);
  return best;
}

}  // namespace

MetricBundle Analyzer::metrics(const std::string& a, const std::string& b, const std::set<std::string>& rels) {
  const auto& sol = res_.solution();
  if (sol.plus.empty()) throw InconsistentStory("story has no answer set");
  MetricBundle mb;
  std::vector<KeySet> bottom_sets;
  for (std::size_t i : sol.minus) {
    const auto& ps = impl_->all(i, kNone);
    mb.max_depth = std::max<std::uint32_t>(mb.max_depth, static_cast<std::uint32_t>(ps.front().size()));
    KeySet ks;
    for (const auto& p : ps) ks.insert(p.key);
    bottom_sets.push_back(std::move(ks));
  }
  const std::size_t bottom_width = min_cover(bottom_sets);
  std::size_t width = rels.empty() ? bottom_width : 0;
  for (const auto& r : rels) {
    const AtomId g = impl_->goal(r, a, b);
    std::vector<KeySet> sets;
    for (std::size_t i : sol.plus) {
      if (g == kNone || !sol.models[i].has(g))
        throw ProofError(r + "(" + a + "," + b + ") is not entailed");
      const auto& ps = impl_->all(i, g);
      const auto d = static_cast<std::uint32_t>(ps.front().size());
      mb.max_depth = std::max(mb.max_depth, d);
      mb.depth_positive = std::max(mb.depth_positive, d);
      KeySet ks;
      for (const auto& p : ps) ks.insert(p.key);
      sets.push_back(std::move(ks));
      if (d > 0) {
        Rational bl = impl_->bl(sol.models[i], ps.front());
        std::uint32_t off = impl_->opec(i, ps.front(), a, b);
        for (const auto& p : ps) {
          bl = std::min(bl, impl_->bl(sol.models[i], p));
          off = std::min(off, impl_->opec(i, p, a, b));
        }
        mb.max_bl = std::max(mb.max_bl, bl);
        mb.max_opec = std::max(mb.max_opec, off);
      }
    }
    width = std::max(width, min_cover(sets) + bottom_width);
  }
  mb.max_width = static_cast<std::uint32_t>(std::max<std::size_t>(width, 1));
  return mb;
}

std::uint32_t Analyzer::depth(const std::string& a, const std::string& b, const std::set<std::string>& rels) {
  return metrics(a, b, rels).max_depth;
}

std::uint32_t Analyzer::width(const GroundAtom& fact) {
  if (fact.args.size() != 2) throw ProofError("width needs a binary fact");
  return metrics(fact.args[0], fact.args[1], {fact.predicate}).max_width;
}

bool Analyzer::hard_ambiguous(const std::string& a, const std::string& b, const std::set<std::string>& rels) {
  const auto& sol = res_.solution();
  const auto& ctx = *sol.ctx;
  if (ctx.choices.empty() || sol.plus.empty()) return false;
  for (const auto& r : rels) {
    const AtomId g = impl_->goal(r, a, b);
    if (g == kNone || (ctx.flag(g) & detail::kStoryFact)) continue;
    // (ii): some resolution of the ambiguity fails to derive the fact.
    const bool somewhere_missing = std::any_of(sol.models.begin(), sol.models.end(),
                                               [&](const detail::Model& m) { return !m.has(g); });
    if (!somewhere_missing) continue;
    // (i): a minimal proof rests on an alternative of an ambiguous fact.
    for (std::size_t i : sol.plus) {
      const auto& ps = impl_->all(i, g);
      if (ps.front().size() == 0 && (ctx.flag(g) & detail::kChoiceAtom)) return true;
      for (const auto& p : ps)
        for (AtomId leaf : detail::story_leaves(ctx, sol.models[i], p))
          if (ctx.flag(leaf) & detail::kChoiceAtom) return true;
    }
  }
  return false;
}

std::uint32_t depth(const Program& world, const Story& story, const std::string& a, const std::string& b,
                    const std::set<std::string>& rels) {
  return Analyzer(answer_sets(world, story)).depth(a, b, rels);
}

std::uint32_t width(const Program& world, const Story& story, const GroundAtom& fact) {
  return Analyzer(answer_sets(world, story)).width(fact);
}

MetricBundle compute_metrics(const Program& world, const Story& story, const std::string& a, const std::string& b,
                             const std::set<std::string>& rels) {
  return Analyzer(answer_sets(world, story)).metrics(a, b, rels);
}

}  // namespace nora
