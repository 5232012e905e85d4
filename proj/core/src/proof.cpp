#include "nora/proof.hpp"

#include <algorithm>
#include <functional>
#include <set>
#include <unordered_set>

#include "nora/error.hpp"
#include "proof_search.hpp"

namespace nora {
namespace detail {
namespace {

void make_key(const Model& m, IdProof& p) {
  std::vector<std::vector<std::uint32_t>> rows;
  for (const Support* s : p.steps) {
    std::vector<std::uint32_t> row{s->rule, s->head, s->count};
    auto prem = m.premises_of(*s);
    row.insert(row.end(), prem.begin(), prem.end());
    rows.push_back(std::move(row));
  }
  std::sort(rows.begin(), rows.end());
  p.key.clear();
  for (auto& r : rows) p.key.insert(p.key.end(), r.begin(), r.end());
}

inline std::uint64_t mix(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

struct StateHash {
  std::uint64_t a = 0, b = 0;
  void toggle(std::uint64_t x) {
    a ^= mix(x);
    b ^= mix(x ^ 0x5851f42d4c957f2dULL);
  }
  friend bool operator==(const StateHash&, const StateHash&) = default;
};

struct StateHashHasher {
  std::size_t operator()(const StateHash& h) const noexcept { return static_cast<std::size_t>(h.a ^ (h.b << 1)); }
};

// Depth-first branch and bound over support choices. Open atoms are expanded
// fewest-supports first (ties by key) and supports are tried in their sorted
// order, so the proof kept is the first optimal one in that fixed order.
class Search {
 public:
  Search(const Context& ctx, const Model& m, std::size_t budget)
      : ctx_(ctx), m_(m), budget_(budget), st_(m.layer.size(), 0), chosen_(m.layer.size(), nullptr),
        stamp_(m.layer.size(), 0) {}

  IdProof run(AtomId goal) {
    IdProof out;
    out.goal = goal;
    if (goal != kNone) {
      if (!m_.has(goal)) throw ProofError("goal '" + ctx_.atom_str(goal) + "' is not in the closure");
      if (m_.base(goal)) return out;
    } else if (m_.violations.empty()) {
      throw ProofError("refinement is consistent; no contradiction to prove");
    }

    std::size_t hi;
    if (goal != kNone) {
      lo_ = m_.layer_of(goal);
      hi = greedy_size({goal});
    } else {
      lo_ = hi = ~std::size_t{0};
      for (const auto& v : m_.violations) {
        std::uint32_t h = 0;
        for (AtomId p : m_.premises_of(v)) h = std::max(h, m_.layer_of(p));
        lo_ = std::min<std::size_t>(lo_, 1 + h);
        auto prem = m_.premises_of(v);
        hi = std::min(hi, 1 + greedy_size({prem.begin(), prem.end()}));
      }
    }
    std::uint32_t top = 0;
    for (AtomId a = 0; a < m_.layer.size(); ++a)
      if (m_.has(a)) top = std::max(top, m_.layer[a]);
    cnt_.assign(top + 2, 0);
    k_ = hi;
    if (goal != kNone) prove_atom(goal);
    else prove_bottom();
    if (best_.empty()) throw ProofError("internal: no proof within the greedy bound");
    out.steps = std::move(best_);
    make_key(m_, out);
    return out;
  }

  // Every proof of size `size`, deduplicated by key and sorted by it; stops
  // after `cap` distinct proofs (then *capped is set).
  std::vector<IdProof> run_all(AtomId goal, std::size_t size, std::size_t cap, bool* capped) {
    std::vector<IdProof> found;
    if (goal != kNone && m_.base(goal)) {
      IdProof empty;
      empty.goal = goal;
      found.push_back(std::move(empty));
      return found;
    }
    std::uint32_t top = 0;
    for (AtomId a = 0; a < m_.layer.size(); ++a)
      if (m_.has(a)) top = std::max(top, m_.layer[a]);
    cnt_.assign(top + 2, 0);
    std::set<std::vector<std::uint32_t>> seen;
    collect_ = [&] {
      IdProof p;
      p.goal = goal;
      p.steps = best_;
      make_key(m_, p);
      if (seen.insert(p.key).second) found.push_back(std::move(p));
      return found.size() >= cap;
    };
    k_ = size;
    lo_ = 0;
    if (goal != kNone) prove_atom(goal);
    else prove_bottom();
    if (capped) *capped = stopped_;
    std::sort(found.begin(), found.end(), [](const IdProof& a, const IdProof& b) { return a.key < b.key; });
    return found;
  }

 private:
  // Size of a proof that always picks a support from strictly lower layers.
  std::size_t greedy_size(std::vector<AtomId> todo) {
    std::set<AtomId> seen;
    while (!todo.empty()) {
      const AtomId a = todo.back();
      todo.pop_back();
      if (m_.base(a) || !seen.insert(a).second) continue;
      for (const auto& s : m_.supports_of(a)) {
        auto prem = m_.premises_of(s);
        if (std::all_of(prem.begin(), prem.end(), [&](AtomId p) { return m_.layer_of(p) < m_.layer_of(a); })) {
          todo.insert(todo.end(), prem.begin(), prem.end());
          break;
        }
      }
    }
    return seen.size();
  }

  void open_atom(AtomId p) {
    st_[p] = 1;
    open_.push_back(p);
    ++cnt_[m_.layer_of(p)];
    hash_.toggle(2 * std::uint64_t{p});
  }

  void close_atom(AtomId p) {
    st_[p] = 0;
    --cnt_[m_.layer_of(p)];
    hash_.toggle(2 * std::uint64_t{p});
  }

  void prove_atom(AtomId goal) {
    root_ = goal;
    bottom_ = nullptr;
    extra_ = 0;
    size_ = 1;
    open_atom(goal);
    dfs();
  }

  void prove_bottom() {
    extra_ = 1;
    for (const auto& v : m_.violations) {
      std::vector<AtomId> fresh;
      for (AtomId p : m_.premises_of(v))
        if (!m_.base(p) && st_[p] == 0) {
          st_[p] = 3;
          fresh.push_back(p);
        }
      for (AtomId p : fresh) st_[p] = 0;
      bool ok = fresh.size() + 1 <= k_;
      for (AtomId p : fresh) ok = ok && m_.layer_of(p) + 1 <= k_;
      if (ok) {
        const std::uint64_t vid = ~static_cast<std::uint64_t>(&v - m_.violations.data());
        size_ = fresh.size();
        for (AtomId p : fresh) open_atom(p);
        bottom_ = &v;
        hash_.toggle(vid);
        if (dfs()) return;
        hash_.toggle(vid);
        for (AtomId p : fresh) close_atom(p);
        open_.clear();
      }
    }
  }

  // True when `target` is reachable from `from` through assigned supports.
  bool reaches(AtomId from, AtomId target) {
    ++epoch_;
    stack_.clear();
    stack_.push_back(from);
    while (!stack_.empty()) {
      const AtomId a = stack_.back();
      stack_.pop_back();
      if (a == target) return true;
      if (stamp_[a] == epoch_) continue;
      stamp_[a] = epoch_;
      if (st_[a] != 2) continue;
      for (AtomId p : m_.premises_of(*chosen_[a]))
        if (!m_.base(p)) stack_.push_back(p);
    }
    return false;
  }

  std::size_t pick_open() const {
    std::size_t best = 0;
    for (std::size_t i = 1; i < open_.size(); ++i) {
      const auto a = open_[i], b = open_[best];
      const auto na = m_.supports_of(a).size(), nb = m_.supports_of(b).size();
      if (na < nb || (na == nb && ctx_.key_less(a, b))) best = i;
    }
    return best;
  }

  // Atoms any completion still has to add. Below an open atom of layer L
  // lies a chain with one atom of each height 1..L-1, and an atom of layer l
  // can only sit at heights >= l; chain slots no counted atom can fill need
  // new atoms.
  std::size_t missing() const {
    std::uint32_t top = 0;
    for (AtomId o : open_) top = std::max(top, m_.layer_of(o));
    std::size_t avail = 0, uncovered = 0;
    for (std::uint32_t j = 1; j < top; ++j) {
      avail += cnt_[j];
      if (avail > 0) --avail;
      else ++uncovered;
    }
    return uncovered;
  }

  void record() {
    best_.clear();
    std::vector<std::uint8_t> done(m_.layer.size(), 0);
    if (bottom_ == nullptr) {
      post_order(open_root(), done);
    } else {
      for (AtomId p : m_.premises_of(*bottom_)) post_order(p, done);
      best_.push_back(bottom_);
    }
  }

  AtomId open_root() const { return root_; }

  // Returns true to stop the whole search.
  bool dfs() {
    if (++nodes_ > budget_) throw SearchBudgetExceeded("proof search exceeded its node budget");
    if (open_.empty()) {
      record();
      const std::size_t total = size_ + extra_;
      if (collect_) return stopped_ = collect_();
      if (total <= lo_) return true;
      k_ = total - 1;
      return false;
    }
    if (size_ + extra_ + missing() > k_) return false;
    if (failed_.count(hash_)) return false;

    const std::size_t at = pick_open();
    const AtomId o = open_[at];
    open_.erase(open_.begin() + static_cast<std::ptrdiff_t>(at));
    std::vector<AtomId> fresh;
    for (const auto& s : m_.supports_of(o)) {
      fresh.clear();
      bool ok = true;
      for (AtomId p : m_.premises_of(s)) {
        if (m_.base(p)) continue;
        if (st_[p] == 0) {
          if (m_.layer_of(p) + 1 + extra_ > k_) {
            ok = false;
            break;
          }
          st_[p] = 3;  // provisional, dedups repeated premises
          fresh.push_back(p);
        } else if (st_[p] == 2 && reaches(p, o)) {
          ok = false;
          break;
        }
      }
      for (AtomId p : fresh) st_[p] = 0;
      if (!ok || size_ + fresh.size() + extra_ > k_) continue;

      const std::uint64_t sid = 2 * static_cast<std::uint64_t>(&s - m_.supports.data()) + 1;
      chosen_[o] = &s;
      st_[o] = 2;
      hash_.toggle(2 * std::uint64_t{o});
      hash_.toggle(sid);
      for (AtomId p : fresh) open_atom(p);
      size_ += fresh.size();
      if (dfs()) return true;
      size_ -= fresh.size();
      open_.resize(open_.size() - fresh.size());
      for (AtomId p : fresh) close_atom(p);
      hash_.toggle(sid);
      hash_.toggle(2 * std::uint64_t{o});
      st_[o] = 1;
      chosen_[o] = nullptr;
    }
    open_.insert(open_.begin() + static_cast<std::ptrdiff_t>(at), o);
    if (failed_.size() < kMemoCap) failed_.insert(hash_);
    return false;
  }

  void post_order(AtomId a, std::vector<std::uint8_t>& done) {
    if (m_.base(a) || done[a]) return;
    done[a] = 1;
    for (AtomId p : m_.premises_of(*chosen_[a])) post_order(p, done);
    best_.push_back(chosen_[a]);
  }

  static constexpr std::size_t kMemoCap = 1u << 21;

  std::function<bool()> collect_;  // set in run_all; returns true to stop
  bool stopped_ = false;

  const Context& ctx_;
  const Model& m_;
  std::size_t budget_;
  std::size_t nodes_ = 0;
  std::size_t k_ = 0;
  std::size_t lo_ = 0;
  std::size_t size_ = 0;
  std::size_t extra_ = 0;
  AtomId root_ = kNone;
  const Support* bottom_ = nullptr;
  std::vector<std::uint8_t> st_;  // 0 absent, 1 open, 2 assigned, 3 provisional
  std::vector<const Support*> chosen_;
  std::vector<AtomId> open_;
  std::vector<std::uint32_t> cnt_;  // counted (open or assigned) atoms per layer
  StateHash hash_;
  std::unordered_set<StateHash, StateHashHasher> failed_;
  std::vector<const Support*> best_;
  std::vector<std::uint32_t> stamp_;
  std::uint32_t epoch_ = 0;
  std::vector<AtomId> stack_;
};

}  // namespace

IdProof search_proof(const Context& ctx, const Model& m, AtomId goal, std::size_t budget) {
  return Search(ctx, m, budget).run(goal);
}

std::vector<IdProof> search_all_proofs(const Context& ctx, const Model& m, AtomId goal, std::size_t size,
                                       std::size_t budget, std::size_t cap, bool* capped) {
  return Search(ctx, m, budget).run_all(goal, size, cap, capped);
}


std::optional<IdProof> ProofCache::compose(AtomId goal) {
  const auto sups = m_.supports_of(goal);
  std::vector<AtomId> single;
  for (const auto& s : sups) {
    AtomId only = kNone;
    std::size_t derived = 0;
    for (AtomId p : m_.premises_of(s))
      if (!m_.base(p) && p != only) {
        only = p;
        ++derived;
      }
    if (derived != 1 || active_.count(only)) return std::nullopt;
    single.push_back(only);
  }
  active_.insert(goal);
  const IdProof* best = nullptr;
  std::size_t best_i = 0;
  bool ok = true;
  for (std::size_t i = 0; i < single.size() && ok; ++i) {
    const IdProof* subp = nullptr;
    try {
      subp = &get(single[i]);
    } catch (...) {
      active_.erase(goal);
      throw;
    }
    const IdProof& sub = *subp;
    for (const Support* s : sub.steps) ok = ok && s->head != goal;
    if (ok && (best == nullptr || sub.size() < best->size())) {
      best = &sub;
      best_i = i;
    }
  }
  active_.erase(goal);
  if (!ok || best == nullptr) return std::nullopt;
  IdProof out;
  out.goal = goal;
  out.steps = best->steps;
  out.steps.push_back(&sups[best_i]);
  make_key(m_, out);
  return out;
}

const IdProof& ProofCache::get(AtomId goal) {
  if (auto it = done_.find(goal); it != done_.end()) return it->second;
  if (over_budget_.count(goal)) throw SearchBudgetExceeded("proof search exceeded its node budget");
  try {
    std::optional<IdProof> p;
    if (goal != kNone && m_.has(goal) && !m_.base(goal)) p = compose(goal);
    if (!p) p = search_proof(ctx_, m_, goal, budget_);
    return done_.emplace(goal, std::move(*p)).first->second;
  } catch (const SearchBudgetExceeded&) {
    over_budget_.insert(goal);
    throw;
  }
}

const std::vector<IdProof>& ProofCache::all(AtomId goal) {
  if (auto it = all_.find(goal); it != all_.end()) return it->second;
  const IdProof& one = get(goal);
  std::vector<IdProof> found;
  if (one.size() == 0) {
    found.push_back(one);
  } else {
    try {
      found = search_all_proofs(ctx_, m_, goal, one.size(), budget_, kAllCap, nullptr);
    } catch (const SearchBudgetExceeded&) {
      found.clear();
    }
    if (found.empty()) found.push_back(one);
  }
  return all_.emplace(goal, std::move(found)).first->second;
}

std::vector<AtomId> story_leaves(const Context& ctx, const Model& m, const IdProof& p) {
  std::vector<AtomId> out;
  std::set<AtomId> seen;
  for (const Support* s : p.steps)
    for (AtomId a : m.premises_of(*s))
      if (m.base(a) && (ctx.flag(a) & (kStoryFact | kChoiceAtom)) && seen.insert(a).second) out.push_back(a);
  return out;
}

}  // namespace detail

std::vector<GroundAtom> Proof::leaves() const {
  std::set<GroundAtom> derived;
  for (const auto& s : steps)
    if (s.derived) derived.insert(*s.derived);
  std::vector<GroundAtom> out;
  std::set<GroundAtom> seen;
  for (const auto& s : steps)
    for (const auto& p : s.premises)
      if (!derived.count(p) && seen.insert(p).second) out.push_back(p);
  return out;
}

Proof to_public_proof(const detail::Context& ctx, const detail::Model& m, const detail::IdProof& ip) {
  Proof p;
  if (ip.goal != detail::kNone) p.goal = ctx.ground_atom(ip.goal);
  p.refinement = m.index;
  std::vector<std::string> rows;
  for (const detail::Support* s : ip.steps) {
    ProofStep step;
    step.rule_index = s->rule;
    if (s->head != detail::kNone) step.derived = ctx.ground_atom(s->head);
    for (detail::AtomId a : m.premises_of(*s)) step.premises.push_back(ctx.ground_atom(a));
    std::string row = std::to_string(step.rule_index) + ":" + (step.derived ? step.derived->str() : "#false") + "<-";
    for (const auto& q : step.premises) row += q.str() + ";";
    rows.push_back(std::move(row));
    p.steps.push_back(std::move(step));
  }
  std::sort(rows.begin(), rows.end());
  for (const auto& r : rows) p.key += r + "|";
  return p;
}

Proof minimal_proof(const EntailmentResult& res, std::size_t refinement, const std::optional<GroundAtom>& goal,
                    const ProofOptions& opts) {
  const auto& sol = res.solution();
  const auto& m = sol.models.at(refinement);
  detail::AtomId g = detail::kNone;
  if (goal) {
    g = sol.ctx->find_atom(*goal);
    if (g == detail::kNone || !m.has(g))
      throw ProofError("goal '" + goal->str() + "' is not derivable in refinement " + std::to_string(refinement));
  }
  return to_public_proof(*sol.ctx, m, detail::search_proof(*sol.ctx, m, g, opts.node_budget));
}

std::string format_trace(const Proof& proof) {
  std::string out;
  std::set<GroundAtom> shown;
  std::set<GroundAtom> derived;
  for (const auto& s : proof.steps)
    if (s.derived) derived.insert(*s.derived);
  if (proof.steps.empty() && proof.goal) return "Fact: " + proof.goal->str() + "\n";
  std::size_t n = 0;
  for (const auto& s : proof.steps) {
    for (const auto& p : s.premises)
      if (!derived.count(p) && shown.insert(p).second) out += "Fact: " + p.str() + "\n";
    out += std::to_string(++n) + ". ";
    out += s.derived ? s.derived->str() + " :- " : ":- ";
    for (std::size_t i = 0; i < s.premises.size(); ++i) {
      if (i) out += ", ";
      out += s.premises[i].str();
    }
    out += ".\n";
  }
  return out;
}

}  // namespace nora
