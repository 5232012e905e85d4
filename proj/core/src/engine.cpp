#include "nora/engine.hpp"

#include <algorithm>
#include <limits>

#include "nora/error.hpp"
#include "solution.hpp"

namespace nora {
namespace detail {

Sym SymbolTable::intern(std::string_view name) {
  auto it = ids_.find(std::string(name));
  if (it != ids_.end()) return it->second;
  const Sym id = static_cast<Sym>(names_.size());
  names_.emplace_back(name);
  ids_.emplace(names_.back(), id);
  return id;
}

Sym SymbolTable::find(std::string_view name) const {
  auto it = ids_.find(std::string(name));
  return it == ids_.end() ? kNone : it->second;
}

std::uint64_t AtomTable::hash(Sym pred, std::span<const Sym> args) const {
  std::uint64_t h = 0x9e3779b97f4a7c15ULL ^ pred;
  for (Sym a : args) {
    h ^= a + 0x9e3779b97f4a7c15ULL + (h << 6) + (h >> 2);
    h *= 0xff51afd7ed558ccdULL;
  }
  return h ^ (h >> 33);
}

AtomId AtomTable::find(Sym pred, std::span<const Sym> args) const {
  const std::size_t mask = slots_.size() - 1;
  for (std::size_t i = hash(pred, args) & mask;; i = (i + 1) & mask) {
    const AtomId id = slots_[i];
    if (id == kNone) return kNone;
    if (pred_[id] == pred) {
      auto have = this->args(id);
      if (std::equal(have.begin(), have.end(), args.begin(), args.end())) return id;
    }
  }
}

void AtomTable::grow() {
  std::vector<AtomId> next(slots_.size() * 2, kNone);
  const std::size_t mask = next.size() - 1;
  for (AtomId id = 0; id < pred_.size(); ++id) {
    std::size_t i = hash(pred_[id], args(id)) & mask;
    while (next[i] != kNone) i = (i + 1) & mask;
    next[i] = id;
  }
  slots_.swap(next);
}

AtomId AtomTable::intern(Sym pred, std::span<const Sym> args) {
  if (AtomId id = find(pred, args); id != kNone) return id;
  if ((pred_.size() + 1) * 2 > slots_.size()) grow();
  const AtomId id = static_cast<AtomId>(pred_.size());
  pred_.push_back(pred);
  args_.insert(args_.end(), args.begin(), args.end());
  off_.push_back(static_cast<std::uint32_t>(args_.size()));
  const std::size_t mask = slots_.size() - 1;
  std::size_t i = hash(pred, args) & mask;
  while (slots_[i] != kNone) i = (i + 1) & mask;
  slots_[i] = id;
  return id;
}

bool Context::key_less(AtomId a, AtomId b) const {
  if (atoms.pred(a) != atoms.pred(b)) return atoms.pred(a) < atoms.pred(b);
  auto x = atoms.args(a), y = atoms.args(b);
  return std::lexicographical_compare(x.begin(), x.end(), y.begin(), y.end());
}

GroundAtom Context::ground_atom(AtomId a) const {
  GroundAtom g;
  g.predicate = preds.name(atoms.pred(a));
  for (Sym c : atoms.args(a)) g.args.push_back(consts.name(c));
  return g;
}

AtomId Context::find_atom(const GroundAtom& g) const {
  const Sym p = preds.find(g.predicate);
  if (p == kNone) return kNone;
  std::vector<Sym> args;
  for (const auto& c : g.args) {
    const Sym s = consts.find(c);
    if (s == kNone) return kNone;
    args.push_back(s);
  }
  return atoms.find(p, args);
}

std::size_t Context::owner_of(AtomId a) const {
  if (!(flag(a) & kChoiceAtom)) return kNone;
  for (std::size_t f = 0; f < choices.size(); ++f)
    if (std::find(choices[f].begin(), choices[f].end(), a) != choices[f].end()) return f;
  return kNone;
}

namespace {

void check_known_predicates(const Program& world, const Story& story) {
  auto known = world.defined_predicates();
  for (const auto& p : world.input_predicates()) known.insert(p);
  for (const auto& f : story.facts()) known.insert(f.predicate);
  for (const auto& f : story.ambiguous())
    for (const auto& c : f.choices) known.insert(c.predicate);
  for (const auto& r : world.rules())
    for (const auto& lit : r.body)
      if (const auto* a = std::get_if<Atom>(&lit); a && !known.count(a->predicate))
        throw UnknownPredicateError("unknown predicate '" + a->predicate + "' in body of rule " +
                                    std::to_string(r.line ? r.line : 0) + ": " + to_string(r));
}

Sym intern_pred(Context& ctx, const std::string& name, std::size_t arity) {
  const Sym p = ctx.preds.intern(name);
  if (p >= ctx.pred_arity.size()) ctx.pred_arity.resize(p + 1, arity);
  if (ctx.pred_arity[p] != arity)
    throw ArityError(name, 0, 0, "predicate '" + name + "' used with arity " + std::to_string(arity) +
                                     " but the world declares arity " + std::to_string(ctx.pred_arity[p]));
  return p;
}

Sym intern_const(Context& ctx, const std::string& name, EntityKind kind) {
  const Sym c = ctx.consts.intern(name);
  if (c >= ctx.const_kind.size()) ctx.const_kind.resize(c + 1, kind);
  return c;
}

CAtom compile_atom(Context& ctx, const Atom& a, std::map<std::string, std::uint32_t>& vars, std::uint32_t& nvars) {
  CAtom out;
  out.pred = intern_pred(ctx, a.predicate, a.args.size());
  for (const auto& t : a.args) {
    if (t.is_var()) {
      if (t.name == "_") {
        out.args.push_back(static_cast<Arg>(nvars++));
        continue;
      }
      auto [it, fresh] = vars.emplace(t.name, nvars);
      if (fresh) ++nvars;
      out.args.push_back(static_cast<Arg>(it->second));
    } else {
      out.args.push_back(const_arg(intern_const(ctx, t.name, EntityKind::Reserved)));
    }
  }
  return out;
}

Arg compile_term(Context& ctx, const Term& t, std::map<std::string, std::uint32_t>& vars, std::uint32_t& nvars) {
  if (!t.is_var()) return const_arg(intern_const(ctx, t.name, EntityKind::Reserved));
  if (t.name == "_") return static_cast<Arg>(nvars++);
  auto [it, fresh] = vars.emplace(t.name, nvars);
  if (fresh) ++nvars;
  return static_cast<Arg>(it->second);
}

void set_flag(Context& ctx, AtomId a, std::uint8_t f) {
  if (a >= ctx.flags.size()) ctx.flags.resize(a + 1, 0);
  ctx.flags[a] |= f;
}

AtomId intern_ground(Context& ctx, const GroundAtom& g) {
  const Sym p = intern_pred(ctx, g.predicate, g.args.size());
  std::vector<Sym> args;
  for (const auto& c : g.args) {
    const Sym s = ctx.consts.find(c);
    if (s == kNone) throw StoryError("constant '" + c + "' is not a story entity");
    args.push_back(s);
  }
  return ctx.atoms.intern(p, args);
}

}  // namespace

std::shared_ptr<Context> build_context(std::shared_ptr<const Program> world, std::shared_ptr<const Story> story) {
  check_known_predicates(*world, *story);
  auto ctx = std::make_shared<Context>();
  ctx->world = world;
  ctx->story = story;

  // World symbols first so reserved constants and predicates keep stable ids.
  for (const auto& c : world->constants()) intern_const(*ctx, c, EntityKind::Reserved);
  for (const auto& r : world->rules()) {
    if (r.head) intern_pred(*ctx, r.head->predicate, r.head->args.size());
    for (const auto& lit : r.body)
      if (const auto* a = std::get_if<Atom>(&lit)) intern_pred(*ctx, a->predicate, a->args.size());
    for (const auto& c : r.choices) intern_pred(*ctx, c.predicate, c.args.size());
  }
  const Sym is_person = intern_pred(*ctx, std::string(kPersonType), 1);
  const Sym is_place = intern_pred(*ctx, std::string(kPlaceType), 1);
  for (const auto& e : story->entities()) {
    if (world->has_constant(e.name))
      throw StoryError("entity '" + e.name + "' clashes with a reserved world constant");
    intern_const(*ctx, e.name, e.kind);
  }
  for (const auto& r : story->reserved())
    if (ctx->consts.find(r) == kNone) intern_const(*ctx, r, EntityKind::Reserved);

  for (const auto& r : world->rules()) {
    if (r.kind != Rule::Kind::Definite && r.kind != Rule::Kind::Constraint) continue;
    std::map<std::string, std::uint32_t> vars;
    CRule cr;
    cr.index = &r - world->rules().data();
    cr.constraint = r.kind == Rule::Kind::Constraint;
    for (const auto& lit : r.body) {
      if (const auto* a = std::get_if<Atom>(&lit)) cr.body.push_back(compile_atom(*ctx, *a, vars, cr.nvars));
    }
    std::vector<bool> in_body(cr.nvars, false);
    for (const auto& b : cr.body)
      for (Arg x : b.args)
        if (x >= 0) in_body[static_cast<std::size_t>(x)] = true;
    for (const auto& lit : r.body)
      if (const auto* q = std::get_if<Inequality>(&lit))
        cr.neq.emplace_back(compile_term(*ctx, q->lhs, vars, cr.nvars), compile_term(*ctx, q->rhs, vars, cr.nvars));
    if (r.head) cr.head = compile_atom(*ctx, *r.head, vars, cr.nvars);
    in_body.resize(cr.nvars, false);
    for (std::uint32_t v = 0; v < cr.nvars; ++v)
      if (!in_body[v]) cr.unsafe.push_back(v);
    (cr.constraint ? ctx->constraints : ctx->rules).push_back(std::move(cr));
  }

  for (const auto& r : world->rules()) {
    if (r.kind == Rule::Kind::Fact) {
      const AtomId a = intern_ground(*ctx, GroundAtom::from_atom(*r.head));
      set_flag(*ctx, a, kWorldFact);
      ctx->base.push_back(a);
    } else if (r.kind == Rule::Kind::CardinalityFact) {
      throw StoryError("world programs may not contain cardinality facts");
    }
  }
  bool typed = false;
  for (const auto& r : world->rules())
    for (const auto& lit : r.body)
      if (const auto* a = std::get_if<Atom>(&lit); a && is_typing_predicate(a->predicate)) typed = true;
  for (const auto& e : story->entities()) {
    if (!typed) break;
    const Sym c = ctx->consts.find(e.name);
    const AtomId a = ctx->atoms.intern(e.kind == EntityKind::Place ? is_place : is_person, std::span<const Sym>(&c, 1));
    set_flag(*ctx, a, kTypingFact);
    ctx->base.push_back(a);
  }
  for (const auto& f : story->facts()) {
    const AtomId a = intern_ground(*ctx, f);
    set_flag(*ctx, a, kStoryFact);
    ctx->base.push_back(a);
  }
  for (const auto& f : story->ambiguous()) {
    std::vector<AtomId> ids;
    for (const auto& c : f.choices) {
      const AtomId a = intern_ground(*ctx, c);
      set_flag(*ctx, a, kChoiceAtom);
      ids.push_back(a);
    }
    ctx->choices.push_back(std::move(ids));
    ctx->selections.push_back(f.selections());
  }
  // Drop duplicates while keeping first occurrence.
  std::vector<AtomId> uniq;
  std::vector<bool> seen(ctx->atoms.size(), false);
  for (AtomId a : ctx->base)
    if (!seen[a]) {
      seen[a] = true;
      uniq.push_back(a);
    }
  ctx->base.swap(uniq);
  return ctx;
}

namespace {

class Evaluator {
 public:
  Evaluator(Context& ctx, Model& m) : ctx_(ctx), m_(m) {}

  void run(const std::vector<AtomId>& facts) {
    for (AtomId a : facts)
      if (!m_.has(a)) {
        set_layer(a, 0);
        index(a);
      }
    std::size_t delta_begin = 0;
    std::uint32_t t = 1;
    while (delta_begin < m_.order.size()) {
      const std::size_t delta_end = m_.order.size();
      round_ = t;
      delta_by_pred_.clear();
      for (std::size_t i = delta_begin; i < delta_end; ++i) {
        const AtomId a = m_.order[i];
        delta_by_pred_[ctx_.atoms.pred(a)].push_back(a);
      }
      for (const auto& r : ctx_.rules) {
        for (std::size_t pos = 0; pos < r.body.size(); ++pos) {
          auto it = delta_by_pred_.find(r.body[pos].pred);
          if (it == delta_by_pred_.end()) continue;
          start(r, static_cast<int>(pos), it->second);
        }
      }
      for (AtomId a : pending_) index(a);
      pending_.clear();
      delta_begin = delta_end;
      if (m_.order.size() > delta_end) ++t;
    }
    m_.rounds = t;
    round_ = std::numeric_limits<std::uint32_t>::max();
    for (const auto& r : ctx_.constraints) {
      if (r.body.empty()) continue;
      auto it = by_pred_.find(r.body[0].pred);
      if (it == by_pred_.end()) continue;
      start(r, -1, it->second);
    }
    finalize();
  }

 private:
  void set_layer(AtomId a, std::uint32_t l) {
    if (a >= m_.layer.size()) m_.layer.resize(std::max<std::size_t>(ctx_.atoms.size(), a + 1), kNone);
    m_.layer[a] = l;
    m_.order.push_back(a);
  }

  static std::uint64_t arg_key(Sym pred, std::size_t pos, Sym c) {
    return (static_cast<std::uint64_t>(pred) << 40) | (static_cast<std::uint64_t>(pos) << 32) | c;
  }

  void index(AtomId a) {
    const Sym p = ctx_.atoms.pred(a);
    by_pred_[p].push_back(a);
    auto args = ctx_.atoms.args(a);
    for (std::size_t i = 0; i < args.size(); ++i) by_arg_[arg_key(p, i, args[i])].push_back(a);
  }

  // Starts a join with body position `pos` drawn from `seed` atoms
  // (the delta of this round, or all atoms when pos < 0).
  void start(const CRule& r, int pos, const std::vector<AtomId>& seed) {
    rule_ = &r;
    delta_pos_ = pos;
    binding_.assign(r.nvars, kNone);
    chosen_.assign(r.body.size(), kNone);
    const std::size_t first = pos < 0 ? 0 : static_cast<std::size_t>(pos);
    for (AtomId a : seed) {
      std::vector<std::uint32_t> trail;
      if (!unify(r.body[first], a, trail)) {
        undo(trail);
        continue;
      }
      chosen_[first] = a;
      join(1);
      chosen_[first] = kNone;
      undo(trail);
    }
  }

  bool unify(const CAtom& pat, AtomId a, std::vector<std::uint32_t>& trail) {
    auto args = ctx_.atoms.args(a);
    for (std::size_t i = 0; i < pat.args.size(); ++i) {
      const Arg x = pat.args[i];
      if (x < 0) {
        if (arg_const(x) != args[i]) return false;
      } else {
        Sym& b = binding_[static_cast<std::size_t>(x)];
        if (b == kNone) {
          b = args[i];
          trail.push_back(static_cast<std::uint32_t>(x));
        } else if (b != args[i]) {
          return false;
        }
      }
    }
    return true;
  }

  void undo(std::vector<std::uint32_t>& trail) {
    for (auto v : trail) binding_[v] = kNone;
    trail.clear();
  }

  const std::vector<AtomId>* candidates(const CAtom& pat) const {
    const std::vector<AtomId>* best = nullptr;
    for (std::size_t i = 0; i < pat.args.size(); ++i) {
      const Arg x = pat.args[i];
      Sym c = kNone;
      if (x < 0)
        c = arg_const(x);
      else if (binding_[static_cast<std::size_t>(x)] != kNone)
        c = binding_[static_cast<std::size_t>(x)];
      if (c == kNone) continue;
      auto it = by_arg_.find(arg_key(pat.pred, i, c));
      if (it == by_arg_.end()) return &empty_;
      if (!best || it->second.size() < best->size()) best = &it->second;
    }
    if (best) return best;
    auto it = by_pred_.find(pat.pred);
    return it == by_pred_.end() ? &empty_ : &it->second;
  }

  void join(std::size_t done) {
    const CRule& r = *rule_;
    if (done == r.body.size()) return emit_unsafe(0);
    // Most-bound remaining literal first.
    std::size_t pick = r.body.size();
    int best = -1;
    for (std::size_t j = 0; j < r.body.size(); ++j) {
      if (chosen_[j] != kNone) continue;
      int score = 0;
      for (Arg x : r.body[j].args)
        if (x < 0 || binding_[static_cast<std::size_t>(x)] != kNone) ++score;
      if (score > best) {
        best = score;
        pick = j;
      }
    }
    const CAtom& pat = r.body[pick];
    const bool older_only = delta_pos_ >= 0 && static_cast<int>(pick) < delta_pos_;
    const std::vector<AtomId>& cand = *candidates(pat);
    std::vector<std::uint32_t> trail;
    for (std::size_t k = 0; k < cand.size(); ++k) {
      const AtomId a = cand[k];
      if (older_only && m_.layer[a] + 1 >= round_) continue;
      if (!unify(pat, a, trail)) {
        undo(trail);
        continue;
      }
      chosen_[pick] = a;
      join(done + 1);
      chosen_[pick] = kNone;
      undo(trail);
    }
  }

  Sym value(Arg x) const { return x < 0 ? arg_const(x) : binding_[static_cast<std::size_t>(x)]; }

  void emit_unsafe(std::size_t k) {
    const CRule& r = *rule_;
    if (k == r.unsafe.size()) return emit();
    const std::uint32_t v = r.unsafe[k];
    for (Sym c = 0; c < ctx_.consts.size(); ++c) {
      binding_[v] = c;
      emit_unsafe(k + 1);
    }
    binding_[v] = kNone;
  }

  void emit() {
    const CRule& r = *rule_;
    for (const auto& [x, y] : r.neq)
      if (value(x) == value(y)) return;
    const auto first = static_cast<std::uint32_t>(m_.premises.size());
    if (r.constraint) {
      m_.premises.insert(m_.premises.end(), chosen_.begin(), chosen_.end());
      m_.violations.push_back({static_cast<std::uint32_t>(r.index), kNone, first,
                               static_cast<std::uint32_t>(chosen_.size())});
      return;
    }
    head_buf_.clear();
    for (Arg x : r.head.args) head_buf_.push_back(value(x));
    const AtomId h = ctx_.atoms.intern(r.head.pred, head_buf_);
    if (std::find(chosen_.begin(), chosen_.end(), h) != chosen_.end()) return;
    m_.premises.insert(m_.premises.end(), chosen_.begin(), chosen_.end());
    m_.supports.push_back({static_cast<std::uint32_t>(r.index), h, first, static_cast<std::uint32_t>(chosen_.size())});
    if (!m_.has(h)) {
      set_layer(h, round_);
      pending_.push_back(h);
    }
  }

  bool support_less(const Support& a, const Support& b) const {
    if (a.head != b.head) return a.head < b.head;
    if (a.rule != b.rule) return a.rule < b.rule;
    auto pa = m_.premises_of(a), pb = m_.premises_of(b);
    return std::lexicographical_compare(pa.begin(), pa.end(), pb.begin(), pb.end(),
                                        [&](AtomId x, AtomId y) { return ctx_.key_less(x, y); });
  }

  bool support_equal(const Support& a, const Support& b) const {
    if (a.head != b.head || a.rule != b.rule || a.count != b.count) return false;
    auto pa = m_.premises_of(a), pb = m_.premises_of(b);
    return std::equal(pa.begin(), pa.end(), pb.begin());
  }

  void compact(std::vector<Support>& v) {
    std::sort(v.begin(), v.end(), [&](const Support& a, const Support& b) { return support_less(a, b); });
    v.erase(std::unique(v.begin(), v.end(), [&](const Support& a, const Support& b) { return support_equal(a, b); }),
            v.end());
  }

  void finalize() {
    m_.layer.resize(ctx_.atoms.size(), kNone);
    compact(m_.supports);
    compact(m_.violations);
    m_.sup_begin.assign(ctx_.atoms.size() + 1, 0);
    for (const auto& s : m_.supports) ++m_.sup_begin[s.head + 1];
    for (std::size_t i = 1; i < m_.sup_begin.size(); ++i) m_.sup_begin[i] += m_.sup_begin[i - 1];
  }

  Context& ctx_;
  Model& m_;
  std::unordered_map<Sym, std::vector<AtomId>> by_pred_;
  std::unordered_map<std::uint64_t, std::vector<AtomId>> by_arg_;
  std::unordered_map<Sym, std::vector<AtomId>> delta_by_pred_;
  std::vector<AtomId> pending_;
  std::vector<Sym> binding_;
  std::vector<AtomId> chosen_;
  std::vector<Sym> head_buf_;
  const std::vector<AtomId> empty_;
  const CRule* rule_ = nullptr;
  int delta_pos_ = -1;
  std::uint32_t round_ = 0;
};

std::size_t saturating_mul(std::size_t a, std::size_t b) {
  if (a != 0 && b > std::numeric_limits<std::size_t>::max() / a) return std::numeric_limits<std::size_t>::max();
  return a * b;
}

}  // namespace

std::shared_ptr<Solution> solve(std::shared_ptr<Context> ctx, const EngineOptions& opts) {
  std::size_t count = 1;
  for (const auto& s : ctx->selections) count = saturating_mul(count, s.size());
  if (count > opts.refinement_cap) throw RefinementOverflow(count, opts.refinement_cap);

  auto sol = std::make_shared<Solution>();
  sol->ctx = ctx;
  sol->models.resize(count);
  const std::size_t nf = ctx->selections.size();
  for (std::size_t idx = 0; idx < count; ++idx) {
    Model& m = sol->models[idx];
    m.index = idx;
    m.selection.assign(nf, 0);
    std::size_t rest = idx;
    for (std::size_t f = nf; f-- > 0;) {
      m.selection[f] = rest % ctx->selections[f].size();
      rest /= ctx->selections[f].size();
    }
    std::vector<AtomId> facts = ctx->base;
    for (std::size_t f = 0; f < nf; ++f)
      for (std::size_t c : ctx->selections[f][m.selection[f]]) facts.push_back(ctx->choices[f][c]);
    Evaluator(*ctx, m).run(facts);
    (m.consistent() ? sol->plus : sol->minus).push_back(idx);
  }
  // Layer vectors of early models predate later atoms.
  for (auto& m : sol->models) {
    m.layer.resize(ctx->atoms.size(), kNone);
    m.sup_begin.resize(ctx->atoms.size() + 1, m.sup_begin.empty() ? 0 : m.sup_begin.back());
  }

  if (!sol->plus.empty()) {
    const Model& first = sol->models[sol->plus.front()];
    for (AtomId a : first.order) {
      if (ctx->flag(a) & (kWorldFact | kTypingFact | kStoryFact)) continue;
      bool all = true;
      for (std::size_t i : sol->plus)
        if (!sol->models[i].has(a)) {
          all = false;
          break;
        }
      if (all) sol->entailed.push_back(a);
    }
    std::sort(sol->entailed.begin(), sol->entailed.end(), [&](AtomId x, AtomId y) { return ctx->key_less(x, y); });
  }
  return sol;
}

}  // namespace detail

using detail::AtomId;
using detail::kNone;

std::string to_string(const GroundRule& r) {
  std::string s = r.head ? r.head->str() + " :- " : ":- ";
  for (std::size_t i = 0; i < r.body.size(); ++i) {
    if (i) s += ", ";
    s += r.body[i].str();
  }
  return s + ".";
}

std::size_t refinement_count(const Story& story) {
  std::size_t n = 1;
  for (const auto& f : story.ambiguous()) n = detail::saturating_mul(n, f.selections().size());
  return n;
}

std::vector<Refinement> enumerate_refinements(const Story& story, std::size_t cap) {
  const std::size_t count = refinement_count(story);
  if (count > cap) throw RefinementOverflow(count, cap);
  std::vector<std::vector<std::vector<std::size_t>>> sels;
  for (const auto& f : story.ambiguous()) sels.push_back(f.selections());
  std::vector<Refinement> out(count);
  for (std::size_t idx = 0; idx < count; ++idx) {
    Refinement& r = out[idx];
    r.index = idx;
    r.selection.resize(sels.size());
    std::size_t rest = idx;
    for (std::size_t f = sels.size(); f-- > 0;) {
      r.selection[f] = sels[f][rest % sels[f].size()];
      rest /= sels[f].size();
    }
    r.facts = story.facts();
    for (std::size_t f = 0; f < sels.size(); ++f)
      for (std::size_t c : r.selection[f]) r.facts.push_back(story.ambiguous()[f].choices[c]);
  }
  return out;
}

// ---------------------------------------------------------------------------
// Naive grounding over strings.

std::vector<GroundRule> ground(const Program& program, const Story& story) {
  detail::check_known_predicates(program, story);
  std::vector<std::string> universe;
  std::set<std::string> seen;
  auto add = [&](const std::string& c) {
    if (seen.insert(c).second) universe.push_back(c);
  };
  for (const auto& c : program.constants()) add(c);
  for (const auto& e : story.entities()) add(e.name);
  for (const auto& r : story.reserved()) add(r);

  std::vector<GroundRule> out;
  for (std::size_t ri = 0; ri < program.rules().size(); ++ri) {
    const Rule& r = program.rules()[ri];
    if (r.kind != Rule::Kind::Definite && r.kind != Rule::Kind::Constraint) continue;
    std::vector<std::string> vars;
    auto note = [&](const Term& t) {
      if (t.is_var() && std::find(vars.begin(), vars.end(), t.name) == vars.end()) vars.push_back(t.name);
    };
    if (r.head)
      for (const auto& t : r.head->args) note(t);
    for (const auto& lit : r.body) {
      if (const auto* a = std::get_if<Atom>(&lit))
        for (const auto& t : a->args) note(t);
      else {
        note(std::get<Inequality>(lit).lhs);
        note(std::get<Inequality>(lit).rhs);
      }
    }
    std::vector<std::size_t> pick(vars.size(), 0);
    auto val = [&](const Term& t) -> const std::string& {
      if (!t.is_var()) return t.name;
      auto k = static_cast<std::size_t>(std::find(vars.begin(), vars.end(), t.name) - vars.begin());
      return universe[pick[k]];
    };
    auto inst = [&](const Atom& a) {
      GroundAtom g{a.predicate, {}};
      for (const auto& t : a.args) g.args.push_back(val(t));
      return g;
    };
    if (!vars.empty() && universe.empty()) continue;
    for (;;) {
      bool ok = true;
      GroundRule g;
      g.rule_index = ri;
      for (const auto& lit : r.body) {
        if (const auto* a = std::get_if<Atom>(&lit)) {
          g.body.push_back(inst(*a));
        } else if (val(std::get<Inequality>(lit).lhs) == val(std::get<Inequality>(lit).rhs)) {
          ok = false;
        }
      }
      if (ok) {
        if (r.head) g.head = inst(*r.head);
        out.push_back(std::move(g));
      }
      std::size_t k = 0;
      while (k < pick.size() && ++pick[k] == universe.size()) pick[k++] = 0;
      if (k == pick.size()) break;
    }
  }
  return out;
}

Closure forward_chain(const std::vector<GroundAtom>& facts, const std::vector<GroundRule>& rules) {
  Closure c;
  for (const auto& f : facts) c.layers.emplace(f, 0);
  for (std::uint32_t t = 1;; ++t) {
    std::vector<GroundAtom> fresh;
    for (const auto& r : rules) {
      if (!r.head || c.contains(*r.head)) continue;
      bool fire = true;
      for (const auto& b : r.body) {
        auto it = c.layers.find(b);
        if (it == c.layers.end() || it->second >= t) {
          fire = false;
          break;
        }
      }
      if (fire) fresh.push_back(*r.head);
    }
    if (fresh.empty()) break;
    for (auto& f : fresh) c.layers.emplace(std::move(f), t);
  }
  return c;
}

std::vector<GroundRule> check_constraints(const Closure& closure, const std::vector<GroundRule>& constraints) {
  std::vector<GroundRule> out;
  for (const auto& r : constraints) {
    if (r.head) continue;
    if (std::all_of(r.body.begin(), r.body.end(), [&](const GroundAtom& a) { return closure.contains(a); }))
      out.push_back(r);
  }
  return out;
}

// ---------------------------------------------------------------------------
// EntailmentResult

std::size_t EntailmentResult::refinement_count() const { return sol_->models.size(); }
const std::vector<std::size_t>& EntailmentResult::ref_plus_indices() const { return sol_->plus; }
const std::vector<std::size_t>& EntailmentResult::ref_minus_indices() const { return sol_->minus; }
const Story& EntailmentResult::story() const { return *sol_->ctx->story; }
const Program& EntailmentResult::world() const { return *sol_->ctx->world; }

AnswerSet EntailmentResult::answer_set(std::size_t refinement) const {
  const auto& m = sol_->models.at(refinement);
  AnswerSet as;
  as.origin = refinement;
  for (AtomId a : m.order) {
    auto g = sol_->ctx->ground_atom(a);
    as.layers.emplace(g, m.layer[a]);
    as.atoms.push_back(std::move(g));
  }
  std::sort(as.atoms.begin(), as.atoms.end());
  return as;
}

std::vector<AnswerSet> EntailmentResult::ref_plus() const {
  std::vector<AnswerSet> out;
  for (std::size_t i : sol_->plus) out.push_back(answer_set(i));
  return out;
}

Refinement EntailmentResult::refinement(std::size_t index) const {
  const auto& ctx = *sol_->ctx;
  const auto& m = sol_->models.at(index);
  Refinement r;
  r.index = index;
  r.facts = ctx.story->facts();
  for (std::size_t f = 0; f < m.selection.size(); ++f) {
    r.selection.push_back(ctx.selections[f][m.selection[f]]);
    for (std::size_t c : r.selection.back()) r.facts.push_back(ctx.story->ambiguous()[f].choices[c]);
  }
  return r;
}

std::vector<Refinement> EntailmentResult::ref_minus() const {
  std::vector<Refinement> out;
  for (std::size_t i : sol_->minus) out.push_back(refinement(i));
  return out;
}

bool EntailmentResult::holds(std::size_t refinement, const GroundAtom& a) const {
  const AtomId id = sol_->ctx->find_atom(a);
  return id != kNone && sol_->models.at(refinement).has(id);
}

std::vector<GroundRule> EntailmentResult::violations(std::size_t refinement) const {
  const auto& m = sol_->models.at(refinement);
  std::vector<GroundRule> out;
  for (const auto& v : m.violations) {
    GroundRule g;
    g.rule_index = v.rule;
    for (AtomId p : m.premises_of(v)) g.body.push_back(sol_->ctx->ground_atom(p));
    out.push_back(std::move(g));
  }
  return out;
}

std::vector<GroundAtom> EntailmentResult::entailed() const {
  std::vector<GroundAtom> out;
  for (AtomId a : sol_->entailed) out.push_back(sol_->ctx->ground_atom(a));
  return out;
}

std::set<std::string> EntailmentResult::relations(const std::string& x, const std::string& y) const {
  if (sol_->plus.empty()) throw InconsistentStory("story has no answer set");
  const auto& ctx = *sol_->ctx;
  const detail::Sym cx = ctx.consts.find(x), cy = ctx.consts.find(y);
  if (cx == kNone || cy == kNone) throw StoryError("query entity '" + (cx == kNone ? x : y) + "' is not in the story");
  std::set<std::string> out;
  const detail::Sym args[2] = {cx, cy};
  for (detail::Sym p = 0; p < ctx.preds.size(); ++p) {
    if (ctx.pred_arity[p] != 2) continue;
    const AtomId a = ctx.atoms.find(p, args);
    if (a == kNone) continue;
    bool all = true;
    for (std::size_t i : sol_->plus)
      if (!sol_->models[i].has(a)) {
        all = false;
        break;
      }
    if (all) out.insert(ctx.preds.name(p));
  }
  return out;
}

EntailmentResult answer_sets(std::shared_ptr<const Program> world, std::shared_ptr<const Story> story,
                             const EngineOptions& opts) {
  auto ctx = detail::build_context(std::move(world), std::move(story));
  return EntailmentResult(detail::solve(std::move(ctx), opts));
}

EntailmentResult answer_sets(const Program& world, const Story& story, const EngineOptions& opts) {
  return answer_sets(std::make_shared<const Program>(world), std::make_shared<const Story>(story), opts);
}

std::set<std::string> entailed_relations(const Program& world, const Story& story, const std::string& x,
                                         const std::string& y) {
  return answer_sets(world, story).relations(x, y);
}

}  // namespace nora
