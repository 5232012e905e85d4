#pragma once

// Internal evaluation state shared by the engine, proof search and metrics.

#include <cstdint>
#include <memory>
#include <span>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

#include "nora/engine.hpp"
#include "nora/rule_language.hpp"
#include "nora/story.hpp"

namespace nora::detail {

using Sym = std::uint32_t;
using AtomId = std::uint32_t;
inline constexpr std::uint32_t kNone = ~std::uint32_t{0};

class SymbolTable {
 public:
  Sym intern(std::string_view name);
  Sym find(std::string_view name) const;  // kNone when absent
  const std::string& name(Sym s) const { return names_[s]; }
  std::size_t size() const noexcept { return names_.size(); }

 private:
  std::vector<std::string> names_;
  std::unordered_map<std::string, Sym> ids_;
};

// Hash-consed ground atoms over interned symbols.
class AtomTable {
 public:
  AtomId intern(Sym pred, std::span<const Sym> args);
  AtomId find(Sym pred, std::span<const Sym> args) const;
  Sym pred(AtomId a) const { return pred_[a]; }
  std::span<const Sym> args(AtomId a) const {
    return {args_.data() + off_[a], static_cast<std::size_t>(off_[a + 1] - off_[a])};
  }
  std::size_t size() const noexcept { return pred_.size(); }

 private:
  std::uint64_t hash(Sym pred, std::span<const Sym> args) const;
  void grow();

  std::vector<Sym> pred_;
  std::vector<std::uint32_t> off_{0};
  std::vector<Sym> args_;
  std::vector<AtomId> slots_ = std::vector<AtomId>(64, kNone);
};

// Rule argument: >= 0 is a variable slot, < 0 encodes constant -(c+1).
using Arg = std::int32_t;
inline Arg const_arg(Sym c) { return -static_cast<Arg>(c) - 1; }
inline Sym arg_const(Arg a) { return static_cast<Sym>(-a - 1); }

struct CAtom {
  Sym pred = 0;
  std::vector<Arg> args;
};

struct CRule {
  std::size_t index = 0;  // position in the source program
  bool constraint = false;
  CAtom head;
  std::vector<CAtom> body;
  std::vector<std::pair<Arg, Arg>> neq;
  std::uint32_t nvars = 0;
  std::vector<std::uint32_t> unsafe;  // variables not bound by any body atom
};

enum AtomFlag : std::uint8_t { kWorldFact = 1, kTypingFact = 2, kStoryFact = 4, kChoiceAtom = 8 };

struct Context {
  std::shared_ptr<const Program> world;
  std::shared_ptr<const Story> story;

  SymbolTable preds;
  SymbolTable consts;
  std::vector<EntityKind> const_kind;
  std::vector<std::size_t> pred_arity;
  AtomTable atoms;
  std::vector<std::uint8_t> flags;  // by atom id; may be shorter than atoms
  std::vector<CRule> rules;
  std::vector<CRule> constraints;
  std::vector<AtomId> base;                       // world, typing and plain story facts
  std::vector<std::vector<AtomId>> choices;       // per ambiguous fact
  std::vector<std::vector<std::vector<std::size_t>>> selections;  // admissible, per fact
  std::vector<std::size_t> choice_owner_fact;     // parallel to flattened choice list

  std::uint8_t flag(AtomId a) const { return a < flags.size() ? flags[a] : 0; }
  bool key_less(AtomId a, AtomId b) const;
  GroundAtom ground_atom(AtomId a) const;
  std::string atom_str(AtomId a) const { return ground_atom(a).str(); }
  AtomId find_atom(const GroundAtom& g) const;
  bool reserved(Sym c) const { return const_kind[c] == EntityKind::Reserved; }
  // Index of the ambiguous fact owning choice atom a, or kNone.
  std::size_t owner_of(AtomId a) const;
};

struct Support {
  std::uint32_t rule;   // program rule index
  AtomId head;          // kNone for constraint violations
  std::uint32_t first;  // into Model::premises
  std::uint32_t count;
};

struct Model {
  std::size_t index = 0;
  std::vector<std::size_t> selection;  // per ambiguous fact: index into Context::selections
  std::vector<AtomId> order;           // closure atoms by derivation order
  std::vector<std::uint32_t> layer;    // by atom id, kNone when absent
  std::vector<Support> supports;       // grouped per head after finalize
  std::vector<AtomId> premises;
  std::vector<std::uint32_t> sup_begin;  // CSR by atom id over supports
  std::vector<Support> violations;
  std::uint32_t rounds = 0;

  bool consistent() const noexcept { return violations.empty(); }
  bool has(AtomId a) const { return a < layer.size() && layer[a] != kNone; }
  std::uint32_t layer_of(AtomId a) const { return a < layer.size() ? layer[a] : kNone; }
  std::span<const Support> supports_of(AtomId a) const {
    if (a + 1 >= sup_begin.size()) return {};
    return {supports.data() + sup_begin[a], supports.data() + sup_begin[a + 1]};
  }
  std::span<const AtomId> premises_of(const Support& s) const { return {premises.data() + s.first, s.count}; }
  bool base(AtomId a) const { return layer_of(a) == 0; }
};

struct Solution {
  std::shared_ptr<Context> ctx;
  std::vector<Model> models;
  std::vector<std::size_t> plus;
  std::vector<std::size_t> minus;
  std::vector<AtomId> entailed;  // sorted by key
};

std::shared_ptr<Context> build_context(std::shared_ptr<const Program> world, std::shared_ptr<const Story> story);

std::shared_ptr<Solution> solve(std::shared_ptr<Context> ctx, const EngineOptions& opts);

}  // namespace nora::detail
