#include "nora/story.hpp"

#include <algorithm>
#include <set>

#include "nora/error.hpp"

namespace nora {

std::string GroundAtom::str() const {
  std::string s = predicate;
  if (args.empty()) return s;
  s += '(';
  for (std::size_t i = 0; i < args.size(); ++i) {
    if (i) s += ',';
    s += args[i];
  }
  return s + ')';
}

Atom GroundAtom::to_atom() const {
  Atom a{predicate, {}};
  for (const auto& c : args) a.args.push_back(Term::constant(c));
  return a;
}

GroundAtom GroundAtom::from_atom(const Atom& a) {
  if (!a.ground()) throw StoryError("atom '" + to_string(a) + "' is not ground");
  GroundAtom g{a.predicate, {}};
  for (const auto& t : a.args) g.args.push_back(t.name);
  return g;
}

GroundAtom GroundAtom::parse(std::string_view text) {
  std::string src(text);
  if (src.empty() || src.back() != '.') src += '.';
  Program p = parse_program(src);
  if (p.size() != 1 || p.rules()[0].kind != Rule::Kind::Fact)
    throw ParseError("expected a single ground atom, got '" + std::string(text) + "'", 1, 1);
  return from_atom(*p.rules()[0].head);
}

std::string_view to_string(EntityKind k) {
  switch (k) {
    case EntityKind::Person: return "person";
    case EntityKind::Place: return "place";
    case EntityKind::Reserved: return "reserved";
  }
  return "?";
}

bool is_typing_predicate(std::string_view p) { return p == kPersonType || p == kPlaceType; }

std::vector<std::vector<std::size_t>> AmbiguousFact::selections() const {
  const std::size_t k = choices.size();
  std::vector<std::vector<std::size_t>> out;
  for (std::size_t size = static_cast<std::size_t>(std::max(lower, 1));
       size <= std::min<std::size_t>(static_cast<std::size_t>(upper), k); ++size) {
    std::vector<bool> pick(k, false);
    std::fill(pick.begin(), pick.begin() + static_cast<std::ptrdiff_t>(size), true);
    do {
      std::vector<std::size_t> sel;
      for (std::size_t i = 0; i < k; ++i)
        if (pick[i]) sel.push_back(i);
      out.push_back(std::move(sel));
    } while (std::prev_permutation(pick.begin(), pick.end()));
  }
  return out;
}

namespace {

// Argument kinds declared via story_relation(P,K1,K2) / story_property(P,C).
std::map<std::string, std::vector<std::string>> declared_signatures(const Program& world) {
  std::map<std::string, std::vector<std::string>> sig;
  for (const auto& r : world.rules()) {
    if (r.kind != Rule::Kind::Fact) continue;
    const auto& h = *r.head;
    if (h.predicate == "story_relation" && h.args.size() == 3)
      sig[h.args[0].name] = {h.args[1].name, h.args[2].name};
    else if (h.predicate == "story_property" && h.args.size() == 2)
      sig.emplace(h.args[0].name, std::vector<std::string>{"person", "reserved"});
    else if (h.predicate == "gender_marker" && h.args.size() == 2)
      sig.emplace(h.args[0].name, std::vector<std::string>{"person", "reserved"});
  }
  return sig;
}

}  // namespace

Story Story::from_program(const Program& facts, const Program& world) {
  std::map<std::string, EntityKind> typed;
  std::vector<const Atom*> atoms;
  for (const auto& r : facts.rules()) {
    switch (r.kind) {
      case Rule::Kind::Fact:
        atoms.push_back(&*r.head);
        if (is_typing_predicate(r.head->predicate)) {
          if (r.head->args.size() != 1) throw StoryError("typing fact '" + to_string(*r.head) + "' must be unary");
          const auto& name = r.head->args[0].name;
          if (world.has_constant(name)) throw StoryError("typing fact on reserved constant '" + name + "'");
          auto kind = r.head->predicate == kPersonType ? EntityKind::Person : EntityKind::Place;
          auto [it, fresh] = typed.emplace(name, kind);
          if (!fresh && it->second != kind) throw StoryError("entity '" + name + "' typed as both person and place");
        }
        break;
      case Rule::Kind::CardinalityFact:
        for (const auto& c : r.choices) atoms.push_back(&c);
        break;
      default:
        throw StoryError("line " + std::to_string(r.line) + ": stories may only contain facts, got '" +
                         to_string(r) + "'");
    }
  }

  const auto sig = declared_signatures(world);
  std::map<std::string, EntityKind> inferred;
  for (const Atom* a : atoms) {
    if (is_typing_predicate(a->predicate)) continue;
    auto it = sig.find(a->predicate);
    for (std::size_t i = 0; i < a->args.size(); ++i) {
      const auto& name = a->args[i].name;
      if (world.has_constant(name) || typed.count(name)) continue;
      EntityKind k = EntityKind::Person;
      if (it != sig.end() && i < it->second.size()) {
        if (it->second[i] == "place") k = EntityKind::Place;
      } else if ((a->predicate == "living_in" || a->predicate == "not_living_in") && i == 1) {
        k = EntityKind::Place;
      }
      auto [pos, fresh] = inferred.emplace(name, k);
      if (!fresh && pos->second != k && k == EntityKind::Place) pos->second = k;
    }
  }

  Story s;
  auto declare = [&](const std::string& name) {
    if (s.kind_of(name)) return;
    EntityKind k;
    if (world.has_constant(name))
      k = EntityKind::Reserved;
    else if (auto t = typed.find(name); t != typed.end())
      k = t->second;
    else
      k = inferred.at(name);
    if (k == EntityKind::Reserved)
      s.reserved_.insert(name);
    else
      s.entities_.push_back({name, k});
  };
  for (const Atom* a : atoms)
    for (const auto& t : a->args) declare(t.name);

  for (const auto& r : facts.rules()) {
    if (r.kind == Rule::Kind::Fact) {
      if (!is_typing_predicate(r.head->predicate)) s.add_fact(GroundAtom::from_atom(*r.head));
    } else {
      AmbiguousFact f{r.bounds->lower, r.bounds->upper, {}};
      for (const auto& c : r.choices) f.choices.push_back(GroundAtom::from_atom(c));
      s.add_ambiguous(std::move(f));
    }
  }
  return s;
}

Story Story::parse(std::string_view text, const Program& world) { return from_program(parse_program(text), world); }

std::optional<EntityKind> Story::kind_of(std::string_view name) const {
  if (reserved_.count(std::string(name))) return EntityKind::Reserved;
  for (const auto& e : entities_)
    if (e.name == name) return e.kind;
  return std::nullopt;
}

bool Story::has_fact(const GroundAtom& a) const { return std::find(facts_.begin(), facts_.end(), a) != facts_.end(); }

std::size_t Story::person_count() const {
  return static_cast<std::size_t>(
      std::count_if(entities_.begin(), entities_.end(), [](const Entity& e) { return e.kind == EntityKind::Person; }));
}

std::size_t Story::place_count() const { return entities_.size() - person_count(); }

std::size_t Story::entity_count() const { return entities_.size(); }

void Story::add_entity(const std::string& name, EntityKind kind) {
  if (auto k = kind_of(name)) {
    if (*k != kind) throw StoryError("entity '" + name + "' redeclared with a different kind");
    return;
  }
  if (kind == EntityKind::Reserved)
    reserved_.insert(name);
  else
    entities_.push_back({name, kind});
}

void Story::note_constants(const GroundAtom& a) {
  for (const auto& c : a.args)
    if (!kind_of(c)) throw StoryError("constant '" + c + "' in '" + a.str() + "' is not a declared entity");
}

void Story::add_fact(const GroundAtom& a) {
  note_constants(a);
  if (is_typing_predicate(a.predicate)) throw StoryError("typing facts are entity declarations, not story facts");
  if (!has_fact(a)) facts_.push_back(a);
}

bool Story::remove_fact(const GroundAtom& a) {
  auto it = std::find(facts_.begin(), facts_.end(), a);
  if (it == facts_.end()) return false;
  facts_.erase(it);
  return true;
}

void Story::check_overlap(const AmbiguousFact& f) const {
  for (const auto& g : ambiguous_)
    for (const auto& c : g.choices)
      if (std::find(f.choices.begin(), f.choices.end(), c) != f.choices.end())
        throw StoryError("ambiguous alternative '" + c.str() + "' occurs in two ambiguous facts");
}

void Story::add_ambiguous(AmbiguousFact f) {
  Rule r;
  r.kind = Rule::Kind::CardinalityFact;
  r.bounds = Bounds{f.lower, f.upper};
  for (const auto& c : f.choices) r.choices.push_back(c.to_atom());
  Program scratch;
  scratch.add(r);
  for (const auto& c : f.choices) note_constants(c);
  check_overlap(f);
  ambiguous_.push_back(std::move(f));
}

void Story::replace_with_ambiguous(const GroundAtom& a, AmbiguousFact f) {
  if (std::find(f.choices.begin(), f.choices.end(), a) == f.choices.end())
    throw StoryError("ambiguous fact does not contain '" + a.str() + "'");
  auto it = std::find(facts_.begin(), facts_.end(), a);
  if (it == facts_.end()) throw StoryError("'" + a.str() + "' is not a plain fact");
  add_ambiguous(std::move(f));
  facts_.erase(std::find(facts_.begin(), facts_.end(), a));
}

Story Story::renamed(const std::map<std::string, std::string>& mapping) const {
  auto map_name = [&](const std::string& n) -> std::string {
    if (kind_of(n) == EntityKind::Reserved) return n;
    auto it = mapping.find(n);
    return it == mapping.end() ? n : it->second;
  };
  auto map_atom = [&](const GroundAtom& a) {
    GroundAtom b = a;
    for (auto& c : b.args) c = map_name(c);
    return b;
  };
  Story s;
  std::set<std::string> seen;
  s.reserved_ = reserved_;
  for (const auto& e : entities_) {
    auto n = map_name(e.name);
    if (!seen.insert(n).second || reserved_.count(n))
      throw StoryError("renaming merges two entities into '" + n + "'");
    s.entities_.push_back({n, e.kind});
  }
  for (const auto& f : facts_) s.facts_.push_back(map_atom(f));
  for (const auto& f : ambiguous_) {
    AmbiguousFact g = f;
    for (auto& c : g.choices) c = map_atom(c);
    s.ambiguous_.push_back(std::move(g));
  }
  return s;
}

std::string Story::serialize() const {
  std::string out;
  for (const auto& e : entities_) {
    out += e.kind == EntityKind::Person ? kPersonType : kPlaceType;
    out += "(" + e.name + ").\n";
  }
  for (const auto& f : facts_) out += f.str() + ".\n";
  for (const auto& f : ambiguous_) {
    out += std::to_string(f.lower) + "{";
    for (std::size_t i = 0; i < f.choices.size(); ++i) {
      if (i) out += "; ";
      out += f.choices[i].str();
    }
    out += "}" + std::to_string(f.upper) + ".\n";
  }
  return out;
}

}  // namespace nora
