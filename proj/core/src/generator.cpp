#include "nora/generator.hpp"

#include <algorithm>
#include <atomic>
#include <charconv>
#include <fstream>
#include <mutex>
#include <sstream>
#include <thread>

#include "nora/engine.hpp"
#include "nora/error.hpp"
#include "nora/metrics.hpp"

namespace nora {
namespace {

std::string trim(std::string_view s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string_view::npos) return {};
  const auto e = s.find_last_not_of(" \t\r");
  return std::string(s.substr(b, e - b + 1));
}

double parse_double(const std::string& v, std::size_t line) {
  try {
    std::size_t used = 0;
    double d = std::stod(v, &used);
    if (used == v.size()) return d;
  } catch (const std::exception&) {
  }
  throw ParseError("expected a number, got '" + v + "'", line, 1);
}

std::int64_t parse_int(const std::string& v, std::size_t line) {
  std::int64_t out = 0;
  auto [p, ec] = std::from_chars(v.data(), v.data() + v.size(), out);
  if (ec != std::errc() || p != v.data() + v.size()) throw ParseError("expected an integer, got '" + v + "'", line, 1);
  return out;
}

std::uint64_t parse_u64(const std::string& v, std::size_t line) {
  std::uint64_t out = 0;
  auto [p, ec] = std::from_chars(v.data(), v.data() + v.size(), out);
  if (ec != std::errc() || p != v.data() + v.size()) throw ParseError("expected a 64-bit seed, got '" + v + "'", line, 1);
  return out;
}

IntRange parse_range(const std::string& v, std::size_t line) {
  const auto dash = v.find('-', 1);
  if (dash == std::string::npos) throw ParseError("expected a range 'lo-hi', got '" + v + "'", line, 1);
  return {static_cast<int>(parse_int(trim(v.substr(0, dash)), line)),
          static_cast<int>(parse_int(trim(v.substr(dash + 1)), line))};
}

// Shortest text that parses back to the same double.
std::string fmt_double(double d) {
  char buf[32];
  auto [end, ec] = std::to_chars(buf, buf + sizeof buf, d);
  return std::string(buf, end);
}

EntityKind kind_from(const std::string& s) {
  if (s == "person") return EntityKind::Person;
  if (s == "place") return EntityKind::Place;
  throw Error("unknown entity kind '" + s + "' in story_relation declaration");
}

}  // namespace

void GenConfig::validate() const {
  auto prob = [](double p, const char* name) {
    if (!(p >= 0.0 && p <= 1.0)) throw Error(std::string(name) + " must lie in [0,1]");
  };
  prob(person_percent, "person_percent");
  prob(no_gender_assign, "no_gender_assign");
  prob(exactly_one_weight, "exactly_one_weight");
  prob(three_choice_weight, "three_choice_weight");
  prob(max_gender_share, "max_gender_share");
  auto range = [](IntRange r, int min, const char* name) {
    if (r.lo > r.hi || r.lo < min) throw Error(std::string(name) + " range is empty or out of bounds");
  };
  range(entities, 2, "entities");
  range(facts, 1, "facts");
  range(ambiguous, 0, "ambiguous");
  for (const auto& [p, w] : predicate_weights)
    if (!(w >= 0.0)) throw Error("weight for " + p + " must be non-negative");
  if (max_rejections_per_slot < 1) throw Error("max_rejections_per_slot must be positive");
  if (max_story_retries < 1) throw Error("max_story_retries must be positive");
  if (max_refinements < 1) throw Error("max_refinements must be positive");
}

GenConfig GenConfig::parse(std::string_view text) {
  GenConfig c;
  std::istringstream in{std::string(text)};
  std::string raw;
  std::size_t line = 0;
  while (std::getline(in, raw)) {
    ++line;
    if (auto h = raw.find('#'); h != std::string::npos) raw.erase(h);
    const std::string l = trim(raw);
    if (l.empty()) continue;
    const auto eq = l.find('=');
    if (eq == std::string::npos) throw ParseError("expected 'key = value'", line, 1);
    const std::string key = trim(l.substr(0, eq));
    const std::string val = trim(l.substr(eq + 1));
    if (key == "person_percent") c.person_percent = parse_double(val, line);
    else if (key == "no_gender_assign") c.no_gender_assign = parse_double(val, line);
    else if (key == "entities") c.entities = parse_range(val, line);
    else if (key == "facts") c.facts = parse_range(val, line);
    else if (key == "ambiguous") c.ambiguous = parse_range(val, line);
    else if (key == "exactly_one_weight") c.exactly_one_weight = parse_double(val, line);
    else if (key == "three_choice_weight") c.three_choice_weight = parse_double(val, line);
    else if (key == "max_gender_share") c.max_gender_share = parse_double(val, line);
    else if (key == "seed") c.seed = parse_u64(val, line);
    else if (key == "max_rejections_per_slot") c.max_rejections_per_slot = static_cast<int>(parse_int(val, line));
    else if (key == "max_story_retries") c.max_story_retries = static_cast<int>(parse_int(val, line));
    else if (key == "max_refinements") c.max_refinements = static_cast<std::size_t>(parse_int(val, line));
    else if (key.rfind("weight.", 0) == 0 && key.size() > 7) c.predicate_weights[key.substr(7)] = parse_double(val, line);
    else throw ParseError("unknown key '" + key + "'", line, 1);
  }
  c.validate();
  return c;
}

GenConfig GenConfig::load(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw IoError(path.string(), "cannot open config");
  std::ostringstream ss;
  ss << in.rdbuf();
  try {
    return parse(ss.str());
  } catch (const ParseError& e) {
    throw ParseError(path.string() + ": " + e.what(), e.line(), e.column());
  }
}

std::string GenConfig::to_text() const {
  std::ostringstream os;
  os << "person_percent = " << fmt_double(person_percent) << "\n"
     << "no_gender_assign = " << fmt_double(no_gender_assign) << "\n"
     << "entities = " << entities.lo << "-" << entities.hi << "\n"
     << "facts = " << facts.lo << "-" << facts.hi << "\n"
     << "ambiguous = " << ambiguous.lo << "-" << ambiguous.hi << "\n"
     << "exactly_one_weight = " << fmt_double(exactly_one_weight) << "\n"
     << "three_choice_weight = " << fmt_double(three_choice_weight) << "\n"
     << "max_gender_share = " << fmt_double(max_gender_share) << "\n"
     << "seed = " << seed << "\n"
     << "max_rejections_per_slot = " << max_rejections_per_slot << "\n"
     << "max_story_retries = " << max_story_retries << "\n"
     << "max_refinements = " << max_refinements << "\n";
  for (const auto& [p, w] : predicate_weights) os << "weight." << p << " = " << fmt_double(w) << "\n";
  return os.str();
}

Vocabulary Vocabulary::from_world(const Program& world) {
  Vocabulary v;
  for (const Rule& r : world.rules()) {
    if (r.kind != Rule::Kind::Fact || !r.head || !r.head->ground()) continue;
    const Atom& h = *r.head;
    if (h.predicate == "story_relation" && h.args.size() == 3)
      v.relations.push_back({h.args[0].name, kind_from(h.args[1].name), kind_from(h.args[2].name)});
    else if (h.predicate == "story_property" && h.args.size() == 2)
      v.properties.push_back({h.args[0].name, h.args[1].name});
    else if (h.predicate == "gender_marker" && h.args.size() == 2)
      v.genders.push_back({h.args[0].name, h.args[1].name});
  }
  if (v.relations.empty()) throw Error("world declares no story_relation facts; nothing to sample");
  return v;
}

namespace {

struct Option {
  bool relation = true;
  std::size_t index = 0;
  double weight = 1.0;
};

class StoryBuilder {
 public:
  StoryBuilder(std::shared_ptr<const Program> world, const Vocabulary& vocab, const GenConfig& cfg, Rng& rng)
      : world_(std::move(world)), vocab_(vocab), cfg_(cfg), rng_(rng) {
    for (const auto& c : world_->constants()) reserved_.push_back(c);
    auto weight_of = [&](const std::string& p) {
      auto it = cfg_.predicate_weights.find(p);
      return it == cfg_.predicate_weights.end() ? 1.0 : it->second;
    };
    for (std::size_t i = 0; i < vocab_.relations.size(); ++i)
      options_.push_back({true, i, weight_of(vocab_.relations[i].predicate)});
    for (std::size_t i = 0; i < vocab_.properties.size(); ++i)
      options_.push_back({false, i, weight_of(vocab_.properties[i].predicate)});
    for (const Option& o : options_) total_weight_ += o.weight;
    if (!(total_weight_ > 0.0)) throw Error("all predicate weights are zero");
  }

  std::size_t rejections() const noexcept { return rejections_; }

  // One attempt; returns false when a slot exhausts its rejections or the
  // final story lacks an entailed atom.
  bool attempt(Story& out) {
    Story s;
    for (const auto& c : reserved_) s.add_entity(c, EntityKind::Reserved);
    people_.clear();
    places_.clear();
    const int n_entities = static_cast<int>(rng_.between(cfg_.entities.lo, cfg_.entities.hi));
    const int n_facts = static_cast<int>(rng_.between(cfg_.facts.lo, cfg_.facts.hi));
    for (int i = 0; i < n_entities; ++i) {
      const bool person = rng_.chance(cfg_.person_percent);
      if (person) people_.push_back("p" + std::to_string(people_.size()));
      else places_.push_back("loc" + std::to_string(places_.size()));
      s.add_entity(person ? people_.back() : places_.back(), person ? EntityKind::Person : EntityKind::Place);
    }
    if (people_.empty()) return false;

    if (!vocab_.genders.empty()) {
      const auto cap = static_cast<std::size_t>(cfg_.max_gender_share * n_facts);
      std::size_t added = 0;
      for (const std::string& p : people_) {
        if (added >= cap) break;
        if (rng_.chance(cfg_.no_gender_assign)) continue;
        const auto& g = rng_.pick(vocab_.genders);
        s.add_fact(GroundAtom(g.predicate, {p, g.value}));
        ++added;
      }
      if (added > 0 && !consistent(s)) return false;
    }

    while (static_cast<int>(s.fact_count()) < n_facts) {
      int rejected = 0;
      for (;;) {
        auto fact = sample_fact(s);
        if (fact) {
          s.add_fact(*fact);
          if (consistent(s)) break;
          s.remove_fact(*fact);
        }
        ++rejections_;
        if (++rejected >= cfg_.max_rejections_per_slot) return false;
      }
    }

    const int n_amb = static_cast<int>(rng_.between(cfg_.ambiguous.lo, cfg_.ambiguous.hi));
    for (int i = 0; i < n_amb; ++i) {
      int rejected = 0;
      while (!inject_ambiguity(s)) {
        ++rejections_;
        if (++rejected >= cfg_.max_rejections_per_slot) return false;
      }
    }

    auto res = answer_sets(world_, std::make_shared<const Story>(s));
    if (!res.consistent() || !has_query(res, s)) return false;
    // Reparse so only reserved constants the story mentions stay declared.
    out = Story::parse(s.serialize(), *world_);
    return true;
  }

 private:
  bool consistent(const Story& s) const {
    if (refinement_count(s) > cfg_.max_refinements) return false;
    return answer_sets(world_, std::make_shared<const Story>(s)).consistent();
  }

  static bool has_query(const EntailmentResult& res, const Story& s) {
    for (const GroundAtom& a : res.entailed()) {
      if (a.args.size() != 2 || a.args[0] == a.args[1]) continue;
      if (s.reserved().count(a.args[0]) || s.reserved().count(a.args[1])) continue;
      return true;
    }
    return false;
  }

  const std::vector<std::string>& pool(EntityKind k) const { return k == EntityKind::Place ? places_ : people_; }

  const Option& pick_option() {
    double x = rng_.unit() * total_weight_;
    for (const Option& o : options_) {
      if (x < o.weight) return o;
      x -= o.weight;
    }
    return options_.back();
  }

  std::optional<GroundAtom> sample_fact(const Story& s) {
    const Option& o = pick_option();
    GroundAtom a;
    if (o.relation) {
      const auto& rel = vocab_.relations[o.index];
      const auto& xs = pool(rel.first);
      const auto& ys = pool(rel.second);
      if (xs.empty() || ys.empty()) return std::nullopt;
      const std::string& x = rng_.pick(xs);
      const std::string& y = rng_.pick(ys);
      if (x == y) return std::nullopt;
      a = GroundAtom(rel.predicate, {x, y});
    } else {
      const auto& prop = vocab_.properties[o.index];
      a = GroundAtom(prop.predicate, {rng_.pick(people_), prop.value});
    }
    if (s.has_fact(a) || in_ambiguous(s, a)) return std::nullopt;
    return a;
  }

  static bool in_ambiguous(const Story& s, const GroundAtom& a) {
    for (const auto& f : s.ambiguous())
      if (std::find(f.choices.begin(), f.choices.end(), a) != f.choices.end()) return true;
    return false;
  }

  bool is_relation(const std::string& p) const {
    return std::any_of(vocab_.relations.begin(), vocab_.relations.end(),
                       [&](const auto& r) { return r.predicate == p; });
  }

  // Replaces a random relation fact p(x,y) by k alternatives p(x,y_i) with
  // y_i of y's kind.
  bool inject_ambiguity(Story& s) {
    std::vector<const GroundAtom*> cands;
    for (const GroundAtom& f : s.facts())
      if (f.args.size() == 2 && is_relation(f.predicate)) cands.push_back(&f);
    if (cands.empty()) return false;
    const GroundAtom base = *cands[rng_.below(cands.size())];
    const auto kind = s.kind_of(base.args[1]);
    if (!kind) return false;
    const std::size_t k = rng_.chance(cfg_.three_choice_weight) ? 3 : 2;

    std::vector<std::string> alts;
    for (const std::string& y : pool(*kind)) {
      if (y == base.args[0] || y == base.args[1]) continue;
      GroundAtom a(base.predicate, {base.args[0], y});
      if (!s.has_fact(a) && !in_ambiguous(s, a)) alts.push_back(y);
    }
    if (alts.size() < k - 1) return false;

    AmbiguousFact amb;
    amb.choices.push_back(base);
    for (std::size_t i = 0; i + 1 < k; ++i) {
      const std::size_t j = i + rng_.below(alts.size() - i);
      std::swap(alts[i], alts[j]);
      amb.choices.emplace_back(base.predicate, std::vector<std::string>{base.args[0], alts[i]});
    }
    for (std::size_t i = amb.choices.size(); i > 1; --i) std::swap(amb.choices[i - 1], amb.choices[rng_.below(i)]);
    amb.lower = 1;
    amb.upper = rng_.chance(cfg_.exactly_one_weight) ? 1 : static_cast<int>(k);

    Story trial = s;
    trial.replace_with_ambiguous(base, amb);
    if (!consistent(trial)) return false;
    s = std::move(trial);
    return true;
  }

  std::shared_ptr<const Program> world_;
  const Vocabulary& vocab_;
  const GenConfig& cfg_;
  Rng& rng_;
  std::vector<Option> options_;
  double total_weight_ = 0.0;
  std::vector<std::string> reserved_;
  std::vector<std::string> people_;
  std::vector<std::string> places_;
  std::size_t rejections_ = 0;
};

}  // namespace

GenRecord generate_story(const Program& world, const GenConfig& cfg, Rng& rng) {
  cfg.validate();
  const Vocabulary vocab = Vocabulary::from_world(world);
  StoryBuilder builder(std::make_shared<const Program>(world), vocab, cfg, rng);
  GenRecord rec;
  rec.person_percent = cfg.person_percent;
  rec.no_gender_assign = cfg.no_gender_assign;
  for (int attempt = 1; attempt <= cfg.max_story_retries; ++attempt) {
    if (builder.attempt(rec.story)) {
      rec.attempts = static_cast<std::size_t>(attempt);
      rec.rejections = builder.rejections();
      return rec;
    }
  }
  throw GenerationFailure("no consistent story after " + std::to_string(cfg.max_story_retries) + " attempts",
                          builder.rejections(), static_cast<std::size_t>(cfg.max_story_retries));
}

GenRecord generate_story(const Program& world, const GenConfig& cfg, std::uint64_t seed) {
  Rng rng(seed);
  GenRecord rec = generate_story(world, cfg, rng);
  rec.seed = seed;
  return rec;
}

HarvestResult harvest_instances(const Program& world, const Story& story, const HarvestOptions& opts) {
  HarvestResult out;
  Analyzer an(answer_sets(world, story), opts.proof);
  const auto& res = an.result();
  if (!res.consistent()) return out;

  std::vector<std::pair<std::string, std::string>> pairs;
  std::set<std::pair<std::string, std::string>> seen;
  for (const GroundAtom& a : res.entailed()) {
    if (a.args.size() != 2 || a.args[0] == a.args[1]) continue;
    if (!story.kind_of(a.args[0]) || !story.kind_of(a.args[1])) continue;
    if (story.reserved().count(a.args[0]) || story.reserved().count(a.args[1])) continue;
    if (seen.insert({a.args[0], a.args[1]}).second) pairs.emplace_back(a.args[0], a.args[1]);
  }

  const bool ambiguous = !story.ambiguous().empty();
  std::size_t q = 0;
  for (const auto& [a, b] : pairs) {
    const std::set<std::string> rels = res.relations(a, b);
    ProblemInstance inst;
    try {
      inst.metrics = an.metrics(a, b, rels);
      inst.hard_ambiguous = ambiguous && an.hard_ambiguous(a, b, rels);
    } catch (const SearchBudgetExceeded&) {
      ++out.skipped;
      continue;
    }
    inst.id = opts.id_prefix + "q" + std::to_string(q++);
    inst.story = story;
    inst.source = a;
    inst.target = b;
    inst.labels.assign(rels.begin(), rels.end());
    out.instances.push_back(std::move(inst));
  }
  return out;
}

std::vector<BatchItem> generate_batch(const Program& world, const GenConfig& cfg, std::size_t count, unsigned jobs,
                                      const ProofOptions& proof) {
  cfg.validate();
  std::vector<BatchItem> items(count);
  std::atomic<std::size_t> next{0};
  auto work = [&] {
    for (std::size_t i; (i = next.fetch_add(1)) < count;) {
      BatchItem& it = items[i];
      it.index = i;
      try {
        it.record = generate_story(world, cfg, derive_seed(cfg.seed, i));
        HarvestOptions ho;
        ho.id_prefix = "s" + std::to_string(i);
        ho.proof = proof;
        auto h = harvest_instances(world, it.record.story, ho);
        for (auto& inst : h.instances) {
          inst.provenance.seed = it.record.seed;
          inst.provenance.story_index = i;
          inst.provenance.person_percent = it.record.person_percent;
          inst.provenance.no_gender_assign = it.record.no_gender_assign;
          inst.provenance.rejections = it.record.rejections;
        }
        it.instances = std::move(h.instances);
        it.skipped = h.skipped;
        it.ok = true;
      } catch (const Error& e) {
        it.error = e.what();
      }
    }
  };
  jobs = std::max(1u, jobs);
  if (jobs == 1 || count < 2) {
    work();
  } else {
    std::vector<std::thread> ts;
    for (unsigned t = 0; t < jobs; ++t) ts.emplace_back(work);
    for (auto& t : ts) t.join();
  }
  return items;
}

}  // namespace nora
