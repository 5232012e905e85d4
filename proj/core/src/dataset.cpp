#include "nora/dataset.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <map>
#include <memory>
#include <set>

#include <nlohmann/json.hpp>

#include "nora/engine.hpp"
#include "nora/error.hpp"

namespace nora {

using json = nlohmann::ordered_json;

// ---------------------------------------------------------------------------
// Bounds and presets

bool Bound::admits(const Rational& x) const {
  switch (cmp) {
    case Cmp::Any: return true;
    case Cmp::Lt: return x < value;
    case Cmp::Le: return x <= value;
    case Cmp::Eq: return x == value;
    case Cmp::Ge: return x >= value;
    case Cmp::Gt: return x > value;
  }
  return false;
}

std::string Bound::str() const {
  switch (cmp) {
    case Cmp::Any: return "-";
    case Cmp::Lt: return "<" + value.str();
    case Cmp::Le: return "<=" + value.str();
    case Cmp::Eq: return "=" + value.str();
    case Cmp::Ge: return ">=" + value.str();
    case Cmp::Gt: return ">" + value.str();
  }
  return "-";
}

Bound Bound::parse(std::string_view text) {
  std::string t(text);
  t.erase(std::remove(t.begin(), t.end(), ' '), t.end());
  if (t.empty() || t == "-") return {};
  Bound b;
  std::size_t skip = 1;
  if (t.rfind("<=", 0) == 0) b.cmp = Cmp::Le, skip = 2;
  else if (t.rfind(">=", 0) == 0) b.cmp = Cmp::Ge, skip = 2;
  else if (t[0] == '<') b.cmp = Cmp::Lt;
  else if (t[0] == '>') b.cmp = Cmp::Gt;
  else if (t[0] == '=') b.cmp = Cmp::Eq;
  else b.cmp = Cmp::Eq, skip = 0;
  b.value = Rational::parse(t.substr(skip));
  return b;
}

std::vector<std::string> SplitSpec::violations(const ProblemInstance& inst) const {
  std::vector<std::string> out;
  const auto& m = inst.metrics;
  auto check = [&](const Bound& b, const Rational& v, const char* what) {
    if (!b.admits(v)) out.push_back(std::string(what) + " " + v.str() + " violates " + b.str());
  };
  check(depth, Rational(m.max_depth, 1), "depth");
  if (positive_refinement && inst.ambiguous()) check(depth, Rational(m.depth_positive, 1), "positive-refinement depth");
  check(width, Rational(m.max_width, 1), "width");
  check(bl, m.max_bl, "bl");
  check(opec, Rational(m.max_opec, 1), "opec");
  if (!allow_ambiguous && inst.ambiguous()) out.push_back("story has ambiguous facts");
  return out;
}

bool SplitSpec::admits(const ProblemInstance& inst) const { return violations(inst).empty(); }

namespace {

struct PresetRow {
  const char* name;
  const char* depth;
  const char* width;
  const char* bl;
  const char* opec;
  bool positive;
  bool ambiguous;
};

constexpr PresetRow kPresets[] = {
    {"train-a", "<=6", "<=5", "<=1.5", "<=2", false, true},
    {"train-na", "<=6", "=1", "<=1.5", "<=2", false, false},
    {"test-d", ">6", "<=5", "<=1.5", "<=2", true, true},
    {"test-w", "<=6", ">5", "<=1.5", "<=2", false, true},
    {"test-bl", "<=6", "<=5", ">1.5", "-", true, true},
    {"test-opec", "-", "-", "-", ">=3", true, true},
    {"test-in-dist", "<=6", "<=5", "<=1.5", "<=2", false, true},
    {"test-d-na", ">6", "=1", "<=1.5", "<=2", false, false},
    {"test-bl-na", "<=6", "=1", ">1.5", "-", false, false},
    {"test-opec-na", "-", "=1", "-", ">=3", false, false},
    {"test-in-dist-na", "<=6", "=1", "<=1.5", "<=2", false, false},
    {"v1.1-train-na", "<=6", "=1", "<1.5", "<=3", false, false},
    {"v1.1-test-d-na", ">6", "=1", "<1.5", "<=3", false, false},
    {"v1.1-test-bl-na", "<=6", "=1", ">=1.5", "<=3", false, false},
    {"v1.1-test-opec-na", "-", "=1", "-", ">=3", false, false},
    {"v1.1-test-in-dist-na", "<=6", "=1", "<1.5", "<=3", false, false},
};

}  // namespace

SplitSpec split_preset(std::string_view name) {
  for (const auto& r : kPresets) {
    if (name != r.name) continue;
    SplitSpec s;
    s.name = r.name;
    s.depth = Bound::parse(r.depth);
    s.width = Bound::parse(r.width);
    s.bl = Bound::parse(r.bl);
    s.opec = Bound::parse(r.opec);
    s.positive_refinement = r.positive;
    s.allow_ambiguous = r.ambiguous;
    return s;
  }
  std::string all;
  for (const auto& n : split_preset_names()) all += (all.empty() ? "" : ", ") + n;
  throw Error("unknown split preset '" + std::string(name) + "' (known: " + all + ")");
}

std::vector<std::string> split_preset_names() {
  std::vector<std::string> out;
  for (const auto& r : kPresets) out.emplace_back(r.name);
  return out;
}

std::vector<ProblemInstance> filter_split(const std::vector<ProblemInstance>& pool, const SplitSpec& spec) {
  std::vector<ProblemInstance> out;
  for (const auto& inst : pool)
    if (spec.admits(inst)) out.push_back(inst);
  return out;
}

std::vector<std::string> unseen_labels(const std::vector<ProblemInstance>& train,
                                       const std::vector<ProblemInstance>& test) {
  std::set<std::string> seen, missing;
  for (const auto& i : train) seen.insert(i.labels.begin(), i.labels.end());
  for (const auto& i : test)
    for (const auto& l : i.labels)
      if (!seen.count(l)) missing.insert(l);
  return {missing.begin(), missing.end()};
}

std::vector<ProblemInstance> restrict_to_seen_labels(const std::vector<ProblemInstance>& train,
                                                     const std::vector<ProblemInstance>& test) {
  std::set<std::string> seen;
  for (const auto& i : train) seen.insert(i.labels.begin(), i.labels.end());
  std::vector<ProblemInstance> out;
  for (const auto& i : test)
    if (std::all_of(i.labels.begin(), i.labels.end(), [&](const auto& l) { return seen.count(l) > 0; }))
      out.push_back(i);
  return out;
}

// ---------------------------------------------------------------------------
// Balancing

std::string_view to_string(Metric m) {
  switch (m) {
    case Metric::Depth: return "depth";
    case Metric::Width: return "width";
    case Metric::Bl: return "bl";
    case Metric::Opec: return "opec";
  }
  return "?";
}

namespace {

Rational value_of(Metric m, const MetricBundle& mb) {
  switch (m) {
    case Metric::Depth: return Rational(mb.max_depth, 1);
    case Metric::Width: return Rational(mb.max_width, 1);
    case Metric::Bl: return mb.max_bl;
    case Metric::Opec: return Rational(mb.max_opec, 1);
  }
  return {};
}

// a/b <= c/d for positive denominators, without overflow at dataset scale.
bool rat_le(__int128 an, __int128 ad, __int128 cn, __int128 cd) { return an * cd <= cn * ad; }

}  // namespace

Binning::Binning(const std::vector<MetricBundle>& pool, const BinSpec& spec) {
  const int counts[] = {spec.depth, spec.width, spec.bl, 2};
  for (Metric m : kAllMetrics) {
    Axis& ax = axes_[static_cast<int>(m)];
    if (pool.empty()) continue;
    ax.lo = ax.hi = value_of(m, pool.front());
    for (const auto& mb : pool) {
      const Rational v = value_of(m, mb);
      ax.lo = std::min(ax.lo, v);
      ax.hi = std::max(ax.hi, v);
    }
    ax.bins = ax.lo == ax.hi ? 1 : std::max(1, counts[static_cast<int>(m)]);
  }
}

int Binning::bins(Metric m) const { return axis(m).bins; }

int Binning::bin_of(Metric m, const MetricBundle& mb) const {
  const Axis& ax = axis(m);
  if (ax.bins <= 1) return 0;
  const Rational v = value_of(m, mb);
  if (m == Metric::Opec) return v.num > 0 ? 1 : 0;
  // Smallest b with v <= lo + (hi - lo) * (b + 1) / bins.
  const __int128 dn = static_cast<__int128>(v.num) * ax.lo.den - static_cast<__int128>(ax.lo.num) * v.den;
  const __int128 dd = static_cast<__int128>(v.den) * ax.lo.den;
  const __int128 rn = static_cast<__int128>(ax.hi.num) * ax.lo.den - static_cast<__int128>(ax.lo.num) * ax.hi.den;
  const __int128 rd = static_cast<__int128>(ax.hi.den) * ax.lo.den;
  for (int b = 0; b + 1 < ax.bins; ++b)
    if (rat_le(dn * ax.bins, dd, rn * (b + 1), rd)) return b;
  return ax.bins - 1;
}

std::vector<std::size_t> Binning::marginal(Metric m, const std::vector<MetricBundle>& pool) const {
  std::vector<std::size_t> out(static_cast<std::size_t>(bins(m)), 0);
  for (const auto& mb : pool) ++out[static_cast<std::size_t>(bin_of(m, mb))];
  return out;
}

namespace {

bool within(const std::vector<std::size_t>& counts, double tol) {
  std::size_t lo = SIZE_MAX, hi = 0;
  for (std::size_t c : counts)
    if (c > 0) lo = std::min(lo, c), hi = std::max(hi, c);
  return hi == 0 || static_cast<double>(hi) <= tol * static_cast<double>(lo);
}

std::size_t target_of(const std::vector<std::size_t>& counts, double tol) {
  std::size_t lo = SIZE_MAX;
  for (std::size_t c : counts)
    if (c > 0) lo = std::min(lo, c);
  if (lo == SIZE_MAX) return 0;
  return std::max(lo, static_cast<std::size_t>(std::floor(tol * static_cast<double>(lo))));
}

}  // namespace

bool is_balanced(const std::vector<MetricBundle>& pool, const Binning& bins, double tolerance) {
  for (Metric m : kAllMetrics)
    if (!within(bins.marginal(m, pool), tolerance)) return false;
  return true;
}

BalanceReport balance_indices(const std::vector<MetricBundle>& pool, const BinSpec& spec, const BalanceOptions& opts) {
  const Binning bins(pool, spec);
  const std::size_t n = pool.size();
  std::vector<std::array<int, 4>> bin(n);
  for (std::size_t i = 0; i < n; ++i)
    for (Metric m : kAllMetrics) bin[i][static_cast<int>(m)] = bins.bin_of(m, pool[i]);
  std::vector<char> alive(n, 1);

  auto counts = [&](Metric m) {
    std::vector<std::size_t> c(static_cast<std::size_t>(bins.bins(m)), 0);
    for (std::size_t i = 0; i < n; ++i)
      if (alive[i]) ++c[static_cast<std::size_t>(bin[i][static_cast<int>(m)])];
    return c;
  };
  auto balanced = [&] {
    for (Metric m : kAllMetrics)
      if (!within(counts(m), opts.tolerance)) return false;
    return true;
  };

  BalanceReport rep;
  std::vector<int> score(n);
  while (rep.passes < opts.max_passes && !balanced()) {
    ++rep.passes;
    std::fill(score.begin(), score.end(), 0);
    for (Metric m : kAllMetrics) {
      const auto c = counts(m);
      const std::size_t target = target_of(c, opts.tolerance);
      for (std::size_t i = 0; i < n; ++i)
        if (alive[i] && c[static_cast<std::size_t>(bin[i][static_cast<int>(m)])] > target) ++score[i];
    }
    for (Metric m : kAllMetrics) {
      const auto c = counts(m);
      const std::size_t target = target_of(c, opts.tolerance);
      for (std::size_t b = 0; b < c.size(); ++b) {
        if (c[b] <= target) continue;
        std::vector<std::size_t> members;
        for (std::size_t i = 0; i < n; ++i)
          if (alive[i] && static_cast<std::size_t>(bin[i][static_cast<int>(m)]) == b) members.push_back(i);
        std::stable_sort(members.begin(), members.end(), [&](std::size_t x, std::size_t y) {
          return score[x] != score[y] ? score[x] > score[y] : x > y;
        });
        for (std::size_t r = 0; r < c[b] - target; ++r) alive[members[r]] = 0;
      }
    }
  }
  rep.balanced = balanced();
  for (std::size_t i = 0; i < n; ++i)
    if (alive[i]) rep.kept.push_back(i);
  return rep;
}

std::vector<ProblemInstance> balance_by_rejection(const std::vector<ProblemInstance>& pool, const BinSpec& bins,
                                                  const BalanceOptions& opts, BalanceReport* report) {
  std::vector<MetricBundle> mbs;
  mbs.reserve(pool.size());
  for (const auto& i : pool) mbs.push_back(i.metrics);
  BalanceReport rep = balance_indices(mbs, bins, opts);
  std::vector<ProblemInstance> out;
  for (std::size_t i : rep.kept) out.push_back(pool[i]);
  if (report) *report = std::move(rep);
  return out;
}

// ---------------------------------------------------------------------------
// Hard-ambiguous label

bool label_hard_ambiguous(const Program& world, const ProblemInstance& inst) {
  if (!inst.ambiguous()) return false;
  Analyzer an(answer_sets(world, inst.story));
  return an.hard_ambiguous(inst.source, inst.target, {inst.labels.begin(), inst.labels.end()});
}

// ---------------------------------------------------------------------------
// Graph encoding

std::size_t EncodedGraph::amb_count() const {
  return static_cast<std::size_t>(std::count_if(nodes.begin(), nodes.end(), [](const Node& n) { return n.kind == "amb"; }));
}

namespace {

// (predicate, constant) -> self-loop label.
std::map<std::pair<std::string, std::string>, std::string> loop_labels(const Program& world) {
  std::map<std::string, std::set<std::string>> preds_of;
  for (const Rule& r : world.rules()) {
    if (r.kind != Rule::Kind::Fact || !r.head || r.head->args.size() != 2) continue;
    const auto& p = r.head->predicate;
    if (p == "story_property" || p == "gender_marker") preds_of[r.head->args[1].name].insert(r.head->args[0].name);
  }
  std::map<std::pair<std::string, std::string>, std::string> out;
  for (const auto& [c, ps] : preds_of)
    for (const auto& p : ps) out[{p, c}] = ps.size() == 1 ? "is_" + c : p + ":" + c;
  return out;
}

}  // namespace

EncodedGraph encode_graph(const Program& world, const Story& story, const std::string& source,
                          const std::string& target, const std::vector<std::string>& labels) {
  EncodedGraph g;
  std::map<std::string, int> id;
  for (const auto& e : story.entities()) {
    id[e.name] = static_cast<int>(g.nodes.size());
    g.nodes.push_back({static_cast<int>(g.nodes.size()), e.name, std::string(to_string(e.kind))});
  }
  const auto loops = loop_labels(world);
  auto node = [&](const std::string& name) -> int {
    auto it = id.find(name);
    if (it == id.end()) throw Error("cannot encode constant '" + name + "' as a node");
    return it->second;
  };
  for (const auto& f : story.facts()) {
    if (f.args.size() == 1) {
      const int x = node(f.args[0]);
      g.edges.push_back({x, x, f.predicate});
    } else if (f.args.size() == 2 && story.reserved().count(f.args[1]) && !story.reserved().count(f.args[0])) {
      const int x = node(f.args[0]);
      auto it = loops.find({f.predicate, f.args[1]});
      g.edges.push_back({x, x, it != loops.end() ? it->second : f.predicate + ":" + f.args[1]});
    } else if (f.args.size() == 2) {
      g.edges.push_back({node(f.args[0]), node(f.args[1]), f.predicate});
    } else {
      throw Error("cannot encode fact '" + f.str() + "'");
    }
  }
  int k = 0;
  for (const auto& a : story.ambiguous()) {
    const int amb = static_cast<int>(g.nodes.size());
    g.nodes.push_back({amb, "amb" + std::to_string(++k), "amb"});
    const auto& first = a.choices.front();
    if (first.args.size() != 2) throw Error("cannot encode ambiguous fact over '" + first.predicate + "'");
    g.edges.push_back({node(first.args[0]), amb, first.predicate});
    const std::string tag(a.exactly_one() ? kAmbExactlyOne : kAmbAtLeastOne);
    for (const auto& c : a.choices) g.edges.push_back({amb, node(c.args[1]), tag});
  }
  g.source = node(source);
  g.target = node(target);
  g.labels = labels;
  return g;
}

std::string to_dot(const EncodedGraph& g) {
  auto quote = [](const std::string& s) {
    std::string out = "\"";
    for (char c : s) {
      if (c == '"' || c == '\\') out += '\\';
      out += c;
    }
    return out + "\"";
  };
  std::string out = "digraph story {\n";
  for (const auto& n : g.nodes) {
    out += "  n" + std::to_string(n.id) + " [label=" + quote(n.name);
    if (n.kind == "amb") out += ", shape=diamond";
    else if (n.kind == "place") out += ", shape=box";
    if (n.id == g.source || n.id == g.target) out += ", penwidth=2";
    out += "];\n";
  }
  for (const auto& e : g.edges)
    out += "  n" + std::to_string(e.from) + " -> n" + std::to_string(e.to) + " [label=" + quote(e.label) + "];\n";
  std::string rels;
  for (const auto& l : g.labels) rels += (rels.empty() ? "" : ", ") + l;
  out += "  label=" + quote("query: " + g.nodes.at(static_cast<std::size_t>(g.source)).name + " -> " +
                            g.nodes.at(static_cast<std::size_t>(g.target)).name + " {" + rels + "}") + ";\n";
  return out + "}\n";
}

// ---------------------------------------------------------------------------
// JSON records

namespace {

json graph_json(const EncodedGraph& g) {
  json nodes = json::array(), edges = json::array();
  for (const auto& n : g.nodes) nodes.push_back({{"id", n.id}, {"name", n.name}, {"kind", n.kind}});
  for (const auto& e : g.edges) edges.push_back({{"from", e.from}, {"to", e.to}, {"label", e.label}});
  return {{"nodes", nodes}, {"edges", edges}, {"source", g.source}, {"target", g.target}};
}

json map_json(const std::map<std::string, std::string>& m) {
  json o = json::object();
  for (const auto& [k, v] : m) o[k] = v;
  return o;
}

std::map<std::string, std::string> map_from(const json& j) {
  std::map<std::string, std::string> m;
  for (const auto& [k, v] : j.items()) m[k] = v.get<std::string>();
  return m;
}

}  // namespace

std::string to_json_line(const Program& world, const ProblemInstance& inst) {
  const auto& m = inst.metrics;
  const auto& pv = inst.provenance;
  json lineage = json::array();
  for (const auto& st : pv.lineage)
    lineage.push_back({{"base", st.base},
                       {"donor", st.donor},
                       {"lemma", st.lemma},
                       {"renaming", map_json(st.renaming)},
                       {"rename_after", map_json(st.rename_after)}});
  json j = {
      {"schema", kInstanceSchema},
      {"id", inst.id},
      {"story", inst.story.serialize()},
      {"query", {{"source", inst.source}, {"target", inst.target}}},
      {"labels", inst.labels},
      {"metrics",
       {{"depth", m.max_depth},
        {"width", m.max_width},
        {"bl", m.max_bl.str()},
        {"opec", m.max_opec},
        {"depth_positive", m.depth_positive}}},
      {"hard_ambiguous", inst.hard_ambiguous},
      {"graph", graph_json(encode_graph(world, inst.story, inst.source, inst.target, inst.labels))},
      {"provenance",
       {{"origin", pv.origin},
        {"seed", pv.seed},
        {"story_index", pv.story_index},
        {"person_percent", pv.person_percent},
        {"no_gender_assign", pv.no_gender_assign},
        {"rejections", pv.rejections},
        {"lineage", lineage}}},
  };
  return j.dump();
}

ProblemInstance from_json_line(const Program& world, std::string_view line) {
  json j;
  try {
    j = json::parse(line);
  } catch (const json::parse_error& e) {
    throw Error(std::string("malformed record: ") + e.what());
  }
  try {
    if (j.at("schema").get<std::string>() != kInstanceSchema)
      throw Error("unsupported record schema '" + j.at("schema").get<std::string>() + "'");
    ProblemInstance inst;
    inst.id = j.at("id").get<std::string>();
    inst.story = Story::parse(j.at("story").get<std::string>(), world);
    inst.source = j.at("query").at("source").get<std::string>();
    inst.target = j.at("query").at("target").get<std::string>();
    inst.labels = j.at("labels").get<std::vector<std::string>>();
    const auto& m = j.at("metrics");
    inst.metrics.max_depth = m.at("depth").get<std::uint32_t>();
    inst.metrics.max_width = m.at("width").get<std::uint32_t>();
    inst.metrics.max_bl = Rational::parse(m.at("bl").get<std::string>());
    inst.metrics.max_opec = m.at("opec").get<std::uint32_t>();
    inst.metrics.depth_positive = m.at("depth_positive").get<std::uint32_t>();
    inst.hard_ambiguous = j.at("hard_ambiguous").get<bool>();
    const auto& p = j.at("provenance");
    auto& pv = inst.provenance;
    pv.origin = p.at("origin").get<std::string>();
    pv.seed = p.at("seed").get<std::uint64_t>();
    pv.story_index = p.at("story_index").get<std::size_t>();
    pv.person_percent = p.at("person_percent").get<double>();
    pv.no_gender_assign = p.at("no_gender_assign").get<double>();
    pv.rejections = p.at("rejections").get<std::size_t>();
    for (const auto& st : p.at("lineage"))
      pv.lineage.push_back({st.at("base").get<std::string>(), st.at("donor").get<std::string>(),
                            st.at("lemma").get<std::string>(), map_from(st.at("renaming")),
                            map_from(st.at("rename_after"))});
    return inst;
  } catch (const json::exception& e) {
    throw Error(std::string("malformed record: ") + e.what());
  }
}

void export_jsonl(const Program& world, const std::vector<ProblemInstance>& instances,
                  const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError(path.string(), "cannot open for writing");
  for (const auto& inst : instances) out << to_json_line(world, inst) << '\n';
  if (!out) throw IoError(path.string(), "write failed");
}

std::vector<ProblemInstance> import_jsonl(const Program& world, const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError(path.string(), "cannot open for reading");
  std::vector<ProblemInstance> out;
  std::string line;
  std::size_t n = 0;
  while (std::getline(in, line)) {
    ++n;
    if (line.empty()) continue;
    try {
      out.push_back(from_json_line(world, line));
    } catch (const Error& e) {
      throw IoError(path.string(), "line " + std::to_string(n) + ": " + e.what());
    }
  }
  return out;
}

// ---------------------------------------------------------------------------
// Validation

std::vector<Violation> validate_instances(const Program& world, const std::vector<ProblemInstance>& instances,
                                          const ValidateOptions& opts) {
  std::vector<Violation> out;
  std::string cached_text;
  std::unique_ptr<Analyzer> an;
  for (const auto& inst : instances) {
    auto fail = [&](const std::string& msg) { out.push_back({inst.id, msg}); };
    const std::string text = inst.story.serialize();
    if (!an || text != cached_text) {
      an = std::make_unique<Analyzer>(answer_sets(world, inst.story), opts.proof);
      cached_text = text;
    }
    if (!an->result().consistent()) {
      fail("story has no answer set");
      continue;
    }
    const std::set<std::string> rels = an->result().relations(inst.source, inst.target);
    if (std::vector<std::string>(rels.begin(), rels.end()) != inst.labels) {
      std::string got;
      for (const auto& r : rels) got += (got.empty() ? "" : ",") + r;
      fail("recorded labels differ from recomputed {" + got + "}");
    }
    if (rels.empty()) {
      fail("query entails no relation");
    } else {
      try {
        const MetricBundle m = an->metrics(inst.source, inst.target, rels);
        if (m != inst.metrics)
          fail("recorded metrics differ from recomputed depth=" + std::to_string(m.max_depth) +
               " width=" + std::to_string(m.max_width) + " bl=" + m.max_bl.str() +
               " opec=" + std::to_string(m.max_opec) + " depth_positive=" + std::to_string(m.depth_positive));
        const bool hard = inst.ambiguous() && an->hard_ambiguous(inst.source, inst.target, rels);
        if (hard != inst.hard_ambiguous) fail(std::string("hard_ambiguous should be ") + (hard ? "true" : "false"));
      } catch (const SearchBudgetExceeded&) {
        fail("metrics not recomputable within the proof search budget");
      }
    }
    if (opts.split)
      for (const auto& v : opts.split->violations(inst)) fail(opts.split->name + ": " + v);
    if (opts.ranges && inst.provenance.origin == "sampled") {
      const auto& c = *opts.ranges;
      const auto ents = static_cast<int>(inst.story.entity_count());
      const auto facts = static_cast<int>(inst.story.fact_count());
      if (ents < c.entities.lo || ents > c.entities.hi)
        fail("entity count " + std::to_string(ents) + " outside " + std::to_string(c.entities.lo) + "-" +
             std::to_string(c.entities.hi));
      if (facts < c.facts.lo || facts > c.facts.hi)
        fail("fact count " + std::to_string(facts) + " outside " + std::to_string(c.facts.lo) + "-" +
             std::to_string(c.facts.hi));
    }
  }
  return out;
}

}  // namespace nora
