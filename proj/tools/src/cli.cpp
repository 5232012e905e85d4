#include "nora/cli.hpp"

#include <algorithm>
#include <chrono>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <memory>
#include <optional>
#include <sstream>

#include <CLI11.hpp>
#include <nlohmann/json.hpp>

#include "nora/dataset.hpp"
#include "nora/error.hpp"
#include "nora/generator.hpp"
#include "nora/metrics.hpp"
#include "nora/stitcher.hpp"

#ifndef NORA_VERSION
#define NORA_VERSION "0.0.0"
#endif
#ifndef NORA_DATA_DIR
#define NORA_DATA_DIR ""
#endif
#ifndef NORA_SOURCE_DATA_DIR
#define NORA_SOURCE_DATA_DIR ""
#endif

namespace nora::cli {

namespace fs = std::filesystem;

namespace {

constexpr const char* kConfigEnv = "NORA_CONFIG_DIR";
constexpr const char* kDefaultConfigName = "default.conf";

// Thrown for bad flags, missing files and unparsable inputs.
struct InputError : Error {
  using Error::Error;
};

std::vector<fs::path> search_dirs() {
  std::vector<fs::path> dirs;
  if (const char* env = std::getenv(kConfigEnv); env && *env) dirs.emplace_back(env);
  if (*NORA_DATA_DIR) dirs.emplace_back(NORA_DATA_DIR);
  if (*NORA_SOURCE_DATA_DIR) dirs.emplace_back(NORA_SOURCE_DATA_DIR);
  return dirs;
}

// Paths that do not exist as given are looked up under NORA_CONFIG_DIR, the
// installed data directory and then the source tree.
fs::path resolve(const std::string& name, const char* what) {
  fs::path p(name);
  if (fs::exists(p)) return p;
  if (p.is_relative())
    for (const auto& d : search_dirs())
      if (fs::exists(d / p)) return d / p;
  throw InputError(std::string(what) + " '" + name + "' not found");
}

struct Options {
  std::string world;
  std::string config;
  std::uint64_t seed = 0;
  bool seed_set = false;
  std::string out;
  std::string in;
  std::string preset;
  unsigned jobs = 1;
  bool dot = false;

  std::string story;
  std::string source;
  std::string target;
  bool trace = false;
  std::size_t count = 100;
  bool balance = false;
  std::string seen;
  std::size_t rounds = 1;
  std::size_t cap = 16;
  bool allow_ambiguous = false;
  std::string replay;
  std::size_t budget = ProofOptions{}.node_budget;
};

struct Run {
  Run(std::string cmd, const Options& opts, std::ostream& o_out, std::ostream& o_err)
      : command(std::move(cmd)), o(opts), out(o_out), err(o_err) {}

  std::string command;
  const Options& o;
  std::ostream& out;
  std::ostream& err;
  std::chrono::steady_clock::time_point start = std::chrono::steady_clock::now();
  std::vector<std::string> inputs;
  std::vector<std::string> outputs;
  std::size_t instances = 0;
  std::optional<std::uint64_t> seed;
  std::string config_text;
  std::vector<std::string> args;

  Program world() {
    const fs::path p = resolve(o.world, "world file");
    inputs.push_back(p.string());
    return parse_program_file(p);
  }

  ProofOptions proof() const {
    ProofOptions po;
    po.node_budget = o.budget;
    return po;
  }

  std::vector<ProblemInstance> read(const Program& w, const std::string& path) {
    const fs::path p = resolve(path, "input file");
    inputs.push_back(p.string());
    return import_jsonl(w, p);
  }

  // Writes to --out, or to stdout when --out is absent.
  void emit(const std::string& text) {
    if (o.out.empty()) {
      out << text;
      return;
    }
    std::ofstream f(o.out, std::ios::binary);
    if (!f) throw IoError(o.out, "cannot open for writing");
    f << text;
    if (!f) throw IoError(o.out, "write failed");
    outputs.push_back(o.out);
  }

  void emit_records(const Program& w, const std::vector<ProblemInstance>& insts) {
    std::string text;
    for (const auto& i : insts) text += to_json_line(w, i) + "\n";
    instances = insts.size();
    emit(text);
  }

  void manifest() {
    if (o.out.empty()) return;
    const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    nlohmann::ordered_json j = {
        {"tool", "nora"},
        {"version", NORA_VERSION},
        {"subcommand", command},
        {"args", args},
        {"world", o.world},
        {"config", o.config},
        {"preset", o.preset},
        {"jobs", o.jobs},
        {"inputs", inputs},
        {"outputs", outputs},
        {"instances", instances},
        {"wall_seconds", secs},
    };
    if (seed) j["seed"] = *seed;
    if (!config_text.empty()) j["config_text"] = config_text;
    const std::string path = o.out + ".manifest.json";
    std::ofstream f(path, std::ios::binary);
    if (!f) throw IoError(path, "cannot open for writing");
    f << j.dump(2) << "\n";
  }
};

std::string join(const std::set<std::string>& s) {
  std::string out;
  for (const auto& x : s) out += (out.empty() ? "" : ",") + x;
  return out;
}

int cmd_solve(Run& r) {
  const Program w = r.world();
  const fs::path sp = resolve(r.o.story, "story file");
  r.inputs.push_back(sp.string());
  std::ifstream in(sp, std::ios::binary);
  std::stringstream buf;
  buf << in.rdbuf();
  const Story story = Story::parse(buf.str(), w);
  Analyzer an(answer_sets(w, story), r.proof());
  const auto& res = an.result();

  std::ostringstream o;
  o << "refinements: " << res.refinement_count() << "\n";
  o << "answer sets: " << res.ref_plus_indices().size() << "\n";
  o << "inconsistent refinements: " << res.ref_minus_indices().size() << "\n";
  if (!res.consistent()) throw InconsistentStory("story has no answer set");
  if (r.o.source.empty() != r.o.target.empty()) throw InputError("--source and --target go together");
  if (r.o.source.empty()) {
    for (const auto& a : res.entailed()) o << "entailed: " << a.str() << "\n";
    r.emit(o.str());
    return kExitOk;
  }
  const auto rels = res.relations(r.o.source, r.o.target);
  o << "R(" << r.o.source << "," << r.o.target << ") = {" << join(rels) << "}\n";
  if (r.o.trace) {
    for (std::size_t k : res.ref_plus_indices())
      for (const auto& l : rels) {
        const GroundAtom goal{l, {r.o.source, r.o.target}};
        o << "\n# refinement " << k << ": " << goal.str() << "\n" << format_trace(an.proof(k, goal));
      }
    for (std::size_t k : res.ref_minus_indices())
      o << "\n# refinement " << k << ": contradiction\n" << format_trace(an.contradiction(k));
  }
  r.emit(o.str());
  return kExitOk;
}

int cmd_metrics(Run& r) {
  const Program w = r.world();
  std::ostringstream o;
  o << "id\tsource\ttarget\tlabels\tdepth\twidth\tbl\topec\tdepth_positive\thard_ambiguous\n";
  auto row = [&](const std::string& id, Analyzer& an, const std::string& a, const std::string& b, bool ambiguous) {
    const auto rels = an.result().relations(a, b);
    if (rels.empty()) throw InputError("query (" + a + "," + b + ") of " + id + " entails no relation");
    const MetricBundle m = an.metrics(a, b, rels);
    const bool hard = ambiguous && an.hard_ambiguous(a, b, rels);
    o << id << '\t' << a << '\t' << b << '\t' << join(rels) << '\t' << m.max_depth << '\t' << m.max_width << '\t'
      << m.max_bl.str() << '\t' << m.max_opec << '\t' << m.depth_positive << '\t' << (hard ? 1 : 0) << '\n';
    ++r.instances;
  };
  if (!r.o.story.empty()) {
    if (r.o.source.empty() || r.o.target.empty()) throw InputError("--story needs --source and --target");
    const fs::path sp = resolve(r.o.story, "story file");
    r.inputs.push_back(sp.string());
    std::ifstream in(sp, std::ios::binary);
    std::stringstream buf;
    buf << in.rdbuf();
    const Story story = Story::parse(buf.str(), w);
    Analyzer an(answer_sets(w, story), r.proof());
    if (!an.result().consistent()) throw InconsistentStory("story has no answer set");
    row(sp.filename().string(), an, r.o.source, r.o.target, !story.ambiguous().empty());
  } else {
    if (r.o.in.empty()) throw InputError("metrics needs --in or --story");
    std::string last;
    std::unique_ptr<Analyzer> an;
    for (const auto& inst : r.read(w, r.o.in)) {
      const std::string text = inst.story.serialize();
      if (!an || text != last) {
        an = std::make_unique<Analyzer>(answer_sets(w, inst.story), r.proof());
        last = text;
      }
      if (!an->result().consistent()) throw InconsistentStory(inst.id + ": story has no answer set");
      row(inst.id, *an, inst.source, inst.target, inst.ambiguous());
    }
  }
  r.emit(o.str());
  return kExitOk;
}

GenConfig load_config(Run& r) {
  GenConfig cfg;
  std::optional<fs::path> path;
  if (!r.o.config.empty()) {
    path = resolve(r.o.config, "config file");
  } else {
    for (const auto& d : search_dirs()) {
      for (const fs::path& c : {d / kDefaultConfigName, d / "configs" / kDefaultConfigName})
        if (!path && fs::exists(c)) path = c;
      if (path) break;
    }
  }
  if (path) {
    cfg = GenConfig::load(*path);
    r.inputs.push_back(path->string());
  }
  if (r.o.seed_set) cfg.seed = r.o.seed;
  cfg.validate();
  return cfg;
}

int cmd_generate(Run& r) {
  if (r.o.out.empty()) throw InputError("generate needs --out");
  const Program w = r.world();
  const GenConfig cfg = load_config(r);
  r.seed = cfg.seed;
  r.config_text = cfg.to_text();
  r.err << "seed: " << cfg.seed << "\n";
  const auto items = generate_batch(w, cfg, r.o.count, r.o.jobs, r.proof());
  std::vector<ProblemInstance> all;
  std::size_t failed = 0, skipped = 0;
  for (const auto& it : items) {
    if (!it.ok) {
      ++failed;
      r.err << "story " << it.index << ": " << it.error << "\n";
      continue;
    }
    skipped += it.skipped;
    all.insert(all.end(), it.instances.begin(), it.instances.end());
  }
  r.emit_records(w, all);
  r.err << "stories: " << items.size() - failed << " of " << items.size() << ", instances: " << all.size()
        << ", skipped queries: " << skipped << "\n";
  return kExitOk;
}

int cmd_split(Run& r) {
  if (r.o.in.empty() || r.o.preset.empty()) throw InputError("split needs --in and --preset");
  const Program w = r.world();
  const SplitSpec spec = split_preset(r.o.preset);
  const auto pool = r.read(w, r.o.in);
  auto split = filter_split(pool, spec);
  if (!r.o.seen.empty()) {
    const auto train = r.read(w, r.o.seen);
    split = restrict_to_seen_labels(train, split);
  }
  if (r.o.balance) {
    BalanceReport rep;
    split = balance_by_rejection(split, BinSpec{}, BalanceOptions{}, &rep);
    r.err << "balance: " << split.size() << " kept after " << rep.passes << " passes"
          << (rep.balanced ? "" : " (tolerance not reached)") << "\n";
  }
  if (split.empty()) {
    r.err << "warning: split " << spec.name << " is empty";
    const bool unambiguous =
        std::none_of(pool.begin(), pool.end(), [](const ProblemInstance& i) { return i.ambiguous(); });
    if (unambiguous && spec.width.cmp == Bound::Cmp::Gt)
      r.err << " (width " << spec.width.str() << " needs ambiguous stories; the pool has none)";
    r.err << "\n";
  }
  r.emit_records(w, split);
  r.err << spec.name << ": " << split.size() << " of " << pool.size() << " instances\n";
  return kExitOk;
}

int cmd_stitch(Run& r) {
  if (r.o.in.empty()) throw InputError("stitch needs --in (the component pool)");
  const Program w = r.world();
  const auto pool = r.read(w, r.o.in);
  StitchOptions so;
  so.allow_ambiguous = r.o.allow_ambiguous;
  so.proof = r.proof();
  if (!r.o.replay.empty()) {
    const auto records = r.read(w, r.o.replay);
    std::vector<ProblemInstance> rebuilt;
    std::size_t mismatched = 0;
    for (const auto& rec : records) {
      ProblemInstance again = replay(w, pool, rec, so);
      if (to_json_line(w, again) != to_json_line(w, rec)) {
        ++mismatched;
        r.err << rec.id << ": replay differs from the recorded instance\n";
      }
      rebuilt.push_back(std::move(again));
    }
    r.emit_records(w, rebuilt);
    r.err << "replayed " << rebuilt.size() << " instances, " << mismatched << " mismatched\n";
    return mismatched ? kExitViolation : kExitOk;
  }
  if (r.o.preset.empty()) throw InputError("stitch needs --preset (the target split) or --replay");
  ExpandOptions eo;
  eo.rounds = r.o.rounds;
  eo.seed = r.o.seed_set ? r.o.seed : 1;
  eo.candidate_cap = r.o.cap;
  eo.jobs = r.o.jobs;
  eo.stitch = so;
  r.seed = eo.seed;
  r.err << "seed: " << eo.seed << "\n";
  ExpandReport rep;
  const auto outs = recursive_expand(w, pool, split_preset(r.o.preset), eo, &rep);
  r.emit_records(w, outs);
  r.err << "bases: " << rep.bases << ", stitches: " << rep.stitched << ", rejected pairs: " << rep.failed
        << ", outputs: " << outs.size() << "\n";
  return kExitOk;
}

int cmd_encode(Run& r) {
  if (r.o.in.empty()) throw InputError("encode needs --in");
  const Program w = r.world();
  std::string text;
  for (const auto& inst : r.read(w, r.o.in)) {
    const EncodedGraph g = encode_graph(w, inst.story, inst.source, inst.target, inst.labels);
    if (r.o.dot) {
      text += "// " + inst.id + "\n" + to_dot(g);
    } else {
      nlohmann::ordered_json nodes = nlohmann::ordered_json::array(), edges = nlohmann::ordered_json::array();
      for (const auto& n : g.nodes) nodes.push_back({{"id", n.id}, {"name", n.name}, {"kind", n.kind}});
      for (const auto& e : g.edges) edges.push_back({{"from", e.from}, {"to", e.to}, {"label", e.label}});
      nlohmann::ordered_json j = {{"id", inst.id}, {"nodes", nodes},      {"edges", edges},
                                  {"source", g.source}, {"target", g.target}, {"labels", g.labels}};
      text += j.dump() + "\n";
    }
    ++r.instances;
  }
  r.emit(text);
  return kExitOk;
}

int cmd_validate(Run& r) {
  if (r.o.in.empty()) throw InputError("validate needs --in");
  const Program w = r.world();
  ValidateOptions vo;
  vo.proof = r.proof();
  if (!r.o.preset.empty()) vo.split = split_preset(r.o.preset);
  if (!r.o.config.empty()) vo.ranges = load_config(r);
  const auto insts = r.read(w, r.o.in);
  const auto bad = validate_instances(w, insts, vo);
  std::string text;
  for (const auto& v : bad) text += v.id + ": " + v.message + "\n";
  text += std::to_string(insts.size()) + " instances, " + std::to_string(bad.size()) + " violations\n";
  r.instances = insts.size();
  r.emit(text);
  return bad.empty() ? kExitOk : kExitViolation;
}

// Arguments of a recorded run, with --out replaced when `out` is set.
std::vector<std::string> recorded_args(const std::string& manifest, const std::string& out) {
  std::ifstream f(manifest, std::ios::binary);
  if (!f) throw IoError(manifest, "cannot open");
  const auto j = nlohmann::json::parse(f, nullptr, false);
  if (j.is_discarded() || !j.contains("args") || !j["args"].is_array())
    throw InputError(manifest + ": not a run manifest");
  auto args = j["args"].get<std::vector<std::string>>();
  if (args.empty() || args.front() == "rerun") throw InputError(manifest + ": not a run manifest");
  if (out.empty()) return args;
  for (auto& a : args)
    if (a.rfind("--out=", 0) == 0) {
      a = "--out=" + out;
      return args;
    }
  auto it = std::find(args.begin(), args.end(), "--out");
  if (it != args.end() && it + 1 != args.end()) {
    *(it + 1) = out;
  } else {
    args.push_back("--out");
    args.push_back(out);
  }
  return args;
}

}  // namespace

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Generate, solve, measure, split, stitch and export relational reasoning instances.", "nora"};
  app.set_version_flag("--version", NORA_VERSION);
  app.require_subcommand(1);
  app.footer(std::string("Relative --world, --config and input paths that do not exist are looked up under $") +
             kConfigEnv + ", then under the installed data directory. Without --config, generate reads " +
             kDefaultConfigName + " (or configs/" + kDefaultConfigName + ") from those directories when present.\n"
             "Exit codes: 0 success, 1 validation failure, 2 input error.");

  Options o;
  auto world = [&](CLI::App* s) { s->add_option("--world", o.world, "World rule file")->required(); };
  auto out_opt = [&](CLI::App* s, bool req = false) {
    auto* opt = s->add_option("--out", o.out, "Output path (stdout when absent); also writes <out>.manifest.json");
    if (req) opt->required();
  };
  auto seed = [&](CLI::App* s) {
    s->add_option_function<std::uint64_t>(
        "--seed", [&](const std::uint64_t& v) { o.seed = v, o.seed_set = true; }, "Master 64-bit seed");
  };
  auto jobs = [&](CLI::App* s) { s->add_option("--jobs", o.jobs, "Worker threads")->check(CLI::Range(1u, 1024u)); };
  auto budget = [&](CLI::App* s) {
    s->add_option("--node-budget", o.budget, "Proof search nodes per proof")->check(CLI::PositiveNumber);
  };

  auto* solve = app.add_subcommand("solve", "Solve a story and print R for a query");
  world(solve);
  solve->add_option("--story", o.story, "Story file")->required();
  solve->add_option("--source", o.source, "Query source entity");
  solve->add_option("--target", o.target, "Query target entity");
  solve->add_flag("--trace", o.trace, "Print minimal proofs per refinement");
  out_opt(solve);
  budget(solve);

  auto* metrics = app.add_subcommand("metrics", "Print depth, width, BL and OPEC as tab-separated rows");
  world(metrics);
  metrics->add_option("--in", o.in, "Instance file (JSON lines)");
  metrics->add_option("--story", o.story, "Story file, with --source and --target");
  metrics->add_option("--source", o.source, "Query source entity");
  metrics->add_option("--target", o.target, "Query target entity");
  out_opt(metrics);
  budget(metrics);

  auto* generate = app.add_subcommand("generate", "Sample stories and harvest instances");
  world(generate);
  generate->add_option("--config", o.config, "Generator config file");
  seed(generate);
  generate->add_option("--count", o.count, "Number of stories")->check(CLI::PositiveNumber);
  jobs(generate);
  out_opt(generate, true);
  budget(generate);

  auto* split = app.add_subcommand("split", "Filter a pool by a split preset");
  world(split);
  split->add_option("--in", o.in, "Pool file")->required();
  split->add_option("--preset", o.preset, "Split preset")->required()->check(CLI::IsMember(split_preset_names()));
  split->add_option("--seen", o.seen, "Training file; drop instances with labels it never uses");
  split->add_flag("--balance", o.balance, "Balance metric marginals by rejection");
  out_opt(split);

  auto* stitchc = app.add_subcommand("stitch", "Compose pool instances into harder ones, or replay lineages");
  world(stitchc);
  stitchc->add_option("--in", o.in, "Component pool file")->required();
  stitchc->add_option("--preset", o.preset, "Target split preset")->check(CLI::IsMember(split_preset_names()));
  stitchc->add_option("--rounds", o.rounds, "Stitches per base instance");
  stitchc->add_option("--cap", o.cap, "Candidate pairs tried per base and round")->check(CLI::PositiveNumber);
  stitchc->add_option("--replay", o.replay, "Rebuild the instances in this file from their lineage");
  stitchc->add_flag("--allow-ambiguous", o.allow_ambiguous, "Stitch stories with ambiguous facts");
  seed(stitchc);
  jobs(stitchc);
  out_opt(stitchc);
  budget(stitchc);

  auto* encode = app.add_subcommand("encode", "Export instance graphs");
  world(encode);
  encode->add_option("--in", o.in, "Instance file")->required();
  encode->add_flag("--dot", o.dot, "Write Graphviz DOT instead of JSON lines");
  out_opt(encode);

  auto* validate = app.add_subcommand("validate", "Recompute labels and metrics and check split bounds");
  world(validate);
  validate->add_option("--in", o.in, "Instance file")->required();
  validate->add_option("--preset", o.preset, "Split preset to check")->check(CLI::IsMember(split_preset_names()));
  validate->add_option("--config", o.config, "Check entity and fact ranges of sampled stories");
  out_opt(validate);
  budget(validate);

  std::string manifest_path;
  auto* rerun = app.add_subcommand("rerun", "Repeat the run recorded in a manifest");
  rerun->add_option("--manifest", manifest_path, "Manifest written by an earlier run")->required();
  rerun->add_option("--out", o.out, "Output path replacing the recorded one");

  std::vector<std::string> argv_s{"nora"};
  argv_s.insert(argv_s.end(), args.begin(), args.end());
  std::vector<char*> argv;
  for (auto& a : argv_s) argv.push_back(a.data());
  try {
    app.parse(static_cast<int>(argv.size()), argv.data());
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? kExitOk : kExitInputError;
  }

  CLI::App* sub = app.get_subcommands().front();
  if (sub == rerun) {
    std::vector<std::string> again;
    try {
      again = recorded_args(manifest_path, o.out);
    } catch (const std::exception& e) {
      err << "error: " << e.what() << "\n";
      return kExitInputError;
    }
    return run(again, out, err);
  }
  Run r(sub->get_name(), o, out, err);
  r.args = args;
  try {
    int code = kExitOk;
    if (sub == solve) code = cmd_solve(r);
    else if (sub == metrics) code = cmd_metrics(r);
    else if (sub == generate) code = cmd_generate(r);
    else if (sub == split) code = cmd_split(r);
    else if (sub == stitchc) code = cmd_stitch(r);
    else if (sub == encode) code = cmd_encode(r);
    else if (sub == validate) code = cmd_validate(r);
    r.manifest();
    return code;
  } catch (const Error& e) {
    err << "error: " << e.what() << "\n";
    return kExitInputError;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << "\n";
    return kExitInputError;
  }
}

}  // namespace nora::cli
