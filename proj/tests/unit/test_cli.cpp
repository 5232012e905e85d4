#include <gtest/gtest.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>

#include <nlohmann/json.hpp>

#include "fixtures.hpp"
#include "nora/cli.hpp"

namespace fs = std::filesystem;

namespace {

struct Outcome {
  int code = 0;
  std::string out;
  std::string err;
};

Outcome nora_run(std::vector<std::string> args) {
  std::ostringstream out, err;
  Outcome o;
  o.code = nora::cli::run(args, out, err);
  o.out = out.str();
  o.err = err.str();
  return o;
}

std::string slurp(const fs::path& p) {
  std::ifstream f(p, std::ios::binary);
  std::stringstream s;
  s << f.rdbuf();
  return s.str();
}

class Cli : public ::testing::Test {
 protected:
  void SetUp() override {
    dir_ = fs::temp_directory_path() /
           ("nora_cli_" + std::string(::testing::UnitTest::GetInstance()->current_test_info()->name()));
    fs::remove_all(dir_);
    fs::create_directories(dir_);
  }
  void TearDown() override { fs::remove_all(dir_); }

  std::string file(const std::string& name, std::string_view text) {
    const fs::path p = dir_ / name;
    std::ofstream(p, std::ios::binary) << text;
    return p.string();
  }
  std::string path(const std::string& name) const { return (dir_ / name).string(); }
  static std::string world(const char* w = "nora.lp") { return fixture::world_path(w); }

  std::string small_config(const char* ambiguous = "0-2") {
    return file("small.conf", std::string("entities = 5-7\nfacts = 5-9\nambiguous = ") + ambiguous + "\nseed = 7\n");
  }

  fs::path dir_;
};

}  // namespace

TEST_F(Cli, HelpAndUsage) {
  const auto help = nora_run({"--help"});
  EXPECT_EQ(help.code, nora::cli::kExitOk);
  for (const char* sub : {"solve", "metrics", "generate", "split", "stitch", "encode", "validate", "rerun"})
    EXPECT_NE(help.out.find(sub), std::string::npos) << sub;
  EXPECT_NE(help.out.find("NORA_CONFIG_DIR"), std::string::npos);
  EXPECT_EQ(nora_run({"generate", "--help"}).code, nora::cli::kExitOk);
  EXPECT_EQ(nora_run({}).code, nora::cli::kExitInputError);
  EXPECT_EQ(nora_run({"frobnicate"}).code, nora::cli::kExitInputError);
  EXPECT_EQ(nora_run({"split", "--world", world(), "--in", "x", "--preset", "no-such"}).code,
            nora::cli::kExitInputError);
}

TEST_F(Cli, SolvePrintsRelations) {
  const std::string story = file("mary.lp", fixture::kMaryStory);
  const auto r = nora_run({"solve", "--world", world(), "--story", story, "--source", "mary", "--target", "rome"});
  ASSERT_EQ(r.code, 0) << r.err;
  EXPECT_NE(r.out.find("refinements: 4\n"), std::string::npos);
  EXPECT_NE(r.out.find("answer sets: 2\n"), std::string::npos);
  EXPECT_NE(r.out.find("inconsistent refinements: 2\n"), std::string::npos);
  EXPECT_NE(r.out.find("R(mary,rome) = {living_in}\n"), std::string::npos);

  const auto e = nora_run({"solve", "--world", world(), "--story", story, "--source", "eve", "--target", "ann"});
  EXPECT_NE(e.out.find("R(eve,ann) = {}\n"), std::string::npos);

  const auto t =
      nora_run({"solve", "--world", world(), "--story", story, "--source", "mary", "--target", "rome", "--trace"});
  EXPECT_NE(t.out.find("contradiction"), std::string::npos);
  EXPECT_NE(t.out.find("Fact: "), std::string::npos);
}

TEST_F(Cli, SolveErrors) {
  const auto bad = nora_run({"solve", "--world", world(), "--story", file("bad.lp", "child_of(a,b"), "--source", "a",
                             "--target", "b"});
  EXPECT_EQ(bad.code, nora::cli::kExitInputError);
  EXPECT_NE(bad.err.find("error:"), std::string::npos);
  EXPECT_EQ(nora_run({"solve", "--world", world(), "--story", path("missing.lp")}).code, nora::cli::kExitInputError);
  const auto inconsistent = nora_run({"solve", "--world", world("nora_mini.lp"), "--story",
                                      file("x.lp", "school_mates_with(a,b). parent_of(a,c).")});
  EXPECT_EQ(inconsistent.code, nora::cli::kExitInputError);
  EXPECT_NE(inconsistent.err.find("no answer set"), std::string::npos);
}

TEST_F(Cli, MetricsTable) {
  const std::string header = "id\tsource\ttarget\tlabels\tdepth\twidth\tbl\topec\tdepth_positive\thard_ambiguous\n";
  const auto ryan = nora_run({"metrics", "--world", world(), "--story", file("ryan.lp", fixture::kRyanStory),
                              "--source", "ryan", "--target", "kgp"});
  ASSERT_EQ(ryan.code, 0) << ryan.err;
  EXPECT_EQ(ryan.out.substr(0, header.size()), header);
  EXPECT_NE(ryan.out.find("ryan.lp\tryan\tkgp\tliving_in\t4\t3\t"), std::string::npos) << ryan.out;

  const auto lola = nora_run({"metrics", "--world", world("nora_mini.lp"), "--story",
                              file("lola.lp", fixture::kLolaStory), "--source", "irfan", "--target", "lola"});
  EXPECT_NE(lola.out.find("\t5\t1\t5/3\t0\t5\t0\n"), std::string::npos) << lola.out;

  const auto empty = nora_run({"metrics", "--world", world(), "--in", file("empty.jsonl", "")});
  EXPECT_EQ(empty.code, 0) << empty.err;
  EXPECT_EQ(empty.out, header);
  EXPECT_EQ(nora_run({"metrics", "--world", world()}).code, nora::cli::kExitInputError);
}

TEST_F(Cli, GenerateIsDeterministicAndValidates) {
  const std::string cfg = small_config();
  for (const char* name : {"a.jsonl", "b.jsonl"}) {
    const auto r = nora_run({"generate", "--world", world(), "--config", cfg, "--count", "4", "--out", path(name)});
    ASSERT_EQ(r.code, 0) << r.err;
    EXPECT_NE(r.err.find("seed: 7\n"), std::string::npos);
  }
  const std::string a = slurp(path("a.jsonl"));
  EXPECT_FALSE(a.empty());
  EXPECT_EQ(a, slurp(path("b.jsonl")));

  const auto m = nlohmann::json::parse(slurp(path("a.jsonl.manifest.json")));
  EXPECT_EQ(m["subcommand"], "generate");
  EXPECT_EQ(m["seed"], 7);
  EXPECT_EQ(m["outputs"][0], path("a.jsonl"));
  EXPECT_TRUE(m.contains("wall_seconds"));
  EXPECT_TRUE(m.contains("version"));
  EXPECT_GT(m["instances"].get<int>(), 0);

  const auto seeded =
      nora_run({"generate", "--world", world(), "--config", cfg, "--seed", "8", "--count", "4", "--out", path("c")});
  ASSERT_EQ(seeded.code, 0);
  EXPECT_NE(slurp(path("c")), a);

  const auto v = nora_run({"validate", "--world", world(), "--in", path("a.jsonl"), "--config", cfg});
  EXPECT_EQ(v.code, nora::cli::kExitOk) << v.out;
  EXPECT_NE(v.out.find(" 0 violations"), std::string::npos);

  std::string tampered = a;
  const auto at = tampered.find("\"depth\":");
  ASSERT_NE(at, std::string::npos);
  tampered.replace(at, 9, "\"depth\":9");
  const auto bad = nora_run({"validate", "--world", world(), "--in", file("t.jsonl", tampered)});
  EXPECT_EQ(bad.code, nora::cli::kExitViolation) << bad.out;
}

TEST_F(Cli, SplitWarnsWhenWidthIsUnreachable) {
  ASSERT_EQ(nora_run({"generate", "--world", world(), "--config", small_config("0-0"), "--count", "3", "--out",
                      path("pool.jsonl")})
                .code,
            0);
  const auto r = nora_run({"split", "--world", world(), "--in", path("pool.jsonl"), "--preset", "test-w"});
  EXPECT_EQ(r.code, 0);
  EXPECT_EQ(r.out, "");
  EXPECT_NE(r.err.find("warning: split test-w is empty"), std::string::npos) << r.err;
  EXPECT_NE(r.err.find("needs ambiguous stories"), std::string::npos);

  const auto all = nora_run({"split", "--world", world(), "--in", path("pool.jsonl"), "--preset", "train-na"});
  EXPECT_EQ(all.code, 0);
  EXPECT_EQ(all.err.find("warning"), std::string::npos);
}

TEST_F(Cli, EncodeAndStitchReplay) {
  ASSERT_EQ(nora_run({"generate", "--world", world("grandma_mini.lp"), "--config", small_config("0-0"), "--count", "6",
                      "--out", path("pool.jsonl")})
                .code,
            0);
  const auto dot = nora_run({"encode", "--world", world("grandma_mini.lp"), "--in", path("pool.jsonl"), "--dot"});
  EXPECT_EQ(dot.code, 0);
  EXPECT_NE(dot.out.find("digraph"), std::string::npos);
  const auto js = nora_run({"encode", "--world", world("grandma_mini.lp"), "--in", path("pool.jsonl")});
  EXPECT_NE(js.out.find("\"nodes\""), std::string::npos);

  const auto st = nora_run({"stitch", "--world", world("grandma_mini.lp"), "--in", path("pool.jsonl"), "--preset",
                            "test-opec", "--seed", "5", "--out", path("st.jsonl")});
  ASSERT_EQ(st.code, 0) << st.err;
  const auto rp = nora_run({"stitch", "--world", world("grandma_mini.lp"), "--in", path("pool.jsonl"), "--replay",
                            path("st.jsonl")});
  EXPECT_EQ(rp.code, 0) << rp.err;
  EXPECT_EQ(rp.out, slurp(path("st.jsonl")));
  EXPECT_EQ(nora_run({"stitch", "--world", world("grandma_mini.lp"), "--in", path("pool.jsonl")}).code,
            nora::cli::kExitInputError);
}

TEST_F(Cli, RerunReproducesOutput) {
  ASSERT_EQ(nora_run({"generate", "--world", world(), "--config", small_config(), "--count", "3", "--out",
                      path("first.jsonl")})
                .code,
            0);
  const auto again = nora_run({"rerun", "--manifest", path("first.jsonl.manifest.json"), "--out", path("second.jsonl")});
  ASSERT_EQ(again.code, 0) << again.err;
  EXPECT_EQ(slurp(path("first.jsonl")), slurp(path("second.jsonl")));
  const auto m = nlohmann::json::parse(slurp(path("second.jsonl.manifest.json")));
  EXPECT_EQ(m["outputs"][0], path("second.jsonl"));

  EXPECT_EQ(nora_run({"rerun", "--manifest", file("junk.json", "{\"a\":1}")}).code, nora::cli::kExitInputError);
  EXPECT_EQ(nora_run({"rerun", "--manifest", path("none.json")}).code, nora::cli::kExitInputError);
}

TEST_F(Cli, DefaultConfigLookup) {
  // Relative world paths and default.conf resolve through the data directories.
  ::unsetenv("NORA_CONFIG_DIR");
  const auto shipped = nora_run({"generate", "--world", "worlds/grandma_mini.lp", "--count", "1", "--out", path("d")});
  ASSERT_EQ(shipped.code, 0) << shipped.err;
  const auto m = nlohmann::json::parse(slurp(path("d.manifest.json")));
  ASSERT_EQ(m["inputs"].size(), 2u);
  EXPECT_NE(m["inputs"][1].get<std::string>().find("configs/default.conf"), std::string::npos);
  EXPECT_EQ(m["seed"], 1);

  file("default.conf", "entities = 4-5\nfacts = 4-6\nambiguous = 0-0\nseed = 77\n");
  ::setenv("NORA_CONFIG_DIR", dir_.c_str(), 1);
  const auto local = nora_run({"generate", "--world", "worlds/grandma_mini.lp", "--count", "1", "--out", path("e")});
  ::unsetenv("NORA_CONFIG_DIR");
  ASSERT_EQ(local.code, 0) << local.err;
  EXPECT_NE(local.err.find("seed: 77\n"), std::string::npos);
}
