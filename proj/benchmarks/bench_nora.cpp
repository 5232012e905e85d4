#include <benchmark/benchmark.h>

#include <string>

#include "nora/dataset.hpp"
#include "nora/engine.hpp"
#include "nora/generator.hpp"
#include "nora/metrics.hpp"
#include "nora/proof.hpp"

using namespace nora;

namespace {

const Program& world() {
  static const Program p = parse_program_file(std::string(NORA_BENCH_WORLDS) + "/nora.lp");
  return p;
}

constexpr const char* kAmbiguous =
    "belongs_to(ryan,underage). school_mates_with(cole,will). living_in_same_place(sheila,lalit). "
    "living_in(lalit,kgp). living_in(phil,kgp). 1{living_in(cole,east_rock); living_in(cole,dwight)}1. "
    "1{child_of(ryan,brutus); child_of(ryan,cole)}1. 1{colleague_of(brutus,phil); colleague_of(brutus,sheila)}1.";

// A default-sized sampled story, fixed by its seed.
const Story& sampled() {
  static const Story s = generate_story(world(), GenConfig{}, 42).story;
  return s;
}

void BM_ParseWorld(benchmark::State& st) {
  const std::string text = serialize_program(world());
  for (auto _ : st) benchmark::DoNotOptimize(parse_program(text));
}
BENCHMARK(BM_ParseWorld);

void BM_SolveAmbiguous(benchmark::State& st) {
  const Story s = Story::parse(kAmbiguous, world());
  for (auto _ : st) benchmark::DoNotOptimize(answer_sets(world(), s));
}
BENCHMARK(BM_SolveAmbiguous);

void BM_SolveSampled(benchmark::State& st) {
  for (auto _ : st) benchmark::DoNotOptimize(answer_sets(world(), sampled()));
}
BENCHMARK(BM_SolveSampled)->Unit(benchmark::kMillisecond);

void BM_MinimalProof(benchmark::State& st) {
  const auto res = answer_sets(world(), Story::parse(kAmbiguous, world()));
  const GroundAtom goal = GroundAtom::parse("living_in(ryan,kgp)");
  const std::size_t k = res.ref_plus_indices().front();
  for (auto _ : st) benchmark::DoNotOptimize(minimal_proof(res, k, goal));
}
BENCHMARK(BM_MinimalProof);

void BM_MetricsAmbiguous(benchmark::State& st) {
  const Story s = Story::parse(kAmbiguous, world());
  for (auto _ : st) benchmark::DoNotOptimize(compute_metrics(world(), s, "ryan", "kgp", {"living_in"}));
}
BENCHMARK(BM_MetricsAmbiguous);

void BM_HarvestSampled(benchmark::State& st) {
  for (auto _ : st) benchmark::DoNotOptimize(harvest_instances(world(), sampled()));
}
BENCHMARK(BM_HarvestSampled)->Unit(benchmark::kMillisecond);

void BM_GenerateStory(benchmark::State& st) {
  std::uint64_t seed = 1;
  for (auto _ : st) benchmark::DoNotOptimize(generate_story(world(), GenConfig{}, seed++));
}
BENCHMARK(BM_GenerateStory)->Unit(benchmark::kMillisecond);

void BM_OffPathEdges(benchmark::State& st) {
  const Story& s = sampled();
  const std::string a = s.entities().front().name, b = s.entities().back().name;
  for (auto _ : st) benchmark::DoNotOptimize(off_path_edges(s, a, b));
}
BENCHMARK(BM_OffPathEdges);

void BM_RecordRoundTrip(benchmark::State& st) {
  const auto insts = harvest_instances(world(), sampled()).instances;
  for (auto _ : st)
    for (const auto& i : insts) benchmark::DoNotOptimize(from_json_line(world(), to_json_line(world(), i)));
  st.SetItemsProcessed(static_cast<std::int64_t>(st.iterations() * insts.size()));
}
BENCHMARK(BM_RecordRoundTrip)->Unit(benchmark::kMillisecond);

}  // namespace

BENCHMARK_MAIN();
