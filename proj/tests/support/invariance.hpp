#pragma once

#include <cstdint>
#include <string>

namespace invariance {

// Solves a random small story, renames every entity with a random
// permutation onto fresh names, reorders its facts and solves again.
// Returns "" when labels and all four metrics agree, otherwise a report.
// Even seeds use a random tiny world, odd seeds a story sampled from the
// grandmother world.
std::string metric_invariance_case(std::uint64_t seed);

}  // namespace invariance
