#pragma once

#include <cstdint>
#include <string>

#include "oracles.hpp"

namespace oracle {

struct EquivalenceStats {
  std::size_t refinements = 0;
  std::size_t proofs = 0;
  std::size_t capped = 0;  // proofs the breadth-first oracle could not finish
};

// Solves `c` with the engine and with the oracles and compares refinements,
// answer sets, entailed atoms, R for every entity pair and minimal-proof step
// counts. Returns an empty string on agreement, otherwise the first mismatch.
std::string compare_with_engine(const TinyCase& c, EquivalenceStats* stats = nullptr);

}  // namespace oracle
