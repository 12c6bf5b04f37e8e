#pragma once

#include <cstdint>

#include "acckit/accel.hpp"
#include "acckit/ir.hpp"

namespace acckit {

// Knobs for the random program generator. Defaults produce small programs
// that still hit every op kind and both configuration schemes.
struct GenOptions {
  int max_depth = 3;      // nesting budget for loops and branches
  int block_budget = 10;  // ops emitted per block before its yield
  int max_trip = 4;       // loop trip counts are drawn from [0, max_trip]
  bool single_accel = false;   // restrict to the registry's first entry
  bool allow_clobbers = true;  // emit calls that smash device registers
};

// Deterministically generates a program that passes `verify` against the
// given registry: straight-line stretches, branches that join device
// states, loops that thread them, kernel-shaped [setup; launch; await]
// loops, and opaque calls. Useful as a fuzzing front end for the verifier,
// the simulator, and the rewrite passes.
Program random_program(std::uint64_t seed, const AccelRegistry &reg,
                       const GenOptions &opts = {});

} // namespace acckit
