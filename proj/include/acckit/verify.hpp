#pragma once

#include <string>
#include <vector>

#include "acckit/ir.hpp"

namespace acckit {

// One rule violation. `rule` is a stable identifier, e.g. "dominance",
// "live-state", "token-once", "arith-invalid", "yield-match".
struct Diagnostic {
  std::string rule;
  std::string message;
  int line = 0, col = 0;

  std::string str() const;
};

// Checks a program against the IR rules:
//  - SSA: single definition, every use dominated by its definition
//  - per-op typing (operand/result kinds, integer widths 1..64, declared
//    accelerator names, step > 0, yield arity/types against region results)
//  - single live state: a state value may only be used while it is the newest
//    state of its accelerator; a loop body that reconfigures an accelerator
//    may not consume states defined outside the loop (thread them through
//    `iter` instead)
//  - tokens are affine: awaited at most once, usable only by await
// Returns all violations in walk order; empty means the program is valid.
std::vector<Diagnostic> verify(const Program &p);

inline bool verify_ok(const Program &p) { return verify(p).empty(); }

} // namespace acckit
