#pragma once

#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "acckit/accel.hpp"
#include "acckit/ir.hpp"

// Rewrite passes. All of them preserve the launch trace: the sequence of
// (accelerator, register snapshot, ops) observed by the simulator is
// identical before and after, and a program that verifies keeps verifying.
//
//   canon       constant uniquing, CSE and loop-invariant motion of pure
//               arithmetic, folding of zero- and one-trip loops, dead
//               const/arith removal
//   trace       links every setup to the previous configuration state where
//               one is statically known: chains in straight lines, threads
//               states through loops as iteration-carried values, joins
//               branch states at if results; gives up after opaque calls
//   hoist-if    clones a setup consuming an if-joined state into both
//               branch tails so each side can deduplicate on its own
//   hoist-loop  moves per-field loop-invariant configuration out of loop
//               bodies into a setup before the loop
//   dedup       deletes register writes whose field provably already holds
//               the identical SSA value (must-analysis over the state
//               chain; branch maps intersect, loop maps reach a fixpoint)
//   cleanup     drops empty setups, merges launch-free setup chains, and
//               removes dead pure ops
//   pipeline    rewrites [setup; launch; await] loops on concurrent
//               accelerators to stage iteration i+1 while job i runs
//   overlap     moves a setup sequence (with its pure producers) in front
//               of the await of the state it supersedes

namespace acckit {

struct PassError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// A pass selection. Order is respected; trace must come before dedup, and
// dedup before pipeline/overlap, when both are present.
struct PassPipeline {
  std::vector<std::string> passes;
  bool enable_overlap = true;

  // canon, trace, hoist-if, hoist-loop, dedup, cleanup
  // [, pipeline, overlap, cleanup if enable_overlap]
  static PassPipeline all(bool enable_overlap = true);
  // the deduplication stage only (no overlap): canon .. cleanup
  static PassPipeline dedup_stage();
};

struct PassLogEntry {
  std::string pass;
  std::size_t field_writes_before = 0;   // static count of written fields
  std::size_t field_writes_after = 0;
  std::uint64_t static_bytes_before = 0; // field widths per the descriptors
  std::uint64_t static_bytes_after = 0;
  bool changed = false;
};
using PassLog = std::vector<PassLogEntry>;

void canonicalize(Program &p);
void trace_states(Program &p);
void hoist_into_branches(Program &p);
void hoist_loop_invariant_setup(Program &p);
void deduplicate_setup(Program &p);
void cleanup_setups(Program &p);
void pipeline_loops(Program &p, const AccelRegistry &reg);
void overlap_block(Program &p, const AccelRegistry &reg);

// True iff every op is const, arith, host-work, a setup, or an extern-call
// annotated effects=none: the ops a rewrite may duplicate or move.
bool is_pure_sequence(std::span<const Operation> ops);

// Applies the pipeline in order, verifying after every pass. Throws
// PassError for unknown pass names, ordering violations, or a pass that
// produced invalid IR (the latter is a bug surfaced loudly, not an input
// error). The registry supplies schemes for pipeline/overlap and field
// widths for the log's byte columns.
PassLog run_pipeline(Program &p, const PassPipeline &pipeline,
                     const AccelRegistry &reg);

} // namespace acckit
