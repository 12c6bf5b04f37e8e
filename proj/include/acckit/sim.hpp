#pragma once

#include <cstdint>
#include <map>
#include <stdexcept>
#include <string>
#include <vector>

#include "acckit/accel.hpp"
#include "acckit/ir.hpp"

// Deterministic cycle-level timeline of one host thread driving its
// accelerators. Integer semantics are two's-complement wrap-around at the
// declared width; shift amounts >= width produce 0. extern-call results are a
// pure hash of (callee, operands), and a call without effects=none zeroes
// every accelerator's registers and discards staged writes.
//
// Host cycle costs: const/for/if/yield are free, arith and extern-call cost
// arith_cost, setup writes cost write_cost per write_group of fields, launch
// costs launch_cost (plus its own field writes at setup rates), await costs
// nothing on sequential accelerators and await_poll_cost on concurrent ones
// when the job already finished. Host costs (arith_cost and friends) come
// from the program's first declared accelerator; defaults apply when no
// accelerator is declared.

namespace acckit {

struct SimError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct LaunchEvent {
  std::string accel;
  std::map<std::string, std::uint64_t> snapshot;  // every declared field
  std::uint64_t ops = 0;
  std::uint64_t launch_cycle = 0;  // not part of trace equivalence
};

enum class Lane : std::uint8_t {
  HostSetup,
  HostCalc,
  HostOther,
  HostIdle,
  AccelBusy,
};

struct TimelineSeg {
  std::uint64_t start = 0, end = 0;
  Lane lane{};
};

struct SimResult {
  std::uint64_t total_cycles = 0;
  std::uint64_t setup_cycles = 0;        // field writes, incl. launch fields
  std::uint64_t calc_cycles = 0;         // pure ops feeding field operands
  std::uint64_t other_host_cycles = 0;   // remaining host work
  std::uint64_t host_idle_cycles = 0;    // blocked on the accelerator
  std::uint64_t launch_issue_cycles = 0;
  std::uint64_t accel_busy_cycles = 0;
  std::uint64_t config_bytes_written = 0;  // committed configuration bytes
  std::uint64_t total_ops = 0;
  std::vector<LaunchEvent> trace;
  std::vector<TimelineSeg> timeline;

  std::uint64_t host_cycles() const {
    return setup_cycles + calc_cycles + other_host_cycles +
           host_idle_cycles + launch_issue_cycles;
  }
};

// Runs @main (or the first function). Throws SimError for unknown
// accelerators/registers, trips above 2^24 per loop, or missing descriptors.
SimResult simulate(const Program &p, const AccelRegistry &reg);

// Same launches in the same order with identical register snapshots and ops
// counts; cycle stamps are ignored.
bool trace_equivalent(const SimResult &a, const SimResult &b);

// CSV "start_cycle,end_cycle,lane" with host lanes, accel-busy, and the
// accel-idle complement. Header only for an empty run.
std::string emit_timeline_csv(const SimResult &r);

// Stable key=value lines / JSON object of the counters above.
std::string result_text(const SimResult &r);
std::string result_json(const SimResult &r);

} // namespace acckit
