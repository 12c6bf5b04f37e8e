#include "doctest.h"

#include "acckit/sim.hpp"
#include "acckit/text.hpp"
#include "support/helpers.hpp"

using namespace acckit;

namespace {

SimResult run(const std::string &text) {
  return simulate(testkit::parsed(text), testkit::toy_registry());
}

} // namespace

// Costs of the "seq" fixture: peak 512, write_cost 3, write_group 1,
// arith_cost 3, launch_cost 1. Every count below is traced by hand.
TEST_CASE("sequential launch blocks the host") {
  SimResult r = run(R"(
accel "seq"
func @main() {
  %a = const 7 : i64
  %b = const 9 : i64
  %s = setup "seq" (f0 = %a, f1 = %b, f2 = %a, f3 = %b) : state<"seq">
  %t = launch %s ops = 2048 : token<"seq">
  await %t
})");
  CHECK(r.setup_cycles == 12);        // 4 writes * 3
  CHECK(r.launch_issue_cycles == 1);
  CHECK(r.host_idle_cycles == 4);     // 2048 ops / 512 per cycle
  CHECK(r.calc_cycles == 0);
  CHECK(r.other_host_cycles == 0);
  CHECK(r.total_cycles == 17);
  CHECK(r.accel_busy_cycles == 4);
  CHECK(r.config_bytes_written == 32);
  CHECK(r.total_ops == 2048);
  CHECK(r.host_cycles() == r.total_cycles);
  REQUIRE(r.trace.size() == 1);
  CHECK(r.trace[0].snapshot.at("f0") == 7);
  CHECK(r.trace[0].snapshot.at("f1") == 9);
  CHECK(r.trace[0].snapshot.at("f2") == 7);
  CHECK(r.trace[0].snapshot.at("f3") == 9);
}

// Costs of the "conc" fixture: peak 256, write_cost 2, write_group 1.
TEST_CASE("concurrent staging overlaps the running job") {
  SimResult r = run(R"(
accel "conc"
func @main() {
  %0 = const 7 : i64
  %1 = const 9 : i64
  %2 = setup "conc" (f0 = %0, f1 = %1) : state<"conc">
  %3 = launch %2 ops = 1024 : token<"conc">
  %4 = const 11 : i64
  %5 = setup "conc" (f0 = %4) from %2 : state<"conc">
  %6 = launch %5 ops = 512 : token<"conc">
  await %3
  await %6
})");
  // setup1 [0,4); issue1 [4,5); job1 [5,9); setup2 [5,7) overlapped;
  // launch2 waits [7,9), issues [9,10); job2 [10,12); await2 idles [10,12).
  CHECK(r.setup_cycles == 6);
  CHECK(r.launch_issue_cycles == 2);
  CHECK(r.host_idle_cycles == 4);
  CHECK(r.other_host_cycles == 0);
  CHECK(r.total_cycles == 12);
  CHECK(r.accel_busy_cycles == 6);
  CHECK(r.config_bytes_written == 24);  // 16 committed + 8 committed
  CHECK(r.total_ops == 1536);
  CHECK(r.host_cycles() == r.total_cycles);
  REQUIRE(r.trace.size() == 2);
  CHECK(r.trace[0].snapshot.at("f0") == 7);
  CHECK(r.trace[1].snapshot.at("f0") == 11);
  CHECK(r.trace[1].snapshot.at("f1") == 9);  // staged overlay keeps f1
}

TEST_CASE("write groups batch field writes") {
  AccelRegistry reg;
  AcceleratorDescriptor d = testkit::seq_accel("g");
  d.cost.write_cost = 9;
  d.cost.write_group = 2;
  reg.add(d);
  Program p = testkit::parsed(R"(
accel "g"
func @main() {
  %a = const 1 : i64
  %s = setup "g" (f0 = %a, f1 = %a, f2 = %a) : state<"g">
})");
  SimResult r = simulate(p, reg);
  CHECK(r.setup_cycles == 18);  // ceil(3/2) groups * 9
  CHECK(r.config_bytes_written == 24);
}

TEST_CASE("arithmetic bills as calc only when it feeds a register") {
  SimResult r = run(R"(
accel "seq"
func @main() {
  %a = const 7 : i64
  %b = add %a, %a : i64
  %c = add %b, %b : i64
  %s = setup "seq" (f0 = %b) : state<"seq">
  extern-call "log" (%c) effects = none
})");
  CHECK(r.calc_cycles == 3);        // the add feeding f0
  CHECK(r.other_host_cycles == 6);  // the other add + the call
  CHECK(r.setup_cycles == 3);
  CHECK(r.total_cycles == 12);
}

TEST_CASE("calc attribution follows loop-carried plumbing") {
  SimResult r = run(R"(
accel "seq"
func @main() {
  %z = const 0 : i64
  %sum = for %i = 0 to 3 step 1 iter (%v = %z : i64) {
    %n = add %v, %i : i64
    yield %n
  } : i64
  %s = setup "seq" (f0 = %sum) : state<"seq">
})");
  CHECK(r.calc_cycles == 9);  // three adds, all reaching f0
  CHECK(r.other_host_cycles == 0);
  REQUIRE(r.trace.empty());
  CHECK(r.config_bytes_written == 8);
}

TEST_CASE("effects=all zeroes registers and discards staged writes") {
  SimResult r = run(R"(
accel "conc"
func @main() {
  %a = const 7 : i64
  %s = setup "conc" (f0 = %a, f1 = %a) : state<"conc">
  extern-call "boom" () effects = all
  %s2 = setup "conc" (f1 = %a) : state<"conc">
  %t = launch %s2 ops = 256 : token<"conc">
  await %t
})");
  REQUIRE(r.trace.size() == 1);
  CHECK(r.trace[0].snapshot.at("f0") == 0);  // staged f0 never committed
  CHECK(r.trace[0].snapshot.at("f1") == 7);
  CHECK(r.config_bytes_written == 8);        // only the recommitted field
}

TEST_CASE("integer semantics wrap at the declared width") {
  SimResult r = run(R"(
accel "seq"
func @main() {
  %a = const 200 : i8
  %b = const 100 : i8
  %c = add %a, %b : i8
  %w = const 1 : i64
  %sh = const 64 : i64
  %z = shl %w, %sh : i64
  %s = setup "seq" (f0 = %c, f1 = %z) : state<"seq">
  %t = launch %s ops = 1 : token<"seq">
  await %t
})");
  REQUIRE(r.trace.size() == 1);
  CHECK(r.trace[0].snapshot.at("f0") == 44);  // 300 mod 256
  CHECK(r.trace[0].snapshot.at("f1") == 0);   // shift amount == width
}

TEST_CASE("branches execute exactly one side") {
  SimResult r = run(R"(
accel "seq"
func @main() {
  %c = const 0 : i1
  %a = const 5 : i64
  %b = const 6 : i64
  %m = if %c {
    yield %a
  } else {
    yield %b
  } : i64
  %s = setup "seq" (f0 = %m) : state<"seq">
  %t = launch %s ops = 1 : token<"seq">
  await %t
})");
  REQUIRE(r.trace.size() == 1);
  CHECK(r.trace[0].snapshot.at("f0") == 6);
}

TEST_CASE("opaque call results are deterministic") {
  const char *text = R"(
accel "seq"
func @main() {
  %r = extern-call "probe" () effects = none : i64
  %s = setup "seq" (f0 = %r) : state<"seq">
  %t = launch %s ops = 1 : token<"seq">
  await %t
})";
  SimResult a = run(text), b = run(text);
  CHECK(a.trace[0].snapshot == b.trace[0].snapshot);
  CHECK(trace_equivalent(a, b));
}

TEST_CASE("trace equivalence compares snapshots and workloads") {
  SimResult a = run(R"(
accel "seq"
func @main() {
  %v = const 1 : i64
  %s = setup "seq" (f0 = %v) : state<"seq">
  %t = launch %s ops = 64 : token<"seq">
  await %t
})");
  SimResult b = run(R"(
accel "seq"
func @main() {
  %v = const 1 : i64
  %s = setup "seq" (f0 = %v) : state<"seq">
  %t = launch %s ops = 65 : token<"seq">
  await %t
})");
  CHECK(!trace_equivalent(a, b));
  CHECK(trace_equivalent(a, a));
}

TEST_CASE("an empty entry point runs in zero cycles") {
  SimResult r = run("func @main() { }");
  CHECK(r.total_cycles == 0);
  CHECK(r.host_cycles() == 0);
  CHECK(r.config_bytes_written == 0);
  CHECK(r.trace.empty());
  CHECK(result_text(r) ==
        "total_cycles=0\n"
        "setup_cycles=0\n"
        "calc_cycles=0\n"
        "other_host_cycles=0\n"
        "host_idle_cycles=0\n"
        "launch_issue_cycles=0\n"
        "accel_busy_cycles=0\n"
        "config_bytes_written=0\n"
        "total_ops=0\n"
        "launches=0\n");
  CHECK(emit_timeline_csv(r) == "start_cycle,end_cycle,lane\n");
}

TEST_CASE("timeline rows are schema-stable and sorted") {
  SimResult r = run(R"(
accel "conc"
func @main() {
  %a = const 3 : i64
  %s = setup "conc" (f0 = %a) : state<"conc">
  %t = launch %s ops = 512 : token<"conc">
  await %t
})");
  std::string csv = emit_timeline_csv(r);
  CHECK(csv.rfind("start_cycle,end_cycle,lane\n", 0) == 0);
  CHECK(csv.find("accel-busy") != std::string::npos);
  CHECK(csv.find("host-setup") != std::string::npos);
  std::uint64_t covered = 0;
  for (const auto &seg : r.timeline) {
    REQUIRE(seg.end > seg.start);
    covered += seg.end - seg.start;
  }
  CHECK(covered == r.host_cycles() + r.accel_busy_cycles);
}

TEST_CASE("simulation guards") {
  AccelRegistry reg = testkit::toy_registry();
  // no functions at all
  CHECK_THROWS_AS(simulate(parse_program("accel \"seq\""), reg), SimError);
  // declared accelerator without a descriptor
  Program p = parse_program("accel \"ghost\"\nfunc @main() { }");
  CHECK_THROWS_AS(simulate(p, reg), SimError);
  // register name the descriptor does not define
  CHECK_THROWS_AS(run(R"(
accel "seq"
func @main() {
  %v = const 1 : i64
  %s = setup "seq" (zz = %v) : state<"seq">
})"),
                  SimError);
  // loop trip guard
  CHECK_THROWS_AS(run(R"(
func @main() {
  for %i = 0 to 16777217 step 1 {
    yield
  }
})"),
                  SimError);
  // workload guard on an operand-fed launch
  CHECK_THROWS_AS(run(R"(
accel "seq"
func @main() {
  %one = const 1 : i64
  %big = const 50 : i64
  %ops = shl %one, %big : i64
  %s = setup "seq" (f0 = %one) : state<"seq">
  %t = launch %s ops = %ops : token<"seq">
  await %t
})"),
                  SimError);
}

TEST_CASE("await after the job finished costs only the poll") {
  AccelRegistry reg;
  AcceleratorDescriptor d = testkit::conc_accel("c2");
  d.cost.await_poll_cost = 5;
  reg.add(d);
  Program p = testkit::parsed(R"(
accel "c2"
func @main() {
  %a = const 1 : i64
  %s = setup "c2" (f0 = %a) : state<"c2">
  %t = launch %s ops = 256 : token<"c2">
  host-work cycles = 10
  await %t
})");
  SimResult r = simulate(p, reg);
  // job takes 1 cycle, host-work 10 outlives it; await polls for 5
  CHECK(r.host_idle_cycles == 0);
  CHECK(r.other_host_cycles == 15);
}
