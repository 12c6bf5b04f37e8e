#include <algorithm>

#include "doctest.h"

#include "acckit/passes.hpp"
#include "acckit/sim.hpp"
#include "acckit/text.hpp"
#include "support/helpers.hpp"

using namespace acckit;

namespace {

std::size_t count_kind(const Program &p, OpKind k) {
  std::size_t n = 0;
  for (const auto &f : p.functions)
    walk_ops(f.body, [&](const Operation &op) { n += op.kind == k; });
  return n;
}

std::size_t count_field_writes(const Program &p) {
  std::size_t n = 0;
  for (const auto &f : p.functions)
    walk_ops(f.body, [&](const Operation &op) { n += op.fields.size(); });
  return n;
}

// Applies `fn` and checks the rewrite kept the program valid and its launch
// trace intact.
template <typename Fn>
Program checked(const std::string &text, Fn &&fn) {
  AccelRegistry reg = testkit::toy_registry();
  Program p = testkit::parsed(text);
  SimResult before = simulate(p, reg);
  fn(p);
  auto diags = verify(p);
  std::string first = diags.empty() ? std::string() : diags[0].str();
  REQUIRE_MESSAGE(diags.empty(), first);
  SimResult after = simulate(p, reg);
  REQUIRE(trace_equivalent(before, after));
  return p;
}

} // namespace

TEST_CASE("canon uniques constants and common subexpressions") {
  Program p = checked(R"(
accel "seq"
func @main() {
  %a = const 5 : i64
  %b = const 5 : i64
  %x = add %a, %b : i64
  %y = add %b, %a : i64
  %z = add %a, %b : i64
  %s = setup "seq" (f0 = %x, f1 = %z, f2 = %y) : state<"seq">
  %t = launch %s ops = 16 : token<"seq">
  await %t
})",
                      canonicalize);
  CHECK(count_kind(p, OpKind::Const) == 1);
  // %x and %z collapse; %y has swapped operands and may stay distinct
  CHECK(count_kind(p, OpKind::Arith) <= 2);
}

TEST_CASE("canon drops zero-trip loops") {
  Program p = checked(R"(
accel "seq"
func @main() {
  %a = const 3 : i64
  %r = for %i = 0 to 0 step 1 iter (%v = %a : i64) {
    %w = add %v, %v : i64
    yield %w
  } : i64
  %s = setup "seq" (f0 = %r) : state<"seq">
  %t = launch %s ops = 16 : token<"seq">
  await %t
})",
                      canonicalize);
  CHECK(count_kind(p, OpKind::For) == 0);
  CHECK(count_kind(p, OpKind::Arith) == 0);  // body was dead
}

TEST_CASE("canon inlines one-trip loops") {
  Program p = checked(R"(
accel "seq"
func @main() {
  %a = const 3 : i64
  %r = for %i = 5 to 6 step 1 iter (%v = %a : i64) {
    %w = add %v, %i : i64
    yield %w
  } : i64
  %s = setup "seq" (f0 = %r) : state<"seq">
  %t = launch %s ops = 16 : token<"seq">
  await %t
})",
                      canonicalize);
  CHECK(count_kind(p, OpKind::For) == 0);
  CHECK(count_kind(p, OpKind::Arith) == 1);
}

TEST_CASE("canon hoists loop-invariant arithmetic") {
  Program p = checked(R"(
accel "seq"
func @main() {
  %a = const 3 : i64
  %b = const 7 : i64
  for %i = 0 to 4 step 1 {
    %inv = mul %a, %b : i64
    %s = setup "seq" (f0 = %inv, f1 = %i) : state<"seq">
    %t = launch %s ops = 16 : token<"seq">
    await %t
    yield
  }
})",
                      canonicalize);
  REQUIRE(count_kind(p, OpKind::For) == 1);
  const Block &body = p.functions[0].body;
  auto it = std::find_if(body.ops.begin(), body.ops.end(),
                         [](const Operation &op) {
                           return op.kind == OpKind::For;
                         });
  bool arith_in_loop = false;
  walk_ops(it->regions[0],
           [&](const Operation &op) { arith_in_loop |= op.kind == OpKind::Arith; });
  CHECK(!arith_in_loop);
}

TEST_CASE("trace links straight-line setups") {
  Program p = checked(R"(
accel "conc"
func @main() {
  %a = const 1 : i64
  %b = const 2 : i64
  %s1 = setup "conc" (f0 = %a) : state<"conc">
  %t1 = launch %s1 ops = 64 : token<"conc">
  await %t1
  %s2 = setup "conc" (f0 = %b) : state<"conc">
  %t2 = launch %s2 ops = 64 : token<"conc">
  await %t2
})",
                      trace_states);
  int linked = 0;
  walk_ops(p.functions[0].body, [&](const Operation &op) {
    if (op.kind == OpKind::Setup && op.from_state)
      ++linked;
  });
  CHECK(linked == 1);  // the second setup now chains on the first
}

TEST_CASE("trace threads states through loops") {
  Program p = checked(R"(
accel "conc"
func @main() {
  %a = const 1 : i64
  %s0 = setup "conc" (f0 = %a) : state<"conc">
  %t0 = launch %s0 ops = 64 : token<"conc">
  await %t0
  for %i = 0 to 4 step 1 {
    %s = setup "conc" (f0 = %i) : state<"conc">
    %t = launch %s ops = 64 : token<"conc">
    await %t
    yield
  }
})",
                      trace_states);
  const Operation *loop = nullptr;
  for (const auto &op : p.functions[0].body.ops)
    if (op.kind == OpKind::For)
      loop = &op;
  REQUIRE(loop != nullptr);
  bool carries_state = false;
  for (ValueId v : loop->operands)
    carries_state |= p.functions[0].type_of(v).is_state();
  CHECK(carries_state);
}

TEST_CASE("trace gives up across opaque calls") {
  Program p = checked(R"(
accel "conc"
func @main() {
  %a = const 1 : i64
  %s1 = setup "conc" (f0 = %a) : state<"conc">
  %t1 = launch %s1 ops = 64 : token<"conc">
  await %t1
  extern-call "boom" () effects = all
  %s2 = setup "conc" (f0 = %a) : state<"conc">
  %t2 = launch %s2 ops = 64 : token<"conc">
  await %t2
})",
                      trace_states);
  const Block &b = p.functions[0].body;
  int unlinked = 0;
  for (const auto &op : b.ops)
    if (op.kind == OpKind::Setup && !op.from_state)
      ++unlinked;
  CHECK(unlinked == 2);  // neither setup may claim a known predecessor
}

TEST_CASE("branch tails absorb the setup that consumed the join") {
  Program p = checked(R"(
accel "conc"
func @main() {
  %c = const 1 : i1
  %a = const 3 : i64
  %b = const 4 : i64
  %s0 = setup "conc" (f0 = %a) : state<"conc">
  %sj = if %c {
    %s1 = setup "conc" (f1 = %a) from %s0 : state<"conc">
    yield %s1
  } else {
    %s2 = setup "conc" (f1 = %b) from %s0 : state<"conc">
    yield %s2
  } : state<"conc">
  %s3 = setup "conc" (f2 = %a) from %sj : state<"conc">
  %t = launch %s3 ops = 64 : token<"conc">
  await %t
})",
                      hoist_into_branches);
  const Block &b = p.functions[0].body;
  bool top_level_consumer = false;
  for (const auto &op : b.ops)
    if (op.kind == OpKind::Setup && op.from_state)
      top_level_consumer = true;
  CHECK(!top_level_consumer);
  const Operation *ifop = nullptr;
  for (const auto &op : b.ops)
    if (op.kind == OpKind::If)
      ifop = &op;
  REQUIRE(ifop != nullptr);
  for (const auto &r : ifop->regions) {
    std::size_t setups = 0;
    for (const auto &op : r.ops)
      setups += op.kind == OpKind::Setup;
    CHECK(setups == 2);
  }
}

TEST_CASE("loop-invariant fields move out of the loop") {
  Program p = checked(R"(
accel "conc"
func @main() {
  %a = const 5 : i64
  %z = const 0 : i64
  %init = setup "conc" (f0 = %z) : state<"conc">
  %sf = for %i = 0 to 4 step 1 iter (%st = %init : state<"conc">) {
    %s = setup "conc" (f1 = %a, f2 = %i) from %st : state<"conc">
    %t = launch %s ops = 64 : token<"conc">
    await %t
    yield %s
  } : state<"conc">
})",
                      hoist_loop_invariant_setup);
  const Block &b = p.functions[0].body;
  const Operation *loop = nullptr;
  for (const auto &op : b.ops)
    if (op.kind == OpKind::For)
      loop = &op;
  REQUIRE(loop != nullptr);
  for (const auto &op : loop->regions[0].ops)
    if (op.kind == OpKind::Setup)
      CHECK(op.fields == std::vector<std::string>{"f2"});
  // the invariant write landed in a setup before the loop
  std::size_t pre_writes = 0;
  for (const auto &op : b.ops)
    if (op.kind == OpKind::Setup)
      pre_writes += op.fields.size();
  CHECK(pre_writes == 2);  // f0 init + hoisted f1
}

TEST_CASE("dedup removes writes the register already holds") {
  Program p = checked(R"(
accel "conc"
func @main() {
  %a = const 1 : i64
  %b = const 2 : i64
  %c = const 3 : i64
  %s1 = setup "conc" (f0 = %a, f1 = %b) : state<"conc">
  %t1 = launch %s1 ops = 64 : token<"conc">
  await %t1
  %s2 = setup "conc" (f0 = %a, f1 = %c) from %s1 : state<"conc">
  %t2 = launch %s2 ops = 64 : token<"conc">
  await %t2
})",
                      deduplicate_setup);
  bool saw_second = false;
  walk_ops(p.functions[0].body, [&](const Operation &op) {
    if (op.kind == OpKind::Setup && op.from_state) {
      saw_second = true;
      CHECK(op.fields == std::vector<std::string>{"f1"});
    }
  });
  CHECK(saw_second);
}

TEST_CASE("dedup respects diverging branch facts") {
  Program p = checked(R"(
accel "conc"
func @main() {
  %c = const 1 : i1
  %a = const 3 : i64
  %b = const 4 : i64
  %s0 = setup "conc" (f0 = %a) : state<"conc">
  %sj = if %c {
    %s1 = setup "conc" (f0 = %b) from %s0 : state<"conc">
    yield %s1
  } else {
    yield %s0
  } : state<"conc">
  %s2 = setup "conc" (f0 = %a) from %sj : state<"conc">
  %t = launch %s2 ops = 64 : token<"conc">
  await %t
})",
                      deduplicate_setup);
  const Block &b = p.functions[0].body;
  const Operation &last_setup = *std::find_if(
      b.ops.rbegin(), b.ops.rend(), [](const Operation &op) {
        return op.kind == OpKind::Setup;
      });
  // one arm overwrote f0, so the rejoin write must survive
  CHECK(last_setup.fields == std::vector<std::string>{"f0"});
}

TEST_CASE("dedup reaches a fixpoint across loop back edges") {
  Program p = checked(R"(
accel "conc"
func @main() {
  %a = const 1 : i64
  %s0 = setup "conc" (f0 = %a) : state<"conc">
  %sf = for %i = 0 to 4 step 1 iter (%st = %s0 : state<"conc">) {
    %s = setup "conc" (f0 = %a, f1 = %i) from %st : state<"conc">
    %t = launch %s ops = 64 : token<"conc">
    await %t
    yield %s
  } : state<"conc">
})",
                      deduplicate_setup);
  const Operation *loop = nullptr;
  for (const auto &op : p.functions[0].body.ops)
    if (op.kind == OpKind::For)
      loop = &op;
  REQUIRE(loop != nullptr);
  for (const auto &op : loop->regions[0].ops)
    if (op.kind == OpKind::Setup)
      CHECK(op.fields == std::vector<std::string>{"f1"});
}

TEST_CASE("dedup is idempotent") {
  AccelRegistry reg = testkit::toy_registry();
  Program p = testkit::parsed(R"(
accel "conc"
func @main() {
  %a = const 1 : i64
  %s1 = setup "conc" (f0 = %a, f1 = %a) : state<"conc">
  %t1 = launch %s1 ops = 64 : token<"conc">
  await %t1
  %s2 = setup "conc" (f0 = %a, f1 = %a) from %s1 : state<"conc">
  %t2 = launch %s2 ops = 64 : token<"conc">
  await %t2
})");
  deduplicate_setup(p);
  std::string once = print_program(p);
  deduplicate_setup(p);
  CHECK(print_program(p) == once);
}

TEST_CASE("cleanup merges launch-free setup chains") {
  Program p = checked(R"(
accel "conc"
func @main() {
  %a = const 1 : i64
  %b = const 2 : i64
  %s1 = setup "conc" (f0 = %a) : state<"conc">
  %s2 = setup "conc" (f1 = %b) from %s1 : state<"conc">
  %t = launch %s2 ops = 64 : token<"conc">
  await %t
})",
                      cleanup_setups);
  CHECK(count_kind(p, OpKind::Setup) == 1);
  CHECK(count_field_writes(p) == 2);
}

TEST_CASE("cleanup drops empty setups and dead scalars") {
  Program p = checked(R"(
accel "conc"
func @main() {
  %a = const 1 : i64
  %dead = const 99 : i64
  %deader = add %dead, %dead : i64
  %s1 = setup "conc" (f0 = %a) : state<"conc">
  %s2 = setup "conc" () from %s1 : state<"conc">
  %t = launch %s2 ops = 64 : token<"conc">
  await %t
})",
                      cleanup_setups);
  CHECK(count_kind(p, OpKind::Setup) == 1);
  CHECK(count_kind(p, OpKind::Arith) == 0);
  CHECK(count_kind(p, OpKind::Const) == 1);
}

TEST_CASE("kernel loops rotate to stage the next launch early") {
  AccelRegistry reg = testkit::toy_registry();
  Program p = testkit::parsed(R"(
accel "conc"
func @main() {
  %z = const 0 : i64
  %init = setup "conc" (f0 = %z) : state<"conc">
  %sf = for %i = 0 to 8 step 1 iter (%st = %init : state<"conc">) {
    %v = mul %i, %i : i64
    %s = setup "conc" (f0 = %v) from %st : state<"conc">
    %t = launch %s ops = 2048 : token<"conc">
    await %t
    yield %s
  } : state<"conc">
})");
  SimResult before = simulate(p, reg);
  pipeline_loops(p, reg);
  REQUIRE(verify_ok(p));
  SimResult after = simulate(p, reg);
  CHECK(trace_equivalent(before, after));
  CHECK(after.total_cycles < before.total_cycles);

  const Operation *loop = nullptr;
  for (const auto &op : p.functions[0].body.ops)
    if (op.kind == OpKind::For)
      loop = &op;
  REQUIRE(loop != nullptr);
  CHECK(loop->regions[0].ops.front().kind == OpKind::Launch);
}

TEST_CASE("setups slide ahead of the await they follow") {
  AccelRegistry reg = testkit::toy_registry();
  Program p = testkit::parsed(R"(
accel "conc"
func @main() {
  %a = const 1 : i64
  %b = const 2 : i64
  %s1 = setup "conc" (f0 = %a) : state<"conc">
  %t1 = launch %s1 ops = 1024 : token<"conc">
  await %t1
  %s2 = setup "conc" (f0 = %b) from %s1 : state<"conc">
  %t2 = launch %s2 ops = 512 : token<"conc">
  await %t2
})");
  SimResult before = simulate(p, reg);
  CHECK(before.total_cycles == 12);
  overlap_block(p, reg);
  REQUIRE(verify_ok(p));
  SimResult after = simulate(p, reg);
  CHECK(trace_equivalent(before, after));
  CHECK(after.total_cycles == 10);  // staging hides in the idle window
  // the moved setup now precedes its await
  const Block &b = p.functions[0].body;
  std::size_t setup2 = 0, await1 = 0;
  for (std::size_t i = 0; i < b.ops.size(); ++i) {
    if (b.ops[i].kind == OpKind::Setup && b.ops[i].from_state)
      setup2 = i;
    if (b.ops[i].kind == OpKind::Await && await1 == 0)
      await1 = i;
  }
  CHECK(setup2 < await1);
}

TEST_CASE("rotation and overlap are the identity on sequential parts") {
  AccelRegistry reg = testkit::toy_registry();
  Program p = testkit::parsed(R"(
accel "seq"
func @main() {
  %z = const 0 : i64
  %init = setup "seq" (f0 = %z) : state<"seq">
  %sf = for %i = 0 to 8 step 1 iter (%st = %init : state<"seq">) {
    %v = mul %i, %i : i64
    %s = setup "seq" (f0 = %v) from %st : state<"seq">
    %t = launch %s ops = 2048 : token<"seq">
    await %t
    yield %s
  } : state<"seq">
})");
  std::string pre = print_program(p);
  pipeline_loops(p, reg);
  overlap_block(p, reg);
  CHECK(print_program(p) == pre);
}

TEST_CASE("pipeline driver rejects bad configurations") {
  AccelRegistry reg = testkit::toy_registry();
  Program p = testkit::parsed("func @main() { }");
  PassPipeline unknown;
  unknown.passes = {"bogus"};
  CHECK_THROWS_AS(run_pipeline(p, unknown, reg), PassError);
  PassPipeline disordered;
  disordered.passes = {"dedup", "trace"};
  CHECK_THROWS_AS(run_pipeline(p, disordered, reg), PassError);
}

TEST_CASE("pipeline log tracks static write shrinkage") {
  AccelRegistry reg = testkit::toy_registry();
  Program p = testkit::parsed(R"(
accel "conc"
func @main() {
  %a = const 1 : i64
  %b = const 2 : i64
  %s1 = setup "conc" (f0 = %a, f1 = %b) : state<"conc">
  %t1 = launch %s1 ops = 64 : token<"conc">
  await %t1
  %s2 = setup "conc" (f0 = %a, f1 = %b) : state<"conc">
  %t2 = launch %s2 ops = 64 : token<"conc">
  await %t2
})");
  PassLog log = run_pipeline(p, PassPipeline::all(), reg);
  REQUIRE(!log.empty());
  CHECK(log.front().pass == "canon");
  for (std::size_t i = 1; i < log.size(); ++i)
    CHECK(log[i].field_writes_before == log[i - 1].field_writes_after);
  CHECK(log.back().field_writes_after < log.front().field_writes_before);
  CHECK(log.back().static_bytes_after < log.front().static_bytes_before);
  // an entry that changed nothing must say so
  Program q = p;
  PassLog again = run_pipeline(q, PassPipeline::dedup_stage(), reg);
  for (const auto &e : again)
    CHECK(!e.changed);
}

TEST_CASE("pure sequences are exactly the movable ops") {
  Program p = testkit::parsed(R"(
accel "conc"
func @main() {
  %a = const 1 : i64
  %b = add %a, %a : i64
  %s = setup "conc" (f0 = %b) : state<"conc">
  %r = extern-call "peek" () effects = none : i64
  host-work cycles = 2
  %t = launch %s ops = 4 : token<"conc">
  await %t
})");
  const auto &ops = p.functions[0].body.ops;
  CHECK(is_pure_sequence({ops.data(), 5}));       // through host-work
  CHECK(!is_pure_sequence({ops.data(), 6}));      // launch breaks it
  CHECK(!is_pure_sequence({ops.data() + 6, 1}));  // await alone
}
