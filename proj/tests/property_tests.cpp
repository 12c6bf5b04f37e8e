#include "doctest.h"

#include "acckit/passes.hpp"
#include "acckit/sim.hpp"
#include "acckit/testgen.hpp"
#include "acckit/text.hpp"
#include "acckit/verify.hpp"
#include "support/helpers.hpp"

using namespace acckit;

// Randomized program properties. Failures print the seed; reproduce with
// random_program(seed, toy_registry()).

TEST_CASE("generated programs verify and round-trip") {
  AccelRegistry reg = testkit::toy_registry();
  for (std::uint64_t seed = 1; seed <= 250; ++seed) {
    CAPTURE(seed);
    Program p = random_program(seed, reg);
    auto diags = verify(p);
    std::string first = diags.empty() ? std::string() : diags[0].str();
    REQUIRE_MESSAGE(diags.empty(), first);
    Program q = parse_program(print_program(p));
    REQUIRE(structurally_equal(p, q));
  }
}

TEST_CASE("simulation accounting always closes") {
  AccelRegistry reg = testkit::toy_registry();
  for (std::uint64_t seed = 1; seed <= 250; ++seed) {
    CAPTURE(seed);
    Program p = random_program(seed, reg);
    SimResult r = simulate(p, reg);
    // the five host lanes partition host time
    REQUIRE(r.host_cycles() <= r.total_cycles);
    REQUIRE(r.total_cycles <= r.host_cycles() + r.accel_busy_cycles);
    std::uint64_t ops = 0;
    for (const auto &ev : r.trace)
      ops += ev.ops;
    REQUIRE(ops == r.total_ops);
  }
}

TEST_CASE("every rewrite preserves the launch trace") {
  AccelRegistry reg = testkit::toy_registry();
  const char *kSingles[] = {"canon",      "trace", "hoist-if", "hoist-loop",
                            "dedup",      "cleanup", "pipeline", "overlap"};
  for (std::uint64_t seed = 1; seed <= 150; ++seed) {
    CAPTURE(seed);
    Program p = random_program(seed, reg);
    SimResult base = simulate(p, reg);
    for (const char *name : kSingles) {
      CAPTURE(name);
      Program q = p;
      PassPipeline pp;
      pp.passes = {name};
      run_pipeline(q, pp, reg);  // verifies internally
      REQUIRE(trace_equivalent(base, simulate(q, reg)));
    }
    Program d = p;
    run_pipeline(d, PassPipeline::dedup_stage(), reg);
    REQUIRE(trace_equivalent(base, simulate(d, reg)));
    Program a = p;
    run_pipeline(a, PassPipeline::all(), reg);
    REQUIRE(trace_equivalent(base, simulate(a, reg)));
  }
}

TEST_CASE("the dedup stage never grows configuration traffic") {
  // branch absorption may clone a setup into both arms (static growth the
  // later dedup bets on), but only one arm runs: the written bytes a
  // simulation observes must never go up.
  AccelRegistry reg = testkit::toy_registry();
  for (std::uint64_t seed = 300; seed <= 380; ++seed) {
    CAPTURE(seed);
    Program p = random_program(seed, reg);
    std::uint64_t before = simulate(p, reg).config_bytes_written;
    run_pipeline(p, PassPipeline::dedup_stage(), reg);
    CHECK(simulate(p, reg).config_bytes_written <= before);
  }
}

TEST_CASE("generator options are honored") {
  AccelRegistry reg = testkit::toy_registry();
  GenOptions opts;
  opts.single_accel = true;
  opts.allow_clobbers = false;
  for (std::uint64_t seed = 400; seed <= 440; ++seed) {
    CAPTURE(seed);
    Program p = random_program(seed, reg, opts);
    CHECK(p.accels.size() == 1);
    bool clobbers = false;
    for (const auto &f : p.functions)
      walk_ops(f.body, [&](const Operation &op) {
        clobbers |= is_clobber(op);
      });
    CHECK(!clobbers);
    REQUIRE(verify_ok(p));
  }
}

TEST_CASE("generation is deterministic per seed") {
  AccelRegistry reg = testkit::toy_registry();
  for (std::uint64_t seed : {1ull, 17ull, 99ull}) {
    Program a = random_program(seed, reg);
    Program b = random_program(seed, reg);
    CHECK(structurally_equal(a, b));
    CHECK(print_program(a) == print_program(b));
  }
}
