#include "doctest.h"

#include "acckit/benchgen.hpp"
#include "acckit/sim.hpp"
#include "acckit/verify.hpp"
#include "support/helpers.hpp"

using namespace acckit;

namespace {

AccelRegistry shipped() {
  AccelRegistry reg;
  reg.add(load_descriptor("descriptors/gemmini.json"));
  reg.add(load_descriptor("descriptors/opengemm.json"));
  return reg;
}

} // namespace

TEST_CASE("square tiled matmul on the sequential descriptor") {
  AccelRegistry reg = shipped();
  MatmulSpec spec = load_matmul_spec("specs/gemmini_64.json");
  Program p = tiled_matmul(spec, reg.find(spec.accel));
  REQUIRE(verify_ok(p));
  SimResult r = simulate(p, reg);
  CHECK(r.total_ops == 2ull * 64 * 64 * 64);
  CHECK(r.trace.size() == 64);  // (64/16)^3 tiles
  // every launch rewrites all five mapped registers, 8 bytes each
  CHECK(r.config_bytes_written == 2560);
  double i_oc = static_cast<double>(r.total_ops) /
                static_cast<double>(r.config_bytes_written);
  CHECK(i_oc == doctest::Approx(204.8).epsilon(1e-12));
}

TEST_CASE("register values encode addresses and packed extents") {
  AccelRegistry reg = shipped();
  MatmulSpec spec = load_matmul_spec("specs/gemmini_64.json");
  Program p = tiled_matmul(spec, reg.find(spec.accel));
  SimResult r = simulate(p, reg);
  REQUIRE(r.trace.size() == 64);
  const auto &first = r.trace[0].snapshot;
  CHECK(first.at("addr_a") == 0);
  CHECK(first.at("addr_b") == 65536);
  CHECK(first.at("addr_c") == 131072);
  CHECK(first.at("addr_d") == 196608);
  CHECK(first.at("sizes") ==
        (16ull | (16ull << 16) | (16ull << 32)));
  // k advances innermost: a moves along its row, b down its column
  const auto &second = r.trace[1].snapshot;
  CHECK(second.at("addr_a") == 16);
  CHECK(second.at("addr_b") == 65536 + 16 * 64);
  CHECK(second.at("addr_c") == 131072);
  CHECK(r.trace[0].ops == 2ull * 16 * 16 * 16);
}

TEST_CASE("whole-axis tiles and the concurrent descriptor") {
  AccelRegistry reg = shipped();
  MatmulSpec spec = load_matmul_spec("specs/opengemm_128.json");
  Program p = tiled_matmul(spec, reg.find(spec.accel));
  REQUIRE(verify_ok(p));
  SimResult r = simulate(p, reg);
  CHECK(r.total_ops == 2ull * 128 * 128 * 128);
  CHECK(r.trace.size() == 16 * 16);  // tile_k = 0 covers all of K
  CHECK(r.config_bytes_written == 256 * 6 * 8);
  double i_oc = static_cast<double>(r.total_ops) /
                static_cast<double>(r.config_bytes_written);
  CHECK(i_oc == doctest::Approx(4194304.0 / 12288.0).epsilon(1e-12));
}

TEST_CASE("resizing a template keeps the kernel shape") {
  MatmulSpec spec = load_matmul_spec("specs/opengemm_128.json");
  MatmulSpec small = with_square_size(spec, 32);
  CHECK(small.m == 32);
  CHECK(small.n == 32);
  CHECK(small.k == 32);
  CHECK(small.tile_m == spec.tile_m);
  AccelRegistry reg = shipped();
  Program p = tiled_matmul(small, reg.find(small.accel));
  SimResult r = simulate(p, reg);
  CHECK(r.total_ops == 2ull * 32 * 32 * 32);
}

TEST_CASE("generation is deterministic") {
  MatmulSpec spec = load_matmul_spec("specs/gemmini_64.json");
  Program a = tiled_matmul(spec);
  Program b = tiled_matmul(spec);
  CHECK(structurally_equal(a, b));
}

TEST_CASE("spec JSON is strict") {
  auto bad = [](const std::string &text) {
    CHECK_THROWS_AS(matmul_spec_from_json(text), BenchError);
  };
  bad("nope");
  bad(R"({"m":8,"n":8,"k":8,"accel":"a","fields":[],"typo":1})");
  bad(R"({"n":8,"k":8,"accel":"a","fields":[]})");          // missing m
  bad(R"({"m":8,"n":8,"k":8,"fields":[]})");                // missing accel
  bad(R"({"m":8,"n":8,"k":8,"accel":"a"})");                // missing fields
  bad(R"({"m":8,"n":8,"k":8,"accel":"a",
          "fields":[{"kind":"addr","matrix":"a"}]})");      // unnamed field
  bad(R"({"m":8,"n":8,"k":8,"accel":"a",
          "fields":[{"field":"f","kind":"packed",
                     "parts":[{"source":"tile_m","shift":64}]}]})");
}

TEST_CASE("kernel construction rejects inconsistent shapes") {
  MatmulSpec spec = load_matmul_spec("specs/gemmini_64.json");

  MatmulSpec nondividing = spec;
  nondividing.tile_m = 24;  // does not divide 64
  CHECK_THROWS_AS(tiled_matmul(nondividing), BenchError);

  MatmulSpec zero = spec;
  zero.m = 0;
  CHECK_THROWS_AS(tiled_matmul(zero), BenchError);

  MatmulSpec noops = spec;
  noops.ops_per_mac = 0;
  CHECK_THROWS_AS(tiled_matmul(noops), BenchError);

  MatmulSpec badkind = spec;
  badkind.fields[0].kind = "mystery";
  CHECK_THROWS_AS(tiled_matmul(badkind), BenchError);

  MatmulSpec badmatrix = spec;
  badmatrix.fields[0].matrix = "q";
  CHECK_THROWS_AS(tiled_matmul(badmatrix), BenchError);

  MatmulSpec dup = spec;
  dup.fields.push_back(dup.fields[0]);
  CHECK_THROWS_AS(tiled_matmul(dup), BenchError);

  MatmulSpec badsource = spec;
  badsource.fields[4].parts[0].source = "tile_q";
  CHECK_THROWS_AS(tiled_matmul(badsource), BenchError);

  // field names are validated against the descriptor when given
  AcceleratorDescriptor d = testkit::seq_accel("gemmini");
  MatmulSpec unknown_field = spec;
  CHECK_THROWS_AS(tiled_matmul(unknown_field, &d), BenchError);
}

TEST_CASE("packed sources cover sizes and strides") {
  MatmulSpec spec = load_matmul_spec("specs/opengemm_128.json");
  AccelRegistry reg = shipped();
  Program p = tiled_matmul(spec, reg.find(spec.accel));
  SimResult r = simulate(p, reg);
  REQUIRE(!r.trace.empty());
  const auto &snap = r.trace[0].snapshot;
  // strides: a is K=128, b and c are N=128
  CHECK(snap.at("strides") ==
        (128ull | (128ull << 16) | (128ull << 32)));
  CHECK(snap.at("sizes") == (8ull | (8ull << 16) | (128ull << 32)));
}
