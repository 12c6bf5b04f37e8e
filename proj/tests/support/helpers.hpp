#pragma once

#include <string>

#include "acckit/accel.hpp"
#include "acckit/sim.hpp"
#include "acckit/text.hpp"
#include "acckit/verify.hpp"

// Small fixtures shared across the test binaries.

namespace testkit {

inline acckit::AcceleratorDescriptor seq_accel(std::string name = "seq",
                                               int fields = 4) {
  acckit::AcceleratorDescriptor d;
  d.name = std::move(name);
  d.scheme = acckit::Scheme::Sequential;
  d.peak_perf = 512;
  d.mem_bandwidth = 16;
  for (int i = 0; i < fields; ++i)
    d.fields.push_back({"f" + std::to_string(i), 8});
  d.cost.write_cost = 3;
  d.cost.arith_cost = 3;
  d.cost.launch_cost = 1;
  d.cost.write_group = 1;
  return d;
}

inline acckit::AcceleratorDescriptor conc_accel(std::string name = "conc",
                                                int fields = 4) {
  acckit::AcceleratorDescriptor d = seq_accel(std::move(name), fields);
  d.scheme = acckit::Scheme::Concurrent;
  d.peak_perf = 256;
  d.cost.write_cost = 2;
  return d;
}

inline acckit::AccelRegistry toy_registry() {
  acckit::AccelRegistry reg;
  reg.add(seq_accel());
  reg.add(conc_accel());
  return reg;
}

// Parses, verifies, and aborts the test with a useful message on failure.
inline acckit::Program parsed(const std::string &text) {
  acckit::Program p = acckit::parse_program(text);
  auto diags = acckit::verify(p);
  if (!diags.empty())
    throw std::runtime_error("fixture does not verify: " + diags[0].str());
  return p;
}

} // namespace testkit
