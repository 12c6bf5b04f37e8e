#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

namespace acckit {

// How the accelerator consumes configurations.
//  Sequential: register writes take effect immediately; a launch stalls the
//    host until the job is done.
//  Concurrent: writes go to staging registers and are committed by the next
//    launch; the host keeps running while a job is in flight, with at most
//    one outstanding job.
enum class Scheme { Sequential, Concurrent };

struct FieldSpec {
  std::string name;
  int bytes = 0;  // register width, 1..8
};

struct CostModel {
  std::int64_t write_cost = 1;       // host cycles per field write (> 0)
  std::int64_t arith_cost = 3;       // host cycles per arith / extern-call
  std::int64_t launch_cost = 1;      // host cycles to issue a launch
  std::int64_t await_poll_cost = 0;  // host cycles for a non-blocking await
  std::int64_t write_group = 1;      // consecutive writes billed as one
};

struct AcceleratorDescriptor {
  std::string name;
  Scheme scheme = Scheme::Sequential;
  double peak_perf = 1.0;                  // ops per cycle
  std::optional<double> mem_bandwidth;     // bytes per cycle, if modeled
  std::vector<FieldSpec> fields;
  CostModel cost;

  const FieldSpec *find_field(std::string_view name) const;
};

struct DescriptorError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// Parses and validates a descriptor from JSON text. Unknown keys anywhere in
// the document are rejected, as are non-positive costs, field widths outside
// 1..8 bytes, duplicate field names and an unknown scheme.
AcceleratorDescriptor parse_descriptor(const std::string &json_text);
AcceleratorDescriptor load_descriptor(const std::string &path);

// Peak configuration bandwidth in bytes per cycle: one write group of
// mean-width fields lands every write_cost cycles.
double config_bandwidth(const AcceleratorDescriptor &d);

// Cycles the accelerator needs for a job of `ops` operations.
std::uint64_t job_duration(const AcceleratorDescriptor &d, std::uint64_t ops);

// Descriptors for every accelerator a program mentions, keyed by name.
class AccelRegistry {
public:
  void add(AcceleratorDescriptor d);
  const AcceleratorDescriptor *find(std::string_view name) const;
  const AcceleratorDescriptor &at(const std::string &name) const;
  const std::map<std::string, AcceleratorDescriptor> &all() const {
    return by_name_;
  }

private:
  std::map<std::string, AcceleratorDescriptor> by_name_;
};

} // namespace acckit
