#include <cmath>
#include <fstream>
#include <set>
#include <sstream>

#include "acckit/accel.hpp"
#include "json.hpp"

namespace acckit {

using nlohmann::json;

const FieldSpec *AcceleratorDescriptor::find_field(
    std::string_view name) const {
  for (const auto &f : fields)
    if (f.name == name)
      return &f;
  return nullptr;
}

namespace {

[[noreturn]] void bad(const std::string &msg) { throw DescriptorError(msg); }

void reject_unknown(const json &obj, std::set<std::string> allowed,
                    const char *where) {
  for (auto it = obj.begin(); it != obj.end(); ++it)
    if (!allowed.count(it.key()))
      bad(std::string("unknown key \"") + it.key() + "\" in " + where);
}

std::int64_t int_or(const json &obj, const char *key, std::int64_t dflt) {
  if (!obj.contains(key))
    return dflt;
  const json &v = obj.at(key);
  if (!v.is_number_integer())
    bad(std::string(key) + " must be an integer");
  return v.get<std::int64_t>();
}

} // namespace

AcceleratorDescriptor parse_descriptor(const std::string &json_text) {
  json j;
  try {
    j = json::parse(json_text);
  } catch (const json::exception &e) {
    bad(std::string("invalid JSON: ") + e.what());
  }
  if (!j.is_object())
    bad("descriptor must be a JSON object");
  reject_unknown(
      j, {"name", "scheme", "peak_perf", "mem_bandwidth", "fields", "cost"},
      "descriptor");

  AcceleratorDescriptor d;
  if (!j.contains("name") || !j.at("name").is_string())
    bad("descriptor needs a string \"name\"");
  d.name = j.at("name").get<std::string>();
  if (d.name.empty())
    bad("descriptor name must not be empty");

  std::string scheme = j.value("scheme", std::string());
  if (scheme == "sequential")
    d.scheme = Scheme::Sequential;
  else if (scheme == "concurrent")
    d.scheme = Scheme::Concurrent;
  else
    bad("scheme must be \"sequential\" or \"concurrent\"");

  if (!j.contains("peak_perf") || !j.at("peak_perf").is_number())
    bad("descriptor needs a numeric \"peak_perf\"");
  d.peak_perf = j.at("peak_perf").get<double>();
  if (!(d.peak_perf > 0))
    bad("peak_perf must be positive");

  if (j.contains("mem_bandwidth")) {
    if (!j.at("mem_bandwidth").is_number())
      bad("mem_bandwidth must be a number");
    d.mem_bandwidth = j.at("mem_bandwidth").get<double>();
    if (!(*d.mem_bandwidth > 0))
      bad("mem_bandwidth must be positive");
  }

  if (!j.contains("fields") || !j.at("fields").is_array() ||
      j.at("fields").empty())
    bad("descriptor needs a non-empty \"fields\" array");
  std::set<std::string> seen;
  for (const json &fj : j.at("fields")) {
    if (!fj.is_object())
      bad("each field must be an object");
    reject_unknown(fj, {"name", "bytes"}, "field");
    FieldSpec f;
    if (!fj.contains("name") || !fj.at("name").is_string())
      bad("field needs a string \"name\"");
    f.name = fj.at("name").get<std::string>();
    f.bytes = static_cast<int>(int_or(fj, "bytes", 0));
    if (f.bytes < 1 || f.bytes > 8)
      bad("field \"" + f.name + "\" width must be 1..8 bytes");
    if (!seen.insert(f.name).second)
      bad("duplicate field \"" + f.name + "\"");
    d.fields.push_back(std::move(f));
  }

  if (j.contains("cost")) {
    const json &c = j.at("cost");
    if (!c.is_object())
      bad("cost must be an object");
    reject_unknown(c,
                   {"write_cost", "arith_cost", "launch_cost",
                    "await_poll_cost", "write_group"},
                   "cost");
    d.cost.write_cost = int_or(c, "write_cost", d.cost.write_cost);
    d.cost.arith_cost = int_or(c, "arith_cost", d.cost.arith_cost);
    d.cost.launch_cost = int_or(c, "launch_cost", d.cost.launch_cost);
    d.cost.await_poll_cost =
        int_or(c, "await_poll_cost", d.cost.await_poll_cost);
    d.cost.write_group = int_or(c, "write_group", d.cost.write_group);
  }
  if (d.cost.write_cost <= 0)
    bad("write_cost must be positive");
  if (d.cost.arith_cost < 0 || d.cost.launch_cost < 0 ||
      d.cost.await_poll_cost < 0)
    bad("costs must be non-negative");
  if (d.cost.write_group < 1)
    bad("write_group must be at least 1");

  return d;
}

AcceleratorDescriptor load_descriptor(const std::string &path) {
  std::ifstream in(path);
  if (!in)
    bad("cannot open descriptor file: " + path);
  std::ostringstream ss;
  ss << in.rdbuf();
  return parse_descriptor(ss.str());
}

double config_bandwidth(const AcceleratorDescriptor &d) {
  double total = 0;
  for (const auto &f : d.fields)
    total += f.bytes;
  double mean = total / static_cast<double>(d.fields.size());
  return static_cast<double>(d.cost.write_group) * mean /
         static_cast<double>(d.cost.write_cost);
}

std::uint64_t job_duration(const AcceleratorDescriptor &d,
                           std::uint64_t ops) {
  if (ops == 0)
    return 0;
  double cycles = std::ceil(static_cast<double>(ops) / d.peak_perf - 1e-9);
  return cycles < 1.0 ? 1 : static_cast<std::uint64_t>(cycles);
}

void AccelRegistry::add(AcceleratorDescriptor d) {
  std::string key = d.name;
  by_name_[key] = std::move(d);
}

const AcceleratorDescriptor *AccelRegistry::find(
    std::string_view name) const {
  auto it = by_name_.find(std::string(name));
  return it == by_name_.end() ? nullptr : &it->second;
}

const AcceleratorDescriptor &AccelRegistry::at(
    const std::string &name) const {
  auto it = by_name_.find(name);
  if (it == by_name_.end())
    bad("no descriptor for accelerator \"" + name + "\"");
  return it->second;
}

} // namespace acckit
