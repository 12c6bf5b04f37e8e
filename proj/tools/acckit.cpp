#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "acckit/benchgen.hpp"
#include "acckit/passes.hpp"
#include "acckit/roofline.hpp"
#include "acckit/sim.hpp"
#include "acckit/testgen.hpp"
#include "acckit/text.hpp"
#include "acckit/verify.hpp"

// acckit — one binary for the whole workflow:
//   opt       parse (or generate), rewrite, print the optimized program
//   sim       cycle-accurate simulation, text/JSON summary, timeline CSV
//   roofline  place baseline/dedup/dedup+overlap on the roofline
//   report    per-size sweep table with speedups and their geomean
//   fuzz      random valid programs through verify/sim/passes/sim
// Exit codes: 0 ok, 1 simulation or analysis error, 2 input error.

namespace {

using namespace acckit;

struct InputError : std::runtime_error {
  using std::runtime_error::runtime_error;
};
struct AnalysisError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct Manifest {
  std::string program_path;
  std::string benchgen_path;
  std::vector<std::string> accel_paths;
  std::string passes = "default";
  std::string format = "text";
  std::string timeline_path;
  std::string outdir;
  std::string sizes = "32,64,128,256";
  std::uint64_t seed = 1;
  int count = 50;
};

std::string slurp(const std::string &path) {
  std::ifstream in(path, std::ios::binary);
  if (!in)
    throw InputError("cannot open " + path);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

AccelRegistry load_registry(const Manifest &m) {
  AccelRegistry reg;
  for (const auto &path : m.accel_paths) {
    try {
      reg.add(load_descriptor(path));
    } catch (const DescriptorError &e) {
      throw InputError(std::string(e.what()));
    }
  }
  return reg;
}

Program load_program(const Manifest &m, const AccelRegistry &reg) {
  if (m.program_path.empty() == m.benchgen_path.empty())
    throw InputError("give exactly one of: a program file, --benchgen");
  Program p;
  if (!m.benchgen_path.empty()) {
    try {
      MatmulSpec spec = load_matmul_spec(m.benchgen_path);
      p = tiled_matmul(spec, reg.find(spec.accel));
    } catch (const BenchError &e) {
      throw InputError(std::string(e.what()));
    }
  } else {
    try {
      p = parse_program(slurp(m.program_path));
    } catch (const ParseError &e) {
      throw InputError(std::string(e.what()));
    }
  }
  auto diags = verify(p);
  if (!diags.empty()) {
    std::string msg = "program fails verification:";
    for (const auto &d : diags)
      msg += "\n  " + d.str();
    throw InputError(msg);
  }
  return p;
}

PassPipeline selected_passes(const Manifest &m, bool default_all) {
  if (m.passes == "default")
    return default_all ? PassPipeline::all() : PassPipeline{};
  if (m.passes == "all")
    return PassPipeline::all();
  if (m.passes == "dedup-stage")
    return PassPipeline::dedup_stage();
  if (m.passes.empty() || m.passes == "none")
    return PassPipeline{};
  PassPipeline pp;
  pp.enable_overlap = false;
  std::stringstream ss(m.passes);
  std::string name;
  while (std::getline(ss, name, ','))
    if (!name.empty())
      pp.passes.push_back(name);
  return pp;
}

void write_output_file(const Manifest &m, const std::string &name,
                       const std::string &content) {
  if (m.outdir.empty())
    return;
  std::filesystem::create_directories(m.outdir);
  std::ofstream out(std::filesystem::path(m.outdir) / name,
                    std::ios::binary);
  if (!out)
    throw InputError("cannot write into " + m.outdir);
  out << content;
}

double perf_of(const SimResult &r) {
  return r.total_cycles == 0
             ? 0.0
             : static_cast<double>(r.total_ops) /
                   static_cast<double>(r.total_cycles);
}

struct Variants {
  SimResult baseline, dedup, full;
};

Variants run_variants(const Program &p, const AccelRegistry &reg) {
  Variants v;
  v.baseline = simulate(p, reg);
  Program q = p;
  run_pipeline(q, PassPipeline::dedup_stage(), reg);
  v.dedup = simulate(q, reg);
  Program r = p;
  run_pipeline(r, PassPipeline::all(), reg);
  v.full = simulate(r, reg);
  return v;
}

// ---- subcommands ----

int cmd_opt(const Manifest &m) {
  AccelRegistry reg = load_registry(m);
  Program p = load_program(m, reg);
  PassPipeline pp = selected_passes(m, true);
  PassLog log = run_pipeline(p, pp, reg);
  for (const auto &e : log)
    std::cerr << e.pass << ": field writes " << e.field_writes_before
              << " -> " << e.field_writes_after << ", bytes "
              << e.static_bytes_before << " -> " << e.static_bytes_after
              << (e.changed ? "" : " (no change)") << "\n";
  const std::string text = print_program(p);
  std::cout << text;
  write_output_file(m, "opt.ir", text);
  return 0;
}

int cmd_sim(const Manifest &m) {
  AccelRegistry reg = load_registry(m);
  Program p = load_program(m, reg);
  PassPipeline pp = selected_passes(m, false);
  if (!pp.passes.empty())
    run_pipeline(p, pp, reg);
  SimResult r = simulate(p, reg);
  const bool json = m.format == "json";
  const std::string text = json ? result_json(r) : result_text(r);
  std::cout << text;
  write_output_file(m, json ? "sim.json" : "sim.txt", text);
  if (!m.timeline_path.empty()) {
    std::ofstream out(m.timeline_path, std::ios::binary);
    if (!out)
      throw InputError("cannot write " + m.timeline_path);
    out << emit_timeline_csv(r);
  }
  return 0;
}

int cmd_roofline(const Manifest &m) {
  AccelRegistry reg = load_registry(m);
  Program p = load_program(m, reg);
  if (p.accels.empty())
    throw InputError("program declares no accelerator");
  const AcceleratorDescriptor *desc = reg.find(p.accels.front());
  if (!desc)
    throw InputError("no descriptor for \"" + p.accels.front() + "\"");

  Variants v = run_variants(p, reg);
  std::vector<RooflinePoint> points;
  points.push_back(measure_point(v.baseline, *desc, "baseline"));
  points.push_back(measure_point(v.dedup, *desc, "dedup"));
  points.push_back(measure_point(v.full, *desc, "dedup+overlap"));

  const double bw = config_bandwidth(*desc);
  const std::string csv = roofline_csv(points, desc->peak_perf, bw);
  if (m.format == "csv") {
    std::cout << csv;
  } else {
    for (const auto &pt : points) {
      std::cout << pt.label << ": I_oc=";
      if (std::isinf(pt.i_oc))
        std::cout << "inf";
      else
        std::cout << pt.i_oc;
      std::cout << " ops/byte, perf=" << pt.perf << " ops/cycle ("
                << percent_of_peak(pt.perf, desc->peak_perf)
                << "% of peak), " << bound_name(pt.bound) << "\n";
    }
  }
  write_output_file(m, "roofline.csv", csv);
  return 0;
}

int cmd_report(const Manifest &m) {
  if (m.benchgen_path.empty())
    throw InputError("report needs --benchgen <spec.json>");
  AccelRegistry reg = load_registry(m);
  MatmulSpec tmpl;
  try {
    tmpl = load_matmul_spec(m.benchgen_path);
  } catch (const BenchError &e) {
    throw InputError(std::string(e.what()));
  }

  std::vector<std::int64_t> sizes;
  std::stringstream ss(m.sizes);
  std::string tok;
  while (std::getline(ss, tok, ','))
    if (!tok.empty())
      sizes.push_back(std::stoll(tok));
  if (sizes.empty())
    throw InputError("--sizes lists no sizes");

  struct Row {
    std::int64_t size;
    double base, dedup, full;
  };
  std::vector<Row> rows;
  for (std::int64_t size : sizes) {
    MatmulSpec spec = with_square_size(tmpl, size);
    Program p;
    try {
      p = tiled_matmul(spec, reg.find(spec.accel));
    } catch (const BenchError &e) {
      throw InputError(std::string(e.what()));
    }
    Variants v = run_variants(p, reg);
    rows.push_back(
        {size, perf_of(v.baseline), perf_of(v.dedup), perf_of(v.full)});
  }

  double log_dedup = 0.0, log_full = 0.0;
  for (const Row &r : rows) {
    log_dedup += std::log(r.dedup / r.base);
    log_full += std::log(r.full / r.base);
  }
  const double gm_dedup =
      std::exp(log_dedup / static_cast<double>(rows.size()));
  const double gm_full =
      std::exp(log_full / static_cast<double>(rows.size()));

  std::ostringstream out;
  char line[256];
  if (m.format == "csv") {
    out << "size,baseline_perf,dedup_perf,overlap_perf,dedup_speedup,"
           "overlap_speedup\n";
    for (const Row &r : rows) {
      std::snprintf(line, sizeof line, "%lld,%.6g,%.6g,%.6g,%.6g,%.6g\n",
                    static_cast<long long>(r.size), r.base, r.dedup, r.full,
                    r.dedup / r.base, r.full / r.base);
      out << line;
    }
    std::snprintf(line, sizeof line, "geomean,,,,%.6g,%.6g\n", gm_dedup,
                  gm_full);
    out << line;
  } else {
    out << "size      baseline     dedup  dedup+overlap  speedup   "
           "+overlap\n";
    for (const Row &r : rows) {
      std::snprintf(line, sizeof line,
                    "%-8lld %9.3f %9.3f %14.3f %8.3f %10.3f\n",
                    static_cast<long long>(r.size), r.base, r.dedup, r.full,
                    r.dedup / r.base, r.full / r.base);
      out << line;
    }
    std::snprintf(line, sizeof line, "%-8s %9s %9s %14s %8.3f %10.3f\n",
                  "geomean", "", "", "", gm_dedup, gm_full);
    out << line;
  }
  std::cout << out.str();
  write_output_file(m, m.format == "csv" ? "report.csv" : "report.txt",
                    out.str());
  return 0;
}

int cmd_fuzz(const Manifest &m) {
  AccelRegistry reg = load_registry(m);
  if (reg.all().empty())
    throw InputError("fuzz needs at least one --accel descriptor");
  int failures = 0;
  for (int i = 0; i < m.count; ++i) {
    const std::uint64_t seed = m.seed + static_cast<std::uint64_t>(i);
    Program p = random_program(seed, reg);
    auto diags = verify(p);
    if (!diags.empty()) {
      std::cerr << "seed " << seed << ": generator emitted invalid IR: "
                << diags.front().str() << "\n";
      ++failures;
      continue;
    }
    try {
      SimResult before = simulate(p, reg);
      Program q = p;
      run_pipeline(q, PassPipeline::all(), reg);
      SimResult after = simulate(q, reg);
      if (!trace_equivalent(before, after)) {
        std::cerr << "seed " << seed << ": launch trace changed\n";
        ++failures;
      }
    } catch (const std::exception &e) {
      std::cerr << "seed " << seed << ": " << e.what() << "\n";
      ++failures;
    }
  }
  std::cout << m.count << " programs checked, " << failures << " failures\n";
  return failures == 0 ? 0 : 1;
}

} // namespace

int main(int argc, char **argv) {
  CLI::App app{"compiler toolkit for accelerator-configuration programs"};
  app.require_subcommand(1);
  Manifest m;

  auto add_common = [&m](CLI::App *sub, bool with_program) {
    sub->add_option("--accel", m.accel_paths,
                    "accelerator descriptor JSON (repeatable)");
    sub->add_option("--format", m.format, "text|json|csv");
    sub->add_option("--outdir", m.outdir, "also write outputs here");
    if (with_program) {
      sub->add_option("program", m.program_path, "program file");
      sub->add_option("--benchgen", m.benchgen_path,
                      "generate the program from a matmul spec");
      sub->add_option("--passes", m.passes,
                      "comma list, or all|dedup-stage|none");
    }
  };

  CLI::App *opt = app.add_subcommand("opt", "rewrite and print a program");
  add_common(opt, true);
  CLI::App *sim = app.add_subcommand("sim", "simulate a program");
  add_common(sim, true);
  sim->add_option("--timeline", m.timeline_path, "write a lane CSV here");
  CLI::App *roof =
      app.add_subcommand("roofline", "place pipeline variants on the roof");
  add_common(roof, true);
  CLI::App *report =
      app.add_subcommand("report", "per-size sweep with geomean speedups");
  add_common(report, false);
  report->add_option("--benchgen", m.benchgen_path, "matmul spec template");
  report->add_option("--sizes", m.sizes, "comma list of square sizes");
  CLI::App *fuzz =
      app.add_subcommand("fuzz", "random programs through the pipeline");
  fuzz->add_option("--accel", m.accel_paths,
                   "accelerator descriptor JSON (repeatable)");
  fuzz->add_option("--seed", m.seed, "first seed");
  fuzz->add_option("--count", m.count, "programs to generate");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp &e) {
    return app.exit(e);
  } catch (const CLI::ParseError &e) {
    app.exit(e);
    return 2;
  }

  try {
    if (opt->parsed())
      return cmd_opt(m);
    if (sim->parsed())
      return cmd_sim(m);
    if (roof->parsed())
      return cmd_roofline(m);
    if (report->parsed())
      return cmd_report(m);
    return cmd_fuzz(m);
  } catch (const InputError &e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  } catch (const SimError &e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  } catch (const PassError &e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  } catch (const std::exception &e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
}
