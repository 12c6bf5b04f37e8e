#include <algorithm>

#include "acckit/passes.hpp"
#include "acckit/text.hpp"
#include "acckit/verify.hpp"
#include "common.hpp"

namespace acckit {
namespace {

const char *const kKnownPasses[] = {"canon",  "trace",   "hoist-if",
                                    "hoist-loop", "dedup", "cleanup",
                                    "pipeline", "overlap"};

struct StaticStats {
  std::size_t writes = 0;
  std::uint64_t bytes = 0;
};

StaticStats collect_stats(const Program &p, const AccelRegistry &reg) {
  StaticStats st;
  for (const Function &f : p.functions)
    walk_ops(f.body, [&](const Operation &op) {
      if (op.kind != OpKind::Setup && op.kind != OpKind::Launch)
        return;
      st.writes += op.fields.size();
      const AcceleratorDescriptor *d = reg.find(op.symbol);
      if (!d)
        return;
      for (const std::string &name : op.fields)
        if (const FieldSpec *fs = d->find_field(name))
          st.bytes += static_cast<std::uint64_t>(fs->bytes);
    });
  return st;
}

long position_of(const std::vector<std::string> &passes,
                 const char *name) {
  auto it = std::find(passes.begin(), passes.end(), name);
  return it == passes.end() ? -1 : it - passes.begin();
}

} // namespace

PassPipeline PassPipeline::all(bool enable_overlap) {
  PassPipeline pp = dedup_stage();
  pp.enable_overlap = enable_overlap;
  if (enable_overlap) {
    pp.passes.push_back("pipeline");
    pp.passes.push_back("overlap");
    pp.passes.push_back("cleanup");
  }
  return pp;
}

PassPipeline PassPipeline::dedup_stage() {
  PassPipeline pp;
  pp.passes = {"canon", "trace", "hoist-if", "hoist-loop", "dedup",
               "cleanup"};
  pp.enable_overlap = false;
  return pp;
}

bool is_pure_sequence(std::span<const Operation> ops) {
  return std::all_of(ops.begin(), ops.end(), detail::is_pure_op);
}

PassLog run_pipeline(Program &p, const PassPipeline &pipeline,
                     const AccelRegistry &reg) {
  for (const std::string &name : pipeline.passes) {
    bool known = false;
    for (const char *k : kKnownPasses)
      known |= name == k;
    if (!known)
      throw PassError("unknown pass: " + name);
  }
  const long trace_at = position_of(pipeline.passes, "trace");
  const long dedup_at = position_of(pipeline.passes, "dedup");
  const long pipe_at = position_of(pipeline.passes, "pipeline");
  const long over_at = position_of(pipeline.passes, "overlap");
  if (dedup_at >= 0 && trace_at > dedup_at)
    throw PassError("trace must run before dedup");
  if (pipe_at >= 0 && dedup_at > pipe_at)
    throw PassError("dedup must run before pipeline");
  if (over_at >= 0 && dedup_at > over_at)
    throw PassError("dedup must run before overlap");

  PassLog log;
  for (const std::string &name : pipeline.passes) {
    PassLogEntry entry;
    entry.pass = name;
    const StaticStats before = collect_stats(p, reg);
    entry.field_writes_before = before.writes;
    entry.static_bytes_before = before.bytes;
    const std::string snapshot = print_program(p);

    if (name == "canon")
      canonicalize(p);
    else if (name == "trace")
      trace_states(p);
    else if (name == "hoist-if")
      hoist_into_branches(p);
    else if (name == "hoist-loop")
      hoist_loop_invariant_setup(p);
    else if (name == "dedup")
      deduplicate_setup(p);
    else if (name == "cleanup")
      cleanup_setups(p);
    else if (name == "pipeline")
      pipeline_loops(p, reg);
    else
      overlap_block(p, reg);

    const auto diags = verify(p);
    if (!diags.empty())
      throw PassError("pass '" + name +
                      "' produced invalid IR: " + diags.front().str());
    const StaticStats after = collect_stats(p, reg);
    entry.field_writes_after = after.writes;
    entry.static_bytes_after = after.bytes;
    entry.changed = print_program(p) != snapshot;
    log.push_back(std::move(entry));
  }
  return log;
}

} // namespace acckit
