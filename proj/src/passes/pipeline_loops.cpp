#include <unordered_map>
#include <unordered_set>
#include <utility>
#include <vector>

#include "acckit/passes.hpp"
#include "common.hpp"

// pipeline: software-pipelines kernel loops on staged-write accelerators.
// A loop whose body is [address math; setup; launch; await; yield state]
// serializes configuration against the device: every launch waits for the
// writes of its own iteration. The rewrite peels the first iteration's
// staging in front of the loop, rotates the body to
//   [launch incoming state; compute next addresses; setup; await; yield]
// and shortens the loop by one trip, launching the last staged
// configuration in a straight-line epilogue. Each launch commits exactly
// the writes of its own iteration — one iteration later in program order —
// so staging registers are always drained and the trace is unchanged.

namespace acckit {
namespace {

bool pipeline_at(Function &f, Block &parent, std::size_t idx,
                 const AccelRegistry &registry) {
  Operation &loop = parent.ops[idx];
  if (loop.kind != OpKind::For || for_trip_count(loop) < 1)
    return false;
  if (loop.operands.size() != 1 || loop.results.size() != 1)
    return false;
  Block &body = loop.regions[0];
  if (body.args.size() != 2 || !f.type_of(body.args[1]).is_state())
    return false;
  if (body.ops.size() < 4)
    return false;

  const std::size_t n = body.ops.size();
  Operation &yld = body.ops[n - 1];
  Operation &await = body.ops[n - 2];
  Operation &launch = body.ops[n - 3];
  Operation &setup = body.ops[n - 4];
  if (yld.kind != OpKind::Yield || await.kind != OpKind::Await ||
      launch.kind != OpKind::Launch || setup.kind != OpKind::Setup)
    return false;
  for (std::size_t i = 0; i + 4 < n; ++i)
    if (body.ops[i].kind != OpKind::Const &&
        body.ops[i].kind != OpKind::Arith)
      return false;
  if (!setup.from_state || setup_input(setup) != body.args[1] ||
      setup.fields.empty())
    return false;
  if (launch_state(launch) != setup.results[0] || !launch.fields.empty())
    return false;
  if (await.operands.size() != 1 || await.operands[0] != launch.results[0])
    return false;
  if (yld.operands.size() != 1 || yld.operands[0] != setup.results[0])
    return false;

  std::unordered_set<ValueId> inside;
  detail::collect_defs(body, inside);
  if (launch.ops_operand && inside.count(launch.operands.back()))
    return false; // the workload value must survive moving to the loop head

  const AcceleratorDescriptor *desc = registry.find(setup.symbol);
  if (!desc || desc->scheme != Scheme::Concurrent)
    return false;

  // ---- prelude: first iteration's values and staging, before the loop
  const ValueType ind_type = f.type_of(body.args[0]);
  std::unordered_map<ValueId, ValueId> remap;

  Operation low;
  low.kind = OpKind::Const;
  low.uid = f.take_uid();
  low.literal = loop.lower;
  low.results.push_back(f.new_value(ind_type));
  remap[body.args[0]] = low.results[0];
  remap[body.args[1]] = loop.operands[0];

  std::vector<Operation> prelude;
  prelude.push_back(std::move(low));
  for (std::size_t i = 0; i + 4 < n; ++i)
    prelude.push_back(detail::clone_op(f, body.ops[i], remap));
  Operation first = detail::clone_op(f, setup, remap);
  loop.operands[0] = first.results[0];
  prelude.push_back(std::move(first));

  // ---- epilogue: the final staged configuration runs after the loop
  std::vector<Operation> epilogue;
  {
    Operation fire;
    fire.kind = OpKind::Launch;
    fire.uid = f.take_uid();
    fire.symbol = launch.symbol;
    fire.ops_attr = launch.ops_attr;
    fire.ops_operand = launch.ops_operand;
    fire.operands.push_back(loop.results[0]);
    if (launch.ops_operand)
      fire.operands.push_back(launch.operands.back());
    fire.results.push_back(f.new_value(f.type_of(launch.results[0])));
    Operation wait;
    wait.kind = OpKind::Await;
    wait.uid = f.take_uid();
    wait.operands.push_back(fire.results[0]);
    epilogue.push_back(std::move(fire));
    epilogue.push_back(std::move(wait));
  }

  // ---- rotated body: launch what came in, then stage the next iteration
  std::vector<Operation> rotated;
  rotated.reserve(n + 2);

  Operation fire = std::move(launch);
  fire.operands[0] = body.args[1];
  rotated.push_back(std::move(fire));

  Operation step;
  step.kind = OpKind::Const;
  step.uid = f.take_uid();
  step.literal = loop.step;
  step.results.push_back(f.new_value(ind_type));
  const ValueId step_value = step.results[0];
  rotated.push_back(std::move(step));

  Operation next;
  next.kind = OpKind::Arith;
  next.arith = ArithOp::Add;
  next.uid = f.take_uid();
  next.operands = {body.args[0], step_value};
  next.results.push_back(f.new_value(ind_type));
  const ValueId next_value = next.results[0];
  rotated.push_back(std::move(next));

  for (std::size_t i = 0; i + 4 < n; ++i) {
    Operation op = std::move(body.ops[i]);
    for (ValueId &v : op.operands)
      if (v == body.args[0])
        v = next_value;
    rotated.push_back(std::move(op));
  }
  Operation stage = std::move(setup);
  for (ValueId &v : stage.operands)
    if (v == body.args[0])
      v = next_value;
  rotated.push_back(std::move(stage));
  rotated.push_back(std::move(await));
  rotated.push_back(std::move(yld));
  body.ops = std::move(rotated);

  // one fewer in-loop trip; the epilogue launches the last configuration
  const std::int64_t trips = for_trip_count(loop);
  loop.upper = loop.lower + (trips - 1) * loop.step;

  parent.ops.insert(parent.ops.begin() + static_cast<std::ptrdiff_t>(idx + 1),
                    std::make_move_iterator(epilogue.begin()),
                    std::make_move_iterator(epilogue.end()));
  parent.ops.insert(parent.ops.begin() + static_cast<std::ptrdiff_t>(idx),
                    std::make_move_iterator(prelude.begin()),
                    std::make_move_iterator(prelude.end()));
  return true;
}

bool scan(Function &f, Block &b, const AccelRegistry &registry) {
  for (std::size_t i = 0; i < b.ops.size(); ++i) {
    for (Block &r : b.ops[i].regions)
      if (scan(f, r, registry))
        return true;
    if (b.ops[i].kind == OpKind::For && pipeline_at(f, b, i, registry))
      return true;
  }
  return false;
}

} // namespace

void pipeline_loops(Program &p, const AccelRegistry &registry) {
  for (Function &f : p.functions) {
    while (scan(f, f.body, registry)) {
    }
  }
}

} // namespace acckit
