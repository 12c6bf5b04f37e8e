#include <map>

#include "acckit/passes.hpp"
#include "common.hpp"

// hoist-loop: per-field loop-invariant code motion for configuration
// writes. A field written in a loop body with a value defined outside the
// loop, and written by no other setup or launch of that accelerator inside
// the body, lands in every launch of every iteration with the same value —
// so writing it once, immediately before the loop, leaves every snapshot
// unchanged. Blocked when the loop may run zero times (the write would
// suddenly happen), when the body can clobber registers (the rewrite would
// outrun the clobber), or when a launch of the same accelerator precedes
// the setup in the body (its first-iteration snapshot predates the write).
// Inner loops are processed first so invariants cascade outward one level
// per step. The state chain is re-threaded afterwards.

namespace acckit {
namespace {

struct FieldMove {
  std::string field;
  ValueId value;
};

// launch or setup ops of `accel` other than `skip` writing into `out`
void other_written_fields(const Block &b, const std::string &accel,
                          const Operation *skip,
                          std::set<std::string> &out) {
  walk_ops(b, [&](const Operation &op) {
    if (&op == skip)
      return;
    if ((op.kind == OpKind::Setup || op.kind == OpKind::Launch) &&
        op.symbol == accel)
      for (const auto &f : op.fields)
        out.insert(f);
  });
}

void find_launch_of(const Operation &op, bool &found,
                    const std::string &accel) {
  if (op.kind == OpKind::Launch && op.symbol == accel)
    found = true;
  for (const auto &r : op.regions)
    for (const auto &inner : r.ops)
      find_launch_of(inner, found, accel);
}

bool launch_of_accel_before(const Block &body, std::size_t index,
                            const std::string &accel) {
  for (std::size_t i = 0; i < index; ++i) {
    bool found = false;
    find_launch_of(body.ops[i], found, accel);
    if (found)
      return true;
  }
  return false;
}

bool hoist_from_loop(Function &f, Block &parent, std::size_t loop_idx) {
  Operation &loop = parent.ops[loop_idx];
  Block &body = loop.regions[0];
  if (for_trip_count(loop) < 1)
    return false;
  if (detail::clobber_between(body, 0, body.ops.size()))
    return false;

  std::unordered_set<ValueId> inside;
  detail::collect_defs(body, inside);

  // accel -> fields marshalled out, in first-encounter order
  std::vector<std::pair<std::string, std::vector<FieldMove>>> moves;
  auto moves_for = [&](const std::string &accel)
      -> std::vector<FieldMove> & {
    for (auto &m : moves)
      if (m.first == accel)
        return m.second;
    moves.emplace_back(accel, std::vector<FieldMove>{});
    return moves.back().second;
  };

  for (std::size_t i = 0; i < body.ops.size(); ++i) {
    Operation &setup = body.ops[i];
    if (setup.kind != OpKind::Setup || setup.fields.empty())
      continue;
    if (launch_of_accel_before(body, i, setup.symbol))
      continue;
    std::set<std::string> overwritten;
    other_written_fields(body, setup.symbol, &setup, overwritten);

    auto operands = field_operands(setup);
    std::vector<std::size_t> hoisted;
    for (std::size_t k = 0; k < setup.fields.size(); ++k) {
      if (inside.count(operands[k]) || overwritten.count(setup.fields[k]))
        continue;
      moves_for(setup.symbol).push_back({setup.fields[k], operands[k]});
      hoisted.push_back(k);
    }
    for (auto it = hoisted.rbegin(); it != hoisted.rend(); ++it) {
      setup.fields.erase(setup.fields.begin() +
                         static_cast<std::ptrdiff_t>(*it));
      setup.operands.erase(setup.operands.begin() +
                           static_cast<std::ptrdiff_t>(*it));
    }
  }
  if (moves.empty())
    return false;

  // one pre-loop setup per accelerator, spliced into the carried chain
  // when the loop already threads a state for it
  std::vector<Operation> preludes;
  for (auto &[accel, fields] : moves) {
    Operation pre;
    pre.kind = OpKind::Setup;
    pre.uid = f.take_uid();
    pre.symbol = accel;
    for (const FieldMove &mv : fields) {
      pre.fields.push_back(mv.field);
      pre.operands.push_back(mv.value);
    }
    pre.results.push_back(f.new_value(ValueType::state(accel)));
    for (std::size_t k = 0; k < loop.operands.size(); ++k) {
      const ValueType &t = f.type_of(body.args[k + 1]);
      if (t.is_state() && t.accel == accel) {
        pre.operands.push_back(loop.operands[k]);
        pre.from_state = true;
        loop.operands[k] = pre.results[0];
        break;
      }
    }
    preludes.push_back(std::move(pre));
  }
  parent.ops.insert(parent.ops.begin() +
                        static_cast<std::ptrdiff_t>(loop_idx),
                    std::make_move_iterator(preludes.begin()),
                    std::make_move_iterator(preludes.end()));
  return true;
}

bool process_block(Function &f, Block &b) {
  bool changed = false;
  for (std::size_t i = 0; i < b.ops.size(); ++i) {
    for (Block &r : b.ops[i].regions)
      changed |= process_block(f, r);
    if (b.ops[i].kind == OpKind::For && hoist_from_loop(f, b, i)) {
      changed = true;
      // the loop shifted right by the inserted setups; skip forward to it
      while (i < b.ops.size() && b.ops[i].kind != OpKind::For)
        ++i;
    }
  }
  return changed;
}

} // namespace

void hoist_loop_invariant_setup(Program &p) {
  for (Function &f : p.functions) {
    process_block(f, f.body);
  }
  // the new pre-loop setups join the state chain; loops that were not
  // carrying a state yet pick one up here
  trace_states(p);
}

} // namespace acckit
