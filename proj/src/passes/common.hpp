#pragma once

#include <set>
#include <unordered_map>
#include <unordered_set>

#include "acckit/ir.hpp"

// Helpers shared by the rewrite passes.

namespace acckit::detail {

inline bool is_pure_op(const Operation &op) {
  switch (op.kind) {
  case OpKind::Const:
  case OpKind::Arith:
  case OpKind::HostWork:
  case OpKind::Setup:
    return true;
  case OpKind::ExternCall:
    return op.effects == Effects::None;
  default:
    return false;
  }
}

// Values defined anywhere inside the block: args and results, recursively.
inline void collect_defs(const Block &b, std::unordered_set<ValueId> &out) {
  for (ValueId a : b.args)
    out.insert(a);
  walk_ops(b, [&](const Operation &op) {
    for (ValueId r : op.results)
      out.insert(r);
    for (const auto &region : op.regions)
      for (ValueId a : region.args)
        out.insert(a);
  });
}

inline std::size_t count_uses(const Block &b, ValueId v) {
  std::size_t n = 0;
  walk_ops(b, [&](const Operation &op) {
    for (ValueId o : op.operands)
      if (o == v)
        ++n;
  });
  return n;
}

// Appends an empty yield if the region does not already end in one.
inline void ensure_yield(Block &b) {
  if (!b.ops.empty() && b.ops.back().kind == OpKind::Yield)
    return;
  Operation y;
  y.kind = OpKind::Yield;
  b.ops.push_back(std::move(y));
}

// Deep copy of an op, remapping operands through `map` (identity when
// absent) and minting fresh result/arg values and uids.
inline Operation clone_op(Function &f, const Operation &op,
                          std::unordered_map<ValueId, ValueId> &map) {
  Operation c = op;
  c.uid = f.take_uid();
  for (ValueId &v : c.operands) {
    auto it = map.find(v);
    if (it != map.end())
      v = it->second;
  }
  for (ValueId &r : c.results) {
    ValueId nr = f.new_value(f.type_of(r));
    map[r] = nr;
    r = nr;
  }
  for (Block &region : c.regions) {
    for (ValueId &a : region.args) {
      ValueId na = f.new_value(f.type_of(a));
      map[a] = na;
      a = na;
    }
    std::vector<Operation> body;
    body.reserve(region.ops.size());
    for (const Operation &inner : region.ops)
      body.push_back(clone_op(f, inner, map));
    region.ops = std::move(body);
  }
  return c;
}

// True when any op in [first, last) of `b`, or anything nested inside them,
// clobbers accelerator state.
inline bool clobber_between(const Block &b, std::size_t first,
                            std::size_t last) {
  for (std::size_t i = first; i < last && i < b.ops.size(); ++i)
    if (op_contains_clobber(b.ops[i]))
      return true;
  return false;
}

// Accelerators reconfigured anywhere inside the block.
inline std::set<std::string> setup_accels(const Block &b) {
  std::set<std::string> out;
  walk_ops(b, [&](const Operation &op) {
    if (op.kind == OpKind::Setup)
      out.insert(op.symbol);
  });
  return out;
}

} // namespace acckit::detail
