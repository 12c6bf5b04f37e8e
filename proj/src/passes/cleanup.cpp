#include <cstddef>
#include <string>

#include "acckit/passes.hpp"
#include "common.hpp"

// cleanup: coalesces configuration writes after the other rewrites have
// moved them around. A setup whose input state comes from another setup
// in the same block — with no intervening clobber and no other consumer
// of the intermediate state — absorbs the earlier op's writes (its own
// value wins when both write a field), tightening write-group packing.
// Setups left with no fields forward their input onward, or vanish when
// nothing reads them. Constants and arithmetic orphaned by the merges
// are deleted last.

namespace acckit {
namespace {

bool merge_setup_chain(Function &f, Block &b) {
  for (std::size_t i = 0; i < b.ops.size(); ++i) {
    Operation &s2 = b.ops[i];
    if (s2.kind != OpKind::Setup || !s2.from_state)
      continue;
    const ValueId from = *setup_input(s2);
    std::size_t j = b.ops.size();
    for (std::size_t k = 0; k < i; ++k)
      if (b.ops[k].kind == OpKind::Setup && !b.ops[k].results.empty() &&
          b.ops[k].results[0] == from)
        j = k;
    if (j == b.ops.size())
      continue;
    if (detail::count_uses(f.body, from) != 1)
      continue;
    if (detail::clobber_between(b, j + 1, i))
      continue;

    Operation &s1 = b.ops[j];
    std::vector<std::string> fields;
    std::vector<ValueId> operands;
    auto s2_value_of = [&](const std::string &name) -> const ValueId * {
      for (std::size_t k = 0; k < s2.fields.size(); ++k)
        if (s2.fields[k] == name)
          return &s2.operands[k];
      return nullptr;
    };
    for (std::size_t k = 0; k < s1.fields.size(); ++k) {
      const ValueId *dup = s2_value_of(s1.fields[k]);
      fields.push_back(s1.fields[k]);
      operands.push_back(dup ? *dup : s1.operands[k]);
    }
    for (std::size_t k = 0; k < s2.fields.size(); ++k) {
      bool seen = false;
      for (const auto &name : s1.fields)
        seen |= name == s2.fields[k];
      if (!seen) {
        fields.push_back(s2.fields[k]);
        operands.push_back(s2.operands[k]);
      }
    }
    if (s1.from_state)
      operands.push_back(*setup_input(s1));
    s2.from_state = s1.from_state;
    s2.fields = std::move(fields);
    s2.operands = std::move(operands);
    b.ops.erase(b.ops.begin() + static_cast<std::ptrdiff_t>(j));
    return true;
  }
  for (Operation &op : b.ops)
    for (Block &r : op.regions)
      if (merge_setup_chain(f, r))
        return true;
  return false;
}

bool remove_empty_setup(Function &f, Block &b) {
  for (std::size_t i = 0; i < b.ops.size(); ++i) {
    Operation &op = b.ops[i];
    if (op.kind != OpKind::Setup || !op.fields.empty())
      continue;
    if (op.from_state) {
      replace_uses(f.body, op.results[0], *setup_input(op));
      b.ops.erase(b.ops.begin() + static_cast<std::ptrdiff_t>(i));
      return true;
    }
    if (detail::count_uses(f.body, op.results[0]) == 0) {
      b.ops.erase(b.ops.begin() + static_cast<std::ptrdiff_t>(i));
      return true;
    }
  }
  for (Operation &op : b.ops)
    for (Block &r : op.regions)
      if (remove_empty_setup(f, r))
        return true;
  return false;
}

bool erase_dead_scalars(Function &f, Block &b) {
  bool changed = false;
  for (std::size_t i = b.ops.size(); i-- > 0;) {
    Operation &op = b.ops[i];
    for (Block &r : op.regions)
      changed |= erase_dead_scalars(f, r);
    if (op.kind != OpKind::Const && op.kind != OpKind::Arith)
      continue;
    if (detail::count_uses(f.body, op.results[0]) == 0) {
      b.ops.erase(b.ops.begin() + static_cast<std::ptrdiff_t>(i));
      changed = true;
    }
  }
  return changed;
}

} // namespace

void cleanup_setups(Program &p) {
  for (Function &f : p.functions) {
    bool changed = true;
    while (changed) {
      changed = merge_setup_chain(f, f.body);
      changed |= remove_empty_setup(f, f.body);
    }
    while (erase_dead_scalars(f, f.body)) {
    }
  }
}

} // namespace acckit

