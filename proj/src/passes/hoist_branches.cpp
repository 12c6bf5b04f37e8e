#include <unordered_map>

#include "acckit/passes.hpp"
#include "common.hpp"

// hoist-if: a setup consuming an if-joined state blocks deduplication,
// because the join only keeps facts common to both branches. Cloning the
// setup into each branch tail (rewiring the branch yields to the clones)
// restores one linear state chain per path. The if's state result then
// denotes the post-setup state, so the original setup disappears and its
// uses move to the if result. Writes stay on the same paths in the same
// order relative to every launch, keeping the trace identical.

namespace acckit {
namespace {

// One rewrite per call; returns false when no candidate is left.
bool hoist_one(Function &f, Block &b) {
  for (std::size_t i = 0; i < b.ops.size(); ++i) {
    for (Block &r : b.ops[i].regions)
      if (hoist_one(f, r))
        return true;
    Operation &setup = b.ops[i];
    if (setup.kind != OpKind::Setup || !setup.from_state)
      continue;
    ValueId join = *setup_input(setup);

    // the defining if must sit earlier in this very block
    std::size_t if_idx = b.ops.size();
    std::size_t result_idx = 0;
    for (std::size_t j = 0; j < i; ++j) {
      if (b.ops[j].kind != OpKind::If)
        continue;
      for (std::size_t r = 0; r < b.ops[j].results.size(); ++r)
        if (b.ops[j].results[r] == join) {
          if_idx = j;
          result_idx = r;
        }
    }
    if (if_idx == b.ops.size())
      continue;

    // the join state may have no use but this setup
    if (detail::count_uses(f.body, join) != 1)
      continue;
    // nothing in between may clobber register state
    if (detail::clobber_between(b, if_idx + 1, i))
      continue;
    // every field value must already exist before the if
    std::unordered_set<ValueId> late;
    for (std::size_t j = if_idx; j <= i; ++j)
      for (ValueId res : b.ops[j].results)
        late.insert(res);
    bool movable = true;
    for (ValueId v : field_operands(setup))
      if (late.count(v))
        movable = false;
    if (!movable)
      continue;

    Operation &ifop = b.ops[if_idx];
    for (Block &region : ifop.regions) {
      detail::ensure_yield(region);
      Operation &yield = region.ops.back();
      Operation clone;
      clone.kind = OpKind::Setup;
      clone.uid = f.take_uid();
      clone.symbol = setup.symbol;
      clone.fields = setup.fields;
      auto fields = field_operands(setup);
      clone.operands.assign(fields.begin(), fields.end());
      clone.operands.push_back(yield.operands[result_idx]);
      clone.from_state = true;
      clone.results.push_back(f.new_value(ValueType::state(setup.symbol)));
      yield.operands[result_idx] = clone.results[0];
      region.ops.insert(region.ops.end() - 1, std::move(clone));
    }
    replace_uses(f.body, setup.results[0], join);
    b.ops.erase(b.ops.begin() + static_cast<std::ptrdiff_t>(i));
    return true;
  }
  return false;
}

} // namespace

void hoist_into_branches(Program &p) {
  for (Function &f : p.functions)
    while (hoist_one(f, f.body)) {
    }
}

} // namespace acckit
