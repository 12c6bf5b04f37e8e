#include <algorithm>
#include <set>
#include <vector>

#include "acckit/passes.hpp"
#include "common.hpp"

// overlap: straight-line variant of the pipeline rotation. When a
// staged-write accelerator is relaunched in the same block —
// [launch s; await; ...; setup from s; launch ...] — the setup (and the
// pure ops computing its operands) moves to just before the await, so the
// writes land while the device is still busy with the previous job.
// Commits happen at the same launches as before, so snapshots are
// untouched. Skipped when anything between the await and the setup could
// clobber registers, or commit early (another launch of the same state),
// or cannot be crossed (impure producers).

namespace acckit {
namespace {

bool uses_value(const Operation &op, ValueId v) {
  for (ValueId o : op.operands)
    if (o == v)
      return true;
  for (const Block &r : op.regions)
    for (const Operation &inner : r.ops)
      if (uses_value(inner, v))
        return true;
  return false;
}

bool overlap_in(Function &f, Block &b, const AccelRegistry &registry) {
  constexpr std::size_t npos = static_cast<std::size_t>(-1);
  for (std::size_t i = 0; i < b.ops.size(); ++i) {
    Operation &setup = b.ops[i];
    if (setup.kind != OpKind::Setup || !setup.from_state ||
        setup.fields.empty())
      continue;
    const AcceleratorDescriptor *desc = registry.find(setup.symbol);
    if (!desc || desc->scheme != Scheme::Concurrent)
      continue;
    const ValueId state = *setup_input(setup);

    std::size_t launch_at = npos;
    for (std::size_t j = 0; j < i; ++j)
      if (b.ops[j].kind == OpKind::Launch &&
          launch_state(b.ops[j]) == state)
        launch_at = j;
    if (launch_at == npos)
      continue;
    const ValueId token = b.ops[launch_at].results[0];

    std::size_t await_at = npos;
    for (std::size_t k = launch_at + 1; k < i; ++k)
      if (b.ops[k].kind == OpKind::Await && b.ops[k].operands.size() == 1 &&
          b.ops[k].operands[0] == token) {
        await_at = k;
        break;
      }
    if (await_at == npos)
      continue; // already ahead of the wait

    if (detail::clobber_between(b, await_at + 1, i))
      continue;
    bool state_busy = false;
    for (std::size_t k = await_at + 1; k < i && !state_busy; ++k)
      state_busy = uses_value(b.ops[k], state);
    if (state_busy)
      continue; // an intervening launch would commit the moved writes

    // pure backward closure of the field operands, within the window
    std::set<std::size_t> closure;
    std::vector<ValueId> work(setup.operands.begin(),
                              setup.operands.end() - 1);
    bool movable = true;
    while (movable && !work.empty()) {
      const ValueId v = work.back();
      work.pop_back();
      for (std::size_t k = await_at + 1; k < i; ++k) {
        const Operation &op = b.ops[k];
        if (std::find(op.results.begin(), op.results.end(), v) ==
            op.results.end())
          continue;
        if (!detail::is_pure_op(op)) {
          movable = false;
          break;
        }
        if (closure.insert(k).second)
          work.insert(work.end(), op.operands.begin(), op.operands.end());
        break;
      }
    }
    if (!movable)
      continue;

    std::vector<std::size_t> order(closure.begin(), closure.end());
    order.push_back(i);
    std::vector<Operation> slice;
    slice.reserve(order.size());
    for (std::size_t k : order)
      slice.push_back(std::move(b.ops[k]));
    for (auto it = order.rbegin(); it != order.rend(); ++it)
      b.ops.erase(b.ops.begin() + static_cast<std::ptrdiff_t>(*it));
    b.ops.insert(b.ops.begin() + static_cast<std::ptrdiff_t>(await_at),
                 std::make_move_iterator(slice.begin()),
                 std::make_move_iterator(slice.end()));
    return true;
  }
  for (Operation &op : b.ops)
    for (Block &r : op.regions)
      if (overlap_in(f, r, registry))
        return true;
  return false;
}

} // namespace

void overlap_block(Program &p, const AccelRegistry &registry) {
  for (Function &f : p.functions) {
    while (overlap_in(f, f.body, registry)) {
    }
  }
}

} // namespace acckit
