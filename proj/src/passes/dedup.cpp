#include <algorithm>
#include <cstdint>
#include <map>
#include <vector>

#include "acckit/passes.hpp"
#include "common.hpp"

// dedup: drops register writes that restate what the register already
// holds. The analysis tracks, per accelerator, which SSA value each
// register field was last written with; a setup or launch write whose
// operand is that same value cannot change any later snapshot, so the
// field/operand pair is deleted. Facts survive only where every path
// agrees: branch facts intersect at the join, loop-entry facts are the
// fixpoint of preheader facts against the back edge (which naturally
// drops values redefined each iteration), and calls that may clobber
// device registers erase everything.

namespace acckit {
namespace {

// accel -> field -> SSA value known to be in that register
using Facts = std::map<std::string, std::map<std::string, ValueId>>;

Facts intersect(const Facts &a, const Facts &b) {
  Facts out;
  for (const auto &[accel, fields] : a) {
    auto it = b.find(accel);
    if (it == b.end())
      continue;
    std::map<std::string, ValueId> merged;
    for (const auto &[field, value] : fields) {
      auto fit = it->second.find(field);
      if (fit != it->second.end() && fit->second == value)
        merged.emplace(field, value);
    }
    if (!merged.empty())
      out.emplace(accel, std::move(merged));
  }
  return out;
}

class Dedup {
public:
  Facts walk(const Block &b, Facts facts, bool record) {
    for (const Operation &op : b.ops) {
      switch (op.kind) {
      case OpKind::Setup:
      case OpKind::Launch: {
        const std::size_t offset = op.kind == OpKind::Launch ? 1 : 0;
        auto &known = facts[op.symbol];
        for (std::size_t k = 0; k < op.fields.size(); ++k) {
          const ValueId v = op.operands[k + offset];
          auto it = known.find(op.fields[k]);
          if (it != known.end() && it->second == v) {
            if (record)
              deletions_[op.uid].push_back(k);
          } else {
            known[op.fields[k]] = v;
          }
        }
        break;
      }
      case OpKind::ExternCall:
        if (is_clobber(op))
          facts.clear();
        break;
      case OpKind::For:
        facts = walk_for(op, std::move(facts), record);
        break;
      case OpKind::If: {
        Facts taken = walk(op.regions[0], facts, record);
        Facts skipped = walk(op.regions[1], std::move(facts), record);
        facts = intersect(taken, skipped);
        break;
      }
      default:
        break;
      }
    }
    return facts;
  }

  void apply(Block &b) const {
    for (Operation &op : b.ops) {
      for (Block &r : op.regions)
        apply(r);
      auto it = deletions_.find(op.uid);
      if (it == deletions_.end())
        continue;
      std::vector<std::size_t> order = it->second;
      std::sort(order.rbegin(), order.rend());
      const std::size_t offset = op.kind == OpKind::Launch ? 1 : 0;
      for (std::size_t k : order) {
        op.fields.erase(op.fields.begin() + static_cast<std::ptrdiff_t>(k));
        op.operands.erase(op.operands.begin() +
                          static_cast<std::ptrdiff_t>(k + offset));
      }
    }
  }

private:
  Facts walk_for(const Operation &op, Facts facts, bool record) {
    // entry facts must hold on the first iteration and across the back
    // edge; iterate to the (shrinking, hence finite) fixpoint
    Facts in = facts;
    Facts out;
    while (true) {
      out = walk(op.regions[0], in, false);
      Facts next = intersect(in, out);
      if (next == in)
        break;
      in = std::move(next);
    }
    if (record)
      out = walk(op.regions[0], in, true);
    return for_trip_count(op) == 0 ? facts : out;
  }

  std::map<std::uint32_t, std::vector<std::size_t>> deletions_;
};

} // namespace

void deduplicate_setup(Program &p) {
  for (Function &f : p.functions) {
    Dedup d;
    d.walk(f.body, {}, true);
    d.apply(f.body);
  }
}

} // namespace acckit
