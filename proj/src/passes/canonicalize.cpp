#include <functional>
#include <map>
#include <tuple>

#include "acckit/passes.hpp"
#include "common.hpp"

// canon: make SSA identity a good proxy for value identity before dedup
// runs, and reduce per-iteration host work. Constants are hoisted to the
// function entry and uniqued, pure arithmetic is CSE'd within its scope and
// moved out of loops when the operands allow it, zero- and one-trip loops
// are folded away, and dead const/arith ops are dropped. None of this
// touches a setup, launch or await, so the launch trace is unchanged.

namespace acckit {
namespace {

using detail::collect_defs;
using detail::ensure_yield;

// --- trivial loop folding ---------------------------------------------------

bool fold_loops(Function &f, Block &b) {
  bool changed = false;
  for (std::size_t i = 0; i < b.ops.size();) {
    Operation &op = b.ops[i];
    for (Block &r : op.regions)
      changed |= fold_loops(f, r);
    if (op.kind != OpKind::For) {
      ++i;
      continue;
    }
    std::int64_t trips = for_trip_count(op);
    if (trips == 0) {
      for (std::size_t k = 0; k < op.results.size(); ++k)
        replace_uses(f.body, op.results[k], op.operands[k]);
      b.ops.erase(b.ops.begin() + static_cast<std::ptrdiff_t>(i));
      changed = true;
      continue;
    }
    if (trips != 1) {
      ++i;
      continue;
    }
    // single iteration: inline the body with the induction pinned to lower
    Block body = std::move(op.regions[0]);
    ensure_yield(body);
    for (std::size_t k = 0; k < op.operands.size(); ++k)
      replace_uses(body, body.args[k + 1], op.operands[k]);
    bool ind_used = detail::count_uses(body, body.args[0]) > 0;
    std::vector<Operation> spliced;
    if (ind_used) {
      Operation cst;
      cst.kind = OpKind::Const;
      cst.uid = f.take_uid();
      cst.literal = op.lower;
      cst.results.push_back(f.new_value(ValueType::integer(64)));
      replace_uses(body, body.args[0], cst.results[0]);
      spliced.push_back(std::move(cst));
    }
    Operation yield = std::move(body.ops.back());
    body.ops.pop_back();
    for (std::size_t k = 0; k < op.results.size(); ++k)
      replace_uses(f.body, op.results[k], yield.operands[k]);
    for (Operation &inner : body.ops)
      spliced.push_back(std::move(inner));
    b.ops.erase(b.ops.begin() + static_cast<std::ptrdiff_t>(i));
    b.ops.insert(b.ops.begin() + static_cast<std::ptrdiff_t>(i),
                 std::make_move_iterator(spliced.begin()),
                 std::make_move_iterator(spliced.end()));
    changed = true;
    // re-visit the spliced ops (they may contain further foldable loops)
  }
  return changed;
}

// --- constant uniquing -------------------------------------------------------

bool unique_consts(Function &f) {
  struct Gathered {
    std::int64_t literal;
    int width;
    ValueId result;
  };
  std::vector<Gathered> found;
  bool any_moved = false;

  std::function<void(Block &, bool)> gather = [&](Block &b, bool entry) {
    for (std::size_t i = 0; i < b.ops.size();) {
      Operation &op = b.ops[i];
      for (Block &r : op.regions)
        gather(r, false);
      if (op.kind == OpKind::Const) {
        found.push_back({op.literal, f.type_of(op.results[0]).width,
                         op.results[0]});
        if (!entry)
          any_moved = true;
        b.ops.erase(b.ops.begin() + static_cast<std::ptrdiff_t>(i));
        continue;
      }
      ++i;
    }
  };
  gather(f.body, true);

  std::map<std::pair<std::int64_t, int>, ValueId> canon;
  std::vector<Operation> entry_ops;
  bool any_duped = false;
  for (const Gathered &g : found) {
    auto [it, fresh] = canon.try_emplace({g.literal, g.width}, g.result);
    if (fresh) {
      Operation cst;
      cst.kind = OpKind::Const;
      cst.uid = f.take_uid();
      cst.literal = g.literal;
      cst.results.push_back(g.result);
      entry_ops.push_back(std::move(cst));
    } else {
      replace_uses(f.body, g.result, it->second);
      any_duped = true;
    }
  }
  f.body.ops.insert(f.body.ops.begin(),
                    std::make_move_iterator(entry_ops.begin()),
                    std::make_move_iterator(entry_ops.end()));
  return any_moved || any_duped;
}

// --- common subexpression elimination ----------------------------------------

using CseKey = std::tuple<ArithOp, ValueId, ValueId, int>;

bool commutative(ArithOp op) {
  switch (op) {
  case ArithOp::Add:
  case ArithOp::Mul:
  case ArithOp::And:
  case ArithOp::Or:
  case ArithOp::Xor:
    return true;
  default:
    return false;
  }
}

bool cse_block(Function &f, Block &b, std::vector<std::map<CseKey, ValueId>> &scopes) {
  bool changed = false;
  scopes.emplace_back();
  for (std::size_t i = 0; i < b.ops.size();) {
    Operation &op = b.ops[i];
    if (op.kind == OpKind::Arith) {
      ValueId l = op.operands[0], r = op.operands[1];
      if (commutative(op.arith) && r < l)
        std::swap(l, r);
      CseKey key{op.arith, l, r, f.type_of(op.results[0]).width};
      ValueId prior = kInvalidValue;
      for (auto it = scopes.rbegin(); it != scopes.rend(); ++it) {
        auto hit = it->find(key);
        if (hit != it->end()) {
          prior = hit->second;
          break;
        }
      }
      if (prior != kInvalidValue) {
        replace_uses(f.body, op.results[0], prior);
        b.ops.erase(b.ops.begin() + static_cast<std::ptrdiff_t>(i));
        changed = true;
        continue;
      }
      scopes.back().emplace(key, op.results[0]);
    }
    for (Block &region : op.regions)
      changed |= cse_block(f, region, scopes);
    ++i;
  }
  scopes.pop_back();
  return changed;
}

// --- loop-invariant code motion ----------------------------------------------

bool licm_block(Function &f, Block &b) {
  bool changed = false;
  for (std::size_t i = 0; i < b.ops.size(); ++i) {
    for (Block &r : b.ops[i].regions)
      changed |= licm_block(f, r);
    if (b.ops[i].kind != OpKind::For)
      continue;
    for (;;) {
      // references into b.ops go stale on insertion; re-resolve every round
      Block &body = b.ops[i].regions[0];
      std::unordered_set<ValueId> inside;
      collect_defs(body, inside);
      std::size_t j = 0;
      for (; j < body.ops.size(); ++j) {
        const Operation &cand = body.ops[j];
        if (cand.kind == OpKind::Arith && !inside.count(cand.operands[0]) &&
            !inside.count(cand.operands[1]))
          break;
      }
      if (j == body.ops.size())
        break;
      Operation lifted = std::move(body.ops[j]);
      body.ops.erase(body.ops.begin() + static_cast<std::ptrdiff_t>(j));
      b.ops.insert(b.ops.begin() + static_cast<std::ptrdiff_t>(i),
                   std::move(lifted));
      ++i;  // the for op shifted right
      changed = true;
    }
  }
  return changed;
}

// --- dead pure op elimination -------------------------------------------------

bool dce(Function &f, Block &b, const std::unordered_map<ValueId, std::size_t> &uses) {
  bool changed = false;
  for (std::size_t i = 0; i < b.ops.size();) {
    Operation &op = b.ops[i];
    for (Block &r : op.regions)
      changed |= dce(f, r, uses);
    bool dead = (op.kind == OpKind::Const || op.kind == OpKind::Arith);
    if (dead)
      for (ValueId res : op.results)
        if (uses.count(res))
          dead = false;
    if (dead) {
      b.ops.erase(b.ops.begin() + static_cast<std::ptrdiff_t>(i));
      changed = true;
      continue;
    }
    ++i;
  }
  return changed;
}

bool dce_function(Function &f) {
  bool any = false;
  for (;;) {
    std::unordered_map<ValueId, std::size_t> uses;
    walk_ops(f.body, [&](const Operation &op) {
      for (ValueId v : op.operands)
        ++uses[v];
    });
    if (!dce(f, f.body, uses))
      return any;
    any = true;
  }
}

} // namespace

void canonicalize(Program &p) {
  for (Function &f : p.functions) {
    while (fold_loops(f, f.body)) {
    }
    for (int round = 0; round < 32; ++round) {
      bool changed = false;
      changed |= unique_consts(f);
      std::vector<std::map<CseKey, ValueId>> scopes;
      changed |= cse_block(f, f.body, scopes);
      changed |= licm_block(f, f.body);
      changed |= dce_function(f);
      if (!changed)
        break;
    }
  }
}

} // namespace acckit
