#include "acckit/ir.hpp"

#include <algorithm>
#include <cassert>
#include <unordered_map>

namespace acckit {

std::string to_string(const ValueType &t) {
  switch (t.kind) {
  case ValueType::Kind::Int:
    return "i" + std::to_string(t.width);
  case ValueType::Kind::State:
    return "state<\"" + t.accel + "\">";
  case ValueType::Kind::Token:
    return "token<\"" + t.accel + "\">";
  }
  return "?";
}

const char *arith_name(ArithOp op) {
  switch (op) {
  case ArithOp::Add: return "add";
  case ArithOp::Sub: return "sub";
  case ArithOp::Mul: return "mul";
  case ArithOp::And: return "and";
  case ArithOp::Or:  return "or";
  case ArithOp::Xor: return "xor";
  case ArithOp::Shl: return "shl";
  case ArithOp::Shr: return "shr";
  }
  return "?";
}

std::optional<ArithOp> arith_from_name(std::string_view name) {
  static const std::pair<std::string_view, ArithOp> table[] = {
      {"add", ArithOp::Add}, {"sub", ArithOp::Sub}, {"mul", ArithOp::Mul},
      {"and", ArithOp::And}, {"or", ArithOp::Or},   {"xor", ArithOp::Xor},
      {"shl", ArithOp::Shl}, {"shr", ArithOp::Shr},
  };
  for (auto [n, op] : table)
    if (n == name)
      return op;
  return std::nullopt;
}

std::optional<ValueId> setup_input(const Operation &op) {
  assert(op.kind == OpKind::Setup);
  if (!op.from_state)
    return std::nullopt;
  return op.operands.back();
}

ValueId launch_state(const Operation &op) {
  assert(op.kind == OpKind::Launch);
  return op.operands.front();
}

std::optional<ValueId> launch_ops_value(const Operation &op) {
  assert(op.kind == OpKind::Launch);
  if (!op.ops_operand)
    return std::nullopt;
  return op.operands.back();
}

std::span<const ValueId> field_operands(const Operation &op) {
  switch (op.kind) {
  case OpKind::Setup:
    return {op.operands.data(), op.fields.size()};
  case OpKind::Launch:
    return {op.operands.data() + 1, op.fields.size()};
  default:
    return {};
  }
}

std::span<ValueId> field_operands(Operation &op) {
  switch (op.kind) {
  case OpKind::Setup:
    return {op.operands.data(), op.fields.size()};
  case OpKind::Launch:
    return {op.operands.data() + 1, op.fields.size()};
  default:
    return {};
  }
}

bool is_clobber(const Operation &op) {
  return op.kind == OpKind::ExternCall &&
         op.effects.value_or(Effects::All) == Effects::All;
}

bool op_contains_clobber(const Operation &op) {
  if (is_clobber(op))
    return true;
  for (const auto &r : op.regions)
    for (const auto &inner : r.ops)
      if (op_contains_clobber(inner))
        return true;
  return false;
}

std::int64_t for_trip_count(const Operation &op) {
  assert(op.kind == OpKind::For && op.step > 0);
  if (op.upper <= op.lower)
    return 0;
  return (op.upper - op.lower + op.step - 1) / op.step;
}

bool Program::declares_accel(std::string_view name) const {
  return std::find(accels.begin(), accels.end(), name) != accels.end();
}

namespace {

class Matcher {
public:
  bool blocks(const Block &a, const Block &b) {
    if (a.args.size() != b.args.size() || a.ops.size() != b.ops.size())
      return false;
    for (std::size_t i = 0; i < a.args.size(); ++i)
      if (!bind(a.args[i], b.args[i]))
        return false;
    for (std::size_t i = 0; i < a.ops.size(); ++i)
      if (!ops(a.ops[i], b.ops[i]))
        return false;
    return true;
  }

  void set_functions(const Function &a, const Function &b) {
    fa_ = &a;
    fb_ = &b;
  }

private:
  bool bind(ValueId a, ValueId b) {
    if (fa_->type_of(a) != fb_->type_of(b))
      return false;
    auto [it, inserted] = map_.emplace(a, b);
    return inserted ? true : it->second == b;
  }

  bool mapped(ValueId a, ValueId b) {
    auto it = map_.find(a);
    return it != map_.end() && it->second == b;
  }

  bool ops(const Operation &a, const Operation &b) {
    if (a.kind != b.kind || a.fields != b.fields || a.symbol != b.symbol ||
        a.arith != b.arith || a.literal != b.literal ||
        a.ops_attr != b.ops_attr || a.effects != b.effects ||
        a.lower != b.lower || a.upper != b.upper || a.step != b.step ||
        a.from_state != b.from_state || a.ops_operand != b.ops_operand)
      return false;
    if (a.operands.size() != b.operands.size() ||
        a.results.size() != b.results.size() ||
        a.regions.size() != b.regions.size())
      return false;
    for (std::size_t i = 0; i < a.operands.size(); ++i)
      if (!mapped(a.operands[i], b.operands[i]))
        return false;
    for (std::size_t i = 0; i < a.results.size(); ++i)
      if (!bind(a.results[i], b.results[i]))
        return false;
    for (std::size_t i = 0; i < a.regions.size(); ++i)
      if (!blocks(a.regions[i], b.regions[i]))
        return false;
    return true;
  }

  const Function *fa_ = nullptr;
  const Function *fb_ = nullptr;
  std::unordered_map<ValueId, ValueId> map_;
};

} // namespace

bool structurally_equal(const Function &a, const Function &b) {
  if (a.name != b.name)
    return false;
  Matcher m;
  m.set_functions(a, b);
  return m.blocks(a.body, b.body);
}

bool structurally_equal(const Program &a, const Program &b) {
  if (a.accels != b.accels || a.functions.size() != b.functions.size())
    return false;
  for (std::size_t i = 0; i < a.functions.size(); ++i)
    if (!structurally_equal(a.functions[i], b.functions[i]))
      return false;
  return true;
}

void replace_uses(Block &b, ValueId from, ValueId to) {
  walk_ops(b, [&](Operation &op) {
    for (auto &v : op.operands)
      if (v == from)
        v = to;
  });
}

} // namespace acckit
