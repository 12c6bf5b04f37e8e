#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

// Core SSA IR for host programs that configure, launch and await jobs on
// attached accelerators. Control flow is structured only: `for` with literal
// bounds and iteration-carried values, `if` with two regions joined by yields.
// Accelerator interaction follows a three-phase model: `setup` stages register
// writes and produces a state value, `launch` consumes a state and produces a
// token, `await` consumes the token.

namespace acckit {

using ValueId = std::uint32_t;
inline constexpr ValueId kInvalidValue = 0xffffffffu;

// ---------------------------------------------------------------------------
// Types
// ---------------------------------------------------------------------------

struct ValueType {
  enum class Kind : std::uint8_t { Int, State, Token };

  Kind kind = Kind::Int;
  int width = 32;     // Int only, in bits (1..64)
  std::string accel;  // State/Token only

  static ValueType integer(int bits) { return {Kind::Int, bits, {}}; }
  static ValueType state(std::string accel) {
    return {Kind::State, 0, std::move(accel)};
  }
  static ValueType token(std::string accel) {
    return {Kind::Token, 0, std::move(accel)};
  }

  bool is_int() const { return kind == Kind::Int; }
  bool is_state() const { return kind == Kind::State; }
  bool is_token() const { return kind == Kind::Token; }

  friend bool operator==(const ValueType &, const ValueType &) = default;
};

std::string to_string(const ValueType &t);

// ---------------------------------------------------------------------------
// Operations
// ---------------------------------------------------------------------------

enum class OpKind : std::uint8_t {
  Const,
  Arith,
  Setup,
  Launch,
  Await,
  For,
  If,
  Yield,
  ExternCall,
  HostWork,
};

enum class ArithOp : std::uint8_t { Add, Sub, Mul, And, Or, Xor, Shl, Shr };

// Effects annotation for extern-call. An unannotated call behaves like All.
enum class Effects : std::uint8_t { All, None };

const char *arith_name(ArithOp op);
std::optional<ArithOp> arith_from_name(std::string_view name);

struct Operation;

struct Block {
  std::vector<ValueId> args;  // for-body: induction var first, then iter args
  std::vector<Operation> ops;
};

// One struct for all op kinds; the unused members stay empty. Operand layout:
//   Const      results={v}                 literal = value
//   Arith      operands={lhs,rhs} results={v}
//   Setup      operands=[field values..., input state if from_state]
//              results={state}, fields names the written registers in order
//   Launch     operands=[state, field values..., ops value if ops_operand]
//              results={token}, workload either ops_attr or trailing operand
//   Await      operands={token}
//   For        operands=[iter inits...], results=[carried outs...],
//              regions={body}, literal bounds lower/upper/step
//   If         operands={cond}, results=[joined values...], regions={then,else}
//   Yield      operands=[values...] (terminator of for/if regions)
//   ExternCall operands=[ints...], results=[ints...], symbol = callee
//   HostWork   literal = cycles
struct Operation {
  OpKind kind{};
  std::uint32_t uid = 0;  // unique within a function; not part of equality
  std::vector<ValueId> operands;
  std::vector<ValueId> results;

  std::vector<std::string> fields;  // setup writes / launch-semantic writes
  std::string symbol;               // setup/launch: accel name; extern-call: callee
  ArithOp arith{};
  std::int64_t literal = 0;
  std::optional<std::int64_t> ops_attr;
  std::optional<Effects> effects;
  std::int64_t lower = 0, upper = 0, step = 1;
  bool from_state = false;   // setup carries a trailing input-state operand
  bool ops_operand = false;  // launch carries a trailing workload operand
  std::vector<Block> regions;

  int line = 0, col = 0;  // parse location, 0 when built in memory

  std::size_t field_count() const { return fields.size(); }
};

// Setup/launch accessors (valid only for the respective kind).
std::optional<ValueId> setup_input(const Operation &op);
ValueId launch_state(const Operation &op);
std::optional<ValueId> launch_ops_value(const Operation &op);
std::span<const ValueId> field_operands(const Operation &op);
std::span<ValueId> field_operands(Operation &op);

// True for extern-call whose effects are All (explicitly or by default).
bool is_clobber(const Operation &op);
// True if the op, or anything nested in its regions, is a clobber.
bool op_contains_clobber(const Operation &op);

// Static trip count of a `for` op (bounds are literals). Half-open interval.
std::int64_t for_trip_count(const Operation &op);

// ---------------------------------------------------------------------------
// Functions and programs
// ---------------------------------------------------------------------------

struct Function {
  std::string name;
  Block body;
  std::vector<ValueType> value_types;  // indexed by ValueId
  std::uint32_t next_uid = 1;

  ValueId new_value(ValueType t) {
    value_types.push_back(std::move(t));
    return static_cast<ValueId>(value_types.size() - 1);
  }
  const ValueType &type_of(ValueId v) const { return value_types[v]; }
  std::uint32_t take_uid() { return next_uid++; }
};

struct Program {
  std::vector<std::string> accels;  // declared accelerator names
  std::vector<Function> functions;

  bool declares_accel(std::string_view name) const;
};

// Structural equality modulo value numbering and uids. Walks both programs in
// lockstep building a value bijection; region structure, op kinds, attributes
// and operand wiring must all match.
bool structurally_equal(const Program &a, const Program &b);
bool structurally_equal(const Function &a, const Function &b);

// ---------------------------------------------------------------------------
// Traversal helpers
// ---------------------------------------------------------------------------

// Depth-first pre-order visit of every op in the block, including regions.
template <typename Fn> void walk_ops(Block &b, Fn &&fn) {
  for (auto &op : b.ops) {
    fn(op);
    for (auto &r : op.regions)
      walk_ops(r, fn);
  }
}
template <typename Fn> void walk_ops(const Block &b, Fn &&fn) {
  for (auto &op : b.ops) {
    fn(op);
    for (auto &r : op.regions)
      walk_ops(r, fn);
  }
}

// Replace every use of `from` with `to` in the subtree (operands only).
void replace_uses(Block &b, ValueId from, ValueId to);

} // namespace acckit
