#include <map>
#include <set>
#include <string_view>
#include <unordered_map>
#include <unordered_set>

#include "acckit/verify.hpp"

namespace acckit {

std::string Diagnostic::str() const {
  std::string s = rule + ": " + message;
  if (line > 0)
    s += " (at " + std::to_string(line) + ":" + std::to_string(col) + ")";
  return s;
}

namespace {

// Sentinel for "some newer state exists but no single value names it".
constexpr ValueId kUnknownState = kInvalidValue - 1;

class Checker {
public:
  Checker(const Program &p, const Function &f,
          std::vector<Diagnostic> &diags)
      : prog_(p), fn_(f), diags_(diags) {}

  void run() {
    if (!fn_.body.args.empty())
      diag(nullptr, "for-invalid", "function body takes no arguments");
    std::vector<ValueId> scope;
    check_block(fn_.body, nullptr, scope);
    check_tokens();
  }

private:
  void diag(const Operation *op, std::string rule, std::string msg) {
    Diagnostic d{std::move(rule), std::move(msg), 0, 0};
    if (op) {
      d.line = op->line;
      d.col = op->col;
    }
    diags_.push_back(std::move(d));
  }

  bool valid_id(ValueId v) const { return v < fn_.value_types.size(); }

  bool define(const Operation *op, ValueId v) {
    if (!valid_id(v)) {
      diag(op, "ssa-unique", "definition of out-of-range value id");
      return false;
    }
    if (defined_.count(v)) {
      diag(op, "ssa-unique", "value defined more than once");
      return false;
    }
    const ValueType &t = fn_.type_of(v);
    if (t.is_int() && (t.width < 1 || t.width > 64))
      diag(op, "integer-width",
           "integer width " + std::to_string(t.width) + " outside 1..64");
    if (!t.is_int() && !prog_.declares_accel(t.accel))
      diag(op, "accel-undeclared",
           "type references undeclared accelerator \"" + t.accel + "\"");
    defined_.insert(v);
    return true;
  }

  bool check_use(const Operation *op, ValueId v) {
    if (!valid_id(v) || !defined_.count(v)) {
      diag(op, "dominance", "use of value not dominated by a definition");
      return false;
    }
    return true;
  }

  void check_field_names(const Operation &op, const char *rule) {
    std::set<std::string_view> seen;
    for (const auto &f : op.fields)
      if (!seen.insert(f).second)
        diag(&op, rule, "register \"" + f + "\" written twice in one op");
  }

  const ValueType *use_type(const Operation *op, ValueId v) {
    return check_use(op, v) ? &fn_.type_of(v) : nullptr;
  }

  // -- live-state tracking ---------------------------------------------------

  using StateEnv = std::map<std::string, ValueId>;

  void note_state_def(StateEnv &env, ValueId v) {
    env[fn_.type_of(v).accel] = v;
  }

  void check_state_use(const Operation *op, StateEnv &env, ValueId v) {
    const std::string &a = fn_.type_of(v).accel;
    auto it = env.find(a);
    if (it == env.end() || it->second != v)
      diag(op, "live-state",
           "state of \"" + a + "\" used after a newer configuration exists");
  }

  static void collect_setup_accels(const Block &b,
                                   std::set<std::string> &out) {
    walk_ops(b, [&](const Operation &op) {
      if (op.kind == OpKind::Setup)
        out.insert(op.symbol);
    });
  }

  // -- main walk --------------------------------------------------------------

  // `parent` is the op owning this region (null for the function body).
  // `scope` collects values defined in this block so they can be retired.
  void check_block(const Block &b, const Operation *parent,
                   std::vector<ValueId> &scope) {
    StateEnv env_local;
    StateEnv &env = parent ? *env_stack_.back() : env_root_;
    for (ValueId arg : b.args) {
      if (define(parent, arg))
        scope.push_back(arg);
      if (valid_id(arg) && fn_.type_of(arg).is_state())
        note_state_def(env, arg);
    }
    (void)env_local;
    for (std::size_t i = 0; i < b.ops.size(); ++i) {
      const Operation &op = b.ops[i];
      bool is_last = i + 1 == b.ops.size();
      if (op.kind == OpKind::Yield && (!parent || !is_last ||
                                       (parent->kind != OpKind::For &&
                                        parent->kind != OpKind::If))) {
        diag(&op, "yield-invalid",
             "yield must terminate a for/if region");
        continue;
      }
      check_op(op, env, scope);
    }
  }

  void enter_region(const Block &b, const Operation *parent, StateEnv &env) {
    env_stack_.push_back(&env);
    std::vector<ValueId> scope;
    check_block(b, parent, scope);
    for (ValueId v : scope)
      defined_.erase(v);
    env_stack_.pop_back();
  }

  void check_op(const Operation &op, StateEnv &env,
                std::vector<ValueId> &scope) {
    // State freshness for every state-typed operand, before any update.
    for (ValueId v : op.operands)
      if (valid_id(v) && defined_.count(v) && fn_.type_of(v).is_state())
        check_state_use(&op, env, v);
    if (op.effects && op.kind != OpKind::ExternCall)
      diag(&op, "effects-invalid", "effects only applies to extern-call");

    switch (op.kind) {
    case OpKind::Const: {
      if (!op.operands.empty() || op.results.size() != 1) {
        diag(&op, "const-invalid", "const takes no operands, one result");
        break;
      }
      if (valid_id(op.results[0]) && !fn_.type_of(op.results[0]).is_int())
        diag(&op, "const-invalid", "const result must be an integer");
      break;
    }
    case OpKind::Arith: {
      if (op.operands.size() != 2 || op.results.size() != 1) {
        diag(&op, "arith-invalid", "arith takes two operands, one result");
        break;
      }
      const ValueType *l = use_type(&op, op.operands[0]);
      const ValueType *r = use_type(&op, op.operands[1]);
      if (l && r) {
        if (!l->is_int() || !(*l == *r))
          diag(&op, "arith-invalid",
               "arith operands must be integers of equal width");
        else if (valid_id(op.results[0]) &&
                 !(fn_.type_of(op.results[0]) == *l))
          diag(&op, "arith-invalid", "arith result width mismatch");
      }
      break;
    }
    case OpKind::Setup: {
      if (!prog_.declares_accel(op.symbol)) {
        diag(&op, "accel-undeclared",
             "setup on undeclared accelerator \"" + op.symbol + "\"");
        break;
      }
      std::size_t expect = op.fields.size() + (op.from_state ? 1 : 0);
      if (op.operands.size() != expect || op.results.size() != 1) {
        diag(&op, "setup-invalid", "setup operand/result arity mismatch");
        break;
      }
      check_field_names(op, "setup-invalid");
      for (ValueId v : field_operands(op)) {
        const ValueType *t = use_type(&op, v);
        if (t && !t->is_int())
          diag(&op, "setup-invalid", "field value must be an integer");
      }
      if (op.from_state) {
        const ValueType *t = use_type(&op, op.operands.back());
        if (t && !(t->is_state() && t->accel == op.symbol))
          diag(&op, "setup-invalid",
               "input state must be state<\"" + op.symbol + "\">");
      }
      if (valid_id(op.results[0])) {
        const ValueType &t = fn_.type_of(op.results[0]);
        if (!(t.is_state() && t.accel == op.symbol))
          diag(&op, "setup-invalid",
               "setup result must be state<\"" + op.symbol + "\">");
      }
      break;
    }
    case OpKind::Launch: {
      std::size_t expect = 1 + op.fields.size() + (op.ops_operand ? 1 : 0);
      if (op.operands.size() != expect || op.results.size() != 1) {
        diag(&op, "launch-invalid", "launch operand/result arity mismatch");
        break;
      }
      check_field_names(op, "launch-invalid");
      const ValueType *st = use_type(&op, op.operands[0]);
      if (st && !st->is_state())
        diag(&op, "launch-invalid", "launch target must be a state value");
      for (ValueId v : field_operands(op)) {
        const ValueType *t = use_type(&op, v);
        if (t && !t->is_int())
          diag(&op, "launch-invalid", "field value must be an integer");
      }
      if (op.ops_operand) {
        const ValueType *t = use_type(&op, op.operands.back());
        if (t && !t->is_int())
          diag(&op, "launch-invalid", "ops operand must be an integer");
      } else if (!op.ops_attr || *op.ops_attr < 0) {
        diag(&op, "launch-invalid", "launch needs a non-negative ops count");
      }
      if (valid_id(op.results[0]) && st && st->is_state()) {
        const ValueType &t = fn_.type_of(op.results[0]);
        if (!(t.is_token() && t.accel == st->accel))
          diag(&op, "launch-invalid",
               "launch result must be token<\"" + st->accel + "\">");
      }
      break;
    }
    case OpKind::Await: {
      if (op.operands.size() != 1 || !op.results.empty()) {
        diag(&op, "await-invalid", "await takes one token, no results");
        break;
      }
      const ValueType *t = use_type(&op, op.operands[0]);
      if (t && !t->is_token())
        diag(&op, "await-invalid", "await operand must be a token");
      break;
    }
    case OpKind::For: {
      if (op.step <= 0)
        diag(&op, "for-invalid", "loop step must be positive");
      if (op.regions.size() != 1) {
        diag(&op, "for-invalid", "for has exactly one region");
        break;
      }
      const Block &body = op.regions[0];
      if (body.args.size() != op.operands.size() + 1 ||
          op.results.size() != op.operands.size()) {
        diag(&op, "for-invalid",
             "iter arguments, initial values and results must correspond");
        break;
      }
      bool ok = true;
      if (valid_id(body.args[0]) &&
          !(fn_.type_of(body.args[0]) == ValueType::integer(64)))
        diag(&op, "for-invalid", "induction variable must be i64");
      for (std::size_t i = 0; i < op.operands.size(); ++i) {
        const ValueType *t = use_type(&op, op.operands[i]);
        if (!t) {
          ok = false;
          continue;
        }
        if (t->is_token()) {
          diag(&op, "token-use", "tokens may not be carried across loops");
          ok = false;
        }
        if (valid_id(body.args[i + 1]) &&
            !(fn_.type_of(body.args[i + 1]) == *t))
          diag(&op, "for-invalid", "iter argument type mismatch");
        if (valid_id(op.results[i]) && !(fn_.type_of(op.results[i]) == *t))
          diag(&op, "for-invalid", "loop result type mismatch");
      }

      std::set<std::string> reconfigured;
      collect_setup_accels(body, reconfigured);
      StateEnv body_env = env;
      for (const auto &a : reconfigured) {
        // Without an iteration-carried state, back-edge iterations would see
        // stale outer states; poison them inside the body.
        body_env[a] = kUnknownState;
      }
      enter_region(body, &op, body_env);

      for (const auto &a : reconfigured)
        env[a] = kUnknownState;
      for (ValueId r : op.results) {
        if (!define(&op, r))
          continue;
        scope.push_back(r);
        if (fn_.type_of(r).is_state())
          note_state_def(env, r);
      }
      if (ok)
        check_yield_types(op, body, "loop");
      return;  // results already defined
    }
    case OpKind::If: {
      if (op.operands.size() != 1) {
        diag(&op, "if-invalid", "if takes exactly one condition");
        break;
      }
      const ValueType *c = use_type(&op, op.operands[0]);
      if (c && !(c->is_int() && c->width == 1))
        diag(&op, "if-invalid", "condition must be i1");
      if (op.regions.size() != 2) {
        diag(&op, "if-invalid", "if has a then and an else region");
        break;
      }
      if (!op.regions[0].args.empty() || !op.regions[1].args.empty())
        diag(&op, "if-invalid", "if regions take no arguments");

      StateEnv then_env = env, else_env = env;
      enter_region(op.regions[0], &op, then_env);
      enter_region(op.regions[1], &op, else_env);

      StateEnv merged = env;
      auto merge_branch = [&](const StateEnv &branch) {
        for (const auto &[a, v] : branch) {
          auto base = env.find(a);
          if (base == env.end() || base->second != v)
            merged[a] = kUnknownState;
        }
      };
      merge_branch(then_env);
      merge_branch(else_env);
      env = std::move(merged);

      for (ValueId r : op.results) {
        if (!define(&op, r))
          continue;
        scope.push_back(r);
        if (fn_.type_of(r).is_state())
          note_state_def(env, r);
        if (fn_.type_of(r).is_token())
          diag(&op, "token-use", "tokens may not escape an if");
      }
      check_yield_types(op, op.regions[0], "then");
      check_yield_types(op, op.regions[1], "else");
      return;
    }
    case OpKind::Yield: {
      for (ValueId v : op.operands)
        check_use(&op, v);
      break;
    }
    case OpKind::ExternCall: {
      for (ValueId v : op.operands) {
        const ValueType *t = use_type(&op, v);
        if (t && !t->is_int())
          diag(&op, "call-invalid", "extern-call operands must be integers");
      }
      for (ValueId r : op.results)
        if (valid_id(r) && !fn_.type_of(r).is_int())
          diag(&op, "call-invalid", "extern-call results must be integers");
      break;
    }
    case OpKind::HostWork: {
      if (!op.operands.empty() || !op.results.empty())
        diag(&op, "hostwork-invalid", "host-work takes nothing");
      if (op.literal < 0)
        diag(&op, "hostwork-invalid", "cycles must be non-negative");
      break;
    }
    }

    for (auto &r : op.regions) {
      // Only for/if carry regions; anything else is malformed.
      if (op.kind != OpKind::For && op.kind != OpKind::If) {
        diag(&op, "for-invalid", "only for/if carry regions");
        break;
      }
      (void)r;
    }

    for (ValueId r : op.results) {
      if (!define(&op, r))
        continue;
      scope.push_back(r);
      if (fn_.type_of(r).is_state())
        note_state_def(env, r);
    }
  }

  void check_yield_types(const Operation &op, const Block &region,
                         const char *which) {
    if (region.ops.empty() || region.ops.back().kind != OpKind::Yield) {
      diag(&op, "yield-match",
           std::string(which) + " region must end in a yield");
      return;
    }
    const Operation &y = region.ops.back();
    if (y.operands.size() != op.results.size()) {
      diag(&y, "yield-match",
           std::string(which) + " yield arity differs from results");
      return;
    }
    for (std::size_t i = 0; i < y.operands.size(); ++i) {
      if (!valid_id(y.operands[i]) || !valid_id(op.results[i]))
        continue;
      if (!(fn_.type_of(y.operands[i]) == fn_.type_of(op.results[i])))
        diag(&y, "yield-match",
             std::string(which) + " yield type differs from result type");
    }
  }

  void check_tokens() {
    std::unordered_map<ValueId, int> awaits;
    walk_ops(fn_.body, [&](const Operation &op) {
      for (std::size_t i = 0; i < op.operands.size(); ++i) {
        ValueId v = op.operands[i];
        if (!valid_id(v) || !fn_.type_of(v).is_token())
          continue;
        if (op.kind == OpKind::Await && i == 0) {
          if (++awaits[v] == 2)
            diag(&op, "token-once", "token awaited more than once");
        } else {
          diag(&op, "token-use", "tokens may only be used by await");
        }
      }
    });
  }

  const Program &prog_;
  const Function &fn_;
  std::vector<Diagnostic> &diags_;
  std::unordered_set<ValueId> defined_;
  StateEnv env_root_;
  std::vector<StateEnv *> env_stack_;
};

} // namespace

std::vector<Diagnostic> verify(const Program &p) {
  std::vector<Diagnostic> diags;
  std::set<std::string> seen;
  for (const auto &a : p.accels)
    if (!seen.insert(a).second)
      diags.push_back({"accel-undeclared",
                       "accelerator \"" + a + "\" declared twice", 0, 0});
  for (const auto &f : p.functions) {
    Checker c(p, f, diags);
    c.run();
  }
  return diags;
}

} // namespace acckit
