#include <map>

#include "acckit/passes.hpp"
#include "common.hpp"

// trace: give every setup its statically-known predecessor state. The walk
// keeps one environment entry per accelerator — the newest state value — and
// clears it at opaque calls. Loops whose body reconfigures an accelerator
// get the incoming state threaded through as an iteration-carried value (so
// back-edge iterations have a name for "the state from last time"), and
// diverging if branches yield their final states into a joined if result.
// Nothing is reordered and no writes change, so the launch trace and the
// cycle accounting are untouched.

namespace acckit {
namespace {

using StateEnv = std::map<std::string, ValueId>;

class Tracer {
public:
  explicit Tracer(Function &f) : f_(f) {}

  void run() {
    StateEnv env;
    walk(f_.body, env);
  }

private:
  void walk(Block &b, StateEnv &env) {
    for (ValueId arg : b.args)
      if (f_.type_of(arg).is_state())
        env[f_.type_of(arg).accel] = arg;
    for (std::size_t i = 0; i < b.ops.size(); ++i) {
      Operation &op = b.ops[i];
      switch (op.kind) {
      case OpKind::Setup: {
        auto it = env.find(op.symbol);
        if (!op.from_state && it != env.end()) {
          op.operands.push_back(it->second);
          op.from_state = true;
        }
        env[op.symbol] = op.results[0];
        break;
      }
      case OpKind::ExternCall:
        if (is_clobber(op))
          env.clear();
        break;
      case OpKind::For:
        walk_for(op, env);
        break;
      case OpKind::If:
        walk_if(op, env);
        break;
      default:
        break;
      }
    }
  }

  void walk_for(Operation &op, StateEnv &env) {
    Block &body = op.regions[0];
    auto reconfigured = detail::setup_accels(body);

    // accelerators whose incoming state can be threaded through the loop
    std::vector<std::string> thread;
    bool body_clobbers = false;
    for (const Operation &inner : body.ops)
      body_clobbers |= op_contains_clobber(inner);
    for (const auto &[accel, state] : env) {
      if (!reconfigured.count(accel) || body_clobbers)
        continue;
      bool carried = false;
      for (std::size_t k = 1; k < body.args.size(); ++k) {
        const ValueType &t = f_.type_of(body.args[k]);
        if (t.is_state() && t.accel == accel)
          carried = true;
      }
      if (!carried)
        thread.push_back(accel);
    }

    struct Pending {
      std::string accel;
      ValueId arg, result;
    };
    std::vector<Pending> pending;
    for (const std::string &accel : thread) {
      ValueId outer = env.at(accel);
      ValueId arg = f_.new_value(ValueType::state(accel));
      ValueId result = f_.new_value(ValueType::state(accel));
      body.args.push_back(arg);
      op.operands.push_back(outer);
      op.results.push_back(result);
      replace_uses(body, outer, arg);
      pending.push_back({accel, arg, result});
    }

    StateEnv body_env = env;
    for (const auto &accel : reconfigured)
      body_env.erase(accel);
    for (ValueId arg : body.args)
      if (f_.type_of(arg).is_state())
        body_env[f_.type_of(arg).accel] = arg;
    walk(body, body_env);

    if (!pending.empty()) {
      detail::ensure_yield(body);
      Operation &yield = body.ops.back();
      for (const Pending &pe : pending)
        yield.operands.push_back(body_env.at(pe.accel));
    }

    for (const auto &accel : reconfigured)
      env.erase(accel);
    for (std::size_t k = 0; k < op.results.size(); ++k)
      if (f_.type_of(op.results[k]).is_state())
        env[f_.type_of(op.results[k]).accel] = op.results[k];
  }

  void walk_if(Operation &op, StateEnv &env) {
    StateEnv env_then = env, env_else = env;
    walk(op.regions[0], env_then);
    walk(op.regions[1], env_else);

    // states already joined by hand keep their result
    std::map<std::string, ValueId> joined;
    for (ValueId r : op.results)
      if (f_.type_of(r).is_state())
        joined[f_.type_of(r).accel] = r;

    StateEnv merged;
    for (const auto &[accel, vt] : env_then) {
      auto fe = env_else.find(accel);
      if (fe == env_else.end())
        continue;
      ValueId vf = fe->second;
      // an if result of state type supersedes both branch values, even
      // when the branches agree
      auto pre = joined.find(accel);
      if (pre != joined.end()) {
        merged[accel] = pre->second;
        continue;
      }
      if (vt == vf) {
        merged[accel] = vt;
        continue;
      }
      detail::ensure_yield(op.regions[0]);
      detail::ensure_yield(op.regions[1]);
      Operation &yt = op.regions[0].ops.back();
      Operation &yf = op.regions[1].ops.back();
      // only join when both yields still mirror the result list exactly
      if (yt.operands.size() != op.results.size() ||
          yf.operands.size() != op.results.size())
        continue;
      ValueId res = f_.new_value(ValueType::state(accel));
      yt.operands.push_back(vt);
      yf.operands.push_back(vf);
      op.results.push_back(res);
      merged[accel] = res;
    }
    env = std::move(merged);
  }

  Function &f_;
};

} // namespace

void trace_states(Program &p) {
  for (Function &f : p.functions) {
    Tracer t(f);
    t.run();
  }
}

} // namespace acckit
