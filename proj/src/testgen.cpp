#include <algorithm>
#include <map>
#include <random>
#include <set>
#include <string>
#include <vector>

#include "acckit/testgen.hpp"

// Random-but-valid program construction. The generator mirrors the
// verifier's environment: it only consumes the newest state of an
// accelerator, drops states the verifier would poison (reconfigured inside
// an unthreaded region, or behind a clobbering call), keeps tokens local
// to the region that made them, and yields exactly the types each region
// promises. Everything integer is 64 bits wide to keep arithmetic typing
// trivial.

namespace acckit {
namespace {

struct Scope {
  std::vector<ValueId> ints;
  std::map<std::string, ValueId> states; // newest usable state per accel
  std::vector<ValueId> tokens;           // this region's un-awaited tokens
  std::set<std::string> touched;         // accels reconfigured here
  bool clobbered = false;
};

class Gen {
public:
  Gen(std::uint64_t seed, const AccelRegistry &reg, const GenOptions &opts)
      : rng_(seed), opts_(opts) {
    for (const auto &[name, desc] : reg.all()) {
      accels_.push_back(&desc);
      if (opts_.single_accel)
        break;
    }
  }

  Program run() {
    Program p;
    for (const auto *d : accels_)
      p.accels.push_back(d->name);
    Function f;
    f.name = "main";
    fn_ = &f;
    Scope sc;
    emit_block(f.body, sc, opts_.block_budget, 0);
    p.functions.push_back(std::move(f));
    return p;
  }

private:
  int pick(int lo, int hi) {
    return std::uniform_int_distribution<int>(lo, hi)(rng_);
  }
  bool coin(double p) {
    return std::uniform_real_distribution<double>(0.0, 1.0)(rng_) < p;
  }
  const AcceleratorDescriptor *pick_accel() {
    return accels_[static_cast<std::size_t>(
        pick(0, static_cast<int>(accels_.size()) - 1))];
  }

  ValueId emit_const(Block &b, Scope &sc, std::int64_t value) {
    Operation op;
    op.kind = OpKind::Const;
    op.uid = fn_->take_uid();
    op.literal = value;
    op.results.push_back(fn_->new_value(ValueType::integer(64)));
    b.ops.push_back(std::move(op));
    sc.ints.push_back(b.ops.back().results[0]);
    return b.ops.back().results[0];
  }

  ValueId any_int(Block &b, Scope &sc) {
    if (sc.ints.empty() || coin(0.2))
      return emit_const(b, sc, pick(-4, 100));
    return sc.ints[static_cast<std::size_t>(
        pick(0, static_cast<int>(sc.ints.size()) - 1))];
  }

  std::vector<std::string> pick_fields(const AcceleratorDescriptor &d,
                                       int lo, int hi) {
    std::vector<std::string> names;
    for (const auto &fs : d.fields)
      names.push_back(fs.name);
    std::shuffle(names.begin(), names.end(), rng_);
    const int want = std::min<int>(pick(lo, hi),
                                   static_cast<int>(names.size()));
    names.resize(static_cast<std::size_t>(std::max(want, 0)));
    return names;
  }

  void emit_setup(Block &b, Scope &sc) {
    const auto *d = pick_accel();
    Operation op;
    op.kind = OpKind::Setup;
    op.uid = fn_->take_uid();
    op.symbol = d->name;
    for (auto &name : pick_fields(*d, 1, 3)) {
      op.fields.push_back(name);
      op.operands.push_back(any_int(b, sc));
    }
    auto live = sc.states.find(d->name);
    if (live != sc.states.end() && coin(0.7)) {
      op.from_state = true;
      op.operands.push_back(live->second);
    }
    op.results.push_back(fn_->new_value(ValueType::state(d->name)));
    sc.states[d->name] = op.results[0];
    sc.touched.insert(d->name);
    b.ops.push_back(std::move(op));
  }

  void emit_launch(Block &b, Scope &sc) {
    std::vector<std::string> live;
    for (const auto &[accel, v] : sc.states)
      live.push_back(accel);
    if (live.empty())
      return;
    const std::string &accel = live[static_cast<std::size_t>(
        pick(0, static_cast<int>(live.size()) - 1))];
    Operation op;
    op.kind = OpKind::Launch;
    op.uid = fn_->take_uid();
    op.symbol = accel;
    op.operands.push_back(sc.states.at(accel));
    const auto *d = nullptr_safe_find(accel);
    if (d && coin(0.3)) {
      for (auto &name : pick_fields(*d, 1, 2)) {
        op.fields.push_back(name);
        op.operands.push_back(any_int(b, sc));
      }
      sc.touched.insert(accel);
    }
    if (coin(0.75)) {
      op.ops_attr = pick(1, 2048);
    } else {
      op.ops_operand = true;
      op.operands.push_back(emit_const(b, sc, pick(1, 2048)));
    }
    op.results.push_back(fn_->new_value(ValueType::token(accel)));
    sc.tokens.push_back(op.results[0]);
    b.ops.push_back(std::move(op));
  }

  void emit_await(Block &b, Scope &sc) {
    if (sc.tokens.empty())
      return;
    const std::size_t at = static_cast<std::size_t>(
        pick(0, static_cast<int>(sc.tokens.size()) - 1));
    Operation op;
    op.kind = OpKind::Await;
    op.uid = fn_->take_uid();
    op.operands.push_back(sc.tokens[at]);
    sc.tokens.erase(sc.tokens.begin() + static_cast<std::ptrdiff_t>(at));
    b.ops.push_back(std::move(op));
  }

  void emit_call(Block &b, Scope &sc) {
    static const char *const callees[] = {"poke", "query", "mix"};
    Operation op;
    op.kind = OpKind::ExternCall;
    op.uid = fn_->take_uid();
    op.symbol = callees[pick(0, 2)];
    const int nargs = pick(0, 2);
    for (int i = 0; i < nargs; ++i)
      op.operands.push_back(any_int(b, sc));
    const int nres = pick(0, 2);
    for (int i = 0; i < nres; ++i)
      op.results.push_back(fn_->new_value(ValueType::integer(64)));
    if (opts_.allow_clobbers && coin(0.3)) {
      op.effects = Effects::All;
      sc.states.clear();
      sc.clobbered = true;
    } else {
      op.effects = Effects::None;
    }
    for (ValueId r : op.results)
      sc.ints.push_back(r);
    b.ops.push_back(std::move(op));
  }

  void emit_hostwork(Block &b, Scope &sc) {
    (void)sc;
    Operation op;
    op.kind = OpKind::HostWork;
    op.uid = fn_->take_uid();
    op.literal = pick(1, 8);
    b.ops.push_back(std::move(op));
  }

  void emit_arith(Block &b, Scope &sc) {
    Operation op;
    op.kind = OpKind::Arith;
    op.uid = fn_->take_uid();
    op.arith = static_cast<ArithOp>(pick(0, 7));
    op.operands.push_back(any_int(b, sc));
    op.operands.push_back(any_int(b, sc));
    op.results.push_back(fn_->new_value(ValueType::integer(64)));
    sc.ints.push_back(op.results[0]);
    b.ops.push_back(std::move(op));
  }

  // restores a usable newest state inside a region that promised to yield
  // one but lost it to a clobber
  ValueId restore_state(Block &b, Scope &sc, const std::string &accel) {
    const auto *d = nullptr_safe_find(accel);
    Operation op;
    op.kind = OpKind::Setup;
    op.uid = fn_->take_uid();
    op.symbol = accel;
    if (d && !d->fields.empty()) {
      op.fields.push_back(d->fields.front().name);
      op.operands.push_back(any_int(b, sc));
    }
    op.results.push_back(fn_->new_value(ValueType::state(accel)));
    ValueId fresh = op.results[0];
    sc.states[accel] = fresh;
    sc.touched.insert(accel);
    b.ops.push_back(std::move(op));
    return fresh;
  }

  void emit_for(Block &b, Scope &sc, int depth) {
    const int trips = pick(0, opts_.max_trip);
    Operation op;
    op.kind = OpKind::For;
    op.uid = fn_->take_uid();
    op.lower = pick(0, 3);
    op.step = pick(1, 2);
    op.upper = op.lower + trips * op.step;
    Block body;
    body.args.push_back(fn_->new_value(ValueType::integer(64)));

    Scope inner;
    inner.ints = sc.ints; // outer ints stay visible inside the region
    inner.ints.push_back(body.args[0]);

    std::vector<ValueId> carried_ints;
    const int nints = sc.ints.empty() ? 0 : pick(0, 2);
    for (int i = 0; i < nints; ++i)
      carried_ints.push_back(
          sc.ints[static_cast<std::size_t>(
              pick(0, static_cast<int>(sc.ints.size()) - 1))]);
    std::vector<std::string> threaded;
    for (const auto &kv : sc.states)
      if (coin(0.4))
        threaded.push_back(kv.first);

    for (ValueId v : carried_ints) {
      op.operands.push_back(v);
      body.args.push_back(fn_->new_value(ValueType::integer(64)));
      inner.ints.push_back(body.args.back());
    }
    for (const auto &accel : threaded) {
      op.operands.push_back(sc.states.at(accel));
      body.args.push_back(fn_->new_value(ValueType::state(accel)));
      inner.states[accel] = body.args.back();
    }

    emit_block(body, inner, pick(1, opts_.block_budget), depth + 1);

    Operation yld;
    yld.kind = OpKind::Yield;
    yld.uid = fn_->take_uid();
    for (std::size_t i = 0; i < carried_ints.size(); ++i)
      yld.operands.push_back(any_int(body, inner));
    for (const auto &accel : threaded) {
      auto it = inner.states.find(accel);
      yld.operands.push_back(it != inner.states.end()
                                 ? it->second
                                 : restore_state(body, inner, accel));
    }
    body.ops.push_back(std::move(yld));

    for (std::size_t i = 0; i < carried_ints.size(); ++i) {
      op.results.push_back(fn_->new_value(ValueType::integer(64)));
      sc.ints.push_back(op.results.back());
    }
    op.regions.push_back(std::move(body));

    // the loop body may have invalidated outer states
    for (const auto &accel : inner.touched)
      sc.states.erase(accel);
    if (inner.clobbered) {
      sc.states.clear();
      sc.clobbered = true;
    }
    for (const auto &accel : threaded) {
      op.results.push_back(fn_->new_value(ValueType::state(accel)));
      sc.states[accel] = op.results.back();
      sc.touched.insert(accel); // the loop result replaces the outer state
    }
    sc.touched.insert(inner.touched.begin(), inner.touched.end());
    b.ops.push_back(std::move(op));
  }

  void emit_if(Block &b, Scope &sc, int depth) {
    // conditions are i1, which the shared integer pool never holds
    Operation cnd;
    cnd.kind = OpKind::Const;
    cnd.uid = fn_->take_uid();
    cnd.literal = pick(0, 1);
    cnd.results.push_back(fn_->new_value(ValueType::integer(1)));
    ValueId cond = cnd.results[0];
    b.ops.push_back(std::move(cnd));

    Operation op;
    op.kind = OpKind::If;
    op.uid = fn_->take_uid();
    op.operands.push_back(cond);

    const int nints = pick(0, 2);
    std::vector<std::string> joined;
    for (const auto &kv : sc.states)
      if (coin(0.3))
        joined.push_back(kv.first);

    std::set<std::string> touched;
    bool clobbered = false;
    for (int side = 0; side < 2; ++side) {
      Block region;
      Scope inner;
      inner.ints = sc.ints;
      inner.states = sc.states;
      emit_block(region, inner, pick(1, opts_.block_budget / 2 + 1),
                 depth + 1);
      Operation yld;
      yld.kind = OpKind::Yield;
      yld.uid = fn_->take_uid();
      for (int i = 0; i < nints; ++i)
        yld.operands.push_back(any_int(region, inner));
      for (const auto &accel : joined) {
        auto it = inner.states.find(accel);
        yld.operands.push_back(it != inner.states.end()
                                   ? it->second
                                   : restore_state(region, inner, accel));
      }
      region.ops.push_back(std::move(yld));
      op.regions.push_back(std::move(region));
      touched.insert(inner.touched.begin(), inner.touched.end());
      clobbered = clobbered || inner.clobbered;
    }

    for (int i = 0; i < nints; ++i) {
      op.results.push_back(fn_->new_value(ValueType::integer(64)));
      sc.ints.push_back(op.results.back());
    }
    for (const auto &accel : joined)
      op.results.push_back(fn_->new_value(ValueType::state(accel)));

    for (const auto &accel : touched)
      sc.states.erase(accel);
    if (clobbered) {
      sc.states.clear();
      sc.clobbered = true;
    }
    std::size_t idx = static_cast<std::size_t>(nints);
    for (const auto &accel : joined) {
      sc.states[accel] = op.results[idx++];
      sc.touched.insert(accel); // the join replaces the outer state
    }
    sc.touched.insert(touched.begin(), touched.end());
    b.ops.push_back(std::move(op));
  }

  // the bread-and-butter compute loop: stage, fire, wait, carry the state
  void emit_kernel_loop(Block &b, Scope &sc, int depth) {
    const auto *d = pick_accel();
    ValueId state;
    auto live = sc.states.find(d->name);
    if (live != sc.states.end())
      state = live->second;
    else
      state = restore_state(b, sc, d->name);

    Operation op;
    op.kind = OpKind::For;
    op.uid = fn_->take_uid();
    op.lower = 0;
    op.step = 1;
    op.upper = pick(1, 6);
    op.operands.push_back(state);
    Block body;
    body.args.push_back(fn_->new_value(ValueType::integer(64)));
    body.args.push_back(fn_->new_value(ValueType::state(d->name)));

    Scope inner;
    inner.ints = sc.ints;
    inner.ints.push_back(body.args[0]);

    const int producers = pick(0, 3);
    for (int i = 0; i < producers; ++i)
      emit_arith(body, inner);

    Operation setup;
    setup.kind = OpKind::Setup;
    setup.uid = fn_->take_uid();
    setup.symbol = d->name;
    for (auto &name : pick_fields(*d, 1, 3)) {
      setup.fields.push_back(name);
      setup.operands.push_back(any_int(body, inner));
    }
    setup.from_state = true;
    setup.operands.push_back(body.args[1]);
    setup.results.push_back(fn_->new_value(ValueType::state(d->name)));
    const ValueId staged = setup.results[0];
    body.ops.push_back(std::move(setup));

    Operation fire;
    fire.kind = OpKind::Launch;
    fire.uid = fn_->take_uid();
    fire.symbol = d->name;
    fire.operands.push_back(staged);
    fire.ops_attr = pick(16, 512);
    fire.results.push_back(fn_->new_value(ValueType::token(d->name)));
    const ValueId token = fire.results[0];
    body.ops.push_back(std::move(fire));

    Operation wait;
    wait.kind = OpKind::Await;
    wait.uid = fn_->take_uid();
    wait.operands.push_back(token);
    body.ops.push_back(std::move(wait));

    Operation yld;
    yld.kind = OpKind::Yield;
    yld.uid = fn_->take_uid();
    yld.operands.push_back(staged);
    body.ops.push_back(std::move(yld));

    op.regions.push_back(std::move(body));
    op.results.push_back(fn_->new_value(ValueType::state(d->name)));
    sc.states[d->name] = op.results[0];
    sc.touched.insert(d->name);
    (void)depth;
    b.ops.push_back(std::move(op));
  }

  void emit_block(Block &b, Scope &sc, int budget, int depth) {
    for (int i = 0; i < budget; ++i) {
      const int roll = pick(0, 15);
      switch (roll) {
      case 0:
      case 1:
        emit_const(b, sc, pick(-4, 100));
        break;
      case 2:
      case 3:
      case 4:
        emit_arith(b, sc);
        break;
      case 5:
      case 6:
        emit_setup(b, sc);
        break;
      case 7:
      case 8:
        emit_launch(b, sc);
        break;
      case 9:
        emit_await(b, sc);
        break;
      case 10:
        emit_call(b, sc);
        break;
      case 11:
        emit_hostwork(b, sc);
        break;
      case 12:
        if (depth < opts_.max_depth)
          emit_for(b, sc, depth);
        break;
      case 13:
        if (depth < opts_.max_depth)
          emit_if(b, sc, depth);
        break;
      default:
        if (depth < opts_.max_depth && coin(0.6))
          emit_kernel_loop(b, sc, depth);
        else
          emit_setup(b, sc);
        break;
      }
    }
  }

  const AcceleratorDescriptor *nullptr_safe_find(const std::string &name) {
    for (const auto *d : accels_)
      if (d->name == name)
        return d;
    return nullptr;
  }

  std::mt19937_64 rng_;
  GenOptions opts_;
  std::vector<const AcceleratorDescriptor *> accels_;
  Function *fn_ = nullptr;
};

} // namespace

Program random_program(std::uint64_t seed, const AccelRegistry &reg,
                       const GenOptions &opts) {
  Gen g(seed, reg, opts);
  return g.run();
}

} // namespace acckit
