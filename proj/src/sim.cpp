#include <algorithm>
#include <cassert>
#include <sstream>
#include <unordered_map>
#include <unordered_set>

#include "acckit/sim.hpp"

namespace acckit {
namespace {

constexpr std::int64_t kMaxTrips = std::int64_t(1) << 24;
constexpr std::uint64_t kMaxWorkload = std::uint64_t(1) << 48;

std::uint64_t mask_bits(int bits) {
  return bits >= 64 ? ~std::uint64_t(0)
                    : (std::uint64_t(1) << bits) - 1;
}

std::uint64_t eval_arith(ArithOp op, std::uint64_t a, std::uint64_t b,
                         int width) {
  std::uint64_t m = mask_bits(width);
  switch (op) {
  case ArithOp::Add: return (a + b) & m;
  case ArithOp::Sub: return (a - b) & m;
  case ArithOp::Mul: return (a * b) & m;
  case ArithOp::And: return a & b;
  case ArithOp::Or:  return a | b;
  case ArithOp::Xor: return a ^ b;
  case ArithOp::Shl:
    return b >= static_cast<std::uint64_t>(width) ? 0 : (a << b) & m;
  case ArithOp::Shr:
    return b >= static_cast<std::uint64_t>(width) ? 0 : (a & m) >> b;
  }
  return 0;
}

// Deterministic stand-in for whatever an opaque call returns.
std::uint64_t opaque_result(const std::string &callee,
                            const std::vector<std::uint64_t> &args,
                            std::size_t index) {
  std::uint64_t h = 1469598103934665603ull;
  auto mix = [&h](std::uint64_t v) {
    for (int i = 0; i < 8; ++i) {
      h ^= (v >> (i * 8)) & 0xff;
      h *= 1099511628211ull;
    }
  };
  for (char c : callee) {
    h ^= static_cast<unsigned char>(c);
    h *= 1099511628211ull;
  }
  for (std::uint64_t a : args)
    mix(a);
  mix(index);
  return h;
}

// Values that transitively feed a setup/launch field operand through pure
// ops and region plumbing; arith whose result lands here bills as calc.
class CalcMarker {
public:
  explicit CalcMarker(const Function &f) : f_(f) {
    index_block(f.body, nullptr);
    std::vector<ValueId> work(seeds_.begin(), seeds_.end());
    while (!work.empty()) {
      ValueId v = work.back();
      work.pop_back();
      auto def = defs_.find(v);
      if (def != defs_.end()) {
        const Operation *op = def->second;
        if (op->kind == OpKind::Const || op->kind == OpKind::Arith) {
          if (calc_ops_.insert(op->uid).second)
            for (ValueId o : op->operands)
              push(o, work);
          continue;
        }
        // region results fall through to their yield/init sources
      }
      auto src = sources_.find(v);
      if (src != sources_.end())
        for (ValueId s : src->second)
          push(s, work);
    }
  }

  bool is_calc(const Operation &op) const { return calc_ops_.count(op.uid); }

private:
  void push(ValueId v, std::vector<ValueId> &work) {
    if (marked_.insert(v).second)
      work.push_back(v);
  }

  void index_block(const Block &b, const Operation *parent) {
    for (const auto &op : b.ops) {
      for (ValueId r : op.results)
        defs_.emplace(r, &op);
      if (op.kind == OpKind::Setup || op.kind == OpKind::Launch)
        for (ValueId v : field_operands(op))
          seeds_.insert(v);
      if (op.kind == OpKind::For) {
        const Block &body = op.regions[0];
        const Operation *y =
            body.ops.empty() ? nullptr : &body.ops.back();
        for (std::size_t i = 0; i < op.operands.size(); ++i) {
          auto &arg_src = sources_[body.args[i + 1]];
          arg_src.push_back(op.operands[i]);
          auto &res_src = sources_[op.results[i]];
          res_src.push_back(op.operands[i]);
          if (y && y->kind == OpKind::Yield && i < y->operands.size()) {
            arg_src.push_back(y->operands[i]);
            res_src.push_back(y->operands[i]);
          }
        }
      }
      if (op.kind == OpKind::If) {
        for (const auto &r : op.regions) {
          const Operation *y = r.ops.empty() ? nullptr : &r.ops.back();
          if (!y || y->kind != OpKind::Yield)
            continue;
          for (std::size_t i = 0;
               i < op.results.size() && i < y->operands.size(); ++i)
            sources_[op.results[i]].push_back(y->operands[i]);
        }
      }
      for (const auto &r : op.regions)
        index_block(r, &op);
    }
    (void)parent;
  }

  const Function &f_;
  std::unordered_map<ValueId, const Operation *> defs_;
  std::unordered_map<ValueId, std::vector<ValueId>> sources_;
  std::unordered_set<ValueId> seeds_;
  std::unordered_set<ValueId> marked_;
  std::unordered_set<std::uint32_t> calc_ops_;
};

struct AccelState {
  const AcceleratorDescriptor *desc = nullptr;
  std::map<std::string, std::uint64_t> live;
  std::map<std::string, std::uint64_t> staged;  // concurrent overlay
  std::uint64_t busy_until = 0;
};

class Interp {
public:
  Interp(const Program &p, const Function &f, const AccelRegistry &reg)
      : prog_(p), fn_(f), marker_(f) {
    for (const auto &name : p.accels) {
      const AcceleratorDescriptor *d = reg.find(name);
      if (!d)
        throw SimError("no descriptor for accelerator \"" + name + "\"");
      AccelState st;
      st.desc = d;
      for (const auto &fs : d->fields)
        st.live[fs.name] = 0;
      accels_.emplace(name, std::move(st));
      if (!host_cost_set_) {
        host_cost_ = d->cost;
        host_cost_set_ = true;
      }
    }
    env_.assign(f.value_types.size(), 0);
  }

  SimResult run() {
    exec_block(fn_.body);
    res_.total_cycles = now_;
    for (auto &[name, st] : accels_)
      res_.total_cycles = std::max(res_.total_cycles, st.busy_until);
    std::sort(res_.timeline.begin(), res_.timeline.end(),
              [](const TimelineSeg &a, const TimelineSeg &b) {
                if (a.start != b.start)
                  return a.start < b.start;
                return a.lane < b.lane;
              });
    return std::move(res_);
  }

private:
  void charge(Lane lane, std::uint64_t cycles, std::uint64_t &counter) {
    if (cycles == 0)
      return;
    counter += cycles;
    emit_seg(lane, now_, now_ + cycles);
    now_ += cycles;
  }

  void emit_seg(Lane lane, std::uint64_t start, std::uint64_t end) {
    if (start == end)
      return;
    if (!res_.timeline.empty()) {
      TimelineSeg &last = res_.timeline.back();
      if (last.lane == lane && last.end == start &&
          lane != Lane::AccelBusy) {
        last.end = end;
        return;
      }
    }
    res_.timeline.push_back({start, end, lane});
  }

  AccelState &accel(const std::string &name, const Operation &op) {
    auto it = accels_.find(name);
    if (it == accels_.end())
      throw SimError("op at " + std::to_string(op.line) +
                     ":" + std::to_string(op.col) +
                     " uses undeclared accelerator \"" + name + "\"");
    return it->second;
  }

  // Writes one field list (setup or launch-semantic) and charges grouped
  // write costs. Returns nothing; byte accounting differs per scheme.
  void write_fields(AccelState &st, const Operation &op) {
    if (op.fields.empty())
      return;
    auto vals = field_operands(op);
    std::int64_t g = host_for(st).write_group;
    std::int64_t groups =
        (static_cast<std::int64_t>(op.fields.size()) + g - 1) / g;
    charge(Lane::HostSetup,
           static_cast<std::uint64_t>(groups * st.desc->cost.write_cost),
           res_.setup_cycles);
    for (std::size_t i = 0; i < op.fields.size(); ++i) {
      const FieldSpec *fs = st.desc->find_field(op.fields[i]);
      if (!fs)
        throw SimError("setup writes unknown register \"" + op.fields[i] +
                       "\" of accelerator \"" + st.desc->name + "\"");
      std::uint64_t v = env_[vals[i]] & mask_bits(fs->bytes * 8);
      if (st.desc->scheme == Scheme::Concurrent) {
        st.staged[op.fields[i]] = v;
      } else {
        st.live[op.fields[i]] = v;
        res_.config_bytes_written += fs->bytes;
      }
    }
  }

  const CostModel &host_for(const AccelState &st) const {
    return st.desc->cost;
  }

  void clobber_all() {
    for (auto &[name, st] : accels_) {
      for (auto &[f, v] : st.live)
        v = 0;
      st.staged.clear();
    }
  }

  std::uint64_t commit(AccelState &st) {
    std::uint64_t bytes = 0;
    for (auto &[f, v] : st.staged) {
      st.live[f] = v;
      bytes += st.desc->find_field(f)->bytes;
    }
    st.staged.clear();
    return bytes;
  }

  // Returns yield operand values when the block ends in a yield.
  std::vector<std::uint64_t> exec_block(const Block &b) {
    for (const auto &op : b.ops) {
      switch (op.kind) {
      case OpKind::Const:
        env_[op.results[0]] =
            static_cast<std::uint64_t>(op.literal) &
            mask_bits(fn_.type_of(op.results[0]).width);
        break;
      case OpKind::Arith: {
        int w = fn_.type_of(op.results[0]).width;
        charge(marker_.is_calc(op) ? Lane::HostCalc : Lane::HostOther,
               host_cost_.arith_cost,
               marker_.is_calc(op) ? res_.calc_cycles
                                   : res_.other_host_cycles);
        env_[op.results[0]] = eval_arith(op.arith, env_[op.operands[0]],
                                         env_[op.operands[1]], w);
        break;
      }
      case OpKind::Setup: {
        AccelState &st = accel(op.symbol, op);
        write_fields(st, op);
        break;
      }
      case OpKind::Launch:
        exec_launch(op);
        break;
      case OpKind::Await:
        exec_await(op);
        break;
      case OpKind::For:
        exec_for(op);
        break;
      case OpKind::If: {
        bool cond = env_[op.operands[0]] & 1;
        auto vals = exec_block(op.regions[cond ? 0 : 1]);
        for (std::size_t i = 0; i < op.results.size(); ++i)
          env_[op.results[i]] = vals[i];
        break;
      }
      case OpKind::Yield: {
        std::vector<std::uint64_t> out;
        out.reserve(op.operands.size());
        for (ValueId v : op.operands)
          out.push_back(env_[v]);
        return out;
      }
      case OpKind::ExternCall: {
        charge(Lane::HostOther, host_cost_.arith_cost,
               res_.other_host_cycles);
        std::vector<std::uint64_t> args;
        args.reserve(op.operands.size());
        for (ValueId v : op.operands)
          args.push_back(env_[v]);
        for (std::size_t i = 0; i < op.results.size(); ++i)
          env_[op.results[i]] =
              opaque_result(op.symbol, args, i) &
              mask_bits(fn_.type_of(op.results[i]).width);
        if (is_clobber(op))
          clobber_all();
        break;
      }
      case OpKind::HostWork:
        charge(Lane::HostOther, static_cast<std::uint64_t>(op.literal),
               res_.other_host_cycles);
        break;
      }
    }
    return {};
  }

  void exec_launch(const Operation &op) {
    AccelState &st = accel(op.symbol, op);
    write_fields(st, op);
    if (st.desc->scheme == Scheme::Concurrent && st.busy_until > now_) {
      // single outstanding job: wait for the previous one
      std::uint64_t wait = st.busy_until - now_;
      charge(Lane::HostIdle, wait, res_.host_idle_cycles);
    }
    charge(Lane::HostOther, st.desc->cost.launch_cost,
           res_.launch_issue_cycles);

    if (st.desc->scheme == Scheme::Concurrent)
      res_.config_bytes_written += commit(st);

    std::uint64_t ops =
        op.ops_operand
            ? env_[op.operands.back()]
            : static_cast<std::uint64_t>(op.ops_attr.value_or(0));
    if (ops > kMaxWorkload)
      throw SimError("launch workload out of range for \"" + op.symbol +
                     "\"");
    std::uint64_t dur = job_duration(*st.desc, ops);

    LaunchEvent ev;
    ev.accel = op.symbol;
    ev.snapshot = st.live;
    ev.ops = ops;
    ev.launch_cycle = now_;
    res_.trace.push_back(std::move(ev));
    res_.total_ops += ops;
    res_.accel_busy_cycles += dur;
    emit_seg(Lane::AccelBusy, now_, now_ + dur);
    st.busy_until = now_ + dur;
    tokens_[op.results[0]] = st.busy_until;

    if (st.desc->scheme == Scheme::Sequential && dur > 0)
      charge(Lane::HostIdle, dur, res_.host_idle_cycles);
  }

  void exec_await(const Operation &op) {
    ValueId tok = op.operands[0];
    const std::string &a = fn_.type_of(tok).accel;
    AccelState &st = accel(a, op);
    if (st.desc->scheme == Scheme::Sequential)
      return;  // job already done before the launch returned
    auto it = tokens_.find(tok);
    if (it == tokens_.end())
      throw SimError("await on a token that was never launched");
    if (it->second > now_)
      charge(Lane::HostIdle, it->second - now_, res_.host_idle_cycles);
    else
      charge(Lane::HostOther, st.desc->cost.await_poll_cost,
             res_.other_host_cycles);
  }

  void exec_for(const Operation &op) {
    std::int64_t trips = for_trip_count(op);
    if (trips > kMaxTrips)
      throw SimError("loop at " + std::to_string(op.line) + ":" +
                     std::to_string(op.col) + " exceeds " +
                     std::to_string(kMaxTrips) + " iterations");
    const Block &body = op.regions[0];
    std::vector<std::uint64_t> carried;
    carried.reserve(op.operands.size());
    for (ValueId v : op.operands)
      carried.push_back(env_[v]);
    for (std::int64_t iv = op.lower; iv < op.upper; iv += op.step) {
      env_[body.args[0]] = static_cast<std::uint64_t>(iv);
      for (std::size_t i = 0; i < carried.size(); ++i)
        env_[body.args[i + 1]] = carried[i];
      carried = exec_block(body);
    }
    for (std::size_t i = 0; i < op.results.size(); ++i)
      env_[op.results[i]] = carried[i];
  }

  const Program &prog_;
  const Function &fn_;
  CalcMarker marker_;
  std::map<std::string, AccelState> accels_;
  std::unordered_map<ValueId, std::uint64_t> tokens_;
  std::vector<std::uint64_t> env_;
  std::uint64_t now_ = 0;
  CostModel host_cost_;
  bool host_cost_set_ = false;
  SimResult res_;
};

} // namespace

SimResult simulate(const Program &p, const AccelRegistry &reg) {
  if (p.functions.empty())
    throw SimError("program has no functions");
  const Function *entry = &p.functions.front();
  for (const auto &f : p.functions)
    if (f.name == "main")
      entry = &f;
  Interp interp(p, *entry, reg);
  return interp.run();
}

bool trace_equivalent(const SimResult &a, const SimResult &b) {
  if (a.trace.size() != b.trace.size())
    return false;
  for (std::size_t i = 0; i < a.trace.size(); ++i) {
    const LaunchEvent &x = a.trace[i], &y = b.trace[i];
    if (x.accel != y.accel || x.ops != y.ops || x.snapshot != y.snapshot)
      return false;
  }
  return true;
}

namespace {

const char *lane_name(Lane l) {
  switch (l) {
  case Lane::HostSetup: return "host-setup";
  case Lane::HostCalc:  return "host-calc";
  case Lane::HostOther: return "host-other";
  case Lane::HostIdle:  return "host-idle";
  case Lane::AccelBusy: return "accel-busy";
  }
  return "?";
}

} // namespace

std::string emit_timeline_csv(const SimResult &r) {
  std::ostringstream os;
  os << "start_cycle,end_cycle,lane\n";
  std::vector<std::pair<std::uint64_t, std::uint64_t>> busy;
  for (const auto &seg : r.timeline) {
    os << seg.start << "," << seg.end << "," << lane_name(seg.lane) << "\n";
    if (seg.lane == Lane::AccelBusy)
      busy.emplace_back(seg.start, seg.end);
  }
  // accel-idle: complement of the busy union over [0, total)
  std::sort(busy.begin(), busy.end());
  std::uint64_t cursor = 0;
  auto emit_idle = [&os](std::uint64_t s, std::uint64_t e) {
    if (s < e)
      os << s << "," << e << "," << "accel-idle" << "\n";
  };
  for (auto [s, e] : busy) {
    emit_idle(cursor, s);
    cursor = std::max(cursor, e);
  }
  if (r.total_cycles > 0)
    emit_idle(cursor, r.total_cycles);
  return os.str();
}

std::string result_text(const SimResult &r) {
  std::ostringstream os;
  os << "total_cycles=" << r.total_cycles << "\n"
     << "setup_cycles=" << r.setup_cycles << "\n"
     << "calc_cycles=" << r.calc_cycles << "\n"
     << "other_host_cycles=" << r.other_host_cycles << "\n"
     << "host_idle_cycles=" << r.host_idle_cycles << "\n"
     << "launch_issue_cycles=" << r.launch_issue_cycles << "\n"
     << "accel_busy_cycles=" << r.accel_busy_cycles << "\n"
     << "config_bytes_written=" << r.config_bytes_written << "\n"
     << "total_ops=" << r.total_ops << "\n"
     << "launches=" << r.trace.size() << "\n";
  return os.str();
}

std::string result_json(const SimResult &r) {
  std::ostringstream os;
  os << "{\n"
     << "  \"total_cycles\": " << r.total_cycles << ",\n"
     << "  \"setup_cycles\": " << r.setup_cycles << ",\n"
     << "  \"calc_cycles\": " << r.calc_cycles << ",\n"
     << "  \"other_host_cycles\": " << r.other_host_cycles << ",\n"
     << "  \"host_idle_cycles\": " << r.host_idle_cycles << ",\n"
     << "  \"launch_issue_cycles\": " << r.launch_issue_cycles << ",\n"
     << "  \"accel_busy_cycles\": " << r.accel_busy_cycles << ",\n"
     << "  \"config_bytes_written\": " << r.config_bytes_written << ",\n"
     << "  \"total_ops\": " << r.total_ops << ",\n"
     << "  \"launches\": " << r.trace.size() << "\n"
     << "}\n";
  return os.str();
}

} // namespace acckit
