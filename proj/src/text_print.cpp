#include <sstream>
#include <unordered_map>

#include "acckit/text.hpp"

namespace acckit {
namespace {

class Printer {
public:
  explicit Printer(const Function &f) : f_(f) {}

  void print(std::ostream &os) {
    os << "func @" << f_.name << "() {\n";
    block_body(os, f_.body, 1);
    os << "}\n";
  }

private:
  std::string name(ValueId v) {
    auto it = names_.find(v);
    if (it != names_.end())
      return "%" + std::to_string(it->second);
    unsigned n = next_++;
    names_.emplace(v, n);
    return "%" + std::to_string(n);
  }

  static void indent(std::ostream &os, int depth) {
    for (int i = 0; i < depth; ++i)
      os << "  ";
  }

  void result_list(std::ostream &os, const Operation &op) {
    for (std::size_t i = 0; i < op.results.size(); ++i)
      os << (i ? ", " : "") << name(op.results[i]);
    if (!op.results.empty())
      os << " = ";
  }

  void result_types(std::ostream &os, const Operation &op) {
    if (op.results.empty())
      return;
    os << " : ";
    for (std::size_t i = 0; i < op.results.size(); ++i)
      os << (i ? ", " : "") << to_string(f_.type_of(op.results[i]));
  }

  void writes(std::ostream &os, const Operation &op) {
    os << "(";
    auto vals = field_operands(op);
    for (std::size_t i = 0; i < op.fields.size(); ++i)
      os << (i ? ", " : "") << op.fields[i] << " = " << name(vals[i]);
    os << ")";
  }

  void block_body(std::ostream &os, const Block &b, int depth) {
    for (const auto &op : b.ops)
      print_op(os, op, depth);
  }

  void print_op(std::ostream &os, const Operation &op, int depth) {
    indent(os, depth);
    result_list(os, op);
    switch (op.kind) {
    case OpKind::Const:
      os << "const " << op.literal;
      result_types(os, op);
      break;
    case OpKind::Arith:
      os << arith_name(op.arith) << " " << name(op.operands[0]) << ", "
         << name(op.operands[1]);
      result_types(os, op);
      break;
    case OpKind::Setup:
      os << "setup \"" << op.symbol << "\" ";
      writes(os, op);
      if (auto in = setup_input(op))
        os << " from " << name(*in);
      result_types(os, op);
      break;
    case OpKind::Launch:
      os << "launch " << name(launch_state(op));
      if (!op.fields.empty()) {
        os << " ";
        writes(os, op);
      }
      os << " ops = ";
      if (auto v = launch_ops_value(op))
        os << name(*v);
      else
        os << *op.ops_attr;
      result_types(os, op);
      break;
    case OpKind::Await:
      os << "await " << name(op.operands[0]);
      break;
    case OpKind::For: {
      const Block &body = op.regions[0];
      os << "for " << name(body.args[0]) << " = " << op.lower << " to "
         << op.upper << " step " << op.step;
      if (!op.operands.empty()) {
        os << " iter (";
        for (std::size_t i = 0; i < op.operands.size(); ++i) {
          os << (i ? ", " : "") << name(body.args[i + 1]) << " = "
             << name(op.operands[i]) << " : "
             << to_string(f_.type_of(op.operands[i]));
        }
        os << ")";
      }
      os << " {\n";
      block_body(os, body, depth + 1);
      indent(os, depth);
      os << "}";
      result_types(os, op);
      break;
    }
    case OpKind::If:
      os << "if " << name(op.operands[0]) << " {\n";
      block_body(os, op.regions[0], depth + 1);
      indent(os, depth);
      os << "} else {\n";
      block_body(os, op.regions[1], depth + 1);
      indent(os, depth);
      os << "}";
      result_types(os, op);
      break;
    case OpKind::Yield:
      os << "yield";
      for (std::size_t i = 0; i < op.operands.size(); ++i)
        os << (i ? ", " : " ") << name(op.operands[i]);
      break;
    case OpKind::ExternCall:
      os << "extern-call \"" << op.symbol << "\" (";
      for (std::size_t i = 0; i < op.operands.size(); ++i)
        os << (i ? ", " : "") << name(op.operands[i]);
      os << ")";
      if (op.effects)
        os << " effects = " << (*op.effects == Effects::All ? "all" : "none");
      result_types(os, op);
      break;
    case OpKind::HostWork:
      os << "host-work cycles = " << op.literal;
      break;
    }
    os << "\n";
  }

  const Function &f_;
  std::unordered_map<ValueId, unsigned> names_;
  unsigned next_ = 0;
};

} // namespace

std::string print_program(const Program &p) {
  std::ostringstream os;
  for (const auto &a : p.accels)
    os << "accel \"" << a << "\"\n";
  if (!p.accels.empty() && !p.functions.empty())
    os << "\n";
  for (std::size_t i = 0; i < p.functions.size(); ++i) {
    if (i)
      os << "\n";
    Printer(p.functions[i]).print(os);
  }
  return os.str();
}

} // namespace acckit
