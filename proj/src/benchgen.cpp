#include <cstdio>
#include <map>
#include <set>

#include <json.hpp>

#include "acckit/benchgen.hpp"

namespace acckit {
namespace {

using nlohmann::json;

void reject_unknown_keys(const json &node, const std::set<std::string> &ok,
                         const char *where) {
  for (auto it = node.begin(); it != node.end(); ++it)
    if (!ok.count(it.key()))
      throw BenchError(std::string("unknown key \"") + it.key() + "\" in " +
                       where);
}

std::int64_t int_field(const json &node, const char *key,
                       std::int64_t fallback, bool required) {
  if (!node.contains(key)) {
    if (required)
      throw BenchError(std::string("missing \"") + key + "\"");
    return fallback;
  }
  if (!node[key].is_number_integer())
    throw BenchError(std::string("\"") + key + "\" must be an integer");
  return node[key].get<std::int64_t>();
}

struct Dims {
  std::int64_t m, n, k;          // problem extents
  std::int64_t tm, tn, tk;       // effective tile extents
};

Dims check_spec(const MatmulSpec &spec, const AcceleratorDescriptor *desc) {
  Dims d{spec.m, spec.n, spec.k,
         spec.tile_m == 0 ? spec.m : spec.tile_m,
         spec.tile_n == 0 ? spec.n : spec.tile_n,
         spec.tile_k == 0 ? spec.k : spec.tile_k};
  if (d.m <= 0 || d.n <= 0 || d.k <= 0)
    throw BenchError("matrix extents must be positive");
  if (d.tm <= 0 || d.tn <= 0 || d.tk <= 0)
    throw BenchError("tile extents must be positive");
  if (d.m % d.tm || d.n % d.tn || d.k % d.tk)
    throw BenchError("tiles must divide the matrix extents");
  if (spec.ops_per_mac <= 0)
    throw BenchError("ops_per_mac must be positive");
  if (spec.accel.empty())
    throw BenchError("spec names no accelerator");
  if (spec.fields.empty())
    throw BenchError("spec maps no fields");
  std::set<std::string> seen;
  for (const FieldBinding &fb : spec.fields) {
    if (!seen.insert(fb.field).second)
      throw BenchError("field \"" + fb.field + "\" mapped twice");
    if (desc && !desc->find_field(fb.field))
      throw BenchError("field \"" + fb.field + "\" not declared by \"" +
                       desc->name + "\"");
    if (fb.kind != "addr" && fb.kind != "packed" && fb.kind != "value")
      throw BenchError("field \"" + fb.field + "\" has unknown kind \"" +
                       fb.kind + "\"");
    if (fb.kind == "addr" && fb.matrix != "a" && fb.matrix != "b" &&
        fb.matrix != "c" && fb.matrix != "d")
      throw BenchError("field \"" + fb.field + "\" addresses no matrix");
    if (fb.kind == "packed" && fb.parts.empty())
      throw BenchError("field \"" + fb.field + "\" packs nothing");
  }
  return d;
}

// Emits ops into `b`, returning the value id. Everything lands in the
// innermost body on purpose: the baseline recomputes all of it per launch.
class Emitter {
public:
  Emitter(Function &f, Block &b) : f_(f), b_(b) {}

  ValueId cst(std::int64_t v) {
    Operation op;
    op.kind = OpKind::Const;
    op.uid = f_.take_uid();
    op.literal = v;
    op.results.push_back(f_.new_value(ValueType::integer(64)));
    b_.ops.push_back(std::move(op));
    return b_.ops.back().results[0];
  }

  ValueId arith(ArithOp kind, ValueId a, ValueId b) {
    Operation op;
    op.kind = OpKind::Arith;
    op.uid = f_.take_uid();
    op.arith = kind;
    op.operands = {a, b};
    op.results.push_back(f_.new_value(ValueType::integer(64)));
    b_.ops.push_back(std::move(op));
    return b_.ops.back().results[0];
  }

private:
  Function &f_;
  Block &b_;
};

std::int64_t named_quantity(const std::string &source, const Dims &d) {
  if (source == "tile_m")
    return d.tm;
  if (source == "tile_n")
    return d.tn;
  if (source == "tile_k")
    return d.tk;
  if (source == "size_m")
    return d.m;
  if (source == "size_n")
    return d.n;
  if (source == "size_k")
    return d.k;
  if (source == "stride_a")
    return d.k; // row-major A is M x K
  if (source == "stride_b")
    return d.n;
  if (source == "stride_c")
    return d.n;
  throw BenchError("unknown packed source \"" + source + "\"");
}

ValueId emit_binding(Emitter &e, const FieldBinding &fb, const Dims &d,
                     ValueId m_iv, ValueId n_iv, ValueId k_iv) {
  if (fb.kind == "value")
    return e.cst(fb.base);
  if (fb.kind == "packed") {
    ValueId acc = kInvalidValue;
    for (const PackPart &part : fb.parts) {
      ValueId v = e.arith(ArithOp::Shl, e.cst(named_quantity(part.source, d)),
                          e.cst(part.shift));
      acc = acc == kInvalidValue ? v : e.arith(ArithOp::Or, acc, v);
    }
    return acc;
  }
  // addr: base + row * stride + col
  ValueId row = m_iv, col = k_iv;
  std::int64_t stride = d.k;
  if (fb.matrix == "b") {
    row = k_iv;
    col = n_iv;
    stride = d.n;
  } else if (fb.matrix == "c" || fb.matrix == "d") {
    row = m_iv;
    col = n_iv;
    stride = d.n;
  }
  ValueId scaled = e.arith(ArithOp::Mul, row, e.cst(stride));
  return e.arith(ArithOp::Add, e.arith(ArithOp::Add, e.cst(fb.base), scaled),
                 col);
}

Operation make_for(Function &f, std::int64_t upper, std::int64_t step,
                   Block body) {
  Operation op;
  op.kind = OpKind::For;
  op.uid = f.take_uid();
  op.lower = 0;
  op.upper = upper;
  op.step = step;
  op.regions.push_back(std::move(body));
  return op;
}

void append_empty_yield(Function &f, Block &b) {
  Operation yld;
  yld.kind = OpKind::Yield;
  yld.uid = f.take_uid();
  b.ops.push_back(std::move(yld));
}

} // namespace

MatmulSpec matmul_spec_from_json(const std::string &json_text) {
  json doc;
  try {
    doc = json::parse(json_text);
  } catch (const json::exception &e) {
    throw BenchError(std::string("bad spec JSON: ") + e.what());
  }
  if (!doc.is_object())
    throw BenchError("spec must be a JSON object");
  reject_unknown_keys(doc,
                      {"m", "n", "k", "tile_m", "tile_n", "tile_k",
                       "ops_per_mac", "accel", "fields"},
                      "spec");
  MatmulSpec spec;
  spec.m = int_field(doc, "m", 0, true);
  spec.n = int_field(doc, "n", 0, true);
  spec.k = int_field(doc, "k", 0, true);
  spec.tile_m = int_field(doc, "tile_m", 0, false);
  spec.tile_n = int_field(doc, "tile_n", 0, false);
  spec.tile_k = int_field(doc, "tile_k", 0, false);
  spec.ops_per_mac = int_field(doc, "ops_per_mac", 2, false);
  if (!doc.contains("accel") || !doc["accel"].is_string())
    throw BenchError("spec needs an \"accel\" string");
  spec.accel = doc["accel"].get<std::string>();
  if (!doc.contains("fields") || !doc["fields"].is_array())
    throw BenchError("spec needs a \"fields\" array");
  for (const json &fj : doc["fields"]) {
    if (!fj.is_object())
      throw BenchError("each field binding must be an object");
    reject_unknown_keys(fj, {"field", "kind", "matrix", "base", "parts"},
                        "field binding");
    FieldBinding fb;
    if (!fj.contains("field") || !fj["field"].is_string())
      throw BenchError("field binding needs a \"field\" string");
    fb.field = fj["field"].get<std::string>();
    if (!fj.contains("kind") || !fj["kind"].is_string())
      throw BenchError("field binding needs a \"kind\" string");
    fb.kind = fj["kind"].get<std::string>();
    if (fj.contains("matrix")) {
      if (!fj["matrix"].is_string())
        throw BenchError("\"matrix\" must be a string");
      fb.matrix = fj["matrix"].get<std::string>();
    }
    fb.base = int_field(fj, "base", 0, false);
    if (fj.contains("parts")) {
      if (!fj["parts"].is_array())
        throw BenchError("\"parts\" must be an array");
      for (const json &pj : fj["parts"]) {
        if (!pj.is_object())
          throw BenchError("each packed part must be an object");
        reject_unknown_keys(pj, {"source", "shift"}, "packed part");
        PackPart part;
        if (!pj.contains("source") || !pj["source"].is_string())
          throw BenchError("packed part needs a \"source\" string");
        part.source = pj["source"].get<std::string>();
        part.shift =
            static_cast<int>(int_field(pj, "shift", 0, false));
        if (part.shift < 0 || part.shift > 63)
          throw BenchError("packed shift must be in 0..63");
        fb.parts.push_back(std::move(part));
      }
    }
    spec.fields.push_back(std::move(fb));
  }
  return spec;
}

MatmulSpec load_matmul_spec(const std::string &path) {
  std::FILE *fp = std::fopen(path.c_str(), "rb");
  if (!fp)
    throw BenchError("cannot open spec file: " + path);
  std::string text;
  char buf[4096];
  std::size_t got;
  while ((got = std::fread(buf, 1, sizeof buf, fp)) > 0)
    text.append(buf, got);
  std::fclose(fp);
  return matmul_spec_from_json(text);
}

Program tiled_matmul(const MatmulSpec &spec,
                     const AcceleratorDescriptor *desc) {
  const Dims d = check_spec(spec, desc);

  Program p;
  p.accels.push_back(spec.accel);
  Function f;
  f.name = "main";

  Block k_body;
  k_body.args.push_back(f.new_value(ValueType::integer(64)));
  Block n_body;
  n_body.args.push_back(f.new_value(ValueType::integer(64)));
  Block m_body;
  m_body.args.push_back(f.new_value(ValueType::integer(64)));
  const ValueId k_iv = k_body.args[0];
  const ValueId n_iv = n_body.args[0];
  const ValueId m_iv = m_body.args[0];

  Emitter e(f, k_body);
  Operation setup;
  setup.kind = OpKind::Setup;
  setup.uid = f.take_uid();
  setup.symbol = spec.accel;
  for (const FieldBinding &fb : spec.fields) {
    setup.fields.push_back(fb.field);
    setup.operands.push_back(emit_binding(e, fb, d, m_iv, n_iv, k_iv));
  }
  setup.results.push_back(f.new_value(ValueType::state(spec.accel)));
  const ValueId staged = setup.results[0];
  k_body.ops.push_back(std::move(setup));

  Operation fire;
  fire.kind = OpKind::Launch;
  fire.uid = f.take_uid();
  fire.symbol = spec.accel;
  fire.operands.push_back(staged);
  fire.ops_attr = spec.ops_per_mac * d.tm * d.tn * d.tk;
  fire.results.push_back(f.new_value(ValueType::token(spec.accel)));
  k_body.ops.push_back(std::move(fire));

  Operation wait;
  wait.kind = OpKind::Await;
  wait.uid = f.take_uid();
  wait.operands.push_back(k_body.ops.back().results[0]);
  k_body.ops.push_back(std::move(wait));
  append_empty_yield(f, k_body);

  n_body.ops.push_back(make_for(f, d.k, d.tk, std::move(k_body)));
  append_empty_yield(f, n_body);
  m_body.ops.push_back(make_for(f, d.n, d.tn, std::move(n_body)));
  append_empty_yield(f, m_body);
  f.body.ops.push_back(make_for(f, d.m, d.tm, std::move(m_body)));

  p.functions.push_back(std::move(f));
  return p;
}

MatmulSpec with_square_size(MatmulSpec spec, std::int64_t size) {
  spec.m = size;
  spec.n = size;
  spec.k = size;
  return spec;
}

} // namespace acckit
