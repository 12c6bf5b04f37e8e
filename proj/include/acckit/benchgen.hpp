#pragma once

#include <cstdint>
#include <stdexcept>
#include <string>
#include <vector>

#include "acckit/accel.hpp"
#include "acckit/ir.hpp"

namespace acckit {

struct BenchError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// One component of a packed register: `source << shift`.
struct PackPart {
  std::string source;
  int shift = 0;
};

// How one accelerator register is fed.
//   kind "addr"    base + row * stride + col; rows/cols per `matrix`
//                  ("a": m,k   "b": k,n   "c"/"d": m,n), row-major strides
//   kind "packed"  OR of shifted named quantities; sources are tile_m,
//                  tile_n, tile_k, size_m, size_n, size_k, stride_a,
//                  stride_b, stride_c
//   kind "value"   the literal in `base`
struct FieldBinding {
  std::string field;
  std::string kind;
  std::string matrix;
  std::int64_t base = 0;
  std::vector<PackPart> parts;
};

// A tiled dense matmul, C[M,N] += A[M,K] * B[K,N], on one accelerator.
// The generated program recomputes and rewrites every mapped register
// before every launch — the worst-case configuration pattern the rewrite
// passes exist to clean up. Tile extents of 0 mean "the whole axis".
// ops_per_mac scales the per-launch workload (2 = multiply + add).
struct MatmulSpec {
  std::int64_t m = 0, n = 0, k = 0;
  std::int64_t tile_m = 0, tile_n = 0, tile_k = 0;
  std::int64_t ops_per_mac = 2;
  std::string accel;
  std::vector<FieldBinding> fields;
};

// Strict JSON loaders: unknown keys, missing dimensions, unparseable
// bindings all throw BenchError.
MatmulSpec matmul_spec_from_json(const std::string &json_text);
MatmulSpec load_matmul_spec(const std::string &path);

// Emits the loop nest (m outer, n middle, k innermost; every mapped field
// computed and written in the innermost body; one launch + await per
// tile). Field names are checked against `desc` when one is given.
// Throws BenchError for non-positive sizes, non-dividing tiles, duplicate
// or unknown fields.
Program tiled_matmul(const MatmulSpec &spec,
                     const AcceleratorDescriptor *desc = nullptr);

// The same kernel template at M = N = K = size.
MatmulSpec with_square_size(MatmulSpec spec, std::int64_t size);

} // namespace acckit
