#pragma once

#include <string>
#include <vector>

#include "acckit/accel.hpp"
#include "acckit/sim.hpp"

// Attainable-performance model for configuration-limited accelerators.
//
// The operation-to-configuration intensity I_oc is accelerator operations per
// byte of configuration written. A concurrent-scheme accelerator can hide
// configuration behind a running job, so it is capped by min(peak, bw * I);
// a sequential one serializes the two, giving the harmonic form
// 1 / (1/peak + 1/(bw * I)). The two curves meet asymptotically; their ratio
// peaks at the knee I = peak / bw, where the sequential curve is exactly half
// of peak. Effective configuration bandwidth also charges the host cycles
// spent computing field values, not just the register writes.

namespace acckit {

enum class Bound { ConfigBound, ComputeBound, Knee };

const char *bound_name(Bound b);

struct RooflineInputs {
  double peak_perf = 0;              // ops / cycle
  double bw_config = 0;              // bytes / cycle
  std::optional<double> bw_memory;   // bytes / cycle
  double i_oc = 0;                   // ops / byte
  std::optional<double> i_operational;  // ops / byte of memory traffic
};

struct RooflinePoint {
  double i_oc = 0;      // measured ops per configuration byte
  double perf = 0;      // measured ops per cycle
  Bound bound = Bound::ConfigBound;
  std::string label;
};

// min(peak, bw_mem * i_op): the classic memory roofline.
double attainable_processor(double peak, double bw_mem, double i_op);

// min(peak, bw_cfg * i_oc): configuration roofline, concurrent scheme.
double attainable_concurrent(double peak, double bw_cfg, double i_oc);

// 1 / (1/peak + 1/(bw_cfg * i_oc)): configuration roofline, sequential
// scheme (configuration time adds to compute time).
double attainable_sequential(double peak, double bw_cfg, double i_oc);

// bytes / (calc + set) cycles; `fallback` (e.g. the descriptor's peak
// configuration bandwidth) when no cycles were spent at all.
double effective_config_bandwidth(double n_bytes, double t_calc,
                                  double t_set, double fallback = 0.0);

// Pointwise min of the peak, memory, and configuration ceilings. A missing
// memory bandwidth or operational intensity drops the memory term.
double attainable_combined(const RooflineInputs &in);

// I at which bw_cfg * I equals peak; sequential performance there is peak/2.
double knee_intensity(double peak, double bw_cfg);

// Positions a simulation on the roofline: i_oc = total_ops / config bytes,
// perf = total_ops / total_cycles, bound classified against the descriptor's
// peak configuration bandwidth. Zero bytes with nonzero ops reports i_oc as
// +infinity (compute-bound); zero ops reports the origin.
RooflinePoint measure_point(const SimResult &r,
                            const AcceleratorDescriptor &d,
                            std::string label = {});

// ConfigBound iff bw_cfg * i_oc < peak, Knee within 1e-6 relative of
// equality, else ComputeBound.
Bound classify(double i_oc, double peak, double bw_cfg);

// Percent of peak with two decimals, e.g. "41.56".
std::string percent_of_peak(double perf, double peak);

// CSV: label,i_oc,perf_ops_per_cycle,bound,roofline_seq_at_ioc,
// roofline_conc_at_ioc — one row per point, curves sampled at its i_oc.
std::string roofline_csv(const std::vector<RooflinePoint> &points,
                         double peak, double bw_cfg);

// CSV: i_operational,i_oc,attainable — a grid for surface plots.
std::string roofsurface_csv(double peak, double bw_mem, double bw_cfg,
                            const std::vector<double> &i_operational,
                            const std::vector<double> &i_oc);

} // namespace acckit
