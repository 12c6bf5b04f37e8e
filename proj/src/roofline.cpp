#include <algorithm>
#include <cmath>
#include <cstdio>
#include <limits>
#include <sstream>

#include "acckit/roofline.hpp"

namespace acckit {

const char *bound_name(Bound b) {
  switch (b) {
  case Bound::ConfigBound:  return "configuration-bound";
  case Bound::ComputeBound: return "compute-bound";
  case Bound::Knee:         return "knee";
  }
  return "?";
}

double attainable_processor(double peak, double bw_mem, double i_op) {
  return std::min(peak, bw_mem * i_op);
}

double attainable_concurrent(double peak, double bw_cfg, double i_oc) {
  return std::min(peak, bw_cfg * i_oc);
}

double attainable_sequential(double peak, double bw_cfg, double i_oc) {
  return 1.0 / (1.0 / peak + 1.0 / (bw_cfg * i_oc));
}

double effective_config_bandwidth(double n_bytes, double t_calc,
                                  double t_set, double fallback) {
  double t = t_calc + t_set;
  if (t <= 0)
    return fallback;
  return n_bytes / t;
}

double attainable_combined(const RooflineInputs &in) {
  double a = std::min(in.peak_perf, in.bw_config * in.i_oc);
  if (in.bw_memory && in.i_operational)
    a = std::min(a, *in.bw_memory * *in.i_operational);
  return a;
}

double knee_intensity(double peak, double bw_cfg) { return peak / bw_cfg; }

Bound classify(double i_oc, double peak, double bw_cfg) {
  double cfg = bw_cfg * i_oc;
  if (std::abs(cfg - peak) <= 1e-6 * std::max(std::abs(cfg), peak))
    return Bound::Knee;
  return cfg < peak ? Bound::ConfigBound : Bound::ComputeBound;
}

RooflinePoint measure_point(const SimResult &r,
                            const AcceleratorDescriptor &d,
                            std::string label) {
  RooflinePoint pt;
  pt.label = std::move(label);
  if (r.total_ops == 0) {
    pt.i_oc = 0;
    pt.perf = 0;
    pt.bound = Bound::ConfigBound;
    return pt;
  }
  pt.perf = r.total_cycles
                ? static_cast<double>(r.total_ops) /
                      static_cast<double>(r.total_cycles)
                : 0.0;
  if (r.config_bytes_written == 0) {
    pt.i_oc = std::numeric_limits<double>::infinity();
    pt.bound = Bound::ComputeBound;
    return pt;
  }
  pt.i_oc = static_cast<double>(r.total_ops) /
            static_cast<double>(r.config_bytes_written);
  pt.bound = classify(pt.i_oc, d.peak_perf, config_bandwidth(d));
  return pt;
}

std::string percent_of_peak(double perf, double peak) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.2f", 100.0 * perf / peak);
  return buf;
}

namespace {

void put_num(std::ostringstream &os, double v) {
  if (std::isinf(v)) {
    os << (v > 0 ? "inf" : "-inf");
    return;
  }
  char buf[48];
  std::snprintf(buf, sizeof buf, "%.9g", v);
  os << buf;
}

} // namespace

std::string roofline_csv(const std::vector<RooflinePoint> &points,
                         double peak, double bw_cfg) {
  std::ostringstream os;
  os << "label,i_oc,perf_ops_per_cycle,bound,roofline_seq_at_ioc,"
        "roofline_conc_at_ioc\n";
  for (const auto &pt : points) {
    os << pt.label << ",";
    put_num(os, pt.i_oc);
    os << ",";
    put_num(os, pt.perf);
    os << "," << bound_name(pt.bound) << ",";
    double seq = std::isinf(pt.i_oc) ? peak
                                     : attainable_sequential(peak, bw_cfg,
                                                             pt.i_oc);
    // at infinite intensity the sequential curve reaches its asymptote
    put_num(os, seq);
    os << ",";
    put_num(os, attainable_concurrent(peak, bw_cfg,
                                      std::isinf(pt.i_oc)
                                          ? peak / bw_cfg
                                          : pt.i_oc));
    os << "\n";
  }
  return os.str();
}

std::string roofsurface_csv(double peak, double bw_mem, double bw_cfg,
                            const std::vector<double> &i_operational,
                            const std::vector<double> &i_oc) {
  std::ostringstream os;
  os << "i_operational,i_oc,attainable\n";
  for (double iop : i_operational)
    for (double ioc : i_oc) {
      RooflineInputs in;
      in.peak_perf = peak;
      in.bw_config = bw_cfg;
      in.bw_memory = bw_mem;
      in.i_oc = ioc;
      in.i_operational = iop;
      put_num(os, iop);
      os << ",";
      put_num(os, ioc);
      os << ",";
      put_num(os, attainable_combined(in));
      os << "\n";
    }
  return os.str();
}

} // namespace acckit
