#include <cmath>

#include "doctest.h"

#include "acckit/roofline.hpp"
#include "support/helpers.hpp"

using namespace acckit;

// The worked example behind the shipped sequential descriptor: peak 512
// ops/cycle, configuration bandwidth 16/9 bytes/cycle, measured intensity
// 204.8 ops/byte.
TEST_CASE("sequential roofline at the measured point") {
  double frac = attainable_sequential(512, 16.0 / 9.0, 204.8) / 512;
  CHECK(frac >= 0.41);
  CHECK(frac <= 0.42);
  CHECK(percent_of_peak(attainable_sequential(512, 16.0 / 9.0, 204.8), 512)
        == "41.56");
}

TEST_CASE("effective bandwidth charges the calc cycles too") {
  double bw = effective_config_bandwidth(2560, 2325, 480);
  CHECK(bw >= 0.910);
  CHECK(bw <= 0.916);
  double frac = attainable_sequential(512, bw, 204.8) / 512;
  CHECK(frac >= 0.263);
  CHECK(frac <= 0.273);
  // fallback applies only when no cycles were spent
  CHECK(effective_config_bandwidth(0, 0, 0, 2.5) == 2.5);
  CHECK(effective_config_bandwidth(10, 0, 4) == 2.5);
}

TEST_CASE("sequential curve is half of peak at the knee") {
  const double peak = 512, bw = 16.0 / 9.0;
  double knee = knee_intensity(peak, bw);
  CHECK(knee == doctest::Approx(288.0).epsilon(1e-12));
  CHECK(attainable_sequential(peak, bw, knee) ==
        doctest::Approx(peak / 2).epsilon(1e-12));
  CHECK(attainable_concurrent(peak, bw, knee) ==
        doctest::Approx(peak).epsilon(1e-12));
}

TEST_CASE("scheme gap peaks at the knee") {
  const double peak = 1024, bw = 8.0 / 3.0;
  const double knee = knee_intensity(peak, bw);
  double best = attainable_concurrent(peak, bw, knee) /
                attainable_sequential(peak, bw, knee);
  CHECK(best == doctest::Approx(2.0).epsilon(1e-9));
  for (int e = -20; e <= 20; ++e) {
    double i = knee * std::pow(2.0, e * 0.3);
    double ratio = attainable_concurrent(peak, bw, i) /
                   attainable_sequential(peak, bw, i);
    CHECK(ratio <= best + 1e-9);
  }
}

TEST_CASE("processor and combined ceilings") {
  CHECK(attainable_processor(100, 4, 10) == 40);
  CHECK(attainable_processor(100, 4, 50) == 100);

  RooflineInputs in;
  in.peak_perf = 100;
  in.bw_config = 2;
  in.bw_memory = 4;
  in.i_oc = 30;    // config ceiling 60
  in.i_operational = 10;  // memory ceiling 40
  CHECK(attainable_combined(in) == 40);
  in.i_operational = 1000;
  CHECK(attainable_combined(in) == 60);
  in.i_oc = 1000;
  CHECK(attainable_combined(in) == 100);
  in.bw_memory.reset();  // memory term drops out
  CHECK(attainable_combined(in) == 100);
}

TEST_CASE("bound classification with a knee tolerance") {
  const double peak = 512, bw = 16.0 / 9.0;
  const double knee = knee_intensity(peak, bw);
  CHECK(classify(knee * 0.9, peak, bw) == Bound::ConfigBound);
  CHECK(classify(knee * 1.1, peak, bw) == Bound::ComputeBound);
  CHECK(classify(knee, peak, bw) == Bound::Knee);
  CHECK(classify(knee * (1 + 1e-7), peak, bw) == Bound::Knee);
  CHECK(bound_name(Bound::ConfigBound) ==
        std::string("configuration-bound"));
}

TEST_CASE("measurements map onto the roofline") {
  AcceleratorDescriptor d = testkit::seq_accel();  // peak 512, bw 8/3
  SimResult r;
  r.total_ops = 4096;
  r.total_cycles = 64;
  r.config_bytes_written = 16;
  RooflinePoint pt = measure_point(r, d, "probe");
  CHECK(pt.label == "probe");
  CHECK(pt.i_oc == doctest::Approx(256.0));
  CHECK(pt.perf == doctest::Approx(64.0));
  CHECK(pt.bound == Bound::ComputeBound);  // 8/3 * 256 > 512

  SimResult none;
  RooflinePoint origin = measure_point(none, d);
  CHECK(origin.i_oc == 0);
  CHECK(origin.perf == 0);

  SimResult free_cfg;
  free_cfg.total_ops = 10;
  free_cfg.total_cycles = 5;
  RooflinePoint inf_pt = measure_point(free_cfg, d);
  CHECK(std::isinf(inf_pt.i_oc));
  CHECK(inf_pt.bound == Bound::ComputeBound);
}

TEST_CASE("roofline CSV schema") {
  std::vector<RooflinePoint> pts;
  pts.push_back({204.8, 212.0, Bound::ConfigBound, "baseline"});
  pts.push_back({400.0, 500.0, Bound::ComputeBound, "tuned"});
  std::string csv = roofline_csv(pts, 512, 16.0 / 9.0);
  CHECK(csv.rfind("label,i_oc,perf_ops_per_cycle,bound,roofline_seq_at_ioc,"
                  "roofline_conc_at_ioc\n",
                  0) == 0);
  CHECK(std::count(csv.begin(), csv.end(), '\n') == 3);
  CHECK(csv.find("baseline,") != std::string::npos);
  CHECK(csv.find("configuration-bound") != std::string::npos);
}

TEST_CASE("roof surface CSV schema") {
  std::string csv =
      roofsurface_csv(512, 16, 16.0 / 9.0, {1, 8}, {10, 100, 1000});
  CHECK(csv.rfind("i_operational,i_oc,attainable\n", 0) == 0);
  CHECK(std::count(csv.begin(), csv.end(), '\n') == 7);  // header + 2*3
}
