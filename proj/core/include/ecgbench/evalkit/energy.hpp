#pragma once

#include <string>
#include <vector>

namespace ecgbench::evalkit {

// One powered device contributing to a run: draw in watts scaled by a
// utilization fraction (1.0 = fully busy for the whole duration).
struct DevicePower {
  std::string name;
  double watts = 0.0;
  double utilization = 1.0;
};

struct EnergyReport {
  double duration_h = 0.0;
  std::vector<DevicePower> devices;
  double energy_wh = 0.0;
  double co2_g = 0.0;
  double factor_g_per_wh = 0.0;
};

// Time x power energy model: energy_wh = sum_d watts_d x utilization_d x
// duration_h and co2_g = energy_wh x factor.  The default factor was
// calibrated so published (Wh, g) pairs agree within rounding.  Negative
// durations, watts or utilizations, or a non-positive factor, raise
// RangeError.
EnergyReport estimate_energy(double duration_h,
                             const std::vector<DevicePower>& devices,
                             double factor_g_per_wh = 0.545);

// Aligned text block listing devices, total energy and CO2.
std::string render_energy(const EnergyReport& report);

}  // namespace ecgbench::evalkit
