#include "ecgbench/evalkit/energy.hpp"

#include <algorithm>
#include <cstdio>
#include <sstream>

#include "ecgbench/errors.hpp"

namespace ecgbench::evalkit {

namespace {

std::string format2(double value) {
  char buffer[32];
  std::snprintf(buffer, sizeof(buffer), "%.2f", value);
  return buffer;
}

}  // namespace

EnergyReport estimate_energy(double duration_h,
                             const std::vector<DevicePower>& devices,
                             double factor_g_per_wh) {
  if (duration_h < 0.0) throw RangeError("negative duration");
  if (factor_g_per_wh <= 0.0) {
    throw RangeError("carbon intensity factor must be positive");
  }
  for (const DevicePower& device : devices) {
    if (device.watts < 0.0) {
      throw RangeError("device '" + device.name + "' has negative power");
    }
    if (device.utilization < 0.0 || device.utilization > 1.0) {
      throw RangeError("device '" + device.name +
                       "' utilization outside [0, 1]");
    }
  }

  EnergyReport report;
  report.duration_h = duration_h;
  report.devices = devices;
  report.factor_g_per_wh = factor_g_per_wh;
  report.energy_wh = 0.0;
  for (const DevicePower& device : devices) {
    report.energy_wh += device.watts * device.utilization * duration_h;
  }
  report.co2_g = report.energy_wh * factor_g_per_wh;
  return report;
}

std::string render_energy(const EnergyReport& report) {
  std::ostringstream out;
  out << "Duration: " << format2(report.duration_h) << " h\n";
  for (const DevicePower& device : report.devices) {
    out << "  " << device.name << ": " << format2(device.watts) << " W x "
        << format2(device.utilization) << " utilization\n";
  }
  out << "Energy: " << format2(report.energy_wh) << " Wh\n";
  out << "CO2eq: " << format2(report.co2_g) << " g ("
      << format2(report.factor_g_per_wh) << " g/Wh)\n";
  return out.str();
}

}  // namespace ecgbench::evalkit
