#pragma once

#include <iosfwd>
#include <map>
#include <string>
#include <vector>

namespace hdd {

struct EmissionFactors {
  double pue = 1.3;
  double gamma = 0.73;     // kg CO2 per kWh
  double su_kwh = 9.25e-3; // kWh per CPU service unit
  std::map<std::string, double> power_kw{{"A100", 0.8125}, {"V100", 0.40}, {"cpu", 0.0142}};

  void validate() const;
  double power(const std::string& device) const;
};

struct Emissions {
  double kwh = 0.0;
  double kg = 0.0;
};

Emissions gpu_hours_emissions(const std::string& device, double hours, const EmissionFactors& f = {});
Emissions cpu_ksu_emissions(double ksu, const EmissionFactors& f = {});

struct RunLogEntry {
  std::string device;
  double hours = 0.0;
};
// CSV with header "device,hours".
std::vector<RunLogEntry> read_run_log(std::istream& in);
// Emissions summed over the log, scaled by (1 + overhead_fraction).
Emissions run_emissions(const std::vector<RunLogEntry>& log, const EmissionFactors& f = {},
                        double overhead_fraction = 0.0);

// Overrides from "key = value" lines: pue, gamma, su_kwh, power.<device>.
void apply_factor_overrides(EmissionFactors& f, const std::map<std::string, std::string>& kv);

}  // namespace hdd
