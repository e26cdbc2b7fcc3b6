#include "hdd/footprint.hpp"

#include <cmath>
#include <istream>
#include <string>

#include "hdd/error.hpp"
#include "hdd/parse.hpp"

namespace hdd {

void EmissionFactors::validate() const {
  if (!(pue >= 1.0) || !std::isfinite(pue)) throw InvalidArgument("footprint: pue must be >= 1");
  if (!(gamma > 0.0) || !std::isfinite(gamma)) throw InvalidArgument("footprint: gamma must be > 0");
  if (!(su_kwh > 0.0) || !std::isfinite(su_kwh)) throw InvalidArgument("footprint: su_kwh must be > 0");
  for (const auto& [name, kw] : power_kw)
    if (!(kw > 0.0) || !std::isfinite(kw)) throw InvalidArgument("footprint: power of '" + name + "' must be > 0");
}

double EmissionFactors::power(const std::string& device) const {
  const auto it = power_kw.find(device);
  if (it == power_kw.end()) throw InvalidArgument("footprint: unknown device '" + device + "'");
  return it->second;
}

Emissions gpu_hours_emissions(const std::string& device, double hours, const EmissionFactors& f) {
  f.validate();
  if (!(hours >= 0.0) || !std::isfinite(hours)) throw InvalidArgument("footprint: hours must be >= 0");
  const double kwh = f.power(device) * f.pue * hours;
  return {kwh, kwh * f.gamma};
}

Emissions cpu_ksu_emissions(double ksu, const EmissionFactors& f) {
  f.validate();
  if (!(ksu >= 0.0) || !std::isfinite(ksu)) throw InvalidArgument("footprint: ksu must be >= 0");
  const double kwh = 1000.0 * ksu * f.su_kwh;
  return {kwh, kwh * f.gamma};
}

std::vector<RunLogEntry> read_run_log(std::istream& in) {
  std::vector<RunLogEntry> out;
  std::string line;
  int lineno = 0;
  bool header = false;
  while (std::getline(in, line)) {
    ++lineno;
    line = trim(line);
    if (line.empty() || line[0] == '#') continue;
    if (!header) {
      if (line != "device,hours") throw InvalidArgument("run log: expected header 'device,hours', got '" + line + "'");
      header = true;
      continue;
    }
    const auto comma = line.find(',');
    if (comma == std::string::npos) throw InvalidArgument("run log line " + std::to_string(lineno) + ": missing comma");
    RunLogEntry e{trim(line.substr(0, comma)), 0.0};
    e.hours = parse_double(trim(line.substr(comma + 1)), "run log line " + std::to_string(lineno));
    out.push_back(std::move(e));
  }
  if (!header) throw InvalidArgument("run log: empty file (expected header 'device,hours')");
  return out;
}

Emissions run_emissions(const std::vector<RunLogEntry>& log, const EmissionFactors& f, double overhead_fraction) {
  if (!(overhead_fraction >= 0.0) || !std::isfinite(overhead_fraction))
    throw InvalidArgument("footprint: overhead fraction must be >= 0");
  Emissions total;
  for (const RunLogEntry& e : log) {
    const Emissions x = gpu_hours_emissions(e.device, e.hours, f);
    total.kwh += x.kwh;
    total.kg += x.kg;
  }
  total.kwh *= 1.0 + overhead_fraction;
  total.kg *= 1.0 + overhead_fraction;
  return total;
}

void apply_factor_overrides(EmissionFactors& f, const std::map<std::string, std::string>& kv) {
  for (const auto& [key, value] : kv) {
    if (key == "pue") {
      f.pue = parse_double(value, key);
    } else if (key == "gamma") {
      f.gamma = parse_double(value, key);
    } else if (key == "su_kwh") {
      f.su_kwh = parse_double(value, key);
    } else if (key.rfind("power.", 0) == 0 && key.size() > 6) {
      f.power_kw[key.substr(6)] = parse_double(value, key);
    } else {
      throw InvalidArgument("footprint factors: unknown key '" + key + "'");
    }
  }
  f.validate();
}

}  // namespace hdd
