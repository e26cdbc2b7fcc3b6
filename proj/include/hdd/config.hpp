#pragma once

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <map>
#include <string>
#include <vector>

#include "hdd/diffusion.hpp"
#include "hdd/footprint.hpp"
#include "hdd/metrics.hpp"
#include "hdd/schedules.hpp"
#include "hdd/spectral.hpp"
#include "hdd/synth.hpp"

namespace hdd {

enum class ValueType { kReal, kInt, kUint, kBool, kString };

struct KeySpec {
  std::string key;
  ValueType type;
  std::string default_value;
  std::string help;
};

// Every recognised key with its default. Device powers additionally accept
// any "footprint.power.<device>" key.
const std::vector<KeySpec>& config_keys();

// Flat, namespaced, string-backed configuration. Values are type-checked when
// set; unknown keys are rejected.
class Config {
 public:
  Config();

  void set(const std::string& key, const std::string& value);
  void load(const std::filesystem::path& path);
  void load(std::istream& in, const std::string& source);
  bool has(const std::string& key) const { return values_.count(key) != 0; }

  const std::string& get(const std::string& key) const;
  double real(const std::string& key) const;
  long long integer(const std::string& key) const;
  std::uint64_t uint(const std::string& key) const;
  bool boolean(const std::string& key) const;

  const std::map<std::string, std::string>& values() const noexcept { return values_; }
  // "key = value" for every key, sorted; re-loadable.
  void print(std::ostream& out) const;

 private:
  std::map<std::string, std::string> values_;
};

// Views of the flat config as the typed settings of each module.
NoiseSchedule noise_from(const Config& c);
ShapeSchedule shapes_from(const Config& c, int H, int W, int T);
ChurnParams churn_from(const Config& c);
DiffusionMode mode_from(const Config& c);
TrainConfig train_from(const Config& c);
ToyArchitecture architecture_from(const Config& c, int target_channels, int cond_channels);
PowerLawSpec synth_from(const Config& c);
RapsdOptions rapsd_from(const Config& c);
EmissionFactors factors_from(const Config& c);

}  // namespace hdd
