#include "hdd/config.hpp"

#include <cmath>
#include <ostream>

#include "hdd/error.hpp"
#include "hdd/parse.hpp"

namespace hdd {
namespace {

constexpr const char* kPowerPrefix = "footprint.power.";

const KeySpec* find_spec(const std::string& key) {
  for (const KeySpec& s : config_keys())
    if (s.key == key) return &s;
  return nullptr;
}

void check_value(ValueType type, const std::string& key, const std::string& value) {
  switch (type) {
    case ValueType::kReal:
      parse_double(value, key);
      break;
    case ValueType::kInt:
      parse_int(value, key);
      break;
    case ValueType::kUint:
      parse_u64(value, key);
      break;
    case ValueType::kBool:
      parse_bool(value, key);
      break;
    case ValueType::kString:
      break;
  }
}

}  // namespace

const std::vector<KeySpec>& config_keys() {
  using T = ValueType;
  static const std::vector<KeySpec> keys{
      {"seed", T::kUint, "0", "root seed; every random stream derives from it"},
      {"noise.sigma_min", T::kReal, "0.002", "smallest noise level"},
      {"noise.sigma_max", T::kReal, "80", "largest noise level"},
      {"noise.rho", T::kReal, "7", "Karras schedule warp"},
      {"noise.steps", T::kInt, "50", "sampling steps T"},
      {"shapes.kind", T::kString, "equal", "identity | equal | unit | tandem"},
      {"shapes.k", T::kInt, "1", "noise steps per shape level (tandem)"},
      {"sampler.s_churn", T::kReal, "1", "EDM churn"},
      {"sampler.s_min", T::kReal, "0", "churn window lower bound"},
      {"sampler.s_max", T::kReal, "inf", "churn window upper bound"},
      {"sampler.s_noise", T::kReal, "1", "churn noise inflation"},
      {"sampler.mode", T::kString, "ve", "ve | literal"},
      {"sampler.members", T::kInt, "1", "ensemble members per input"},
      {"model.width", T::kInt, "32", "hidden channels of the toy denoiser"},
      {"model.sigma_data", T::kReal, "0.5", "data std used by preconditioning"},
      {"train.epochs", T::kInt, "20", "training epochs"},
      {"train.batch_size", T::kInt, "1", "examples per SGD step"},
      {"train.learning_rate", T::kReal, "0.01", "SGD step size"},
      {"train.steps", T::kInt, "500", "schedule length used to draw training noise levels"},
      {"train.loss", T::kString, "edm-eps", "edm-eps | edm | unit"},
      {"synth.beta", T::kReal, "2.4", "spectral exponent"},
      {"synth.height", T::kInt, "64", "fine grid height"},
      {"synth.width", T::kInt, "64", "fine grid width"},
      {"synth.factor", T::kInt, "4", "coarsening factor"},
      {"synth.count", T::kInt, "256", "number of pairs"},
      {"synth.mean", T::kReal, "0", "field mean"},
      {"synth.std", T::kReal, "0.5", "field std"},
      {"rapsd.bins_per_decade", T::kInt, "12", "log-spaced bins per decade"},
      {"rapsd.min_count", T::kInt, "1", "minimum coefficients per reported bin"},
      {"eval.data_range", T::kReal, "0", "PSNR data range; 0 uses max - min of the observations"},
      {"eval.nrmse_mode", T::kString, "printed", "printed | rms"},
      {"klcheck.instances", T::kInt, "1000", "random instances"},
      {"klcheck.max_support", T::kInt, "64", "largest fine support"},
      {"footprint.pue", T::kReal, "1.3", "power usage effectiveness"},
      {"footprint.gamma", T::kReal, "0.73", "kg CO2 per kWh"},
      {"footprint.su_kwh", T::kReal, "0.00925", "kWh per CPU service unit"},
      {"footprint.overhead", T::kReal, "0", "fractional overhead on device-hours"},
      {"footprint.power.A100", T::kReal, "0.8125", "kW per device"},
      {"footprint.power.V100", T::kReal, "0.4", "kW per device"},
      {"footprint.power.cpu", T::kReal, "0.0142", "kW per core"},
  };
  return keys;
}

Config::Config() {
  for (const KeySpec& s : config_keys()) values_[s.key] = s.default_value;
}

void Config::set(const std::string& key, const std::string& value) {
  if (const KeySpec* s = find_spec(key)) {
    check_value(s->type, key, value);
  } else if (key.rfind(kPowerPrefix, 0) == 0 && key.size() > std::string(kPowerPrefix).size()) {
    check_value(ValueType::kReal, key, value);
  } else {
    throw InvalidArgument("unknown config key '" + key + "'");
  }
  values_[key] = trim(value);
}

void Config::load(const std::filesystem::path& path) {
  for (const KeyValue& kv : read_key_values(path)) {
    try {
      set(kv.key, kv.value);
    } catch (const InvalidArgument& e) {
      throw InvalidArgument(path.string() + ":" + std::to_string(kv.line) + ": " + e.what());
    }
  }
}

void Config::load(std::istream& in, const std::string& source) {
  for (const KeyValue& kv : read_key_values(in, source)) {
    try {
      set(kv.key, kv.value);
    } catch (const InvalidArgument& e) {
      throw InvalidArgument(source + ":" + std::to_string(kv.line) + ": " + e.what());
    }
  }
}

const std::string& Config::get(const std::string& key) const {
  const auto it = values_.find(key);
  if (it == values_.end()) throw InvalidArgument("unknown config key '" + key + "'");
  return it->second;
}

double Config::real(const std::string& key) const { return parse_double(get(key), key); }
long long Config::integer(const std::string& key) const { return parse_int(get(key), key); }
std::uint64_t Config::uint(const std::string& key) const { return parse_u64(get(key), key); }
bool Config::boolean(const std::string& key) const { return parse_bool(get(key), key); }

void Config::print(std::ostream& out) const {
  for (const auto& [k, v] : values_) out << k << " = " << v << '\n';
}

namespace {
int as_int(const Config& c, const std::string& key) {
  const long long v = c.integer(key);
  if (v < INT32_MIN || v > INT32_MAX) throw InvalidArgument(key + ": out of range");
  return static_cast<int>(v);
}
}  // namespace

NoiseSchedule noise_from(const Config& c) {
  return karras_sigmas(c.real("noise.sigma_min"), c.real("noise.sigma_max"), c.real("noise.rho"),
                       as_int(c, "noise.steps"));
}

ShapeSchedule shapes_from(const Config& c, int H, int W, int T) {
  return make_shapes(parse_shape_kind(c.get("shapes.kind")), H, W, T, as_int(c, "shapes.k"));
}

ChurnParams churn_from(const Config& c) {
  ChurnParams p;
  p.s_churn = c.real("sampler.s_churn");
  p.s_min = c.real("sampler.s_min");
  p.s_max = c.real("sampler.s_max");
  p.s_noise = c.real("sampler.s_noise");
  p.validate();
  return p;
}

DiffusionMode mode_from(const Config& c) {
  const std::string& m = c.get("sampler.mode");
  if (m == "ve") return DiffusionMode::kVarianceExploding;
  if (m == "literal") return DiffusionMode::kLiteral;
  throw InvalidArgument("sampler.mode: expected ve or literal, got '" + m + "'");
}

TrainConfig train_from(const Config& c) {
  TrainConfig t;
  t.epochs = as_int(c, "train.epochs");
  t.batch_size = as_int(c, "train.batch_size");
  t.learning_rate = c.real("train.learning_rate");
  t.seed = c.uint("seed");
  t.steps = as_int(c, "train.steps");
  t.shape_kind = parse_shape_kind(c.get("shapes.kind"));
  t.tandem_k = as_int(c, "shapes.k");
  t.sigma_min = c.real("noise.sigma_min");
  t.sigma_max = c.real("noise.sigma_max");
  t.rho = c.real("noise.rho");
  t.loss.weighting = parse_loss_weighting(c.get("train.loss"));
  t.loss.sigma_data = c.real("model.sigma_data");
  t.validate();
  return t;
}

ToyArchitecture architecture_from(const Config& c, int target_channels, int cond_channels) {
  ToyArchitecture a;
  a.target_channels = target_channels;
  a.cond_channels = cond_channels;
  a.width = as_int(c, "model.width");
  a.sigma_data = c.real("model.sigma_data");
  return a;
}

PowerLawSpec synth_from(const Config& c) {
  PowerLawSpec s;
  s.beta = c.real("synth.beta");
  s.height = as_int(c, "synth.height");
  s.width = as_int(c, "synth.width");
  s.seed = c.uint("seed");
  s.mean = c.real("synth.mean");
  s.std = c.real("synth.std");
  s.validate();
  return s;
}

RapsdOptions rapsd_from(const Config& c) {
  RapsdOptions o;
  o.bins_per_decade = as_int(c, "rapsd.bins_per_decade");
  const long long mc = c.integer("rapsd.min_count");
  if (mc < 1) throw InvalidArgument("rapsd.min_count must be >= 1");
  o.min_count = static_cast<std::size_t>(mc);
  return o;
}

EmissionFactors factors_from(const Config& c) {
  EmissionFactors f;
  f.pue = c.real("footprint.pue");
  f.gamma = c.real("footprint.gamma");
  f.su_kwh = c.real("footprint.su_kwh");
  f.power_kw.clear();
  const std::string prefix = kPowerPrefix;
  for (const auto& [k, v] : c.values())
    if (k.rfind(prefix, 0) == 0) f.power_kw[k.substr(prefix.size())] = parse_double(v, k);
  f.validate();
  return f;
}

}  // namespace hdd
