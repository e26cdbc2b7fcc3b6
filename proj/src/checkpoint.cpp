#include "hdd/checkpoint.hpp"

#include <cmath>
#include <fstream>
#include <iomanip>
#include <sstream>

#include <json.hpp>

#include "hdd/binio.hpp"

namespace hdd {

void write_checkpoint(const ToyDenoiser& model, const TrainingMetadata& meta, std::ostream& out) {
  const ToyArchitecture& a = model.architecture();
  out.write("HDDM", 4);
  binio::put<std::uint16_t>(out, kCheckpointVersion);
  binio::put<std::uint32_t>(out, static_cast<std::uint32_t>(a.target_channels));
  binio::put<std::uint32_t>(out, static_cast<std::uint32_t>(a.cond_channels));
  binio::put<std::uint32_t>(out, static_cast<std::uint32_t>(a.width));
  binio::put<double>(out, a.sigma_data);
  const auto params = model.parameters();
  binio::put<std::uint64_t>(out, params.size());
  for (double p : params) binio::put<float>(out, static_cast<float>(p));
  const nlohmann::json j = {{"epochs", meta.epochs}, {"seed", meta.seed}, {"config_hash", meta.config_hash}};
  const std::string blob = j.dump();
  binio::put<std::uint32_t>(out, static_cast<std::uint32_t>(blob.size()));
  out.write(blob.data(), static_cast<std::streamsize>(blob.size()));
  if (!out) throw ParseError(ParseErrorKind::kIo, "write_checkpoint: stream failure");
}

void write_checkpoint(const ToyDenoiser& model, const TrainingMetadata& meta, const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw ParseError(ParseErrorKind::kIo, "cannot open " + path.string() + " for writing");
  write_checkpoint(model, meta, out);
}

Checkpoint read_checkpoint(std::istream& in) {
  const std::string magic = binio::get_bytes(in, 4, "magic");
  if (magic != "HDDM") throw ParseError(ParseErrorKind::kBadMagic, "expected \"HDDM\", found \"" + magic + "\"");
  const auto version = binio::get<std::uint16_t>(in, "version");
  if (version != kCheckpointVersion)
    throw ParseError(ParseErrorKind::kVersionMismatch, "unsupported HDDM version " + std::to_string(version));
  ToyArchitecture a;
  a.target_channels = static_cast<int>(binio::get<std::uint32_t>(in, "target channels"));
  a.cond_channels = static_cast<int>(binio::get<std::uint32_t>(in, "conditioning channels"));
  a.width = static_cast<int>(binio::get<std::uint32_t>(in, "width"));
  a.sigma_data = binio::get<double>(in, "sigma_data");
  if (a.target_channels < 1 || a.target_channels > 4096 || a.cond_channels < 0 || a.cond_channels > 4096 || a.width < 1 ||
      a.width > 4096 || !(a.sigma_data > 0.0))
    throw ParseError(ParseErrorKind::kMalformed, "implausible architecture descriptor");
  const auto count = binio::get<std::uint64_t>(in, "parameter count");
  if (count != a.parameter_count())
    throw ParseError(ParseErrorKind::kMalformed, "parameter count " + std::to_string(count) +
                                                     " does not match the architecture descriptor (" +
                                                     std::to_string(a.parameter_count()) + ")");
  std::vector<double> params(count);
  for (auto& p : params) {
    const float f = binio::get<float>(in, "parameters");
    if (!std::isfinite(f)) throw ParseError(ParseErrorKind::kNonFinite, "non-finite parameter");
    p = f;
  }
  const auto len = binio::get<std::uint32_t>(in, "metadata length");
  const std::string blob = binio::get_bytes(in, len, "metadata");
  TrainingMetadata meta;
  try {
    const auto j = nlohmann::json::parse(blob);
    meta.epochs = j.at("epochs").get<int>();
    meta.seed = j.at("seed").get<std::uint64_t>();
    meta.config_hash = j.at("config_hash").get<std::string>();
  } catch (const nlohmann::json::exception& e) {
    throw ParseError(ParseErrorKind::kMalformed, std::string("checkpoint metadata: ") + e.what());
  }
  return {ToyDenoiser(a, std::move(params)), meta};
}

Checkpoint read_checkpoint(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ParseError(ParseErrorKind::kIo, "cannot open " + path.string());
  return read_checkpoint(in);
}

void write_loss_curve(std::span<const double> curve, std::ostream& out) {
  out << "epoch,mean_loss\n";
  const auto old = out.precision(17);
  for (std::size_t i = 0; i < curve.size(); ++i) out << (i + 1) << ',' << curve[i] << '\n';
  out.precision(old);
}

std::string fnv1a_hex(const std::string& text) {
  std::uint64_t h = 0xcbf29ce484222325ull;
  for (unsigned char c : text) {
    h ^= c;
    h *= 0x100000001b3ull;
  }
  std::ostringstream os;
  os << std::hex << std::setw(16) << std::setfill('0') << h;
  return os.str();
}

}  // namespace hdd
