#pragma once

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <span>
#include <string>

#include "hdd/toy_denoiser.hpp"

namespace hdd {

// HDDM v1, little-endian:
//   "HDDM" | u16 version | u32 target_channels, cond_channels, width | f64 sigma_data
//   | u64 parameter count | f32 parameters | u32 metadata length | UTF-8 JSON metadata
inline constexpr std::uint16_t kCheckpointVersion = 1;

struct TrainingMetadata {
  int epochs = 0;
  std::uint64_t seed = 0;
  std::string config_hash;
  friend bool operator==(const TrainingMetadata&, const TrainingMetadata&) = default;
};

struct Checkpoint {
  ToyDenoiser model;
  TrainingMetadata metadata;
};

void write_checkpoint(const ToyDenoiser& model, const TrainingMetadata& meta, std::ostream& out);
void write_checkpoint(const ToyDenoiser& model, const TrainingMetadata& meta, const std::filesystem::path& path);
Checkpoint read_checkpoint(std::istream& in);
Checkpoint read_checkpoint(const std::filesystem::path& path);

// "epoch,mean_loss" with epochs numbered from 1.
void write_loss_curve(std::span<const double> curve, std::ostream& out);

// FNV-1a 64-bit, hex encoded.
std::string fnv1a_hex(const std::string& text);

}  // namespace hdd
