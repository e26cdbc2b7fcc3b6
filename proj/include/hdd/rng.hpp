#pragma once

#include <array>
#include <cstdint>
#include <initializer_list>
#include <span>

namespace hdd::rng {

// Philox4x32-10 (Salmon et al., SC'11). Stateless: the output block is a pure
// function of (counter, key).
using Counter = std::array<std::uint32_t, 4>;
using Key = std::array<std::uint32_t, 2>;

Counter philox4x32_10(Counter ctr, Key key) noexcept;

// Stable 64-bit mixing used to derive stream ids; splitmix64 finalizer.
std::uint64_t mix64(std::uint64_t x) noexcept;

// Folds a list of integers into one stream id. Order matters.
std::uint64_t stream_id(std::initializer_list<std::uint64_t> parts) noexcept;

// Roles keep the streams of different consumers disjoint.
enum class Role : std::uint64_t {
  kInit = 1,
  kChurn = 2,
  kAncestral = 3,
  kTrainStep = 4,
  kTrainNoise = 5,
  kShuffle = 6,
  kParamInit = 7,
  kSynth = 8,
  kCorrupt = 9,
  kCampaign = 10,
  kEnsemble = 11,
  kTest = 12,  // random instances in tests and the acceptance suite
};

// A sequential view over one Philox stream: key = seed, counter = (block, stream).
// Two Streams with the same (seed, stream) produce identical sequences.
class Stream {
 public:
  Stream(std::uint64_t seed, std::uint64_t stream) noexcept;

  std::uint32_t next_u32() noexcept;
  std::uint64_t next_u64() noexcept;
  // Uniform on the open interval (0, 1), 53-bit resolution.
  double uniform() noexcept;
  double normal() noexcept;
  // Uniform integer in [0, n); n > 0. Lemire-style rejection keeps it unbiased.
  std::uint64_t below(std::uint64_t n) noexcept;

  void fill_normal(std::span<double> out) noexcept;

 private:
  void refill() noexcept;

  Key key_;
  std::uint64_t stream_;
  std::uint64_t block_ = 0;
  Counter buf_{};
  int pos_ = 4;
  bool have_spare_ = false;
  double spare_ = 0.0;
};

inline Stream make_stream(std::uint64_t seed, Role role, std::uint64_t a = 0, std::uint64_t b = 0,
                          std::uint64_t c = 0) noexcept {
  return Stream(seed, stream_id({static_cast<std::uint64_t>(role), a, b, c}));
}

}  // namespace hdd::rng
