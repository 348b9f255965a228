#pragma once

#include <cstdint>

namespace glrsens {

// Counter-based stream built on the splitmix64 finalizer. A stream is fully
// determined by (seed, stream id): replication k's stream is constructed
// directly as RngStream(seed, k) with no need to advance through its
// predecessors, which is what makes deterministic parallel replication cheap.
// Only 64-bit integer arithmetic is used, so sequences are identical across
// platforms and thread schedules.
class RngStream {
 public:
  explicit RngStream(std::uint64_t seed, std::uint64_t stream_id = 0)
      : key_(mix64(mix64(seed + kGamma) + stream_id * kGamma)) {}

  std::uint64_t next_u64() { return mix64(key_ + (++counter_) * kGamma); }

  // Uniform on [0, 1) with 53 random bits.
  double next_unit() { return static_cast<double>(next_u64() >> 11) * 0x1.0p-53; }

  std::uint64_t counter() const { return counter_; }

 private:
  static constexpr std::uint64_t kGamma = 0x9E3779B97F4A7C15ull;

  static std::uint64_t mix64(std::uint64_t z) {
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ull;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBull;
    return z ^ (z >> 31);
  }

  std::uint64_t key_;
  std::uint64_t counter_ = 0;
};

}  // namespace glrsens
