#pragma once

#include <array>
#include <cstdint>
#include <string_view>

namespace singdiff {

/// Philox4x32-10 block function (Salmon et al., "Parallel random numbers:
/// as easy as 1, 2, 3"). Pure function of (counter, key).
std::array<std::uint32_t, 4> philox4x32(std::array<std::uint32_t, 4> counter,
                                        std::array<std::uint32_t, 2> key) noexcept;

/// SplitMix64 finalizer, used to hash a seed together with stream labels.
std::uint64_t mix64(std::uint64_t x) noexcept;

/// Stable 64-bit hash of a purpose tag (FNV-1a then mixed).
std::uint64_t hash_tag(std::string_view tag) noexcept;

/// Derive the key of an independent stream from the master seed, a purpose
/// tag and an index (path number, sample number, ...).
std::uint64_t derive_stream(std::uint64_t seed, std::string_view tag, std::uint64_t index) noexcept;

/// Counter-based stream: the k-th draw depends only on (key, k), so a stream
/// can be replayed or extended without touching any other stream.
class Stream {
 public:
  explicit Stream(std::uint64_t key) noexcept : key_(key) {}

  std::uint64_t key() const noexcept { return key_; }

  /// Uniform on the open interval (0, 1).
  double uniform() noexcept;

  /// Standard normal (Box-Muller over pairs of uniforms).
  double normal() noexcept;

 private:
  std::uint64_t next_u64() noexcept;

  std::uint64_t key_;
  std::uint64_t counter_ = 0;
  std::array<std::uint32_t, 4> block_{};
  int block_pos_ = 4;
  double spare_normal_ = 0.0;
  bool has_spare_ = false;
};

}  // namespace singdiff
