#pragma once

#include <array>
#include <cstdint>

namespace pqd {

/// Philox4x32-10 counter-based generator. A (key, counter) pair fully
/// determines the output, so every trajectory can own an independent,
/// reproducible stream regardless of scheduling.
class Philox4x32 {
 public:
  using Counter = std::array<std::uint32_t, 4>;
  using Key = std::array<std::uint32_t, 2>;

  static Counter block(Counter counter, Key key);

  /// Stream keyed by (seed, stream); draws advance the low counter words.
  Philox4x32(std::uint64_t seed, std::uint64_t stream);

  /// Uniform double in [0, 1) with 53 random bits.
  double uniform();
  std::uint64_t next_u64();

 private:
  void refill();

  Key key_;
  Counter counter_;
  Counter buffer_{};
  int used_ = 4;
};

}  // namespace pqd
