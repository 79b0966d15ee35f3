#pragma once

// Counter-based random streams.
//
// Philox4x64-10 (Salmon et al., SC'11) keyed by (seed, stream_id). The
// counter is the block index within the stream, so a stream is a pure
// function of its key and can be reconstructed anywhere without
// coordination between workers.

#include <array>
#include <cstdint>
#include <limits>

namespace stable_exit {

using PhiloxBlock = std::array<std::uint64_t, 4>;
using PhiloxKey = std::array<std::uint64_t, 2>;

/// One Philox4x64 block with 10 rounds.
PhiloxBlock philox4x64_10(PhiloxBlock counter, PhiloxKey key) noexcept;

class RngStream {
 public:
  using result_type = std::uint64_t;

  RngStream(std::uint64_t seed, std::uint64_t stream_id) noexcept
      : key_{seed, stream_id} {}

  std::uint64_t seed() const noexcept { return key_[0]; }
  std::uint64_t stream_id() const noexcept { return key_[1]; }
  /// Number of 64-bit words consumed so far.
  std::uint64_t position() const noexcept {
    return block_index_ * 4 - static_cast<std::uint64_t>(available_);
  }

  std::uint64_t operator()() noexcept {
    if (available_ == 0) refill();
    return buffer_[4 - available_--];
  }

  static constexpr std::uint64_t min() noexcept { return 0; }
  static constexpr std::uint64_t max() noexcept {
    return std::numeric_limits<std::uint64_t>::max();
  }

  /// Uniform on the open interval (0, 1); never returns 0 or 1.
  double uniform_open() noexcept {
    return (static_cast<double>((*this)() >> 11) + 0.5) * 0x1.0p-53;
  }

  /// Uniform on [0, 1).
  double uniform() noexcept { return static_cast<double>((*this)() >> 11) * 0x1.0p-53; }

 private:
  void refill() noexcept {
    buffer_ = philox4x64_10({block_index_, 0, 0, 0}, key_);
    ++block_index_;
    available_ = 4;
  }

  PhiloxKey key_;
  PhiloxBlock buffer_{};
  std::uint64_t block_index_ = 0;
  int available_ = 0;
};

}  // namespace stable_exit
