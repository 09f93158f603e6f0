#pragma once

#include <array>
#include <cmath>
#include <cstdint>
#include <numbers>

namespace cwhopf {

// Philox4x32-10 block function (Salmon et al., Random123).
// Stateless: the output is a pure function of (counter, key).
struct Philox4x32 {
  using Block = std::array<std::uint32_t, 4>;
  using Key = std::array<std::uint32_t, 2>;

  static constexpr Block generate(Block ctr, Key key) noexcept {
    for (int r = 0; r < 10; ++r) {
      if (r > 0) {
        key[0] += kWeyl0;
        key[1] += kWeyl1;
      }
      const std::uint64_t p0 = std::uint64_t{kMul0} * ctr[0];
      const std::uint64_t p1 = std::uint64_t{kMul1} * ctr[2];
      const auto hi0 = static_cast<std::uint32_t>(p0 >> 32);
      const auto lo0 = static_cast<std::uint32_t>(p0);
      const auto hi1 = static_cast<std::uint32_t>(p1 >> 32);
      const auto lo1 = static_cast<std::uint32_t>(p1);
      ctr = {hi1 ^ ctr[1] ^ key[0], lo1, hi0 ^ ctr[3] ^ key[1], lo0};
    }
    return ctr;
  }

  static constexpr std::uint32_t kMul0 = 0xD2511F53u;
  static constexpr std::uint32_t kMul1 = 0xCD9E8D57u;
  static constexpr std::uint32_t kWeyl0 = 0x9E3779B9u;
  static constexpr std::uint32_t kWeyl1 = 0xBB67AE85u;
};

// Identifies an independent substream: one per (replica, purpose) under a
// master seed. Purposes keep e.g. the micro ensemble and the reference SDE
// ensemble of the same run from sharing random numbers.
struct StreamId {
  std::uint64_t replica = 0;
  std::uint32_t purpose = 0;
};

// Sequential view of a counter-based stream. The key is the master seed; the
// high counter words carry the stream id and the low words count blocks, so
// every (seed, replica, purpose) triple yields a disjoint sequence regardless
// of which worker runs it or in what order.
class RandomStream {
 public:
  using result_type = std::uint64_t;

  RandomStream(std::uint64_t master_seed, StreamId id) noexcept
      : key_{static_cast<std::uint32_t>(master_seed), static_cast<std::uint32_t>(master_seed >> 32)},
        stream_hi_{static_cast<std::uint32_t>(id.replica), static_cast<std::uint32_t>(id.replica >> 32)},
        purpose_(id.purpose) {}

  static constexpr result_type min() noexcept { return 0; }
  static constexpr result_type max() noexcept { return ~std::uint64_t{0}; }

  std::uint32_t next_u32() noexcept {
    if (pos_ == 4) refill();
    return buffer_[pos_++];
  }

  result_type operator()() noexcept {
    const std::uint64_t lo = next_u32();
    const std::uint64_t hi = next_u32();
    return (hi << 32) | lo;
  }

  // Uniform on the open interval (0, 1) with 53 random bits.
  double uniform() noexcept {
    return (static_cast<double>((*this)() >> 11) + 0.5) * 0x1.0p-53;
  }

  double exponential(double rate) noexcept { return -std::log(uniform()) / rate; }

  // Box-Muller; the second variate of each pair is cached.
  double normal() noexcept {
    if (has_spare_) {
      has_spare_ = false;
      return spare_;
    }
    const double radius = std::sqrt(-2.0 * std::log(uniform()));
    const double angle = 2.0 * std::numbers::pi * uniform();
    spare_ = radius * std::sin(angle);
    has_spare_ = true;
    return radius * std::cos(angle);
  }

  bool bernoulli(double p) noexcept { return uniform() < p; }

  std::uint64_t blocks_consumed() const noexcept { return block_; }

 private:
  void refill() noexcept {
    // Purpose occupies the top byte of the block counter; 2^56 blocks per
    // stream is far beyond any run.
    const std::uint64_t c = block_++ | (std::uint64_t{purpose_} << 56);
    buffer_ = Philox4x32::generate(
        {static_cast<std::uint32_t>(c), static_cast<std::uint32_t>(c >> 32), stream_hi_[0], stream_hi_[1]}, key_);
    pos_ = 0;
  }

  Philox4x32::Key key_;
  std::array<std::uint32_t, 2> stream_hi_;
  std::uint32_t purpose_;
  std::uint64_t block_ = 0;
  Philox4x32::Block buffer_{};
  int pos_ = 4;
  double spare_ = 0.0;
  bool has_spare_ = false;
};

// Stream purposes used across the toolkit.
namespace purpose {
inline constexpr std::uint32_t micro = 1;
inline constexpr std::uint32_t limit_sde = 2;
inline constexpr std::uint32_t linear_sde = 3;
inline constexpr std::uint32_t direct_sde = 4;
}  // namespace purpose

}  // namespace cwhopf
