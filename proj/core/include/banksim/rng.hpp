#pragma once

#include <array>
#include <cmath>
#include <cstdint>
#include <numbers>

namespace banksim {

/// SplitMix64 finalizer. Used to derive seeds and stream ids, never as a
/// sample source.
constexpr std::uint64_t mix64(std::uint64_t z) noexcept {
  z += 0x9E3779B97F4A7C15ULL;
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
  return z ^ (z >> 31);
}

/// Combines two words into a stream id (order-sensitive).
constexpr std::uint64_t derive_id(std::uint64_t a, std::uint64_t b) noexcept {
  return mix64(mix64(a) ^ (b * 0xD6E8FEB86659FD93ULL + 0x632BE59BD9B4E019ULL));
}

/// Purposes tag the independent random families of the model so that every
/// (entity, purpose) pair owns a disjoint stream.
enum class Purpose : std::uint64_t {
  kSystemClock = 1,
  kBirthSize = 2,
  kBrownian = 3,
  kContagion = 4,
  kInitial = 5,
  kRegeneration = 6,
  kMutation = 7,
  kKilling = 8,
};

constexpr std::uint64_t stream_id(std::uint64_t entity, Purpose purpose) noexcept {
  return derive_id(entity, static_cast<std::uint64_t>(purpose));
}

/// Seed of replication `run` in an ensemble started from `seed`.
constexpr std::uint64_t run_seed(std::uint64_t seed, std::uint64_t run) noexcept {
  return derive_id(seed ^ 0xA5A5A5A5A5A5A5A5ULL, run);
}

using PhiloxBlock = std::array<std::uint32_t, 4>;

/// One Philox4x32-10 block (Salmon et al., SC'11).
constexpr PhiloxBlock philox4x32_10(PhiloxBlock ctr,
                                    std::array<std::uint32_t, 2> key) noexcept {
  for (int round = 0; round < 10; ++round) {
    const std::uint64_t p0 = std::uint64_t{0xD2511F53u} * ctr[0];
    const std::uint64_t p1 = std::uint64_t{0xCD9E8D57u} * ctr[2];
    ctr = {static_cast<std::uint32_t>(p1 >> 32) ^ ctr[1] ^ key[0],
           static_cast<std::uint32_t>(p1),
           static_cast<std::uint32_t>(p0 >> 32) ^ ctr[3] ^ key[1],
           static_cast<std::uint32_t>(p0)};
    key[0] += 0x9E3779B9u;
    key[1] += 0xBB67AE85u;
  }
  return ctr;
}

/// Philox4x32-10 counter-based generator. The key is the seed and the upper
/// half of the 128-bit counter is the stream id, so streams with distinct ids
/// never overlap. A stream is a sequential cursor: copy it to fork, never share
/// it between threads.
class RngStream {
 public:
  RngStream() = default;
  RngStream(std::uint64_t seed, std::uint64_t stream)
      : seed_(seed), stream_(stream) {}

  std::uint64_t seed() const noexcept { return seed_; }
  std::uint64_t stream() const noexcept { return stream_; }

  std::uint64_t next_u64() noexcept {
    if (pos_ == 2) refill();
    return buffer_[pos_++];
  }

  /// Uniform on the open interval (0, 1) with 53 random bits.
  double uniform() noexcept {
    return (static_cast<double>(next_u64() >> 11) + 0.5) * 0x1.0p-53;
  }

  /// Uniform integer in [0, n). Multiply-shift; the bias is below 2^-64 * n.
  std::uint64_t below(std::uint64_t n) noexcept {
    __extension__ using u128 = unsigned __int128;
    return static_cast<std::uint64_t>((static_cast<u128>(next_u64()) * n) >> 64);
  }

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

  double exponential(double rate) noexcept { return -std::log(uniform()) / rate; }

  bool operator==(const RngStream&) const = default;

 private:
  void refill() noexcept {
    const auto ctr = philox4x32_10(
        {static_cast<std::uint32_t>(block_), static_cast<std::uint32_t>(block_ >> 32),
         static_cast<std::uint32_t>(stream_), static_cast<std::uint32_t>(stream_ >> 32)},
        {static_cast<std::uint32_t>(seed_), static_cast<std::uint32_t>(seed_ >> 32)});
    ++block_;
    buffer_[0] = (std::uint64_t{ctr[1]} << 32) | ctr[0];
    buffer_[1] = (std::uint64_t{ctr[3]} << 32) | ctr[2];
    pos_ = 0;
  }

  std::uint64_t seed_ = 0;
  std::uint64_t stream_ = 0;
  std::uint64_t block_ = 0;
  std::array<std::uint64_t, 2> buffer_{};
  int pos_ = 2;
  bool has_spare_ = false;
  double spare_ = 0.0;
};

}  // namespace banksim
