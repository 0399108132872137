#pragma once

// Deterministic random number generation with hash-derived substreams.
//
// Generator: xoshiro256++ seeded through SplitMix64.  Substreams are derived by
// folding (tag, index) words into the master seed with the SplitMix64
// finalizer:
//
//     key' = mix64(key + 0x9E3779B97F4A7C15 * (word + 1))
//
// Every simulation entry point documents the tag path it folds in, and
// replicated experiments fold {tag::replicate, i} first, so replicate i of
// module m always sees the same stream regardless of worker count or call
// order.  All outputs are pure functions of (seed, fold path, draw index):
// runs are bit-reproducible.
//
// gaussian() and fill_gaussian() use Box-Muller on 53-bit uniforms; a single
// draw consumes exactly two uniforms, a bulk fill consumes two per pair
// (cosine and sine branches), so fill_gaussian(buf[0..1]) matches two calls
// only in law, not bitwise.  Consumption order is part of the contract.

#include <cmath>
#include <cstdint>
#include <numbers>
#include <span>

namespace fbmbt {

namespace detail {

inline constexpr std::uint64_t kGolden = 0x9E3779B97F4A7C15ULL;

constexpr std::uint64_t mix64(std::uint64_t z) {
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
  return z ^ (z >> 31);
}

constexpr std::uint64_t rotl(std::uint64_t x, int k) {
  return (x << k) | (x >> (64 - k));
}

}  // namespace detail

// One derivation step of the substream rule.
constexpr std::uint64_t fold_seed(std::uint64_t key, std::uint64_t word) {
  return detail::mix64(key + detail::kGolden * (word + 1));
}

// Stream tags used by the library.  Values are arbitrary but frozen: changing
// them changes every sampled path.
namespace stream_tag {
inline constexpr std::uint64_t fgn = 0x11;
inline constexpr std::uint64_t fgn_fallback = 0x12;
inline constexpr std::uint64_t points = 0x13;
inline constexpr std::uint64_t walk = 0x21;
inline constexpr std::uint64_t brownian = 0x22;
inline constexpr std::uint64_t coupled = 0x23;
inline constexpr std::uint64_t dyadic_y = 0x31;
inline constexpr std::uint64_t dyadic_x = 0x32;
inline constexpr std::uint64_t b_of_y_time = 0x41;
inline constexpr std::uint64_t b_of_y_pos = 0x42;
inline constexpr std::uint64_t b_of_y_neg = 0x43;
inline constexpr std::uint64_t scenery_path = 0x51;
inline constexpr std::uint64_t scenery_noise = 0x52;
inline constexpr std::uint64_t oracle = 0x61;
inline constexpr std::uint64_t replicate = 0x71;
}  // namespace stream_tag

class Rng {
 public:
  explicit Rng(std::uint64_t seed) {
    // SplitMix64 expansion of the seed into the 256-bit state.
    std::uint64_t z = seed;
    for (auto& word : state_) {
      z += detail::kGolden;
      word = detail::mix64(z);
    }
  }

  // Stream for a derivation path, e.g. Rng::substream(seed, {tag::walk, n}).
  static Rng substream(std::uint64_t seed,
                       std::initializer_list<std::uint64_t> path) {
    std::uint64_t key = seed;
    for (std::uint64_t word : path) key = fold_seed(key, word);
    return Rng(key);
  }

  // xoshiro256++ step.
  std::uint64_t next_u64() {
    const std::uint64_t result =
        detail::rotl(state_[0] + state_[3], 23) + state_[0];
    const std::uint64_t t = state_[1] << 17;
    state_[2] ^= state_[0];
    state_[3] ^= state_[1];
    state_[1] ^= state_[2];
    state_[0] ^= state_[3];
    state_[2] ^= t;
    state_[3] = detail::rotl(state_[3], 45);
    return result;
  }

  // 53-bit uniform on [0, 1).
  double uniform01() { return double(next_u64() >> 11) * 0x1.0p-53; }

  // 53-bit uniform on (0, 1]; safe under log().
  double uniform_open() {
    return double((next_u64() >> 11) + 1) * 0x1.0p-53;
  }

  // One standard normal; consumes exactly two uniforms.
  double gaussian() {
    const double u1 = uniform_open();
    const double u2 = uniform01();
    return std::sqrt(-2.0 * std::log(u1)) *
           std::cos(2.0 * std::numbers::pi * u2);
  }

  // Bulk standard normals; two uniforms per pair (cos/sin branches).
  void fill_gaussian(std::span<double> out) {
    std::size_t i = 0;
    for (; i + 1 < out.size(); i += 2) {
      const double u1 = uniform_open();
      const double u2 = uniform01();
      const double r = std::sqrt(-2.0 * std::log(u1));
      const double a = 2.0 * std::numbers::pi * u2;
      out[i] = r * std::cos(a);
      out[i + 1] = r * std::sin(a);
    }
    if (i < out.size()) out[i] = gaussian();
  }

 private:
  std::uint64_t state_[4];
};

// Compensated (Neumaier) summation; deterministic for a fixed add order.
class CompensatedSum {
 public:
  void add(double x) {
    const double t = sum_ + x;
    if (std::abs(sum_) >= std::abs(x)) {
      comp_ += (sum_ - t) + x;
    } else {
      comp_ += (x - t) + sum_;
    }
    sum_ = t;
  }
  double value() const { return sum_ + comp_; }

 private:
  double sum_ = 0.0;
  double comp_ = 0.0;
};

}  // namespace fbmbt
