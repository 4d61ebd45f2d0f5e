#pragma once

#include <cstdint>
#include <random>
#include <string_view>

namespace oscar {

// FNV-1a, 64 bit. Stable across platforms and runs.
constexpr std::uint64_t fnv1a(std::string_view bytes,
                              std::uint64_t basis = 0xcbf29ce484222325ULL) {
  std::uint64_t h = basis;
  for (unsigned char c : bytes) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  return h;
}

constexpr std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

/// Seedable, splittable random source. Children are derived from the parent
/// key and a label, never from the parent's draw position, so a substream is
/// a pure function of (root seed, label path).
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : key_(splitmix64(seed)), engine_(key_) {}

  Rng derive(std::string_view label) const { return Rng::from_key(splitmix64(key_ ^ fnv1a(label))); }
  Rng derive(std::uint64_t label) const { return Rng::from_key(splitmix64(key_ + splitmix64(label))); }

  std::uint64_t key() const noexcept { return key_; }
  std::mt19937_64& engine() noexcept { return engine_; }

  double uniform() { return std::uniform_real_distribution<double>(0.0, 1.0)(engine_); }
  double uniform(double lo, double hi) { return std::uniform_real_distribution<double>(lo, hi)(engine_); }
  double normal(double mean, double sd) {
    if (sd == 0.0) return mean;
    return std::normal_distribution<double>(mean, sd)(engine_);
  }
  // Uniform index in [0, n). n must be positive.
  std::size_t index(std::size_t n) {
    return std::uniform_int_distribution<std::size_t>(0, n - 1)(engine_);
  }
  bool bernoulli(double p) { return uniform() < p; }

 private:
  static Rng from_key(std::uint64_t key) {
    Rng r(0);
    r.key_ = key;
    r.engine_.seed(key);
    return r;
  }

  std::uint64_t key_;
  std::mt19937_64 engine_;
};

/// Substream for one (video, step, trial) cell of the evaluation protocol.
inline Rng trial_stream(std::uint64_t seed, std::string_view video_id, int step, int trial) {
  return Rng(seed).derive(video_id).derive(static_cast<std::uint64_t>(step)).derive(
      static_cast<std::uint64_t>(trial));
}

}  // namespace oscar
