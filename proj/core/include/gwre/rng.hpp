#pragma once

#include <cmath>
#include <cstdint>
#include <span>
#include <vector>

namespace gwre {

/// Counter-based keyed RNG stream (splitmix64 over a keyed counter).
///
/// A stream is fully determined by its 64-bit key, so replicas, vertices
/// and worker threads can each own an independent stream derived from the
/// root seed without any shared state. Draw order within a stream matters;
/// stream identity does not depend on creation order.
class CounterRng {
 public:
  explicit CounterRng(std::uint64_t key) : key_(key) {}

  static std::uint64_t finalize(std::uint64_t z) {
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ull;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebull;
    return z ^ (z >> 31);
  }

  /// Derives a child key; used to key per-vertex and per-replica streams.
  static std::uint64_t derive(std::uint64_t key, std::uint64_t salt) {
    return finalize(finalize(key) ^ (salt + 0x9e3779b97f4a7c15ull));
  }

  std::uint64_t next() {
    ctr_ += 0x9e3779b97f4a7c15ull;
    return finalize(key_ + ctr_);
  }

  /// Uniform in [0, 1), 53 bits of precision.
  double uniform() { return static_cast<double>(next() >> 11) * 0x1.0p-53; }

  /// Uniform in (0, 1]; safe as an argument to std::log.
  double uniform_pos() {
    return (static_cast<double>(next() >> 11) + 1.0) * 0x1.0p-53;
  }

  double exponential(double rate) { return -std::log(uniform_pos()) / rate; }

  /// Samples an index from unnormalized nonnegative weights.
  std::size_t discrete(std::span<const double> weights) {
    double total = 0.0;
    for (double w : weights) total += w;
    double u = uniform() * total;
    double acc = 0.0;
    for (std::size_t i = 0; i + 1 < weights.size(); ++i) {
      acc += weights[i];
      if (u < acc) return i;
    }
    return weights.empty() ? 0 : weights.size() - 1;
  }

  bool bernoulli(double p) { return uniform() < p; }

  std::uint64_t key() const { return key_; }

 private:
  std::uint64_t key_;
  std::uint64_t ctr_ = 0;
};

/// FNV-1a, used for config hashes and vertex-address keys.
inline std::uint64_t fnv1a(const void* data, std::size_t n,
                           std::uint64_t h = 0xcbf29ce484222325ull) {
  const auto* p = static_cast<const unsigned char*>(data);
  for (std::size_t i = 0; i < n; ++i) {
    h ^= p[i];
    h *= 0x100000001b3ull;
  }
  return h;
}

}  // namespace gwre
