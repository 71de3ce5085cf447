#pragma once

#include <cstdint>
#include <string_view>

#include "basisrisk/stats.hpp"

namespace basisrisk {

// Deterministic stream splitting: every consumer derives its own generator
// from (seed, string tags, integer tags), so draw order never depends on
// scheduling or on how many worker threads ran the loop.

inline std::uint64_t splitmix64(std::uint64_t& state) {
  std::uint64_t z = (state += 0x9e3779b97f4a7c15ULL);
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

class Rng {
 public:
  explicit Rng(std::uint64_t seed) {
    std::uint64_t sm = seed;
    for (auto& w : s_) w = splitmix64(sm);
  }

  std::uint64_t next() {
    auto rotl = [](std::uint64_t x, int k) {
      return (x << k) | (x >> (64 - k));
    };
    std::uint64_t result = rotl(s_[0] + s_[3], 23) + s_[0];
    std::uint64_t t = s_[1] << 17;
    s_[2] ^= s_[0];
    s_[3] ^= s_[1];
    s_[1] ^= s_[2];
    s_[0] ^= s_[3];
    s_[2] ^= t;
    s_[3] = rotl(s_[3], 45);
    return result;
  }

  // Uniform on the open interval (0,1); never returns an endpoint, which
  // keeps quantile transforms finite.
  double uniform01() {
    return (static_cast<double>(next() >> 11) + 0.5) * 0x1.0p-53;
  }

  double normal() { return stats::norm_ppf(uniform01()); }

 private:
  std::uint64_t s_[4] = {};
};

class StreamKey {
 public:
  explicit StreamKey(std::uint64_t seed) : h_(seed ^ 0x6a09e667f3bcc908ULL) {
    mix(0x9e3779b97f4a7c15ULL);
  }

  StreamKey& add(std::string_view tag) {
    for (unsigned char ch : tag) mix(static_cast<std::uint64_t>(ch) + 0x100);
    mix(0xff);  // terminator so ("ab","c") != ("a","bc")
    return *this;
  }

  StreamKey& add(std::uint64_t v) {
    mix(v);
    mix(0xfe);
    return *this;
  }

  Rng rng() const { return Rng(h_); }

 private:
  void mix(std::uint64_t v) {
    h_ ^= v;
    std::uint64_t sm = h_;
    h_ = splitmix64(sm);
  }

  std::uint64_t h_;
};

inline Rng stream_rng(std::uint64_t seed, std::string_view a) {
  return StreamKey(seed).add(a).rng();
}

inline Rng stream_rng(std::uint64_t seed, std::string_view a, std::string_view b) {
  return StreamKey(seed).add(a).add(b).rng();
}

inline Rng stream_rng(std::uint64_t seed, std::string_view a, std::uint64_t k) {
  return StreamKey(seed).add(a).add(k).rng();
}

inline Rng stream_rng(std::uint64_t seed, std::string_view a, std::string_view b,
                      std::uint64_t k) {
  return StreamKey(seed).add(a).add(b).add(k).rng();
}

}  // namespace basisrisk
