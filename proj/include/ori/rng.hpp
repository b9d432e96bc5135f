#pragma once

#include <cmath>
#include <cstdint>
#include <numbers>
#include <string_view>
#include <vector>

namespace ori {

namespace detail {

inline std::uint64_t mix64(std::uint64_t z) {
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

inline std::uint64_t fnv1a(std::string_view s) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (char c : s) {
    h ^= static_cast<unsigned char>(c);
    h *= 0x100000001b3ULL;
  }
  return h;
}

}  // namespace detail

// Counter-based generator: output i of a stream is mix64(key + i*gamma), so a
// stream is fully determined by its key and never by call history elsewhere.
// Substreams derive fresh keys from (key, label), which keeps per-clip and
// per-consumer streams independent and reproducible regardless of generation
// order.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : key_(detail::mix64(seed ^ 0x5851f42d4c957f2dULL)) {}

  Rng substream(std::string_view label) const {
    return Rng(key_ ^ detail::fnv1a(label), tag{});
  }

  Rng substream(std::string_view label, std::uint64_t index) const {
    return Rng(key_ ^ detail::fnv1a(label) ^ (0x9e3779b97f4a7c15ULL * (index + 1)), tag{});
  }

  std::uint64_t next_u64() { return detail::mix64(key_ + 0x9e3779b97f4a7c15ULL * ++counter_); }

  // uniform in [0, 1)
  double next_unit() { return static_cast<double>(next_u64() >> 11) * 0x1.0p-53; }

  // uniform in [lo, hi)
  double next_uniform(double lo, double hi) { return lo + (hi - lo) * next_unit(); }

  // standard normal via Box-Muller; u1 is kept strictly positive
  double next_gaussian() {
    double u1 = (static_cast<double>(next_u64() >> 11) + 1.0) * 0x1.0p-53;
    double u2 = next_unit();
    return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * std::numbers::pi * u2);
  }

  // uniform integer in [0, bound)
  std::uint64_t next_below(std::uint64_t bound) { return next_u64() % bound; }

  template <typename T>
  void shuffle(std::vector<T>& v) {
    for (std::size_t i = v.size(); i > 1; --i) {
      std::size_t j = static_cast<std::size_t>(next_below(i));
      std::swap(v[i - 1], v[j]);
    }
  }

 private:
  struct tag {};
  Rng(std::uint64_t raw_key, tag) : key_(detail::mix64(raw_key)) {}

  std::uint64_t key_;
  std::uint64_t counter_ = 0;
};

}  // namespace ori
