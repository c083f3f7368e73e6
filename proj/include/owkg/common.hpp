#pragma once

#include <cstdint>
#include <random>
#include <stdexcept>
#include <string>

namespace owkg {

// Raised when an argument lies outside the documented domain of an operation.
class DomainError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

using Rng = std::mt19937_64;

// Seed derivation. Every random stream in the project is derived from a
// single root seed with this rule:
//
//   derive_seed(root, a)       = splitmix64(root ^ splitmix64(a + 1))
//   derive_seed(root, a, b...) = derive_seed(derive_seed(root, a), b...)
//
// Streams are addressed by index (grid cell, repeat, query, trial), never by
// execution order, so parallel schedules cannot change results.
constexpr std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

constexpr std::uint64_t derive_seed(std::uint64_t root, std::uint64_t stream) {
  return splitmix64(root ^ splitmix64(stream + 1));
}

template <typename... Rest>
constexpr std::uint64_t derive_seed(std::uint64_t root, std::uint64_t stream,
                                    Rest... rest) {
  return derive_seed(derive_seed(root, stream),
                     static_cast<std::uint64_t>(rest)...);
}

// Uniform double in [0, 1) from the top 53 bits; independent of the
// standard library's distribution implementation.
inline double uniform01(Rng& rng) {
  return static_cast<double>(rng() >> 11) * 0x1.0p-53;
}

// Uniform integer in [0, n) by Lemire's multiply-shift with rejection.
inline std::uint64_t uniform_below(Rng& rng, std::uint64_t n) {
  if (n == 0) throw DomainError("uniform_below: empty range");
  for (;;) {
    const std::uint64_t x = rng();
    const __uint128_t m = static_cast<__uint128_t>(x) * n;
    const auto low = static_cast<std::uint64_t>(m);
    if (low >= n || low >= (0 - n) % n) {
      return static_cast<std::uint64_t>(m >> 64);
    }
  }
}

inline bool bernoulli(Rng& rng, double p) { return uniform01(rng) < p; }

}  // namespace owkg
