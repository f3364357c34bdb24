#pragma once

#include <cstdint>

namespace mixlab {

/// splitmix64 finalizer; the basis of every random stream in the library so
/// results do not depend on the standard library's distribution code.
std::uint64_t mix64(std::uint64_t x);

/// Hash of a tuple of 64-bit words.
std::uint64_t hash_words(std::uint64_t a, std::uint64_t b, std::uint64_t c = 0,
                         std::uint64_t d = 0, std::uint64_t e = 0);

/// Uniform in the open interval (0, 1) from 53 random bits.
double to_unit_open(std::uint64_t bits);

/// Sequential generator used by problem generators and test fixtures.
class SplitMix64 {
 public:
  explicit SplitMix64(std::uint64_t seed) : state_(seed) {}

  std::uint64_t next();
  double uniform();                  // (0, 1)
  double uniform(double lo, double hi);
  double normal();                   // standard normal, Box-Muller

 private:
  std::uint64_t state_;
  bool has_spare_ = false;
  double spare_ = 0.0;
};

/// Standard normal variate addressed by a key and a coordinate index. Identical
/// inputs always produce identical outputs, independent of call order.
double keyed_normal(std::uint64_t key, std::uint64_t index);

}  // namespace mixlab
