#pragma once

#include <cstddef>
#include <cstdint>
#include <string_view>

namespace senstir {

// Deterministic splittable random stream (splitmix64 core). Substreams are
// derived by hashing the parent key with a label, so every consumer draws
// from its own sequence regardless of evaluation order or thread count.
class RandomStream {
 public:
  explicit RandomStream(std::uint64_t seed);

  RandomStream sub(std::string_view label) const;
  RandomStream sub(std::uint64_t a) const;
  RandomStream sub(std::uint64_t a, std::uint64_t b) const;

  std::uint64_t next_u64();

  // [0, 1), 53-bit resolution
  double uniform01();
  double uniform(double lo, double hi);
  // standard normal via Box-Muller; always consumes two uniforms
  double normal();
  bool bernoulli(double p);
  // uniform in {0, .., n-1}
  std::size_t uniform_index(std::size_t n);

 private:
  RandomStream() = default;
  std::uint64_t state_;
};

}  // namespace senstir
