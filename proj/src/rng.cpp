#include "senstir/rng.hpp"

#include <cmath>

#include "senstir/errors.hpp"

namespace senstir {
namespace {

constexpr std::uint64_t kGamma = 0x9e3779b97f4a7c15ULL;

std::uint64_t mix64(std::uint64_t z) {
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

std::uint64_t hash_label(std::string_view label) {
  // FNV-1a 64
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (char c : label) {
    h ^= static_cast<unsigned char>(c);
    h *= 0x100000001b3ULL;
  }
  return h;
}

}  // namespace

RandomStream::RandomStream(std::uint64_t seed) : state_(mix64(seed + kGamma)) {}

RandomStream RandomStream::sub(std::string_view label) const {
  RandomStream s;
  s.state_ = mix64(state_ ^ hash_label(label));
  return s;
}

RandomStream RandomStream::sub(std::uint64_t a) const {
  RandomStream s;
  s.state_ = mix64(state_ ^ mix64(a + kGamma));
  return s;
}

RandomStream RandomStream::sub(std::uint64_t a, std::uint64_t b) const { return sub(a).sub(b); }

std::uint64_t RandomStream::next_u64() {
  state_ += kGamma;
  return mix64(state_);
}

double RandomStream::uniform01() { return static_cast<double>(next_u64() >> 11) * 0x1.0p-53; }

double RandomStream::uniform(double lo, double hi) { return lo + (hi - lo) * uniform01(); }

double RandomStream::normal() {
  // Box-Muller; first uniform nudged away from 0 so log() stays finite.
  double u1 = uniform01();
  double u2 = uniform01();
  if (u1 <= 0.0) u1 = 0x1.0p-53;
  return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * M_PI * u2);
}

bool RandomStream::bernoulli(double p) { return uniform01() < p; }

std::size_t RandomStream::uniform_index(std::size_t n) {
  require(n > 0, ErrorCode::invalid_config, "uniform_index needs n > 0");
  auto k = static_cast<std::size_t>(uniform01() * static_cast<double>(n));
  return k >= n ? n - 1 : k;
}

}  // namespace senstir
