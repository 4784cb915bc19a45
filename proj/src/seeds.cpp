#include "cperc/seeds.hpp"

#include <cmath>

#include "cperc/waveform.hpp"

namespace cperc {

std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9E3779B97F4A7C15ULL;
  x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ULL;
  x = (x ^ (x >> 27)) * 0x94D049BB133111EBULL;
  return x ^ (x >> 31);
}

std::uint64_t derive_seed(std::uint64_t master, std::string_view component, std::uint64_t index) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : component) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  return splitmix64(splitmix64(master ^ h) + index);
}

double counter_normal(std::uint64_t seed, std::uint64_t index) {
  // one Box-Muller pair per two consecutive indices
  const std::uint64_t base = splitmix64(seed ^ splitmix64(index >> 1));
  const std::uint64_t r1 = splitmix64(base);
  const std::uint64_t r2 = splitmix64(base + 1);
  const double u1 = (static_cast<double>(r1 >> 11) + 1.0) * 0x1.0p-53;
  const double u2 = static_cast<double>(r2 >> 11) * 0x1.0p-53;
  const double radius = std::sqrt(-2.0 * std::log(u1));
  return radius * ((index & 1u) ? std::sin(kTwoPi * u2) : std::cos(kTwoPi * u2));
}

}  // namespace cperc
