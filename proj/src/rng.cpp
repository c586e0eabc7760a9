#include "enlab/rng.hpp"

#include <cmath>
#include <limits>

namespace enlab {

namespace {

std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9E3779B97F4A7C15ULL;
  x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ULL;
  x = (x ^ (x >> 27)) * 0x94D049BB133111EBULL;
  return x ^ (x >> 31);
}

}  // namespace

std::uint64_t path_seed(std::uint64_t seed, std::uint64_t index) {
  return splitmix64(splitmix64(seed) ^ splitmix64(index + 0x632BE59BD9B4E019ULL));
}

double PathRng::uniform() {
  return static_cast<double>(engine_() >> 11) * 0x1.0p-53;
}

double PathRng::exponential(double rate) {
  if (rate == 0.0) return std::numeric_limits<double>::infinity();
  return -std::log1p(-uniform()) / rate;
}

}  // namespace enlab
