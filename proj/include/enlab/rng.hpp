#pragma once

#include <cstdint>
#include <random>

namespace enlab {

// Counter-based seed derivation: path i of a batch seeded with `seed`
// always gets the same stream, whatever thread runs it.
std::uint64_t path_seed(std::uint64_t seed, std::uint64_t index);

class PathRng {
 public:
  explicit PathRng(std::uint64_t seed) : engine_(seed) {}

  // Uniform on [0, 1) with 53 random bits.
  double uniform();
  // Exponential with the given rate; +inf when rate == 0.
  double exponential(double rate);
  std::uint64_t bits() { return engine_(); }

 private:
  std::mt19937_64 engine_;
};

}  // namespace enlab
