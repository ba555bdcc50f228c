#pragma once

#include <cstdint>
#include <random>

namespace coopcr {

// Uniform [0,1) variates from std::mt19937_64. The engine's output sequence is
// fixed by the standard and the double is built from the top 53 bits, so a
// seed reproduces the same stream on every conforming implementation
// (std::uniform_real_distribution does not guarantee that).
class UniformSource {
public:
  explicit UniformSource(std::uint64_t seed) : engine_(seed) {}

  double next() { return static_cast<double>(engine_() >> 11) * 0x1.0p-53; }

private:
  std::mt19937_64 engine_;
};

}  // namespace coopcr
