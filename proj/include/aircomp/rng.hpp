#pragma once

#include <cmath>
#include <complex>
#include <cstdint>

namespace aircomp {

// Deterministic 64-bit generator (splitmix64).  All sampling goes through
// this class so that a (scenario, seed) pair reproduces the same realization
// byte for byte, independent of the standard library's distribution
// implementations.
class SplitMix64 {
 public:
  explicit SplitMix64(std::uint64_t seed) : state_(seed) {}

  std::uint64_t next() {
    std::uint64_t z = (state_ += 0x9E3779B97F4A7C15ULL);
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
    return z ^ (z >> 31);
  }

  // Uniform on [0, 1) with 53 random mantissa bits.
  double uniform01() { return static_cast<double>(next() >> 11) * 0x1.0p-53; }

  // Uniform on (0, 1]; safe as a log() argument.
  double uniform01_open() {
    return (static_cast<double>(next() >> 11) + 1.0) * 0x1.0p-53;
  }

  // Standard normal via Box-Muller.  The sine coordinate is discarded so the
  // stream position does not depend on call parity.
  double normal() {
    const double u = uniform01_open();
    const double v = uniform01();
    return std::sqrt(-2.0 * std::log(u)) *
           std::cos(6.2831853071795864769252867665590058 * v);
  }

  // Circularly-symmetric complex normal with unit variance: real and
  // imaginary parts are independent normals of variance 1/2 each.
  std::complex<double> complex_normal_unit() {
    const double s = std::sqrt(0.5);
    const double re = s * normal();
    const double im = s * normal();
    return {re, im};
  }

 private:
  std::uint64_t state_;
};

// Derives an independent sub-stream seed from a master seed.  Each sampling
// stage (placement, direct channels, cross channels, Monte-Carlo batches)
// draws from its own sub-stream, so stages are reproducible in isolation and
// insensitive to each other's consumption.
inline std::uint64_t substream(std::uint64_t master, std::uint64_t tag) {
  SplitMix64 g(master ^ (0xD1B54A32D192ED03ULL * (tag + 1)));
  return g.next();
}

}  // namespace aircomp
