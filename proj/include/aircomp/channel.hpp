#pragma once

#include <Eigen/Dense>
#include <complex>
#include <cstdint>

#include "aircomp/scenario.hpp"

namespace aircomp {

// One fading draw.  direct(k) is the complex channel from device k to its
// own AP; cross(k, j) the complex channel to foreign AP j (zero in the
// device's own column).  cross_eff(k, j) is the real effective interference
// gain produced by phase-aligned transmission: Re{ g * conj(h) / |h| }.
// Its magnitude never exceeds |g|, and only its square enters any MSE.
struct ChannelRealization {
  Eigen::VectorXcd direct;
  Eigen::VectorXd direct_abs;   // |direct|, cached
  Eigen::MatrixXcd cross;       // devices x cells
  Eigen::MatrixXd cross_eff;    // devices x cells, own column zero
};

// Effective interference gain of a phase-aligned transmission through cross
// channel g when the own channel is h.  Throws if h == 0.
double effective_interference(std::complex<double> g, std::complex<double> h);

// Uniformly places each cell's devices inside a disk of scenario radius
// around its AP.  Deterministic in (scenario, seed).
Positions place_devices(const NetworkScenario& scenario, std::uint64_t seed);

// Draws unit CSCG fading for every device-AP pair and applies the amplitude
// path loss sqrt(pathloss_gain(distance)).  A direct coefficient that comes
// out exactly zero is redrawn (the phase-alignment scheme is undefined
// there).  Deterministic in (scenario, positions, seed); the direct and
// cross draws use independent sub-streams of the seed.
ChannelRealization sample_channels(const NetworkScenario& scenario,
                                   const Positions& positions,
                                   std::uint64_t seed);

// Positions followed by channels, both derived from one seed.
ChannelRealization sample_realization(const NetworkScenario& scenario,
                                      std::uint64_t seed);

}  // namespace aircomp
