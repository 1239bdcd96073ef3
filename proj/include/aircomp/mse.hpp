#pragma once

#include <Eigen/Dense>
#include <cstdint>

#include "aircomp/channel.hpp"
#include "aircomp/rng.hpp"
#include "aircomp/scenario.hpp"

namespace aircomp {

// A power/denoising operating point: one transmit power per device (global
// indexing) and one denoising factor per AP.
struct Allocation {
  Eigen::VectorXd powers_w;  // p_k >= 0, p_k <= budget
  Eigen::VectorXd denoise;   // eta_l > 0 (may be +inf for an idle cell)
};

// Affine normalization map applied to raw sensor readings before
// transmission, s = (x - mean) / stddev, and its inverse.  The aggregation
// error metric is invariant under this map, so the simulator works on
// normalized symbols directly; the map is exposed for end-to-end use.
struct AffineNormalizer {
  double mean = 0.0;
  double stddev = 1.0;
  double normalize(double x) const { return (x - mean) / stddev; }
  double denormalize(double s) const { return mean + stddev * s; }
};

// One simulated aggregation round at a given AP.
struct MonteCarloTrial {
  Eigen::VectorXd symbols;  // normalized symbol per device (all cells)
  double noise = 0.0;       // real noise sample at the AP
  double estimate = 0.0;    // de-noised arithmetic-mean estimate
  double target = 0.0;      // arithmetic mean of the AP's own symbols
};

// Total interference power received at `cell` from all foreign devices:
// sum over foreign k of powers(k) * cross_eff(k, cell)^2.
double foreign_interference(const NetworkScenario& scenario,
                            const ChannelRealization& realization,
                            const Eigen::VectorXd& powers, int cell);

// Computation error of cell `cell` at the given operating point (the
// K_l^2-scaled mean-square error of the arithmetic-mean estimate):
//   sum_{k in cell} (sqrt(p_k)|h_k|/sqrt(eta) - 1)^2
//   + (noise + foreign interference) / eta.
// Throws if the cell's denoising factor is not positive.
double mse_of_cell(const NetworkScenario& scenario,
                   const ChannelRealization& realization,
                   const Allocation& allocation, int cell);

// Denoising factor minimizing mse_of_cell for fixed powers:
//   eta* = ((sum p|h|^2 + interference + noise) / (sum sqrt(p)|h|))^2.
// Throws if every device of the cell has zero power.
double optimal_denoise(const NetworkScenario& scenario,
                       const ChannelRealization& realization,
                       const Eigen::VectorXd& powers, int cell);

// Per-cell error vector with each cell at its own optimal denoising factor.
// Throws (via optimal_denoise) if some cell has no transmitting device.
Eigen::VectorXd mse_tuple(const NetworkScenario& scenario,
                          const ChannelRealization& realization,
                          const Eigen::VectorXd& powers);

// As mse_tuple, but an all-silent cell contributes its limit error K_l
// (denoise -> inf) instead of throwing.  Used by exhaustive searches whose
// grids include the all-zero corner.
Eigen::VectorXd mse_tuple_with_limits(const NetworkScenario& scenario,
                                      const ChannelRealization& realization,
                                      const Eigen::VectorXd& powers);

// Draws one aggregation round: standard-normal symbols for every device,
// real noise of variance scenario.noise_power_w, estimate formed with the
// cell's denoising factor.
MonteCarloTrial simulate_trial(const NetworkScenario& scenario,
                               const ChannelRealization& realization,
                               const Allocation& allocation, int cell,
                               SplitMix64& gen);

// Monte-Carlo estimate of mse_of_cell over num_trials simulated rounds.
// Trials are drawn in fixed-size batches with per-batch sub-streams and
// combined with compensated summation, so the result depends only on
// (seed, num_trials), not on batch evaluation order.
double empirical_mse(const NetworkScenario& scenario,
                     const ChannelRealization& realization,
                     const Allocation& allocation, int cell,
                     std::int64_t num_trials, std::uint64_t seed);

struct EmpiricalMse {
  double mean = 0.0;
  double std_error = 0.0;
  std::int64_t trials = 0;
};

// empirical_mse plus the standard error of the estimate.
EmpiricalMse empirical_mse_stats(const NetworkScenario& scenario,
                                 const ChannelRealization& realization,
                                 const Allocation& allocation, int cell,
                                 std::int64_t num_trials, std::uint64_t seed);

}  // namespace aircomp
