#pragma once

#include <Eigen/Dense>
#include <optional>
#include <string>
#include <vector>

#include "aircomp/channel.hpp"
#include "aircomp/mse.hpp"
#include "aircomp/scenario.hpp"

namespace aircomp {

// Throws unless profile weights are all positive and sum to one (1e-12).
void validate_profile(const Eigen::VectorXd& profile);

struct CentralizedSolution {
  double sum_mse = 0.0;          // optimized sum-error target eps
  Eigen::VectorXd powers;        // recovered transmit powers
  Eigen::VectorXd denoise;       // per-cell optimal denoising factors
  Eigen::VectorXd achieved;      // per-cell error at (powers, denoise)
  double upper_init = 0.0;       // bisection upper endpoint min_l K_l/beta_l
  int bisection_steps = 0;
};

// Minimizes the sum error eps subject to every cell's error staying within
// profile(l) * eps, by bisection on eps over [0, min_l K_l / profile(l)]
// with a phase-I feasibility solve per step; each step warm starts from the
// previous step's minimizer.  Powers are recovered from the witness of the
// last feasible step; denoising factors are re-optimized for the recovered
// powers.  phase1_tol <= 0 selects the phase-I scale-relative default.
// Throws SolverError if the upper endpoint itself is infeasible (profile
// unattainable under the budgets) and propagates phase-I NonConvergence.
CentralizedSolution solve_p1(const NetworkScenario& scenario,
                             const ChannelRealization& realization,
                             const Eigen::VectorXd& profile,
                             const Eigen::VectorXd& budgets,
                             double bisect_tol = 1e-4, double phase1_tol = 0.0,
                             int phase1_max_iters = 30000);

struct SweepEntry {
  Eigen::VectorXd profile;
  std::optional<CentralizedSolution> solution;
  std::string error;  // nonempty if this profile failed
};

// solve_p1 across a list of profiles; per-profile failures are recorded in
// the entry rather than thrown.
std::vector<SweepEntry> pareto_sweep(const NetworkScenario& scenario,
                                     const ChannelRealization& realization,
                                     const std::vector<Eigen::VectorXd>& profiles,
                                     const Eigen::VectorXd& budgets,
                                     double bisect_tol = 1e-4);

}  // namespace aircomp
