#pragma once

#include <Eigen/Dense>
#include <vector>

#include "aircomp/channel.hpp"
#include "aircomp/scenario.hpp"

namespace aircomp {

// Interference-temperature caps.  level(l, j) caps the total interference
// power cell l's devices may generate at AP j; the diagonal is unused.  An
// infinite entry means "unconstrained"; a zero entry silences every coupled
// device of cell l toward AP j.
struct ItLevels {
  Eigen::MatrixXd level;

  static ItLevels zero(int cells) { return {Eigen::MatrixXd::Zero(cells, cells)}; }
  int num_cells() const { return static_cast<int>(level.rows()); }
  double incoming_sum(int cell) const {
    double s = 0.0;
    for (int j = 0; j < level.rows(); ++j)
      if (j != cell) s += level(j, cell);
    return s;
  }
};

// Per-device policy indicator B_k = budget_k * c_k^2 / |h_k|^2 with
// c_k = |h_k|^2 + sum_j duals(j) * cross_eff(k, j)^2.  Devices whose B lies
// below the current 1/nu transmit at full power, the rest use regularized
// channel inversion.
struct PolicyIndicators {
  Eigen::VectorXd value;       // B per device, local cell indexing
  std::vector<int> ascending;  // local indices ordered by ascending value
};

PolicyIndicators policy_indicators(const NetworkScenario& scenario,
                                   const ChannelRealization& realization,
                                   int cell, const Eigen::VectorXd& duals,
                                   const Eigen::VectorXd& budgets);

// Inner minimizer over the scaled amplitudes at fixed duals and fixed
// inverse denoising factor nu:  Q_k = min(sqrt(budget_k * nu), |h_k|/c_k).
Eigen::VectorXd inner_q(const NetworkScenario& scenario,
                        const ChannelRealization& realization, int cell,
                        const Eigen::VectorXd& duals, double inv_denoise,
                        const Eigen::VectorXd& budgets);

struct InnerNu {
  double inv_denoise = 0.0;  // minimizing nu
  int threshold = 0;         // number of full-power devices (ascending-B order)
  double dual_value = 0.0;   // inner minimum value (the dual function at duals)
};

// Closed-form inner minimization over nu: evaluates the stationary point of
// each full-power/inversion split (clamped to its validity interval) plus
// the all-inversion candidate, whose floor also enforces the cell's own
// interference caps, and returns the best.  Ties prefer the larger nu,
// which keeps the recovered powers cap-feasible on flat stretches.
InnerNu inner_nu(const NetworkScenario& scenario,
                 const ChannelRealization& realization, int cell,
                 const Eigen::VectorXd& duals, const ItLevels& it,
                 const Eigen::VectorXd& budgets);

// Supergradient of the dual function: entry j is
//   sum_k Q_k^2 cross_eff(k, j)^2 - level(cell, j) * nu
// for finite-cap neighbors j, zero elsewhere.
Eigen::VectorXd dual_subgradient(const NetworkScenario& scenario,
                                 const ChannelRealization& realization, int cell,
                                 const Eigen::VectorXd& q, double inv_denoise,
                                 const ItLevels& it);

struct CellSolution {
  int cell = 0;
  Eigen::VectorXd powers;      // local to the cell
  double denoise = 0.0;        // eta (may be +inf when the cell is silent)
  double inv_denoise = 0.0;    // 1/eta (0 when silent)
  Eigen::VectorXd duals;       // lambda per neighbor cell (full length L)
  int threshold = 0;           // k*: active devices at full power
  std::vector<int> ascending;  // active devices by ascending B, silenced last
  std::vector<int> silenced;   // devices pinned to zero power by zero caps
  double mse = 0.0;            // cell error with incoming caps as interference
  double dual_value = 0.0;
  double gap = 0.0;            // primal - dual at termination
  double comp_slack = 0.0;     // max_j |duals_j * (interference_j - cap_j)|
  int iterations = 0;          // inner evaluations spent
};

// Minimizes the cell's error under its own power budgets and outgoing
// interference caps, with incoming caps treated as worst-case interference.
// Lagrangian dual over the caps: the inner problem is closed-form; the dual
// is maximized over the nonnegative orthant intersected with the halfspace
// that keeps the inner problem bounded, by exact per-coordinate ascent with
// a diminishing-step projected-subgradient rescue.  The recovered primal is
// rescaled onto the caps and the denoising factor re-optimized.  Terminates
// when duality gap and complementary slackness are both <= tol; throws
// NonConvergence otherwise.  warm_duals, if given, seeds the ascent.
CellSolution solve_p22(const NetworkScenario& scenario,
                       const ChannelRealization& realization, int cell,
                       const ItLevels& it, const Eigen::VectorXd& budgets,
                       double tol = 1e-6, int max_iters = 5000,
                       const Eigen::VectorXd* warm_duals = nullptr);

// Error of an isolated cell whose receiver sees the given effective noise
// power (no interference caps).  Closed form; used by baseline schemes.
CellSolution solve_single_cell(const NetworkScenario& scenario,
                               const ChannelRealization& realization, int cell,
                               double effective_noise_w,
                               const Eigen::VectorXd& budgets);

struct ThresholdReport {
  bool ok = false;
  bool full_power_ok = false;   // devices before the threshold at budget
  bool inversion_ok = false;    // devices after it on regularized inversion
  bool denoise_in_band = false; // B_{k*} <= eta <= B_{k*+1}
  double max_full_power_dev = 0.0;
  double max_inversion_dev = 0.0;
};

// Checks the threshold structure of a converged solution.
ThresholdReport verify_threshold_structure(const NetworkScenario& scenario,
                                           const ChannelRealization& realization,
                                           int cell, const CellSolution& solution,
                                           const Eigen::VectorXd& budgets,
                                           double tol = 1e-6);

}  // namespace aircomp
