#pragma once

#include <Eigen/Dense>
#include <vector>

#include "aircomp/channel.hpp"
#include "aircomp/scenario.hpp"

namespace aircomp {

// Second-order-cone restatement of "every cell's minimum error meets its
// share of the sum-error target".  In amplitude variables q_k = sqrt(p_k)
// the per-cell constraint reads
//   sqrt(slack_l) * || [coupled amplitudes; noise amp] ||_2  <=  own_l(q),
// where slack_l = K_l - beta_l * eps, the norm collects q_k * gain(k, l)
// over all devices plus the noise amplitude, and own_l is the cell's aligned
// amplitude sum q_l . |h_l|.
struct SocInstance {
  Eigen::MatrixXd gain2;       // devices x cells, squared coupling gains
  Eigen::VectorXd direct_abs;  // |h_k|
  Eigen::VectorXd slack;       // K_l - beta_l * eps, >= 0
  Eigen::VectorXd sqrt_slack;
  Eigen::VectorXd bound;       // sqrt(power budget) per device
  double noise_amp = 0.0;      // sqrt(noise power)
  std::vector<int> offsets;    // cell start indices, length L+1

  int num_cells() const { return static_cast<int>(offsets.size()) - 1; }
  int num_devices() const { return static_cast<int>(direct_abs.size()); }
};

enum class Feasibility { Feasible, Infeasible };

struct FeasibilityVerdict {
  Feasibility status = Feasibility::Infeasible;
  Eigen::VectorXd witness;  // amplitude vector attaining `residual`
  double residual = 0.0;    // best max-constraint violation found
  int iterations = 0;
};

// Builds the cone instance for a sum-error target eps under the given
// profile weights and power budgets.  Throws if eps is negative or exceeds
// min_l K_l / beta_l (where some slack would go negative).
SocInstance build_instance(const NetworkScenario& scenario,
                           const ChannelRealization& realization,
                           const Eigen::VectorXd& profile, double eps,
                           const Eigen::VectorXd& budgets);

// Largest constraint violation max_l [sqrt(slack_l)*norm_l(q) - own_l(q)]
// at amplitude vector q.  Negative means strictly feasible.
double max_violation(const SocInstance& instance, const Eigen::VectorXd& q);

// Phase-I solve: minimizes the largest constraint violation t over the box
// [0, bound] via a log-barrier Newton method on the epigraph second-order
// cone program (the path bound m * mu certifies the achieved t against the
// true minimum, so near-tolerance verdicts are reliable).  Starts from the
// box midpoint unless an initial amplitude vector is supplied (clamped
// strictly inside the box).  Verdict is Feasible iff the achieved violation
// is <= tol (ties count as feasible).  tol <= 0 selects a default of
// 1e-5 * noise amplitude: violations are resolved in noise units because the
// minimal violation of an unattainable target moves at that scale, far below
// the full-power amplitude scale.  (A noiseless instance falls back to 1e-6
// of the largest cell's full-power aligned amplitude sum.)  `iterations`
// counts Newton steps; NonConvergence is thrown if max_iters is exhausted.
FeasibilityVerdict solve_phase1(const SocInstance& instance, double tol = 0.0,
                                int max_iters = 30000,
                                const Eigen::VectorXd* start = nullptr);

}  // namespace aircomp
