#pragma once

#include <Eigen/Dense>
#include <array>
#include <vector>

#include "aircomp/cell_dual.hpp"
#include "aircomp/channel.hpp"
#include "aircomp/errors.hpp"
#include "aircomp/scenario.hpp"

namespace aircomp {

// 2x2 sensitivity block of a cell pair (l, j): partial derivatives of the two
// optimal cell errors with respect to the pair's mutual interference caps.
//   a = dPhi_l/dCap_{l->j}   (own outgoing cap; equals -dual * nu, <= 0)
//   b = dPhi_l/dCap_{j->l}   (incoming cap; equals nu_l, >= 0)
//   c = dPhi_j/dCap_{l->j}   (incoming for j; equals nu_j, >= 0)
//   d = dPhi_j/dCap_{j->l}   (own outgoing cap for j, <= 0)
struct SensitivityMatrix {
  double a = 0.0;
  double b = 0.0;
  double c = 0.0;
  double d = 0.0;

  double det() const { return a * d - b * c; }
  // Scale-free stationarity residual: |det| / (b*c) = |dual_l*dual_j - 1|
  // when both cells are live.  Infinite when either nu vanishes.
  double normalized_residual() const;
};

enum class MessageKind { kItExchange, kSensitivityShare };

// One backhaul datagram between the two APs of the active pair.
struct BackhaulMessage {
  MessageKind kind = MessageKind::kItExchange;
  int sender = 0;
  int receiver = 0;
  std::array<double, 2> payload{0.0, 0.0};
};

struct CoordinationParams {
  double step_fraction = 0.1;   // initial step length relative to the pair's cap scale
  double alpha = 1.0;           // improvement weight for the lower-indexed cell
  Eigen::MatrixXd alpha_pair;   // optional per-pair alpha override (cells x cells)
  double det_tol = 1e-3;        // stationarity threshold on the normalized residual
  double improve_tol = 1e-9;    // per-round improvement stop
  int max_rounds = 200;
  int max_backtracks = 40;      // halvings before a pair is declared stalled
  double accept_slack = 1e-12;  // relative slack on the per-cell non-increase test
  double cell_tol = 1e-6;       // forwarded to the cell solver
  int cell_max_iters = 5000;

  double alpha_for(int l, int j) const;
};

// One row of the convergence trace: recorded after every pair attempt.
struct TraceEntry {
  int round = 0;
  int cell_a = -1;
  int cell_b = -1;
  bool accepted = false;
  double step = 0.0;
  double det_residual = 0.0;
  Eigen::VectorXd mse;  // per-AP error after the attempt
};

struct CoordinationState {
  ItLevels it;
  std::vector<CellSolution> cells;
  int round = 0;
  std::vector<TraceEntry> trace;
  std::vector<BackhaulMessage> messages;
  Eigen::MatrixXd last_step;  // per-pair accepted step memory (upper triangle)

  Eigen::VectorXd mse_vector() const;
};

enum class StopReason { kDetBelowThreshold, kNoImprovement, kRoundLimit };

struct CoordinationResult {
  ItLevels it;
  std::vector<CellSolution> cells;
  std::vector<TraceEntry> trace;
  std::vector<BackhaulMessage> messages;
  Eigen::VectorXd mse;
  int rounds = 0;
  StopReason stop_reason = StopReason::kRoundLimit;
};

// Pair update exhausted its backtracking budget without a non-increasing
// step (or the pair is degenerate); the round skips the pair.
struct PairStalled : SolverError {
  using SolverError::SolverError;
};

// Sensitivities of the solved pair, assembled from duals and inverse
// denoising factors exposed by the cell solutions.
SensitivityMatrix pair_sensitivity(const CellSolution& sol_l,
                                   const CellSolution& sol_j, int l, int j);

// Joint-descent direction for the pair's two caps:
//   sign(bc - ad) * [alpha*d - b, a - alpha*c].
// For a, d <= 0 < b, c and a nonsingular block, D * direction < 0
// componentwise, so both cells improve to first order.  Unnormalized.
Eigen::Vector2d direction(const SensitivityMatrix& D, double alpha);

// Caps equal to the interference an allocation actually generates, so the
// allocation itself is feasible at these caps.
ItLevels init_it_from_allocation(const NetworkScenario& scenario,
                                 const ChannelRealization& realization,
                                 const Eigen::VectorXd& powers);

// Solves every cell at the given caps and seeds the trace.
CoordinationState init_state(const NetworkScenario& scenario,
                             const ChannelRealization& realization,
                             const ItLevels& it, const Eigen::VectorXd& budgets,
                             const CoordinationParams& params);

// One backtracked pairwise cap update.  On acceptance the state's caps, the
// two cell solutions, the trace, and the message log are updated and the new
// caps are returned.  Cells outside the pair are untouched.  Throws
// PairStalled when no non-increasing step exists down to the minimum step.
ItLevels update_pair(const NetworkScenario& scenario,
                     const ChannelRealization& realization,
                     const Eigen::VectorXd& budgets,
                     const CoordinationParams& params, CoordinationState& state,
                     int l, int j, double delta, double alpha);

// Round-robin pairwise coordination from the given starting caps.  Stops
// when every live pair is stationary (normalized residual <= det_tol), when
// a full round improves no AP by more than improve_tol, or at max_rounds.
CoordinationResult run_algorithm2(const NetworkScenario& scenario,
                                  const ChannelRealization& realization,
                                  const ItLevels& it_init,
                                  const Eigen::VectorXd& budgets,
                                  const CoordinationParams& params = {});

}  // namespace aircomp
