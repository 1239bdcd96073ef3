#include "aircomp/coordination.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

namespace aircomp {

namespace {
constexpr double kInf = std::numeric_limits<double>::infinity();

double pair_cap_scale(const NetworkScenario& sc, const ItLevels& it, int l, int j) {
  double scale = kInf;
  if (it.level(l, j) > 0.0) scale = std::min(scale, it.level(l, j));
  if (it.level(j, l) > 0.0) scale = std::min(scale, it.level(j, l));
  if (std::isfinite(scale)) return scale;
  double sum = 0.0;
  int n = 0;
  for (int r = 0; r < it.level.rows(); ++r)
    for (int c = 0; c < it.level.cols(); ++c)
      if (r != c && it.level(r, c) > 0.0) {
        sum += it.level(r, c);
        ++n;
      }
  if (n > 0) return sum / n;
  return sc.noise_power_w;
}

// Steps 1 and 3 of a pair evaluation: both APs announce their caps, then
// their local sensitivities.  Logged once per evaluated pair per round,
// whether or not a step is taken afterwards.
void log_pair_exchange(CoordinationState& state, int l, int j,
                       const SensitivityMatrix& D) {
  state.messages.push_back({MessageKind::kItExchange, l, j,
                            {state.it.level(l, j), state.it.level(j, l)}});
  state.messages.push_back({MessageKind::kItExchange, j, l,
                            {state.it.level(j, l), state.it.level(l, j)}});
  state.messages.push_back({MessageKind::kSensitivityShare, l, j, {D.a, D.b}});
  state.messages.push_back({MessageKind::kSensitivityShare, j, l, {D.c, D.d}});
}
}  // namespace

double SensitivityMatrix::normalized_residual() const {
  const double bc = b * c;
  if (!(bc > 0.0)) return kInf;
  return std::abs(a * d - bc) / bc;
}

double CoordinationParams::alpha_for(int l, int j) const {
  if (alpha_pair.rows() > l && alpha_pair.cols() > j) return alpha_pair(l, j);
  return alpha;
}

Eigen::VectorXd CoordinationState::mse_vector() const {
  Eigen::VectorXd v(static_cast<int>(cells.size()));
  for (std::size_t i = 0; i < cells.size(); ++i) v(static_cast<int>(i)) = cells[i].mse;
  return v;
}

SensitivityMatrix pair_sensitivity(const CellSolution& sol_l,
                                   const CellSolution& sol_j, int l, int j) {
  SensitivityMatrix D;
  D.a = -sol_l.duals(j) * sol_l.inv_denoise;
  D.b = sol_l.inv_denoise;
  D.c = sol_j.inv_denoise;
  D.d = -sol_j.duals(l) * sol_j.inv_denoise;
  return D;
}

Eigen::Vector2d direction(const SensitivityMatrix& D, double alpha) {
  if (!(alpha >= 0.0)) throw std::invalid_argument("direction: alpha must be nonnegative");
  const double disc = D.b * D.c - D.a * D.d;
  const double s = disc > 0.0 ? 1.0 : (disc < 0.0 ? -1.0 : 0.0);
  return {s * (alpha * D.d - D.b), s * (D.a - alpha * D.c)};
}

ItLevels init_it_from_allocation(const NetworkScenario& scenario,
                                 const ChannelRealization& realization,
                                 const Eigen::VectorXd& powers) {
  if (powers.size() != scenario.num_devices())
    throw std::invalid_argument("init_it_from_allocation: one power per device required");
  const int L = scenario.num_cells();
  ItLevels it = ItLevels::zero(L);
  for (int l = 0; l < L; ++l) {
    const int off = scenario.cell_offset(l);
    const int K = scenario.cell_size(l);
    for (int j = 0; j < L; ++j) {
      if (j == l) continue;
      double g = 0.0;
      for (int k = 0; k < K; ++k) {
        const double e = realization.cross_eff(off + k, j);
        g += powers(off + k) * e * e;
      }
      it.level(l, j) = g;
    }
  }
  return it;
}

CoordinationState init_state(const NetworkScenario& scenario,
                             const ChannelRealization& realization,
                             const ItLevels& it, const Eigen::VectorXd& budgets,
                             const CoordinationParams& params) {
  const int L = scenario.num_cells();
  CoordinationState state;
  state.it = it;
  state.cells.reserve(L);
  for (int l = 0; l < L; ++l)
    state.cells.push_back(solve_p22(scenario, realization, l, it, budgets,
                                    params.cell_tol, params.cell_max_iters));
  state.last_step = Eigen::MatrixXd::Zero(L, L);
  TraceEntry t;
  t.round = 0;
  t.mse = state.mse_vector();
  state.trace.push_back(std::move(t));
  return state;
}

ItLevels update_pair(const NetworkScenario& scenario,
                     const ChannelRealization& realization,
                     const Eigen::VectorXd& budgets,
                     const CoordinationParams& params, CoordinationState& state,
                     int l, int j, double delta, double alpha) {
  const CellSolution& sol_l = state.cells.at(l);
  const CellSolution& sol_j = state.cells.at(j);
  if (delta == 0.0) return state.it;  // explicit no-op step
  const SensitivityMatrix D = pair_sensitivity(sol_l, sol_j, l, j);
  log_pair_exchange(state, l, j, D);

  const Eigen::Vector2d dir = direction(D, alpha);
  const double norm = dir.norm();
  if (!(norm > 0.0) || !std::isfinite(norm))
    throw PairStalled("update_pair: degenerate direction for the pair");
  const Eigen::Vector2d unit = dir / norm;

  const double res = D.normalized_residual();
  const double x0 = state.it.level(l, j);
  const double y0 = state.it.level(j, l);

  for (int bt = 0; bt <= params.max_backtracks; ++bt, delta *= 0.5) {
    const double x = std::max(0.0, x0 + delta * unit(0));
    const double y = std::max(0.0, y0 + delta * unit(1));
    if (x == x0 && y == y0) continue;

    ItLevels trial = state.it;
    trial.level(l, j) = x;
    trial.level(j, l) = y;

    CellSolution new_l, new_j;
    try {
      new_l = solve_p22(scenario, realization, l, trial, budgets,
                        params.cell_tol, params.cell_max_iters, &sol_l.duals);
      new_j = solve_p22(scenario, realization, j, trial, budgets,
                        params.cell_tol, params.cell_max_iters, &sol_j.duals);
    } catch (const SolverError&) {
      continue;  // treat a failed trial solve as a rejected step
    }

    const double slack_l = params.accept_slack * (1.0 + std::abs(sol_l.mse));
    const double slack_j = params.accept_slack * (1.0 + std::abs(sol_j.mse));
    if (new_l.mse <= sol_l.mse + slack_l && new_j.mse <= sol_j.mse + slack_j) {
      state.it = trial;
      state.cells[l] = std::move(new_l);
      state.cells[j] = std::move(new_j);
      state.last_step(std::min(l, j), std::max(l, j)) = delta;
      TraceEntry t;
      t.round = state.round;
      t.cell_a = l;
      t.cell_b = j;
      t.accepted = true;
      t.step = delta;
      t.det_residual = res;
      t.mse = state.mse_vector();
      state.trace.push_back(std::move(t));
      return state.it;
    }
  }
  throw PairStalled("update_pair: no non-increasing step above the minimum step size");
}

CoordinationResult run_algorithm2(const NetworkScenario& scenario,
                                  const ChannelRealization& realization,
                                  const ItLevels& it_init,
                                  const Eigen::VectorXd& budgets,
                                  const CoordinationParams& params) {
  if ((it_init.level.array() < 0.0).any())
    throw std::invalid_argument("run_algorithm2: starting caps must be nonnegative");
  const int L = scenario.num_cells();
  CoordinationState state = init_state(scenario, realization, it_init, budgets, params);

  CoordinationResult result;
  result.stop_reason = StopReason::kRoundLimit;

  const auto skip_row = [&](int l, int j, double res) {
    TraceEntry t;
    t.round = state.round;
    t.cell_a = l;
    t.cell_b = j;
    t.det_residual = res;
    t.mse = state.mse_vector();
    state.trace.push_back(std::move(t));
  };

  for (int round = 1; round <= params.max_rounds; ++round) {
    state.round = round;
    const Eigen::VectorXd start = state.mse_vector();
    bool live_nonstationary = false;

    for (int l = 0; l < L; ++l) {
      for (int j = l + 1; j < L; ++j) {
        const SensitivityMatrix D =
            pair_sensitivity(state.cells[l], state.cells[j], l, j);
        const double res = D.normalized_residual();
        if (!std::isfinite(res) || res <= params.det_tol) {
          // stationarity is decided from the exchanged data, so the
          // datagrams flow even when the pair then stands pat
          log_pair_exchange(state, l, j, D);
          skip_row(l, j, res);
          continue;
        }
        live_nonstationary = true;
        const double base =
            params.step_fraction * pair_cap_scale(scenario, state.it, l, j);
        const double last = state.last_step(l, j);
        const double delta = last > 0.0 ? std::min(base, 2.0 * last) : base;
        try {
          update_pair(scenario, realization, budgets, params, state, l, j,
                      delta, params.alpha_for(l, j));
        } catch (const PairStalled&) {
          skip_row(l, j, res);
        }
      }
    }

    const double improvement = (start - state.mse_vector()).maxCoeff();
    if (!live_nonstationary) {
      result.stop_reason = StopReason::kDetBelowThreshold;
      result.rounds = round;
      break;
    }
    if (improvement <= params.improve_tol) {
      result.stop_reason = StopReason::kNoImprovement;
      result.rounds = round;
      break;
    }
    result.rounds = round;
  }

  result.it = state.it;
  result.cells = std::move(state.cells);
  result.trace = std::move(state.trace);
  result.messages = std::move(state.messages);
  result.mse = Eigen::VectorXd(static_cast<int>(result.cells.size()));
  for (std::size_t i = 0; i < result.cells.size(); ++i)
    result.mse(static_cast<int>(i)) = result.cells[i].mse;
  return result;
}

}  // namespace aircomp
