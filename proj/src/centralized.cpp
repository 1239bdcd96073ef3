#include "aircomp/centralized.hpp"

#include <cmath>
#include <limits>
#include <stdexcept>

#include "aircomp/errors.hpp"
#include "aircomp/soc.hpp"

namespace aircomp {

void validate_profile(const Eigen::VectorXd& profile) {
  if (profile.size() < 1)
    throw std::invalid_argument("profile: at least one weight required");
  if ((profile.array() <= 0.0).any())
    throw std::invalid_argument("profile: weights must be strictly positive");
  if (std::abs(profile.sum() - 1.0) > 1e-12)
    throw std::invalid_argument("profile: weights must sum to one");
}

CentralizedSolution solve_p1(const NetworkScenario& scenario,
                             const ChannelRealization& realization,
                             const Eigen::VectorXd& profile,
                             const Eigen::VectorXd& budgets,
                             double bisect_tol, double phase1_tol,
                             int phase1_max_iters) {
  scenario.validate();
  validate_profile(profile);
  if (!(bisect_tol > 0.0))
    throw std::invalid_argument("solve_p1: bisection tolerance must be positive");
  const int L = scenario.num_cells();

  double hi = std::numeric_limits<double>::infinity();
  for (int l = 0; l < L; ++l)
    hi = std::min(hi, scenario.cell_size(l) / profile(l));

  CentralizedSolution sol;
  sol.upper_init = hi;

  // Adjacent probes differ by a vanishing slack change, so each one warm
  // starts from the previous minimizer whichever side it landed on.
  Eigen::VectorXd warm;
  const auto feasible_at = [&](double eps, Eigen::VectorXd& witness) {
    const SocInstance inst =
        build_instance(scenario, realization, profile, eps, budgets);
    const FeasibilityVerdict v =
        solve_phase1(inst, phase1_tol, phase1_max_iters,
                     warm.size() > 0 ? &warm : nullptr);
    warm = v.witness;
    if (v.status == Feasibility::Feasible) witness = v.witness;
    return v.status == Feasibility::Feasible;
  };

  Eigen::VectorXd witness;
  if (!feasible_at(hi, witness))
    throw SolverError(
        "solve_p1: profile unattainable at the upper endpoint of the target range");

  double lo = 0.0;
  while (hi - lo > bisect_tol) {
    const double mid = 0.5 * (lo + hi);
    if (feasible_at(mid, witness))
      hi = mid;
    else
      lo = mid;
    ++sol.bisection_steps;
  }

  sol.sum_mse = 0.5 * (lo + hi);
  sol.powers = witness.array().square().matrix();
  sol.denoise.resize(L);
  sol.achieved.resize(L);
  Allocation alloc{sol.powers, Eigen::VectorXd::Zero(L)};
  for (int l = 0; l < L; ++l) {
    const int off = scenario.cell_offset(l);
    const int n = scenario.cell_size(l);
    if (sol.powers.segment(off, n).maxCoeff() > 0.0) {
      alloc.denoise(l) = optimal_denoise(scenario, realization, sol.powers, l);
      sol.denoise(l) = alloc.denoise(l);
      sol.achieved(l) = mse_of_cell(scenario, realization, alloc, l);
    } else {
      // A silent cell can only appear when its slack is pinned at zero; the
      // limiting denoising factor is infinite and the error equals K_l.
      sol.denoise(l) = std::numeric_limits<double>::infinity();
      sol.achieved(l) = static_cast<double>(n);
      alloc.denoise(l) = 0.0;
    }
  }
  return sol;
}

std::vector<SweepEntry> pareto_sweep(const NetworkScenario& scenario,
                                     const ChannelRealization& realization,
                                     const std::vector<Eigen::VectorXd>& profiles,
                                     const Eigen::VectorXd& budgets,
                                     double bisect_tol) {
  std::vector<SweepEntry> out;
  out.reserve(profiles.size());
  for (const auto& beta : profiles) {
    SweepEntry entry;
    entry.profile = beta;
    try {
      entry.solution = solve_p1(scenario, realization, beta, budgets, bisect_tol);
    } catch (const std::exception& e) {
      entry.error = e.what();
    }
    out.push_back(std::move(entry));
  }
  return out;
}

}  // namespace aircomp
