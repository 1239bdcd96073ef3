#include "aircomp/baselines.hpp"

#include <cmath>
#include <limits>
#include <stdexcept>
#include <vector>

#include "aircomp/errors.hpp"

namespace aircomp {

namespace {
constexpr double kInf = std::numeric_limits<double>::infinity();

// Reported error of an allocation whose denoising is re-optimized per cell
// against the interference it actually sees; silent cells at the limit.
Eigen::VectorXd true_denoise(const NetworkScenario& sc, const ChannelRealization& re,
                             const Eigen::VectorXd& powers) {
  const int L = sc.num_cells();
  Eigen::VectorXd eta(L);
  for (int l = 0; l < L; ++l) {
    const int off = sc.cell_offset(l);
    const int K = sc.cell_size(l);
    eta(l) = powers.segment(off, K).isZero() ? kInf : optimal_denoise(sc, re, powers, l);
  }
  return eta;
}
}  // namespace

BaselineResult run_baseline(const NetworkScenario& scenario,
                            const ChannelRealization& realization,
                            BaselineKind kind, const Eigen::VectorXd& budgets,
                            DenoiseRule rule) {
  scenario.validate();
  if (budgets.size() != scenario.num_devices() || (budgets.array() < 0.0).any())
    throw std::invalid_argument("run_baseline: one nonnegative budget per device required");
  const int L = scenario.num_cells();

  BaselineResult out;
  out.kind = kind;
  Eigen::VectorXd powers(scenario.num_devices());
  Eigen::VectorXd assumed = Eigen::VectorXd::Constant(L, kInf);

  switch (kind) {
    case BaselineKind::kFullPower:
      powers = budgets;
      break;
    case BaselineKind::kIgnoreInterference:
    case BaselineKind::kMaxInterference:
      for (int l = 0; l < L; ++l) {
        double noise = scenario.noise_power_w;
        if (kind == BaselineKind::kMaxInterference)
          noise += foreign_interference(scenario, realization, budgets, l);
        const CellSolution sol =
            solve_single_cell(scenario, realization, l, noise, budgets);
        powers.segment(scenario.cell_offset(l), scenario.cell_size(l)) = sol.powers;
        assumed(l) = sol.denoise;
      }
      break;
  }

  out.allocation.powers_w = powers;
  if (rule == DenoiseRule::kAssumedInterference && kind != BaselineKind::kFullPower)
    out.allocation.denoise = assumed;
  else
    out.allocation.denoise = true_denoise(scenario, realization, powers);

  out.mse.resize(L);
  for (int l = 0; l < L; ++l)
    out.mse(l) = std::isfinite(out.allocation.denoise(l))
                     ? mse_of_cell(scenario, realization, out.allocation, l)
                     : static_cast<double>(scenario.cell_size(l));
  out.sum_mse = out.mse.sum();
  return out;
}

GridSearchResult grid_search_p1(const NetworkScenario& scenario,
                                const ChannelRealization& realization,
                                const Eigen::VectorXd& profile,
                                const Eigen::VectorXd& budgets,
                                int resolution) {
  scenario.validate();
  const int n = scenario.num_devices();
  if (n > 4) throw std::invalid_argument("grid_search_p1: at most four devices total");
  if (resolution < 2) throw std::invalid_argument("grid_search_p1: resolution must be >= 2");
  if (profile.size() != scenario.num_cells() || (profile.array() <= 0.0).any())
    throw std::invalid_argument("grid_search_p1: profile must be positive per cell");
  if (budgets.size() != n)
    throw std::invalid_argument("grid_search_p1: one budget per device required");

  GridSearchResult best;
  best.value = kInf;
  Eigen::VectorXd amax(n);
  for (int i = 0; i < n; ++i) amax(i) = std::sqrt(budgets(i));
  Eigen::VectorXd best_a = Eigen::VectorXd::Zero(n);

  Eigen::VectorXd a(n), p(n);
  const auto scan = [&](const Eigen::VectorXd& lo, const Eigen::VectorXd& hi,
                        int res) {
    std::vector<int> idx(n, 0);
    const double denom = static_cast<double>(res - 1);
    while (true) {
      for (int i = 0; i < n; ++i) {
        a(i) = lo(i) + (hi(i) - lo(i)) * static_cast<double>(idx[i]) / denom;
        p(i) = a(i) * a(i);
      }
      const Eigen::VectorXd mse = mse_tuple_with_limits(scenario, realization, p);
      const double eps = (mse.array() / profile.array()).maxCoeff();
      if (eps < best.value) {
        best.value = eps;
        best.powers = p;
        best.mse = mse;
        best_a = a;
      }
      int pos = 0;
      while (pos < n && ++idx[pos] == res) idx[pos++] = 0;
      if (pos == n) break;
    }
  };

  // Full scan in amplitude coordinates, then shrinking windows around the
  // incumbent.  The max-of-ratios objective has ridges where a fixed grid's
  // value error decays only linearly with the spacing (and the decay aliases
  // badly), so the zoom does the heavy lifting for accuracy.
  scan(Eigen::VectorXd::Zero(n), amax, resolution);
  Eigen::VectorXd spacing = amax / static_cast<double>(resolution - 1);
  for (int level = 0; level < 5; ++level) {
    const Eigen::VectorXd lo = (best_a - 2.0 * spacing).cwiseMax(0.0);
    const Eigen::VectorXd hi = (best_a + 2.0 * spacing).cwiseMin(amax);
    scan(lo, hi, 33);
    spacing = (hi - lo) / 32.0;
  }
  return best;
}

GridSearchResult grid_search_p21(const NetworkScenario& scenario,
                                 const ChannelRealization& realization, int cell,
                                 const ItLevels& it, const Eigen::VectorXd& budgets,
                                 int resolution) {
  scenario.validate();
  const int L = scenario.num_cells();
  const int off = scenario.cell_offset(cell);
  const int K = scenario.cell_size(cell);
  if (K > 3) throw std::invalid_argument("grid_search_p21: at most three devices in the cell");
  if (resolution < 2) throw std::invalid_argument("grid_search_p21: resolution must be >= 2");
  if (budgets.size() != scenario.num_devices())
    throw std::invalid_argument("grid_search_p21: one budget per device required");

  const double noise_eff = scenario.noise_power_w + it.incoming_sum(cell);
  const Eigen::VectorXd h = realization.direct_abs.segment(off, K);

  GridSearchResult best;
  best.value = kInf;
  Eigen::VectorXd amax(K);
  for (int i = 0; i < K; ++i) amax(i) = std::sqrt(budgets(off + i));
  Eigen::VectorXd best_a = Eigen::VectorXd::Zero(K);

  Eigen::VectorXd a(K), p(K);
  const auto scan = [&](const Eigen::VectorXd& lo, const Eigen::VectorXd& hi,
                        int res) {
    std::vector<int> idx(K, 0);
    const double denom = static_cast<double>(res - 1);
    while (true) {
      for (int i = 0; i < K; ++i) {
        a(i) = lo(i) + (hi(i) - lo(i)) * static_cast<double>(idx[i]) / denom;
        p(i) = a(i) * a(i);
      }

      bool feasible = true;
      for (int j = 0; j < L && feasible; ++j) {
        if (j == cell || !std::isfinite(it.level(cell, j))) continue;
        double gen = 0.0;
        for (int i = 0; i < K; ++i) {
          const double g = realization.cross_eff(off + i, j);
          gen += p(i) * g * g;
        }
        feasible = gen <= it.level(cell, j) * (1.0 + 1e-12) + 1e-300;
      }

      if (feasible) {
        double value;
        const double den = (a.array() * h.array()).sum();
        if (den > 0.0) {
          const double num = (p.array() * h.array().square()).sum() + noise_eff;
          const double eta = (num / den) * (num / den);
          double misalign = 0.0;
          for (int i = 0; i < K; ++i) {
            const double t = a(i) * h(i) / std::sqrt(eta) - 1.0;
            misalign += t * t;
          }
          value = misalign + noise_eff / eta;
        } else {
          value = static_cast<double>(K);
        }
        if (value < best.value) {
          best.value = value;
          best.powers = p;
          best_a = a;
        }
      }

      int pos = 0;
      while (pos < K && ++idx[pos] == res) idx[pos++] = 0;
      if (pos == K) break;
    }
  };

  // full amplitude box, then zoom around the incumbent (see grid_search_p1)
  scan(Eigen::VectorXd::Zero(K), amax, resolution);
  if (!std::isfinite(best.value))
    throw SolverError("grid_search_p21: no feasible grid point");
  Eigen::VectorXd spacing = amax / static_cast<double>(resolution - 1);
  for (int level = 0; level < 5; ++level) {
    const Eigen::VectorXd lo = (best_a - 2.0 * spacing).cwiseMax(0.0);
    const Eigen::VectorXd hi = (best_a + 2.0 * spacing).cwiseMin(amax);
    scan(lo, hi, 33);
    spacing = (hi - lo) / 32.0;
  }
  best.mse.resize(1);
  best.mse(0) = best.value;
  return best;
}

}  // namespace aircomp
