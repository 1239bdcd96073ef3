#include "aircomp/mse.hpp"

#include <cmath>
#include <stdexcept>

#include "aircomp/rng.hpp"

namespace aircomp {

namespace {

constexpr std::uint64_t kTrialBatchTag = 1000;
constexpr std::int64_t kTrialBatch = 8192;

// Compensated (Kahan) accumulator.
struct Kahan {
  double sum = 0.0;
  double carry = 0.0;
  void add(double x) {
    const double y = x - carry;
    const double t = sum + y;
    carry = (t - sum) - y;
    sum = t;
  }
};

}  // namespace

double foreign_interference(const NetworkScenario& scenario,
                            const ChannelRealization& realization,
                            const Eigen::VectorXd& powers, int cell) {
  (void)scenario;
  // Own-cell entries of cross_eff are zero, so the whole column contributes.
  return (powers.array() * realization.cross_eff.col(cell).array().square()).sum();
}

double mse_of_cell(const NetworkScenario& scenario,
                   const ChannelRealization& realization,
                   const Allocation& allocation, int cell) {
  const double eta = allocation.denoise(cell);
  if (!(eta > 0.0))
    throw std::invalid_argument("mse_of_cell: denoising factor must be positive");
  const int off = scenario.cell_offset(cell);
  const int n = scenario.cell_size(cell);
  const double inv_sqrt_eta = 1.0 / std::sqrt(eta);
  double misalign = 0.0;
  for (int i = 0; i < n; ++i) {
    const int k = off + i;
    const double t =
        std::sqrt(allocation.powers_w(k)) * realization.direct_abs(k) * inv_sqrt_eta - 1.0;
    misalign += t * t;
  }
  const double it = foreign_interference(scenario, realization, allocation.powers_w, cell);
  return misalign + (scenario.noise_power_w + it) / eta;
}

double optimal_denoise(const NetworkScenario& scenario,
                       const ChannelRealization& realization,
                       const Eigen::VectorXd& powers, int cell) {
  const int off = scenario.cell_offset(cell);
  const int n = scenario.cell_size(cell);
  double num = scenario.noise_power_w +
               foreign_interference(scenario, realization, powers, cell);
  double den = 0.0;
  for (int i = 0; i < n; ++i) {
    const int k = off + i;
    num += powers(k) * realization.direct_abs(k) * realization.direct_abs(k);
    den += std::sqrt(powers(k)) * realization.direct_abs(k);
  }
  if (!(den > 0.0))
    throw std::invalid_argument("optimal_denoise: cell has no transmitting device");
  const double r = num / den;
  return r * r;
}

Eigen::VectorXd mse_tuple(const NetworkScenario& scenario,
                          const ChannelRealization& realization,
                          const Eigen::VectorXd& powers) {
  const int L = scenario.num_cells();
  Allocation alloc{powers, Eigen::VectorXd(L)};
  for (int l = 0; l < L; ++l)
    alloc.denoise(l) = optimal_denoise(scenario, realization, powers, l);
  Eigen::VectorXd phi(L);
  for (int l = 0; l < L; ++l) phi(l) = mse_of_cell(scenario, realization, alloc, l);
  return phi;
}

Eigen::VectorXd mse_tuple_with_limits(const NetworkScenario& scenario,
                                      const ChannelRealization& realization,
                                      const Eigen::VectorXd& powers) {
  const int L = scenario.num_cells();
  Eigen::VectorXd phi(L);
  for (int l = 0; l < L; ++l) {
    const int off = scenario.cell_offset(l);
    const int n = scenario.cell_size(l);
    if (powers.segment(off, n).maxCoeff() > 0.0) {
      Allocation alloc{powers, Eigen::VectorXd::Zero(L)};
      alloc.denoise(l) = optimal_denoise(scenario, realization, powers, l);
      phi(l) = mse_of_cell(scenario, realization, alloc, l);
    } else {
      // Silent cell: error approaches K_l as the denoising factor grows.
      phi(l) = static_cast<double>(n);
    }
  }
  return phi;
}

MonteCarloTrial simulate_trial(const NetworkScenario& scenario,
                               const ChannelRealization& realization,
                               const Allocation& allocation, int cell,
                               SplitMix64& gen) {
  const double eta = allocation.denoise(cell);
  if (!(eta > 0.0))
    throw std::invalid_argument("simulate_trial: denoising factor must be positive");
  const int K = scenario.num_devices();
  const int off = scenario.cell_offset(cell);
  const int n = scenario.cell_size(cell);

  MonteCarloTrial trial;
  trial.symbols.resize(K);
  for (int k = 0; k < K; ++k) trial.symbols(k) = gen.normal();
  trial.noise = std::sqrt(scenario.noise_power_w) * gen.normal();

  // Real part of the received superposition: phase-aligned own devices add
  // through |h|, foreign devices through the effective gain.
  double y = trial.noise;
  for (int k = 0; k < K; ++k) {
    const double a = (scenario.cell_of(k) == cell)
                         ? realization.direct_abs(k)
                         : realization.cross_eff(k, cell);
    y += a * std::sqrt(allocation.powers_w(k)) * trial.symbols(k);
  }
  trial.target = trial.symbols.segment(off, n).mean();
  trial.estimate = y / (static_cast<double>(n) * std::sqrt(eta));
  return trial;
}

namespace {

void accumulate_trials(const NetworkScenario& scenario,
                       const ChannelRealization& realization,
                       const Allocation& allocation, int cell,
                       std::int64_t num_trials, std::uint64_t seed,
                       Kahan& sum_sq, Kahan& sum_quad) {
  const int n = scenario.cell_size(cell);
  std::int64_t done = 0;
  for (std::int64_t batch = 0; done < num_trials; ++batch) {
    const std::int64_t count = std::min(kTrialBatch, num_trials - done);
    SplitMix64 gen(substream(seed, kTrialBatchTag + static_cast<std::uint64_t>(batch)));
    Kahan local_sq, local_quad;
    for (std::int64_t t = 0; t < count; ++t) {
      const MonteCarloTrial trial =
          simulate_trial(scenario, realization, allocation, cell, gen);
      const double err = static_cast<double>(n) * (trial.estimate - trial.target);
      const double e2 = err * err;
      local_sq.add(e2);
      local_quad.add(e2 * e2);
    }
    sum_sq.add(local_sq.sum);
    sum_quad.add(local_quad.sum);
    done += count;
  }
}

}  // namespace

double empirical_mse(const NetworkScenario& scenario,
                     const ChannelRealization& realization,
                     const Allocation& allocation, int cell,
                     std::int64_t num_trials, std::uint64_t seed) {
  return empirical_mse_stats(scenario, realization, allocation, cell, num_trials, seed)
      .mean;
}

EmpiricalMse empirical_mse_stats(const NetworkScenario& scenario,
                                 const ChannelRealization& realization,
                                 const Allocation& allocation, int cell,
                                 std::int64_t num_trials, std::uint64_t seed) {
  if (num_trials < 1)
    throw std::invalid_argument("empirical_mse: need at least one trial");
  Kahan sum_sq, sum_quad;
  accumulate_trials(scenario, realization, allocation, cell, num_trials, seed,
                    sum_sq, sum_quad);
  EmpiricalMse out;
  out.trials = num_trials;
  const double nd = static_cast<double>(num_trials);
  out.mean = sum_sq.sum / nd;
  if (num_trials > 1) {
    const double var = (sum_quad.sum - nd * out.mean * out.mean) / (nd - 1.0);
    out.std_error = std::sqrt(std::max(var, 0.0) / nd);
  }
  return out;
}

}  // namespace aircomp
