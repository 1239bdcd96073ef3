#pragma once

#include <Eigen/Dense>

#include "aircomp/cell_dual.hpp"
#include "aircomp/channel.hpp"
#include "aircomp/mse.hpp"
#include "aircomp/scenario.hpp"

namespace aircomp {

enum class BaselineKind { kFullPower, kIgnoreInterference, kMaxInterference };

// Denoising convention used when reporting a baseline's achieved error:
// re-optimize against the interference the allocation actually generates
// (default), or keep the factor the scheme itself assumed while choosing
// powers.  Full power has no assumption, so both rules coincide there.
enum class DenoiseRule { kTrueInterference, kAssumedInterference };

struct BaselineResult {
  BaselineKind kind = BaselineKind::kFullPower;
  Allocation allocation;  // powers plus the reported denoising factors
  Eigen::VectorXd mse;    // per-cell error under the actual interference
  double sum_mse = 0.0;
};

// The three benchmark power-control schemes:
//   FullPower          every device at its budget;
//   IgnoreInterference isolated per-cell optimum against noise only;
//   MaxInterference    per-cell optimum against noise plus the worst-case
//                      (all budgets) interference level.
BaselineResult run_baseline(const NetworkScenario& scenario,
                            const ChannelRealization& realization,
                            BaselineKind kind, const Eigen::VectorXd& budgets,
                            DenoiseRule rule = DenoiseRule::kTrueInterference);

struct GridSearchResult {
  double value = 0.0;       // best objective found on the grid
  Eigen::VectorXd powers;   // minimizing powers (global or cell-local)
  Eigen::VectorXd mse;      // per-cell errors at the minimizer
};

// Exhaustive oracle for the network problem: dense grid in amplitude
// coordinates followed by shrinking zoom scans around the incumbent,
// per-cell optimal denoising, objective max_l mse_l / profile_l.
// Cost-guarded to four devices total; test-only.
GridSearchResult grid_search_p1(const NetworkScenario& scenario,
                                const ChannelRealization& realization,
                                const Eigen::VectorXd& profile,
                                const Eigen::VectorXd& budgets,
                                int resolution = 201);

// Exhaustive oracle for one cell under interference-temperature caps:
// dense amplitude grid plus zoom scans over the cell's power box, caps
// enforced exactly, incoming caps treated as interference.  Cost-guarded to
// three devices in the cell.
GridSearchResult grid_search_p21(const NetworkScenario& scenario,
                                 const ChannelRealization& realization, int cell,
                                 const ItLevels& it,
                                 const Eigen::VectorXd& budgets,
                                 int resolution = 201);

}  // namespace aircomp
