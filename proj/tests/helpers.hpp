#pragma once

#include <Eigen/Dense>
#include <complex>
#include <vector>

#include "aircomp/channel.hpp"
#include "aircomp/scenario.hpp"

namespace testutil {

// Bare scenario: unit path gain everywhere, one AP per 40 m along the x
// axis, radius 20 m.  Channel values for hand-built instances come from
// manual() below, so geometry is irrelevant there.
inline aircomp::NetworkScenario cells(const std::vector<int>& counts,
                                      double noise_w, double budget_w) {
  aircomp::NetworkScenario sc;
  const int L = static_cast<int>(counts.size());
  sc.ap_positions_m.resize(L, 2);
  for (int l = 0; l < L; ++l) {
    sc.ap_positions_m(l, 0) = 40.0 * l;
    sc.ap_positions_m(l, 1) = 0.0;
  }
  sc.devices_per_cell = counts;
  sc.cell_radius_m = 20.0;
  sc.noise_power_w = noise_w;
  sc.power_budgets_w = aircomp::uniform_budgets(sc, budget_w);
  return sc;
}

// Realization with prescribed direct amplitudes and effective cross gains.
inline aircomp::ChannelRealization manual(const aircomp::NetworkScenario& sc,
                                          const Eigen::VectorXd& h_abs,
                                          const Eigen::MatrixXd& cross_eff) {
  aircomp::ChannelRealization re;
  const int n = sc.num_devices();
  re.direct.resize(n);
  for (int k = 0; k < n; ++k) re.direct(k) = {h_abs(k), 0.0};
  re.direct_abs = h_abs;
  re.cross = Eigen::MatrixXcd::Zero(n, sc.num_cells());
  for (int k = 0; k < n; ++k)
    for (int j = 0; j < sc.num_cells(); ++j) re.cross(k, j) = {cross_eff(k, j), 0.0};
  re.cross_eff = cross_eff;
  return re;
}

// Paper-style two- or three-cell geometry: -60 dB reference power gain at
// 10 m, exponent 3, -120 dBm noise.
inline aircomp::NetworkScenario paper_scenario(int num_cells, int devices_per_cell,
                                               double budget_w) {
  aircomp::NetworkScenario sc;
  sc.ap_positions_m.resize(num_cells, 2);
  sc.ap_positions_m(0, 0) = 0.0;
  sc.ap_positions_m(0, 1) = 0.0;
  if (num_cells > 1) {
    sc.ap_positions_m(1, 0) = 0.0;
    sc.ap_positions_m(1, 1) = 40.0;
  }
  if (num_cells > 2) {
    sc.ap_positions_m(2, 0) = 20.0;
    sc.ap_positions_m(2, 1) = 40.0;
  }
  sc.devices_per_cell.assign(num_cells, devices_per_cell);
  sc.cell_radius_m = 20.0;
  sc.noise_power_w = 1e-15;  // -120 dBm
  sc.pathloss.ref_gain = 1e-6;  // -60 dB
  sc.pathloss.ref_distance_m = 10.0;
  sc.pathloss.exponent = 3.0;
  sc.power_budgets_w = aircomp::uniform_budgets(sc, budget_w);
  return sc;
}

}  // namespace testutil
