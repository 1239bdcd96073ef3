#pragma once

#include <Eigen/Dense>
#include <vector>

namespace aircomp {

using Positions = Eigen::Matrix<double, Eigen::Dynamic, 2>;

// Distance-based path loss.  pathloss_gain() returns a *power* gain; the
// amplitude factor applied to channel coefficients is its square root.
struct PathlossModel {
  double ref_gain = 1.0;        // linear power gain at the reference distance
  double ref_distance_m = 1.0;  // reference distance
  double exponent = 0.0;        // decay exponent
};

double pathloss_gain(double distance_m, const PathlossModel& model);

// Static description of the network: AP locations, per-cell device counts,
// per-device transmit power budgets and the receiver noise power.  Devices
// are indexed globally, cell by cell, so cell l owns the contiguous index
// range [cell_offset(l), cell_offset(l) + cell_size(l)).
struct NetworkScenario {
  Positions ap_positions_m;           // one row per AP
  std::vector<int> devices_per_cell;  // K_l, one entry per cell
  double cell_radius_m = 0.0;
  Eigen::VectorXd power_budgets_w;    // per device, global indexing
  double noise_power_w = 0.0;         // variance of the real noise component
  PathlossModel pathloss;

  int num_cells() const { return static_cast<int>(devices_per_cell.size()); }
  int num_devices() const;
  int cell_offset(int cell) const;
  int cell_size(int cell) const { return devices_per_cell.at(cell); }
  int cell_of(int device) const;

  // Throws std::invalid_argument on structural problems (no cells, empty
  // cells, negative budgets or noise, budget length mismatch, ...).
  void validate() const;
};

// Convenience: uniform power budget for every device of the scenario.
Eigen::VectorXd uniform_budgets(const NetworkScenario& scenario, double watts);

}  // namespace aircomp
