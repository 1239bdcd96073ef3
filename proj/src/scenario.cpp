#include "aircomp/scenario.hpp"

#include <cmath>
#include <stdexcept>

namespace aircomp {

double pathloss_gain(double distance_m, const PathlossModel& model) {
  if (!(distance_m > 0.0))
    throw std::invalid_argument("pathloss_gain: distance must be positive");
  if (!(model.ref_gain > 0.0) || !(model.ref_distance_m > 0.0))
    throw std::invalid_argument("pathloss_gain: reference gain and distance must be positive");
  return model.ref_gain * std::pow(distance_m / model.ref_distance_m, -model.exponent);
}

int NetworkScenario::num_devices() const {
  int n = 0;
  for (int k : devices_per_cell) n += k;
  return n;
}

int NetworkScenario::cell_offset(int cell) const {
  int off = 0;
  for (int l = 0; l < cell; ++l) off += devices_per_cell.at(l);
  return off;
}

int NetworkScenario::cell_of(int device) const {
  int off = 0;
  for (int l = 0; l < num_cells(); ++l) {
    off += devices_per_cell[l];
    if (device < off) return l;
  }
  throw std::out_of_range("cell_of: device index out of range");
}

void NetworkScenario::validate() const {
  if (devices_per_cell.empty())
    throw std::invalid_argument("scenario: at least one cell required");
  if (ap_positions_m.rows() != num_cells())
    throw std::invalid_argument("scenario: one AP position required per cell");
  for (int k : devices_per_cell)
    if (k < 1) throw std::invalid_argument("scenario: every cell needs at least one device");
  if (!(cell_radius_m > 0.0))
    throw std::invalid_argument("scenario: cell radius must be positive");
  if (power_budgets_w.size() != num_devices())
    throw std::invalid_argument("scenario: one power budget required per device");
  if ((power_budgets_w.array() <= 0.0).any())
    throw std::invalid_argument("scenario: power budgets must be positive");
  if (!(noise_power_w > 0.0))
    throw std::invalid_argument("scenario: noise power must be positive");
  if (!(pathloss.ref_gain > 0.0) || !(pathloss.ref_distance_m > 0.0))
    throw std::invalid_argument("scenario: path loss reference gain/distance must be positive");
}

Eigen::VectorXd uniform_budgets(const NetworkScenario& scenario, double watts) {
  return Eigen::VectorXd::Constant(scenario.num_devices(), watts);
}

}  // namespace aircomp
