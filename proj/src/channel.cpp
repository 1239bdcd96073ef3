#include "aircomp/channel.hpp"

#include <cmath>
#include <stdexcept>

#include "aircomp/rng.hpp"

namespace aircomp {

namespace {

// Sub-stream tags for the stages of a realization draw.
constexpr std::uint64_t kPlacementTag = 1;
constexpr std::uint64_t kDirectTag = 2;
constexpr std::uint64_t kCrossTag = 3;

double distance(const Positions& pos, int row, const Positions& aps, int ap) {
  const double dx = pos(row, 0) - aps(ap, 0);
  const double dy = pos(row, 1) - aps(ap, 1);
  return std::sqrt(dx * dx + dy * dy);
}

}  // namespace

double effective_interference(std::complex<double> g, std::complex<double> h) {
  const double habs = std::abs(h);
  if (habs == 0.0)
    throw std::invalid_argument("effective_interference: own channel is zero");
  return (g * std::conj(h)).real() / habs;
}

Positions place_devices(const NetworkScenario& scenario, std::uint64_t seed) {
  scenario.validate();
  SplitMix64 gen(substream(seed, kPlacementTag));
  Positions pos(scenario.num_devices(), 2);
  int k = 0;
  for (int l = 0; l < scenario.num_cells(); ++l) {
    for (int i = 0; i < scenario.cell_size(l); ++i, ++k) {
      // r = R*sqrt(u) gives a uniform density over the disk.
      const double r = scenario.cell_radius_m * std::sqrt(gen.uniform01());
      const double ang = 6.2831853071795864769252867665590058 * gen.uniform01();
      pos(k, 0) = scenario.ap_positions_m(l, 0) + r * std::cos(ang);
      pos(k, 1) = scenario.ap_positions_m(l, 1) + r * std::sin(ang);
    }
  }
  return pos;
}

ChannelRealization sample_channels(const NetworkScenario& scenario,
                                   const Positions& positions,
                                   std::uint64_t seed) {
  scenario.validate();
  const int K = scenario.num_devices();
  const int L = scenario.num_cells();
  if (positions.rows() != K)
    throw std::invalid_argument("sample_channels: one position required per device");

  ChannelRealization re;
  re.direct.resize(K);
  re.direct_abs.resize(K);
  re.cross = Eigen::MatrixXcd::Zero(K, L);
  re.cross_eff = Eigen::MatrixXd::Zero(K, L);

  SplitMix64 gen_h(substream(seed, kDirectTag));
  for (int k = 0; k < K; ++k) {
    const int own = scenario.cell_of(k);
    const double amp =
        std::sqrt(pathloss_gain(distance(positions, k, scenario.ap_positions_m, own),
                                scenario.pathloss));
    std::complex<double> h = amp * gen_h.complex_normal_unit();
    while (std::abs(h) == 0.0) h = amp * gen_h.complex_normal_unit();
    re.direct(k) = h;
    re.direct_abs(k) = std::abs(h);
  }

  SplitMix64 gen_g(substream(seed, kCrossTag));
  for (int k = 0; k < K; ++k) {
    const int own = scenario.cell_of(k);
    for (int j = 0; j < L; ++j) {
      if (j == own) continue;
      const double amp =
          std::sqrt(pathloss_gain(distance(positions, k, scenario.ap_positions_m, j),
                                  scenario.pathloss));
      const std::complex<double> g = amp * gen_g.complex_normal_unit();
      re.cross(k, j) = g;
      re.cross_eff(k, j) = effective_interference(g, re.direct(k));
    }
  }
  return re;
}

ChannelRealization sample_realization(const NetworkScenario& scenario,
                                      std::uint64_t seed) {
  return sample_channels(scenario, place_devices(scenario, seed), seed);
}

}  // namespace aircomp
