#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <limits>

#include "aircomp/baselines.hpp"
#include "aircomp/coordination.hpp"
#include "aircomp/mse.hpp"
#include "aircomp/rng.hpp"
#include "helpers.hpp"

using namespace aircomp;

namespace {

const double kInf = std::numeric_limits<double>::infinity();

// two coupled single-device cells with moderate cross gains
struct CoupledPair {
  NetworkScenario sc;
  ChannelRealization re;
};

CoupledPair coupled_pair() {
  CoupledPair cp;
  cp.sc = testutil::cells({1, 1}, 0.5, 1.0);
  Eigen::VectorXd h(2);
  h << 1.0, 0.9;
  Eigen::MatrixXd ge = Eigen::MatrixXd::Zero(2, 2);
  ge(0, 1) = 0.6;
  ge(1, 0) = 0.5;
  cp.re = testutil::manual(cp.sc, h, ge);
  return cp;
}

double generated_interference(const NetworkScenario& sc,
                              const ChannelRealization& re,
                              const CellSolution& sol, int to_cell) {
  double s = 0.0;
  for (int i = 0; i < sc.cell_size(sol.cell); ++i) {
    const int k = sc.cell_offset(sol.cell) + i;
    s += sol.powers(i) * re.cross_eff(k, to_cell) * re.cross_eff(k, to_cell);
  }
  return s;
}

}  // namespace

TEST_CASE("pair direction hand values") {
  SensitivityMatrix D{-1.0, 2.0, 3.0, -4.0};

  SUBCASE("balanced weight") {
    const Eigen::Vector2d d = direction(D, 1.0);
    CHECK(d(0) == doctest::Approx(-6.0));
    CHECK(d(1) == doctest::Approx(-4.0));
    // both cells improve to first order
    CHECK(D.a * d(0) + D.b * d(1) < 0.0);
    CHECK(D.c * d(0) + D.d * d(1) < 0.0);
  }

  SUBCASE("zero weight drops the first cell's pull") {
    const Eigen::Vector2d d = direction(D, 0.0);
    CHECK(d(0) == doctest::Approx(-2.0));
    CHECK(d(1) == doctest::Approx(-1.0));
  }

  SUBCASE("orientation flips with the determinant side") {
    SensitivityMatrix E{-5.0, 1.0, 1.0, -5.0};
    const Eigen::Vector2d d = direction(E, 1.0);
    CHECK(d(0) == doctest::Approx(6.0));
    CHECK(d(1) == doctest::Approx(6.0));
    CHECK(E.a * d(0) + E.b * d(1) < 0.0);
    CHECK(E.c * d(0) + E.d * d(1) < 0.0);
  }

  SUBCASE("residual is the scale-free price product") {
    CHECK(D.det() == doctest::Approx(-2.0));
    CHECK(D.normalized_residual() == doctest::Approx(2.0 / 6.0));
    CHECK_THROWS_AS(direction(D, -0.5), std::invalid_argument);
  }
}

TEST_CASE("sensitivities are assembled from prices and denoise factors") {
  CoupledPair cp = coupled_pair();
  ItLevels it;
  it.level = Eigen::MatrixXd::Zero(2, 2);
  it.level(0, 1) = 0.05;
  it.level(1, 0) = 0.04;

  const CellSolution s0 = solve_p22(cp.sc, cp.re, 0, it, cp.sc.power_budgets_w);
  const CellSolution s1 = solve_p22(cp.sc, cp.re, 1, it, cp.sc.power_budgets_w);
  const SensitivityMatrix D = pair_sensitivity(s0, s1, 0, 1);

  CHECK(D.a == -s0.duals(1) * s0.inv_denoise);
  CHECK(D.b == s0.inv_denoise);
  CHECK(D.c == s1.inv_denoise);
  CHECK(D.d == -s1.duals(0) * s1.inv_denoise);
  CHECK(D.a <= 0.0);
  CHECK(D.b > 0.0);
  CHECK(D.c > 0.0);
  CHECK(D.d <= 0.0);
}

TEST_CASE("caps from an allocation reproduce its interference") {
  CoupledPair cp = coupled_pair();
  Eigen::VectorXd p(2);
  p << 1.0, 0.5;
  const ItLevels it = init_it_from_allocation(cp.sc, cp.re, p);
  CHECK(it.level(0, 1) == doctest::Approx(1.0 * 0.36));
  CHECK(it.level(1, 0) == doctest::Approx(0.5 * 0.25));
  CHECK(it.level(0, 1) ==
        doctest::Approx(foreign_interference(cp.sc, cp.re, p, 1)));
  CHECK(it.level(1, 0) ==
        doctest::Approx(foreign_interference(cp.sc, cp.re, p, 0)));
}

TEST_CASE("initial state cannot be worse than the seeding scheme") {
  CoupledPair cp = coupled_pair();
  const BaselineResult base = run_baseline(cp.sc, cp.re,
                                           BaselineKind::kIgnoreInterference,
                                           cp.sc.power_budgets_w);
  const ItLevels it =
      init_it_from_allocation(cp.sc, cp.re, base.allocation.powers_w);
  const CoordinationState st =
      init_state(cp.sc, cp.re, it, cp.sc.power_budgets_w, {});
  REQUIRE(st.cells.size() == 2);
  for (int l = 0; l < 2; ++l) {
    // the seeding allocation is feasible at these caps and sees exactly the
    // capped interference, so the solved cell can only match or improve
    CHECK(st.cells[l].mse <= base.mse(l) + 1e-9);
  }
}

TEST_CASE("pair update mechanics") {
  CoordinationParams params;

  SUBCASE("zero step is an explicit no-op") {
    CoupledPair cp = coupled_pair();
    ItLevels it;
    it.level = Eigen::MatrixXd::Zero(2, 2);
    it.level(0, 1) = 0.05;
    it.level(1, 0) = 0.04;
    CoordinationState st = init_state(cp.sc, cp.re, it, cp.sc.power_budgets_w, params);
    const std::size_t trace_before = st.trace.size();
    const std::size_t msgs_before = st.messages.size();
    const ItLevels out = update_pair(cp.sc, cp.re, cp.sc.power_budgets_w, params,
                                     st, 0, 1, 0.0, 1.0);
    CHECK(out.level == it.level);
    CHECK(st.trace.size() == trace_before);
    CHECK(st.messages.size() == msgs_before);
  }

  SUBCASE("negative caps are clamped to zero") {
    // no coupling at all: lowering both caps to zero is accepted in one step
    NetworkScenario sc = testutil::cells({1, 1}, 1.0, 1.0);
    ChannelRealization re = testutil::manual(sc, Eigen::VectorXd::Ones(2),
                                             Eigen::MatrixXd::Zero(2, 2));
    ItLevels it;
    it.level = Eigen::MatrixXd::Zero(2, 2);
    it.level(0, 1) = 0.01;
    it.level(1, 0) = 0.01;
    CoordinationState st = init_state(sc, re, it, sc.power_budgets_w, params);
    const ItLevels out = update_pair(sc, re, sc.power_budgets_w, params, st, 0, 1,
                                     0.05 * std::sqrt(2.0), 1.0);
    CHECK(out.level(0, 1) == 0.0);
    CHECK(out.level(1, 0) == 0.0);
    CHECK(st.trace.back().accepted);
  }

  SUBCASE("an accepted step never hurts either cell") {
    CoupledPair cp = coupled_pair();
    const ItLevels it = init_it_from_allocation(
        cp.sc, cp.re,
        run_baseline(cp.sc, cp.re, BaselineKind::kIgnoreInterference,
                     cp.sc.power_budgets_w)
            .allocation.powers_w);
    CoordinationState st = init_state(cp.sc, cp.re, it, cp.sc.power_budgets_w, params);
    const double m0 = st.cells[0].mse;
    const double m1 = st.cells[1].mse;
    const double delta = 0.05 * std::min(it.level(0, 1), it.level(1, 0));
    try {
      update_pair(cp.sc, cp.re, cp.sc.power_budgets_w, params, st, 0, 1, delta, 1.0);
      CHECK(st.cells[0].mse <= m0 + 1e-9);
      CHECK(st.cells[1].mse <= m1 + 1e-9);
    } catch (const PairStalled&) {
      // also a legal outcome: the starting point was already pairwise optimal
      CHECK(st.cells[0].mse == m0);
    }
  }

  SUBCASE("cells outside the pair are untouched") {
    NetworkScenario sc = testutil::cells({1, 1, 1}, 0.5, 1.0);
    Eigen::VectorXd h(3);
    h << 1.0, 0.9, 0.8;
    Eigen::MatrixXd ge = Eigen::MatrixXd::Zero(3, 3);
    ge(0, 1) = 0.6;
    ge(1, 0) = 0.5;
    ge(2, 0) = 0.3;  // cell 2 couples into AP 0 but is not in the pair
    ChannelRealization re = testutil::manual(sc, h, ge);
    Eigen::VectorXd p = sc.power_budgets_w;
    CoordinationState st = init_state(sc, re, init_it_from_allocation(sc, re, p),
                                      sc.power_budgets_w, params);
    const double m2 = st.cells[2].mse;
    const Eigen::MatrixXd caps_before = st.it.level;
    try {
      update_pair(sc, re, sc.power_budgets_w, params, st, 0, 1,
                  0.05 * caps_before(0, 1), 1.0);
    } catch (const PairStalled&) {
    }
    CHECK(st.cells[2].mse == m2);
    for (int l = 0; l < 3; ++l) {
      if (l != 0) CHECK(st.it.level(2, l) == caps_before(2, l));
      if (l != 2) continue;
      CHECK(st.it.level(0, l) == caps_before(0, l));
      CHECK(st.it.level(1, l) == caps_before(1, l));
    }
  }

  SUBCASE("a pairwise-optimal point stalls") {
    // decoupled cells already at zero caps: every candidate step is a no-op
    NetworkScenario sc = testutil::cells({1, 1}, 1.0, 1.0);
    ChannelRealization re = testutil::manual(sc, Eigen::VectorXd::Ones(2),
                                             Eigen::MatrixXd::Zero(2, 2));
    CoordinationState st = init_state(sc, re, ItLevels::zero(2),
                                      sc.power_budgets_w, params);
    CHECK_THROWS_AS(update_pair(sc, re, sc.power_budgets_w, params, st, 0, 1,
                                0.01, 1.0),
                    PairStalled);
  }
}

TEST_CASE("decoupled network stops on no improvement at isolated optima") {
  NetworkScenario sc = testutil::cells({2, 1}, 0.8, 1.0);
  Eigen::VectorXd h(3);
  h << 1.0, 0.7, 0.9;
  ChannelRealization re =
      testutil::manual(sc, h, Eigen::MatrixXd::Zero(3, 2));

  const ItLevels it0 =
      init_it_from_allocation(sc, re, sc.power_budgets_w);  // all zeros here
  CHECK(it0.level.maxCoeff() == 0.0);

  const CoordinationResult res =
      run_algorithm2(sc, re, it0, sc.power_budgets_w);
  CHECK(res.stop_reason == StopReason::kNoImprovement);
  CHECK(res.rounds == 1);
  for (int l = 0; l < 2; ++l) {
    const CellSolution iso =
        solve_single_cell(sc, re, l, sc.noise_power_w, sc.power_budgets_w);
    CHECK(res.mse(l) == doctest::Approx(iso.mse).epsilon(1e-9));
  }
}

TEST_CASE("coordination on a realistic two-cell drop") {
  NetworkScenario sc = testutil::paper_scenario(2, 6, 0.1);
  ChannelRealization re = sample_realization(sc, 2026);

  const BaselineResult seed = run_baseline(
      sc, re, BaselineKind::kIgnoreInterference, sc.power_budgets_w);
  const ItLevels it0 =
      init_it_from_allocation(sc, re, seed.allocation.powers_w);

  const CoordinationResult res = run_algorithm2(sc, re, it0, sc.power_budgets_w);
  REQUIRE(!res.trace.empty());

  // the per-AP error trace never increases along the accepted path
  Eigen::VectorXd prev = res.trace.front().mse;
  for (const TraceEntry& e : res.trace) {
    for (int l = 0; l < 2; ++l)
      CHECK(e.mse(l) <= prev(l) + 1e-9 * (1.0 + std::abs(prev(l))));
    prev = e.mse;
  }

  // final point is no worse than the seed in both cells, and the run
  // terminates before the round limit on this instance
  for (int l = 0; l < 2; ++l) CHECK(res.mse(l) <= res.trace.front().mse(l) + 1e-12);
  CHECK(res.rounds <= 200);
  CHECK(res.stop_reason != StopReason::kRoundLimit);

  // priced caps are tight at the final point
  for (int l = 0; l < 2; ++l) {
    const CellSolution& sol = res.cells[l];
    CHECK(sol.gap <= 1e-6);
    CHECK(sol.comp_slack <= 1e-6);
    for (int j = 0; j < 2; ++j) {
      if (j == l || !std::isfinite(res.it.level(l, j))) continue;
      if (sol.duals(j) * res.it.level(l, j) > 1e-3 * (1.0 + sol.mse)) {
        const double gen = generated_interference(sc, re, sol, j);
        CHECK(gen == doctest::Approx(res.it.level(l, j))
                         .epsilon(1e-4)
                         .scale(1.0 + res.it.level(l, j)));
      }
    }
  }
}

TEST_CASE("the improvement weight biases the favored cell") {
  NetworkScenario sc = testutil::paper_scenario(2, 6, 0.1);
  ChannelRealization re = sample_realization(sc, 4096);
  const ItLevels it0 = init_it_from_allocation(
      sc, re,
      run_baseline(sc, re, BaselineKind::kIgnoreInterference, sc.power_budgets_w)
          .allocation.powers_w);

  CoordinationParams even;
  even.alpha = 1.0;
  CoordinationParams biased;
  biased.alpha = 10.0;  // favors the lower-indexed cell of each pair

  const CoordinationResult r1 = run_algorithm2(sc, re, it0, sc.power_budgets_w, even);
  const CoordinationResult r10 =
      run_algorithm2(sc, re, it0, sc.power_budgets_w, biased);
  CHECK(r10.mse(0) <= r1.mse(0) + 1e-12);
}
