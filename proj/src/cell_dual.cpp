#include "aircomp/cell_dual.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <stdexcept>

#include "aircomp/errors.hpp"

namespace aircomp {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

// One cell's problem data in local indexing.
struct CellView {
  int cell = 0;
  int off = 0;
  int K = 0;
  Eigen::VectorXd h;           // |h| per device
  Eigen::VectorXd budget;      // power budget per device
  Eigen::MatrixXd g2;          // K x L squared outgoing effective gains
  Eigen::VectorXd cap;         // outgoing caps, full length L
  std::vector<int> cons;       // neighbors whose caps are dualized
  std::vector<char> silenced;  // devices pinned to zero by hard-zero caps
  int n_active = 0;
  double base_noise = 0.0;     // noise power + sum of incoming caps
};

CellView make_view(const NetworkScenario& sc, const ChannelRealization& re,
                   int cell, const ItLevels& it, const Eigen::VectorXd& budgets) {
  const int L = sc.num_cells();
  if (cell < 0 || cell >= L) throw std::invalid_argument("cell solve: cell index out of range");
  if (it.level.rows() != L || it.level.cols() != L)
    throw std::invalid_argument("cell solve: cap matrix must be cells x cells");
  if (budgets.size() != sc.num_devices())
    throw std::invalid_argument("cell solve: one power budget per device required");

  CellView v;
  v.cell = cell;
  v.off = sc.cell_offset(cell);
  v.K = sc.cell_size(cell);
  v.h = re.direct_abs.segment(v.off, v.K);
  v.budget = budgets.segment(v.off, v.K);
  v.g2 = re.cross_eff.block(v.off, 0, v.K, L).array().square().matrix();
  v.cap = it.level.row(cell).transpose();
  v.silenced.assign(v.K, 0);

  double incoming = 0.0;
  for (int j = 0; j < L; ++j) {
    if (j == cell) continue;
    const double in = it.level(j, cell);
    if (!(in >= 0.0) || !std::isfinite(in))
      throw std::invalid_argument("cell solve: incoming caps must be finite and nonnegative");
    incoming += in;
    if (!(v.cap(j) >= 0.0))
      throw std::invalid_argument("cell solve: outgoing caps must be nonnegative");
    if (v.cap(j) == 0.0) {
      // A hard-zero cap admits no interference at all: coupled devices stay
      // silent and the constraint disappears from the dual.
      for (int i = 0; i < v.K; ++i)
        if (v.g2(i, j) > 0.0) v.silenced[i] = 1;
    }
  }
  for (int j = 0; j < L; ++j) {
    if (j == cell || v.cap(j) == 0.0 || !std::isfinite(v.cap(j))) continue;
    bool coupled = false;
    for (int i = 0; i < v.K; ++i)
      if (!v.silenced[i] && v.g2(i, j) > 0.0) coupled = true;
    if (coupled) v.cons.push_back(j);
  }
  for (int i = 0; i < v.K; ++i)
    if (!v.silenced[i]) ++v.n_active;
  v.base_noise = sc.noise_power_w + incoming;
  return v;
}

struct InnerEval {
  double nu = 0.0;
  double value = 0.0;
  int kstar = 0;             // full-power devices among the active, sorted by B
  std::vector<int> order;    // active local indices, ascending B
  Eigen::VectorXd c;         // regularized gains, full local length
  Eigen::VectorXd B;         // policy indicators, full local length
};

// Exact inner minimum of the partial Lagrangian at the given duals.  The
// candidate set (one stationary point per full-power/inversion split,
// clamped to its interval, plus the all-inversion candidate with the
// cap-feasibility floor) covers the true minimum of the piecewise objective.
InnerEval eval_inner(const CellView& v, const Eigen::VectorXd& duals) {
  InnerEval ev;
  ev.c.resize(v.K);
  ev.B.resize(v.K);
  for (int i = 0; i < v.K; ++i) {
    const double c = v.h(i) * v.h(i) + v.g2.row(i).dot(duals);
    ev.c(i) = c;
    ev.B(i) = v.budget(i) * c * c / (v.h(i) * v.h(i));
  }

  ev.order.reserve(v.n_active);
  for (int i = 0; i < v.K; ++i)
    if (!v.silenced[i]) ev.order.push_back(i);
  std::stable_sort(ev.order.begin(), ev.order.end(),
                   [&](int a, int b) { return ev.B(a) < ev.B(b); });
  const int Ka = static_cast<int>(ev.order.size());
  const double silent_add = static_cast<double>(v.K - Ka);

  double slope = v.base_noise;
  for (int j : v.cons) slope -= duals(j) * v.cap(j);
  if (slope < 0.0) {
    if (slope < -1e-12 * (1.0 + v.base_noise))
      throw std::invalid_argument("inner_nu: duals outside the bounded halfspace");
    slope = 0.0;
  }

  if (Ka == 0) {
    ev.nu = 0.0;
    ev.kstar = 0;
    ev.value = silent_add;
    return ev;
  }

  // Floor keeping the all-inversion point feasible for every dualized cap.
  double floor0 = 1.0 / ev.B(ev.order[0]);
  for (int j : v.cons) {
    double s = 0.0;
    for (int i : ev.order)
      s += v.h(i) * v.h(i) * v.g2(i, j) / (ev.c(i) * ev.c(i));
    floor0 = std::max(floor0, s / v.cap(j));
  }

  // Suffix misalignment of devices on the inversion branch.
  std::vector<double> suffix(Ka + 1, 0.0);
  for (int k = Ka - 1; k >= 0; --k) {
    const int i = ev.order[k];
    suffix[k] = suffix[k + 1] + (1.0 - v.h(i) * v.h(i) / ev.c(i));
  }

  std::vector<double> cand_nu(Ka + 1), cand_val(Ka + 1);
  cand_nu[0] = floor0;
  cand_val[0] = silent_add + suffix[0] + slope * floor0;

  double acc_p = 0.0;  // sum of c_i * budget_i over the full-power prefix
  double acc_b = 0.0;  // sum of |h_i| * sqrt(budget_i)
  for (int k = 1; k <= Ka; ++k) {
    const int i = ev.order[k - 1];
    acc_p += ev.c(i) * v.budget(i);
    acc_b += v.h(i) * std::sqrt(v.budget(i));
    const double a = acc_p + slope;
    const double stat = (acc_b / a) * (acc_b / a);
    const double hi = 1.0 / ev.B(ev.order[k - 1]);
    const double lo = (k < Ka) ? 1.0 / ev.B(ev.order[k]) : 0.0;
    const double nu = std::min(hi, std::max(lo, stat));
    cand_nu[k] = nu;
    cand_val[k] = a * nu - 2.0 * acc_b * std::sqrt(nu) + k + suffix[k] + silent_add;
  }

  int best = 0;
  for (int k = 1; k <= Ka; ++k)
    if (cand_val[k] < cand_val[best]) best = k;
  const double tie = 1e-10 * (1.0 + std::abs(cand_val[best]));
  for (int k = 0; k <= Ka; ++k)
    if (cand_val[k] <= cand_val[best] + tie && cand_nu[k] > cand_nu[best]) best = k;

  ev.nu = cand_nu[best];
  ev.kstar = best;
  ev.value = cand_val[best];
  return ev;
}

Eigen::VectorXd amplitudes_at(const CellView& v, const InnerEval& ev, double nu) {
  Eigen::VectorXd q = Eigen::VectorXd::Zero(v.K);
  if (nu <= 0.0) return q;
  for (int i = 0; i < v.K; ++i) {
    if (v.silenced[i]) continue;
    q(i) = std::min(std::sqrt(v.budget(i) * nu), v.h(i) / ev.c(i));
  }
  return q;
}

struct Primal {
  Eigen::VectorXd powers;        // local
  double eta = kInf;
  double nu = 0.0;
  double phibar = 0.0;           // cell error with incoming caps as interference
  double comp_slack = 0.0;
  Eigen::VectorXd interference;  // generated at each AP, full length L
};

// Primal point from an inner solution: powers from the scaled amplitudes,
// then a multiplicative pull-back onto the caps and a re-optimized
// denoising factor.
Primal recover(const CellView& v, const InnerEval& ev) {
  Primal pr;
  pr.powers = Eigen::VectorXd::Zero(v.K);
  if (ev.nu > 0.0) {
    const Eigen::VectorXd q = amplitudes_at(v, ev, ev.nu);
    pr.powers = q.array().square().matrix() / ev.nu;
  }

  double scale = 1.0;
  for (int j : v.cons) {
    const double gen = pr.powers.dot(v.g2.col(j));
    if (gen > v.cap(j)) scale = std::min(scale, v.cap(j) / gen);
  }
  pr.powers *= scale;

  pr.interference = Eigen::VectorXd::Zero(v.cap.size());
  for (int j = 0; j < v.cap.size(); ++j)
    if (j != v.cell) pr.interference(j) = pr.powers.dot(v.g2.col(j));

  double num = v.base_noise;
  double den = 0.0;
  for (int i = 0; i < v.K; ++i) {
    num += pr.powers(i) * v.h(i) * v.h(i);
    den += std::sqrt(pr.powers(i)) * v.h(i);
  }
  if (den > 0.0) {
    pr.eta = (num / den) * (num / den);
    pr.nu = 1.0 / pr.eta;
    double misalign = 0.0;
    const double inv_sqrt_eta = 1.0 / std::sqrt(pr.eta);
    for (int i = 0; i < v.K; ++i) {
      const double t = std::sqrt(pr.powers(i)) * v.h(i) * inv_sqrt_eta - 1.0;
      misalign += t * t;
    }
    pr.phibar = misalign + v.base_noise / pr.eta;
  } else {
    pr.eta = kInf;
    pr.nu = 0.0;
    pr.phibar = static_cast<double>(v.K);
  }
  return pr;
}

double comp_slack_at(const CellView& v, const Primal& pr, const Eigen::VectorXd& duals) {
  double cs = 0.0;
  for (int j : v.cons)
    cs = std::max(cs, std::abs(duals(j) * (pr.interference(j) - v.cap(j))));
  return cs;
}

// Projection onto {duals >= 0, sum duals*cap <= budget_noise}: alternating
// clip and halfspace steps.
void project_duals(const CellView& v, Eigen::VectorXd& duals) {
  double cap2 = 0.0;
  for (int j : v.cons) cap2 += v.cap(j) * v.cap(j);
  for (int round = 0; round < 64; ++round) {
    for (int j : v.cons) duals(j) = std::max(duals(j), 0.0);
    double used = 0.0;
    for (int j : v.cons) used += duals(j) * v.cap(j);
    if (used <= v.base_noise || cap2 == 0.0) return;
    const double shift = (used - v.base_noise) / cap2;
    for (int j : v.cons) duals(j) -= shift * v.cap(j);
  }
  for (int j : v.cons) duals(j) = std::max(duals(j), 0.0);
}

CellSolution finish(const CellView& v, const Eigen::VectorXd& duals,
                    const InnerEval& ev, const Primal& pr, double best_dual,
                    int evals) {
  CellSolution sol;
  sol.cell = v.cell;
  sol.powers = pr.powers;
  sol.denoise = pr.eta;
  sol.inv_denoise = pr.nu;
  sol.duals = duals;
  sol.threshold = ev.kstar;
  sol.ascending = ev.order;
  for (int i = 0; i < v.K; ++i)
    if (v.silenced[i]) {
      sol.ascending.push_back(i);
      sol.silenced.push_back(i);
    }
  sol.mse = pr.phibar;
  sol.dual_value = best_dual;
  sol.gap = pr.phibar - best_dual;
  sol.comp_slack = comp_slack_at(v, pr, duals);
  sol.iterations = evals;
  return sol;
}

}  // namespace

PolicyIndicators policy_indicators(const NetworkScenario& scenario,
                                   const ChannelRealization& realization,
                                   int cell, const Eigen::VectorXd& duals,
                                   const Eigen::VectorXd& budgets) {
  ItLevels unconstrained = ItLevels::zero(scenario.num_cells());
  unconstrained.level.row(cell).setConstant(kInf);
  unconstrained.level(cell, cell) = 0.0;
  const CellView v = make_view(scenario, realization, cell, unconstrained, budgets);
  const InnerEval ev = eval_inner(v, duals);
  PolicyIndicators out;
  out.value = ev.B;
  out.ascending = ev.order;
  return out;
}

Eigen::VectorXd inner_q(const NetworkScenario& scenario,
                        const ChannelRealization& realization, int cell,
                        const Eigen::VectorXd& duals, double inv_denoise,
                        const Eigen::VectorXd& budgets) {
  if (!(inv_denoise >= 0.0))
    throw std::invalid_argument("inner_q: inverse denoising factor must be nonnegative");
  ItLevels unconstrained = ItLevels::zero(scenario.num_cells());
  unconstrained.level.row(cell).setConstant(kInf);
  unconstrained.level(cell, cell) = 0.0;
  const CellView v = make_view(scenario, realization, cell, unconstrained, budgets);
  const InnerEval ev = eval_inner(v, duals);
  return amplitudes_at(v, ev, inv_denoise);
}

InnerNu inner_nu(const NetworkScenario& scenario,
                 const ChannelRealization& realization, int cell,
                 const Eigen::VectorXd& duals, const ItLevels& it,
                 const Eigen::VectorXd& budgets) {
  const CellView v = make_view(scenario, realization, cell, it, budgets);
  const InnerEval ev = eval_inner(v, duals);
  return {ev.nu, ev.kstar, ev.value};
}

Eigen::VectorXd dual_subgradient(const NetworkScenario& scenario,
                                 const ChannelRealization& realization, int cell,
                                 const Eigen::VectorXd& q, double inv_denoise,
                                 const ItLevels& it) {
  const int L = scenario.num_cells();
  const int off = scenario.cell_offset(cell);
  const int K = scenario.cell_size(cell);
  if (q.size() != K)
    throw std::invalid_argument("dual_subgradient: one amplitude per cell device required");
  Eigen::VectorXd s = Eigen::VectorXd::Zero(L);
  for (int j = 0; j < L; ++j) {
    if (j == cell) continue;
    const double cap = it.level(cell, j);
    if (!std::isfinite(cap)) continue;
    double gen = 0.0;
    for (int i = 0; i < K; ++i) {
      const double g = realization.cross_eff(off + i, j);
      gen += q(i) * q(i) * g * g;
    }
    s(j) = gen - cap * inv_denoise;
  }
  return s;
}

CellSolution solve_p22(const NetworkScenario& scenario,
                       const ChannelRealization& realization, int cell,
                       const ItLevels& it, const Eigen::VectorXd& budgets,
                       double tol, int max_iters,
                       const Eigen::VectorXd* warm_duals) {
  const int L = scenario.num_cells();
  const CellView v = make_view(scenario, realization, cell, it, budgets);
  const double tol_eff = tol > 0.0 ? tol : 1e-6;

  int evals = 0;
  const auto eval_at = [&](const Eigen::VectorXd& duals) {
    ++evals;
    return eval_inner(v, duals);
  };

  Eigen::VectorXd duals = Eigen::VectorXd::Zero(L);
  if (warm_duals && warm_duals->size() == L) {
    for (int j : v.cons) duals(j) = std::max((*warm_duals)(j), 0.0);
    project_duals(v, duals);
  }

  if (v.cons.empty()) {
    const InnerEval ev = eval_at(duals);
    const Primal pr = recover(v, ev);
    return finish(v, duals, ev, pr, ev.value, evals);
  }

  // Supergradient at the inner solution: one inner eval yields every component.
  const auto supergrad = [&](const Eigen::VectorXd& d) {
    const InnerEval ev = eval_at(d);
    const Eigen::VectorXd q = amplitudes_at(v, ev, ev.nu);
    Eigen::VectorXd s = Eigen::VectorXd::Zero(L);
    for (int j : v.cons) {
      double gen = 0.0;
      for (int i = 0; i < v.K; ++i) gen += q(i) * q(i) * v.g2(i, j);
      s(j) = gen - v.cap(j) * ev.nu;
    }
    return s;
  };

  // Exact concave line maximization along u: the directional derivative
  // u . supergrad is non-increasing in t, so bisect on its sign inside the
  // feasible segment.
  const auto line_max = [&](Eigen::VectorXd& d, const Eigen::VectorXd& u) {
    double t_lo = -kInf, t_hi = kInf;
    for (int j : v.cons) {
      if (u(j) > 0.0)
        t_lo = std::max(t_lo, -d(j) / u(j));
      else if (u(j) < 0.0)
        t_hi = std::min(t_hi, d(j) / -u(j));
    }
    double used = 0.0, du = 0.0;
    for (int j : v.cons) {
      used += d(j) * v.cap(j);
      du += u(j) * v.cap(j);
    }
    if (du > 0.0)
      t_hi = std::min(t_hi, (v.base_noise - used) / du);
    else if (du < 0.0)
      t_lo = std::max(t_lo, (v.base_noise - used) / du);
    if (!(t_lo <= t_hi) || !std::isfinite(t_lo) || !std::isfinite(t_hi)) return;

    const auto deriv = [&](double t) {
      const Eigen::VectorXd s = supergrad(d + t * u);
      double g = 0.0;
      for (int j : v.cons) g += u(j) * s(j);
      return g;
    };

    double t;
    if (deriv(t_lo) <= 0.0) {
      t = t_lo;
    } else if (deriv(t_hi) >= 0.0) {
      t = t_hi;
    } else {
      double lo = t_lo, hi = t_hi;
      for (int i = 0; i < 90 && hi - lo > 1e-15 * (1.0 + std::abs(hi) + std::abs(lo));
           ++i) {
        const double mid = 0.5 * (lo + hi);
        if (deriv(mid) > 0.0)
          lo = mid;
        else
          hi = mid;
      }
      t = 0.5 * (lo + hi);
    }
    d += t * u;
    for (int j : v.cons) d(j) = std::max(d(j), 0.0);
  };

  // Sweep directions: every coordinate axis, plus the scaled diagonals of
  // every constraint pair so the ascent can track a nonsmooth ridge that
  // single-coordinate moves cannot follow.
  std::vector<Eigen::VectorXd> dirs;
  for (int j : v.cons) {
    Eigen::VectorXd u = Eigen::VectorXd::Zero(L);
    u(j) = 1.0;
    dirs.push_back(u);
  }
  for (std::size_t a = 0; a < v.cons.size(); ++a)
    for (std::size_t b = a + 1; b < v.cons.size(); ++b) {
      const int i = v.cons[a], j = v.cons[b];
      const double si = v.base_noise / v.cap(i), sj = v.base_noise / v.cap(j);
      Eigen::VectorXd u = Eigen::VectorXd::Zero(L);
      u(i) = si;
      u(j) = sj;
      dirs.push_back(u);
      u(j) = -sj;
      dirs.push_back(u);
    }

  double best_val = -kInf;
  Eigen::VectorXd best_duals = duals;
  int stalls = 0;

  while (evals < max_iters) {
    const Eigen::VectorXd prev = duals;
    for (const Eigen::VectorXd& u : dirs) line_max(duals, u);

    InnerEval ev = eval_at(duals);
    if (ev.value > best_val) {
      best_val = ev.value;
      best_duals = duals;
    }

    InnerEval best_ev = eval_at(best_duals);
    Primal pr = recover(v, best_ev);
    const double gap = pr.phibar - best_val;
    const double cs = comp_slack_at(v, pr, best_duals);
    if (gap <= tol_eff && cs <= tol_eff)
      return finish(v, best_duals, best_ev, pr, best_val, evals);

    double moved = 0.0;
    for (int j : v.cons) moved = std::max(moved, std::abs(duals(j) - prev(j)));
    if (moved <= 1e-15 * (1.0 + duals.cwiseAbs().maxCoeff())) {
      if (++stalls >= 2) break;
      // Diminishing-step projected subgradient rescue: frees the iterate
      // when cyclic coordinate steps pin it to a face of the feasible set.
      double step0 = 0.0;
      for (int j : v.cons) step0 = std::max(step0, v.base_noise / v.cap(j));
      step0 = 0.25 * (step0 + duals.cwiseAbs().maxCoeff());
      Eigen::VectorXd lam = best_duals;
      for (int t = 1; t <= 200 && evals < max_iters; ++t) {
        const InnerEval e = eval_at(lam);
        if (e.value > best_val) {
          best_val = e.value;
          best_duals = lam;
        }
        const Eigen::VectorXd q = amplitudes_at(v, e, e.nu);
        Eigen::VectorXd s = Eigen::VectorXd::Zero(L);
        double norm2 = 0.0;
        for (int j : v.cons) {
          double gen = 0.0;
          for (int i = 0; i < v.K; ++i) gen += q(i) * q(i) * v.g2(i, j);
          s(j) = gen - v.cap(j) * e.nu;
          norm2 += s(j) * s(j);
        }
        if (norm2 == 0.0) break;
        lam += (step0 / std::sqrt(static_cast<double>(t) * norm2)) * s;
        project_duals(v, lam);
      }
      duals = best_duals;
    } else {
      stalls = 0;
    }
  }

  const InnerEval best_ev = eval_inner(v, best_duals);
  const Primal pr = recover(v, best_ev);
  const double gap = pr.phibar - best_val;
  const double cs = comp_slack_at(v, pr, best_duals);
  if (gap <= tol_eff && cs <= tol_eff)
    return finish(v, best_duals, best_ev, pr, best_val, evals);
  throw NonConvergence("solve_p22: dual ascent budget exhausted", gap);
}

CellSolution solve_single_cell(const NetworkScenario& scenario,
                               const ChannelRealization& realization, int cell,
                               double effective_noise_w,
                               const Eigen::VectorXd& budgets) {
  if (!(effective_noise_w > 0.0))
    throw std::invalid_argument("solve_single_cell: effective noise must be positive");
  const int L = scenario.num_cells();
  ItLevels unconstrained = ItLevels::zero(L);
  unconstrained.level.row(cell).setConstant(kInf);
  unconstrained.level(cell, cell) = 0.0;
  CellView v = make_view(scenario, realization, cell, unconstrained, budgets);
  v.base_noise = effective_noise_w;
  const Eigen::VectorXd duals = Eigen::VectorXd::Zero(L);
  const InnerEval ev = eval_inner(v, duals);
  const Primal pr = recover(v, ev);
  return finish(v, duals, ev, pr, ev.value, 1);
}

ThresholdReport verify_threshold_structure(const NetworkScenario& scenario,
                                           const ChannelRealization& realization,
                                           int cell, const CellSolution& solution,
                                           const Eigen::VectorXd& budgets,
                                           double tol) {
  const int off = scenario.cell_offset(cell);
  const int K = scenario.cell_size(cell);
  const int n_active = K - static_cast<int>(solution.silenced.size());

  ThresholdReport rep;
  rep.full_power_ok = rep.inversion_ok = rep.denoise_in_band = true;
  if (!std::isfinite(solution.denoise)) {  // silent cell: nothing to check
    rep.ok = true;
    return rep;
  }

  Eigen::VectorXd c(K), B(K);
  for (int i = 0; i < K; ++i) {
    const double h = realization.direct_abs(off + i);
    double ci = h * h;
    for (int j = 0; j < scenario.num_cells(); ++j) {
      const double g = realization.cross_eff(off + i, j);
      ci += solution.duals(j) * g * g;
    }
    c(i) = ci;
    B(i) = budgets(off + i) * ci * ci / (h * h);
  }

  for (int rank = 0; rank < n_active; ++rank) {
    const int i = solution.ascending.at(rank);
    const double p = solution.powers(i);
    if (rank < solution.threshold) {
      const double dev = std::abs(p - budgets(off + i)) / (1.0 + budgets(off + i));
      rep.max_full_power_dev = std::max(rep.max_full_power_dev, dev);
      if (dev > tol) rep.full_power_ok = false;
    } else {
      const double h = realization.direct_abs(off + i);
      const double want = h * h * solution.denoise / (c(i) * c(i));
      const double dev = std::abs(p - want) / (1.0 + want);
      rep.max_inversion_dev = std::max(rep.max_inversion_dev, dev);
      if (dev > tol) rep.inversion_ok = false;
    }
  }

  const double lo = solution.threshold > 0
                        ? B(solution.ascending.at(solution.threshold - 1))
                        : 0.0;
  const double hi = solution.threshold < n_active
                        ? B(solution.ascending.at(solution.threshold))
                        : kInf;
  const double eta = solution.denoise;
  if (!(eta >= lo * (1.0 - tol) - tol) || !(eta <= hi * (1.0 + tol) + tol))
    rep.denoise_in_band = false;

  rep.ok = rep.full_power_ok && rep.inversion_ok && rep.denoise_in_band;
  return rep;
}

}  // namespace aircomp
