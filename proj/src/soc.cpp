#include "aircomp/soc.hpp"

#include <cmath>
#include <limits>
#include <stdexcept>

#include "aircomp/errors.hpp"

namespace aircomp {

SocInstance build_instance(const NetworkScenario& scenario,
                           const ChannelRealization& realization,
                           const Eigen::VectorXd& profile, double eps,
                           const Eigen::VectorXd& budgets) {
  const int L = scenario.num_cells();
  const int K = scenario.num_devices();
  if (profile.size() != L)
    throw std::invalid_argument("build_instance: one profile weight per cell required");
  if (budgets.size() != K)
    throw std::invalid_argument("build_instance: one power budget per device required");
  if (!(eps >= 0.0))
    throw std::invalid_argument("build_instance: sum-error target must be nonnegative");

  SocInstance inst;
  inst.slack.resize(L);
  for (int l = 0; l < L; ++l) {
    double s = scenario.cell_size(l) - profile(l) * eps;
    if (s < 0.0) {
      if (s < -1e-9 * (1.0 + scenario.cell_size(l)))
        throw std::invalid_argument(
            "build_instance: sum-error target exceeds the attainable range");
      s = 0.0;  // clip float dust at the upper endpoint
    }
    inst.slack(l) = s;
  }
  inst.sqrt_slack = inst.slack.cwiseSqrt();

  inst.gain2.resize(K, L);
  for (int k = 0; k < K; ++k) {
    const int own = scenario.cell_of(k);
    for (int l = 0; l < L; ++l) {
      const double a = (l == own) ? realization.direct_abs(k) : realization.cross_eff(k, l);
      inst.gain2(k, l) = a * a;
    }
  }
  inst.direct_abs = realization.direct_abs;
  inst.bound = budgets.cwiseSqrt();
  inst.noise_amp = std::sqrt(scenario.noise_power_w);
  inst.offsets.resize(L + 1);
  inst.offsets[0] = 0;
  for (int l = 0; l < L; ++l) inst.offsets[l + 1] = inst.offsets[l] + scenario.cell_size(l);
  return inst;
}

namespace {

// Residual of every cell at q; also reports the index of the worst cell and
// the coupled norm values (needed for the subgradient).
double residuals(const SocInstance& inst, const Eigen::VectorXd& q,
                 Eigen::VectorXd& norm, int& worst) {
  const int L = inst.num_cells();
  const Eigen::VectorXd q2 = q.array().square().matrix();
  norm = ((inst.gain2.transpose() * q2).array() + inst.noise_amp * inst.noise_amp)
             .sqrt()
             .matrix();
  double worst_val = -std::numeric_limits<double>::infinity();
  worst = 0;
  for (int l = 0; l < L; ++l) {
    const int off = inst.offsets[l];
    const int n = inst.offsets[l + 1] - off;
    const double own = inst.direct_abs.segment(off, n).dot(q.segment(off, n));
    const double r = inst.sqrt_slack(l) * norm(l) - own;
    if (r > worst_val) {
      worst_val = r;
      worst = l;
    }
  }
  return worst_val;
}

}  // namespace

double max_violation(const SocInstance& instance, const Eigen::VectorXd& q) {
  Eigen::VectorXd norm;
  int worst = 0;
  return residuals(instance, q, norm, worst);
}

FeasibilityVerdict solve_phase1(const SocInstance& inst0, double tol, int max_iters,
                                const Eigen::VectorXd* start) {
  const int K = inst0.num_devices();
  const int L = inst0.num_cells();
  double own_scale = 0.0;
  for (int l = 0; l < L; ++l) {
    const int off = inst0.offsets[l];
    const int n = inst0.offsets[l + 1] - off;
    own_scale = std::max(
        own_scale,
        inst0.direct_abs.segment(off, n).dot(inst0.bound.segment(off, n)));
  }

  // The max-violation landscape has a shallow near-noise-floor region where
  // residuals shrink with the amplitudes while the underlying per-cell error
  // violations stay large, so a tolerance tied to the full-power amplitude
  // scale cannot separate feasible from infeasible there.  Noise units can:
  // near the boundary the minimal violation moves at O(noise amplitude) per
  // unit of target, at every physical scale.
  double tol_eff = tol;
  if (!(tol_eff > 0.0))
    tol_eff = inst0.noise_amp > 0.0 ? 1e-5 * inst0.noise_amp
                                    : 1e-6 * std::max(own_scale, 1.0);

  // Work in noise units: q = s * u is a pure rescaling of the box and the
  // noise term, leaving the cone geometry intact but keeping every barrier
  // quantity within comfortable floating-point range.
  const double s = inst0.noise_amp > 0.0
                       ? inst0.noise_amp
                       : (own_scale > 0.0 ? own_scale : 1.0);
  SocInstance inst = inst0;
  inst.noise_amp /= s;
  inst.bound /= s;
  const double tol_n = tol_eff / s;
  double scale_n = inst.noise_amp + own_scale / s;
  if (!(scale_n > 0.0)) scale_n = 1.0;  // fully degenerate instance

  // Log-barrier Newton on the epigraph form
  //   min t   s.t.  sqrt(slack_l) * norm_l(q) <= own_l(q) + t,  0 <= q <= bound,
  // a small second-order-cone program (slack 0 degrades the cone to the
  // linear constraint own + t >= 0).  The path gives a certified bound
  // t - t* <= m * mu, so verdicts near the tolerance are trustworthy.
  std::vector<int> free_idx;  // devices the solver may move (positive bound)
  for (int k = 0; k < K; ++k)
    if (inst.bound(k) > 0.0) free_idx.push_back(k);
  const int Kf = static_cast<int>(free_idx.size());
  const int n = Kf + 1;  // [q_free; t]

  Eigen::VectorXd q = 0.5 * inst.bound;
  if (start && start->size() == K)
    q = (*start / s).cwiseMax(0.02 * inst.bound).cwiseMin(0.98 * inst.bound);
  Eigen::VectorXd norm;
  int worst = 0;
  const double f0 = residuals(inst, q, norm, worst);
  double t = f0 + 0.5 * std::abs(f0) + 0.1 * scale_n;  // strictly interior

  const int m = 2 * Kf + L;  // log terms: box pairs + one cone/linear per cell

  // Barrier value at (q, t); +inf when outside the domain.
  const auto barrier = [&](const Eigen::VectorXd& qq, double tt, double mu) {
    double val = tt / mu;
    for (int l = 0; l < L; ++l) {
      const int off = inst.offsets[l];
      const int nl = inst.offsets[l + 1] - off;
      const double own = inst.direct_abs.segment(off, nl).dot(qq.segment(off, nl));
      if (inst.slack(l) > 0.0) {
        const double v2 = (own + tt) * (own + tt) / inst.slack(l);
        const double norm2 = (inst.gain2.col(l).array() * qq.array().square()).sum() +
                             inst.noise_amp * inst.noise_amp;
        const double psi = v2 - norm2;
        if (!(own + tt > 0.0) || !(psi > 0.0))
          return std::numeric_limits<double>::infinity();
        val -= std::log(psi);
      } else {
        if (!(own + tt > 0.0)) return std::numeric_limits<double>::infinity();
        val -= std::log(own + tt);
      }
    }
    for (int k : free_idx) {
      if (!(qq(k) > 0.0) || !(qq(k) < inst.bound(k)))
        return std::numeric_limits<double>::infinity();
      val -= std::log(qq(k)) + std::log(inst.bound(k) - qq(k));
    }
    return val;
  };

  int newton_steps = 0;
  double mu = std::max(scale_n, 10.0 * tol_n);
  const double mu_final = 0.05 * tol_n / m;

  Eigen::VectorXd g(n), dx(n), grad_psi(n);
  Eigen::MatrixXd H(n, n);

  while (true) {
    for (int step = 0; step < 60; ++step) {
      if (++newton_steps > max_iters)
        throw NonConvergence("solve_phase1: iteration budget exhausted", s * t);

      g.setZero();
      H.setZero();
      g(Kf) = 1.0 / mu;
      for (int l = 0; l < L; ++l) {
        const int off = inst.offsets[l];
        const int nl = inst.offsets[l + 1] - off;
        const double own = inst.direct_abs.segment(off, nl).dot(q.segment(off, nl));
        if (inst.slack(l) > 0.0) {
          const double s_inv = 1.0 / inst.slack(l);
          const double v = (own + t) * std::sqrt(s_inv);
          const double norm2 = (inst.gain2.col(l).array() * q.array().square()).sum() +
                               inst.noise_amp * inst.noise_amp;
          const double psi = v * v - norm2;
          // grad psi over [q_free; t]
          grad_psi.setZero();
          for (int i = 0; i < Kf; ++i) {
            const int k = free_idx[i];
            double gp = -2.0 * inst.gain2(k, l) * q(k);
            if (k >= off && k < off + nl)
              gp += 2.0 * v * std::sqrt(s_inv) * inst.direct_abs(k);
            grad_psi(i) = gp;
          }
          grad_psi(Kf) = 2.0 * v * std::sqrt(s_inv);
          g -= grad_psi / psi;
          H += (grad_psi * grad_psi.transpose()) / (psi * psi);
          // -Hess(psi)/psi: +2 diag(gain2)/psi on q, -2 grad_v grad_v^T/psi
          for (int i = 0; i < Kf; ++i)
            H(i, i) += 2.0 * inst.gain2(free_idx[i], l) / psi;
          Eigen::VectorXd grad_v = Eigen::VectorXd::Zero(n);
          for (int i = 0; i < Kf; ++i) {
            const int k = free_idx[i];
            if (k >= off && k < off + nl)
              grad_v(i) = std::sqrt(s_inv) * inst.direct_abs(k);
          }
          grad_v(Kf) = std::sqrt(s_inv);
          H -= (2.0 / psi) * (grad_v * grad_v.transpose());
        } else {
          const double c = own + t;
          Eigen::VectorXd grad_c = Eigen::VectorXd::Zero(n);
          for (int i = 0; i < Kf; ++i) {
            const int k = free_idx[i];
            if (k >= off && k < off + nl) grad_c(i) = inst.direct_abs(k);
          }
          grad_c(Kf) = 1.0;
          g -= grad_c / c;
          H += (grad_c * grad_c.transpose()) / (c * c);
        }
      }
      for (int i = 0; i < Kf; ++i) {
        const int k = free_idx[i];
        const double lo = q(k), hi = inst.bound(k) - q(k);
        g(i) += -1.0 / lo + 1.0 / hi;
        H(i, i) += 1.0 / (lo * lo) + 1.0 / (hi * hi);
      }

      double ridge = 0.0;
      Eigen::LDLT<Eigen::MatrixXd> ldlt;
      for (int attempt = 0; attempt < 8; ++attempt) {
        ldlt.compute(H + ridge * Eigen::MatrixXd::Identity(n, n));
        dx = ldlt.solve(-g);
        if (ldlt.info() == Eigen::Success && dx.allFinite()) break;
        ridge = ridge == 0.0 ? 1e-12 * (1.0 + H.trace() / n) : ridge * 100.0;
      }
      if (!dx.allFinite()) break;  // give up on this stage

      const double decrement = -g.dot(dx);
      if (decrement <= 1e-9) break;  // centered (affine-invariant measure)

      // largest step keeping every log argument positive, then backtrack
      const double phi0 = barrier(q, t, mu);
      double alpha = 1.0;
      Eigen::VectorXd qn = q;
      double tn = t;
      for (int bt = 0; bt < 60; ++bt, alpha *= 0.5) {
        qn = q;
        for (int i = 0; i < Kf; ++i) qn(free_idx[i]) += alpha * dx(i);
        tn = t + alpha * dx(Kf);
        const double phi = barrier(qn, tn, mu);
        if (phi <= phi0 - 0.01 * alpha * decrement) break;
        if (bt == 59) alpha = 0.0;
      }
      if (alpha == 0.0) break;  // no descent possible at this precision
      q = qn;
      t = tn;
    }
    if (mu <= mu_final) break;
    mu = std::max(0.2 * mu, mu_final);
  }

  FeasibilityVerdict best;
  best.witness = s * q;
  best.residual = max_violation(inst0, best.witness);
  best.iterations = newton_steps;
  best.status =
      best.residual <= tol_eff ? Feasibility::Feasible : Feasibility::Infeasible;
  return best;
}

}  // namespace aircomp
