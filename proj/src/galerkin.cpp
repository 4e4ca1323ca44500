#include "hardylab/galerkin.hpp"

#include <cmath>
#include <random>
#include <stdexcept>

namespace hardylab {

namespace {

// Quadrature samples shared by every rhs evaluation of one run.
struct SampledProblem {
  Eigen::VectorXd w2;  // omega2 at quadrature points
  Eigen::VectorXd W;   // capped potential at quadrature points
  Eigen::VectorXd mu;  // measure weights
};

SampledProblem sample_problem(const ProblemSpec& prob,
                              const QuadratureRule& quad) {
  SampledProblem s;
  s.w2 = sample(prob.pair.omega2, quad);
  s.W = sample(potential(prob), quad);
  s.mu = quad.mu_weights;
  return s;
}

Eigen::VectorXd rhs_sampled(const Eigen::VectorXd& a, const ProblemSpec& prob,
                            const SampledProblem& s, const Basis& basis) {
  const Eigen::VectorXd vals = basis.values.transpose() * a;
  const Eigen::VectorXd grads = basis.gradients.transpose() * a;
  const double p = prob.p;

  Eigen::VectorXd flux, gain;
  if (p == 2.0) {
    flux = s.w2.cwiseProduct(grads);
    gain = prob.lambda * s.W.cwiseProduct(vals);
  } else {
    flux = (s.w2.array() * grads.array().abs().pow(p - 2.0) * grads.array())
               .matrix();
    gain = prob.lambda * (s.W.array() * vals.array().abs().pow(p - 2.0) *
                          vals.array())
                             .matrix();
  }
  if (!flux.allFinite() || !gain.allFinite())
    throw std::overflow_error(
        "rhs: overflow in the nonlinear terms (blow-up suspected)");

  Eigen::VectorXd da = -basis.gradients * flux.cwiseProduct(s.mu) +
                       basis.values * gain.cwiseProduct(s.mu);
  if (!da.allFinite())
    throw std::overflow_error("rhs: non-finite derivative (blow-up suspected)");
  return da;
}

EnergyRow energy_row(double t, const Eigen::VectorXd& a,
                     const ProblemSpec& prob, const SampledProblem& s,
                     const Basis& basis) {
  const Eigen::VectorXd vals = basis.values.transpose() * a;
  const Eigen::VectorXd grads = basis.gradients.transpose() * a;
  EnergyRow row;
  row.t = t;
  row.half_l2 = 0.5 * vals.array().square().matrix().dot(s.mu);
  row.diss = (s.w2.array() * grads.array().abs().pow(prob.p)).matrix().dot(s.mu);
  row.gain = prob.lambda *
             (s.W.array() * vals.array().abs().pow(prob.p)).matrix().dot(s.mu);
  return row;
}

SolverState step_sampled(const SolverState& state, double dt,
                         const ProblemSpec& prob, const SampledProblem& s,
                         const Basis& basis, TimeScheme scheme) {
  if (!(dt > 0.0)) throw std::domain_error("step: requires dt > 0");
  SolverState out;
  out.t = state.t + dt;

  if (scheme == TimeScheme::rk2) {
    const Eigen::VectorXd k1 = rhs_sampled(state.a, prob, s, basis);
    const Eigen::VectorXd k2 = rhs_sampled(state.a + dt * k1, prob, s, basis);
    out.a = state.a + 0.5 * dt * (k1 + k2);
  } else {
    // Backward Euler: damped fixed point on frozen-weight linear solves.
    // With weights |u'|^{p-2}, |u|^{p-2} frozen at the current iterate, the
    // implicit equation becomes (G + dt S_w - dt M_w) a_new = G a.
    const double damping = 0.5, tol = 1e-10;
    const int max_iter = 200;
    const double p = prob.p;
    Eigen::VectorXd cur = state.a;
    bool converged = false;
    for (int it = 0; it < max_iter; ++it) {
      const Eigen::VectorXd vals = basis.values.transpose() * cur;
      const Eigen::VectorXd grads = basis.gradients.transpose() * cur;
      Eigen::VectorXd wg, wv;
      if (p == 2.0) {
        wg = s.w2;
        wv = prob.lambda * s.W;
      } else {
        wg = (s.w2.array() * grads.array().abs().pow(p - 2.0)).matrix();
        wv = prob.lambda *
             (s.W.array() * vals.array().abs().pow(p - 2.0)).matrix();
      }
      if (!wg.allFinite() || !wv.allFinite())
        throw std::overflow_error(
            "step: overflow in frozen weights (blow-up suspected)");
      const Eigen::MatrixXd A =
          basis.gram +
          dt * (basis.gradients * wg.cwiseProduct(s.mu).asDiagonal() *
                    basis.gradients.transpose() -
                basis.values * wv.cwiseProduct(s.mu).asDiagonal() *
                    basis.values.transpose());
      const Eigen::VectorXd next = A.ldlt().solve(basis.gram * state.a);
      const double change =
          (next - cur).norm() / std::max(next.norm(), 1e-300);
      cur += damping * (next - cur);
      if (change <= tol) {
        cur = next;
        converged = true;
        break;
      }
    }
    if (!converged)
      throw std::runtime_error(
          "step: backward-Euler fixed point did not converge; try a smaller "
          "dt");
    out.a = cur;
  }

  if (!out.a.allFinite())
    throw std::overflow_error("step: non-finite state (blow-up suspected)");
  return out;
}

// ||J|| estimate by finite-difference power iteration around a.
double jacobian_norm_estimate(const Eigen::VectorXd& a,
                              const ProblemSpec& prob,
                              const SampledProblem& s, const Basis& basis) {
  const Eigen::Index n = a.size();
  const double eps = 1e-6 * std::max(a.norm(), 1.0);
  const Eigen::VectorXd base = rhs_sampled(a, prob, s, basis);
  Eigen::VectorXd v = Eigen::VectorXd::Ones(n).normalized();
  double norm = 0.0;
  for (int it = 0; it < 20; ++it) {
    const Eigen::VectorXd jv =
        (rhs_sampled(a + eps * v, prob, s, basis) - base) / eps;
    norm = jv.norm();
    if (!(norm > 0.0)) break;
    v = jv / norm;
  }
  return norm;
}

}  // namespace

std::string to_string(TimeScheme s) {
  return s == TimeScheme::rk2 ? "rk2" : "backward_euler";
}

RadialFn potential(const ProblemSpec& prob) {
  const RadialFn omega1 = prob.pair.omega1;
  const double c = prob.potential_scale, m = prob.m_cap;
  return [omega1, c, m](double r) { return c * std::min(m, omega1(r)); };
}

Projection project_initial(const RadialFn& f, const Basis& basis,
                           const QuadratureRule& quad) {
  if (!basis.orthonormal)
    throw std::domain_error("project_initial: requires an orthonormal basis");
  const Eigen::VectorXd fq = sample(f, quad);
  if (!fq.allFinite())
    throw std::runtime_error("project_initial: non-finite initial data sample");
  Projection proj;
  proj.coeffs = basis.values * fq.cwiseProduct(quad.mu_weights);
  const Eigen::VectorXd err = fq - basis.values.transpose() * proj.coeffs;
  proj.residual = std::sqrt(std::max(
      0.0, err.array().square().matrix().dot(quad.mu_weights)));
  return proj;
}

Eigen::VectorXd rhs(const Eigen::VectorXd& a, const ProblemSpec& prob,
                    const Basis& basis, const QuadratureRule& quad) {
  if (!a.allFinite()) throw std::domain_error("rhs: non-finite coefficients");
  return rhs_sampled(a, prob, sample_problem(prob, quad), basis);
}

SolverState step(const SolverState& state, double dt, const ProblemSpec& prob,
                 const Basis& basis, const QuadratureRule& quad,
                 TimeScheme scheme) {
  return step_sampled(state, dt, prob, sample_problem(prob, quad), basis,
                      scheme);
}

SolveResult solve(const ProblemSpec& prob, const Basis& basis,
                  const QuadratureRule& quad, const TimeConfig& time) {
  if (!(prob.T >= 0.0)) throw std::domain_error("solve: requires T >= 0");
  if (!(prob.lambda >= 0.0))
    throw std::domain_error("solve: requires lambda >= 0");
  const SampledProblem s = sample_problem(prob, quad);

  SolveResult result;
  SolverState state;
  state.t = 0.0;
  state.a = project_initial(prob.initial, basis, quad).coeffs;
  result.states.push_back(state);
  result.trace.rows.push_back(energy_row(0.0, state.a, prob, s, basis));
  if (prob.T == 0.0) return result;

  double dt = time.dt;
  if (dt <= 0.0) {
    const double jn = jacobian_norm_estimate(state.a, prob, s, basis);
    dt = time.safety / std::max(jn, 1e-12);
    dt = std::min(dt, prob.T);
  }

  const double initial_energy = result.trace.rows.front().half_l2;
  const double blowup_cap = 1e12 * std::max(initial_energy, 1e-300);

  double t = 0.0;
  while (true) {
    const double remaining = prob.T - t;
    if (remaining <= 1e-9 * dt) break;  // roundoff, not a real partial step
    const double h = std::min(dt, remaining);
    SolverState next;
    try {
      next = step_sampled(state, h, prob, s, basis, time.scheme);
    } catch (const std::overflow_error&) {
      result.trace.blew_up = true;
      break;
    }
    EnergyRow row = energy_row(next.t, next.a, prob, s, basis);
    const EnergyRow& prev = result.trace.rows.back();
    row.cum_diss = prev.cum_diss + 0.5 * h * (prev.diss + row.diss);
    row.cum_gain = prev.cum_gain + 0.5 * h * (prev.gain + row.gain);
    result.states.push_back(next);
    result.trace.rows.push_back(row);
    state = next;
    t = next.t;
    if (row.half_l2 > blowup_cap) {
      result.trace.blew_up = true;
      break;
    }
  }
  return result;
}

AprioriReport apriori_check(const EnergyTrace& trace, double K, double lambda,
                            double tol_energy) {
  if (trace.rows.empty())
    throw std::domain_error("apriori_check: empty trace");
  if (trace.blew_up)
    throw std::domain_error("apriori_check: requires a complete trace");
  if (!(K > 0.0)) throw std::domain_error("apriori_check: requires K > 0");

  const EnergyRow& first = trace.rows.front();
  const EnergyRow& last = trace.rows.back();
  AprioriReport report;
  report.margin =
      first.half_l2 - last.half_l2 - (1.0 - lambda / K) * last.cum_diss;
  if (lambda > K) {
    report.out_of_hypothesis = true;  // Theorem's bound is not claimed here
    report.pass = false;
    return report;
  }
  if (tol_energy < 0.0) tol_energy = 1e-3 * first.half_l2;
  report.pass = report.margin >= -tol_energy;
  return report;
}

ResidualReport energy_residual(const EnergyTrace& trace,
                               const std::vector<SolverState>& states,
                               const ProblemSpec& prob, const Basis& basis,
                               const QuadratureRule& quad) {
  if (trace.rows.size() != states.size())
    throw std::domain_error("energy_residual: trace/states misaligned");
  const SampledProblem s = sample_problem(prob, quad);
  ResidualReport report;
  for (size_t k = 0; k + 1 < states.size(); ++k) {
    const double dt = states[k + 1].t - states[k].t;
    const Eigen::VectorXd mid = 0.5 * (states[k].a + states[k + 1].a);
    const EnergyRow m = energy_row(states[k].t + 0.5 * dt, mid, prob, s, basis);
    const double r = std::abs(
        (trace.rows[k + 1].half_l2 - trace.rows[k].half_l2) / dt + m.diss -
        m.gain);
    report.residuals.push_back(r);
    report.max_residual = std::max(report.max_residual, r);
  }
  return report;
}

double monotonicity_probe(const Basis& basis, const WeightPair& pair, double p,
                          const QuadratureRule& quad, int n_samples,
                          std::uint64_t seed) {
  if (n_samples < 1)
    throw std::domain_error("monotonicity_probe: requires n_samples >= 1");
  const Eigen::VectorXd w2 = sample(pair.omega2, quad);
  auto A = [&](const Eigen::VectorXd& x) -> Eigen::VectorXd {
    const Eigen::VectorXd g = basis.gradients.transpose() * x;
    const Eigen::VectorXd flux =
        (w2.array() * g.array().abs().pow(p - 2.0) * g.array()).matrix();
    return basis.gradients * flux.cwiseProduct(quad.mu_weights);
  };
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> gauss;
  const int n = basis.n();
  double min_pairing = std::numeric_limits<double>::infinity();
  for (int sidx = 0; sidx < n_samples; ++sidx) {
    Eigen::VectorXd a(n), b(n);
    for (int i = 0; i < n; ++i) a[i] = gauss(rng);
    for (int i = 0; i < n; ++i) b[i] = gauss(rng);
    min_pairing = std::min(min_pairing, (A(a) - A(b)).dot(a - b));
  }
  return min_pairing;
}

std::vector<double> hemicontinuity_probe(const Basis& basis,
                                         const WeightPair& pair, double p,
                                         const QuadratureRule& quad,
                                         const Eigen::VectorXd& u,
                                         const Eigen::VectorXd& v,
                                         const Eigen::VectorXd& w,
                                         std::span<const double> t_grid) {
  const Eigen::VectorXd w2 = sample(pair.omega2, quad);
  std::vector<double> out;
  out.reserve(t_grid.size());
  for (double t : t_grid) {
    const Eigen::VectorXd g = basis.gradients.transpose() * (u + t * v);
    const Eigen::VectorXd flux =
        (w2.array() * g.array().abs().pow(p - 2.0) * g.array()).matrix();
    out.push_back(
        (basis.gradients * flux.cwiseProduct(quad.mu_weights)).dot(w));
  }
  return out;
}

}  // namespace hardylab
