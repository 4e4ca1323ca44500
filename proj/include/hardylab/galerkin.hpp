#pragma once

#include "hardylab/hardy.hpp"

#include <cstdint>
#include <span>
#include <vector>

namespace hardylab {

enum class TimeScheme { rk2, backward_euler };

std::string to_string(TimeScheme s);

/// Parabolic problem u_t - div(omega2 |u'|^{p-2} u') = lambda W |u|^{p-2} u
/// with W = potential_scale * min(m_cap, omega1).
struct ProblemSpec {
  WeightPair pair;
  double p = 2.0;
  double lambda = 0.0;
  double m_cap = 1e3;
  double potential_scale = 1.0;  // c in (0,1]
  RadialFn initial;
  double T = 1.0;
};

/// W(r) = potential_scale * min(m_cap, omega1(r)); never exceeds min(m, omega1).
RadialFn potential(const ProblemSpec& prob);

struct SolverState {
  double t = 0.0;
  Eigen::VectorXd a;  // coefficients in the (orthonormal) basis
};

struct EnergyRow {
  double t = 0.0;
  double half_l2 = 0.0;   // (1/2) int u^2 dmu
  double diss = 0.0;      // int omega2 |u'|^p dmu
  double gain = 0.0;      // lambda int W |u|^p dmu
  double cum_diss = 0.0;  // trapezoid time integral of diss
  double cum_gain = 0.0;
};

struct EnergyTrace {
  std::vector<EnergyRow> rows;
  bool blew_up = false;  // trace truncated at the last finite state
};

struct Projection {
  Eigen::VectorXd coeffs;  // a_k = <f, e_k>_{L^2(dmu)}
  double residual;         // ||f - f_n||_{L^2(dmu)}
};

/// L^2(dmu) projection of f onto the basis span. Requires an orthonormal
/// basis (projection = inner products). Non-finite samples of f are errors.
Projection project_initial(const RadialFn& f, const Basis& basis,
                           const QuadratureRule& quad);

/// (da/dt)_k = -int omega2 |u'|^{p-2} u' e_k' dmu
///            + lambda int W |u|^{p-2} u e_k dmu,  u = sum a_l e_l.
/// Assumes an orthonormal basis (identity mass matrix). Overflow in the
/// nonlinear terms throws std::overflow_error (blow-up suspicion).
Eigen::VectorXd rhs(const Eigen::VectorXd& a, const ProblemSpec& prob,
                    const Basis& basis, const QuadratureRule& quad);

struct TimeConfig {
  TimeScheme scheme = TimeScheme::rk2;
  double dt = 0.0;      // 0 -> CFL-style cap safety/||Jacobian estimate||
  double safety = 0.5;  // used only when dt == 0
};

/// One time step. rk2 is Heun's method; backward_euler solves the implicit
/// equation by damped fixed-point iteration on frozen-weight linear solves
/// (damping 0.5, tol 1e-10, max 200 iterations).
SolverState step(const SolverState& state, double dt, const ProblemSpec& prob,
                 const Basis& basis, const QuadratureRule& quad,
                 TimeScheme scheme);

struct SolveResult {
  std::vector<SolverState> states;
  EnergyTrace trace;
};

/// Integrates on [0, T], recording the energy ledger at every step.
/// Terminates early (trace marked blew_up) when half_l2 exceeds 1e12 times
/// its initial value or the nonlinear terms overflow.
SolveResult solve(const ProblemSpec& prob, const Basis& basis,
                  const QuadratureRule& quad, const TimeConfig& time);

struct AprioriReport {
  double margin = 0.0;  // E(0) - E(T) - (1 - lambda/K) cum_diss(T)
  bool pass = false;
  bool out_of_hypothesis = false;  // lambda > K: the estimate is not claimed
};

/// Checks the a priori bound
///   (1/2)||u(T)||^2 + (1 - lambda/K) int_0^T diss <= (1/2)||u(0)||^2.
/// tol_energy < 0 selects the default 1e-3 * initial energy.
AprioriReport apriori_check(const EnergyTrace& trace, double K, double lambda,
                            double tol_energy = -1.0);

struct ResidualReport {
  std::vector<double> residuals;  // one per step, at midpoint states
  double max_residual = 0.0;
};

/// |Delta(half_l2)/dt + diss - gain| per step, with diss and gain evaluated
/// at the midpoint state (a_k + a_{k+1})/2.
ResidualReport energy_residual(const EnergyTrace& trace,
                               const std::vector<SolverState>& states,
                               const ProblemSpec& prob, const Basis& basis,
                               const QuadratureRule& quad);

/// min over seeded random pairs (a, b) of <A(a) - A(b), a - b> where
/// A(a)_k = int omega2 |u'|^{p-2} u' e_k' dmu. Expected >= -1e-12.
double monotonicity_probe(const Basis& basis, const WeightPair& pair, double p,
                          const QuadratureRule& quad, int n_samples,
                          std::uint64_t seed);

/// Samples of t -> <A(u + t v), w> on t_grid.
std::vector<double> hemicontinuity_probe(const Basis& basis,
                                         const WeightPair& pair, double p,
                                         const QuadratureRule& quad,
                                         const Eigen::VectorXd& u,
                                         const Eigen::VectorXd& v,
                                         const Eigen::VectorXd& w,
                                         std::span<const double> t_grid);

}  // namespace hardylab
