// Acceptance suite: one printed pass/fail line per criterion.
// Exit status 0 iff every criterion passes.

#include "hardylab/cli_ops.hpp"
#include "hardylab/csv.hpp"

#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

using namespace hardylab;

namespace {

int g_failures = 0;

void report(int id, bool ok, const std::string& what) {
  std::printf("criterion %2d: %s - %s\n", id, ok ? "pass" : "FAIL",
              what.c_str());
  if (!ok) ++g_failures;
}

double seconds_since(std::chrono::steady_clock::time_point t0) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0)
      .count();
}

struct Space {
  RadialDomain dom;
  Mesh mesh;
  QuadratureRule quad;
  Basis basis;  // orthonormal
};

Space make_space(double r_lo, double r_hi, int n_cells, Measure measure,
                 int dim_n = 3) {
  RadialDomain dom(r_lo, r_hi, dim_n, measure);
  Mesh mesh = build_mesh(dom, n_cells, Grading::uniform);
  QuadratureRule quad = make_quadrature(mesh, dom, 4);
  Basis basis = orthonormalize(hat_basis(mesh, quad), quad);
  return {dom, std::move(mesh), std::move(quad), std::move(basis)};
}

RadialFn gaussian(double center, double width) {
  return [center, width](double r) {
    const double z = (r - center) / width;
    return std::exp(-0.5 * z * z);
  };
}

// discrete Hardy minimizer on the given space, unit L^2 norm, as a RadialFn
RadialFn minimizer_initial(const Space& s, const WeightPair& pair, double p) {
  const Basis hats = hat_basis(s.mesh, s.quad);
  Eigen::VectorXd c = minimize_rayleigh(pair, p, hats, s.quad);
  const Field f = eval_field(c, hats);
  c /= std::sqrt(integrate(f.values.array().square().matrix(), s.quad));
  if (c.sum() < 0.0) c = -c;
  return hat_interpolant(s.mesh, c);
}

void criterion_1() {
  const auto t0 = std::chrono::steady_clock::now();
  WeightPair pair = make_power_weights(-2.0, 2.0, 3);
  DiscConfig disc;  // default ladder ends at r_lo=1e-3, r_hi=10, n_cells=400
  disc.ladder = {{100, 1e-1, 10.0}, {200, 1e-2, 10.0}, {400, 1e-3, 10.0}};
  const RayleighReport rep = estimate_best_constant(pair, 2.0, disc);
  const double el = seconds_since(t0);
  std::ostringstream msg;
  msg << "power-family best constant: best_value=" << rep.best_value
      << " target [0.25-1e-9, 0.30], " << el << " s";
  report(1, rep.best_value >= 0.25 - 1e-9 && rep.best_value <= 0.30 &&
                el < 30.0,
         msg.str());
}

void criterion_2() {
  const auto t0 = std::chrono::steady_clock::now();
  WeightPair pair = make_confining_weights(3.0, 2.0, 3);
  DiscConfig disc;
  disc.ladder = {{100, 1e-1, 10.0}, {200, 1e-2, 20.0}, {400, 1e-3, 40.0}};
  const RayleighReport rep = estimate_best_constant(pair, 2.0, disc);

  Space s = make_space(0.1, 10.0, 100, Measure::radial);
  const auto suite = default_test_suite(pair, 2.0, s.basis, s.quad, 42);
  const InequalityReport ineq =
      verify_inequality(pair, 12.0, 2.0, suite, s.basis, s.quad);
  const double el = seconds_since(t0);
  std::ostringstream msg;
  msg << "confining-family constant: best_value=" << rep.best_value
      << " >= 11.4, min_margin=" << ineq.min_margin << ", " << el << " s";
  report(2, rep.best_value >= 12.0 * 0.95 &&
                ineq.verdict == RqVerdict::consistent && el < 60.0,
         msg.str());
}

void criterion_3() {
  const auto t0 = std::chrono::steady_clock::now();
  WeightPair pair;
  pair.omega1 = [](double) { return 1.0; };
  pair.omega2 = [](double) { return 1.0; };
  pair.p = 2.0;
  pair.dim_N = 3;
  pair.validity = {0.0, std::numeric_limits<double>::infinity()};
  DiscConfig disc;
  disc.measure = Measure::flat;
  disc.grading = Grading::uniform;
  disc.ladder = {{200, 0.0, M_PI}};
  const RayleighReport rep = estimate_best_constant(pair, 2.0, disc);
  const double el = seconds_since(t0);
  std::ostringstream msg;
  msg << "unweighted Dirichlet oracle on (0, pi): best_value="
      << rep.best_value << " within 2% of 1, " << el << " s";
  report(3, std::abs(rep.best_value - 1.0) <= 0.02 && el < 10.0, msg.str());
}

void criterion_4() {
  const auto t0 = std::chrono::steady_clock::now();
  Space s = make_space(0.5, 4.0, 16, Measure::radial);
  ProblemSpec prob;
  prob.pair = make_power_weights(-2.0, 2.0, 3);
  prob.p = 2.0;
  prob.lambda = 0.125;  // 0.5 K
  prob.T = 0.05;
  prob.initial = gaussian(2.25, 0.4);

  std::vector<double> maxres;
  for (double dt : {4e-4, 2e-4, 1e-4}) {
    TimeConfig time{TimeScheme::rk2, dt, 0.5};
    const SolveResult res = solve(prob, s.basis, s.quad, time);
    maxres.push_back(
        energy_residual(res.trace, res.states, prob, s.basis, s.quad)
            .max_residual);
  }
  const double o1 = std::log2(maxres[0] / maxres[1]);
  const double o2 = std::log2(maxres[1] / maxres[2]);
  const double el = seconds_since(t0);
  std::ostringstream msg;
  msg << "energy-identity convergence: observed orders " << o1 << ", " << o2
      << " (>= 1.9), " << el << " s";
  report(4, o1 >= 1.9 && o2 >= 1.9 && el < 60.0, msg.str());
}

void criterion_5() {
  const auto t0 = std::chrono::steady_clock::now();
  Space s = make_space(0.1, 10.0, 100, Measure::radial);
  const double K = 0.25;
  bool ok = true;
  std::ostringstream margins;
  for (double frac : {0.25, 0.5, 0.9}) {
    ProblemSpec prob;
    prob.pair = make_power_weights(-2.0, 2.0, 3);
    prob.p = 2.0;
    prob.lambda = frac * K;
    prob.T = 0.2;
    prob.initial = gaussian(5.05, 1.0);
    TimeConfig time{TimeScheme::rk2, 1e-4, 0.5};
    const SolveResult res = solve(prob, s.basis, s.quad, time);
    const double E0 = res.trace.rows.front().half_l2;
    const AprioriReport ap =
        apriori_check(res.trace, K, prob.lambda, 1e-3 * E0);
    margins << " " << ap.margin;
    ok = ok && ap.pass && !res.trace.blew_up;
  }
  const double el = seconds_since(t0);
  std::ostringstream msg;
  msg << "a priori estimate margins (lambda/K in {.25,.5,.9}):"
      << margins.str() << ", " << el << " s";
  report(5, ok && el < 120.0, msg.str());
}

void criterion_6() {
  const auto t0 = std::chrono::steady_clock::now();
  Space s = make_space(0.1, 10.0, 100, Measure::radial);
  WeightPair pair = make_power_weights(-2.0, 2.0, 3);
  const double K = 0.25;
  const RadialFn f0 = minimizer_initial(s, pair, 2.0);

  bool subcritical_ok = true, grows = true;
  double largest_rate = 0.0;
  for (int i = 0; i < 13; ++i) {
    ProblemSpec prob;
    prob.pair = pair;
    prob.p = 2.0;
    prob.lambda = 0.1 * K * std::pow(40.0, double(i) / 12.0);
    prob.m_cap = 1e3;
    prob.T = 1.0;
    prob.initial = f0;
    TimeConfig time{TimeScheme::rk2, 1e-4, 0.5};
    const SolveResult res = solve(prob, s.basis, s.quad, time);
    const auto& rows = res.trace.rows;
    const double ratio = rows.back().half_l2 / rows.front().half_l2;
    if (prob.lambda < K)
      subcritical_ok = subcritical_ok && !res.trace.blew_up && ratio <= 1.0;
    if (i == 12) {  // largest lambda: strictly increasing energy
      for (size_t k = 1; k < rows.size(); ++k)
        grows = grows && rows[k].half_l2 > rows[k - 1].half_l2;
      largest_rate = ratio;
    }
  }
  const double el = seconds_since(t0);
  std::ostringstream msg;
  msg << "stability threshold sweep: decay for all lambda < K, largest "
         "lambda final/initial="
      << largest_rate << " strictly increasing=" << (grows ? 1 : 0) << ", "
      << el << " s";
  report(6, subcritical_ok && grows && largest_rate > 1.0 && el < 300.0,
         msg.str());
}

void criterion_7() {
  const auto t0 = std::chrono::steady_clock::now();
  Space s = make_space(0.1, 10.0, 40, Measure::radial);
  WeightPair pair = make_power_weights(-2.0, 2.0, 3);
  double worst = 0.0;
  bool ok = true;
  for (double p : {2.0, 2.5, 3.0, 4.0}) {
    const double m = monotonicity_probe(s.basis, pair, p, s.quad, 1000, 2024);
    worst = std::min(worst, m);
    ok = ok && m >= -1e-12;
  }
  const double el = seconds_since(t0);
  std::ostringstream msg;
  msg << "monotone-operator probe: min pairing over 1000 pairs x p in "
         "{2,2.5,3,4} = "
      << worst << " (>= -1e-12), " << el << " s";
  report(7, ok && el < 30.0, msg.str());
}

void criterion_8() {
  const auto t0 = std::chrono::steady_clock::now();
  Space s = make_space(0.0, M_PI, 60, Measure::flat);
  ProblemSpec prob;
  prob.pair.omega1 = [](double) { return 1.0; };
  prob.pair.omega2 = [](double) { return 1.0; };
  prob.p = 2.0;
  prob.lambda = 0.0;
  prob.T = 0.1;
  prob.initial = gaussian(M_PI / 2.0, M_PI / 8.0);

  TimeConfig time{TimeScheme::rk2, 1e-5, 0.5};
  const SolveResult res = solve(prob, s.basis, s.quad, time);

  // dense oracle: a(T) = V exp(-Lambda T) V^T a(0)
  const Eigen::MatrixXd S =
      weighted_stiffness(s.basis, s.quad, sample(prob.pair.omega2, s.quad));
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(S);
  const Eigen::VectorXd a0 = res.states.front().a;
  const Eigen::VectorXd exact =
      es.eigenvectors() *
      (es.eigenvalues().array() * -0.1).exp().matrix().asDiagonal() *
      es.eigenvectors().transpose() * a0;
  const double err = (res.states.back().a - exact).cwiseAbs().maxCoeff();
  const double el = seconds_since(t0);
  std::ostringstream msg;
  msg << "linear p=2 oracle: max-norm deviation at T=0.1 is " << err
      << " (<= 1e-6), " << el << " s";
  report(8, err <= 1e-6 && el < 30.0, msg.str());
}

void criterion_9() {
  const auto t0 = std::chrono::steady_clock::now();
  double worst_gram = 0.0, worst_idem = 0.0;
  for (int n : {50, 150, 400}) {
    Space s = make_space(0.1, 10.0, n, Measure::radial);
    const Eigen::MatrixXd I =
        Eigen::MatrixXd::Identity(s.basis.n(), s.basis.n());
    worst_gram =
        std::max(worst_gram, (s.basis.gram - I).cwiseAbs().maxCoeff());
    const Basis again = orthonormalize(s.basis, s.quad);
    worst_idem = std::max(
        worst_idem, (again.values - s.basis.values).cwiseAbs().maxCoeff());
  }
  const double el = seconds_since(t0);
  std::ostringstream msg;
  msg << "basis contract: Gram deviation " << worst_gram
      << " (<= 1e-10), idempotence deviation " << worst_idem
      << " (<= 1e-12) up to n=400, " << el << " s";
  report(9, worst_gram <= 1e-10 && worst_idem <= 1e-12 && el < 10.0,
         msg.str());
}

std::string slurp(const std::filesystem::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream buf;
  buf << in.rdbuf();
  return buf.str();
}

void criterion_10() {
  namespace fs = std::filesystem;
  const fs::path root = fs::temp_directory_path() / "hardylab_acceptance";
  fs::remove_all(root);
  fs::create_directories(root / "a");
  fs::create_directories(root / "b");

  const char* power_cfg =
      "[domain]\nr_lo = 1e-3\nr_hi = 10\ndim_n = 3\nmeasure = radial\n"
      "[weights]\nfamily = power\ngamma = -2\nbeta = 0\nsigma = 0\np = 2\n";
  const char* confining_cfg =
      "[domain]\nr_lo = 1e-3\nr_hi = 40\ndim_n = 3\nmeasure = radial\n"
      "[weights]\nfamily = confining\ngamma = 3\nbeta = 0\nsigma = 0\np = 2\n";
  const char* expdecay_cfg =
      "[domain]\nr_lo = 0\nr_hi = 1\ndim_n = 3\nmeasure = flat\n"
      "[weights]\nfamily = expdecay\ngamma = 0\nbeta = 0\nsigma = 0\np = 2\n";

  const int rc_power =
      cmd_check_weights(parse_config(power_cfg), (root / "a").string(), 1);
  const int rc_conf =
      cmd_check_weights(parse_config(confining_cfg), (root / "b").string(), 1);
  const bool positives_pass = rc_power == 0 && rc_conf == 0;

  const int rc_bad =
      cmd_check_weights(parse_config(expdecay_cfg), (root / "a").string(), 1);
  const std::string bad_csv = slurp(root / "a" / "check_weights.csv");
  const bool bp_fails = rc_bad != 0 &&
                        bad_csv.find("bp_omega1,fail") != std::string::npos;

  // determinism: identical config + seed => byte-identical CSV
  cmd_check_weights(parse_config(power_cfg), (root / "a").string(), 7);
  cmd_check_weights(parse_config(power_cfg), (root / "b").string(), 7);
  const bool deterministic = slurp(root / "a" / "check_weights.csv") ==
                             slurp(root / "b" / "check_weights.csv");

  std::ostringstream msg;
  msg << "admissibility audit: power/confining pass=" << positives_pass
      << ", non-integrable weight fails bp=" << bp_fails
      << ", byte-identical reruns=" << deterministic;
  report(10, positives_pass && bp_fails && deterministic, msg.str());
}

}  // namespace

int main() {
  criterion_1();
  criterion_2();
  criterion_3();
  criterion_4();
  criterion_5();
  criterion_6();
  criterion_7();
  criterion_8();
  criterion_9();
  criterion_10();
  if (g_failures) std::printf("%d criterion(s) failed\n", g_failures);
  return g_failures == 0 ? 0 : 1;
}
