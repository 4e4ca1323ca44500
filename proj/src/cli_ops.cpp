#include "hardylab/cli_ops.hpp"

#include "hardylab/csv.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <random>

namespace hardylab {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

template <typename T>
const T& need(const std::optional<T>& opt, const char* section) {
  if (!opt)
    throw ConfigError(std::string("config error: missing required section [") +
                      section + "]");
  return *opt;
}

struct Built {
  RadialDomain dom;
  Mesh mesh;
  QuadratureRule quad;
  Basis basis;  // orthonormal
};

Built build_space(const DomainConfig& d, const DiscretizationConfig& disc) {
  RadialDomain dom(d.r_lo, d.r_hi, d.dim_n, d.measure);
  Mesh mesh = build_mesh(dom, disc.n_cells, disc.grading);
  QuadratureRule quad = make_quadrature(mesh, dom, disc.quad_order);
  Basis basis = orthonormalize(hat_basis(mesh, quad), quad);
  return {dom, std::move(mesh), std::move(quad), std::move(basis)};
}

OptConfig opt_from(const RunConfig& cfg, std::uint64_t seed) {
  OptConfig opt;
  if (cfg.hardy) {
    opt.multistart = cfg.hardy->multistart;
    opt.tol = cfg.hardy->tol;
  }
  opt.seed = seed;
  return opt;
}

// Reference constant for lambda/K reporting: the family's claimed constant,
// or the discrete Rayleigh minimum when the family does not claim one.
double reference_K(const WeightPair& pair, double p, const Built& b,
                   const OptConfig& opt) {
  if (pair.claimed_K) return *pair.claimed_K;
  const Eigen::VectorXd argmin = minimize_rayleigh(pair, p, b.basis, b.quad, opt);
  return rayleigh_quotient(argmin, pair, p, b.basis, b.quad);
}

RadialFn initial_from_config(InitialKind kind, const DomainConfig& d,
                             const Built& b, const WeightPair& pair, double p,
                             const OptConfig& opt, std::uint64_t seed) {
  switch (kind) {
    case InitialKind::gaussian: {
      const double center = 0.5 * (d.r_lo + d.r_hi);
      const double width = 0.1 * (d.r_hi - d.r_lo);
      return [center, width](double r) {
        const double z = (r - center) / width;
        return std::exp(-0.5 * z * z);
      };
    }
    case InitialKind::hardy_minimizer: {
      // minimize in the raw hat basis so the result interpolates nodally
      const Basis hats = hat_basis(b.mesh, b.quad);
      Eigen::VectorXd c = minimize_rayleigh(pair, p, hats, b.quad, opt);
      const Field f = eval_field(c, hats);
      const double l2 =
          std::sqrt(integrate(f.values.array().square().matrix(), b.quad));
      c /= l2;
      if (c.sum() < 0.0) c = -c;  // fix the eigenvector's sign
      return hat_interpolant(b.mesh, c);
    }
    default: {
      std::mt19937_64 rng(seed);
      std::normal_distribution<double> gauss;
      Eigen::VectorXd c(b.mesh.n_cells() - 1);
      for (Eigen::Index i = 0; i < c.size(); ++i) c[i] = gauss(rng);
      const Basis hats = hat_basis(b.mesh, b.quad);
      const Field f = eval_field(c, hats);
      const double l2 =
          std::sqrt(integrate(f.values.array().square().matrix(), b.quad));
      c /= l2;
      return hat_interpolant(b.mesh, c);
    }
  }
}

ProblemSpec problem_from_config(const RunConfig& cfg, const WeightPair& pair,
                                const Built& b, const OptConfig& opt,
                                std::uint64_t seed) {
  const ProblemConfig& pc = need(cfg.problem, "problem");
  const DomainConfig& d = need(cfg.domain, "domain");
  ProblemSpec prob;
  prob.pair = pair;
  prob.p = need(cfg.weights, "weights").p;
  prob.lambda = pc.lambda;
  prob.m_cap = pc.m_cap;
  prob.potential_scale = pc.potential_scale;
  prob.T = pc.T;
  prob.initial = initial_from_config(pc.initial, d, b, pair, prob.p, opt, seed);
  return prob;
}

TimeConfig time_from_config(const RunConfig& cfg) {
  const TimeSection& t = need(cfg.time, "time");
  return {t.scheme, t.dt, t.safety};
}

void write_check(CsvWriter& csv, const char* name, const CheckResult& res) {
  for (const auto& row : res.evidence)
    csv.row({name, to_string(res.verdict), csv_num(row.probe),
             std::to_string(row.level), csv_num(row.value)});
  if (res.evidence.empty())
    csv.row({name, to_string(res.verdict), "", "", ""});
}

std::string join_path(const std::string& dir, const std::string& file) {
  if (dir.empty()) return file;
  return dir.back() == '/' ? dir + file : dir + "/" + file;
}

}  // namespace

WeightPair make_pair_from_config(const WeightsConfig& w,
                                 const DomainConfig& d) {
  switch (w.family) {
    case WeightsFamily::power:
      return make_power_weights(w.gamma, w.p, d.dim_n);
    case WeightsFamily::confining:
      return make_confining_weights(w.gamma, w.p, d.dim_n);
    case WeightsFamily::superharmonic: {
      // p-harmonic profile v = r^a, a = (p-N)/(p-1); its radial p-Laplacian
      // vanishes, so omega1 = sigma |v'|^p v^{-beta-1}.
      const double a = (w.p - d.dim_n) / (w.p - 1.0);
      SuperharmonicProfile prof;
      prof.dim_N = d.dim_n;
      prof.v = [a](double r) { return std::pow(r, a); };
      prof.grad_v = [a](double r) { return a * std::pow(r, a - 1.0); };
      prof.p_laplacian_v = [](double) { return 0.0; };
      return derive_weights_from_profile(prof, w.beta, w.sigma, w.p,
                                         {d.r_lo, d.r_hi});
    }
    case WeightsFamily::identity: {
      WeightPair pair;
      pair.omega1 = [](double) { return 1.0; };
      pair.omega2 = [](double) { return 1.0; };
      pair.p = w.p;
      pair.dim_N = d.dim_n;
      pair.validity = {0.0, kInf};
      pair.family_tag = FamilyTag::custom;
      return pair;
    }
    default: {
      // constructed non-B_p weight: omega^{-1/(p-1)} = exp(1/((p-1)r))
      // blows up too fast at the origin to be locally integrable
      WeightPair pair;
      pair.omega1 = [](double r) { return r > 0.0 ? std::exp(-1.0 / r) : 0.0; };
      pair.omega2 = pair.omega1;
      pair.p = w.p;
      pair.dim_N = d.dim_n;
      pair.validity = {0.0, kInf};
      pair.family_tag = FamilyTag::custom;
      return pair;
    }
  }
}

RadialFn hat_interpolant(const Mesh& mesh, const Eigen::VectorXd& coeffs) {
  if (coeffs.size() != mesh.n_cells() - 1)
    throw std::domain_error("hat_interpolant: coefficient count mismatch");
  std::vector<double> nodes = mesh.nodes;
  std::vector<double> vals(nodes.size(), 0.0);
  for (Eigen::Index i = 0; i < coeffs.size(); ++i) vals[i + 1] = coeffs[i];
  return [nodes = std::move(nodes), vals = std::move(vals)](double r) {
    if (r <= nodes.front() || r >= nodes.back()) return 0.0;
    const auto it = std::upper_bound(nodes.begin(), nodes.end(), r);
    const size_t c = static_cast<size_t>(it - nodes.begin()) - 1;
    const double t = (r - nodes[c]) / (nodes[c + 1] - nodes[c]);
    return vals[c] * (1.0 - t) + vals[c + 1] * t;
  };
}

int cmd_check_weights(const RunConfig& cfg, const std::string& out_dir,
                      std::uint64_t /*seed*/) {
  const DomainConfig& d = need(cfg.domain, "domain");
  const WeightsConfig& w = need(cfg.weights, "weights");
  const WeightPair pair = make_pair_from_config(w, d);

  const std::vector<double> probes = {d.r_lo, 0.5 * (d.r_lo + d.r_hi), d.r_hi};

  AdmissibilityReport report;
  report.bp_omega1 = check_bp(pair.omega1, pair.p, d.dim_n, probes,
                              pair.validity);
  report.bp_omega2 = check_bp(pair.omega2, pair.p, d.dim_n, probes,
                              pair.validity);
  report.h_alpha =
      check_h_alpha(pair.omega2, 0.5 * pair.p, pair.p, probes, pair.validity);
  report.h_infinity_applicable = !std::isfinite(pair.validity.hi);
  if (report.h_infinity_applicable) {
    std::vector<double> radii;
    for (int k = 0; k < 12; ++k) radii.push_back(d.r_hi * std::pow(2.0, k));
    const double beta_embed =
        pair.p + d.dim_n * (pair.p - 2.0) / 2.0 + 1.0;
    report.h_infinity =
        check_h_infinity(pair.omega2, beta_embed, pair.p, d.dim_n, radii);
  } else {
    report.h_infinity.verdict = Verdict::warn;
    report.h_infinity.note = "not applicable: weights live on a bounded set";
  }
  const Interval compact = {std::max(d.r_lo, pair.validity.lo),
                            std::isfinite(pair.validity.hi)
                                ? std::min(d.r_hi, pair.validity.hi)
                                : d.r_hi};
  const RadialFn min_weight = [o1 = pair.omega1, o2 = pair.omega2](double r) {
    return std::min(o1(r), o2(r));
  };
  report.positivity_on_compacts = check_positivity_on_compacts(min_weight,
                                                               compact);

  CsvWriter csv(join_path(out_dir, "check_weights.csv"));
  csv.row({"check", "verdict", "probe", "level", "value"});
  write_check(csv, "bp_omega1", report.bp_omega1);
  write_check(csv, "bp_omega2", report.bp_omega2);
  write_check(csv, "h_alpha", report.h_alpha);
  write_check(csv, report.h_infinity_applicable ? "h_infinity"
                                                : "h_infinity_not_applicable",
              report.h_infinity);
  write_check(csv, "positivity_on_compacts", report.positivity_on_compacts);

  std::printf("check-weights family=%s all_pass=%d\n",
              to_string(w.family).c_str(), report.all_pass() ? 1 : 0);
  return report.all_pass() ? 0 : 1;
}

int cmd_hardy(const RunConfig& cfg, const std::string& out_dir,
              std::uint64_t seed) {
  const DomainConfig& d = need(cfg.domain, "domain");
  const DiscretizationConfig& disc = need(cfg.discretization,
                                          "discretization");
  const WeightsConfig& w = need(cfg.weights, "weights");
  const HardySection& h = need(cfg.hardy, "hardy");
  const WeightPair pair = make_pair_from_config(w, d);

  DiscConfig dc;
  dc.dim_N = d.dim_n;
  dc.measure = d.measure;
  dc.grading = disc.grading;
  dc.quad_order = disc.quad_order;
  dc.ladder = h.ladder;

  OptConfig opt;
  opt.multistart = h.multistart;
  opt.tol = h.tol;
  opt.seed = seed;

  const RayleighReport report = estimate_best_constant(pair, w.p, dc, opt);

  CsvWriter csv(join_path(out_dir, "hardy.csv"));
  csv.row({"n_cells", "r_lo", "r_hi", "best_value", "claimed_K", "margin",
           "verdict"});
  const std::string K_cell =
      report.claimed_K ? csv_num(*report.claimed_K) : "";
  for (const auto& rung : report.refinement_history)
    csv.row({std::to_string(rung.n_cells), csv_num(rung.r_lo),
             csv_num(rung.r_hi), csv_num(rung.extrapolated_value), K_cell,
             report.claimed_K
                 ? csv_num(rung.extrapolated_value - *report.claimed_K)
                 : "",
             ""});
  csv.row({"", "", "", csv_num(report.best_value), K_cell,
           report.claimed_K ? csv_num(report.best_value - *report.claimed_K)
                            : "",
           to_string(report.verdict)});

  std::printf("hardy best_value=%.17g discrete_value=%.17g verdict=%s\n",
              report.best_value, report.discrete_value,
              to_string(report.verdict).c_str());
  return 0;
}

int cmd_solve(const RunConfig& cfg, const std::string& out_dir,
              std::uint64_t seed) {
  const DomainConfig& d = need(cfg.domain, "domain");
  const DiscretizationConfig& disc = need(cfg.discretization,
                                          "discretization");
  const WeightsConfig& w = need(cfg.weights, "weights");
  const Built b = build_space(d, disc);
  const WeightPair pair = make_pair_from_config(w, d);
  const OptConfig opt = opt_from(cfg, seed);
  const ProblemSpec prob = problem_from_config(cfg, pair, b, opt, seed);
  const TimeConfig time = time_from_config(cfg);

  const double K = reference_K(pair, prob.p, b, opt);
  const SolveResult result = solve(prob, b.basis, b.quad, time);

  CsvWriter csv(join_path(out_dir, "trace.csv"));
  csv.row({"t", "half_l2", "diss", "gain", "cum_diss", "cum_gain"});
  for (const auto& row : result.trace.rows)
    csv.row({csv_num(row.t), csv_num(row.half_l2), csv_num(row.diss),
             csv_num(row.gain), csv_num(row.cum_diss), csv_num(row.cum_gain)});

  const double initial = result.trace.rows.front().half_l2;
  const double final_v = result.trace.rows.back().half_l2;
  std::printf("solve lambda_over_K=%.17g final_over_initial=%.17g blew_up=%d\n",
              prob.lambda / K, final_v / std::max(initial, 1e-300),
              result.trace.blew_up ? 1 : 0);
  if (result.trace.blew_up) {
    std::printf("apriori=skipped (trace marked blow-up)\n");
  } else if (prob.lambda > K) {
    std::printf("apriori=out_of_hypothesis\n");
  } else {
    const AprioriReport ap = apriori_check(result.trace, K, prob.lambda);
    std::printf("apriori margin=%.17g pass=%d\n", ap.margin, ap.pass ? 1 : 0);
  }
  return 0;
}

int cmd_sweep_lambda(const RunConfig& cfg, const std::string& out_dir,
                     std::uint64_t seed) {
  const DomainConfig& d = need(cfg.domain, "domain");
  const DiscretizationConfig& disc = need(cfg.discretization,
                                          "discretization");
  const WeightsConfig& w = need(cfg.weights, "weights");
  const Built b = build_space(d, disc);
  const WeightPair pair = make_pair_from_config(w, d);
  const OptConfig opt = opt_from(cfg, seed);
  ProblemSpec prob = problem_from_config(cfg, pair, b, opt, seed);
  const TimeConfig time = time_from_config(cfg);

  const double K = reference_K(pair, prob.p, b, opt);
  const int n_points = 13;
  std::vector<double> lambdas;
  for (int i = 0; i < n_points; ++i)
    lambdas.push_back(0.1 * K *
                      std::pow(40.0, double(i) / (n_points - 1)));

  CsvWriter csv(join_path(out_dir, "sweep_lambda.csv"));
  csv.row({"lambda", "lambda_over_K", "final_over_initial", "apriori_margin",
           "blew_up"});

  double threshold = 0.0;
  bool threshold_found = false;
  for (double lambda : lambdas) {
    prob.lambda = lambda;
    std::string ratio_cell = "nan", margin_cell = "error", blew_cell = "0";
    try {
      const SolveResult result = solve(prob, b.basis, b.quad, time);
      const double initial = result.trace.rows.front().half_l2;
      const double final_v = result.trace.rows.back().half_l2;
      const double ratio = final_v / std::max(initial, 1e-300);
      ratio_cell = csv_num(ratio);
      blew_cell = result.trace.blew_up ? "1" : "0";
      if (result.trace.blew_up) {
        margin_cell = "incomplete";
      } else if (lambda > K) {
        margin_cell = "out_of_hypothesis";
      } else {
        margin_cell = csv_num(apriori_check(result.trace, K, lambda).margin);
      }
      if (!result.trace.blew_up && ratio <= 1.0) {
        threshold = lambda;
        threshold_found = true;
      }
    } catch (const std::exception&) {
      // per-lambda failure recorded in the row; the sweep continues
    }
    csv.row({csv_num(lambda), csv_num(lambda / K), ratio_cell, margin_cell,
             blew_cell});
  }

  if (threshold_found)
    std::printf("sweep-lambda K=%.17g threshold_estimate=%.17g\n", K,
                threshold);
  else
    std::printf("sweep-lambda K=%.17g threshold_estimate=none\n", K);
  return 0;
}

}  // namespace hardylab
