#include "hardylab/weights.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

namespace hardylab {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

// Gauss-Legendre on [a,b], small fixed order, for the annulus integrals.
double gauss_segment(const std::function<double(double)>& f, double a,
                     double b, int order) {
  static const double x8[] = {-0.9602898564975363, -0.7966664774136267,
                              -0.5255324099163290, -0.1834346424956498,
                              0.1834346424956498,  0.5255324099163290,
                              0.7966664774136267,  0.9602898564975363};
  static const double w8[] = {0.1012285362903763, 0.2223810344533745,
                              0.3137066458778873, 0.3626837833783620,
                              0.3626837833783620, 0.3137066458778873,
                              0.2223810344533745, 0.1012285362903763};
  (void)order;
  double acc = 0.0;
  for (int i = 0; i < 8; ++i) {
    const double r = 0.5 * (a + b) + 0.5 * (b - a) * x8[i];
    acc += 0.5 * (b - a) * w8[i] * f(r);
  }
  return acc;
}

}  // namespace

std::string to_string(Verdict v) {
  switch (v) {
    case Verdict::pass: return "pass";
    case Verdict::fail: return "fail";
    default: return "warn";
  }
}

bool AdmissibilityReport::all_pass() const {
  auto ok = [](const CheckResult& c) { return c.verdict == Verdict::pass; };
  return ok(bp_omega1) && ok(bp_omega2) && ok(h_alpha) &&
         (!h_infinity_applicable || ok(h_infinity)) &&
         ok(positivity_on_compacts);
}

WeightPair make_power_weights(double gamma, double p, int dim_N) {
  if (p < 2.0)
    throw std::domain_error("make_power_weights: requires p >= 2");
  if (!(dim_N > p))
    throw std::domain_error("make_power_weights: requires dim_N > p");
  if (!(gamma < p - dim_N))
    throw std::domain_error(
        "make_power_weights: requires gamma < p - dim_N (constant formula "
        "invalid otherwise)");
  WeightPair pair;
  pair.omega1 = [gamma, p](double r) { return std::pow(r, gamma - p); };
  pair.omega2 = [gamma](double r) { return std::pow(r, gamma); };
  pair.p = p;
  pair.dim_N = dim_N;
  pair.claimed_K = std::pow((p - dim_N - gamma) / p, p);
  pair.claimed_K_optimal = true;
  pair.validity = {0.0, kInf};
  pair.family_tag = FamilyTag::power;
  return pair;
}

WeightPair make_confining_weights(double gamma, double p, int dim_N) {
  if (p < 2.0)
    throw std::domain_error("make_confining_weights: requires p >= 2");
  if (!(gamma > 1.0))
    throw std::domain_error("make_confining_weights: requires gamma > 1");
  const double q = p / (p - 1.0);
  WeightPair pair;
  pair.omega1 = [gamma, p, q](double r) {
    return std::pow(1.0 + std::pow(r, q), (p - 1.0) * (gamma - 1.0));
  };
  pair.omega2 = [gamma, p, q](double r) {
    return std::pow(1.0 + std::pow(r, q), (p - 1.0) * gamma);
  };
  pair.p = p;
  pair.dim_N = dim_N;
  pair.claimed_K =
      dim_N * std::pow(p * (gamma - 1.0) / (p - 1.0), p - 1.0);
  pair.claimed_K_optimal = gamma >= dim_N + 1.0 - double(dim_N) / p;
  pair.validity = {0.0, kInf};
  pair.family_tag = FamilyTag::confining;
  return pair;
}

double hardy_constant(double beta, double sigma, double p) {
  if (!(p > 1.0)) throw std::domain_error("hardy_constant: requires p > 1");
  if (!(beta > std::min(0.0, sigma)))
    throw std::domain_error("hardy_constant: requires beta > min(0, sigma)");
  return std::pow((beta - sigma) / (p - 1.0), p - 1.0);
}

WeightPair derive_weights_from_profile(const SuperharmonicProfile& prof,
                                       double beta, double sigma, double p,
                                       Interval domain, int n_check_samples) {
  if (!(p > 1.0))
    throw std::domain_error("derive_weights_from_profile: requires p > 1");
  if (!(beta > std::min(0.0, sigma)))
    throw std::domain_error(
        "derive_weights_from_profile: requires beta > min(0, sigma)");
  if (domain.empty())
    throw std::domain_error("derive_weights_from_profile: empty domain");

  auto v = prof.v;
  auto dv = prof.grad_v;
  auto dpv = prof.p_laplacian_v;

  RadialFn omega1 = [v, dv, dpv, sigma, beta, p](double r) {
    const double vr = v(r);
    if (!(vr > 0.0)) return 0.0;
    const double g = std::abs(dv(r));
    return (-dpv(r) * vr + sigma * std::pow(g, p)) *
           std::pow(vr, -beta - 1.0);
  };
  RadialFn omega2 = [v, dv, beta, p](double r) {
    if (dv(r) == 0.0) return 0.0;
    const double vr = v(r);
    return vr > 0.0 ? std::pow(vr, p - beta - 1.0) : 0.0;
  };

  // Sample omega1 for a sign violation (sigma < sigma0) and omega2 for an
  // everywhere-vanishing gradient (empty validity).
  bool any_grad = false;
  for (int i = 0; i < n_check_samples; ++i) {
    const double r = domain.lo + (domain.hi - domain.lo) * (i + 0.5) /
                                     n_check_samples;
    if (v(r) > 0.0 && omega1(r) < 0.0)
      throw std::domain_error(
          "derive_weights_from_profile: omega1 < 0 at r=" + std::to_string(r) +
          " (sigma below sigma0)");
    if (dv(r) != 0.0) any_grad = true;
  }

  WeightPair pair;
  pair.omega1 = omega1;
  pair.omega2 = omega2;
  pair.p = p;
  pair.dim_N = prof.dim_N;
  pair.family_tag = FamilyTag::superharmonic;
  if (any_grad) {
    pair.validity = domain;
    pair.claimed_K = hardy_constant(beta, sigma, p);
  } else {
    pair.validity = {domain.lo, domain.lo};  // empty: chi_{|grad v| != 0}
    pair.claimed_K = std::nullopt;
  }
  return pair;
}

double estimate_sigma0(const SuperharmonicProfile& prof, double p,
                       std::span<const double> grid) {
  if (!(p > 1.0)) throw std::domain_error("estimate_sigma0: requires p > 1");
  double sup = -kInf;
  bool effective = false;
  for (double r : grid) {
    const double vr = prof.v(r);
    if (!(vr > 0.0)) continue;  // chi_{v>0}
    const double g = std::abs(prof.grad_v(r));
    const double num = prof.p_laplacian_v(r) * vr;
    if (g == 0.0) {
      if (num > 0.0) return kInf;  // no sigma can fix this point
      continue;                    // unconstrained in sigma
    }
    sup = std::max(sup, num / std::pow(g, p));
    effective = true;
  }
  if (!effective)
    throw std::domain_error("estimate_sigma0: empty effective grid");
  return sup;
}

BpOptions::BpOptions() {
  shrink_factors.resize(14);
  double s = 0.5;
  for (auto& f : shrink_factors) {
    f = s;
    s *= 0.5;
  }
}

CheckResult check_bp(const RadialFn& weight, double p, int dim_N,
                     std::span<const double> probes, const Interval& validity,
                     const BpOptions& opt) {
  if (validity.empty())
    throw std::domain_error("check_bp: empty validity interval");
  for (size_t i = 1; i < opt.shrink_factors.size(); ++i)
    if (!(opt.shrink_factors[i] < opt.shrink_factors[i - 1]) ||
        !(opt.shrink_factors[i] > 0.0))
      throw std::domain_error(
          "check_bp: shrink_factors must be strictly decreasing positive");

  const double span =
      std::isfinite(validity.hi) ? validity.hi - validity.lo : 1.0;
  const double base =
      opt.base_halfwidth > 0.0 ? opt.base_halfwidth : 0.25 * span;

  auto integrand = [&](double r) {
    return std::pow(weight(r), -1.0 / (p - 1.0)) * std::pow(r, dim_N - 1);
  };

  CheckResult res;
  for (double z : probes) {
    if (z < validity.lo || (std::isfinite(validity.hi) && z > validity.hi))
      throw std::domain_error("check_bp: probe outside validity");
    double sum = 0.0;
    std::vector<double> sums;
    double prev_delta = base;
    bool finite = true;
    for (size_t k = 0; k < opt.shrink_factors.size(); ++k) {
      const double delta = base * opt.shrink_factors[k];
      // annulus {delta <= |r-z| <= prev_delta}, clipped to validity
      double part = 0.0;
      const double la = std::max(z - prev_delta, validity.lo);
      const double lb = std::max(z - delta, validity.lo);
      if (lb > la) part += gauss_segment(integrand, la, lb, opt.quad_order);
      const double ra = z + delta;
      double rb = z + prev_delta;
      if (std::isfinite(validity.hi)) rb = std::min(rb, validity.hi);
      if (rb > ra) part += gauss_segment(integrand, ra, rb, opt.quad_order);
      if (!std::isfinite(part)) finite = false;
      sum += part;
      sums.push_back(sum);
      res.evidence.push_back(
          {"bp", z, static_cast<int>(k), finite ? sum : kInf});
      prev_delta = delta;
      if (!finite) break;
    }
    bool converged = false;
    if (finite && sums.size() >= 4) {
      const double tail = std::abs(sums.back() - sums[sums.size() - 4]);
      converged = tail <= opt.cauchy_tol * std::max(std::abs(sums.back()),
                                                    1e-300);
    }
    if (!finite || !converged) {
      res.verdict = Verdict::fail;
      res.note = "bp: divergent or non-Cauchy neighborhood integrals at probe " +
                 std::to_string(z);
    }
  }
  return res;
}

CheckResult check_h_alpha(const RadialFn& weight, double alpha, double p,
                          std::span<const double> probes,
                          const Interval& validity, const LiminfOptions& opt) {
  if (!(alpha > 0.0 && alpha < p))
    throw std::domain_error("check_h_alpha: requires 0 < alpha < p");

  const double span =
      std::isfinite(validity.hi) ? validity.hi - validity.lo : 1.0;
  const double base = opt.base_offset > 0.0 ? opt.base_offset : 0.25 * span;

  CheckResult res;
  for (double z : probes) {
    double running_inf = kInf;
    std::vector<double> ratios;
    double off = base;
    for (int k = 0; k < opt.n_offsets; ++k) {
      double ratio = kInf;
      const double left = z - off, right = z + off;
      if (left > validity.lo)
        ratio = std::min(ratio, weight(left) / std::pow(off, alpha));
      if (right > validity.lo &&
          (!std::isfinite(validity.hi) || right < validity.hi))
        ratio = std::min(ratio, weight(right) / std::pow(off, alpha));
      if (std::isfinite(ratio)) {
        running_inf = std::min(running_inf, ratio);
        ratios.push_back(ratio);
        res.evidence.push_back({"h_alpha", z, k, ratio});
      }
      off *= opt.ratio;
    }
    if (ratios.empty() || !(running_inf > opt.floor)) {
      res.verdict = Verdict::fail;
      res.note = "h_alpha: ratio fell to the floor at probe " +
                 std::to_string(z);
      continue;
    }
    // A tail still heading down is inconclusive evidence for a liminf.
    if (ratios.size() >= 4) {
      bool decaying = true;
      for (size_t i = ratios.size() - 3; i < ratios.size(); ++i)
        decaying = decaying && ratios[i] < 0.9 * ratios[i - 1];
      if (decaying && res.verdict == Verdict::pass) {
        res.verdict = Verdict::warn;
        res.note = "h_alpha: ratio tail still decreasing at probe " +
                   std::to_string(z) + " (fail-with-warning)";
      }
    }
  }
  return res;
}

CheckResult check_h_infinity(const RadialFn& weight, double beta_embed,
                             double p, int dim_N,
                             std::span<const double> sample_radii,
                             const LiminfOptions& opt) {
  if (!(beta_embed > p + 0.5 * dim_N * (p - 2.0)))
    throw std::domain_error(
        "check_h_infinity: requires beta_embed > p + dim_N*(p-2)/2");
  if (sample_radii.empty())
    throw std::domain_error("check_h_infinity: empty sample list");

  CheckResult res;
  std::vector<double> ratios;
  double running_inf = kInf;
  int k = 0;
  for (double r : sample_radii) {
    const double ratio = weight(r) * std::pow(r, beta_embed);
    running_inf = std::min(running_inf, ratio);
    ratios.push_back(ratio);
    res.evidence.push_back({"h_infinity", r, k++, ratio});
  }
  if (!(running_inf > opt.floor)) {
    res.verdict = Verdict::fail;
    res.note = "h_infinity: omega * r^beta fell to the floor";
  } else if (ratios.size() >= 4) {
    bool decaying = true;
    for (size_t i = ratios.size() - 3; i < ratios.size(); ++i)
      decaying = decaying && ratios[i] < 0.9 * ratios[i - 1];
    if (decaying) {
      res.verdict = Verdict::warn;
      res.note = "h_infinity: ratio tail still decreasing";
    }
  }
  return res;
}

CheckResult check_positivity_on_compacts(const RadialFn& weight,
                                         const Interval& compact,
                                         int n_samples) {
  if (compact.empty())
    throw std::domain_error("check_positivity_on_compacts: empty interval");
  CheckResult res;
  double min_val = kInf;
  for (int i = 0; i < n_samples; ++i) {
    const double r =
        compact.lo + (compact.hi - compact.lo) * (i + 0.5) / n_samples;
    min_val = std::min(min_val, weight(r));
  }
  res.evidence.push_back({"positivity", compact.lo, 0, min_val});
  if (!(min_val > 0.0)) {
    res.verdict = Verdict::fail;
    res.note = "positivity: weight not strictly positive on the compact";
  }
  return res;
}

}  // namespace hardylab
