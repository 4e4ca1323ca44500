#pragma once

#include "hardylab/discretization.hpp"

#include <optional>
#include <span>
#include <string>
#include <vector>

namespace hardylab {

enum class FamilyTag { power, confining, superharmonic, custom };

struct Interval {
  double lo = 0.0;
  double hi = 0.0;
  bool empty() const { return !(lo < hi); }
};

/// A two-weight pair (omega1, omega2) with its claimed Hardy constant.
/// The claimed constant is metadata; nothing assumes it is optimal unless
/// claimed_K_optimal is set by the family's optimality condition.
struct WeightPair {
  RadialFn omega1;
  RadialFn omega2;
  double p = 2.0;
  int dim_N = 2;
  std::optional<double> claimed_K;
  bool claimed_K_optimal = false;
  Interval validity;
  FamilyTag family_tag = FamilyTag::custom;
};

/// A profile v with caller-supplied derivative and radial p-Laplacian
/// r^{1-N} (r^{N-1} |v'|^{p-2} v')'.
struct SuperharmonicProfile {
  RadialFn v;
  RadialFn grad_v;
  RadialFn p_laplacian_v;
  int dim_N = 2;
};

/// omega1 = r^{gamma-p}, omega2 = r^gamma, K = ((p-N-gamma)/p)^p.
/// Requires gamma < p - dim_N; the constant is optimal on this range.
WeightPair make_power_weights(double gamma, double p, int dim_N);

/// omega_i = (1+r^{p/(p-1)})^{(p-1)(gamma-1)} resp. ^{(p-1)gamma},
/// K = N (p(gamma-1)/(p-1))^{p-1}, optimal when gamma >= N+1-N/p.
WeightPair make_confining_weights(double gamma, double p, int dim_N);

/// Weight pair generated by a profile:
///   omega1 = (-Dp v * v + sigma |v'|^p) v^{-beta-1}  on {v > 0},
///   omega2 = v^{p-beta-1}                            on {|v'| != 0},
/// with K = ((beta-sigma)/(p-1))^{p-1}. omega1 is sampled on `domain`;
/// a negative sample signals sigma < sigma0 and is rejected.
WeightPair derive_weights_from_profile(const SuperharmonicProfile& prof,
                                       double beta, double sigma, double p,
                                       Interval domain,
                                       int n_check_samples = 256);

/// K = ((beta-sigma)/(p-1))^{p-1}; requires beta > min(0, sigma), p > 1.
double hardy_constant(double beta, double sigma, double p);

/// sup over the grid of (Dp v * v)/|v'|^p, the smallest sigma keeping
/// -Dp v * v + sigma |v'|^p nonnegative there. Grid points with v' = 0 are
/// skipped when they impose no constraint (Dp v * v <= 0) and make the
/// result +inf otherwise.
double estimate_sigma0(const SuperharmonicProfile& prof, double p,
                       std::span<const double> grid);

enum class Verdict { pass, fail, warn };

std::string to_string(Verdict v);

/// One sampled data point backing a pass/fail decision.
struct EvidenceRow {
  std::string check_name;
  double probe;
  int level;
  double value;
};

struct CheckResult {
  Verdict verdict = Verdict::pass;
  std::vector<EvidenceRow> evidence;
  std::string note;
};

struct BpOptions {
  std::vector<double> shrink_factors;  // strictly decreasing, in (0,1)
  double base_halfwidth = 0.0;         // 0 -> derived from the validity span
  double cauchy_tol = 5e-3;            // relative, over the last three levels
  int quad_order = 8;

  BpOptions();
};

/// Local integrability probe for omega^{-1/(p-1)} dmu: annulus integrals
/// around each probe at shrinking distances; passes when the partial sums
/// are finite and Cauchy. A divergent tail is a legitimate fail, not an
/// exception.
CheckResult check_bp(const RadialFn& weight, double p, int dim_N,
                     std::span<const double> probes, const Interval& validity,
                     const BpOptions& opt = BpOptions());

struct LiminfOptions {
  int n_offsets = 12;
  double ratio = 0.5;
  double base_offset = 0.0;  // 0 -> derived from the validity span
  double floor = 1e-8;
};

/// Finite-sampling evidence for liminf_{x->z} omega/|x-z|^alpha > 0.
/// A steadily decaying ratio tail above the floor is reported as warn
/// (evidence, not proof).
CheckResult check_h_alpha(const RadialFn& weight, double alpha, double p,
                          std::span<const double> probes,
                          const Interval& validity,
                          const LiminfOptions& opt = LiminfOptions());

/// Finite-sampling evidence for liminf_{r->inf} omega * r^{beta_embed} > 0.
/// Requires beta_embed > p + dim_N (p-2)/2.
CheckResult check_h_infinity(const RadialFn& weight, double beta_embed,
                             double p, int dim_N,
                             std::span<const double> sample_radii,
                             const LiminfOptions& opt = LiminfOptions());

/// Sampled positivity of a weight on a compact subinterval.
CheckResult check_positivity_on_compacts(const RadialFn& weight,
                                         const Interval& compact,
                                         int n_samples = 256);

struct AdmissibilityReport {
  CheckResult bp_omega1;
  CheckResult bp_omega2;
  CheckResult h_alpha;
  CheckResult h_infinity;  // verdict=warn + note when not applicable
  bool h_infinity_applicable = true;
  CheckResult positivity_on_compacts;

  bool all_pass() const;
};

}  // namespace hardylab
