#pragma once

#include <Eigen/Dense>

#include <functional>
#include <string>
#include <vector>

namespace hardylab {

/// Evaluable radial profile r -> value.
using RadialFn = std::function<double(double)>;

enum class Measure { radial, flat };
enum class Grading { uniform, geometric };

/// Truncated 1-D radial domain [r_lo, r_hi] carrying the measure
/// r^{N-1} dr (radial) or dr (flat).
struct RadialDomain {
  double r_lo;
  double r_hi;
  int dim_N;
  Measure measure;

  RadialDomain(double lo, double hi, int N, Measure m);
};

struct Mesh {
  std::vector<double> nodes;  // strictly increasing, nodes.front()=r_lo
  Grading grading;

  int n_cells() const { return static_cast<int>(nodes.size()) - 1; }
};

/// Uniform or geometrically graded mesh. Geometric grading clusters cells
/// toward r_lo with the first cell (r_hi-r_lo)/n_cells^2 wide.
Mesh build_mesh(const RadialDomain& dom, int n_cells, Grading grading);

/// Nested refinement: every cell split at its midpoint.
Mesh bisect(const Mesh& mesh);

/// Composite Gauss-Legendre rule over the mesh cells. mu_weights carry the
/// domain measure (dr_weights times r^{N-1} for the radial measure).
struct QuadratureRule {
  Eigen::VectorXd points;
  Eigen::VectorXd dr_weights;
  Eigen::VectorXd mu_weights;
  int order;
};

QuadratureRule make_quadrature(const Mesh& mesh, const RadialDomain& dom,
                               int order = 4);

/// Basis functions sampled at the quadrature points, one row per function.
/// After orthonormalize() the Gram matrix under the mu-weighted L2 product
/// is the identity.
struct Basis {
  Eigen::MatrixXd values;     // n x nq
  Eigen::MatrixXd gradients;  // n x nq
  Eigen::MatrixXd gram;
  bool orthonormal = false;

  int n() const { return static_cast<int>(values.rows()); }
};

/// Interior P1 hat functions; zero at both boundary nodes by construction.
Basis hat_basis(const Mesh& mesh, const QuadratureRule& quad);

/// Two-pass modified Gram-Schmidt in L2(dmu). Span is preserved.
Basis orthonormalize(const Basis& raw, const QuadratureRule& quad);

/// Sum f * weight * mu_weights. Throws on non-finite samples.
double integrate(const Eigen::VectorXd& f_at_quad, const QuadratureRule& quad);
double integrate(const Eigen::VectorXd& f_at_quad, const QuadratureRule& quad,
                 const Eigen::VectorXd& weight_at_quad);

/// Sample an evaluable profile at the quadrature points.
Eigen::VectorXd sample(const RadialFn& f, const QuadratureRule& quad);

struct Field {
  Eigen::VectorXd values;
  Eigen::VectorXd gradients;
};

/// u = sum_k coeffs_k e_k and its radial derivative at quadrature points.
Field eval_field(const Eigen::VectorXd& coeffs, const Basis& basis);

}  // namespace hardylab
