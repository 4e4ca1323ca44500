#include "hardylab/discretization.hpp"

#include <cmath>
#include <stdexcept>

namespace hardylab {

namespace {

// Gauss-Legendre nodes/weights on [-1,1] by Newton iteration on P_n.
void gauss_legendre(int n, std::vector<double>& x, std::vector<double>& w) {
  x.resize(n);
  w.resize(n);
  for (int i = 0; i < (n + 1) / 2; ++i) {
    double z = std::cos(M_PI * (i + 0.75) / (n + 0.5));
    double pp = 0.0;
    for (int it = 0; it < 100; ++it) {
      double p0 = 1.0, p1 = 0.0;
      for (int j = 0; j < n; ++j) {
        double p2 = p1;
        p1 = p0;
        p0 = ((2.0 * j + 1.0) * z * p1 - j * p2) / (j + 1.0);
      }
      pp = n * (z * p0 - p1) / (z * z - 1.0);
      double dz = p0 / pp;
      z -= dz;
      if (std::abs(dz) < 1e-15) break;
    }
    x[i] = -z;
    x[n - 1 - i] = z;
    w[i] = 2.0 / ((1.0 - z * z) * pp * pp);
    w[n - 1 - i] = w[i];
  }
}

// Ratio of the geometric grading: (q^n - 1)/(q - 1) = n^2, solved for
// t = n*log(q) to stay finite for large n.
double grading_log_ratio(int n) {
  auto g = [n](double t) {
    return std::expm1(t) / std::expm1(t / n) - double(n) * n;
  };
  double lo = 1e-12, hi = 60.0;
  for (int it = 0; it < 200; ++it) {
    double mid = 0.5 * (lo + hi);
    (g(mid) < 0.0 ? lo : hi) = mid;
  }
  return 0.5 * (lo + hi);
}

}  // namespace

RadialDomain::RadialDomain(double lo, double hi, int N, Measure m)
    : r_lo(lo), r_hi(hi), dim_N(N), measure(m) {
  if (!(r_lo < r_hi))
    throw std::domain_error("RadialDomain: requires r_lo < r_hi");
  if (measure == Measure::radial) {
    if (r_lo <= 0.0)
      throw std::domain_error("RadialDomain: radial measure requires r_lo > 0");
    if (dim_N < 2)
      throw std::domain_error("RadialDomain: radial measure requires dim_N >= 2");
  } else if (r_lo < 0.0) {
    throw std::domain_error("RadialDomain: requires r_lo >= 0");
  }
}

Mesh build_mesh(const RadialDomain& dom, int n_cells, Grading grading) {
  if (n_cells < 2) throw std::domain_error("build_mesh: n_cells must be >= 2");
  Mesh mesh;
  mesh.grading = grading;
  mesh.nodes.resize(n_cells + 1);
  const double L = dom.r_hi - dom.r_lo;
  if (grading == Grading::uniform) {
    for (int i = 0; i <= n_cells; ++i)
      mesh.nodes[i] = dom.r_lo + L * double(i) / n_cells;
  } else {
    const double q = std::exp(grading_log_ratio(n_cells) / n_cells);
    const double h0 = L / (double(n_cells) * n_cells);
    double h = h0, pos = dom.r_lo;
    mesh.nodes[0] = dom.r_lo;
    for (int i = 1; i <= n_cells; ++i) {
      pos += h;
      h *= q;
      mesh.nodes[i] = pos;
    }
  }
  mesh.nodes[n_cells] = dom.r_hi;
  return mesh;
}

Mesh bisect(const Mesh& mesh) {
  Mesh out;
  out.grading = mesh.grading;
  out.nodes.reserve(2 * mesh.nodes.size() - 1);
  for (size_t i = 0; i + 1 < mesh.nodes.size(); ++i) {
    out.nodes.push_back(mesh.nodes[i]);
    out.nodes.push_back(0.5 * (mesh.nodes[i] + mesh.nodes[i + 1]));
  }
  out.nodes.push_back(mesh.nodes.back());
  return out;
}

QuadratureRule make_quadrature(const Mesh& mesh, const RadialDomain& dom,
                               int order) {
  if (order < 1 || order > 30)
    throw std::domain_error("make_quadrature: order out of range [1,30]");
  std::vector<double> gx, gw;
  gauss_legendre(order, gx, gw);

  const int nc = mesh.n_cells();
  QuadratureRule quad;
  quad.order = order;
  quad.points.resize(nc * order);
  quad.dr_weights.resize(nc * order);
  quad.mu_weights.resize(nc * order);
  for (int c = 0; c < nc; ++c) {
    const double a = mesh.nodes[c], b = mesh.nodes[c + 1];
    for (int j = 0; j < order; ++j) {
      const double r = 0.5 * (a + b) + 0.5 * (b - a) * gx[j];
      const double w = 0.5 * (b - a) * gw[j];
      const int idx = c * order + j;
      quad.points[idx] = r;
      quad.dr_weights[idx] = w;
      quad.mu_weights[idx] =
          dom.measure == Measure::radial
              ? w * std::pow(r, dom.dim_N - 1)
              : w;
    }
  }
  return quad;
}

Basis hat_basis(const Mesh& mesh, const QuadratureRule& quad) {
  const int n = mesh.n_cells() - 1;  // one hat per interior node
  const int nq = static_cast<int>(quad.points.size());
  if (n < 1) throw std::domain_error("hat_basis: mesh has no interior node");

  Basis basis;
  basis.values = Eigen::MatrixXd::Zero(n, nq);
  basis.gradients = Eigen::MatrixXd::Zero(n, nq);
  for (int k = 1; k <= n; ++k) {
    const double xl = mesh.nodes[k - 1], xm = mesh.nodes[k],
                 xr = mesh.nodes[k + 1];
    for (int j = 0; j < nq; ++j) {
      const double r = quad.points[j];
      if (r >= xl && r <= xm) {
        basis.values(k - 1, j) = (r - xl) / (xm - xl);
        basis.gradients(k - 1, j) = 1.0 / (xm - xl);
      } else if (r > xm && r <= xr) {
        basis.values(k - 1, j) = (xr - r) / (xr - xm);
        basis.gradients(k - 1, j) = -1.0 / (xr - xm);
      }
    }
  }
  basis.gram = basis.values * quad.mu_weights.asDiagonal() *
               basis.values.transpose();
  basis.orthonormal = false;
  return basis;
}

Basis orthonormalize(const Basis& raw, const QuadratureRule& quad) {
  Basis out = raw;
  const int n = out.n();
  const auto& mu = quad.mu_weights;

  auto dot = [&](int i, int j) {
    return (out.values.row(i).array() * out.values.row(j).array() *
            mu.transpose().array())
        .sum();
  };

  for (int k = 0; k < n; ++k) {
    const double norm0 = std::sqrt(dot(k, k));
    for (int pass = 0; pass < 2; ++pass) {
      for (int j = 0; j < k; ++j) {
        const double c = dot(k, j);
        out.values.row(k) -= c * out.values.row(j);
        out.gradients.row(k) -= c * out.gradients.row(j);
      }
    }
    const double norm = std::sqrt(dot(k, k));
    if (!(norm > 1e-13 * norm0) || !std::isfinite(norm))
      throw std::runtime_error(
          "orthonormalize: numerically singular Gram matrix at function " +
          std::to_string(k));
    out.values.row(k) /= norm;
    out.gradients.row(k) /= norm;
  }
  out.gram =
      out.values * quad.mu_weights.asDiagonal() * out.values.transpose();
  out.orthonormal = true;
  return out;
}

double integrate(const Eigen::VectorXd& f_at_quad, const QuadratureRule& quad) {
  if (f_at_quad.size() != quad.mu_weights.size())
    throw std::domain_error("integrate: sample count mismatch");
  double acc = 0.0;
  for (Eigen::Index i = 0; i < f_at_quad.size(); ++i) {
    if (!std::isfinite(f_at_quad[i]))
      throw std::runtime_error("integrate: non-finite sample at r=" +
                               std::to_string(quad.points[i]));
    acc += f_at_quad[i] * quad.mu_weights[i];
  }
  return acc;
}

double integrate(const Eigen::VectorXd& f_at_quad, const QuadratureRule& quad,
                 const Eigen::VectorXd& weight_at_quad) {
  if (f_at_quad.size() != quad.mu_weights.size() ||
      weight_at_quad.size() != quad.mu_weights.size())
    throw std::domain_error("integrate: sample count mismatch");
  double acc = 0.0;
  for (Eigen::Index i = 0; i < f_at_quad.size(); ++i) {
    const double v = f_at_quad[i] * weight_at_quad[i];
    if (!std::isfinite(v))
      throw std::runtime_error("integrate: non-finite sample at r=" +
                               std::to_string(quad.points[i]));
    acc += v * quad.mu_weights[i];
  }
  return acc;
}

Eigen::VectorXd sample(const RadialFn& f, const QuadratureRule& quad) {
  Eigen::VectorXd out(quad.points.size());
  for (Eigen::Index i = 0; i < quad.points.size(); ++i)
    out[i] = f(quad.points[i]);
  return out;
}

Field eval_field(const Eigen::VectorXd& coeffs, const Basis& basis) {
  if (coeffs.size() != basis.n())
    throw std::domain_error("eval_field: coefficient count mismatch");
  Field field;
  field.values = basis.values.transpose() * coeffs;
  field.gradients = basis.gradients.transpose() * coeffs;
  return field;
}

}  // namespace hardylab
