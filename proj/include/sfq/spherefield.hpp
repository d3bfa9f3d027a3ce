#pragma once

#include <Eigen/Dense>
#include <algorithm>
#include <array>
#include <cmath>
#include <functional>
#include <limits>
#include <map>
#include <numbers>
#include <random>
#include <vector>

#include "sfq/common.hpp"
#include "sfq/hyperdual.hpp"
#include "sfq/symmpoly.hpp"

namespace sfq {

// ---------------------------------------------------------------------------
// Ambient polynomials and radial fields

// Polynomial in the n+1 ambient coordinates, stored as a sparse term list.
struct AmbientPolynomial {
  int nvars = 0;
  struct Term {
    double coeff;
    std::vector<int> exps;
  };
  std::vector<Term> terms;

  AmbientPolynomial() = default;
  explicit AmbientPolynomial(int vars) : nvars(vars) {}

  int degree() const {
    int d = 0;
    for (const auto& t : terms) {
      int s = 0;
      for (int e : t.exps) s += e;
      d = std::max(d, s);
    }
    return d;
  }

  void add_term(double c, std::vector<int> e) {
    if (int(e.size()) != nvars) throw invalid_input("exponent tuple size mismatch");
    for (int x : e)
      if (x < 0) throw invalid_input("negative exponent");
    if (!std::isfinite(c)) throw invalid_input("non-finite coefficient");
    terms.push_back({c, std::move(e)});
  }

  // merge duplicate exponent tuples, drop zeros
  void canonicalize() {
    std::map<std::vector<int>, double> acc;
    for (auto& t : terms) acc[t.exps] += t.coeff;
    terms.clear();
    for (auto& [e, c] : acc)
      if (c != 0.0) terms.push_back({c, e});
  }

  AmbientPolynomial& operator+=(const AmbientPolynomial& o) {
    if (nvars != o.nvars) throw invalid_input("variable count mismatch");
    terms.insert(terms.end(), o.terms.begin(), o.terms.end());
    canonicalize();
    return *this;
  }
  AmbientPolynomial& operator*=(double s) {
    for (auto& t : terms) t.coeff *= s;
    return *this;
  }
  friend AmbientPolynomial operator*(double s, AmbientPolynomial p) {
    p *= s;
    return p;
  }
  friend AmbientPolynomial operator+(AmbientPolynomial a, const AmbientPolynomial& b) {
    a += b;
    return a;
  }

  template <typename T>
  T evaluate(std::span<const T> y) const {
    T sum(0.0);
    for (const auto& t : terms) {
      T m(t.coeff);
      for (int i = 0; i < nvars; ++i)
        for (int e = 0; e < t.exps[i]; ++e) m = m * y[std::size_t(i)];
      sum = sum + m;
    }
    return sum;
  }

  // Evaluation of the 0-homogeneous extension U(y) = sum_d P_d(y)/|y|^d.
  template <typename T>
  T evaluate_homogenized(std::span<const T> y) const {
    T s2(0.0);
    for (int i = 0; i < nvars; ++i) s2 = s2 + y[std::size_t(i)] * y[std::size_t(i)];
    T sum(0.0);
    for (const auto& t : terms) {
      int deg = 0;
      for (int e : t.exps) deg += e;
      T m(t.coeff);
      for (int i = 0; i < nvars; ++i)
        for (int e = 0; e < t.exps[i]; ++e) m = m * y[std::size_t(i)];
      if (deg > 0) m = m * pow(s2, -0.5 * double(deg));
      sum = sum + m;
    }
    return sum;
  }

  // Ambient Laplacian, used for harmonic-space construction.
  AmbientPolynomial laplacian() const {
    AmbientPolynomial out(nvars);
    for (const auto& t : terms)
      for (int i = 0; i < nvars; ++i)
        if (t.exps[i] >= 2) {
          auto e = t.exps;
          e[i] -= 2;
          out.terms.push_back({t.coeff * t.exps[i] * (t.exps[i] - 1), std::move(e)});
        }
    out.canonicalize();
    return out;
  }
};

template <>
inline double AmbientPolynomial::evaluate_homogenized<double>(
    std::span<const double> y) const {
  double s2 = 0.0;
  for (int i = 0; i < nvars; ++i) s2 += y[std::size_t(i)] * y[std::size_t(i)];
  double sum = 0.0;
  for (const auto& t : terms) {
    int deg = 0;
    for (int e : t.exps) deg += e;
    double m = t.coeff;
    for (int i = 0; i < nvars; ++i)
      for (int e = 0; e < t.exps[i]; ++e) m *= y[std::size_t(i)];
    if (deg > 0) m *= std::pow(s2, -0.5 * double(deg));
    sum += m;
  }
  return sum;
}

// Orthonormal tangent frame at a point of S^n, by a Householder reflection
// carrying the last coordinate axis onto the point. Keeps frames well defined
// at the poles.
struct JetFrame {
  Eigen::VectorXd point;               // unit vector, n+1 entries
  std::vector<Eigen::VectorXd> basis;  // n orthonormal tangent vectors
};

inline JetFrame frame_at(const Eigen::VectorXd& x) {
  const int dim = int(x.size());
  const int n = dim - 1;
  JetFrame f;
  f.point = x;
  const double s = x[n] >= 0.0 ? 1.0 : -1.0;
  Eigen::VectorXd v = x;
  v[n] += s;
  const double vv = v.squaredNorm();
  f.basis.reserve(std::size_t(n));
  for (int i = 0; i < n; ++i) {
    Eigen::VectorXd e = Eigen::VectorXd::Zero(dim);
    e[i] = 1.0;
    f.basis.push_back(-s * (e - (2.0 * v[i] / vv) * v));
  }
  return f;
}

// Scalar field on S^n: a polynomial restricted to the sphere, with jets taken
// through the 0-homogeneous extension. The Euler relation kills the radial
// component, so the frame-restricted ambient Hessian equals the covariant
// Hessian on the sphere.
struct RadialField {
  AmbientPolynomial poly;
  int n = 0;

  RadialField() = default;
  RadialField(AmbientPolynomial p, int sphere_dim) : poly(std::move(p)), n(sphere_dim) {
    if (poly.nvars != n + 1) throw invalid_input("polynomial must have n+1 variables");
  }

  double value(std::span<const double> x) const { return poly.evaluate<double>(x); }
  double value(const Eigen::VectorXd& x) const {
    return poly.evaluate<double>(std::span<const double>(x.data(), std::size_t(x.size())));
  }
};

struct Jet {
  double value;
  Eigen::VectorXd gradient;  // n components in the frame basis
  Eigen::MatrixXd hessian;   // n x n, covariant Hessian in the frame basis
};

inline Jet jet(const RadialField& u, const JetFrame& frame) {
  const int n = u.n;
  const int dim = n + 1;
  Jet out;
  out.gradient = Eigen::VectorXd::Zero(n);
  out.hessian = Eigen::MatrixXd::Zero(n, n);
  out.value = u.value(frame.point);
  std::vector<HyperDual> y(static_cast<std::size_t>(dim));
  for (int i = 0; i < n; ++i) {
    for (int j = i; j < n; ++j) {
      for (int c = 0; c < dim; ++c)
        y[std::size_t(c)] = HyperDual(frame.point[c], frame.basis[std::size_t(i)][c],
                                      frame.basis[std::size_t(j)][c], 0.0);
      const HyperDual r = u.poly.evaluate_homogenized<HyperDual>(y);
      if (j == i) out.gradient[i] = r.d1;
      out.hessian(i, j) = out.hessian(j, i) = r.d12;
    }
  }
  return out;
}

// ---------------------------------------------------------------------------
// Quadrature on S^n

namespace detail {

// Gauss rule on [-1,1] for the weight (1-x^2)^(lambda - 1/2), by Golub-Welsch
// on the Gegenbauer recurrence. lambda = 1/2 is Gauss-Legendre.
inline void gauss_gegenbauer(int q, double lambda, std::vector<double>& nodes,
                             std::vector<double>& weights) {
  Eigen::MatrixXd jac = Eigen::MatrixXd::Zero(q, q);
  for (int k = 1; k < q; ++k) {
    const double b2 =
        k * (k + 2.0 * lambda - 1.0) / (4.0 * (k + lambda) * (k + lambda - 1.0));
    jac(k, k - 1) = jac(k - 1, k) = std::sqrt(b2);
  }
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(jac);
  const double mu0 = std::sqrt(std::numbers::pi) * std::tgamma(lambda + 0.5) /
                     std::tgamma(lambda + 1.0);
  nodes.resize(std::size_t(q));
  weights.resize(std::size_t(q));
  for (int i = 0; i < q; ++i) {
    nodes[std::size_t(i)] = es.eigenvalues()[i];
    const double c = es.eigenvectors()(0, i);
    weights[std::size_t(i)] = mu0 * c * c;
  }
}

// Exact integral of x^alpha over S^n: zero unless all exponents are even,
// otherwise 2 prod Gamma(b_i) / Gamma(sum b_i) with b_i = (alpha_i + 1)/2.
inline double monomial_sphere_integral(std::span<const int> alpha) {
  double log_num = 0.0, bsum = 0.0;
  for (int a : alpha) {
    if (a % 2 != 0) return 0.0;
    const double b = 0.5 * (a + 1);
    log_num += std::lgamma(b);
    bsum += b;
  }
  return 2.0 * std::exp(log_num - std::lgamma(bsum));
}

}  // namespace detail

// Tensor-product quadrature grid on S^n with certified polynomial exactness.
struct QuadratureGrid {
  int n = 0;
  int exactness_degree = 0;
  std::vector<Eigen::VectorXd> nodes;
  std::vector<double> weights;

  double integrate(std::span<const double> node_values) const {
    if (node_values.size() != nodes.size()) throw invalid_input("node count mismatch");
    std::vector<double> prods(nodes.size());
    for (std::size_t i = 0; i < nodes.size(); ++i) prods[i] = weights[i] * node_values[i];
    return pairwise_sum(prods);
  }

  template <typename F>
  double integrate_fn(F&& f) const {
    std::vector<double> vals(nodes.size());
    for (std::size_t i = 0; i < nodes.size(); ++i) vals[i] = f(nodes[i]);
    return integrate(vals);
  }
};

inline QuadratureGrid build_grid(int n, int L) {
  if (n < 2) throw invalid_input("sphere dimension must be at least 2");
  if (L < 2) throw invalid_input("exactness degree must be at least 2");
  QuadratureGrid g;
  g.n = n;
  g.exactness_degree = L;

  std::vector<std::vector<double>> pol_nodes(std::size_t(n - 1)),
      pol_weights(std::size_t(n - 1));
  const int q = L / 2 + 2;
  for (int i = 1; i <= n - 1; ++i)
    detail::gauss_gegenbauer(q, 0.5 * double(n - i), pol_nodes[std::size_t(i - 1)],
                             pol_weights[std::size_t(i - 1)]);
  const int azimuth = L + 2;

  std::vector<std::size_t> idx(std::size_t(n - 1), 0);
  const int dim = n + 1;
  for (;;) {
    // polar part fixed by idx; loop the azimuth innermost
    double wpol = 1.0;
    double sin_prod = 1.0;
    Eigen::VectorXd x = Eigen::VectorXd::Zero(dim);
    for (int i = 0; i < n - 1; ++i) {
      const double c = pol_nodes[std::size_t(i)][idx[std::size_t(i)]];
      wpol *= pol_weights[std::size_t(i)][idx[std::size_t(i)]];
      x[i] = sin_prod * c;
      sin_prod *= std::sqrt(std::max(0.0, 1.0 - c * c));
    }
    for (int a = 0; a < azimuth; ++a) {
      const double th = 2.0 * std::numbers::pi * (a + 0.5) / azimuth;
      Eigen::VectorXd node = x;
      node[n - 1] = sin_prod * std::cos(th);
      node[n] = sin_prod * std::sin(th);
      g.nodes.push_back(node);
      g.weights.push_back(wpol * 2.0 * std::numbers::pi / azimuth);
    }
    int level = n - 2;
    while (level >= 0) {
      if (++idx[std::size_t(level)] < pol_nodes[std::size_t(level)].size()) break;
      idx[std::size_t(level)] = 0;
      --level;
    }
    if (level < 0) break;
  }

  // build-time certificate
  const double wn = sphere_area(n);
  for (const auto& node : g.nodes)
    if (std::abs(node.norm() - 1.0) > 1e-14)
      throw grid_error("grid node is off the sphere");
  if (std::abs(pairwise_sum(g.weights) - wn) > 1e-12 * wn)
    throw grid_error("grid weights do not sum to the sphere area");

  auto check_monomial = [&](const std::vector<int>& alpha) {
    std::vector<double> vals(g.nodes.size());
    for (std::size_t i = 0; i < g.nodes.size(); ++i) {
      double m = 1.0;
      for (int c = 0; c < dim; ++c)
        for (int e = 0; e < alpha[std::size_t(c)]; ++e) m *= g.nodes[i][c];
      vals[i] = m;
    }
    const double exact = detail::monomial_sphere_integral(alpha);
    if (std::abs(g.integrate(vals) - exact) > 1e-12 * std::max(1.0, std::abs(exact)))
      throw grid_error("grid failed the monomial exactness certificate");
  };

  // exhaustive low degrees, random sample up to the full degree
  std::vector<int> alpha(std::size_t(dim), 0);
  const int exhaustive = std::min(L, 6);
  std::function<void(int, int)> rec = [&](int pos, int remaining) {
    if (pos == dim) {
      check_monomial(alpha);
      return;
    }
    for (int e = 0; e <= remaining; ++e) {
      alpha[std::size_t(pos)] = e;
      rec(pos + 1, remaining - e);
    }
    alpha[std::size_t(pos)] = 0;
  };
  rec(0, exhaustive);
  std::mt19937_64 rng(0x5f9u);
  for (int trial = 0; trial < 24; ++trial) {
    int remaining = L;
    for (int c = 0; c < dim; ++c) {
      alpha[std::size_t(c)] =
          (c == dim - 1) ? remaining
                         : int(std::uniform_int_distribution<int>(0, remaining)(rng));
      remaining -= alpha[std::size_t(c)];
    }
    check_monomial(alpha);
  }
  return g;
}

// ---------------------------------------------------------------------------
// Norms, harmonics, low modes

struct SobolevNorms {
  double l2_sq;
  double grad_l2_sq;
  double sup_u;       // grid maxima: lower bounds of the true sups
  double sup_grad;
  double sup_hess;

  double w2inf_estimate() const { return std::max({sup_u, sup_grad, sup_hess}); }
};

inline SobolevNorms sobolev_norms(const RadialField& u, const QuadratureGrid& grid) {
  SobolevNorms out{0.0, 0.0, 0.0, 0.0, 0.0};
  std::vector<double> v2(grid.nodes.size()), g2(grid.nodes.size());
  for (std::size_t i = 0; i < grid.nodes.size(); ++i) {
    const Jet j = jet(u, frame_at(grid.nodes[i]));
    v2[i] = j.value * j.value;
    g2[i] = j.gradient.squaredNorm();
    out.sup_u = std::max(out.sup_u, std::abs(j.value));
    out.sup_grad = std::max(out.sup_grad, j.gradient.norm());
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(j.hessian, Eigen::EigenvaluesOnly);
    out.sup_hess = std::max(
        {out.sup_hess, std::abs(es.eigenvalues().minCoeff()), std::abs(es.eigenvalues().maxCoeff())});
  }
  out.l2_sq = grid.integrate(v2);
  out.grad_l2_sq = grid.integrate(g2);
  return out;
}

inline int harmonic_space_dimension(int n, int l) {
  if (l == 0) return 1;
  const int dim = n + 1;
  auto homog = [&](int d) {
    return d < 0 ? 0 : int(std::lround(binomial(dim + d - 1, d)));
  };
  return homog(l) - homog(l - 2);
}

// L2-orthonormal basis of degree-l spherical harmonics: kernel of the ambient
// Laplacian on homogeneous degree-l polynomials, then Cholesky
// orthonormalization of the quadrature Gram matrix.
inline std::vector<RadialField> harmonic_basis(int n, int l, const QuadratureGrid& grid) {
  if (l < 0) throw invalid_input("harmonic degree must be non-negative");
  const int dim = n + 1;
  const double wn = sphere_area(n);
  if (l == 0) {
    AmbientPolynomial p(dim);
    p.add_term(1.0 / std::sqrt(wn), std::vector<int>(std::size_t(dim), 0));
    return {RadialField(p, n)};
  }

  // homogeneous degree-l monomials, lexicographic
  std::vector<std::vector<int>> monos;
  std::vector<int> alpha(std::size_t(dim), 0);
  std::function<void(int, int)> rec = [&](int pos, int remaining) {
    if (pos == dim - 1) {
      alpha[std::size_t(pos)] = remaining;
      monos.push_back(alpha);
      return;
    }
    for (int e = remaining; e >= 0; --e) {
      alpha[std::size_t(pos)] = e;
      rec(pos + 1, remaining - e);
    }
    alpha[std::size_t(pos)] = 0;
  };
  rec(0, l);

  std::map<std::vector<int>, int> lower_index;
  std::vector<std::vector<int>> lower;
  std::vector<int> beta(std::size_t(dim), 0);
  std::function<void(int, int)> rec2 = [&](int pos, int remaining) {
    if (pos == dim - 1) {
      beta[std::size_t(pos)] = remaining;
      lower_index[beta] = int(lower.size());
      lower.push_back(beta);
      return;
    }
    for (int e = remaining; e >= 0; --e) {
      beta[std::size_t(pos)] = e;
      rec2(pos + 1, remaining - e);
    }
    beta[std::size_t(pos)] = 0;
  };
  rec2(0, l - 2);

  Eigen::MatrixXd lap = Eigen::MatrixXd::Zero(int(lower.size()), int(monos.size()));
  for (std::size_t c = 0; c < monos.size(); ++c)
    for (int i = 0; i < dim; ++i)
      if (monos[c][std::size_t(i)] >= 2) {
        auto e = monos[c];
        e[std::size_t(i)] -= 2;
        lap(lower_index.at(e), int(c)) +=
            double(monos[c][std::size_t(i)]) * double(monos[c][std::size_t(i)] - 1);
      }

  Eigen::FullPivLU<Eigen::MatrixXd> lu(lap);
  Eigen::MatrixXd kernel = lu.kernel();
  const int hdim = harmonic_space_dimension(n, l);
  if (int(kernel.cols()) != hdim)
    throw solver_error("harmonic kernel dimension mismatch");

  std::vector<RadialField> raw;
  raw.reserve(std::size_t(hdim));
  for (int c = 0; c < hdim; ++c) {
    AmbientPolynomial p(dim);
    for (std::size_t m = 0; m < monos.size(); ++m)
      if (kernel(int(m), c) != 0.0) p.add_term(kernel(int(m), c), monos[m]);
    p.canonicalize();
    raw.emplace_back(std::move(p), n);
  }

  // Gram matrix under the quadrature inner product
  std::vector<std::vector<double>> vals(static_cast<std::size_t>(hdim));
  for (int c = 0; c < hdim; ++c) {
    vals[std::size_t(c)].resize(grid.nodes.size());
    for (std::size_t i = 0; i < grid.nodes.size(); ++i)
      vals[std::size_t(c)][i] = raw[std::size_t(c)].value(grid.nodes[i]);
  }
  Eigen::MatrixXd gram(hdim, hdim);
  for (int a = 0; a < hdim; ++a)
    for (int b = a; b < hdim; ++b) {
      std::vector<double> prod(grid.nodes.size());
      for (std::size_t i = 0; i < grid.nodes.size(); ++i)
        prod[i] = vals[std::size_t(a)][i] * vals[std::size_t(b)][i];
      gram(a, b) = gram(b, a) = grid.integrate(prod);
    }
  Eigen::LLT<Eigen::MatrixXd> llt(gram);
  if (llt.info() != Eigen::Success)
    throw solver_error("harmonic Gram matrix is rank deficient");
  // B L^{-T} is orthonormal when G = L L^T
  Eigen::MatrixXd linv_t =
      llt.matrixL().solve(Eigen::MatrixXd::Identity(hdim, hdim)).transpose();

  std::vector<RadialField> out;
  out.reserve(std::size_t(hdim));
  for (int c = 0; c < hdim; ++c) {
    AmbientPolynomial p(dim);
    for (int b = 0; b < hdim; ++b)
      if (linv_t(b, c) != 0.0) p += linv_t(b, c) * raw[std::size_t(b)].poly;
    p.canonicalize();
    out.emplace_back(std::move(p), n);
  }
  return out;
}

struct LowModes {
  double a0;
  Eigen::VectorXd a1;  // n+1 entries, coordinate-direction degree-1 harmonics
};

inline LowModes low_mode_coefficients(const RadialField& u, const QuadratureGrid& grid) {
  const int n = u.n;
  const double wn = sphere_area(n);
  const double y1norm = std::sqrt(double(n + 1) / wn);
  std::vector<double> uv(grid.nodes.size());
  for (std::size_t i = 0; i < grid.nodes.size(); ++i) uv[i] = u.value(grid.nodes[i]);
  LowModes out;
  out.a0 = grid.integrate(uv) / std::sqrt(wn);
  out.a1 = Eigen::VectorXd::Zero(n + 1);
  for (int c = 0; c <= n; ++c) {
    std::vector<double> p(grid.nodes.size());
    for (std::size_t i = 0; i < grid.nodes.size(); ++i)
      p[i] = uv[i] * grid.nodes[i][c] * y1norm;
    out.a1[c] = grid.integrate(p);
  }
  return out;
}

// ---------------------------------------------------------------------------
// Hessian integral identities

struct IdentityEntry {
  int identity;                     // 1, 2, 4, 5 in the order stated below
  int m;                            // symmetric-function order used
  std::array<double, 4> residuals;  // at scales t = 10^{-1}, 10^{-1.5}, 10^{-2}, 10^{-2.5}
  double slope;                     // least-squares log-log slope
  bool at_floor;                    // all residuals below the rounding floor
};

struct IdentityReport {
  double sigma1_integral_abs;  // |int sigma_1(D^2 u) dA|, exact identity
  std::vector<IdentityEntry> entries;
};

// Residuals of the integral identities relating Hessian symmetric functions:
//   (1) int u^i u_j [T_m]_i^j = (m+2)/2 int |grad u|^2 sigma_m        (m >= 1)
//   (2) int sigma_m            = (n-m+1)/2 int |grad u|^2 sigma_{m-2} (m >= 2)
//   (3) int sigma_1            = 0
//   (4) int u sigma_m          = -(m+1)/(2m) int |grad u|^2 sigma_{m-1} (m >= 1)
//   (5) int u^2 sigma_m        = O(eps) |grad u|^2                     (m >= 1)
// all taken of D^2 u. Several low-order cases hold exactly (divergence
// theorem / Bochner), in which case the residual parks at the rounding floor
// and the slope is reported as +inf with at_floor set.
inline IdentityReport hessian_integral_identities(const RadialField& u,
                                                  const QuadratureGrid& grid) {
  const int n = u.n;
  static constexpr std::array<double, 4> ladder = {1e-1, 0.0316227766016838,
                                                   1e-2, 0.00316227766016838};

  std::vector<Jet> jets(grid.nodes.size());
  for (std::size_t i = 0; i < grid.nodes.size(); ++i)
    jets[i] = jet(u, frame_at(grid.nodes[i]));

  auto integral = [&](auto&& node_fn) {
    std::vector<double> vals(grid.nodes.size());
    for (std::size_t i = 0; i < grid.nodes.size(); ++i) vals[i] = node_fn(jets[i]);
    return grid.integrate(vals);
  };
  // sigma_m and T_m scale homogeneously in t, so one jet pass serves the
  // whole ladder
  auto sigma_m_of_t = [&](const Jet& j, int m, double t) {
    if (m == 0) return 1.0;
    return symmpoly::elementary_symmetric_matrix(Eigen::MatrixXd(t * j.hessian))[std::size_t(m)];
  };

  IdentityReport report;
  report.sigma1_integral_abs =
      std::abs(integral([&](const Jet& j) { return j.hessian.trace(); }));

  struct Spec {
    int identity;
    int m;
  };
  std::vector<Spec> specs;
  specs.push_back({1, 1});
  if (n >= 2) specs.push_back({1, 2});
  specs.push_back({2, 2});
  if (n >= 3) specs.push_back({2, 3});
  specs.push_back({4, 1});
  if (n >= 2) specs.push_back({4, 2});
  specs.push_back({5, 1});

  for (const Spec& s : specs) {
    IdentityEntry e{};
    e.identity = s.identity;
    e.m = s.m;
    double scale_max = 0.0;
    for (std::size_t ti = 0; ti < ladder.size(); ++ti) {
      const double t = ladder[ti];
      double lhs = 0.0, rhs = 0.0;
      switch (s.identity) {
        case 1:
          lhs = integral([&](const Jet& j) {
            const Eigen::MatrixXd tm =
                symmpoly::newton_operator(Eigen::MatrixXd(t * j.hessian), s.m);
            return t * t * j.gradient.dot(tm * j.gradient);
          });
          rhs = 0.5 * (s.m + 2) * integral([&](const Jet& j) {
                  return t * t * j.gradient.squaredNorm() * sigma_m_of_t(j, s.m, t);
                });
          break;
        case 2:
          lhs = integral([&](const Jet& j) { return sigma_m_of_t(j, s.m, t); });
          rhs = 0.5 * (n - s.m + 1) * integral([&](const Jet& j) {
                  return t * t * j.gradient.squaredNorm() * sigma_m_of_t(j, s.m - 2, t);
                });
          break;
        case 4:
          lhs = integral(
              [&](const Jet& j) { return t * j.value * sigma_m_of_t(j, s.m, t); });
          rhs = -0.5 * (s.m + 1) / double(s.m) * integral([&](const Jet& j) {
                  return t * t * j.gradient.squaredNorm() * sigma_m_of_t(j, s.m - 1, t);
                });
          break;
        case 5:
          lhs = integral([&](const Jet& j) {
            return t * t * j.value * j.value * sigma_m_of_t(j, s.m, t);
          });
          rhs = 0.0;
          break;
        default:
          throw invalid_input("unknown identity id");
      }
      e.residuals[ti] = std::abs(lhs - rhs);
      scale_max = std::max({scale_max, std::abs(lhs), std::abs(rhs)});
    }
    const double floor = 1e-13 * (1.0 + scale_max);
    e.at_floor = *std::max_element(e.residuals.begin(), e.residuals.end()) <= floor;
    if (e.at_floor) {
      e.slope = std::numeric_limits<double>::infinity();
    } else {
      double sx = 0, sy = 0, sxx = 0, sxy = 0;
      for (std::size_t ti = 0; ti < ladder.size(); ++ti) {
        const double lx = std::log(ladder[ti]);
        const double ly = std::log(std::max(e.residuals[ti], 1e-300));
        sx += lx;
        sy += ly;
        sxx += lx * lx;
        sxy += lx * ly;
      }
      const double m = double(ladder.size());
      e.slope = (m * sxy - sx * sy) / (m * sxx - sx * sx);
    }
    report.entries.push_back(e);
  }
  return report;
}

}  // namespace sfq
