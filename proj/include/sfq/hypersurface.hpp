#pragma once

#include <Eigen/Dense>
#include <cmath>
#include <vector>

#include "sfq/spaceform.hpp"
#include "sfq/spherefield.hpp"
#include "sfq/symmpoly.hpp"

namespace sfq {

// Radial graph M = {(rho(1+u(x)), x)} over the geodesic sphere of radius rho.
// Stores its own grid copy; all tensors are expressed in per-node orthonormal
// frames of S^n, which keeps the coordinate expressions pole-free.
struct NearlySphericalSurface {
  SpaceForm form;
  int n;
  double rho;
  RadialField u;
  QuadratureGrid grid;
  double epsilon_hat;  // W^{2,inf} size estimate of u

  NearlySphericalSurface(SpaceForm f, double radius, RadialField field,
                         QuadratureGrid g)
      : form(f), n(field.n), rho(radius), u(std::move(field)), grid(std::move(g)),
        epsilon_hat(0.0) {
    if (!(rho > 0.0)) throw invalid_input("rho must be positive");
    if (grid.n != n) throw invalid_input("grid dimension does not match the field");
    double min_r = std::numeric_limits<double>::infinity();
    double max_r = 0.0;
    for (const auto& x : grid.nodes) {
      const double r = rho * (1.0 + u.value(x));
      min_r = std::min(min_r, r);
      max_r = std::max(max_r, r);
    }
    if (!(min_r > 0.0)) throw domain_error("surface radius vanishes somewhere");
    if (form.curvature == 1 && !(max_r < std::numbers::pi / 2))
      throw domain_error("surface leaves the admissible spherical chart");
    epsilon_hat = sobolev_norms(u, grid).w2inf_estimate();
  }

  double radius_at(const Eigen::VectorXd& x) const { return rho * (1.0 + u.value(x)); }
};

// g = phi(r)^2 I + rho^2 grad u grad u^T in the orthonormal frame.
inline Eigen::MatrixXd first_fundamental(const NearlySphericalSurface& s,
                                         const JetFrame& frame) {
  const Jet j = jet(s.u, frame);
  const double r = s.rho * (1.0 + j.value);
  const double p = s.form.phi(r);
  const Eigen::VectorXd v = s.rho * j.gradient;
  return p * p * Eigen::MatrixXd::Identity(s.n, s.n) + v * v.transpose();
}

// dmu = phi^{n-1} D dA with D^2 = phi^2 + rho^2 |grad u|^2.
inline double area_element(const NearlySphericalSurface& s, const JetFrame& frame) {
  const Jet j = jet(s.u, frame);
  const double r = s.rho * (1.0 + j.value);
  const double p = s.form.phi(r);
  const double d = std::sqrt(p * p + s.rho * s.rho * j.gradient.squaredNorm());
  return std::pow(p, s.n - 1) * d;
}

// h = (1/D)(2 phi' rho^2 grad u grad u^T + phi^2 phi' I - phi rho Hess u).
inline Eigen::MatrixXd second_fundamental(const NearlySphericalSurface& s,
                                          const JetFrame& frame) {
  const Jet j = jet(s.u, frame);
  const double r = s.rho * (1.0 + j.value);
  const double p = s.form.phi(r), pp = s.form.phi_prime(r);
  const Eigen::VectorXd v = s.rho * j.gradient;
  const double d = std::sqrt(p * p + v.squaredNorm());
  return (2.0 * pp * v * v.transpose() + p * p * pp * Eigen::MatrixXd::Identity(s.n, s.n) -
          p * s.rho * j.hessian) /
         d;
}

inline Eigen::MatrixXd weingarten(const NearlySphericalSurface& s,
                                  const JetFrame& frame) {
  const Eigen::MatrixXd g = first_fundamental(s, frame);
  const Eigen::MatrixXd h = second_fundamental(s, frame);
  return g.llt().solve(h);
}

// Principal curvatures, sorted ascending, via the symmetric-definite
// generalized eigenproblem h x = kappa g x.
inline std::vector<double> principal_curvatures(const NearlySphericalSurface& s,
                                                const JetFrame& frame) {
  const Eigen::MatrixXd g = first_fundamental(s, frame);
  const Eigen::MatrixXd h = second_fundamental(s, frame);
  Eigen::LLT<Eigen::MatrixXd> llt(g);
  if (llt.info() != Eigen::Success)
    throw domain_error("induced metric is not positive definite");
  Eigen::GeneralizedSelfAdjointEigenSolver<Eigen::MatrixXd> es(h, g,
                                                               Eigen::EigenvaluesOnly);
  if (es.info() != Eigen::Success) throw solver_error("principal curvature solve failed");
  return std::vector<double>(es.eigenvalues().data(),
                             es.eigenvalues().data() + s.n);
}

// sigma_k of the principal curvatures through the closed-form expansion in
// sigma_m(Hess u) and grad u-contractions of the Newton tensors: for each
// 0 <= m <= k the term
//   (-1)^m phi'^{k-m} / (D^{k+2} phi^m) C(n-m, k-m) rho^m
//     [ phi^2 sigma_m(Hess u)
//       + (k+n-2m)/(n-m) rho^2 u^i u_j [T_m]_i^j(Hess u) ],
// with the second bracket absent at m = n where T_n vanishes identically.
inline double sigma_k_closed(const NearlySphericalSurface& s, const JetFrame& frame,
                             int k) {
  if (k < 0 || k > s.n) throw invalid_input("sigma index out of range");
  if (k == 0) return 1.0;
  const Jet j = jet(s.u, frame);
  const int n = s.n;
  const double r = s.rho * (1.0 + j.value);
  const double p = s.form.phi(r), pp = s.form.phi_prime(r);
  const double rho = s.rho;
  const double d =
      std::sqrt(p * p + rho * rho * j.gradient.squaredNorm());
  const std::vector<double> sig = symmpoly::elementary_symmetric_matrix(j.hessian);

  double total = 0.0;
  for (int m = 0; m <= k; ++m) {
    const double front = ((m % 2) ? -1.0 : 1.0) * std::pow(pp, k - m) /
                         (std::pow(d, k + 2) * std::pow(p, m)) * binomial(n - m, k - m) *
                         std::pow(rho, m);
    double bracket = p * p * sig[std::size_t(m)];
    if (m < n) {
      const Eigen::MatrixXd tm = symmpoly::newton_operator(j.hessian, m);
      bracket += double(k + n - 2 * m) / double(n - m) * rho * rho *
                 j.gradient.dot(tm * j.gradient);
    }
    total += front * bracket;
  }
  return total;
}

}  // namespace sfq
