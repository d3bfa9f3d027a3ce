#pragma once

#include <cmath>
#include <vector>

#include "sfq/hypersurface.hpp"

namespace sfq {

namespace detail {

// one jet pass per node: sigma_k (closed form) times the area element
inline std::vector<double> sigma_density(const NearlySphericalSurface& s, int k,
                                         Weight const* weight) {
  const int n = s.n;
  std::vector<double> vals(s.grid.nodes.size());
  for (std::size_t i = 0; i < s.grid.nodes.size(); ++i) {
    const JetFrame frame = frame_at(s.grid.nodes[i]);
    const Jet j = jet(s.u, frame);
    const double r = s.rho * (1.0 + j.value);
    const double p = s.form.phi(r), pp = s.form.phi_prime(r);
    const double rho = s.rho;
    const double d = std::sqrt(p * p + rho * rho * j.gradient.squaredNorm());
    double sigma = 1.0;
    if (k > 0) {
      const std::vector<double> sig = symmpoly::elementary_symmetric_matrix(j.hessian);
      sigma = 0.0;
      for (int m = 0; m <= k; ++m) {
        const double front = ((m % 2) ? -1.0 : 1.0) * std::pow(pp, k - m) /
                             (std::pow(d, k + 2) * std::pow(p, m)) *
                             binomial(n - m, k - m) * std::pow(rho, m);
        double bracket = p * p * sig[std::size_t(m)];
        if (m < n) {
          const Eigen::MatrixXd tm = symmpoly::newton_operator(j.hessian, m);
          bracket += double(k + n - 2 * m) / double(n - m) * rho * rho *
                     j.gradient.dot(tm * j.gradient);
        }
        sigma += front * bracket;
      }
    }
    vals[i] = sigma * std::pow(p, n - 1) * d;
    if (weight) vals[i] *= s.form.weight(*weight, r);
  }
  return vals;
}

}  // namespace detail

// Vol(Omega) by the exact radial antiderivative under the quadrature.
inline double volume(const NearlySphericalSurface& s) {
  std::vector<double> vals(s.grid.nodes.size());
  for (std::size_t i = 0; i < s.grid.nodes.size(); ++i)
    vals[i] = s.form.phi_power_integral(s.n, s.radius_at(s.grid.nodes[i]));
  return s.grid.integrate(vals);
}

// int_M sigma_k dmu
inline double curvature_integral(const NearlySphericalSurface& s, int k) {
  if (k < 0 || k > s.n) throw invalid_input("curvature index out of range");
  return s.grid.integrate(detail::sigma_density(s, k, nullptr));
}

// int_M Psi(r) sigma_k dmu with Psi = Phi or phi'
inline double weighted_integral(const NearlySphericalSurface& s, int k, Weight w) {
  if (k < 0 || k > s.n) throw invalid_input("curvature index out of range");
  return s.grid.integrate(detail::sigma_density(s, k, &w));
}

// Quermassintegral A_k(Omega) through the recursion
//   A_{-1} = Vol, A_0 = area, A_1 = int sigma_1 + K n Vol,
//   A_k = int sigma_k + K (n-k+1)/(k-1) A_{k-2}.
inline double quermass(const NearlySphericalSurface& s, int k) {
  if (k < -1 || k > s.n) throw invalid_input("quermass index out of range");
  if (k == -1) return volume(s);
  if (k == 0) return curvature_integral(s, 0);
  if (k == 1)
    return curvature_integral(s, 1) + s.form.curvature * double(s.n) * volume(s);
  return curvature_integral(s, k) +
         s.form.curvature * double(s.n - k + 1) / double(k - 1) * quermass(s, k - 2);
}

struct DeficitReport {
  int k;
  int j;
  double quermass_k;
  double matched_radius;
  double deficit;
};

// (k,j)-isoperimetric deficit: A_k(Omega) - psi_k(rho_j), rho_j matched so the
// centered ball shares A_j with Omega.
inline DeficitReport deficit(const NearlySphericalSurface& s, int k, int j) {
  const int kmax = s.form.curvature == 0 ? s.n : s.n - 1;
  if (!(-1 <= j && j < k && k <= kmax))
    throw invalid_input("deficit indices out of range");
  DeficitReport rep;
  rep.k = k;
  rep.j = j;
  rep.quermass_k = quermass(s, k);
  rep.matched_radius = ball_radius_from_quermass(s.form, s.n, j, quermass(s, j));
  rep.deficit = rep.quermass_k - ball_quermass(s.form, s.n, k, rep.matched_radius);
  return rep;
}

}  // namespace sfq
