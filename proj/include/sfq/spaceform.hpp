#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <limits>
#include <numbers>

#include "sfq/common.hpp"
#include "sfq/hyperdual.hpp"

namespace sfq {

enum class Weight { Phi, PhiPrime };

// Simply connected space form of curvature K in {-1, 0, +1}, together with
// the warp functions of its polar metric and exact geodesic-ball quantities.
// For K = +1 every radial argument lives in [0, pi/2).
struct SpaceForm {
  int curvature = 0;  // K

  explicit SpaceForm(int K) : curvature(K) {
    if (K != -1 && K != 0 && K != 1) throw invalid_input("curvature must be -1, 0 or +1");
  }

  double max_radius() const {
    return curvature == 1 ? std::numbers::pi / 2 : std::numeric_limits<double>::infinity();
  }

  void check_radius(double r) const {
    if (!(r >= 0.0)) throw domain_error("radius must be non-negative");
    if (curvature == 1 && r >= std::numbers::pi / 2)
      throw domain_error("radius must stay below pi/2 on the sphere");
  }

  double phi(double r) const {
    check_radius(r);
    switch (curvature) {
      case 0: return r;
      case 1: return std::sin(r);
      default: return std::sinh(r);
    }
  }
  double phi_prime(double r) const {
    check_radius(r);
    switch (curvature) {
      case 0: return 1.0;
      case 1: return std::cos(r);
      default: return std::cosh(r);
    }
  }
  // Phi(r) = int_0^r phi, the radial potential; Phi(0) = 0, Phi' = phi.
  double big_phi(double r) const {
    check_radius(r);
    switch (curvature) {
      case 0: return 0.5 * r * r;
      case 1: return 1.0 - std::cos(r);
      default: return std::cosh(r) - 1.0;
    }
  }
  double weight(Weight w, double r) const {
    return w == Weight::Phi ? big_phi(r) : phi_prime(r);
  }

  HyperDual phi(const HyperDual& r) const {
    check_radius(r.v);
    switch (curvature) {
      case 0: return r;
      case 1: return sin(r);
      default: return sinh(r);
    }
  }
  HyperDual phi_prime(const HyperDual& r) const {
    check_radius(r.v);
    switch (curvature) {
      case 0: return HyperDual(1.0);
      case 1: return cos(r);
      default: return cosh(r);
    }
  }
  HyperDual big_phi(const HyperDual& r) const {
    check_radius(r.v);
    switch (curvature) {
      case 0: return 0.5 * r * r;
      case 1: return HyperDual(1.0) - cos(r);
      default: return cosh(r) - HyperDual(1.0);
    }
  }
  HyperDual weight(Weight w, const HyperDual& r) const {
    return w == Weight::Phi ? big_phi(r) : phi_prime(r);
  }

  // F_n(r) = int_0^r phi^n(s) ds by the exact power-reduction recurrence for
  // sin/sinh; removes a quadrature tolerance source under every volume.
  double phi_power_integral(int n, double r) const {
    check_radius(r);
    if (n < 0) throw invalid_input("negative power");
    if (curvature == 0) return std::pow(r, n + 1) / double(n + 1);
    if (n == 0) return r;
    if (curvature == -1) {
      if (n == 1) return std::cosh(r) - 1.0;
      const double s = std::sinh(r), c = std::cosh(r);
      return (std::pow(s, n - 1) * c - (n - 1) * phi_power_integral(n - 2, r)) / double(n);
    }
    if (n == 1) return 1.0 - std::cos(r);
    const double s = std::sin(r), c = std::cos(r);
    return (-std::pow(s, n - 1) * c + (n - 1) * phi_power_integral(n - 2, r)) / double(n);
  }

  // G_n(r) = int_0^r s phi^n(s) ds, needed by the barycenter condition.
  double radial_moment_integral(int n, double r) const {
    check_radius(r);
    if (n < 0) throw invalid_input("negative power");
    if (curvature == 0) return std::pow(r, n + 2) / double(n + 2);
    if (n == 0) return 0.5 * r * r;
    if (curvature == -1) {
      if (n == 1) return r * std::cosh(r) - std::sinh(r);
      const double s = std::sinh(r), c = std::cosh(r);
      return (r * std::pow(s, n - 1) * c - std::pow(s, n) / double(n) -
              (n - 1) * radial_moment_integral(n - 2, r)) /
             double(n);
    }
    if (n == 1) return std::sin(r) - r * std::cos(r);
    const double s = std::sin(r), c = std::cos(r);
    return ((n - 1) * radial_moment_integral(n - 2, r) - r * std::pow(s, n - 1) * c +
            std::pow(s, n) / double(n)) /
           double(n);
  }
};

// Warp functions (phi, phi', Phi) at radius r.
inline std::array<double, 3> warp(const SpaceForm& form, double r) {
  return {form.phi(r), form.phi_prime(r), form.big_phi(r)};
}

// Geodesic distance between polar points (r1, x1) and (r2, x2), by the law of
// cosines of the respective geometry. x1, x2 are unit vectors; cosg = x1.x2.
inline double geodesic_distance(const SpaceForm& form, double r1,
                                std::span<const double> x1, double r2,
                                std::span<const double> x2) {
  form.check_radius(r1);
  form.check_radius(r2);
  if (x1.size() != x2.size()) throw invalid_input("dimension mismatch");
  double cosg = 0.0;
  for (std::size_t i = 0; i < x1.size(); ++i) cosg += x1[i] * x2[i];
  cosg = std::clamp(cosg, -1.0, 1.0);
  switch (form.curvature) {
    case 0: {
      const double d2 = r1 * r1 + r2 * r2 - 2.0 * r1 * r2 * cosg;
      return std::sqrt(std::max(d2, 0.0));
    }
    case 1: {
      const double c = std::cos(r1) * std::cos(r2) + std::sin(r1) * std::sin(r2) * cosg;
      return std::acos(std::clamp(c, -1.0, 1.0));
    }
    default: {
      const double c = std::cosh(r1) * std::cosh(r2) - std::sinh(r1) * std::sinh(r2) * cosg;
      return std::acosh(std::max(c, 1.0));
    }
  }
}

// psi_k(rho): quermassintegral of the centered geodesic ball of radius rho,
// through the curvature-integral recursion. k ranges over [-1, n].
inline double ball_quermass(const SpaceForm& form, int n, int k, double rho) {
  if (n < 2) throw invalid_input("ambient dimension too small");
  if (k < -1 || k > n) throw invalid_input("quermass index out of range");
  form.check_radius(rho);
  const double wn = sphere_area(n);
  if (k == -1) return wn * form.phi_power_integral(n, rho);
  const double p = form.phi(rho), pp = form.phi_prime(rho);
  if (k == 0) return wn * std::pow(p, n);
  const double curv = wn * binomial(n, k) * std::pow(pp, k) * std::pow(p, n - k);
  if (k == 1) return curv + form.curvature * double(n) * ball_quermass(form, n, -1, rho);
  return curv + form.curvature * double(n - k + 1) / double(k - 1) *
                    ball_quermass(form, n, k - 2, rho);
}

// Weighted curvature integral of the centered ball: the integrand is constant
// on the sphere of radius rho.
inline double ball_weighted_integral(const SpaceForm& form, int n, int k, Weight w,
                                     double rho) {
  if (n < 2) throw invalid_input("ambient dimension too small");
  if (k < 0 || k > n) throw invalid_input("curvature index out of range");
  form.check_radius(rho);
  const double p = form.phi(rho), pp = form.phi_prime(rho);
  return sphere_area(n) * binomial(n, k) * std::pow(pp, k) * std::pow(p, n - k) *
         form.weight(w, rho);
}

// Inverse of rho -> psi_j(rho) on the admissible interval. Monotonicity is
// checked by sampling before bisection; a secant polish finishes the root.
inline double ball_radius_from_quermass(const SpaceForm& form, int n, int j,
                                        double target) {
  if (n < 2) throw invalid_input("ambient dimension too small");
  if (j < -1 || j > n) throw invalid_input("quermass index out of range");
  const double lo = 0.0;
  const double hi = form.curvature == 1 ? std::numbers::pi / 2 - 1e-6 : 50.0;
  auto psi = [&](double r) { return ball_quermass(form, n, j, r); };

  constexpr int samples = 64;
  double prev = psi(lo);
  for (int i = 1; i <= samples; ++i) {
    const double r = lo + (hi - lo) * double(i) / samples;
    const double v = psi(r);
    if (v <= prev) throw solver_error("psi_j is not strictly increasing on the interval");
    prev = v;
  }
  double a = lo, b = hi, fa = psi(a) - target, fb = psi(b) - target;
  if (fa > 0.0 || fb < 0.0) throw solver_error("target quermass value is unbracketed");
  for (int it = 0; it < 200 && b - a > 1e-16 * (1.0 + b); ++it) {
    const double mid = 0.5 * (a + b);
    const double fm = psi(mid) - target;
    (fm <= 0.0 ? a : b) = mid;
    (fm <= 0.0 ? fa : fb) = fm;
  }
  // one secant step sharpens the last bits
  double root = (fb != fa) ? a - fa * (b - a) / (fb - fa) : 0.5 * (a + b);
  if (!(root >= lo && root <= hi)) root = 0.5 * (a + b);
  if (std::abs(psi(root) - target) > std::abs(psi(0.5 * (a + b)) - target))
    root = 0.5 * (a + b);
  if (std::abs(psi(root) - target) > 1e-12 * (1.0 + std::abs(target)))
    throw solver_error("radius solve did not reach tolerance");
  return root;
}

}  // namespace sfq
