#pragma once

#include <array>
#include <cmath>
#include <map>

#include "sfq/spaceform.hpp"

namespace sfq {

// Quadratic model of a surface functional around the centered ball:
//   value ~ omega_n c0 + cu int u + cu2 int u^2 + cg2 int |grad u|^2,
// remainder O(eps)(|u|^2 + |grad u|^2). All rho-powers are folded into the
// coefficients, so callers supply raw moments of u over S^n.
struct QuadraticFunctionalCoefficients {
  double c0 = 0.0;
  double cu = 0.0;
  double cu2 = 0.0;
  double cg2 = 0.0;

  double evaluate(int n, double int_u, double int_u2, double int_g2) const {
    return sphere_area(n) * c0 + cu * int_u + cu2 * int_u2 + cg2 * int_g2;
  }
};

namespace detail {

// Linear combination of Phi^e phi'^a phi^b with exact symbolic differentiation
// through the warp identities Phi' = phi, phi'' = -K phi, (phi')' = -K phi.
class WarpedExpression {
 public:
  static WarpedExpression term(double c, int e, int a, int b) {
    WarpedExpression w;
    w.terms_[{e, a, b}] = c;
    return w;
  }

  WarpedExpression derivative(int K) const {
    WarpedExpression out;
    for (const auto& [key, c] : terms_) {
      const auto [e, a, b] = key;
      if (e != 0) out.add(c * e, e - 1, a, b + 1);
      if (a != 0) out.add(-c * a * K, e, a - 1, b + 1);
      if (b != 0) out.add(c * b, e, a + 1, b - 1);
    }
    return out;
  }

  double eval(const SpaceForm& form, double r) const {
    double s = 0.0;
    for (const auto& [key, c] : terms_) {
      const auto [e, a, b] = key;
      s += c * std::pow(form.big_phi(r), e) * std::pow(form.phi_prime(r), a) *
           std::pow(form.phi(r), b);
    }
    return s;
  }

 private:
  void add(double c, int e, int a, int b) { terms_[{e, a, b}] += c; }
  std::map<std::array<int, 3>, double> terms_;
};

}  // namespace detail

// Taylor blocks of the sigma_k surface-integral density at order m: the
// coefficients of sigma_m(Hess u) and of the Newton-tensor contraction in the
// expansion around u = |grad u|^2 = 0. a0/a1/a2 multiply 1, u, u^2; a_grad
// multiplies |grad u|^2 sigma_m; b multiplies u^i u_j [T_m]_i^j.
struct TaylorBlocks {
  double a0;
  double a1;
  double a2;
  double a_grad;
  double b;
};

inline TaylorBlocks taylor_blocks(int n, int k, int m, double rho, int K) {
  if (!(0 <= m && m <= k && k <= n)) throw invalid_input("taylor block indices out of range");
  const SpaceForm form(K);
  form.check_radius(rho);
  const double sign = (m % 2) ? -1.0 : 1.0;
  const double c = binomial(n - m, k - m);
  // the density carries phi'^{k-m} phi^{n-m+1} / D^{k+1}; at |grad u|^2 = 0
  // the D-power collapses onto phi, leaving phi'^{k-m} phi^{n-m-k}
  const auto f = detail::WarpedExpression::term(1.0, 0, k - m, n - m - k);
  const auto f1 = f.derivative(K);
  const auto f2 = f1.derivative(K);
  TaylorBlocks tb;
  tb.a0 = sign * c * std::pow(rho, m) * f.eval(form, rho);
  tb.a1 = sign * c * std::pow(rho, m + 1) * f1.eval(form, rho);
  tb.a2 = 0.5 * sign * c * std::pow(rho, m + 2) * f2.eval(form, rho);
  const double base = std::pow(form.phi_prime(rho), k - m) *
                      std::pow(form.phi(rho), n - m - k - 2);
  tb.a_grad = -sign * std::pow(rho, m + 2) * 0.5 * (k + 1) * c * base;
  tb.b = (m == n) ? 0.0
                  : sign * std::pow(rho, m + 2) * c *
                        double(k + n - 2 * m) / double(n - m) * base;
  return tb;
}

namespace detail {

// weighted variant: the u-dependent part of the density is multiplied by
// Psi(rho(1+u)); the |grad u|^2-slot blocks only pick up Psi(rho)
inline TaylorBlocks weighted_blocks(int n, int k, int m, double rho, int K,
                                    const Weight* w) {
  TaylorBlocks tb = taylor_blocks(n, k, m, rho, K);
  if (!w) return tb;
  const SpaceForm form(K);
  const double sign = (m % 2) ? -1.0 : 1.0;
  const double c = binomial(n - m, k - m);
  const auto g = (*w == Weight::Phi)
                     ? WarpedExpression::term(1.0, 1, k - m, n - m - k)
                     : WarpedExpression::term(1.0, 0, k - m + 1, n - m - k);
  const auto g1 = g.derivative(K);
  const auto g2 = g1.derivative(K);
  tb.a0 = sign * c * std::pow(rho, m) * g.eval(form, rho);
  tb.a1 = sign * c * std::pow(rho, m + 1) * g1.eval(form, rho);
  tb.a2 = 0.5 * sign * c * std::pow(rho, m + 2) * g2.eval(form, rho);
  const double psi = form.weight(*w, rho);
  tb.a_grad *= psi;
  tb.b *= psi;
  return tb;
}

// The integral identities on the sphere collapse the block expansion onto
// four scalar moments: c0 = A_0^0, cu = A_1^0, cu2 = A_2^0 and
// cg2 = A^0 + B^0 - A_1^1 + (n-1)/2 A_0^2.
inline QuadraticFunctionalCoefficients combine_blocks(int n, int k, double rho, int K,
                                                      const Weight* w) {
  const TaylorBlocks m0 = weighted_blocks(n, k, 0, rho, K, w);
  QuadraticFunctionalCoefficients q;
  q.c0 = m0.a0;
  q.cu = m0.a1;
  q.cu2 = m0.a2;
  q.cg2 = m0.a_grad + m0.b;
  if (k >= 1) q.cg2 -= weighted_blocks(n, k, 1, rho, K, w).a1;
  if (k >= 2) q.cg2 += 0.5 * (n - 1) * weighted_blocks(n, k, 2, rho, K, w).a0;
  return q;
}

}  // namespace detail

// Quadratic model of int_M sigma_k dmu.
inline QuadraticFunctionalCoefficients expansion_sigma_integral(int n, int k, double rho,
                                                                int K) {
  if (k < 0 || k > n) throw invalid_input("curvature index out of range");
  return detail::combine_blocks(n, k, rho, K, nullptr);
}

// Quadratic model of int_M Psi(r) sigma_k dmu.
inline QuadraticFunctionalCoefficients expansion_weighted(int n, int k, double rho, int K,
                                                          Weight w) {
  if (k < 0 || k > n) throw invalid_input("curvature index out of range");
  return detail::combine_blocks(n, k, rho, K, &w);
}

// Quadratic model of A_k(Omega) - A_k(ball of radius rho); k = -1 is the
// volume difference.
inline QuadraticFunctionalCoefficients expansion_quermass_diff(int n, int k, double rho,
                                                               int K) {
  if (k < -1 || k > n) throw invalid_input("quermass index out of range");
  const SpaceForm form(K);
  form.check_radius(rho);
  const double p = form.phi(rho), pp = form.phi_prime(rho);
  QuadraticFunctionalCoefficients q;
  q.c0 = 0.0;
  if (k == -1) {
    q.cu = std::pow(p, n) * rho;
    q.cu2 = 0.5 * n * std::pow(p, n - 1) * pp * rho * rho;
    q.cg2 = 0.0;
    return q;
  }
  const double c = binomial(n, k);
  q.cu = c * (n - k) * std::pow(p, n - k - 1) * std::pow(pp, k + 1) * rho;
  q.cu2 = c *
          (0.5 * (n - k) * (n - k - 1) * std::pow(p, n - k - 2) * std::pow(pp, k + 2) -
           0.5 * K * (n - k) * (k + 1) * std::pow(p, n - k) * std::pow(pp, k)) *
          rho * rho;
  q.cg2 = c * (n - k) * (k + 1) / (2.0 * n) * std::pow(p, n - k - 2) * std::pow(pp, k) *
          rho * rho;
  return q;
}

// int u predicted by the constraint A_j(Omega) = A_j(ball rho) (volume match
// at j = -1), given the measured quadratic moments of u.
inline double mean_constraint_relation(int n, int j, double rho, int K, double int_u2,
                                       double int_g2) {
  if (j < -1 || j > n - 1) throw invalid_input("constraint index out of range");
  const SpaceForm form(K);
  form.check_radius(rho);
  const double p = form.phi(rho), pp = form.phi_prime(rho);
  if (j == -1) return -0.5 * n * (pp / p) * rho * int_u2;
  return -(0.5 * (n - j - 1) * (pp / p) - 0.5 * K * (j + 1) * (p / pp)) * rho * int_u2 -
         double(j + 1) / (2.0 * n) * rho / (p * pp) * int_g2;
}

enum class Theorem { T11, T12, T13Phi, T13PhiPrime, VWLower, VWAlpha };

// The constant multiplying the squared asymmetry (or the norm bound for
// VWLower) in the corresponding stability statement.
inline double stability_constant(Theorem t, int n, int k, int j, double rho, int K) {
  const SpaceForm form(K);
  form.check_radius(rho);
  const double wn = sphere_area(n);
  const double p = form.phi(rho), pp = form.phi_prime(rho);
  auto require = [](bool ok, const char* msg) {
    if (!ok) throw invalid_input(msg);
  };
  switch (t) {
    case Theorem::T11:
      require(K == -1 || K == 1, "curved space form required");
      require(0 <= k && k <= n - 1 && -1 <= j && j < k, "index range violation");
      return n * (n - k) * (k - j) / (4.0 * wn) * binomial(n, k) * std::pow(pp, k) /
             std::pow(p, n + k + 2);
    case Theorem::T12:
      require(K == 0, "flat space form required");
      require(0 <= k && k <= n && -1 <= j && j < k, "index range violation");
      return n * ((n - k + 2) * (k - j) + 2 * k - 2) / (4.0 * (n + 1) * (n + 1));
    case Theorem::T13Phi:
      require(K == -1, "hyperbolic space form required");
      require(0 <= k && k <= n - 1 && -1 <= j && j < k, "index range violation");
      return n * (n - k) * (k - j) / (4.0 * wn) * binomial(n, k) * std::pow(pp, k - 2) *
             form.big_phi(rho) / std::pow(p, n + k + 2);
    case Theorem::T13PhiPrime:
      require(K == -1, "hyperbolic space form required");
      require(0 <= k && k <= n - 1 && -1 <= j && j < k, "index range violation");
      return n * (n - k) * (k - j) / (4.0 * wn) * binomial(n, k) * std::pow(pp, k + 1) /
             std::pow(p, n + k + 2);
    case Theorem::VWLower:
      require(K == 0, "flat space form required");
      require(1 <= k && k <= n - 1 && 0 <= j && j < k, "index range violation");
      return binomial(n, k) * (n - k) * (k - j) / (2.0 * n);
    case Theorem::VWAlpha:
      require(K == 0, "flat space form required");
      require(1 <= k && k <= n - 1 && 0 <= j && j < k, "index range violation");
      return n * (n - k) * (k - j) / (4.0 * (n + 1) * (n + 1));
  }
  throw invalid_input("unknown theorem id");
}

// Coefficients of |u|^2 and |grad u|^2 in the constraint-reduced weighted
// expansions: C1, C2 belong to the Phi weight, C3, C4 to the phi' weight.
struct WeightedStabilityCoefficients {
  double c1;
  double c2;
  double c3;
  double c4;
};

inline WeightedStabilityCoefficients weighted_stability_coefficients(int n, int k, int j,
                                                                     double rho, int K) {
  if (!(0 <= k && k <= n && -1 <= j && j < k))
    throw invalid_input("index range violation");
  const SpaceForm form(K);
  form.check_radius(rho);
  const double c = binomial(n, k);
  const double p = form.phi(rho), pp = form.phi_prime(rho), P = form.big_phi(rho);
  const double r2 = rho * rho;
  WeightedStabilityCoefficients w;
  w.c1 = c *
         ((0.5 * (n - k) * (j - k) * std::pow(p, n - k - 2) * std::pow(pp, k) +
           0.5 * K * k * (k - j - 2) * std::pow(p, n - k) * std::pow(pp, k - 2)) *
              P +
          0.5 * (n + 1) * std::pow(p, n - k) * std::pow(pp, k + 1) +
          (0.5 * (j + 1) - k) * std::pow(p, n - k) * std::pow(pp, k - 1)) *
         r2;
  w.c2 = c *
         ((0.5 * (n - k) * (k - j) / n * std::pow(p, n - k - 2) * std::pow(pp, k) -
           0.5 * K * k * (k - j - 2) / n * std::pow(p, n - k) * std::pow(pp, k - 2)) *
              P +
          0.5 * (2 * k - j - 1) / n * std::pow(p, n - k) * std::pow(pp, k - 1)) *
         r2;
  w.c3 = c *
         (0.5 * (n - k) * (j - k) * std::pow(p, n - k - 2) * std::pow(pp, k + 1) -
          0.5 * K * (1 + n) * std::pow(p, n - k) * std::pow(pp, k + 1) +
          0.5 * K * (k + 1) * (k - j - 1) * std::pow(p, n - k) * std::pow(pp, k - 1)) *
         r2;
  w.c4 = c *
         (0.5 * (n - k) * (k - j) / n * std::pow(p, n - k - 2) * std::pow(pp, k + 1) -
          0.5 * K * (k + 1) * (k - j - 1) / n * std::pow(p, n - k) * std::pow(pp, k - 1)) *
         r2;
  return w;
}

inline std::pair<double, double> stability_coefficient_C2_C4(int n, int k, int j,
                                                             double rho) {
  const WeightedStabilityCoefficients w = weighted_stability_coefficients(n, k, j, rho, -1);
  return {w.c2, w.c4};
}

// positivity facts used by the hyperbolic weighted-stability proofs, exposed
// as checkable predicates rather than assumed
inline bool c1_plus_n_c2_nonnegative(int n, int k, int j, double rho) {
  const WeightedStabilityCoefficients w = weighted_stability_coefficients(n, k, j, rho, -1);
  return w.c1 + n * w.c2 >= -1e-12 * (std::abs(w.c1) + n * std::abs(w.c2));
}
inline bool c3_plus_n_c4_nonnegative(int n, int k, int j, double rho) {
  const WeightedStabilityCoefficients w = weighted_stability_coefficients(n, k, j, rho, -1);
  return w.c3 + n * w.c4 >= -1e-12 * (std::abs(w.c3) + n * std::abs(w.c4));
}

}  // namespace sfq
