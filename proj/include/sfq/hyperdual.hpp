#pragma once

#include <cmath>

namespace sfq {

// Hyper-dual number carrying two independent first-order perturbations and
// their mixed second-order term: x = v + d1 e1 + d2 e2 + d12 e1 e2 with
// e1^2 = e2^2 = 0. Evaluating f(x + a e1 + b e2) yields the directional
// derivatives f'a, f'b and the bilinear Hessian term a^T H b exactly to
// rounding.
struct HyperDual {
  double v = 0.0;
  double d1 = 0.0;
  double d2 = 0.0;
  double d12 = 0.0;

  HyperDual() = default;
  HyperDual(double value) : v(value) {}
  HyperDual(double value, double g1, double g2, double g12)
      : v(value), d1(g1), d2(g2), d12(g12) {}
};

inline HyperDual operator+(const HyperDual& a, const HyperDual& b) {
  return {a.v + b.v, a.d1 + b.d1, a.d2 + b.d2, a.d12 + b.d12};
}
inline HyperDual operator-(const HyperDual& a, const HyperDual& b) {
  return {a.v - b.v, a.d1 - b.d1, a.d2 - b.d2, a.d12 - b.d12};
}
inline HyperDual operator-(const HyperDual& a) {
  return {-a.v, -a.d1, -a.d2, -a.d12};
}
inline HyperDual operator*(const HyperDual& a, const HyperDual& b) {
  return {a.v * b.v, a.d1 * b.v + a.v * b.d1, a.d2 * b.v + a.v * b.d2,
          a.d12 * b.v + a.d1 * b.d2 + a.d2 * b.d1 + a.v * b.d12};
}
inline HyperDual operator*(double s, const HyperDual& a) {
  return {s * a.v, s * a.d1, s * a.d2, s * a.d12};
}
inline HyperDual operator*(const HyperDual& a, double s) { return s * a; }

// Chain rule for a smooth scalar map with given first/second derivative.
inline HyperDual apply_unary(const HyperDual& a, double f, double fp,
                             double fpp) {
  return {f, fp * a.d1, fp * a.d2, fp * a.d12 + fpp * a.d1 * a.d2};
}

inline HyperDual inv(const HyperDual& a) {
  const double iv = 1.0 / a.v;
  return apply_unary(a, iv, -iv * iv, 2.0 * iv * iv * iv);
}
inline HyperDual operator/(const HyperDual& a, const HyperDual& b) {
  return a * inv(b);
}
inline HyperDual sqrt(const HyperDual& a) {
  const double s = std::sqrt(a.v);
  return apply_unary(a, s, 0.5 / s, -0.25 / (s * a.v));
}
inline HyperDual sin(const HyperDual& a) {
  return apply_unary(a, std::sin(a.v), std::cos(a.v), -std::sin(a.v));
}
inline HyperDual cos(const HyperDual& a) {
  return apply_unary(a, std::cos(a.v), -std::sin(a.v), -std::cos(a.v));
}
inline HyperDual sinh(const HyperDual& a) {
  return apply_unary(a, std::sinh(a.v), std::cosh(a.v), std::sinh(a.v));
}
inline HyperDual cosh(const HyperDual& a) {
  return apply_unary(a, std::cosh(a.v), std::sinh(a.v), std::cosh(a.v));
}
inline HyperDual pow(const HyperDual& a, double e) {
  const double f = std::pow(a.v, e);
  return apply_unary(a, f, e * f / a.v, e * (e - 1.0) * f / (a.v * a.v));
}
inline HyperDual pown(HyperDual a, int e) {
  HyperDual r(1.0);
  for (int i = 0; i < e; ++i) r = r * a;
  return r;
}

}  // namespace sfq
