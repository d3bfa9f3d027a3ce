#pragma once

#include <cmath>
#include <cstdint>
#include <numbers>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

namespace sfq {

// Thrown when an argument violates a documented precondition.
class invalid_input : public std::invalid_argument {
  using std::invalid_argument::invalid_argument;
};

// Thrown when a radius or point leaves the admissible chart of the space form.
class domain_error : public std::domain_error {
  using std::domain_error::domain_error;
};

// Thrown when an iterative solve fails (bracketing, monotonicity, Newton).
class solver_error : public std::runtime_error {
  using std::runtime_error::runtime_error;
};

// Thrown when a quadrature grid fails its build-time certificate.
class grid_error : public std::runtime_error {
  using std::runtime_error::runtime_error;
};

inline double binomial(int n, int k) {
  if (k < 0 || k > n) return 0.0;
  double r = 1.0;
  for (int i = 0; i < k; ++i) r = r * double(n - i) / double(i + 1);
  return r;
}

// Area of the unit n-sphere, 2 pi^{(n+1)/2} / Gamma((n+1)/2).
inline double sphere_area(int n) {
  const double half = 0.5 * double(n + 1);
  return 2.0 * std::pow(std::numbers::pi, half) / std::tgamma(half);
}

// Order-stable pairwise reduction; bitwise deterministic for a fixed input
// order regardless of how the values were produced.
inline double pairwise_sum(std::span<const double> v) {
  const std::size_t n = v.size();
  if (n <= 8) {
    double s = 0.0;
    for (double x : v) s += x;
    return s;
  }
  const std::size_t h = n / 2;
  return pairwise_sum(v.subspan(0, h)) + pairwise_sum(v.subspan(h));
}

inline double pairwise_sum(const std::vector<double>& v) {
  return pairwise_sum(std::span<const double>(v));
}

}  // namespace sfq
