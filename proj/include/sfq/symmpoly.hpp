#pragma once

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <numeric>
#include <vector>

#include "sfq/common.hpp"

namespace sfq::symmpoly {

using Matrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;

inline void check_finite(std::span<const double> values) {
  for (double v : values)
    if (!std::isfinite(v)) throw invalid_input("non-finite input value");
}

// sigma_0..sigma_n of the given values, by the stable one-pass product
// recurrence: coefficients of prod_i (1 + v_i t).
inline std::vector<double> elementary_symmetric(std::span<const double> values) {
  if (values.empty()) throw invalid_input("need at least one value");
  check_finite(values);
  std::vector<double> e(values.size() + 1, 0.0);
  e[0] = 1.0;
  std::size_t used = 0;
  for (double v : values) {
    ++used;
    for (std::size_t k = used; k >= 1; --k) e[k] += v * e[k - 1];
  }
  return e;
}

inline std::vector<double> elementary_symmetric(const std::vector<double>& v) {
  return elementary_symmetric(std::span<const double>(v));
}

inline void require_symmetric(const Matrix& a, double tol = 1e-12) {
  if (a.rows() != a.cols() || a.rows() < 1)
    throw invalid_input("matrix must be square and non-empty");
  const double scale = 1.0 + a.cwiseAbs().maxCoeff();
  if ((a - a.transpose()).cwiseAbs().maxCoeff() > tol * scale)
    throw invalid_input("matrix is not symmetric");
}

// sigma_k of a symmetric matrix through its eigenvalues. Eigenvalue route is
// preferred over characteristic-polynomial minors: Weingarten matrices of
// nearly spherical surfaces have near-equal eigenvalues.
inline std::vector<double> elementary_symmetric_matrix(const Matrix& a) {
  require_symmetric(a);
  Eigen::SelfAdjointEigenSolver<Matrix> es(a, Eigen::EigenvaluesOnly);
  const Vector ev = es.eigenvalues();
  std::vector<double> vals(ev.data(), ev.data() + ev.size());
  return elementary_symmetric(vals);
}

// sigma_k via the Faddeev/Newton trace recurrence k e_k = sum (-1)^{i-1}
// e_{k-i} tr(A^i). Alternate algebraic route, used for cross-checks.
inline std::vector<double> elementary_symmetric_via_traces(const Matrix& a) {
  require_symmetric(a);
  const int n = int(a.rows());
  std::vector<double> p(n + 1, 0.0);  // power sums tr(A^i)
  Matrix ak = Matrix::Identity(n, n);
  for (int i = 1; i <= n; ++i) {
    ak = ak * a;
    p[i] = ak.trace();
  }
  std::vector<double> e(n + 1, 0.0);
  e[0] = 1.0;
  for (int k = 1; k <= n; ++k) {
    double s = 0.0;
    for (int i = 1; i <= k; ++i)
      s += ((i % 2) ? 1.0 : -1.0) * e[k - i] * p[i];
    e[k] = s / double(k);
  }
  return e;
}

// Newton operator T_m(A) by the recurrence T_0 = I, T_m = sigma_m I - A T_{m-1}.
inline Matrix newton_operator(const Matrix& a, int m) {
  require_symmetric(a);
  const int n = int(a.rows());
  if (m < 0 || m > n) throw invalid_input("newton operator order out of range");
  const std::vector<double> sig = elementary_symmetric_matrix(a);
  Matrix t = Matrix::Identity(n, n);
  for (int i = 1; i <= m; ++i) t = sig[i] * Matrix::Identity(n, n) - a * t;
  // symmetrize away rounding asymmetry from the products
  return 0.5 * (t + t.transpose());
}

namespace detail {

// Walks a container of {0..m} permutations, handing each to f together with
// its sign. Sign is recomputed from cycle structure.
template <typename F>
void for_each_permutation(int count, F&& f) {
  std::vector<int> perm(count);
  std::iota(perm.begin(), perm.end(), 0);
  do {
    std::vector<bool> seen(count, false);
    int sign = 1;
    for (int s = 0; s < count; ++s) {
      if (seen[s]) continue;
      int len = 0;
      for (int t = s; !seen[t]; t = perm[t]) {
        seen[t] = true;
        ++len;
      }
      if (len % 2 == 0) sign = -sign;
    }
    f(perm, sign);
  } while (std::next_permutation(perm.begin(), perm.end()));
}

}  // namespace detail

// Full contraction (1/k!) delta^{j_1..j_k}_{i_1..i_k} (A_1)^{i_1}_{j_1} ...
// (A_k)^{i_k}_{j_k}, evaluated by the permutation cycle expansion. The inputs
// need not be symmetric. With all arguments equal this is sigma_k(A).
inline double kronecker_contraction(const std::vector<Matrix>& mats) {
  const int k = int(mats.size());
  if (k < 1) throw invalid_input("need at least one matrix");
  const int n = int(mats[0].rows());
  if (n > 6) throw invalid_input("unsupported size: permutation expansion limited to n <= 6");
  for (const auto& m : mats)
    if (m.rows() != n || m.cols() != n) throw invalid_input("dimension mismatch");
  double total = 0.0;
  detail::for_each_permutation(k, [&](const std::vector<int>& perm, int sign) {
    double term = double(sign);
    std::vector<bool> seen(k, false);
    for (int s = 0; s < k && term != 0.0; ++s) {
      if (seen[s]) continue;
      // cycle product: walking t -> perm[t] multiplies on the left
      Matrix prod = mats[s];
      seen[s] = true;
      for (int t = perm[s]; t != s; t = perm[t]) {
        prod = mats[t] * prod;
        seen[t] = true;
      }
      term *= prod.trace();
    }
    total += term;
  });
  double fact = 1.0;
  for (int i = 2; i <= k; ++i) fact *= i;
  return total / fact;
}

// Mixed Newton operator [T_m]_i^j(A_1,..,A_m) from its generalized
// Kronecker-delta definition, by cycle expansion over S_{m+1}. Matrices need
// not be symmetric. Limited to n <= 6 by combinatorial cost.
inline Matrix newton_operator_mixed(const std::vector<Matrix>& mats) {
  const int m = int(mats.size());
  if (m < 1) throw invalid_input("need at least one matrix");
  const int n = int(mats[0].rows());
  if (n > 6) throw invalid_input("unsupported size: permutation expansion limited to n <= 6");
  if (m > n) throw invalid_input("newton operator order exceeds dimension");
  for (const auto& a : mats)
    if (a.rows() != n || a.cols() != n) throw invalid_input("dimension mismatch");

  Matrix result = Matrix::Zero(n, n);
  // slot 0 carries the free indices; slots 1..m carry A_1..A_m
  detail::for_each_permutation(m + 1, [&](const std::vector<int>& perm, int sign) {
    std::vector<bool> seen(m + 1, false);
    double scalar = double(sign);
    // cycle through slot 0 contributes a matrix, the rest contribute traces
    Matrix zero_cycle = Matrix::Identity(n, n);
    seen[0] = true;
    for (int t = perm[0]; t != 0; t = perm[t]) {
      zero_cycle = mats[t - 1] * zero_cycle;
      seen[t] = true;
    }
    for (int s = 1; s <= m; ++s) {
      if (seen[s]) continue;
      Matrix prod = mats[s - 1];
      seen[s] = true;
      for (int t = perm[s]; t != s; t = perm[t]) {
        prod = mats[t - 1] * prod;
        seen[t] = true;
      }
      scalar *= prod.trace();
    }
    result += scalar * zero_cycle.transpose();
  });
  double fact = 1.0;
  for (int i = 2; i <= m; ++i) fact *= i;
  return result / fact;
}

// [T_m](A) from the Kronecker definition; oracle counterpart of
// newton_operator for n <= 6.
inline Matrix newton_operator_expanded(const Matrix& a, int m) {
  if (m == 0) return Matrix::Identity(a.rows(), a.cols());
  return newton_operator_mixed(std::vector<Matrix>(std::size_t(m), a));
}

}  // namespace sfq::symmpoly
