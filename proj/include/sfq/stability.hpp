#pragma once

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <functional>
#include <numbers>
#include <numeric>
#include <sstream>
#include <vector>

#include "sfq/expansions.hpp"
#include "sfq/integrals.hpp"

namespace sfq {

// First-order barycenter condition: per ambient coordinate l, the value of
// int_{S^n} G(rho(1+u(x))) x_l dA with G the antiderivative of r phi^n(r).
// (The radial integral collapses by the substitution s = r(1+u).)
inline Eigen::VectorXd barycenter_residual(const NearlySphericalSurface& s) {
  const int dim = s.n + 1;
  Eigen::VectorXd res = Eigen::VectorXd::Zero(dim);
  std::vector<double> g(s.grid.nodes.size());
  for (std::size_t i = 0; i < s.grid.nodes.size(); ++i)
    g[i] = s.form.radial_moment_integral(s.n, s.radius_at(s.grid.nodes[i]));
  std::vector<double> vals(s.grid.nodes.size());
  for (int l = 0; l < dim; ++l) {
    for (std::size_t i = 0; i < s.grid.nodes.size(); ++i)
      vals[i] = g[i] * s.grid.nodes[i][l];
    res[l] = s.grid.integrate(vals);
  }
  return res;
}

// Solve for the l <= 1 modes so that u = t shape + a0 Y0 + sum a1_i Y1_i
// satisfies A_j(Omega) = A_j(ball rho) and the barycenter condition. Damped
// Newton on the n+2 unknowns with a finite-difference Jacobian.
inline RadialField fit_constraints(const SpaceForm& form, double rho,
                                   const QuadratureGrid& grid, const RadialField& shape,
                                   double t, int j, int* newton_steps = nullptr) {
  const int n = shape.n;
  const int dim = n + 1;
  const double wn = sphere_area(n);
  const double psij = ball_quermass(form, n, j, rho);

  auto make_field = [&](const Eigen::VectorXd& z) {
    AmbientPolynomial p = t * shape.poly;
    AmbientPolynomial low(dim);
    low.add_term(z[0] / std::sqrt(wn), std::vector<int>(std::size_t(dim), 0));
    const double c1 = std::sqrt(double(n + 1) / wn);
    for (int i = 0; i < dim; ++i) {
      std::vector<int> e(std::size_t(dim), 0);
      e[std::size_t(i)] = 1;
      low.add_term(z[i + 1] * c1, e);
    }
    return RadialField(p + low, n);
  };

  auto residual = [&](const Eigen::VectorXd& z) {
    const NearlySphericalSurface s(form, rho, make_field(z), grid);
    Eigen::VectorXd f(dim + 1);
    f[0] = (quermass(s, j) - psij) / psij;
    f.tail(dim) = barycenter_residual(s);
    return f;
  };

  Eigen::VectorXd z = Eigen::VectorXd::Zero(dim + 1);
  Eigen::VectorXd f = residual(z);
  const double tol = 1e-11;
  for (int iter = 0; iter < 50; ++iter) {
    if (newton_steps) *newton_steps = iter;
    if (f.cwiseAbs().maxCoeff() <= tol) return make_field(z);
    Eigen::MatrixXd jac(dim + 1, dim + 1);
    const double h = 1e-7;
    for (int c = 0; c <= dim; ++c) {
      Eigen::VectorXd zp = z;
      zp[c] += h;
      jac.col(c) = (residual(zp) - f) / h;
    }
    const Eigen::VectorXd step = jac.fullPivLu().solve(-f);
    double lambda = 1.0;
    for (int halvings = 0; halvings < 25; ++halvings) {
      const Eigen::VectorXd zn = z + lambda * step;
      Eigen::VectorXd fn;
      try {
        fn = residual(zn);
      } catch (const domain_error&) {
        lambda *= 0.5;
        continue;
      }
      if (fn.norm() < f.norm() || f.cwiseAbs().maxCoeff() <= tol) {
        z = zn;
        f = fn;
        break;
      }
      lambda *= 0.5;
    }
  }
  if (f.cwiseAbs().maxCoeff() <= tol) return make_field(z);
  std::ostringstream msg;
  msg << "constraint fit did not converge; residuals:";
  for (int i = 0; i <= dim; ++i) msg << ' ' << f[i];
  throw solver_error(msg.str());
}

// ||grad u+||^2 - 2(n+1) ||u+||^2 with the l <= 1 modes projected out;
// non-negative up to rounding since lambda_l >= 2(n+1) for l >= 2.
inline double poincare_gap(const RadialField& u, const QuadratureGrid& grid) {
  const int n = u.n;
  const int dim = n + 1;
  const double wn = sphere_area(n);
  const LowModes lm = low_mode_coefficients(u, grid);
  AmbientPolynomial p = u.poly;
  AmbientPolynomial low(dim);
  low.add_term(-lm.a0 / std::sqrt(wn), std::vector<int>(std::size_t(dim), 0));
  const double c1 = std::sqrt(double(n + 1) / wn);
  for (int i = 0; i < dim; ++i) {
    std::vector<int> e(std::size_t(dim), 0);
    e[std::size_t(i)] = 1;
    low.add_term(-lm.a1[i] * c1, e);
  }
  const RadialField uplus(p + low, n);
  const SobolevNorms norms = sobolev_norms(uplus, grid);
  return norms.grad_l2_sq - 2.0 * (n + 1) * norms.l2_sq;
}

// Vol(Omega Delta B) for the volume-matched ball centered at the origin.
inline double fraenkel_origin(const NearlySphericalSurface& s) {
  const double vol = volume(s);
  const double radius = ball_radius_from_quermass(s.form, s.n, -1, vol);
  std::vector<double> vals(s.grid.nodes.size());
  const double fr = s.form.phi_power_integral(s.n, radius);
  for (std::size_t i = 0; i < s.grid.nodes.size(); ++i)
    vals[i] = std::abs(s.form.phi_power_integral(s.n, s.radius_at(s.grid.nodes[i])) - fr);
  return s.grid.integrate(vals);
}

namespace detail {

// Radial profile of the geodesic ball of radius R centered at distance d from
// the origin, in the direction with cos(angle to center) = cosg: the root of
// dist(s) = R. Requires the origin strictly inside the ball (d < R).
inline double offcenter_radial(const SpaceForm& form, double d, double cosg, double R) {
  if (!(d < R)) throw invalid_input("center must lie inside the matched ball");
  auto dist = [&](double sv) {
    switch (form.curvature) {
      case 0:
        return std::sqrt(std::max(sv * sv + d * d - 2.0 * sv * d * cosg, 0.0));
      case 1:
        return std::acos(std::clamp(
            std::cos(sv) * std::cos(d) + std::sin(sv) * std::sin(d) * cosg, -1.0, 1.0));
      default:
        return std::acosh(std::max(
            std::cosh(sv) * std::cosh(d) - std::sinh(sv) * std::sinh(d) * cosg, 1.0));
    }
  };
  double lo = 0.0;
  double hi = d + R + 1e-12;
  if (form.curvature == 1) hi = std::min(hi, std::numbers::pi / 2 - 1e-12);
  for (int it = 0; it < 80; ++it) {
    const double mid = 0.5 * (lo + hi);
    (dist(mid) < R ? lo : hi) = mid;
  }
  return 0.5 * (lo + hi);
}

// symmetric-difference volume between Omega and the volume-matched ball of
// radius R centered at geodesic distance |c| in direction c/|c|
inline double symdiff_at_center(const NearlySphericalSurface& s, const Eigen::VectorXd& c,
                                double R, double vol) {
  const double d = c.norm();
  if (d >= 0.95 * R) return 4.0 * vol * (1.0 + d);  // infeasible: steer back
  if (s.form.curvature == 1 && d + R >= std::numbers::pi / 2)
    return 4.0 * vol * (1.0 + d);
  std::vector<double> vals(s.grid.nodes.size());
  for (std::size_t i = 0; i < s.grid.nodes.size(); ++i) {
    const double cosg = d > 0.0 ? c.dot(s.grid.nodes[i]) / d : 1.0;
    const double rb = d > 0.0 ? offcenter_radial(s.form, d, cosg, R) : R;
    vals[i] = s.form.phi_power_integral(
        s.n, std::min(rb, s.radius_at(s.grid.nodes[i])));
  }
  return 2.0 * (vol - s.grid.integrate(vals));
}

}  // namespace detail

struct FraenkelResult {
  double value;         // best symmetric-difference volume over the searched centers
  double origin_value;  // origin-centered symmetric difference
  bool degraded;        // optimizer failed to do at least as well as the origin
};

// Multi-start Nelder-Mead over ball centers in normal coordinates at the
// origin; starting points are the origin and small shifts along the degree-1
// mode of u. The result is an upper bound on the Fraenkel infimum.
inline FraenkelResult fraenkel(const NearlySphericalSurface& s) {
  const int dim = s.n + 1;
  const double vol = volume(s);
  const double radius = ball_radius_from_quermass(s.form, s.n, -1, vol);
  auto objective = [&](const Eigen::VectorXd& c) {
    return detail::symdiff_at_center(s, c, radius, vol);
  };
  const double origin_value = objective(Eigen::VectorXd::Zero(dim));

  const LowModes lm = low_mode_coefficients(s.u, s.grid);
  Eigen::VectorXd dir = lm.a1;
  if (dir.norm() < 1e-14) dir = Eigen::VectorXd::Unit(dim, 0);
  dir.normalize();
  const double shift = 0.02 * radius;

  double best = origin_value;
  Eigen::VectorXd best_c = Eigen::VectorXd::Zero(dim);
  for (int start = 0; start < 3; ++start) {
    Eigen::VectorXd x0 = Eigen::VectorXd::Zero(dim);
    if (start == 1) x0 = shift * dir;
    if (start == 2) x0 = -shift * dir;
    // standard Nelder-Mead with a fixed deterministic simplex
    std::vector<Eigen::VectorXd> pts(std::size_t(dim + 1), x0);
    std::vector<double> fv(std::size_t(dim + 1));
    for (int i = 1; i <= dim; ++i) pts[std::size_t(i)][i - 1] += 0.3 * shift;
    for (int i = 0; i <= dim; ++i) fv[std::size_t(i)] = objective(pts[std::size_t(i)]);
    for (int iter = 0; iter < 120; ++iter) {
      std::vector<int> order(std::size_t(dim + 1));
      std::iota(order.begin(), order.end(), 0);
      std::sort(order.begin(), order.end(),
                [&](int a, int b) { return fv[std::size_t(a)] < fv[std::size_t(b)]; });
      std::vector<Eigen::VectorXd> p2;
      std::vector<double> f2;
      for (int i : order) {
        p2.push_back(pts[std::size_t(i)]);
        f2.push_back(fv[std::size_t(i)]);
      }
      pts = p2;
      fv = f2;
      if (fv.back() - fv.front() < 1e-13 * (1.0 + std::abs(fv.front()))) break;
      Eigen::VectorXd centroid = Eigen::VectorXd::Zero(dim);
      for (int i = 0; i < dim; ++i) centroid += pts[std::size_t(i)];
      centroid /= dim;
      const Eigen::VectorXd refl = centroid + (centroid - pts.back());
      const double fr = objective(refl);
      if (fr < fv.front()) {
        const Eigen::VectorXd exp_pt = centroid + 2.0 * (centroid - pts.back());
        const double fe = objective(exp_pt);
        if (fe < fr) {
          pts.back() = exp_pt;
          fv.back() = fe;
        } else {
          pts.back() = refl;
          fv.back() = fr;
        }
      } else if (fr < fv[std::size_t(dim - 1)]) {
        pts.back() = refl;
        fv.back() = fr;
      } else {
        const Eigen::VectorXd con = centroid + 0.5 * (pts.back() - centroid);
        const double fc = objective(con);
        if (fc < fv.back()) {
          pts.back() = con;
          fv.back() = fc;
        } else {
          for (int i = 1; i <= dim; ++i) {
            pts[std::size_t(i)] =
                pts[0] + 0.5 * (pts[std::size_t(i)] - pts[0]);
            fv[std::size_t(i)] = objective(pts[std::size_t(i)]);
          }
        }
      }
    }
    for (int i = 0; i <= dim; ++i)
      if (fv[std::size_t(i)] < best) {
        best = fv[std::size_t(i)];
        best_c = pts[std::size_t(i)];
      }
  }
  FraenkelResult out;
  out.origin_value = origin_value;
  out.degraded = best > origin_value + 1e-12 * (1.0 + origin_value);
  out.value = out.degraded ? origin_value : best;
  return out;
}

struct StabilityReport {
  Theorem theorem;
  int n;
  int k;
  int j;
  double rho;
  int curvature;
  double lhs;
  double asymmetry;         // minimized (upper bound on the infimum)
  double asymmetry_origin;  // origin-centered value; used in the margin
  double constant;
  double margin;  // lhs - constant * asymmetry_origin^2
  double eps_hat;
};

// End-to-end check of one stability statement for a constrained surface.
inline StabilityReport theorem_report(const NearlySphericalSurface& s, int k, int j,
                                      Theorem theorem) {
  const int n = s.n;
  const int K = s.form.curvature;
  StabilityReport rep;
  rep.theorem = theorem;
  rep.n = n;
  rep.k = k;
  rep.j = j;
  rep.rho = s.rho;
  rep.curvature = K;
  rep.eps_hat = s.epsilon_hat;
  rep.constant = stability_constant(theorem, n, k, j, s.rho, K);

  // constraint preconditions, at a slack multiple of the fit tolerance
  const double psij = ball_quermass(s.form, n, j, s.rho);
  if (std::abs(quermass(s, j) - psij) > 1e-8 * std::abs(psij))
    throw invalid_input("surface violates the quermassintegral matching constraint");
  const double bar_scale =
      s.rho * s.rho * std::pow(s.form.phi(s.rho), n) * sphere_area(n);
  if (barycenter_residual(s).cwiseAbs().maxCoeff() > 1e-8 * (1.0 + bar_scale))
    throw invalid_input("surface violates the barycenter constraint");

  const double rho_j = ball_radius_from_quermass(s.form, n, j, quermass(s, j));

  switch (theorem) {
    case Theorem::T11:
      rep.lhs = quermass(s, k) - ball_quermass(s.form, n, k, rho_j);
      break;
    case Theorem::T12: {
      const double wb = ball_weighted_integral(s.form, n, k, Weight::Phi, rho_j);
      rep.lhs = (weighted_integral(s, k, Weight::Phi) - wb) / wb;
      break;
    }
    case Theorem::T13Phi:
      rep.lhs = weighted_integral(s, k, Weight::Phi) -
                ball_weighted_integral(s.form, n, k, Weight::Phi, rho_j);
      break;
    case Theorem::T13PhiPrime:
      rep.lhs = weighted_integral(s, k, Weight::PhiPrime) -
                ball_weighted_integral(s.form, n, k, Weight::PhiPrime, rho_j);
      break;
    case Theorem::VWLower:
      rep.lhs = quermass(s, k) - ball_quermass(s.form, n, k, rho_j);
      break;
    case Theorem::VWAlpha: {
      const double bk = ball_quermass(s.form, n, k, rho_j);
      rep.lhs = (quermass(s, k) - bk) / bk;
      break;
    }
  }

  if (theorem == Theorem::VWLower) {
    const SobolevNorms norms = sobolev_norms(s.u, s.grid);
    rep.asymmetry = std::sqrt(norms.l2_sq + 0.5 * norms.grad_l2_sq);
    rep.asymmetry_origin = rep.asymmetry;
  } else {
    const FraenkelResult fr = fraenkel(s);
    if (K == 0) {
      const double vol = volume(s);  // the matched ball has the same volume
      rep.asymmetry = fr.value / vol;
      rep.asymmetry_origin = fr.origin_value / vol;
    } else {
      rep.asymmetry = fr.value;
      rep.asymmetry_origin = fr.origin_value;
    }
  }
  rep.margin = rep.lhs - rep.constant * rep.asymmetry_origin * rep.asymmetry_origin;
  return rep;
}

}  // namespace sfq
