#include <catch2/catch_amalgamated.hpp>
#include <random>

#include "sfq/hypersurface.hpp"

using namespace sfq;

namespace {

const QuadratureGrid& grid_for(int n) {
  static QuadratureGrid g2 = build_grid(2, 20);
  static QuadratureGrid g3 = build_grid(3, 20);
  return n == 2 ? g2 : g3;
}

RadialField zero_field(int n) {
  return RadialField(AmbientPolynomial(n + 1), n);
}

RadialField random_field(int n, double amp, std::mt19937_64& rng) {
  std::uniform_real_distribution<double> c(-amp, amp);
  AmbientPolynomial p(n + 1);
  std::vector<int> e(std::size_t(n + 1), 0);
  // a spread of low-degree terms
  for (int i = 0; i <= n; ++i) {
    std::fill(e.begin(), e.end(), 0);
    e[std::size_t(i)] = 1;
    p.add_term(c(rng), e);
    e[std::size_t(i)] = 2;
    p.add_term(c(rng), e);
  }
  std::fill(e.begin(), e.end(), 0);
  e[0] = e[1] = 1;
  p.add_term(c(rng), e);
  e[std::size_t(n)] = 1;
  p.add_term(c(rng), e);
  return RadialField(p, n);
}

}  // namespace

TEST_CASE("round surfaces: trivial geometry") {
  for (int K : {-1, 0, 1}) {
    for (int n : {2, 3}) {
      const double rho = K == 1 ? 0.9 : 1.3;
      const NearlySphericalSurface s(SpaceForm(K), rho, zero_field(n), grid_for(n));
      CHECK(s.epsilon_hat == 0.0);
      const SpaceForm form(K);
      const double p = form.phi(rho), pp = form.phi_prime(rho);
      const JetFrame f = frame_at(s.grid.nodes[7]);
      CHECK((first_fundamental(s, f) - p * p * Eigen::MatrixXd::Identity(n, n))
                .cwiseAbs()
                .maxCoeff() < 1e-13);
      CHECK_THAT(area_element(s, f), Catch::Matchers::WithinRel(std::pow(p, n), 1e-13));
      const Eigen::MatrixXd w = weingarten(s, f);
      CHECK((w - (pp / p) * Eigen::MatrixXd::Identity(n, n)).cwiseAbs().maxCoeff() <
            1e-12);
      for (double kappa : principal_curvatures(s, f))
        CHECK_THAT(kappa, Catch::Matchers::WithinRel(pp / p, 1e-12));
      for (int k = 0; k <= n; ++k)
        CHECK_THAT(sigma_k_closed(s, f, k),
                   Catch::Matchers::WithinRel(binomial(n, k) * std::pow(pp / p, k), 1e-12));
    }
  }
  // flat unit ball: curvatures one, total area omega_n
  const NearlySphericalSurface s(SpaceForm(0), 1.0, zero_field(2), grid_for(2));
  std::vector<double> ae(s.grid.nodes.size());
  for (std::size_t i = 0; i < s.grid.nodes.size(); ++i)
    ae[i] = area_element(s, frame_at(s.grid.nodes[i]));
  CHECK_THAT(s.grid.integrate(ae), Catch::Matchers::WithinRel(sphere_area(2), 1e-13));
}

TEST_CASE("construction guards") {
  const int n = 2;
  AmbientPolynomial p(n + 1);
  p.add_term(-1.2, {0, 0, 0});
  CHECK_THROWS_AS(
      NearlySphericalSurface(SpaceForm(0), 1.0, RadialField(p, n), grid_for(n)),
      domain_error);
  AmbientPolynomial q(n + 1);
  q.add_term(0.2, {0, 0, 0});
  CHECK_THROWS_AS(
      NearlySphericalSurface(SpaceForm(1), 1.4, RadialField(q, n), grid_for(n)),
      domain_error);
  CHECK_THROWS_AS(
      NearlySphericalSurface(SpaceForm(0), -1.0, zero_field(n), grid_for(n)),
      invalid_input);
}

TEST_CASE("metric structure: eigenvalues and area-element identity") {
  std::mt19937_64 rng(101);
  for (int K : {-1, 0, 1}) {
    for (int trial = 0; trial < 6; ++trial) {
      const int n = 2 + (trial % 2);
      const NearlySphericalSurface s(SpaceForm(K), 0.8, random_field(n, 0.03, rng),
                                     grid_for(n));
      for (std::size_t node : {std::size_t(3), std::size_t(41)}) {
        const JetFrame f = frame_at(s.grid.nodes[node]);
        const Jet j = jet(s.u, f);
        const double r = s.rho * (1.0 + j.value);
        const double phi = s.form.phi(r);
        const double d2 = phi * phi + s.rho * s.rho * j.gradient.squaredNorm();
        const Eigen::MatrixXd g = first_fundamental(s, f);
        Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(g, Eigen::EigenvaluesOnly);
        // rank-one update of phi^2 I: spectrum {phi^2 (n-1 times), D^2}
        for (int i = 0; i < n - 1; ++i)
          CHECK_THAT(es.eigenvalues()[i], Catch::Matchers::WithinRel(phi * phi, 1e-12));
        CHECK_THAT(es.eigenvalues()[n - 1], Catch::Matchers::WithinRel(d2, 1e-12));
        CHECK_THAT(area_element(s, f),
                   Catch::Matchers::WithinRel(std::sqrt(g.determinant()), 1e-12));
      }
    }
  }
}

TEST_CASE("metric against the finite-difference embedding oracle") {
  std::mt19937_64 rng(202);
  const int n = 2;
  const NearlySphericalSurface s(SpaceForm(-1), 1.1, random_field(n, 0.04, rng),
                                 grid_for(n));
  // hyperboloid model in Minkowski space: F = (cosh r, sinh r x)
  auto embed = [&](const Eigen::VectorXd& y) {
    const Eigen::VectorXd x = y / y.norm();
    const double r = s.radius_at(x);
    Eigen::VectorXd F(n + 2);
    F[0] = std::cosh(r);
    F.tail(n + 1) = std::sinh(r) * x;
    return F;
  };
  auto mink = [](const Eigen::VectorXd& a, const Eigen::VectorXd& b) {
    return -a[0] * b[0] + a.tail(a.size() - 1).dot(b.tail(b.size() - 1));
  };
  const double h = 1e-5;
  for (std::size_t node : {std::size_t(5), std::size_t(77), std::size_t(140)}) {
    const JetFrame f = frame_at(s.grid.nodes[node]);
    const Eigen::MatrixXd g = first_fundamental(s, f);
    std::vector<Eigen::VectorXd> tang;
    for (int i = 0; i < n; ++i)
      tang.push_back((embed(f.point + h * f.basis[std::size_t(i)]) -
                      embed(f.point - h * f.basis[std::size_t(i)])) /
                     (2.0 * h));
    for (int i = 0; i < n; ++i)
      for (int j = 0; j < n; ++j)
        CHECK_THAT(g(i, j), Catch::Matchers::WithinAbs(mink(tang[std::size_t(i)],
                                                            tang[std::size_t(j)]),
                                                       1e-6));
  }
}

TEST_CASE("weingarten against the finite-difference normal-field oracle") {
  std::mt19937_64 rng(303);
  const int n = 2;
  const NearlySphericalSurface s(SpaceForm(0), 1.0, random_field(n, 0.04, rng),
                                 grid_for(n));
  auto embed = [&](const Eigen::VectorXd& y) {
    const Eigen::VectorXd x = y / y.norm();
    return Eigen::VectorXd(s.radius_at(x) * x);
  };
  const double h = 1e-5;
  auto normal_at = [&](const Eigen::VectorXd& y, const JetFrame& f) {
    Eigen::Vector3d t0 = (embed(y + h * f.basis[0]) - embed(y - h * f.basis[0])) / (2 * h);
    Eigen::Vector3d t1 = (embed(y + h * f.basis[1]) - embed(y - h * f.basis[1])) / (2 * h);
    Eigen::Vector3d nn = t0.cross(t1).normalized();
    if (nn.dot(embed(y)) < 0.0) nn = -nn;  // outward
    return nn;
  };
  for (std::size_t node : {std::size_t(11), std::size_t(60)}) {
    const JetFrame f = frame_at(s.grid.nodes[node]);
    Eigen::MatrixXd dn(3, n), tangents(3, n);
    for (int j = 0; j < n; ++j) {
      // vary the base point; reuse the frame of the center for the chart
      const Eigen::VectorXd yp = f.point + h * f.basis[std::size_t(j)];
      const Eigen::VectorXd ym = f.point - h * f.basis[std::size_t(j)];
      dn.col(j) = (normal_at(yp, frame_at(yp / yp.norm())) -
                   normal_at(ym, frame_at(ym / ym.norm()))) /
                  (2.0 * h);
      tangents.col(j) =
          (embed(f.point + h * f.basis[std::size_t(j)]) -
           embed(f.point - h * f.basis[std::size_t(j)])) /
          (2.0 * h);
    }
    // dN/dt_j = W^i_j dF/dt_i with the inward-curvature sign convention
    const Eigen::MatrixXd w_fd =
        (tangents.transpose() * tangents).ldlt().solve(tangents.transpose() * dn);
    const Eigen::MatrixXd w = weingarten(s, f);
    CHECK((w - w_fd).cwiseAbs().maxCoeff() < 1e-5 * (1.0 + w.cwiseAbs().maxCoeff()));
  }
}

TEST_CASE("closed-form sigma_k matches the eigenvalue route on random surfaces") {
  std::mt19937_64 rng(404);
  int done = 0;
  double worst = 0.0;
  while (done < 100) {
    const int n = 2 + (done % 2);
    const int K = int(done % 3) - 1;
    const double rho = K == 1 ? 0.6 + 0.2 * (done % 4) / 3.0 : 0.5 + 1.0 * (done % 5) / 4.0;
    const NearlySphericalSurface s(SpaceForm(K), rho, random_field(n, 0.012, rng),
                                   grid_for(n));
    REQUIRE(s.epsilon_hat <= 0.1);
    const std::size_t node = std::size_t(done * 7 % s.grid.nodes.size());
    const JetFrame f = frame_at(s.grid.nodes[node]);
    const auto kappa = principal_curvatures(s, f);
    const auto sig = symmpoly::elementary_symmetric(kappa);
    for (int k = 0; k <= n; ++k) {
      const double closed = sigma_k_closed(s, f, k);
      worst = std::max(worst, std::abs(closed - sig[std::size_t(k)]) /
                                  (1.0 + std::abs(sig[std::size_t(k)])));
    }
    ++done;
  }
  CHECK(worst < 1e-9);
  const NearlySphericalSurface s(SpaceForm(0), 1.0, zero_field(2), grid_for(2));
  CHECK_THROWS_AS(sigma_k_closed(s, frame_at(s.grid.nodes[0]), 3), invalid_input);
  CHECK_THROWS_AS(sigma_k_closed(s, frame_at(s.grid.nodes[0]), -1), invalid_input);
}
