#include "desk.hpp"
#include "oracles.hpp"

#include "hbdn/algorithm.hpp"
#include "hbdn/error.hpp"
#include "hbdn/theory.hpp"

#include <doctest.h>

#include <Eigen/Eigenvalues>

#include <limits>
#include <random>
#include <sstream>

using namespace hbdn;

namespace {

ProblemConstants desk_constants() { return desk::regular().constants(); }

double dense_radius(const Matrix4& m) {
  return Eigen::EigenSolver<Matrix4>(m, false).eigenvalues().cwiseAbs().maxCoeff();
}

}  // namespace

TEST_SUITE("theory") {

TEST_CASE("error vector of an exact consensus state is zero") {
  const auto& problem = desk::regular();
  const Matrix x0 = problem.reference.x_star.transpose().replicate(20, 1);
  NetworkState s = init(problem.objective, x0);
  s.y = Matrix::Constant(20, 10, 0.3);
  const auto e = error_vector(s, problem.reference.x_star);
  CHECK(e.consensus < 1e-14);
  CHECK(e.tracking == 0.0);
  CHECK(e.optimality < 1e-14);
  CHECK(e.momentum == 0.0);
  CHECK(std::isnan(error_vector(s, std::nullopt).optimality));
}

TEST_CASE("consensus error of a zero-mean perturbation") {
  NetworkState s;
  Matrix e(3, 2);
  e << 1.0, -2.0, -3.0, 1.0, 2.0, 1.0;
  const Eigen::RowVector2d xbar(0.5, 4.0);
  s.x = e.rowwise() + xbar;
  s.x_prev = s.x;
  s.y = Matrix::Zero(3, 2);
  CHECK(error_vector(s, std::nullopt).consensus == doctest::Approx(e.norm()).epsilon(1e-15));
}

TEST_CASE("error vector matches the loop oracle mid-run") {
  const auto& problem = desk::regular();
  auto s = init(problem.objective, problem.x0);
  const AlgoConfig cfg(Variant::NewtonHeavyBall, 0.15, 0.5);
  for (int t = 0; t < 7; ++t) s = step(s, problem.weights, cfg, problem.objective);
  const auto e = error_vector(s, problem.reference.x_star).as_array();
  const auto ref = oracle::naive_errors(s, problem.reference.x_star);
  for (int k = 0; k < 4; ++k) REQUIRE(std::abs(e[k] - ref[k]) <= 1e-12 * std::max(1.0, ref[k]));
}

TEST_CASE("contraction matrix entries") {
  const auto c = ProblemConstants::make(0.05, 0.5, 0.3, 0.9, 20);
  const auto m0 = contraction_matrix(c, 0.0, 0.0);
  Matrix4 expected;
  expected << 0.3, 0, 0, 0, 0.5 * 0.9, 0.3, 0, 0, 0, 0, 1, 0, 0.9, 0, 0, 0;
  CHECK(m0.m == expected);
  CHECK(m0.rho == doctest::Approx(1.0).epsilon(1e-12));

  const auto m = contraction_matrix(c, 0.02, 0.4);
  const double q = 10.0;
  CHECK(m.m(0, 0) == doctest::Approx(0.3 + 0.02 * q));
  CHECK(m.m(0, 1) == doctest::Approx(0.02 / 0.05));
  CHECK(m.m(1, 0) == doctest::Approx(0.5 * (0.9 + 0.02 * q)));
  CHECK(m.m(1, 3) == doctest::Approx(0.5 * 0.4));
  CHECK(m.m(2, 2) == doctest::Approx(1.0 - 0.02 / q));
  CHECK(m.m(3, 0) == doctest::Approx(0.9 + 0.02 * q));
  CHECK(m.step_within_bound);
  CHECK_FALSE(contraction_matrix(c, 0.2, 0.0).step_within_bound);
  CHECK_THROWS_AS((void)contraction_matrix(c, -0.1, 0.0), Error);
}

TEST_CASE("beta = 0 spectrum is the leading block plus zero") {
  const auto c = desk_constants();
  const auto m = contraction_matrix(c, 0.05, 0.0);
  CHECK(m.m.col(3).isZero(0.0));
  const Eigen::Matrix3d lead = m.m.topLeftCorner<3, 3>();
  const double lead_rho = Eigen::EigenSolver<Eigen::Matrix3d>(lead, false).eigenvalues().cwiseAbs().maxCoeff();
  CHECK(m.rho == doctest::Approx(lead_rho).epsilon(1e-10));
}

TEST_CASE("alpha = 0.15, beta = 0.5 on desk constants: rho against a dense eigensolver") {
  const auto m = contraction_matrix(desk_constants(), 0.15, 0.5);
  CHECK(m.rho == doctest::Approx(dense_radius(m.m)).epsilon(1e-10));
  CHECK(m.rho > 1.0);
}

TEST_CASE("spectral radius examples") {
  Matrix4 d = Matrix4::Zero();
  d.diagonal() << 0.2, 0.5, 0.9, 0.1;
  CHECK(spectral_radius(d) == doctest::Approx(0.9).epsilon(1e-12));

  Matrix4 perm = Matrix4::Zero();
  perm(0, 1) = 1.0;
  perm(1, 0) = 1.0;
  const auto p = perron_pair(perm);
  CHECK(p.root == doctest::Approx(1.0).epsilon(1e-12));
  CHECK_FALSE(p.from_power_iteration);

  CHECK(spectral_radius(Matrix4::Zero()) == 0.0);
  Matrix4 neg = Matrix4::Identity();
  neg(0, 1) = -1.0;
  CHECK_THROWS_AS((void)spectral_radius(neg), Error);
}

TEST_CASE("characteristic polynomial agrees with principal minors") {
  std::mt19937_64 rng(21);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  for (int trial = 0; trial < 200; ++trial) {
    Matrix4 m;
    for (int i = 0; i < 16; ++i) m(i) = u(rng);
    const auto a = characteristic_polynomial(m);
    const auto b = oracle::charpoly_minors(m);
    for (int k = 0; k < 5; ++k) REQUIRE(a[k] == doctest::Approx(b[k]).epsilon(1e-12).scale(1.0));
  }
}

TEST_CASE("spectral radius matches the quartic-root oracle") {
  std::mt19937_64 rng(17);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  std::bernoulli_distribution sparse(0.3);
  for (int trial = 0; trial < 1000; ++trial) {
    Matrix4 m;
    for (int i = 0; i < 16; ++i) m(i) = sparse(rng) ? 0.0 : u(rng);
    const double got = spectral_radius(m);
    const double want = oracle::quartic_spectral_radius(m);
    REQUIRE(std::abs(got - want) <= 1e-10 * std::max(1.0, want));
  }
}

TEST_CASE("perron vector is an eigenvector") {
  const auto c = desk_constants();
  const auto m = contraction_entries(c, 0.01, 0.05);
  const auto p = perron_pair(m);
  CHECK((p.vector.array() > 0.0).all());
  CHECK(p.vector.sum() == doctest::Approx(1.0));
  CHECK((m * p.vector - p.root * p.vector).norm() <= 1e-10 * p.root);
}

TEST_CASE("rho is nondecreasing in beta") {
  const auto c = desk_constants();
  for (double a : {0.001, 0.01, 0.05, 0.1}) {
    double prev = 0.0;
    for (int k = 0; k <= 20; ++k) {
      const double rho = contraction_matrix(c, a, 0.05 * k).rho;
      REQUIRE(rho >= prev * (1.0 - 1e-12));
      prev = rho;
    }
  }
}

TEST_CASE("nonnegativity for alpha <= mu/L") {
  const auto c = desk_constants();
  for (int k = 0; k <= 10; ++k) {
    const double a = k / 10.0 * c.mu / c.lipschitz;
    for (double b : {0.0, 0.5, 2.0}) REQUIRE((contraction_entries(c, a, b).array() >= 0.0).all());
  }
}

TEST_CASE("find_epsilon with vanishing eta") {
  const auto c = ProblemConstants::make(1.0, 1.0, 0.0, 0.0, 4);
  const auto cert = find_epsilon(c);
  CHECK(cert.eps.allFinite());
  CHECK(std::isinf(cert.eps1_bounds[0]));
  CHECK(std::isinf(cert.eps1_bounds[2]));
  CHECK(cert.eps(0) < cert.eps1_bounds[1]);
}

TEST_CASE("desk certificate slack") {
  const auto c = desk_constants();
  const auto cert = find_epsilon(c);
  CHECK((cert.eps.array() > 0.0).all());
  CHECK(cert.min_slack() >= 0.05);
  // Direct re-check of the three inequalities.
  const auto& e = cert.eps;
  CHECK(e(0) < c.sigma_bar * e(1) / (c.lipschitz * c.eta));
  CHECK(e(0) < e(2) / (c.q * c.q) - e(1) / (c.mu * c.q));
  CHECK(e(0) < e(3) / c.eta);
  CHECK_THROWS_AS((void)make_certificate(c, Vector4(1.0, 1.0, 1.0, 1.0)), Error);
}

TEST_CASE("certificates are homogeneous of degree one") {
  const auto c = desk_constants();
  const auto cert = find_epsilon(c);
  const auto region = stepsize_bounds(cert, c);
  for (double f : {1e-3, 0.5, 7.0, 1e4}) {
    const auto scaled = make_certificate(c, cert.scaled(f).eps);
    const auto r2 = stepsize_bounds(scaled, c);
    CHECK(r2.alpha_max() == doctest::Approx(region.alpha_max()).epsilon(1e-12));
    const double a = 0.5 * region.alpha_max();
    CHECK(r2.beta_max(a) == doctest::Approx(region.beta_max(a)).epsilon(1e-12));
  }
}

TEST_CASE("certified midpoint contracts") {
  const auto c = desk_constants();
  const auto region = stepsize_bounds(find_epsilon(c), c);
  const double a = region.alpha_max() / 2.0;
  const double b = region.beta_max(a) / 2.0;
  CHECK(region.certifies(a, b));
  CHECK(region.certifies(a, 0.0));
  CHECK(contraction_matrix(c, a, b).rho < 1.0);
  CHECK_FALSE(region.certifies(region.alpha_max(), 0.0));
  // The region closes at the alpha boundary.
  CHECK(region.beta_max(region.alpha_max() * (1.0 - 1e-9)) < 1e-6);
  // Certificate vector contracts.
  const Matrix4 m = contraction_entries(c, a, b);
  CHECK(((m * region.certificate().eps).array() < region.certificate().eps.array()).all());
}

TEST_CASE("ill-conditioning shrinks the region") {
  const auto well = ProblemConstants::make(1.0, 10.0, 0.3, 0.9, 20);
  const auto ill = ProblemConstants::make(1.0, 1000.0, 0.3, 0.9, 20);
  const auto rw = stepsize_bounds(find_epsilon(well), well);
  const auto ri = stepsize_bounds(find_epsilon(ill), ill);
  CHECK(ri.alpha_max() < rw.alpha_max());
  // Compared at the same relative position inside each region.
  CHECK(ri.beta_max(0.5 * ri.alpha_max()) < rw.beta_max(0.5 * rw.alpha_max()));
}

TEST_CASE("perron region structure") {
  const auto c = desk_constants();
  const auto pr = perron_bounds(c);
  CHECK(pr.m0_perron().root == doctest::Approx(1.0).epsilon(1e-12));
  CHECK_FALSE(pr.m0_vector_positive());
  CHECK(pr.m2().col(3) == Vector4(1.0, c.lipschitz, 1.0, 1.0));
  CHECK(pr.m2().leftCols<3>().isZero(0.0));
  CHECK(pr.m1().row(2) == Eigen::RowVector4d(c.q, 1.0 / c.mu, -1.0 / c.q, 0.0));
  const Vector4 eps(0.1, 0.2, 0.3, 0.4);
  CHECK((0.7 * pr.m2() * eps).isApprox(0.7 * 0.4 * Vector4(1.0, c.lipschitz, 1.0, 1.0)));
  for (double a : {0.001, 0.02}) {
    for (double b : {0.0, 0.3}) {
      const Matrix4 sum = pr.m0() + a * pr.m1() + b * pr.m2();
      REQUIRE((sum - contraction_entries(c, a, b)).cwiseAbs().maxCoeff() < 1e-14);
    }
  }
}

TEST_CASE("perron region contains the certified grid points") {
  const auto c = desk_constants();
  const auto region = stepsize_bounds(find_epsilon(c), c);
  const auto plain = perron_bounds(c, std::numeric_limits<double>::infinity());
  int certified = 0;
  for (int i = 1; i <= 50; ++i) {
    const double a = region.alpha_max() * i / 50.0;
    const double bmax = region.beta_max(0.5 * region.alpha_max());
    for (int j = 0; j < 50; ++j) {
      const double b = 2.0 * bmax * j / 50.0;
      if (!region.certifies(a, b)) continue;
      ++certified;
      REQUIRE(plain.certifies(a, b));
    }
  }
  CHECK(certified > 100);
  // And it reaches beyond: the Perron region admits larger momentum.
  const double a = 0.5 * region.alpha_max();
  CHECK(plain.beta_max(a) > region.beta_max(a));
  CHECK(plain.alpha_max() >= region.alpha_max());
}

TEST_CASE("rate fit") {
  std::vector<double> geo;
  for (int t = 0; t < 200; ++t) geo.push_back(3.0 * std::pow(0.9, t));
  const auto fit = fit_rate(geo, 20, 1e-12);
  CHECK(fit.rho_hat == doctest::Approx(0.9).epsilon(1e-9));
  CHECK(fit.r_squared == doctest::Approx(1.0).epsilon(1e-12));
  CHECK(fit.first_round == 20);
  CHECK(fit.last_round == 199);

  std::vector<double> flat(100, 1e-13);
  CHECK_THROWS_AS((void)fit_rate(flat, 20, 1e-12), Error);
  CHECK_THROWS_AS((void)fit_rate(geo, 20, 1e-12, 500), Error);
}

TEST_CASE("verify contraction on a certified run") {
  const auto& problem = desk::regular();
  const auto c = problem.constants();
  const auto region = stepsize_bounds(find_epsilon(c), c);
  const double a = 0.5 * region.alpha_max();
  const double b = 0.5 * region.beta_max(a);
  StopCriteria stop;
  stop.max_rounds = 150;
  RunOptions opts;
  opts.x_star = problem.reference.x_star;
  const auto trace = run(init(problem.objective, problem.x0), problem.weights,
                         AlgoConfig(Variant::NewtonHeavyBall, a, b), problem.objective, stop, opts);
  const auto cm = contraction_matrix(c, a, b);
  VerifyOptions vopts;
  vopts.certified = true;
  const auto report = verify_contraction(trace, cm, vopts);
  CHECK(report.recursion_holds);
  REQUIRE(report.rate);
  CHECK(report.rate->rho_hat < 1.0);
  CHECK(report.rate_ok);
  CHECK(report.pass());

  // Negative control: a halved matrix cannot bound the same trace.
  ContractionMatrix broken = cm;
  broken.m *= 0.5;
  const auto bad = verify_contraction(trace, broken);
  CHECK_FALSE(bad.recursion_holds);
  REQUIRE(bad.first_violation);
  CHECK(*bad.first_violation == 0);
}

TEST_CASE("verify contraction rejects thin traces") {
  RunTrace one;
  one.records.resize(1);
  const auto cm = contraction_matrix(ProblemConstants::make(1, 2, 0.5, 0.5, 2), 0.1, 0.0);
  CHECK_THROWS_AS((void)verify_contraction(one, cm), Error);
  RunTrace two;
  two.records.resize(2);
  two.records[0].errors.optimality = std::numeric_limits<double>::quiet_NaN();
  CHECK_THROWS_AS((void)verify_contraction(two, cm), Error);
}

TEST_CASE("region csv") {
  const auto c = desk_constants();
  const auto region = stepsize_bounds(find_epsilon(c), c);
  const std::vector<double> alphas{0.5 * region.alpha_max(), 2.0 * region.alpha_max()};
  const std::vector<double> betas{0.0};
  std::stringstream ss;
  write_region_csv(ss, c, region, alphas, betas);
  std::string header;
  std::string first;
  std::string second;
  std::getline(ss, header);
  std::getline(ss, first);
  std::getline(ss, second);
  CHECK(header == "alpha,beta,rho,certified");
  CHECK(first.ends_with(",1"));
  CHECK(second.ends_with(",0"));
}

}  // TEST_SUITE
