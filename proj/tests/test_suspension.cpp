#include <catch_amalgamated.hpp>

#include <cmath>

#include "anosov/asymmetry.hpp"
#include "anosov/rng.hpp"
#include "anosov/suspension.hpp"

using namespace anosov;

namespace {

// independent root of x^3 - x - 1 by bisection-guarded Newton
double plastic_root() {
  double x = 1.3;
  for (int i = 0; i < 60; ++i) x -= (x * x * x - x - 1.0) / (3.0 * x * x - 1.0);
  return x;
}

}  // namespace

TEST_CASE("eigendata of the default model") {
  SuspensionFlow f = SuspensionFlow::default_model();
  REQUIRE(f.dim() == 4);
  const auto& aut = f.poincare();
  CHECK(std::abs(aut.det()) == 1);
  CHECK(aut.unstable_dim() == 1);
  double rho = plastic_root();
  CHECK(std::exp(aut.unstable_log_modulus()) == Catch::Approx(rho).margin(1e-12));
  // frame determinant normalized to 1
  CHECK(aut.frame().determinant() == Catch::Approx(1.0).margin(1e-10));
  // unstable column is an eigenvector: A u = rho u
  Eigen::VectorXd u = aut.frame().col(0);
  CHECK((aut.matrix().cast<double>() * u - rho * u).norm() < 1e-10);
  // stable pair has modulus rho^{-1/2}
  for (const auto& b : aut.blocks())
    if (!b.unstable) {
      CHECK(b.dim == 2);
      CHECK(b.log_modulus == Catch::Approx(-0.5 * std::log(rho)).margin(1e-12));
    }
}

TEST_CASE("rejects non-hyperbolic and non-unimodular input") {
  Eigen::MatrixXi shear(2, 2);
  shear << 1, 1, 0, 1;  // eigenvalues on the unit circle
  CHECK_THROWS_AS(HyperbolicAutomorphism(shear), std::invalid_argument);
  Eigen::MatrixXi doubling(2, 2);
  doubling << 2, 0, 0, 2;
  CHECK_THROWS_AS(HyperbolicAutomorphism(doubling), std::invalid_argument);
  Eigen::MatrixXi cat(2, 2);
  cat << 2, 1, 1, 1;
  CHECK_THROWS_AS(SuspensionFlow(HyperbolicAutomorphism(cat), 2.0), std::invalid_argument);
}

TEST_CASE("flow group law") {
  SuspensionFlow f = SuspensionFlow::default_model();
  Rng rng(21);
  for (int i = 0; i < 100; ++i) {
    Point p = f.make_point(rng.gaussian_vector(3), rng.uniform());
    double t1 = rng.uniform(-8.0, 8.0), t2 = rng.uniform(-8.0, 8.0);
    Point a = flow(f, flow(f, p, t1), t2);
    Point b = flow(f, p, t1 + t2);
    CHECK(same_base(a, b, 1e-10));
  }
}

TEST_CASE("tangent cocycle") {
  SuspensionFlow f = SuspensionFlow::default_model();
  Rng rng(22);
  for (int i = 0; i < 100; ++i) {
    Point p = f.make_point(rng.gaussian_vector(3), rng.uniform());
    Eigen::VectorXd full = rng.gaussian_vector(4);
    TangentVector v{p, full.head(3), full(3)};
    double t1 = rng.uniform(-5.0, 5.0), t2 = rng.uniform(-5.0, 5.0);
    TangentVector one = tangent_flow(f, tangent_flow(f, v, t1), t2);
    TangentVector two = tangent_flow(f, v, t1 + t2);
    CHECK((one.torus - two.torus).norm() < 1e-10 * std::max(1.0, two.torus.norm()));
    CHECK(std::abs(one.ds - two.ds) < 1e-10);
  }
}

TEST_CASE("volume preservation along the flow") {
  SuspensionFlow f = SuspensionFlow::default_model();
  Rng rng(23);
  const int n = f.dim();
  Point p = f.make_point(rng.gaussian_vector(n - 1), rng.uniform());
  std::vector<TangentVector> frame;
  for (int j = 0; j < n; ++j) {
    Eigen::VectorXd e = Eigen::VectorXd::Zero(n);
    e(j) = 1.0;
    frame.push_back(TangentVector{p, e.head(n - 1), e(n - 1)});
  }
  for (double t : {-20.0, -7.3, -1.0, 0.5, 4.4, 12.0, 20.0}) {
    double logscale = 0.0;
    std::vector<Eigen::VectorXd> coords;
    double s_new = 0.0;
    for (const auto& v : frame) {
      auto [w, ls] = tangent_flow_log(f, v, t);
      logscale += ls;
      s_new = w.base.s;
      Eigen::VectorXd full(n);
      full.head(n - 1) = w.torus;
      full(n - 1) = w.ds;
      coords.push_back(full);
    }
    double lv = std::log(k_volume(coords, anosov_metric(f, s_new))) + logscale -
                std::log(k_volume({Eigen::VectorXd(Eigen::VectorXd::Unit(n, 0)),
                                   Eigen::VectorXd(Eigen::VectorXd::Unit(n, 1)),
                                   Eigen::VectorXd(Eigen::VectorXd::Unit(n, 2)),
                                   Eigen::VectorXd(Eigen::VectorXd::Unit(n, 3))},
                                  anosov_metric(f, p.s)));
    CHECK(std::abs(lv) < 1e-9);
  }
}

TEST_CASE("metric properties") {
  SuspensionFlow f = SuspensionFlow::default_model();
  for (double s : {0.0, 0.3, 0.77, 0.999}) {
    MetricFrame m = anosov_metric(f, s);
    // unit density: the metric volume form is the coordinate volume form
    CHECK(m.omega_coeff() == Catch::Approx(1.0).margin(1e-10));
    // X is unit
    Point p = f.make_point(Eigen::VectorXd::Zero(3), s);
    TangentVector X{p, Eigen::VectorXd::Zero(3), 1.0};
    CHECK(g_norm(f, X) == Catch::Approx(1.0).margin(1e-12));
  }
}

TEST_CASE("measured hyperbolicity constants") {
  SuspensionFlow f = SuspensionFlow::default_model();
  auto hc = measure_constants(f, default_t_grid(20.0, 41), 33);
  double rho = plastic_root();
  CHECK(hc.lambda == Catch::Approx(std::log(rho)).epsilon(0.05));
  CHECK(hc.nu == Catch::Approx(0.5 * std::log(rho)).epsilon(0.05));
  CHECK(hc.c >= 1.0);
  CHECK(hc.max_residual < 1e-8);

  // (spade) bounds on fresh random vectors
  Rng rng(34);
  Splitting sp = splitting(f);
  for (int i = 0; i < 100; ++i) {
    Point p = f.make_point(rng.gaussian_vector(3), rng.uniform());
    Eigen::VectorXd c2 = rng.unit_vector(2);
    Eigen::VectorXd dir = c2(0) * sp.stable[0] + c2(1) * sp.stable[1];
    TangentVector v{p, dir.head(3), dir(3)};
    double n0 = g_norm(f, v);
    for (double t : {1.0, 5.0, 12.0}) {
      auto [w, ls] = tangent_flow_log(f, v, t);
      double ratio = std::log(g_norm(f, w)) + ls - std::log(n0);
      CHECK(ratio <= std::log(hc.c) - hc.nu * t + 1e-6);
    }
  }

  CHECK_THROWS_AS(measure_constants(f, {5.0, 1.0}, 1), std::invalid_argument);
  CHECK_THROWS_AS(measure_constants(f, {0.0}, 1), std::invalid_argument);
}

TEST_CASE("frame coordinates round-trip") {
  SuspensionFlow f = SuspensionFlow::symmetric_control_model();
  Rng rng(35);
  Point p = f.make_point(rng.gaussian_vector(4), 0.2);
  Eigen::VectorXd full = rng.gaussian_vector(5);
  TangentVector v{p, full.head(4), full(4)};
  TangentVector back = f.from_frame_coords(p, f.frame_coords(v));
  CHECK((back.torus - v.torus).norm() < 1e-12);
  CHECK(std::abs(back.ds - v.ds) < 1e-12);
}
