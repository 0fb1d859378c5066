#include <catch_amalgamated.hpp>

#include <cmath>

#include "anosov/form_fields.hpp"
#include "anosov/l2.hpp"
#include "anosov/smith.hpp"
#include "anosov/suspension.hpp"

using namespace anosov;

namespace {

bool consistent_with_zero(double value, double sigma) {
  return std::abs(value) <= 3.0 * sigma + 1e-10;
}

}  // namespace

TEST_CASE("canonical norms are 1") {
  SuspensionFlow f = SuspensionFlow::default_model();
  QuadratureSpec spec;
  spec.n_points = 1u << 14;
  auto aa = l2_inner(f, canonical_alpha(f), canonical_alpha(f), spec);
  CHECK(std::abs(aa.value - 1.0) <= 3.0 * aa.sigma + 1e-10);
  auto oo = l2_inner(f, volume_form_field(f), volume_form_field(f), spec);
  CHECK(std::abs(oo.value - 1.0) <= 3.0 * oo.sigma + 1e-10);
  CHECK(aa.sigma <= 1e-3);
  CHECK(oo.sigma <= 1e-3);
  CHECK(static_cast<int>(aa.replicas.size()) == spec.shifts);
}

TEST_CASE("inner product is symmetric and degree-checked") {
  SuspensionFlow f = SuspensionFlow::default_model();
  QuadratureSpec spec;
  spec.n_points = 1u << 10;
  Rng rng(81);
  auto a = random_bump_field(f, 2, 2, rng);
  auto b = random_matched_field(f, 2, a, rng);
  auto ab = l2_inner(f, a, b, spec);
  auto ba = l2_inner(f, b, a, spec);
  CHECK(ab.value == Catch::Approx(ba.value).margin(1e-12));
  auto c = random_bump_field(f, 1, 1, rng);
  CHECK_THROWS_AS(l2_inner(f, a, c, spec), std::invalid_argument);
}

TEST_CASE("star of the contracted volume is the canonical 1-form") {
  SuspensionFlow f = SuspensionFlow::default_model();
  auto rep = star_alpha_identity(f, 1e-10);
  CHECK(rep.pass);
  CHECK(rep.max_deviation < 1e-10);

  // negative control: a metric that does not make X unit and orthogonal
  auto bad = star_alpha_identity(f, 1e-10, 64, 5, [](double) {
    Eigen::VectorXd d(4);
    d << 2.0, 1.0, 1.0, 1.0;
    return MetricFrame(Eigen::MatrixXd(d.asDiagonal()), +1, 1.0);
  });
  CHECK_FALSE(bad.pass);
  CHECK(bad.max_deviation > 1e-3);
}

TEST_CASE("adjoint identity for the Lie derivative") {
  SuspensionFlow f = SuspensionFlow::default_model();
  QuadratureSpec spec;
  spec.n_points = 1u << 11;
  Rng rng(82);
  for (int k = 1; k <= 3; ++k) {
    for (int pair = 0; pair < 2; ++pair) {
      auto xi = random_bump_field(f, k, 2, rng);
      auto eta = random_matched_field(f, k, xi, rng);
      auto ar = adjoint_residual(f, xi, eta, spec);
      INFO("degree " << k << " pair " << pair << " residual " << ar.residual << " sigma "
                     << ar.sigma);
      CHECK(consistent_with_zero(ar.residual, ar.sigma));
      CHECK(ar.lhs == Catch::Approx(ar.rhs).margin(3.0 * ar.sigma + 1e-6));
    }
  }
  auto a = random_bump_field(f, 1, 1, rng);
  auto b = random_bump_field(f, 2, 1, rng);
  CHECK_THROWS_AS(adjoint_residual(f, a, b, spec), std::invalid_argument);
}

TEST_CASE("orthogonality of the Lie range against the contracted volume") {
  SuspensionFlow f = SuspensionFlow::default_model();
  QuadratureSpec spec;
  spec.n_points = 1u << 12;
  Rng rng(83);
  // theta = i_X Omega itself: L_X theta = 0, so the estimate is exactly 0
  auto exact = orthogonality_check(f, i_x_volume(f), spec);
  CHECK(exact.value == 0.0);
  for (int i = 0; i < 4; ++i) {
    std::vector<FormAtom> atoms = random_bump_field(f, 3, 2, rng).atoms();
    Eigen::VectorXi q(3);
    for (int j = 0; j < 3; ++j) q(j) = rng.uniform_int(-2, 2);
    atoms.push_back(make_bump_atom(f, 0b0111, q, rng.uniform(0.0, 6.28)));
    auto est = orthogonality_check(f, FormField(3, std::move(atoms)), spec);
    INFO("trial " << i << " value " << est.value << " sigma " << est.sigma);
    CHECK(consistent_with_zero(est.value, est.sigma));
  }
  CHECK_THROWS_AS(orthogonality_check(f, random_bump_field(f, 2, 1, rng), spec),
                  std::invalid_argument);
}

TEST_CASE("weak closedness of the canonical 1-form") {
  SuspensionFlow f = SuspensionFlow::default_model();
  QuadratureSpec spec;
  spec.n_points = 1u << 12;
  Rng rng(84);
  for (int i = 0; i < 4; ++i) {
    auto w = random_bump_field(f, 2, 2, rng);
    auto est = weak_closedness(f, w, spec);
    INFO("trial " << i << " value " << est.value << " sigma " << est.sigma);
    CHECK(consistent_with_zero(est.value, est.sigma));
  }
  CHECK_THROWS_AS(weak_closedness(f, random_bump_field(f, 1, 1, rng), spec),
                  std::invalid_argument);
}

TEST_CASE("periodic-orbit integrals") {
  SuspensionFlow f = SuspensionFlow::default_model();
  Rng rng(85);
  FormField alpha = canonical_alpha(f);
  auto xi = random_bump_field(f, 1, 2, rng);
  FormField lxi = lie_derivative_field(f, xi, DerivativeMode::analytic);
  for (int p = 1; p <= 3; ++p) {
    for (const auto& pt : periodic_points(f, p)) {
      auto oa = orbit_obstruction(f, alpha, pt, p);
      CHECK(oa.value == Catch::Approx(static_cast<double>(p)).margin(1e-10));
      auto oc = orbit_obstruction(f, lxi, pt, p);
      CHECK(std::abs(oc.value) < 1e-10);
    }
  }
  Point not_periodic = f.make_point(Eigen::VectorXd::Constant(3, 0.123), 0.0);
  CHECK_THROWS_AS(orbit_obstruction(f, alpha, not_periodic, 1), std::invalid_argument);
  auto two = random_bump_field(f, 2, 1, rng);
  Point fixed = f.make_point(Eigen::VectorXd::Zero(3), 0.0);
  CHECK_THROWS_AS(orbit_obstruction(f, two, fixed, 1), std::invalid_argument);
}

TEST_CASE("error bars are honest across seeds") {
  SuspensionFlow f = SuspensionFlow::default_model();
  Rng rng(86);
  auto a = random_bump_field(f, 2, 2, rng);
  auto b = random_matched_field(f, 2, a, rng);
  QuadratureSpec s1, s2;
  s1.n_points = s2.n_points = 1u << 12;
  s1.seed = 11;
  s2.seed = 707;
  auto e1 = l2_inner(f, a, b, s1);
  auto e2 = l2_inner(f, a, b, s2);
  CHECK(std::abs(e1.value - e2.value) <= 6.0 * (e1.sigma + e2.sigma) + 1e-10);
  QuadratureSpec bad;
  bad.shifts = 1;
  CHECK_THROWS_AS(l2_inner(f, a, b, bad), std::invalid_argument);
}
