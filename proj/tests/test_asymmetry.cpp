#include <catch_amalgamated.hpp>

#include <cmath>

#include "anosov/asymmetry.hpp"
#include "anosov/suspension.hpp"

using namespace anosov;

TEST_CASE("rate fit recovers a synthetic exponential exactly") {
  std::vector<SeriesPoint> series;
  for (double t : default_t_grid(30.0, 61))
    series.push_back({t, std::log(3.0) - 0.2 * t});
  auto fit = fit_rate(series);
  CHECK(fit.nu_hat == Catch::Approx(0.2).margin(1e-10));
  CHECK(fit.C_hat == Catch::Approx(3.0).margin(1e-8));
  CHECK(fit.r2 == Catch::Approx(1.0).margin(1e-12));

  CHECK_THROWS_AS(fit_rate({{0.0, 0.0}, {1.0, 0.0}}), std::invalid_argument);
  std::vector<SeriesPoint> narrow;
  for (int i = 0; i < 10; ++i) narrow.push_back({0.1 * i, 0.0});
  CHECK_THROWS_AS(fit_rate(narrow), std::invalid_argument);
}

TEST_CASE("eigen-direction configurations have the bookkeeping rates") {
  SuspensionFlow f = SuspensionFlow::default_model();
  double lr = f.poincare().unstable_log_modulus();
  Point p = f.make_point(Eigen::VectorXd::Zero(3), 0.25);
  TangentVector Y = unstable_section(f, p);

  // (Y, X): backward volume decays at the full unstable rate
  TangentVector X{p, Eigen::VectorXd::Zero(3), 1.0};
  auto fit_yx = fit_rate(contraction_series(f, p, {Y, X}, default_t_grid()));
  CHECK(fit_yx.nu_hat == Catch::Approx(lr).margin(1e-6));
  CHECK(fit_yx.r2 > 0.999999);

  // (Y, stable column): stable side grows backward at nu, so the rate drops
  // to lambda - nu = nu
  Eigen::VectorXd w = Eigen::VectorXd::Zero(4);
  w(1) = 1.0;
  TangentVector s1 = f.from_frame_coords(p, w);
  double nrm = g_norm(f, s1);
  s1.torus /= nrm;
  s1.ds /= nrm;
  auto fit_ys = fit_rate(contraction_series(f, p, {Y, s1}, default_t_grid()));
  CHECK(fit_ys.nu_hat == Catch::Approx(0.5 * lr).margin(1e-6));
}

TEST_CASE("series input validation") {
  SuspensionFlow f = SuspensionFlow::default_model();
  Point p = f.make_point(Eigen::VectorXd::Zero(3), 0.25);
  TangentVector Y = unstable_section(f, p);
  TangentVector X{p, Eigen::VectorXd::Zero(3), 1.0};
  // first side must be the unstable section
  CHECK_THROWS_AS(contraction_series(f, p, {X, Y}, default_t_grid()), std::invalid_argument);
  // sides must be g-unit
  TangentVector big = Y;
  big.torus *= 2.0;
  CHECK_THROWS_AS(contraction_series(f, p, {big, X}, default_t_grid()), std::invalid_argument);
  // degenerate side set
  CHECK_THROWS_AS(contraction_series(f, p, {Y, Y}, default_t_grid()), std::invalid_argument);
  CHECK_THROWS_AS(contraction_series(f, p, {}, default_t_grid()), std::invalid_argument);
}

TEST_CASE("default model verdict: asymmetric") {
  SuspensionFlow f = SuspensionFlow::default_model();
  auto rep = is_asymmetric(f, 12, 1e-3, 5);
  CHECK(rep.asymmetric);
  CHECK(rep.min_nu >= 0.13);
  for (const auto& cr : rep.configs) {
    CHECK(cr.fit.r2 >= 0.999);
    CHECK(cr.bound_ok);
    CHECK_FALSE(cr.series.empty());
  }
}

TEST_CASE("symmetric control verdict: not asymmetric") {
  SuspensionFlow f = SuspensionFlow::symmetric_control_model();
  auto rep = is_asymmetric(f, 12, 1e-3, 5);
  CHECK_FALSE(rep.asymmetric);
  // some configuration has essentially no decay
  CHECK(rep.min_nu < 1e-3);
}

TEST_CASE("verdict guards") {
  SuspensionFlow f = SuspensionFlow::default_model();
  CHECK_THROWS_AS(is_asymmetric(f, 0, 1e-3), std::invalid_argument);
  Eigen::MatrixXi cat(2, 2);
  cat << 2, 1, 1, 1;
  SuspensionFlow low(HyperbolicAutomorphism(cat));
  CHECK_THROWS_WITH(is_asymmetric(low, 4, 1e-3),
                    Catch::Matchers::ContainsSubstring("n >= 4"));
}

TEST_CASE("fitted rate does not depend on the base point") {
  SuspensionFlow f = SuspensionFlow::default_model();
  Rng rng(61);
  double first = -1.0;
  for (int i = 0; i < 3; ++i) {
    Point p = f.make_point(rng.gaussian_vector(3), rng.uniform());
    TangentVector Y = unstable_section(f, p);
    TangentVector X{p, Eigen::VectorXd::Zero(3), 1.0};
    auto fit = fit_rate(contraction_series(f, p, {Y, X}, default_t_grid()));
    if (first < 0)
      first = fit.nu_hat;
    else
      CHECK(fit.nu_hat == Catch::Approx(first).margin(1e-8));
  }
}
