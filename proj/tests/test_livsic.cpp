#include <catch_amalgamated.hpp>

#include <cmath>

#include "anosov/asymmetry.hpp"
#include "anosov/form_fields.hpp"
#include "anosov/livsic.hpp"
#include "anosov/suspension.hpp"

using namespace anosov;

namespace {

RateFit measured_rates(const SuspensionFlow& f) {
  auto hc = measure_constants(f, default_t_grid(20.0, 41), 20);
  RateFit r;
  r.nu_hat = hc.nu;
  r.C_hat = hc.c;
  r.r2 = 1.0;
  return r;
}

std::vector<TangentVector> random_args(const SuspensionFlow& f, const Point& p, int k, Rng& rng) {
  std::vector<TangentVector> vs;
  for (int j = 0; j < k; ++j) {
    Eigen::VectorXd full = rng.gaussian_vector(f.dim());
    vs.push_back(TangentVector{p, full.head(f.dim() - 1), full(f.dim() - 1)});
  }
  return vs;
}

}  // namespace

TEST_CASE("case split reassembles the arguments") {
  SuspensionFlow f = SuspensionFlow::default_model();
  Rng rng(71);
  auto xi = random_bump_field(f, 2, 2, rng);
  for (int i = 0; i < 20; ++i) {
    Point p = f.make_point(rng.gaussian_vector(3), rng.uniform());
    auto vs = random_args(f, p, 2, rng);
    auto split = case_split(f, p, vs);
    double direct = evaluate(f, xi, p, vs);
    std::vector<double> parts;
    for (const auto& term : split.terms)
      parts.push_back(term.sign * evaluate(f, xi, p, term.vs));
    CHECK(pairwise_sum(parts) == Catch::Approx(direct).margin(1e-10));
    // every term is labeled consistently
    for (const auto& term : split.terms) CHECK((term.case_id == 1 || term.case_id == 2));
  }
}

TEST_CASE("closed-form solutions in both cases") {
  SuspensionFlow f = SuspensionFlow::default_model();
  RateFit rates = measured_rates(f);
  const double rho = std::exp(f.poincare().unstable_log_modulus());
  const double lr = std::log(rho);
  Rng rng(72);

  FormField xi_u(2, {make_eigen_atom(f, 0b1001)});  // u ^ ds, unstable arguments
  FormField xi_s(2, {make_eigen_atom(f, 0b0110)});  // stable pair
  for (int i = 0; i < 10; ++i) {
    Point p = f.make_point(rng.gaussian_vector(3), rng.uniform());
    // Case 2: at least one unstable component
    std::vector<TangentVector> vu{
        TangentVector{p, f.frame().col(0).head(3), 0.0},
        TangentVector{p, Eigen::VectorXd::Zero(3), 1.0}};
    auto ru = solve(f, xi_u, p, vu, 1e-8, rates);
    CHECK(ru.value == Catch::Approx(std::pow(rho, p.s) / lr).margin(1e-7));
    CHECK(ru.tail_bound + ru.quad_error < 1e-8);
    // Case 1: both arguments in the stable bundle
    std::vector<TangentVector> vs{
        TangentVector{p, f.frame().col(1).head(3), 0.0},
        TangentVector{p, f.frame().col(2).head(3), 0.0}};
    auto rs = solve(f, xi_s, p, vs, 1e-8, rates);
    CHECK(rs.value == Catch::Approx(-std::pow(rho, -p.s) / lr).margin(1e-7));
  }
}

TEST_CASE("manufactured solution is recovered") {
  SuspensionFlow f = SuspensionFlow::default_model();
  RateFit rates = measured_rates(f);
  Rng rng(73);
  auto eta0 = random_bump_field(f, 2, 2, rng);
  FormField xi = lie_derivative_field(f, eta0, DerivativeMode::analytic);
  for (int i = 0; i < 25; ++i) {
    Point p = f.make_point(rng.gaussian_vector(3), rng.uniform());
    auto vs = random_args(f, p, 2, rng);
    auto res = solve(f, xi, p, vs, 1e-7, rates);
    double expect = evaluate(f, eta0, p, vs);
    CHECK(std::abs(res.value - expect) < 1e-6);
  }
}

TEST_CASE("solver is linear in the data") {
  SuspensionFlow f = SuspensionFlow::default_model();
  RateFit rates = measured_rates(f);
  Rng rng(74);
  auto xi1 = random_bump_field(f, 2, 1, rng);
  auto xi2 = random_bump_field(f, 2, 1, rng);
  std::vector<FormAtom> sum_atoms = xi1.atoms();
  for (FormAtom a : xi2.atoms()) {
    a.weight *= 2.0;
    sum_atoms.push_back(a);
  }
  FormField combo(2, std::move(sum_atoms));
  Point p = f.make_point(rng.gaussian_vector(3), 0.4);
  auto vs = random_args(f, p, 2, rng);
  double tol = 1e-8;
  double v1 = solve(f, xi1, p, vs, tol, rates).value;
  double v2 = solve(f, xi2, p, vs, tol, rates).value;
  double vc = solve(f, combo, p, vs, tol, rates).value;
  CHECK(std::abs(vc - (v1 + 2.0 * v2)) < 2.0 * tol + 1e-9);
}

TEST_CASE("degree guard refuses endpoint degrees") {
  SuspensionFlow f = SuspensionFlow::default_model();
  RateFit rates = measured_rates(f);
  Rng rng(75);
  Point p = f.make_point(rng.gaussian_vector(3), 0.3);
  auto xi1 = random_bump_field(f, 1, 1, rng);
  auto xi3 = random_bump_field(f, 3, 1, rng);
  CHECK_THROWS_WITH(solve(f, xi1, p, random_args(f, p, 1, rng), 1e-6, rates),
                    Catch::Matchers::ContainsSubstring("refused"));
  CHECK_THROWS_WITH(eta_t(f, xi3, p, random_args(f, p, 3, rng), 5.0),
                    Catch::Matchers::ContainsSubstring("uniqueness not guaranteed"));
}

TEST_CASE("solver refuses without measured contraction") {
  SuspensionFlow f = SuspensionFlow::default_model();
  Rng rng(76);
  auto xi = random_bump_field(f, 2, 1, rng);
  Point p = f.make_point(rng.gaussian_vector(3), 0.3);
  RateFit bad;
  bad.nu_hat = 0.0;
  CHECK_THROWS_WITH(solve(f, xi, p, random_args(f, p, 2, rng), 1e-6, bad),
                    Catch::Matchers::ContainsSubstring("refusing"));
}

TEST_CASE("residual identity of the truncated solution") {
  SuspensionFlow f = SuspensionFlow::default_model();
  Rng rng(77);
  auto xi = random_bump_field(f, 2, 2, rng);
  for (int i = 0; i < 5; ++i) {
    Point p = f.make_point(rng.gaussian_vector(3), rng.uniform());
    auto vs = random_args(f, p, 2, rng);
    CHECK(residual_identity(f, xi, p, vs, 8.0) < 1e-6);
  }
}

TEST_CASE("convergence at the unstable rate, with the exact tail") {
  SuspensionFlow f = SuspensionFlow::default_model();
  RateFit rates = measured_rates(f);
  const double rho = std::exp(f.poincare().unstable_log_modulus());
  const double lr = std::log(rho);
  FormField xi_u(2, {make_eigen_atom(f, 0b1001)});
  Point p = f.make_point(Eigen::VectorXd::Zero(3), 0.37);
  std::vector<TangentVector> vs{
      TangentVector{p, f.frame().col(0).head(3), 0.0},
      TangentVector{p, Eigen::VectorXd::Zero(3), 1.0}};
  std::vector<double> ts{4.0, 8.0, 12.0, 16.0, 20.0};
  auto prof = convergence_profile(f, xi_u, p, vs, ts, rates, 1e-11);
  std::vector<double> tt, lg;
  for (const auto& cp : prof) {
    // exact truncation tail for this data: rho^{s0 - t} / log rho
    double exact = std::pow(rho, p.s - cp.t) / lr;
    CHECK(cp.gap == Catch::Approx(exact).epsilon(1e-4));
    tt.push_back(cp.t);
    lg.push_back(std::log(cp.gap));
  }
  auto fit = anosov::detail::least_squares_line(tt, lg);
  CHECK(fit.slope == Catch::Approx(-lr).epsilon(0.02));

  CHECK_THROWS_AS(convergence_profile(f, xi_u, p, vs, {5.0, 2.0}, rates),
                  std::invalid_argument);
  CHECK_THROWS_AS(eta_t(f, xi_u, p, vs, -1.0), std::invalid_argument);
}
