#pragma once

// L^2 pairings of form fields by rank-1 lattice quadrature over the unit
// cube fundamental domain, with error bars from randomly shifted replicas;
// the adjoint identity for L_X, the Lambda^{n-1} orthogonality, weak
// closedness of alpha, the star(i_X Omega) identity, and periodic-orbit
// obstruction integrals.

#include <cmath>
#include <functional>
#include <stdexcept>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "anosov/exterior.hpp"
#include "anosov/form_fields.hpp"
#include "anosov/livsic.hpp"
#include "anosov/quadrature.hpp"
#include "anosov/rng.hpp"
#include "anosov/smith.hpp"
#include "anosov/suspension.hpp"

namespace anosov {

struct QuadratureSpec {
  std::uint32_t n_points = 1u << 16;
  int shifts = 8;
  std::uint64_t seed = 2024;
};

struct Estimate {
  double value = 0.0;
  double sigma = 0.0;
  std::vector<double> replicas;  // per-shift means
};

namespace detail {

inline std::vector<std::uint64_t> korobov_vector(int dim, std::uint64_t n) {
  const std::uint64_t a = 17797;
  std::vector<std::uint64_t> z(dim);
  z[0] = 1;
  for (int j = 1; j < dim; ++j) z[j] = (z[j - 1] * a) % n;
  return z;
}

}  // namespace detail

/// Average of a pointwise function over the manifold (coordinate volume,
/// total mass 1) by a Korobov lattice with Cranley-Patterson shifts.
inline Estimate lattice_estimate(const SuspensionFlow& f,
                                 const std::function<double(const Point&)>& integrand,
                                 const QuadratureSpec& spec) {
  if (spec.shifts < 2) throw std::invalid_argument("need at least 2 shifts for an error bar");
  const int d = f.dim();
  const std::uint64_t N = spec.n_points;
  auto z = detail::korobov_vector(d, N);
  Rng rng(spec.seed);
  Estimate est;
  for (int b = 0; b < spec.shifts; ++b) {
    std::vector<double> shift(d);
    for (int j = 0; j < d; ++j) shift[j] = rng.uniform();
    std::vector<double> block_sums;
    double block = 0.0;
    Eigen::VectorXd x(d - 1);
    for (std::uint64_t i = 0; i < N; ++i) {
      for (int j = 0; j < d - 1; ++j) {
        double c = static_cast<double>((i * z[j]) % N) / static_cast<double>(N) + shift[j];
        x(j) = c - std::floor(c);
      }
      double cs = static_cast<double>((i * z[d - 1]) % N) / static_cast<double>(N) + shift[d - 1];
      cs -= std::floor(cs);
      block += integrand(Point{x, cs});
      if ((i & 0xFFF) == 0xFFF) {
        block_sums.push_back(block);
        block = 0.0;
      }
    }
    block_sums.push_back(block);
    est.replicas.push_back(pairwise_sum(block_sums) / static_cast<double>(N));
  }
  est.value = pairwise_sum(est.replicas) / spec.shifts;
  double var = 0.0;
  for (double r : est.replicas) var += (r - est.value) * (r - est.value);
  var /= (spec.shifts - 1);
  est.sigma = std::sqrt(var / spec.shifts);
  return est;
}

/// Several integrands sharing one pass over the lattice points.
inline std::vector<Estimate> lattice_estimate_multi(
    const SuspensionFlow& f,
    const std::function<void(const Point&, double*)>& integrand, int outputs,
    const QuadratureSpec& spec) {
  if (spec.shifts < 2) throw std::invalid_argument("need at least 2 shifts for an error bar");
  const int d = f.dim();
  const std::uint64_t N = spec.n_points;
  auto z = detail::korobov_vector(d, N);
  Rng rng(spec.seed);
  std::vector<Estimate> est(outputs);
  std::vector<double> vals(outputs);
  for (int b = 0; b < spec.shifts; ++b) {
    std::vector<double> shift(d);
    for (int j = 0; j < d; ++j) shift[j] = rng.uniform();
    std::vector<std::vector<double>> block_sums(outputs);
    std::vector<double> block(outputs, 0.0);
    Eigen::VectorXd x(d - 1);
    for (std::uint64_t i = 0; i < N; ++i) {
      for (int j = 0; j < d - 1; ++j) {
        double c = static_cast<double>((i * z[j]) % N) / static_cast<double>(N) + shift[j];
        x(j) = c - std::floor(c);
      }
      double cs = static_cast<double>((i * z[d - 1]) % N) / static_cast<double>(N) + shift[d - 1];
      cs -= std::floor(cs);
      integrand(Point{x, cs}, vals.data());
      for (int o = 0; o < outputs; ++o) block[o] += vals[o];
      if ((i & 0xFFF) == 0xFFF)
        for (int o = 0; o < outputs; ++o) {
          block_sums[o].push_back(block[o]);
          block[o] = 0.0;
        }
    }
    for (int o = 0; o < outputs; ++o) {
      block_sums[o].push_back(block[o]);
      est[o].replicas.push_back(pairwise_sum(block_sums[o]) / static_cast<double>(N));
    }
  }
  for (int o = 0; o < outputs; ++o) {
    est[o].value = pairwise_sum(est[o].replicas) / spec.shifts;
    double var = 0.0;
    for (double r : est[o].replicas) var += (r - est[o].value) * (r - est[o].value);
    est[o].sigma = std::sqrt(var / (spec.shifts - 1) / spec.shifts);
  }
  return est;
}

/// <w, e>_g = integral of the pointwise metric inner product against the
/// volume form (coordinate volume, density 1).
inline Estimate l2_inner(const SuspensionFlow& f, const FormField& w, const FormField& e,
                         const QuadratureSpec& spec) {
  if (w.degree() != e.degree()) throw std::invalid_argument("l2_inner: degree mismatch");
  return lattice_estimate(
      f,
      [&](const Point& p) {
        MetricFrame m = anosov_metric(f, p.s);
        return inner(coordinate_altform(f, w, p), coordinate_altform(f, e, p), m);
      },
      spec);
}

struct PointwiseReport {
  double max_deviation = 0.0;
  bool pass = false;
};

/// star_g(i_X Omega) = (-1)^{n-1} alpha pointwise. An alternative metric
/// factory can be supplied as a negative control (non-Anosov metrics break
/// the orthogonality premise).
inline PointwiseReport star_alpha_identity(
    const SuspensionFlow& f, double tol, int samples = 64, std::uint64_t seed = 5,
    const std::function<MetricFrame(double)>& metric = {}) {
  auto metric_at = metric ? metric : [&f](double s) { return anosov_metric(f, s); };
  FormField ixo = i_x_volume(f);
  FormField alpha = canonical_alpha(f);
  const int n = f.dim();
  double sign = (n - 1) % 2 ? -1.0 : 1.0;
  Rng rng(seed);
  PointwiseReport rep;
  for (int i = 0; i < samples; ++i) {
    Point p = f.make_point(rng.gaussian_vector(n - 1), rng.uniform());
    AltForm lhs = hodge_star(coordinate_altform(f, ixo, p), metric_at(p.s));
    AltForm rhs = coordinate_altform(f, alpha, p);
    rhs *= sign;
    rep.max_deviation = std::max(rep.max_deviation, (lhs - rhs).max_abs_coeff());
  }
  rep.pass = rep.max_deviation <= tol;
  return rep;
}

namespace detail {

inline Eigen::MatrixXd flow_jacobian(const SuspensionFlow& f, double s, double tau) {
  const int n = f.dim();
  long long m = deck_crossings(s, tau);
  Eigen::MatrixXd J = Eigen::MatrixXd::Identity(n, n);
  Eigen::MatrixXd T = Eigen::MatrixXd::Identity(n - 1, n - 1);
  const Eigen::MatrixXd A = f.poincare().matrix().cast<double>();
  const Eigen::MatrixXd Ainv = f.poincare().inverse_matrix().cast<double>();
  for (long long i = 0; i < (m >= 0 ? m : -m); ++i) T = (m >= 0 ? A : Ainv) * T;
  J.topLeftCorner(n - 1, n - 1) = T;
  return J;
}

/// Coordinate coefficients of f_tau^* w at p (pullback of the coefficient
/// field through the flow Jacobian).
inline AltForm pullback_altform(const SuspensionFlow& f, const FormField& w, const Point& p,
                                double tau) {
  Point q = flow(f, p, tau);
  AltForm a = coordinate_altform(f, w, q);
  return compound_apply(flow_jacobian(f, p.s, tau).transpose(), a);
}

/// Richardson central difference of tau -> pullback_altform(star w) at p:
/// the coordinate coefficients of L_X(star_g w).
inline AltForm lie_star_altform(const SuspensionFlow& f, const FormField& w, const Point& p,
                                double h, AltForm* coarse = nullptr) {
  auto star_at = [&](double tau) {
    Point q = flow(f, p, tau);
    AltForm a = coordinate_altform(f, w, q);
    AltForm sa = hodge_star(a, anosov_metric(f, q.s));
    return compound_apply(flow_jacobian(f, p.s, tau).transpose(), sa);
  };
  auto central = [&](double step) {
    AltForm d = star_at(step) - star_at(-step);
    d *= 1.0 / (2.0 * step);
    return d;
  };
  AltForm fine = central(h / 2.0);
  AltForm rough = central(h);
  if (coarse) *coarse = rough;
  fine *= 4.0 / 3.0;
  rough *= 1.0 / 3.0;
  return fine - rough;
}

}  // namespace detail

struct AdjointResult {
  double residual = 0.0;  // <L_X xi, eta> - sign <xi, star L_X star eta>
  double sigma = 0.0;     // quadrature + finite-difference error, combined
  double lhs = 0.0;
  double rhs = 0.0;
};

/// Prop.-style adjoint check: both sides computed by independent routes
/// (analytic Lie derivative on the left, Hodge-conjugated finite
/// difference on the right) in one lattice pass, so the residual carries
/// the correlated error bar.
inline AdjointResult adjoint_residual(const SuspensionFlow& f, const FormField& xi,
                                      const FormField& eta, const QuadratureSpec& spec,
                                      double h = kDefaultFdStep) {
  if (xi.degree() != eta.degree()) throw std::invalid_argument("adjoint: degree mismatch");
  const int n = f.dim();
  const int k = xi.degree();
  const double sign = ((k * (n - k) + 1) % 2) ? -1.0 : 1.0;
  FormField lxi = lie_derivative_field(f, xi, DerivativeMode::analytic);

  auto parts = lattice_estimate_multi(
      f,
      [&](const Point& p, double* out) {
        MetricFrame m = anosov_metric(f, p.s);
        AltForm xi_alt = coordinate_altform(f, xi, p);
        double lhs_pt = inner(coordinate_altform(f, lxi, p), coordinate_altform(f, eta, p), m);
        AltForm lie = detail::lie_star_altform(f, eta, p, h);
        double rhs_pt = inner(xi_alt, hodge_star(lie, m), m);
        out[0] = lhs_pt - sign * rhs_pt;
        out[1] = lhs_pt;
        out[2] = rhs_pt;
      },
      3, spec);
  const Estimate& diff = parts[0];
  const Estimate& lhs = parts[1];
  const Estimate& rhs = parts[2];

  // finite-difference bias estimate on a small subsample
  double fd_bias = 0.0;
  {
    Rng rng(spec.seed + 97);
    const int probes = 64;
    std::vector<double> diffs;
    for (int i = 0; i < probes; ++i) {
      Point p = f.make_point(rng.gaussian_vector(n - 1), rng.uniform());
      MetricFrame m = anosov_metric(f, p.s);
      AltForm rough(n, n - k);
      AltForm rich = detail::lie_star_altform(f, eta, p, h, &rough);
      double a = inner(coordinate_altform(f, xi, p), hodge_star(rich, m), m);
      double b = inner(coordinate_altform(f, xi, p), hodge_star(rough, m), m);
      diffs.push_back(std::abs(a - b));
    }
    fd_bias = pairwise_sum(diffs) / probes;
  }

  AdjointResult out;
  out.lhs = lhs.value;
  out.rhs = sign * rhs.value;
  out.residual = diff.value;
  out.sigma = diff.sigma + fd_bias;
  return out;
}

/// <L_X Theta, i_X Omega>_g for (n-1)-forms Theta: must vanish by the
/// orthogonal decomposition of L^2 Lambda^{n-1}.
inline Estimate orthogonality_check(const SuspensionFlow& f, const FormField& theta,
                                    const QuadratureSpec& spec) {
  if (theta.degree() != f.dim() - 1)
    throw std::invalid_argument("orthogonality_check: degree must be n-1");
  FormField ltheta = lie_derivative_field(f, theta, DerivativeMode::analytic);
  return l2_inner(f, ltheta, i_x_volume(f), spec);
}

/// integral of d(omega) ^ alpha over M for (n-2)-forms omega: must vanish
/// (alpha is weakly closed).
inline Estimate weak_closedness(const SuspensionFlow& f, const FormField& w,
                                const QuadratureSpec& spec) {
  if (w.degree() != f.dim() - 2)
    throw std::invalid_argument("weak_closedness: degree must be n-2");
  FormField dw = exterior_derivative(f, w);
  FormField alpha = canonical_alpha(f);
  const Mask full = (Mask{1} << f.dim()) - 1;
  return lattice_estimate(
      f,
      [&](const Point& p) {
        AltForm a = coordinate_altform(f, dw, p);
        AltForm b = coordinate_altform(f, alpha, p);
        return wedge(a, b).coeff(full);
      },
      spec);
}

struct OrbitIntegral {
  Point start;
  int period = 0;
  double value = 0.0;
};

/// Closed-orbit integral of a degree-0 or degree-1 field over t in [0, p].
inline OrbitIntegral orbit_obstruction(const SuspensionFlow& f, const FormField& w,
                                       const Point& orbit_start, int period,
                                       double quad_tol = 1e-12) {
  if (w.degree() > 1)
    throw std::invalid_argument("orbit_obstruction: degree must be 0 or 1");
  if (period < 1) throw std::invalid_argument("orbit_obstruction: period must be >= 1");
  Point back = flow(f, orbit_start, static_cast<double>(period));
  if (!same_base(back, orbit_start, 1e-9))
    throw std::invalid_argument("orbit_obstruction: start point is not periodic");
  auto integrand = [&](double t) {
    Point q = flow(f, orbit_start, t);
    if (w.degree() == 0) return evaluate(f, w, q, {});
    TangentVector X{q, Eigen::VectorXd::Zero(f.torus_dim()), 1.0};
    return evaluate(f, w, q, {X});
  };
  auto bp = detail::flow_breakpoints(orbit_start.s, static_cast<double>(period), +1, w);
  auto qr = refined_gauss(integrand, 0.0, static_cast<double>(period), bp, quad_tol);
  return {orbit_start, period, qr.value};
}

}  // namespace anosov
