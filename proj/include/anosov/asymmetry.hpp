#pragma once

// Backward-time contraction of (n-2)-parallelepiped volumes with one side
// in the strong unstable bundle: series measurement in the log domain,
// exponential-rate fitting, and the asymmetry verdict over stratified and
// random side configurations.

#include <algorithm>
#include <cmath>
#include <functional>
#include <stdexcept>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "anosov/exterior.hpp"
#include "anosov/rng.hpp"
#include "anosov/suspension.hpp"

namespace anosov {

struct SeriesPoint {
  double t = 0.0;
  double log_volume = 0.0;
};

struct RateFit {
  double C_hat = 0.0;   // envelope constant: max_t vol(t) e^{nu_hat t}
  double nu_hat = 0.0;  // decay rate per unit time
  double r2 = 0.0;      // regression quality on the fitted window
  double t_min = 0.0;   // fitted window
  double t_max = 0.0;
};

inline std::vector<double> default_t_grid(double t_max = 40.0, int points = 81) {
  std::vector<double> g(points);
  for (int i = 0; i < points; ++i) g[i] = t_max * static_cast<double>(i) / (points - 1);
  return g;
}

/// log vol_g(Tf_{-t}(v_1 ^ ... ^ v_{j-1} ^ Y)) over the grid. sides[0] must
/// be the unit strong-unstable section at p; all sides unit, independent.
inline std::vector<SeriesPoint> contraction_series(const SuspensionFlow& f, const Point& p,
                                                   const std::vector<TangentVector>& sides,
                                                   const std::vector<double>& t_grid) {
  if (sides.empty()) throw std::invalid_argument("contraction_series: no sides");
  TangentVector Y = unstable_section(f, p);
  // direction check in frame coordinates
  Eigen::VectorXd a = f.frame_coords(sides[0]).normalized();
  Eigen::VectorXd b = f.frame_coords(Y).normalized();
  if (std::min((a - b).norm(), (a + b).norm()) > 1e-9)
    throw std::invalid_argument("contraction_series: sides[0] must be the unit E^uu section");
  for (const auto& v : sides)
    if (std::abs(g_norm(f, v) - 1.0) > 1e-6)
      throw std::invalid_argument("contraction_series: sides must be unit in the Anosov metric");

  const int n = f.dim();
  std::vector<SeriesPoint> out;
  out.reserve(t_grid.size());
  for (double t : t_grid) {
    double logscale = 0.0;
    std::vector<Eigen::VectorXd> coords;
    Point q;
    for (const auto& v : sides) {
      auto [w, ls] = tangent_flow_log(f, v, -t);
      logscale += ls;
      q = w.base;
      Eigen::VectorXd full(n);
      full.head(n - 1) = w.torus;
      full(n - 1) = w.ds;
      coords.push_back(std::move(full));
    }
    double vol = k_volume(coords, anosov_metric(f, q.s));
    if (t == t_grid.front() && vol <= 1e-12)
      throw std::invalid_argument("contraction_series: degenerate side set");
    out.push_back({t, std::log(vol) + logscale});
  }
  return out;
}

/// Least-squares exponential fit on the asymptotic tail of the series (last
/// 40% of the time span, where mixed-direction series have settled onto
/// their slowest mode). C_hat is the envelope constant over the whole
/// series, so vol(t) <= C_hat e^{-nu_hat t} holds at every sample.
inline RateFit fit_rate(const std::vector<SeriesPoint>& series) {
  if (series.size() < 8) throw std::invalid_argument("fit_rate: need at least 8 points");
  double span = series.back().t - series.front().t;
  if (span < 10.0) throw std::invalid_argument("fit_rate: need a time spread of at least 10");
  double cut = series.front().t + 0.6 * span;
  std::vector<double> ts, ys;
  for (const auto& sp : series)
    if (sp.t >= cut - 1e-12) {
      ts.push_back(sp.t);
      ys.push_back(sp.log_volume);
    }
  auto fit = detail::least_squares_line(ts, ys);
  RateFit out;
  out.nu_hat = -fit.slope;
  out.r2 = fit.r2;
  out.t_min = ts.front();
  out.t_max = ts.back();
  double log_c = -std::numeric_limits<double>::infinity();
  for (const auto& sp : series)
    log_c = std::max(log_c, sp.log_volume + out.nu_hat * sp.t);
  out.C_hat = std::exp(log_c);
  return out;
}

struct ConfigResult {
  std::string label;
  RateFit fit;
  bool bound_ok = false;  // vol(t) <= C_hat e^{-nu_hat t} (1 + tol) everywhere
  std::vector<SeriesPoint> series;
};

struct AsymmetryReport {
  bool asymmetric = false;
  double min_nu = 0.0;
  ConfigResult worst;
  std::vector<ConfigResult> configs;
};

namespace detail {

inline TangentVector unit_frame_side(const SuspensionFlow& f, const Point& p, int col) {
  Eigen::VectorXd w = Eigen::VectorXd::Zero(f.dim());
  w(col) = 1.0;
  TangentVector v = f.from_frame_coords(p, w);
  double nrm = g_norm(f, v);
  v.torus /= nrm;
  v.ds /= nrm;
  return v;
}

inline TangentVector random_unit_side(const SuspensionFlow& f, const Point& p, Rng& rng) {
  Eigen::VectorXd full = rng.gaussian_vector(f.dim());
  TangentVector v{p, full.head(f.dim() - 1), full(f.dim() - 1)};
  double nrm = g_norm(f, v);
  v.torus /= nrm;
  v.ds /= nrm;
  return v;
}

}  // namespace detail

/// Verdict over stratified deterministic configurations (the unit E^uu
/// section paired with every choice of remaining frame directions, hitting
/// the worst case deterministically) plus seeded random ones, including
/// lower-dimensional side counts. True iff every fitted rate exceeds tol
/// and every series respects its own envelope bound.
inline AsymmetryReport is_asymmetric(const SuspensionFlow& f, int samples, double tol,
                                     std::uint64_t seed = 11,
                                     const std::vector<double>& t_grid = default_t_grid()) {
  const int n = f.dim();
  if (n < 4) throw std::invalid_argument("this notion makes sense only if n >= 4");
  if (samples < 1) throw std::invalid_argument("is_asymmetric: samples must be >= 1");

  Rng rng(seed);
  int y_col = -1;
  for (const auto& b : f.poincare().blocks())
    if (b.unstable) {
      y_col = b.col;
      break;
    }

  AsymmetryReport rep;
  auto run_config = [&](const Point& p, const std::vector<TangentVector>& sides,
                        const std::string& label) {
    auto series = contraction_series(f, p, sides, t_grid);
    ConfigResult cr;
    cr.label = label;
    cr.fit = fit_rate(series);
    cr.bound_ok = true;
    double log_bound_slack = std::log1p(tol);
    double log_c = std::log(cr.fit.C_hat);
    for (const auto& sp : series)
      if (sp.log_volume > log_c - cr.fit.nu_hat * sp.t + log_bound_slack) cr.bound_ok = false;
    cr.series = std::move(series);
    rep.configs.push_back(std::move(cr));
  };

  // deterministic strata: remaining sides from the other frame columns
  {
    Point p = f.make_point(rng.gaussian_vector(n - 1), rng.uniform());
    std::vector<int> others;
    for (int c = 0; c < n; ++c)
      if (c != y_col) others.push_back(c);
    const int extra = n - 3;  // full dimension n-2 including Y
    std::vector<int> pick(extra);
    std::function<void(int, int)> enumerate = [&](int start, int depth) {
      if (depth == extra) {
        std::vector<TangentVector> sides{unstable_section(f, p)};
        std::string label = "frame:u";
        for (int idx : pick) {
          sides.push_back(detail::unit_frame_side(f, p, others[idx]));
          label += "+" + std::to_string(others[idx]);
        }
        run_config(p, sides, label);
        return;
      }
      for (int i = start; i < static_cast<int>(others.size()); ++i) {
        pick[depth] = i;
        enumerate(i + 1, depth + 1);
      }
    };
    enumerate(0, 0);
  }

  // random configurations, full and lower-dimensional side counts
  for (int s = 0; s < samples; ++s) {
    Point p = f.make_point(rng.gaussian_vector(n - 1), rng.uniform());
    int count = n - 2;
    if (s % 3 == 2) count = 1 + (s % (n - 3));  // lower-dimensional remark
    std::vector<TangentVector> sides{unstable_section(f, p)};
    for (int j = 1; j < count; ++j) sides.push_back(detail::random_unit_side(f, p, rng));
    run_config(p, sides, "rand:" + std::to_string(s) + ":k" + std::to_string(count));
  }

  rep.min_nu = std::numeric_limits<double>::infinity();
  bool bounds = true;
  for (const auto& cr : rep.configs) {
    if (cr.fit.nu_hat < rep.min_nu) {
      rep.min_nu = cr.fit.nu_hat;
      rep.worst = cr;
    }
    bounds = bounds && cr.bound_ok;
  }
  rep.asymmetric = rep.min_nu > tol && bounds;
  return rep;
}

}  // namespace anosov
