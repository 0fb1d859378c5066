#pragma once

// One-dimensional composite Gauss-Legendre quadrature with caller-supplied
// breakpoints (deck crossings, bump-support edges) and doubling refinement.
// Integrands here are piecewise smooth between breakpoints, so 8-node
// panels converge spectrally once the pieces are isolated.

#include <algorithm>
#include <cmath>
#include <functional>
#include <vector>

#include "anosov/rng.hpp"

namespace anosov {

namespace detail {
inline constexpr double kGaussNodes8[4] = {
    0.18343464249564980, 0.52553240991632899, 0.79666647741362674, 0.96028985649753623};
inline constexpr double kGaussWeights8[4] = {
    0.36268378337836198, 0.31370664587788729, 0.22238103445337447, 0.10122853629037626};
}  // namespace detail

/// 8-node Gauss-Legendre on a single interval.
inline double gauss8(const std::function<double(double)>& fn, double a, double b) {
  const double mid = 0.5 * (a + b);
  const double half = 0.5 * (b - a);
  double acc = 0.0;
  for (int i = 0; i < 4; ++i) {
    double d = half * detail::kGaussNodes8[i];
    acc += detail::kGaussWeights8[i] * (fn(mid - d) + fn(mid + d));
  }
  return acc * half;
}

/// Panel edges: [a, b] cut at the interior breakpoints, then each piece
/// subdivided so no panel exceeds max_panel.
inline std::vector<double> panel_edges(double a, double b, std::vector<double> breakpoints,
                                       double max_panel) {
  std::vector<double> cuts{a, b};
  for (double c : breakpoints)
    if (c > a && c < b) cuts.push_back(c);
  std::sort(cuts.begin(), cuts.end());
  cuts.erase(std::unique(cuts.begin(), cuts.end(),
                         [](double x, double y) { return std::abs(x - y) < 1e-14; }),
             cuts.end());
  std::vector<double> edges{cuts.front()};
  for (std::size_t i = 0; i + 1 < cuts.size(); ++i) {
    double len = cuts[i + 1] - cuts[i];
    int panels = std::max(1, static_cast<int>(std::ceil(len / max_panel)));
    for (int p = 1; p <= panels; ++p)
      edges.push_back(cuts[i] + len * static_cast<double>(p) / panels);
  }
  return edges;
}

inline double composite_gauss(const std::function<double(double)>& fn, double a, double b,
                              const std::vector<double>& breakpoints, double max_panel = 0.5) {
  if (b == a) return 0.0;
  if (b < a) return -composite_gauss(fn, b, a, breakpoints, max_panel);
  auto edges = panel_edges(a, b, breakpoints, max_panel);
  std::vector<double> parts;
  parts.reserve(edges.size() - 1);
  for (std::size_t i = 0; i + 1 < edges.size(); ++i)
    parts.push_back(gauss8(fn, edges[i], edges[i + 1]));
  return pairwise_sum(parts);
}

struct QuadratureResult {
  double value = 0.0;
  double error = 0.0;  // last doubling increment, a conservative estimate
  int refinements = 0;
};

/// Refine by halving the panel cap until the change drops below tol.
inline QuadratureResult refined_gauss(const std::function<double(double)>& fn, double a,
                                      double b, const std::vector<double>& breakpoints,
                                      double tol, double max_panel = 0.5,
                                      int max_refinements = 12) {
  QuadratureResult r;
  double panel = max_panel;
  r.value = composite_gauss(fn, a, b, breakpoints, panel);
  r.error = std::abs(r.value);
  for (int i = 0; i < max_refinements; ++i) {
    panel *= 0.5;
    double next = composite_gauss(fn, a, b, breakpoints, panel);
    r.error = std::abs(next - r.value);
    r.value = next;
    ++r.refinements;
    if (r.error <= tol) break;
  }
  return r;
}

}  // namespace anosov
