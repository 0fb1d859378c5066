#pragma once

// Suspension flows of hyperbolic toral automorphisms with constant roof 1:
// flow and tangent-flow maps with co-normalized deck transport, the
// invariant splitting, the canonical 1-form and volume form data, the
// deck-invariant Anosov metric, and hyperbolicity-constant measurement.
//
// Geometry: M = (T^m x [0,1]) / ((x,1) ~ (Ax,0)). Points and tangent
// vectors are always co-normalized: crossing s=1 applies A to both the
// torus position and the torus part of vectors, crossing s=0 downward
// applies A^{-1}.

#include <algorithm>
#include <cmath>
#include <complex>
#include <cstdint>
#include <stdexcept>
#include <string>
#include <vector>

#include <Eigen/Dense>
#include <Eigen/Eigenvalues>

#include "anosov/constants.hpp"
#include "anosov/exterior.hpp"
#include "anosov/rng.hpp"

namespace anosov {

/// One real eigenblock of the automorphism: a 1x1 real eigenvalue or a 2x2
/// rotation-scaling block for a complex pair. No complex arithmetic leaks
/// out of the constructor.
struct EigenBlock {
  int col = 0;             // starting column in the frame P
  int dim = 1;             // 1 or 2
  double log_modulus = 0;  // log |lambda|, per application of A
  double sign = 1.0;       // sign of the eigenvalue (dim 1)
  double angle = 0.0;      // rotation per application of A (dim 2)
  bool unstable = false;   // |lambda| > 1
};

namespace detail {

inline long long int_det(const Eigen::MatrixXi& A) {
  const int m = static_cast<int>(A.rows());
  if (m == 1) return A(0, 0);
  long long det = 0;
  for (int j = 0; j < m; ++j) {
    if (A(0, j) == 0) continue;
    Eigen::MatrixXi sub(m - 1, m - 1);
    for (int r = 1; r < m; ++r) {
      int cc = 0;
      for (int c = 0; c < m; ++c)
        if (c != j) sub(r - 1, cc++) = A(r, c);
    }
    long long cofactor = int_det(sub);
    det += ((j % 2) ? -1 : 1) * static_cast<long long>(A(0, j)) * cofactor;
  }
  return det;
}

// Exact integer inverse of a unimodular matrix via the adjugate.
inline Eigen::MatrixXi unimodular_inverse(const Eigen::MatrixXi& A, long long det) {
  const int m = static_cast<int>(A.rows());
  Eigen::MatrixXi inv(m, m);
  for (int i = 0; i < m; ++i)
    for (int j = 0; j < m; ++j) {
      Eigen::MatrixXi sub(m - 1, m - 1);
      int rr = 0;
      for (int r = 0; r < m; ++r) {
        if (r == j) continue;
        int cc = 0;
        for (int c = 0; c < m; ++c)
          if (c != i) sub(rr, cc++) = A(r, c);
        ++rr;
      }
      long long cof = ((i + j) % 2 ? -1 : 1) * (m > 1 ? int_det(sub) : 1);
      inv(i, j) = static_cast<int>(cof * det);  // det is +-1
    }
  return inv;
}

}  // namespace detail

/// Hyperbolic integer matrix with |det| = 1, its real (block-)eigenframe,
/// and log-domain eigenpower transport.
class HyperbolicAutomorphism {
 public:
  explicit HyperbolicAutomorphism(const Eigen::MatrixXi& A) : A_(A) {
    m_ = static_cast<int>(A.rows());
    if (A.cols() != m_ || m_ < 1) throw std::invalid_argument("automorphism matrix must be square");
    det_ = detail::int_det(A_);
    if (det_ != 1 && det_ != -1)
      throw std::invalid_argument("automorphism must have determinant +-1");
    Ainv_ = detail::unimodular_inverse(A_, det_);
    build_eigenframe();
  }

  int torus_dim() const { return m_; }
  long long det() const { return det_; }
  const Eigen::MatrixXi& matrix() const { return A_; }
  const Eigen::MatrixXi& inverse_matrix() const { return Ainv_; }
  const Eigen::MatrixXd& frame() const { return P_; }
  const Eigen::MatrixXd& frame_inverse() const { return Pinv_; }
  const std::vector<EigenBlock>& blocks() const { return blocks_; }
  int unstable_dim() const { return unstable_dim_; }

  double unstable_log_modulus() const {
    for (const auto& b : blocks_)
      if (b.unstable) return b.log_modulus;
    throw std::logic_error("no unstable block");
  }

  /// Per-frame-column log modulus (2x2 blocks contribute their modulus to
  /// both columns).
  const Eigen::VectorXd& column_log_moduli() const { return col_logmod_; }

  /// x -> A^{steps} x mod 1, applied one deck crossing at a time so entries
  /// stay in [0,1) and integer matrix powers never overflow.
  Eigen::VectorXd torus_power_mod1(Eigen::VectorXd x, long long steps) const {
    const Eigen::MatrixXi& M = steps >= 0 ? A_ : Ainv_;
    long long count = steps >= 0 ? steps : -steps;
    for (long long i = 0; i < count; ++i) {
      Eigen::VectorXd y = M.cast<double>() * x;
      for (int j = 0; j < m_; ++j) y(j) -= std::floor(y(j));
      x = y;
    }
    return x;
  }

  /// A^{power} v through the eigenframe (plain doubles; use apply_power_log
  /// for horizons where e^{power * log rho} overflows).
  Eigen::VectorXd apply_power(const Eigen::VectorXd& v, long long power) const {
    auto [w, logscale] = apply_power_log(v, power);
    return std::exp(logscale) * w;
  }

  /// Returns (w, logscale) with A^{power} v = e^{logscale} w, the per-block
  /// magnitudes factored out in the log domain.
  std::pair<Eigen::VectorXd, double> apply_power_log(const Eigen::VectorXd& v,
                                                     long long power) const {
    Eigen::VectorXd c = Pinv_ * v;
    double lead = -std::numeric_limits<double>::infinity();
    for (const auto& b : blocks_) {
      double mag = b.dim == 1 ? std::abs(c(b.col)) : std::hypot(c(b.col), c(b.col + 1));
      if (mag > 0.0) lead = std::max(lead, static_cast<double>(power) * b.log_modulus);
    }
    if (!std::isfinite(lead)) return {Eigen::VectorXd::Zero(m_), 0.0};
    Eigen::VectorXd out = Eigen::VectorXd::Zero(m_);
    for (const auto& b : blocks_) {
      double factor = std::exp(static_cast<double>(power) * b.log_modulus - lead);
      if (b.dim == 1) {
        double s = (b.sign < 0 && (power & 1)) ? -1.0 : 1.0;
        out(b.col) = c(b.col) * factor * s;
      } else {
        double th = b.angle * static_cast<double>(power);
        double ca = std::cos(th), sa = std::sin(th);
        double c1 = c(b.col), c2 = c(b.col + 1);
        out(b.col) = factor * (ca * c1 + sa * c2);
        out(b.col + 1) = factor * (-sa * c1 + ca * c2);
      }
    }
    return {P_ * out, lead};
  }

 private:
  void build_eigenframe() {
    Eigen::EigenSolver<Eigen::MatrixXd> es(A_.cast<double>());
    if (es.info() != Eigen::Success) throw std::runtime_error("eigendecomposition failed");
    const auto& vals = es.eigenvalues();
    const auto& vecs = es.eigenvectors();

    std::vector<bool> used(m_, false);
    struct RawBlock {
      double log_modulus, sign, angle;
      int dim;
      Eigen::VectorXd a, b;
    };
    std::vector<RawBlock> raw;
    for (int i = 0; i < m_; ++i) {
      if (used[i]) continue;
      std::complex<double> lam = vals(i);
      double mod = std::abs(lam);
      if (std::abs(mod - 1.0) <= kHyperbolicityMargin)
        throw std::invalid_argument("not hyperbolic: eigenvalue modulus within 1e-9 of 1");
      used[i] = true;
      if (std::abs(lam.imag()) < 1e-10 * std::max(1.0, mod)) {
        Eigen::VectorXd a = vecs.col(i).real();
        if (a.norm() < 1e-8) a = vecs.col(i).imag();
        raw.push_back({std::log(mod), lam.real() >= 0 ? 1.0 : -1.0, 0.0, 1, a, {}});
      } else {
        // find and consume the conjugate partner
        int partner = -1;
        for (int j = i + 1; j < m_; ++j) {
          if (used[j]) continue;
          if (std::abs(vals(j) - std::conj(lam)) < 1e-8 * std::max(1.0, mod)) {
            partner = j;
            break;
          }
        }
        if (partner < 0) throw std::runtime_error("unpaired complex eigenvalue");
        used[partner] = true;
        if (lam.imag() < 0) lam = std::conj(lam);
        // pick the eigenvector belonging to the positive-imag eigenvalue
        Eigen::VectorXcd w = (vals(i).imag() > 0) ? vecs.col(i) : vecs.col(partner);
        raw.push_back({std::log(mod), 1.0, std::arg(lam), 2, w.real(), w.imag()});
      }
    }

    // deterministic order: unstable blocks first, by descending modulus
    std::stable_sort(raw.begin(), raw.end(), [](const RawBlock& x, const RawBlock& y) {
      return x.log_modulus > y.log_modulus;
    });

    P_.resize(m_, m_);
    blocks_.clear();
    int col = 0;
    for (auto& rb : raw) {
      EigenBlock eb;
      eb.col = col;
      eb.dim = rb.dim;
      eb.log_modulus = rb.log_modulus;
      eb.sign = rb.sign;
      eb.angle = rb.angle;
      eb.unstable = rb.log_modulus > 0.0;
      if (eb.unstable) unstable_dim_ += rb.dim;
      if (rb.dim == 1) {
        Eigen::VectorXd a = rb.a / rb.a.norm();
        // sign convention: first component of largest magnitude positive
        int lead;
        a.cwiseAbs().maxCoeff(&lead);
        if (a(lead) < 0) a = -a;
        P_.col(col) = a;
      } else {
        double scale = rb.a.norm();
        P_.col(col) = rb.a / scale;
        P_.col(col + 1) = rb.b / scale;
      }
      blocks_.push_back(eb);
      col += rb.dim;
    }

    // orient the frame positively, then rescale stable columns so det P = 1
    double d = P_.determinant();
    if (d < 0) {
      bool flipped = false;
      for (auto& b : blocks_) {
        if (b.dim == 1) {
          P_.col(b.col) = -P_.col(b.col);
          flipped = true;
          break;
        }
      }
      if (!flipped) {
        auto& b = blocks_.front();
        P_.col(b.col + 1) = -P_.col(b.col + 1);
        b.angle = -b.angle;
      }
      d = -d;
    }
    int n_stable = 0;
    for (const auto& b : blocks_)
      if (!b.unstable) n_stable += b.dim;
    if (n_stable == 0) throw std::invalid_argument("no stable directions");
    double c = std::pow(d, -1.0 / n_stable);
    for (const auto& b : blocks_)
      if (!b.unstable)
        for (int j = 0; j < b.dim; ++j) P_.col(b.col + j) *= c;

    Pinv_ = P_.inverse();
    col_logmod_.resize(m_);
    for (const auto& b : blocks_)
      for (int j = 0; j < b.dim; ++j) col_logmod_(b.col + j) = b.log_modulus;
  }

  Eigen::MatrixXi A_, Ainv_;
  Eigen::MatrixXd P_, Pinv_;
  Eigen::VectorXd col_logmod_;
  std::vector<EigenBlock> blocks_;
  int m_ = 0;
  int unstable_dim_ = 0;
  long long det_ = 0;
};

/// Point on the suspension manifold, fundamental-domain normalized:
/// torus coordinates and roof coordinate all in [0,1).
struct Point {
  Eigen::VectorXd x;
  double s = 0.0;
};

struct TangentVector {
  Point base;
  Eigen::VectorXd torus;
  double ds = 0.0;
};

inline bool same_base(const Point& a, const Point& b, double tol = 1e-9) {
  if (a.x.size() != b.x.size()) return false;
  for (int i = 0; i < a.x.size(); ++i) {
    double d = std::abs(a.x(i) - b.x(i));
    if (std::min(d, 1.0 - d) > tol) return false;
  }
  return std::abs(a.s - b.s) <= tol;
}

/// Suspension of a hyperbolic automorphism under the constant roof 1.
class SuspensionFlow {
 public:
  explicit SuspensionFlow(HyperbolicAutomorphism aut, double roof = 1.0)
      : aut_(std::move(aut)), roof_(roof) {
    if (roof_ != 1.0)
      throw std::invalid_argument("variable roofs are not supported; roof must be 1.0");
    const int m = aut_.torus_dim();
    n_ = m + 1;
    F_ = Eigen::MatrixXd::Identity(n_, n_);
    F_.topLeftCorner(m, m) = aut_.frame();
    Finv_ = Eigen::MatrixXd::Identity(n_, n_);
    Finv_.topLeftCorner(m, m) = aut_.frame_inverse();
    col_logmod_ = Eigen::VectorXd::Zero(n_);
    col_logmod_.head(m) = aut_.column_log_moduli();
  }

  /// Suspension of the companion matrix of x^3 - x - 1 (m = 3, n = 4):
  /// one real unstable eigenvalue rho, a stable complex pair of modulus
  /// rho^{-1/2}.
  static SuspensionFlow default_model() {
    Eigen::MatrixXi A(3, 3);
    A << 0, 1, 0, 0, 0, 1, 1, 1, 0;
    return SuspensionFlow(HyperbolicAutomorphism(A));
  }

  /// Negative control with symmetric spectrum: cat-map block plus its
  /// inverse (m = 4, n = 5, two-dimensional strong unstable bundle).
  static SuspensionFlow symmetric_control_model() {
    Eigen::MatrixXi A(4, 4);
    A << 2, 1, 0, 0, 1, 1, 0, 0, 0, 0, 1, -1, 0, 0, -1, 2;
    return SuspensionFlow(HyperbolicAutomorphism(A));
  }

  int dim() const { return n_; }
  int torus_dim() const { return n_ - 1; }
  double roof() const { return roof_; }
  const HyperbolicAutomorphism& poincare() const { return aut_; }

  /// Constant frame (u-, stable-, X-columns) on the cylinder cover.
  const Eigen::MatrixXd& frame() const { return F_; }
  const Eigen::MatrixXd& frame_inverse() const { return Finv_; }
  /// log |eigenvalue| per frame column (0 for the s column).
  const Eigen::VectorXd& column_log_moduli() const { return col_logmod_; }

  Eigen::VectorXd frame_coords(const TangentVector& v) const {
    Eigen::VectorXd full(n_);
    full.head(n_ - 1) = v.torus;
    full(n_ - 1) = v.ds;
    return Finv_ * full;
  }

  TangentVector from_frame_coords(const Point& base, const Eigen::VectorXd& w) const {
    Eigen::VectorXd full = F_ * w;
    return {base, full.head(n_ - 1), full(n_ - 1)};
  }

  Point make_point(Eigen::VectorXd x, double s) const {
    for (int i = 0; i < x.size(); ++i) x(i) -= std::floor(x(i));
    s -= std::floor(s);
    return {std::move(x), s};
  }

 private:
  HyperbolicAutomorphism aut_;
  Eigen::MatrixXd F_, Finv_;
  Eigen::VectorXd col_logmod_;
  double roof_;
  int n_;
};

/// Signed number of deck crossings when flowing from roof coordinate s for
/// time t.
inline long long deck_crossings(double s, double t) {
  return static_cast<long long>(std::floor(s + t));
}

inline Point flow(const SuspensionFlow& f, const Point& p, double t) {
  double st = p.s + t;
  long long m = deck_crossings(p.s, t);
  double s_new = st - static_cast<double>(m);
  if (s_new >= 1.0) {  // rounding at the seam
    s_new -= 1.0;
    ++m;
  }
  if (s_new < 0.0) {
    s_new += 1.0;
    --m;
  }
  return {f.poincare().torus_power_mod1(p.x, m), s_new};
}

inline TangentVector tangent_flow(const SuspensionFlow& f, const TangentVector& v, double t) {
  long long m = deck_crossings(v.base.s, t);
  TangentVector out;
  out.base = flow(f, v.base, t);
  out.torus = f.poincare().apply_power(v.torus, m);
  out.ds = v.ds;
  return out;
}

/// Log-domain tangent transport: returns (w, logscale) with
/// Tf_t(v) = e^{logscale} w.
inline std::pair<TangentVector, double> tangent_flow_log(const SuspensionFlow& f,
                                                         const TangentVector& v, double t) {
  long long m = deck_crossings(v.base.s, t);
  auto [torus, logscale] = f.poincare().apply_power_log(v.torus, m);
  TangentVector out{flow(f, v.base, t), torus, 0.0};
  if (v.ds != 0.0) {
    // keep the s component on the same log scale
    if (logscale >= 0.0 || std::abs(v.ds) * std::exp(-logscale) < 1e300) {
      out.ds = v.ds * std::exp(-logscale);
    } else {
      // s component dominates; renormalize to its scale
      out.torus *= std::exp(logscale);
      out.ds = v.ds;
      logscale = 0.0;
    }
  }
  return {out, logscale};
}

/// Deck-invariant Anosov metric at roof coordinate s: diagonal in the
/// eigenframe with weights exp(2 s log|lambda_j|), weight 1 on X. Makes X
/// unit and orthogonal to E^su, with vol(g) = Omega exactly.
inline MetricFrame anosov_metric(const SuspensionFlow& f, double s) {
  const int n = f.dim();
  Eigen::VectorXd d(n);
  for (int j = 0; j < n; ++j) d(j) = std::exp(2.0 * s * f.column_log_moduli()(j));
  Eigen::MatrixXd G = f.frame_inverse().transpose() * d.asDiagonal() * f.frame_inverse();
  G = 0.5 * (G + G.transpose());
  return MetricFrame(G, +1, 1.0);
}

inline MetricFrame anosov_metric(const SuspensionFlow& f, const Point& p) {
  return anosov_metric(f, p.s);
}

inline double g_norm(const SuspensionFlow& f, const TangentVector& v) {
  Eigen::VectorXd w = f.frame_coords(v);
  double acc = 0.0;
  for (int j = 0; j < f.dim(); ++j)
    acc += w(j) * w(j) * std::exp(2.0 * v.base.s * f.column_log_moduli()(j));
  return std::sqrt(acc);
}

/// The g-unit section of E^uu at p (first unstable frame column, scaled).
inline TangentVector unstable_section(const SuspensionFlow& f, const Point& p) {
  const auto& blocks = f.poincare().blocks();
  for (const auto& b : blocks) {
    if (b.unstable) {
      Eigen::VectorXd torus = f.frame().col(b.col).head(f.torus_dim());
      torus *= std::exp(-p.s * b.log_modulus);
      return {p, torus, 0.0};
    }
  }
  throw std::logic_error("no unstable direction");
}

/// Invariant splitting: constant frames from the eigendata, unit-norm in
/// the Anosov metric on the s = 0 fiber.
struct Splitting {
  std::vector<Eigen::VectorXd> unstable;  // E^uu basis (n-vectors)
  std::vector<Eigen::VectorXd> stable;    // E^ss basis
  Eigen::VectorXd center;                 // X
};

inline Splitting splitting(const SuspensionFlow& f) {
  Splitting sp;
  const int n = f.dim();
  for (int j = 0; j < n - 1; ++j) {
    Eigen::VectorXd col = f.frame().col(j);
    if (f.column_log_moduli()(j) > 0)
      sp.unstable.push_back(col);
    else
      sp.stable.push_back(col);
  }
  sp.center = f.frame().col(n - 1);
  return sp;
}

/// Fitted (spade) constants over a time grid.
struct HyperbolicityConstants {
  double c = 1.0;       // >= 1
  double nu = 0.0;      // stable contraction rate per unit time
  double lambda = 0.0;  // unstable expansion rate per unit time
  double max_residual = 0.0;  // worst |log norm - fitted line|
};

namespace detail {
struct LineFit {
  double intercept, slope, r2, max_residual;
};

inline LineFit least_squares_line(const std::vector<double>& t, const std::vector<double>& y) {
  const std::size_t n = t.size();
  double st = 0, sy = 0, stt = 0, sty = 0;
  for (std::size_t i = 0; i < n; ++i) {
    st += t[i];
    sy += y[i];
    stt += t[i] * t[i];
    sty += t[i] * y[i];
  }
  double denom = n * stt - st * st;
  double slope = (n * sty - st * sy) / denom;
  double intercept = (sy - slope * st) / n;
  double ss_res = 0, ss_tot = 0, maxr = 0;
  double ybar = sy / n;
  for (std::size_t i = 0; i < n; ++i) {
    double r = y[i] - (intercept + slope * t[i]);
    ss_res += r * r;
    ss_tot += (y[i] - ybar) * (y[i] - ybar);
    maxr = std::max(maxr, std::abs(r));
  }
  double r2 = ss_tot > 0 ? 1.0 - ss_res / ss_tot : 1.0;
  return {intercept, slope, r2, maxr};
}
}  // namespace detail

/// Fit c, nu from sampled stable-vector norms and c, lambda from unstable
/// ones over the given (increasing, positive) grid.
inline HyperbolicityConstants measure_constants(const SuspensionFlow& f,
                                                const std::vector<double>& t_grid,
                                                std::uint64_t seed = 1,
                                                int samples = 16,
                                                double residual_threshold = 0.5) {
  if (t_grid.size() < 2) throw std::invalid_argument("measure_constants: grid too small");
  for (std::size_t i = 0; i + 1 < t_grid.size(); ++i)
    if (!(t_grid[i] < t_grid[i + 1]) || t_grid[i] < 0)
      throw std::invalid_argument("measure_constants: grid must be increasing and nonnegative");
  Rng rng(seed);
  Splitting sp = splitting(f);
  const int n = f.dim();

  auto sample_rates = [&](const std::vector<Eigen::VectorXd>& basis) {
    std::vector<double> slopes, intercepts, maxres;
    for (int s = 0; s < samples; ++s) {
      Eigen::VectorXd coeff = rng.unit_vector(static_cast<int>(basis.size()));
      Eigen::VectorXd dir = Eigen::VectorXd::Zero(n);
      for (std::size_t j = 0; j < basis.size(); ++j) dir += coeff(j) * basis[j];
      Point p = f.make_point(rng.gaussian_vector(n - 1), rng.uniform());
      TangentVector v{p, dir.head(n - 1), dir(n - 1)};
      double norm0 = g_norm(f, v);
      std::vector<double> logs;
      for (double t : t_grid) {
        auto [w, logscale] = tangent_flow_log(f, v, t);
        logs.push_back(std::log(g_norm(f, w)) + logscale - std::log(norm0));
      }
      auto fit = detail::least_squares_line(t_grid, logs);
      slopes.push_back(fit.slope);
      intercepts.push_back(fit.intercept);
      maxres.push_back(fit.max_residual);
    }
    double slope = pairwise_sum(slopes) / samples;
    double maxr = *std::max_element(maxres.begin(), maxres.end());
    double maxi = *std::max_element(intercepts.begin(), intercepts.end());
    return std::tuple<double, double, double>(slope, maxi, maxr);
  };

  auto [s_slope, s_int, s_res] = sample_rates(sp.stable);
  auto [u_slope, u_int, u_res] = sample_rates(sp.unstable);
  double maxres = std::max(s_res, u_res);
  if (maxres > residual_threshold)
    throw std::runtime_error("constants not exponential: regression residual above threshold");

  HyperbolicityConstants hc;
  hc.nu = -s_slope;
  hc.lambda = u_slope;
  hc.max_residual = maxres;
  // envelope constant: smallest c >= 1 making both (spade) bounds hold on
  // the sampled data
  hc.c = std::max({1.0, std::exp(s_int + s_res), std::exp(-(u_int - u_res))});
  return hc;
}

}  // namespace anosov
