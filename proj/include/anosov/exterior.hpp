#pragma once

// Exact finite-dimensional exterior algebra over an oriented inner-product
// space: wedge, interior product, Hodge star, induced inner products and
// k-volumes. Coefficients are stored sparsely, keyed by an n-bit index mask;
// signs come from transposition counting, so the algebra is exact up to
// floating-point rounding of the coefficients themselves.

#include <bit>
#include <cmath>
#include <cstdint>
#include <map>
#include <stdexcept>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "anosov/constants.hpp"

namespace anosov {

/// Index set of a basis k-form, encoded as a bit mask: bit i set means
/// coordinate index i+1 participates. Strictly-increasing order is implicit.
using Mask = std::uint32_t;

inline int mask_degree(Mask m) { return std::popcount(m); }

/// 1-based indices of a mask, in increasing order.
inline std::vector<int> mask_indices(Mask m) {
  std::vector<int> out;
  for (int i = 0; m != 0; ++i, m >>= 1)
    if (m & 1u) out.push_back(i + 1);
  return out;
}

/// Build a mask from 1-based indices; throws on repeats or out-of-range.
inline Mask mask_from_indices(const std::vector<int>& idx, int n) {
  Mask m = 0;
  for (int i : idx) {
    if (i < 1 || i > n) throw std::invalid_argument("index out of range [1,n]");
    Mask bit = Mask{1} << (i - 1);
    if (m & bit) throw std::invalid_argument("repeated index in index set");
    m |= bit;
  }
  return m;
}

/// Sign of merging two disjoint increasing index sets a, b into one sorted
/// set: (-1)^{#inversions}. Returns 0 if the sets overlap.
inline int merge_sign(Mask a, Mask b) {
  if (a & b) return 0;
  int inversions = 0;
  for (Mask bb = b; bb != 0; bb &= bb - 1) {
    Mask bit = bb & (~bb + 1);
    // elements of a strictly above this element of b
    inversions += std::popcount(a & ~((bit << 1) - 1));
  }
  return (inversions & 1) ? -1 : +1;
}

/// Alternating k-form on an n-dimensional space, coefficients keyed by
/// index mask. Absent keys mean zero. Immutable in spirit: operations
/// return fresh values.
class AltForm {
 public:
  AltForm(int n, int k) : n_(n), k_(k) {
    if (n < 0 || n > 8) throw std::invalid_argument("ambient dimension must be in [0,8]");
    if (k < 0 || k > n) throw std::invalid_argument("degree must be in [0,n]");
  }

  static AltForm basis(int n, Mask bits, double c = 1.0) {
    AltForm a(n, mask_degree(bits));
    a.set_coeff(bits, c);
    return a;
  }

  int dim() const { return n_; }
  int degree() const { return k_; }
  const std::map<Mask, double>& coeffs() const { return c_; }

  double coeff(Mask m) const {
    auto it = c_.find(m);
    return it == c_.end() ? 0.0 : it->second;
  }

  void set_coeff(Mask m, double v) {
    check_mask(m);
    if (v == 0.0)
      c_.erase(m);
    else
      c_[m] = v;
  }

  void accumulate(Mask m, double v) { set_coeff(m, coeff(m) + v); }

  AltForm& operator+=(const AltForm& o) {
    if (o.n_ != n_ || o.k_ != k_) throw std::invalid_argument("AltForm shape mismatch");
    for (auto& [m, v] : o.c_) accumulate(m, v);
    return *this;
  }

  AltForm& operator*=(double s) {
    for (auto& [m, v] : c_) v *= s;
    return *this;
  }

  friend AltForm operator+(AltForm a, const AltForm& b) { return a += b; }
  friend AltForm operator*(double s, AltForm a) { return a *= s; }

  AltForm operator-() const {
    AltForm r = *this;
    return r *= -1.0;
  }

  friend AltForm operator-(AltForm a, const AltForm& b) {
    AltForm nb = -b;
    return a += nb;
  }

  /// Evaluate against k vectors (given by coordinate components):
  /// sum over index sets of coeff * det of the selected component rows.
  double operator()(const std::vector<Eigen::VectorXd>& vs) const {
    if (static_cast<int>(vs.size()) != k_)
      throw std::invalid_argument("AltForm: wrong number of argument vectors");
    for (const auto& v : vs)
      if (v.size() != n_) throw std::invalid_argument("AltForm: vector dimension mismatch");
    double total = 0.0;
    for (auto& [m, c] : c_) {
      auto idx = mask_indices(m);
      Eigen::MatrixXd sub(k_, k_);
      for (int r = 0; r < k_; ++r)
        for (int col = 0; col < k_; ++col) sub(r, col) = vs[col](idx[r] - 1);
      total += c * sub.determinant();
    }
    return total;
  }

  double max_abs_coeff() const {
    double m = 0.0;
    for (auto& [k, v] : c_) m = std::max(m, std::abs(v));
    return m;
  }

 private:
  void check_mask(Mask m) const {
    if (mask_degree(m) != k_) throw std::invalid_argument("index set degree mismatch");
    if (m >> n_) throw std::invalid_argument("index set exceeds ambient dimension");
  }

  int n_;
  int k_;
  std::map<Mask, double> c_;
};

/// Oriented inner-product structure on coordinates: a symmetric
/// positive-definite gram matrix, an orientation sign, and a volume scale
/// fixing the reference volume form omega = orientation * volume_scale *
/// sqrt(det gram) * dx^{1..n}. The default volume_scale (det gram)^{-1/2}
/// makes omega the coordinate volume form.
class MetricFrame {
 public:
  explicit MetricFrame(Eigen::MatrixXd gram, int orientation = +1)
      : MetricFrame(std::move(gram), orientation, -1.0) {}

  MetricFrame(Eigen::MatrixXd gram, int orientation, double volume_scale)
      : gram_(std::move(gram)), orientation_(orientation) {
    n_ = static_cast<int>(gram_.rows());
    if (gram_.cols() != n_) throw std::invalid_argument("gram must be square");
    if (!gram_.isApprox(gram_.transpose(), 1e-12))
      throw std::invalid_argument("gram must be symmetric");
    if (orientation_ != 1 && orientation_ != -1)
      throw std::invalid_argument("orientation must be +1 or -1");
    Eigen::LLT<Eigen::MatrixXd> llt(gram_);
    if (llt.info() != Eigen::Success)
      throw std::invalid_argument("gram must be positive definite");
    Eigen::MatrixXd L = llt.matrixL();
    sqrt_det_ = 1.0;
    for (int i = 0; i < n_; ++i) sqrt_det_ *= L(i, i);
    volume_scale_ = volume_scale > 0.0 ? volume_scale : 1.0 / sqrt_det_;
    // Covector coordinates in the orthonormalized frame: xi_onb = L^{-1} xi.
    onb_ = L.triangularView<Eigen::Lower>().solve(Eigen::MatrixXd::Identity(n_, n_));
    onb_inv_ = L;
  }

  int dim() const { return n_; }
  const Eigen::MatrixXd& gram() const { return gram_; }
  int orientation() const { return orientation_; }
  double volume_scale() const { return volume_scale_; }

  /// Coefficient of the reference volume form on dx^{1..n}.
  double omega_coeff() const { return orientation_ * volume_scale_ * sqrt_det_; }

  AltForm reference_volume() const {
    return AltForm::basis(n_, (Mask{1} << n_) - 1, omega_coeff());
  }

  /// Transform taking covector coefficients to the orthonormalized frame.
  const Eigen::MatrixXd& onb() const { return onb_; }
  const Eigen::MatrixXd& onb_inv() const { return onb_inv_; }

 private:
  Eigen::MatrixXd gram_;
  Eigen::MatrixXd onb_, onb_inv_;
  int n_;
  int orientation_;
  double volume_scale_;
  double sqrt_det_;
};

/// Apply the k-th compound (exterior power) of a matrix to form
/// coefficients: (out)_J = sum_I det(M[J, I]) (in)_I.
inline AltForm compound_apply(const Eigen::MatrixXd& M, const AltForm& a) {
  const int n = a.dim();
  const int k = a.degree();
  AltForm out(n, k);
  if (k == 0) {
    out.set_coeff(0, a.coeff(0));
    return out;
  }
  // Enumerate all degree-k masks J.
  for (Mask J = 0; J < (Mask{1} << n); ++J) {
    if (mask_degree(J) != k) continue;
    auto rows = mask_indices(J);
    double acc = 0.0;
    for (auto& [I, c] : a.coeffs()) {
      auto cols = mask_indices(I);
      Eigen::MatrixXd sub(k, k);
      for (int r = 0; r < k; ++r)
        for (int s = 0; s < k; ++s) sub(r, s) = M(rows[r] - 1, cols[s] - 1);
      acc += c * sub.determinant();
    }
    if (acc != 0.0) out.set_coeff(J, acc);
  }
  return out;
}

/// Exterior product. Wedging past top degree returns the zero n-form
/// (documented convention, simplifies multilinear expansion code).
inline AltForm wedge(const AltForm& a, const AltForm& b) {
  if (a.dim() != b.dim()) throw std::invalid_argument("wedge: dimension mismatch");
  const int n = a.dim();
  if (a.degree() + b.degree() > n) return AltForm(n, n);
  AltForm out(n, a.degree() + b.degree());
  for (auto& [ma, ca] : a.coeffs())
    for (auto& [mb, cb] : b.coeffs()) {
      int s = merge_sign(ma, mb);
      if (s != 0) out.accumulate(ma | mb, s * ca * cb);
    }
  return out;
}

/// Interior product i_v: antiderivation of degree -1.
inline AltForm interior(const Eigen::VectorXd& v, const AltForm& a) {
  if (v.size() != a.dim()) throw std::invalid_argument("interior: dimension mismatch");
  if (a.degree() < 1) throw std::invalid_argument("interior: degree-0 input");
  AltForm out(a.dim(), a.degree() - 1);
  for (auto& [m, c] : a.coeffs()) {
    int pos = 0;
    for (Mask mm = m; mm != 0; mm &= mm - 1, ++pos) {
      Mask bit = mm & (~mm + 1);
      int i = std::countr_zero(bit);  // 0-based coordinate
      double comp = v(i);
      if (comp != 0.0) out.accumulate(m & ~bit, ((pos & 1) ? -1.0 : 1.0) * comp * c);
    }
  }
  return out;
}

namespace detail {
// Euclidean Hodge star in an orthonormal positively-oriented frame.
inline AltForm euclidean_star(const AltForm& a) {
  const int n = a.dim();
  const Mask full = (Mask{1} << n) - 1;
  AltForm out(n, n - a.degree());
  for (auto& [m, c] : a.coeffs()) {
    Mask comp = full & ~m;
    out.accumulate(comp, merge_sign(m, comp) * c);
  }
  return out;
}
}  // namespace detail

/// Hodge star defined by wedge(xi, star(eta)) = inner(xi, eta) * omega,
/// computed by orthonormalizing the frame and conjugating.
inline AltForm hodge_star(const AltForm& a, const MetricFrame& m) {
  if (a.dim() != m.dim()) throw std::invalid_argument("hodge_star: dimension mismatch");
  AltForm onb = compound_apply(m.onb(), a);
  AltForm starred = detail::euclidean_star(onb);
  starred *= m.orientation() * m.volume_scale();
  return compound_apply(m.onb_inv(), starred);
}

/// Induced inner product on k-forms (reduces to the metric-dual pairing
/// on 1-forms). Independent of orientation and volume scale.
inline double inner(const AltForm& a, const AltForm& b, const MetricFrame& m) {
  if (a.dim() != b.dim() || a.dim() != m.dim())
    throw std::invalid_argument("inner: dimension mismatch");
  if (a.degree() != b.degree()) throw std::invalid_argument("inner: degree mismatch");
  AltForm ay = compound_apply(m.onb(), a);
  AltForm by = compound_apply(m.onb(), b);
  double acc = 0.0;
  for (auto& [mask, c] : ay.coeffs()) acc += c * by.coeff(mask);
  return acc;
}

/// k-dimensional volume of the parallelepiped with the given sides:
/// sqrt(det Gram). Degenerate inputs return 0.
inline double k_volume(const std::vector<Eigen::VectorXd>& vs, const MetricFrame& m) {
  const int k = static_cast<int>(vs.size());
  if (k < 1 || k > m.dim()) throw std::invalid_argument("k_volume: need 1..n sides");
  Eigen::MatrixXd G(k, k);
  for (int i = 0; i < k; ++i)
    for (int j = 0; j < k; ++j) G(i, j) = vs[i].dot(m.gram() * vs[j]);
  double det = G.determinant();
  return det > 0.0 ? std::sqrt(det) : 0.0;
}

/// theta_v = <v, .> : the exterior 1-form dual to v. Satisfies
/// star(i_v omega) = (-1)^{n-1} theta_v for the reference volume omega.
inline AltForm dual_one_form(const Eigen::VectorXd& v, const MetricFrame& m) {
  if (v.size() != m.dim()) throw std::invalid_argument("dual_one_form: dimension mismatch");
  Eigen::VectorXd coeffs = m.gram() * v;
  AltForm out(m.dim(), 1);
  for (int i = 0; i < m.dim(); ++i)
    if (coeffs(i) != 0.0) out.set_coeff(Mask{1} << i, coeffs(i));
  return out;
}

}  // namespace anosov
