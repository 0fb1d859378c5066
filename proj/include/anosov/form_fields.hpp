#pragma once

// Differential k-form fields on the suspension manifold. Analytic atoms are
// products profile(s) * cos(2 pi q.x + phase) * theta_I over the constant
// eigen-coframe; their representation enforces deck invariance, and
// pullbacks, Lie derivatives and exterior derivatives stay in closed form.
// Procedural fields are bare evaluators with user-asserted gluing.

#include <cmath>
#include <functional>
#include <numbers>
#include <stdexcept>
#include <string>
#include <utility>
#include <variant>
#include <vector>

#include <Eigen/Dense>

#include "anosov/constants.hpp"
#include "anosov/exterior.hpp"
#include "anosov/rng.hpp"
#include "anosov/suspension.hpp"

namespace anosov {

// ---------------------------------------------------------------------------
// profiles in the roof coordinate

/// g(s) = base^s * (c_0 + sum_j c_j cos(2 pi j s) + s_j sin(2 pi j s)).
/// Closed under d/ds; satisfies g(s) = base * g(s-1) identically, which is
/// exactly the deck condition for an atom with scalar deck factor = base.
struct ExpFourierProfile {
  double base = 1.0;
  std::vector<double> cos_coeffs{1.0};  // index j is the frequency
  std::vector<double> sin_coeffs{0.0};
};

/// Polynomial in u = (2s-1)/(1-2 delta) on (delta, 1-delta), zero outside.
/// Factories bake in a (1-u^2)^3 factor so values are C^2 at the edges.
struct BumpProfile {
  double delta = kBumpMargin;
  std::vector<double> poly{1.0};  // coefficients, constant term first
};

using Profile = std::variant<ExpFourierProfile, BumpProfile>;

namespace detail {

inline double poly_eval(const std::vector<double>& c, double u) {
  double acc = 0.0;
  for (std::size_t i = c.size(); i-- > 0;) acc = acc * u + c[i];
  return acc;
}

inline std::vector<double> poly_derivative(const std::vector<double>& c) {
  if (c.size() <= 1) return {0.0};
  std::vector<double> d(c.size() - 1);
  for (std::size_t i = 1; i < c.size(); ++i) d[i - 1] = c[i] * static_cast<double>(i);
  return d;
}

inline std::vector<double> poly_multiply(const std::vector<double>& a,
                                         const std::vector<double>& b) {
  std::vector<double> out(a.size() + b.size() - 1, 0.0);
  for (std::size_t i = 0; i < a.size(); ++i)
    for (std::size_t j = 0; j < b.size(); ++j) out[i + j] += a[i] * b[j];
  return out;
}

}  // namespace detail

inline double profile_value(const Profile& pr, double s) {
  if (const auto* ef = std::get_if<ExpFourierProfile>(&pr)) {
    double trig = 0.0;
    const double w = 2.0 * std::numbers::pi * s;
    for (std::size_t j = 0; j < ef->cos_coeffs.size(); ++j)
      trig += ef->cos_coeffs[j] * std::cos(w * static_cast<double>(j));
    for (std::size_t j = 1; j < ef->sin_coeffs.size(); ++j)
      trig += ef->sin_coeffs[j] * std::sin(w * static_cast<double>(j));
    return std::pow(ef->base, s) * trig;
  }
  const auto& b = std::get<BumpProfile>(pr);
  if (s <= b.delta || s >= 1.0 - b.delta) return 0.0;
  double u = (2.0 * s - 1.0) / (1.0 - 2.0 * b.delta);
  return detail::poly_eval(b.poly, u);
}

inline Profile profile_derivative(const Profile& pr) {
  if (const auto* ef = std::get_if<ExpFourierProfile>(&pr)) {
    const double L = std::log(ef->base);
    const double two_pi = 2.0 * std::numbers::pi;
    std::size_t J = std::max(ef->cos_coeffs.size(), ef->sin_coeffs.size());
    ExpFourierProfile out;
    out.base = ef->base;
    out.cos_coeffs.assign(J, 0.0);
    out.sin_coeffs.assign(J, 0.0);
    for (std::size_t j = 0; j < J; ++j) {
      double a = j < ef->cos_coeffs.size() ? ef->cos_coeffs[j] : 0.0;
      double bb = j < ef->sin_coeffs.size() ? ef->sin_coeffs[j] : 0.0;
      out.cos_coeffs[j] = L * a + two_pi * static_cast<double>(j) * bb;
      out.sin_coeffs[j] = L * bb - two_pi * static_cast<double>(j) * a;
    }
    return out;
  }
  const auto& b = std::get<BumpProfile>(pr);
  BumpProfile out;
  out.delta = b.delta;
  out.poly = detail::poly_derivative(b.poly);
  const double du_ds = 2.0 / (1.0 - 2.0 * b.delta);
  for (double& c : out.poly) c *= du_ds;
  return out;
}

// ---------------------------------------------------------------------------
// atoms and fields

/// One analytic atom: weight * profile(s) * cos(2 pi q.x + phase) * theta_I.
/// The index mask is over the eigen-coframe, bit j = coframe column j of the
/// model's frame; the last bit is ds. Construct through the factories below,
/// which enforce the deck-invariance of the representation.
struct FormAtom {
  Mask index = 0;
  Eigen::VectorXi q;
  double phase = 0.0;
  double weight = 1.0;
  Profile profile = ExpFourierProfile{};
  double deck_factor = 1.0;
};

/// The scalar factor theta_I picks up under the deck map, or NaN when a
/// 2x2 stable block is only partially contained (the factor is then a
/// rotation, not a scalar).
inline double deck_factor(const SuspensionFlow& f, Mask index) {
  double factor = 1.0;
  for (const auto& b : f.poincare().blocks()) {
    if (b.dim == 1) {
      if (index & (Mask{1} << b.col)) factor *= b.sign * std::exp(b.log_modulus);
    } else {
      bool in0 = index & (Mask{1} << b.col);
      bool in1 = index & (Mask{1} << (b.col + 1));
      if (in0 != in1) return std::numeric_limits<double>::quiet_NaN();
      if (in0) factor *= std::exp(2.0 * b.log_modulus);
    }
  }
  return factor;  // the ds column contributes 1
}

class FormField {
 public:
  using Evaluator = std::function<double(const Point&, const std::vector<TangentVector>&)>;

  FormField(int degree, std::vector<FormAtom> atoms)
      : degree_(degree), atoms_(std::move(atoms)) {
    for (const auto& a : atoms_)
      if (mask_degree(a.index) != degree_)
        throw std::invalid_argument("atom degree does not match field degree");
  }

  FormField(int degree, Evaluator ev) : degree_(degree), proc_(std::move(ev)) {}

  int degree() const { return degree_; }
  bool procedural() const { return static_cast<bool>(proc_); }
  const std::vector<FormAtom>& atoms() const { return atoms_; }
  const Evaluator& evaluator() const { return proc_; }

 private:
  int degree_;
  std::vector<FormAtom> atoms_;
  Evaluator proc_;
};

namespace detail {

inline double atom_value(const SuspensionFlow& f, const FormAtom& a, const Point& p,
                         const Eigen::MatrixXd& frame_coords_cols) {
  const int k = mask_degree(a.index);
  double coeff = a.weight * profile_value(a.profile, p.s);
  if (coeff == 0.0) return 0.0;
  if (a.q.size() > 0) {
    double z = a.phase;
    for (int i = 0; i < a.q.size(); ++i) z += 2.0 * std::numbers::pi * a.q(i) * p.x(i);
    coeff *= std::cos(z);
  } else if (a.phase != 0.0) {
    coeff *= std::cos(a.phase);
  }
  if (coeff == 0.0) return 0.0;
  if (k == 0) return coeff;
  auto rows = mask_indices(a.index);  // 1-based
  Eigen::MatrixXd sub(k, k);
  for (int r = 0; r < k; ++r) sub.row(r) = frame_coords_cols.row(rows[r] - 1);
  return coeff * sub.determinant();
}

inline Eigen::MatrixXd frame_coord_matrix(const SuspensionFlow& f,
                                          const std::vector<TangentVector>& vs) {
  Eigen::MatrixXd W(f.dim(), static_cast<int>(vs.size()));
  for (std::size_t j = 0; j < vs.size(); ++j) W.col(static_cast<int>(j)) = f.frame_coords(vs[j]);
  return W;
}

}  // namespace detail

/// Pointwise evaluation. The arguments must be based at p; bases are
/// checked up to torus wrap.
inline double evaluate(const SuspensionFlow& f, const FormField& w, const Point& p,
                       const std::vector<TangentVector>& vs) {
  if (static_cast<int>(vs.size()) != w.degree())
    throw std::invalid_argument("evaluate: argument count must equal the degree");
  for (const auto& v : vs)
    if (!same_base(v.base, p)) throw std::invalid_argument("evaluate: base-point mismatch");
  if (w.procedural()) return w.evaluator()(p, vs);
  if (w.degree() == 0) {
    Eigen::MatrixXd empty(f.dim(), 0);
    std::vector<double> parts;
    for (const auto& a : w.atoms()) parts.push_back(detail::atom_value(f, a, p, empty));
    return pairwise_sum(parts);
  }
  Eigen::MatrixXd W = detail::frame_coord_matrix(f, vs);
  std::vector<double> parts;
  for (const auto& a : w.atoms()) parts.push_back(detail::atom_value(f, a, p, W));
  return pairwise_sum(parts);
}

/// (f_t^* w)(p; vs) = w(f_t p; Tf_t vs), with the per-vector magnitudes
/// carried in the log domain so long horizons neither overflow nor flush
/// to zero prematurely.
inline double pullback_evaluate(const SuspensionFlow& f, const FormField& w, double t,
                                const Point& p, const std::vector<TangentVector>& vs) {
  Point q = flow(f, p, t);
  std::vector<TangentVector> ws;
  double logscale = 0.0;
  ws.reserve(vs.size());
  for (const auto& v : vs) {
    auto [tv, ls] = tangent_flow_log(f, v, t);
    ws.push_back(std::move(tv));
    logscale += ls;
  }
  return evaluate(f, w, q, ws) * std::exp(logscale);
}

enum class DerivativeMode { analytic, finite_difference };

/// L_X as a field. Analytic mode differentiates atom profiles in s (the
/// generator is translation in the roof coordinate and the coframe is
/// flow-invariant); finite-difference mode wraps a central difference of
/// the pullback.
inline FormField lie_derivative_field(const SuspensionFlow& f, const FormField& w,
                                      DerivativeMode mode = DerivativeMode::analytic,
                                      double h = kDefaultFdStep) {
  if (mode == DerivativeMode::analytic) {
    if (w.procedural())
      throw std::invalid_argument("analytic Lie derivative requires an atom field");
    std::vector<FormAtom> out;
    for (const auto& a : w.atoms()) {
      FormAtom da = a;
      da.profile = profile_derivative(a.profile);
      out.push_back(std::move(da));
    }
    return FormField(w.degree(), std::move(out));
  }
  if (h <= 0.0) throw std::invalid_argument("finite-difference step must be positive");
  return FormField(w.degree(),
                   [&f, w, h](const Point& p, const std::vector<TangentVector>& vs) {
                     return (pullback_evaluate(f, w, h, p, vs) -
                             pullback_evaluate(f, w, -h, p, vs)) /
                            (2.0 * h);
                   });
}

inline double lie_derivative(const SuspensionFlow& f, const FormField& w, const Point& p,
                             const std::vector<TangentVector>& vs,
                             DerivativeMode mode = DerivativeMode::analytic,
                             double h = kDefaultFdStep) {
  if (mode == DerivativeMode::finite_difference) {
    if (h <= 0.0) throw std::invalid_argument("finite-difference step must be positive");
    return (pullback_evaluate(f, w, h, p, vs) - pullback_evaluate(f, w, -h, p, vs)) / (2.0 * h);
  }
  return evaluate(f, lie_derivative_field(f, w, DerivativeMode::analytic), p, vs);
}

/// Exterior derivative of an atom field. Each atom contributes a profile-
/// derivative term on ds ^ theta_I and, when q != 0, one spatial term per
/// coframe direction not already in I.
inline FormField exterior_derivative(const SuspensionFlow& f, const FormField& w) {
  if (w.procedural())
    throw std::invalid_argument("exterior derivative requires an atom field");
  const int n = f.dim();
  const Mask ds_bit = Mask{1} << (n - 1);
  std::vector<FormAtom> out;
  for (const auto& a : w.atoms()) {
    if (!(a.index & ds_bit)) {
      FormAtom da = a;
      da.index = a.index | ds_bit;
      da.profile = profile_derivative(a.profile);
      da.weight = a.weight * merge_sign(ds_bit, a.index);
      da.deck_factor = deck_factor(f, da.index);
      if (da.weight != 0.0) out.push_back(std::move(da));
    }
    if (a.q.size() > 0 && a.q.cwiseAbs().sum() > 0) {
      // q.dx in the coframe: coefficient per torus column is P_col . q
      Eigen::VectorXd r = f.frame().topLeftCorner(n - 1, n - 1).transpose() * a.q.cast<double>();
      for (int j = 0; j < n - 1; ++j) {
        Mask jb = Mask{1} << j;
        if ((a.index & jb) || r(j) == 0.0) continue;
        FormAtom sa = a;
        sa.index = a.index | jb;
        sa.phase = a.phase + std::numbers::pi / 2.0;
        sa.weight = a.weight * 2.0 * std::numbers::pi * r(j) * merge_sign(jb, a.index);
        sa.deck_factor = deck_factor(f, sa.index);
        out.push_back(std::move(sa));
      }
    }
  }
  return FormField(w.degree() + 1, std::move(out));
}

/// Interior product with the generator X. Analytic for atom fields (X is
/// the last coframe direction), argument-insertion for procedural ones.
inline FormField interior_x(const SuspensionFlow& f, const FormField& w) {
  if (w.degree() < 1) throw std::invalid_argument("interior product needs degree >= 1");
  const Mask ds_bit = Mask{1} << (f.dim() - 1);
  if (!w.procedural()) {
    std::vector<FormAtom> out;
    for (const auto& a : w.atoms()) {
      if (!(a.index & ds_bit)) continue;
      FormAtom ia = a;
      ia.index = a.index & ~ds_bit;
      // ds is last in the sorted index set
      ia.weight = a.weight * ((mask_degree(a.index) - 1) % 2 ? -1.0 : 1.0);
      ia.deck_factor = deck_factor(f, ia.index);
      out.push_back(std::move(ia));
    }
    return FormField(w.degree() - 1, std::move(out));
  }
  return FormField(w.degree() - 1,
                   [&f, w](const Point& p, const std::vector<TangentVector>& vs) {
                     std::vector<TangentVector> ext;
                     ext.reserve(vs.size() + 1);
                     TangentVector X{p, Eigen::VectorXd::Zero(f.torus_dim()), 1.0};
                     ext.push_back(std::move(X));
                     ext.insert(ext.end(), vs.begin(), vs.end());
                     return evaluate(f, w, p, ext);
                   });
}

// ---------------------------------------------------------------------------
// gluing

struct GluingReport {
  double max_residual = 0.0;
  double scale = 0.0;  // largest sampled magnitude, for relative judgment
  bool pass = false;
};

/// Samples the seam s = 1 ~ 0: compares the field at (x, 1) on a random
/// frame against the field at (Ax, 0) on the deck-transported frame.
inline GluingReport gluing_check(const SuspensionFlow& f, const FormField& w, int samples,
                                 double tol, std::uint64_t seed = 7) {
  if (samples < 1) throw std::invalid_argument("gluing_check: samples must be >= 1");
  Rng rng(seed);
  const int n = f.dim();
  GluingReport rep;
  for (int it = 0; it < samples; ++it) {
    Eigen::VectorXd x = rng.gaussian_vector(n - 1);
    for (int i = 0; i < n - 1; ++i) x(i) -= std::floor(x(i));
    Point hi{x, 1.0};
    Point lo = f.make_point(f.poincare().torus_power_mod1(x, 1), 0.0);
    std::vector<TangentVector> vs_hi, vs_lo;
    for (int j = 0; j < w.degree(); ++j) {
      Eigen::VectorXd full = rng.gaussian_vector(n);
      TangentVector v{hi, full.head(n - 1), full(n - 1)};
      TangentVector dv{lo, f.poincare().apply_power(v.torus, 1), v.ds};
      vs_hi.push_back(std::move(v));
      vs_lo.push_back(std::move(dv));
    }
    double a = evaluate(f, w, hi, vs_hi);
    double b = evaluate(f, w, lo, vs_lo);
    rep.max_residual = std::max(rep.max_residual, std::abs(a - b));
    rep.scale = std::max({rep.scale, std::abs(a), std::abs(b)});
  }
  rep.pass = rep.max_residual <= tol * std::max(1.0, rep.scale);
  return rep;
}

// ---------------------------------------------------------------------------
// coordinate representation and Hodge duals

/// Coefficients of the field at p on the coordinate coframe (dx^i, ds),
/// obtained by evaluating against coordinate basis vectors.
inline AltForm coordinate_altform(const SuspensionFlow& f, const FormField& w, const Point& p) {
  const int n = f.dim();
  const int k = w.degree();
  AltForm out(n, k);
  if (k == 0) {
    out.set_coeff(0, evaluate(f, w, p, {}));
    return out;
  }
  for (Mask J = 0; J < (Mask{1} << n); ++J) {
    if (mask_degree(J) != k) continue;
    std::vector<TangentVector> vs;
    for (int idx : mask_indices(J)) {
      Eigen::VectorXd e = Eigen::VectorXd::Zero(n);
      e(idx - 1) = 1.0;
      vs.push_back(TangentVector{p, e.head(n - 1), e(n - 1)});
    }
    double c = evaluate(f, w, p, vs);
    if (c != 0.0) out.set_coeff(J, c);
  }
  return out;
}

/// Pointwise Hodge dual under the Anosov metric, as a procedural field.
inline FormField star_field(const SuspensionFlow& f, const FormField& w) {
  const int n = f.dim();
  return FormField(n - w.degree(),
                   [&f, w, n](const Point& p, const std::vector<TangentVector>& vs) {
                     AltForm a = coordinate_altform(f, w, p);
                     AltForm sa = hodge_star(a, anosov_metric(f, p.s));
                     std::vector<Eigen::VectorXd> coords;
                     coords.reserve(vs.size());
                     for (const auto& v : vs) {
                       Eigen::VectorXd full(n);
                       full.head(n - 1) = v.torus;
                       full(n - 1) = v.ds;
                       coords.push_back(std::move(full));
                     }
                     return sa(coords);
                   });
}

// ---------------------------------------------------------------------------
// factories

/// Deck-rigid atom: q = 0, profile base forced to the deck factor of the
/// index set. Index sets splitting a 2x2 stable block, or with a negative
/// deck factor, have no scalar representation and are rejected.
inline FormAtom make_eigen_atom(const SuspensionFlow& f, Mask index,
                                std::vector<double> cos_coeffs = {1.0},
                                std::vector<double> sin_coeffs = {0.0},
                                double weight = 1.0) {
  double lam = deck_factor(f, index);
  if (!std::isfinite(lam))
    throw std::invalid_argument("index set splits a 2x2 eigenblock; deck factor not scalar");
  if (lam <= 0.0)
    throw std::invalid_argument("negative deck factor has no real exponential profile");
  FormAtom a;
  a.index = index;
  a.q = Eigen::VectorXi::Zero(f.torus_dim());
  a.weight = weight;
  a.deck_factor = lam;
  a.profile = ExpFourierProfile{lam, std::move(cos_coeffs), std::move(sin_coeffs)};
  return a;
}

/// Seam-avoiding atom: profile (1-u^2)^3 * extra_poly(u) supported in
/// (delta, 1-delta), so any frequency vector and index set glue.
inline FormAtom make_bump_atom(const SuspensionFlow& f, Mask index, Eigen::VectorXi q,
                               double phase = 0.0, double delta = kBumpMargin,
                               std::vector<double> extra_poly = {1.0}, double weight = 1.0) {
  if (delta < kBumpMargin)
    throw std::invalid_argument("bump margin too small for reliable gluing");
  if (q.size() != f.torus_dim())
    throw std::invalid_argument("frequency vector dimension mismatch");
  // (1 - u^2)^3 expanded
  std::vector<double> base{1.0, 0.0, -3.0, 0.0, 3.0, 0.0, -1.0};
  FormAtom a;
  a.index = index;
  a.q = std::move(q);
  a.phase = phase;
  a.weight = weight;
  a.deck_factor = deck_factor(f, index);
  a.profile = BumpProfile{delta, detail::poly_multiply(base, extra_poly)};
  return a;
}

inline FormField canonical_alpha(const SuspensionFlow& f) {
  return FormField(1, {make_eigen_atom(f, Mask{1} << (f.dim() - 1))});
}

inline FormField volume_form_field(const SuspensionFlow& f) {
  Mask full = (Mask{1} << f.dim()) - 1;
  return FormField(f.dim(), {make_eigen_atom(f, full)});
}

inline FormField i_x_volume(const SuspensionFlow& f) {
  return interior_x(f, volume_form_field(f));
}

/// Random bump atom of the given degree (for randomized probes; gluing is
/// automatic from the support).
inline FormAtom random_bump_atom(const SuspensionFlow& f, int degree, Rng& rng,
                                 int max_freq = 2) {
  const int n = f.dim();
  // choose a degree-subset of coframe directions, uniformly
  Mask index = 0;
  int chosen = 0;
  for (int i = 0; i < n && chosen < degree; ++i) {
    int remaining = n - i;
    if (rng.uniform() * remaining < degree - chosen) {
      index |= Mask{1} << i;
      ++chosen;
    }
  }
  Eigen::VectorXi q(f.torus_dim());
  for (int i = 0; i < q.size(); ++i) q(i) = rng.uniform_int(-max_freq, max_freq);
  double phase = rng.uniform(0.0, 2.0 * std::numbers::pi);
  std::vector<double> extra{rng.uniform(-1.0, 1.0), rng.uniform(-1.0, 1.0)};
  return make_bump_atom(f, index, std::move(q), phase, kBumpMargin, std::move(extra),
                        rng.uniform(0.5, 2.0));
}

inline FormField random_bump_field(const SuspensionFlow& f, int degree, int n_atoms, Rng& rng) {
  std::vector<FormAtom> atoms;
  for (int i = 0; i < n_atoms; ++i) atoms.push_back(random_bump_atom(f, degree, rng));
  return FormField(degree, std::move(atoms));
}

/// Random field reusing the frequency vectors and index sets of an
/// existing field, so the L^2 pairing of the two vanishes neither by
/// Fourier orthogonality on the torus nor by g-orthogonality of the
/// eigen-coframe.
inline FormField random_matched_field(const SuspensionFlow& f, int degree,
                                      const FormField& partner, Rng& rng) {
  std::vector<FormAtom> atoms;
  for (const auto& src : partner.atoms()) {
    if (mask_degree(src.index) != degree)
      throw std::invalid_argument("random_matched_field: partner degree mismatch");
    FormAtom a = random_bump_atom(f, degree, rng);
    a.index = src.index;
    a.deck_factor = src.deck_factor;
    a.q = src.q;
    a.phase = src.phase + rng.uniform(-0.3, 0.3);
    atoms.push_back(std::move(a));
  }
  return FormField(degree, std::move(atoms));
}

}  // namespace anosov
