#pragma once

// Exact integer lattice solving for periodic orbits: Smith-style reduction
// of A^p - I over the integers, enumeration of the rational fixed points of
// A^p on the torus, and the standard |det(A^p - I)| count. All arithmetic
// is 64-bit with explicit overflow checks (errors, never wraparound).

#include <cstdint>
#include <stdexcept>
#include <utility>
#include <vector>

#include <Eigen/Dense>

#include "anosov/suspension.hpp"

namespace anosov {

using IntMatrix = Eigen::Matrix<long long, Eigen::Dynamic, Eigen::Dynamic>;

namespace detail {

inline long long checked_mul(long long a, long long b) {
  __int128 r = static_cast<__int128>(a) * b;
  if (r > INT64_MAX || r < INT64_MIN)
    throw std::overflow_error("integer overflow in lattice arithmetic");
  return static_cast<long long>(r);
}

inline long long checked_add(long long a, long long b) {
  __int128 r = static_cast<__int128>(a) + b;
  if (r > INT64_MAX || r < INT64_MIN)
    throw std::overflow_error("integer overflow in lattice arithmetic");
  return static_cast<long long>(r);
}

inline IntMatrix checked_matmul(const IntMatrix& A, const IntMatrix& B) {
  IntMatrix C = IntMatrix::Zero(A.rows(), B.cols());
  for (int i = 0; i < A.rows(); ++i)
    for (int j = 0; j < B.cols(); ++j) {
      long long acc = 0;
      for (int k = 0; k < A.cols(); ++k)
        acc = checked_add(acc, checked_mul(A(i, k), B(k, j)));
      C(i, j) = acc;
    }
  return C;
}

}  // namespace detail

inline IntMatrix int_power(const IntMatrix& A, int p) {
  IntMatrix R = IntMatrix::Identity(A.rows(), A.cols());
  for (int i = 0; i < p; ++i) R = detail::checked_matmul(R, A);
  return R;
}

/// U M V = D with U, V unimodular and D diagonal (entries positive; the
/// divisibility chain is not normalized, which enumeration does not need).
struct SmithResult {
  IntMatrix U, V;
  std::vector<long long> diag;
};

inline SmithResult smith_reduce(IntMatrix M) {
  const int m = static_cast<int>(M.rows());
  SmithResult out;
  out.U = IntMatrix::Identity(m, m);
  out.V = IntMatrix::Identity(m, m);

  for (int t = 0; t < m; ++t) {
    for (;;) {
      // move the submatrix entry of least nonzero magnitude to the pivot
      int pi = -1, pj = -1;
      long long best = 0;
      for (int i = t; i < m; ++i)
        for (int j = t; j < m; ++j) {
          long long a = M(i, j) < 0 ? -M(i, j) : M(i, j);
          if (a != 0 && (pi < 0 || a < best)) {
            best = a;
            pi = i;
            pj = j;
          }
        }
      if (pi < 0) throw std::runtime_error("singular lattice matrix");
      M.row(t).swap(M.row(pi));
      out.U.row(t).swap(out.U.row(pi));
      M.col(t).swap(M.col(pj));
      out.V.col(t).swap(out.V.col(pj));

      bool clean = true;
      for (int i = t + 1; i < m; ++i) {
        if (M(i, t) == 0) continue;
        long long q = M(i, t) / M(t, t);
        if (q != 0) {
          for (int j = 0; j < m; ++j) {
            M(i, j) = detail::checked_add(M(i, j), -detail::checked_mul(q, M(t, j)));
            out.U(i, j) = detail::checked_add(out.U(i, j), -detail::checked_mul(q, out.U(t, j)));
          }
        }
        if (M(i, t) != 0) clean = false;
      }
      for (int j = t + 1; j < m; ++j) {
        if (M(t, j) == 0) continue;
        long long q = M(t, j) / M(t, t);
        if (q != 0) {
          for (int i = 0; i < m; ++i) {
            M(i, j) = detail::checked_add(M(i, j), -detail::checked_mul(q, M(i, t)));
            out.V(i, j) = detail::checked_add(out.V(i, j), -detail::checked_mul(q, out.V(i, t)));
          }
        }
        if (M(t, j) != 0) clean = false;
      }
      if (clean) {
        bool zeroed = true;
        for (int i = t + 1; i < m && zeroed; ++i) zeroed = M(i, t) == 0;
        for (int j = t + 1; j < m && zeroed; ++j) zeroed = M(t, j) == 0;
        if (zeroed) break;
      }
    }
    if (M(t, t) < 0) {
      M.row(t) = -M.row(t);
      out.U.row(t) = -out.U.row(t);
    }
  }
  for (int t = 0; t < m; ++t) out.diag.push_back(M(t, t));
  return out;
}

inline long long periodic_point_count(const SuspensionFlow& f, int p_period) {
  if (p_period < 1) throw std::invalid_argument("period must be >= 1");
  const int m = f.torus_dim();
  IntMatrix A = f.poincare().matrix().cast<long long>();
  IntMatrix M = int_power(A, p_period) - IntMatrix::Identity(m, m);
  auto smith = smith_reduce(M);
  long long count = 1;
  for (long long d : smith.diag) count = detail::checked_mul(count, d);
  return count;
}

/// All x in T^m with (A^p - I) x = 0 mod Z^m, each attached at roof
/// coordinate 0 (a closed orbit of period p through (x, 0)).
inline std::vector<Point> periodic_points(const SuspensionFlow& f, int p_period) {
  if (p_period < 1) throw std::invalid_argument("period must be >= 1");
  const int m = f.torus_dim();
  IntMatrix A = f.poincare().matrix().cast<long long>();
  IntMatrix M = int_power(A, p_period) - IntMatrix::Identity(m, m);
  auto smith = smith_reduce(M);

  // solutions are x = V y mod 1 with y_i = k_i / d_i, 0 <= k_i < d_i
  std::vector<Point> points;
  std::vector<long long> k(m, 0);
  for (;;) {
    Eigen::VectorXd y(m);
    for (int i = 0; i < m; ++i) y(i) = static_cast<double>(k[i]) / static_cast<double>(smith.diag[i]);
    Eigen::VectorXd x = smith.V.cast<double>() * y;
    points.push_back(f.make_point(x, 0.0));
    int i = m - 1;
    while (i >= 0 && ++k[i] == smith.diag[i]) k[i--] = 0;
    if (i < 0) break;
  }
  return points;
}

}  // namespace anosov
