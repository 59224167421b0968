#pragma once

// Small dense kernel: correlation estimation, symmetric and general
// eigendecomposition, Cholesky, inversion. Dimensions here are at most a few
// dozen, so everything is straightforward O(n^3) code with no blocking.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <limits>
#include <numeric>
#include <span>
#include <string>
#include <vector>

#include "macnet/error.hpp"
#include "macnet/matrix.hpp"

namespace macnet {

/// Eigenvalues with column-aligned unit eigenvectors.
struct EigenResult {
  Vector values;
  Matrix vectors;  // column l pairs with values[l]

  Vector vector(std::size_t l) const { return vectors.col(l); }
};

/// Eigenvalue floor relative to the largest eigenvalue for positive-definiteness.
inline constexpr double kPdTolerance = 1e-10;

namespace detail {

inline double symmetry_tolerance(const Matrix& a) { return 1e-12 * std::max(1.0, a.max_abs()); }

inline void require_symmetric(const Matrix& a, const char* who) {
  if (!a.is_square()) throw Error(Errc::NotSymmetric, std::string(who) + ": matrix is not square");
  if (a.asymmetry() > symmetry_tolerance(a))
    throw Error(Errc::NotSymmetric, std::string(who) + ": matrix is not symmetric");
}

inline void require_finite(const Matrix& a, const char* who) {
  for (double x : a.data())
    if (!std::isfinite(x)) throw Error(Errc::NonFiniteInput, std::string(who) + ": non-finite entry");
}

// First component with magnitude above noise is made positive.
inline void canonical_sign(Matrix& vecs, std::size_t col) {
  for (std::size_t r = 0; r < vecs.rows(); ++r) {
    const double x = vecs(r, col);
    if (std::abs(x) > 1e-12) {
      if (x < 0.0)
        for (std::size_t k = 0; k < vecs.rows(); ++k) vecs(k, col) = -vecs(k, col);
      return;
    }
  }
}

inline void normalize_column(Matrix& vecs, std::size_t col) {
  double s = 0.0;
  for (std::size_t r = 0; r < vecs.rows(); ++r) s += vecs(r, col) * vecs(r, col);
  s = std::sqrt(s);
  if (s == 0.0) return;
  for (std::size_t r = 0; r < vecs.rows(); ++r) vecs(r, col) /= s;
}

inline EigenResult reorder(const Vector& values, const Matrix& vectors, const std::vector<std::size_t>& order) {
  const std::size_t n = values.size();
  EigenResult out{Vector(n), Matrix(vectors.rows(), n)};
  for (std::size_t l = 0; l < n; ++l) {
    out.values[l] = values[order[l]];
    for (std::size_t r = 0; r < vectors.rows(); ++r) out.vectors(r, l) = vectors(r, order[l]);
    normalize_column(out.vectors, l);
    canonical_sign(out.vectors, l);
  }
  return out;
}

}  // namespace detail

// ---------------------------------------------------------------------------
// Correlation estimation

/// Sample Pearson correlation of two equally long vectors.
inline double pearson_corr(std::span<const double> x, std::span<const double> y) {
  if (x.size() != y.size())
    throw Error(Errc::LengthMismatch,
                "pearson_corr: lengths " + std::to_string(x.size()) + " and " + std::to_string(y.size()));
  const std::size_t n = x.size();
  if (n < 3) throw Error(Errc::InsufficientSamples, "pearson_corr: need at least 3 samples");
  const auto [xmin, xmax] = std::minmax_element(x.begin(), x.end());
  const auto [ymin, ymax] = std::minmax_element(y.begin(), y.end());
  if (*xmin == *xmax) throw IndexedError(Errc::ZeroVariance, "pearson_corr: first vector is constant", 0);
  if (*ymin == *ymax) throw IndexedError(Errc::ZeroVariance, "pearson_corr: second vector is constant", 1);

  const double mx = std::accumulate(x.begin(), x.end(), 0.0) / static_cast<double>(n);
  const double my = std::accumulate(y.begin(), y.end(), 0.0) / static_cast<double>(n);
  double sxy = 0.0, sxx = 0.0, syy = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    const double dx = x[i] - mx, dy = y[i] - my;
    sxy += dx * dy;
    sxx += dx * dx;
    syy += dy * dy;
  }
  return std::clamp(sxy / std::sqrt(sxx * syy), -1.0, 1.0);
}

/// Correlation matrix of the columns of an n-by-d sample block.
inline Matrix corr_matrix(const Matrix& samples) {
  const std::size_t n = samples.rows(), d = samples.cols();
  if (n < 3) throw Error(Errc::InsufficientSamples, "corr_matrix: need at least 3 samples");

  Matrix centred(n, d);
  Vector scale(d);
  for (std::size_t c = 0; c < d; ++c) {
    double lo = samples(0, c), hi = lo, mean = 0.0;
    for (std::size_t r = 0; r < n; ++r) {
      lo = std::min(lo, samples(r, c));
      hi = std::max(hi, samples(r, c));
      mean += samples(r, c);
    }
    if (lo == hi) throw IndexedError(Errc::ZeroVariance, "corr_matrix: column " + std::to_string(c) + " is constant", c);
    mean /= static_cast<double>(n);
    double ss = 0.0;
    for (std::size_t r = 0; r < n; ++r) {
      centred(r, c) = samples(r, c) - mean;
      ss += centred(r, c) * centred(r, c);
    }
    scale[c] = std::sqrt(ss);
  }

  Matrix out = Matrix::identity(d);
  for (std::size_t a = 0; a < d; ++a)
    for (std::size_t b = a + 1; b < d; ++b) {
      double s = 0.0;
      for (std::size_t r = 0; r < n; ++r) s += centred(r, a) * centred(r, b);
      const double v = std::clamp(s / (scale[a] * scale[b]), -1.0, 1.0);
      out(a, b) = v;
      out(b, a) = v;
    }
  return out;
}

// ---------------------------------------------------------------------------
// Eigensolvers

/// Cyclic Jacobi for symmetric input. Values descending, vectors with the
/// first non-negligible component positive.
inline EigenResult sym_eigen(const Matrix& input, int max_sweeps = 100) {
  detail::require_symmetric(input, "sym_eigen");
  detail::require_finite(input, "sym_eigen");
  const std::size_t n = input.rows();
  Matrix a = input;
  // Work on the exactly symmetric part.
  for (std::size_t p = 0; p < n; ++p)
    for (std::size_t q = p + 1; q < n; ++q) a(p, q) = a(q, p) = 0.5 * (a(p, q) + a(q, p));
  Matrix v = Matrix::identity(n);

  double fro = 0.0;
  for (double x : a.data()) fro += x * x;
  fro = std::sqrt(fro);

  bool converged = false;
  for (int sweep = 0; sweep < max_sweeps; ++sweep) {
    double off = 0.0;
    for (std::size_t p = 0; p < n; ++p)
      for (std::size_t q = p + 1; q < n; ++q) off += 2.0 * a(p, q) * a(p, q);
    if (std::sqrt(off) <= 1e-15 * fro || off == 0.0) {
      converged = true;
      break;
    }
    for (std::size_t p = 0; p < n; ++p)
      for (std::size_t q = p + 1; q < n; ++q) {
        const double apq = a(p, q);
        if (std::abs(apq) < std::numeric_limits<double>::min()) continue;
        const double theta = (a(q, q) - a(p, p)) / (2.0 * apq);
        const double t = (theta >= 0.0 ? 1.0 : -1.0) / (std::abs(theta) + std::sqrt(theta * theta + 1.0));
        const double c = 1.0 / std::sqrt(t * t + 1.0);
        const double s = t * c;
        for (std::size_t k = 0; k < n; ++k) {
          const double akp = a(k, p), akq = a(k, q);
          a(k, p) = c * akp - s * akq;
          a(k, q) = s * akp + c * akq;
        }
        for (std::size_t k = 0; k < n; ++k) {
          const double apk = a(p, k), aqk = a(q, k);
          a(p, k) = c * apk - s * aqk;
          a(q, k) = s * apk + c * aqk;
        }
        a(p, q) = a(q, p) = 0.0;
        for (std::size_t k = 0; k < n; ++k) {
          const double vkp = v(k, p), vkq = v(k, q);
          v(k, p) = c * vkp - s * vkq;
          v(k, q) = s * vkp + c * vkq;
        }
      }
  }
  if (!converged) {
    // One more convergence check: the last sweep may have finished the job.
    double off = 0.0;
    for (std::size_t p = 0; p < n; ++p)
      for (std::size_t q = p + 1; q < n; ++q) off += 2.0 * a(p, q) * a(p, q);
    if (std::sqrt(off) > 1e-12 * fro) throw Error(Errc::NoConvergence, "sym_eigen: Jacobi sweep cap exceeded");
  }

  Vector values(n);
  for (std::size_t i = 0; i < n; ++i) values[i] = a(i, i);
  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(), [&](std::size_t l, std::size_t r) { return values[l] > values[r]; });
  return detail::reorder(values, v, order);
}

namespace detail {

// Applies the plane rotation [[c, -s], [s, c]] as H <- G^T H G on indices
// (k, k+1); rows restricted to columns >= col_from, columns to rows <= row_to.
inline void rotate_similarity(Matrix& h, Matrix& z, std::size_t k, double c, double s, std::size_t col_from,
                              std::size_t row_to) {
  const std::size_t n = h.rows();
  for (std::size_t j = col_from; j < n; ++j) {
    const double x = h(k, j), y = h(k + 1, j);
    h(k, j) = c * x + s * y;
    h(k + 1, j) = -s * x + c * y;
  }
  for (std::size_t i = 0; i <= row_to; ++i) {
    const double x = h(i, k), y = h(i, k + 1);
    h(i, k) = c * x + s * y;
    h(i, k + 1) = -s * x + c * y;
  }
  for (std::size_t i = 0; i < n; ++i) {
    const double x = z(i, k), y = z(i, k + 1);
    z(i, k) = c * x + s * y;
    z(i, k + 1) = -s * x + c * y;
  }
}

// Splits the trailing 2x2 diagonal block at (m, m) into upper-triangular form.
inline void split_2x2(Matrix& h, Matrix& z, std::size_t m) {
  const double a = h(m, m), b = h(m, m + 1), c = h(m + 1, m), d = h(m + 1, m + 1);
  const double scale = std::max({std::abs(a), std::abs(b), std::abs(c), std::abs(d), 1e-300});
  const double half = 0.5 * (a - d);
  double disc = half * half + b * c;
  if (disc < 0.0) {
    if (std::sqrt(-disc) > 1e-8 * scale)
      throw Error(Errc::ComplexSpectrum, "general_eigen: complex conjugate eigenvalue pair");
    disc = 0.0;
  }
  const double lambda = 0.5 * (a + d) + (half >= 0.0 ? 1.0 : -1.0) * std::sqrt(disc);
  // Two candidate eigenvectors of the block; keep the better conditioned one.
  double v0 = b, v1 = lambda - a;
  const double u0 = lambda - d, u1 = c;
  if (std::hypot(u0, u1) > std::hypot(v0, v1)) {
    v0 = u0;
    v1 = u1;
  }
  const double len = std::hypot(v0, v1);
  if (len > 1e-14 * scale) rotate_similarity(h, z, m, v0 / len, v1 / len, m, m + 1);
  h(m + 1, m) = 0.0;
}

}  // namespace detail

/// Real eigendecomposition of a general square matrix via Householder
/// reduction to Hessenberg form and shifted QR iteration to real Schur form.
/// Values sorted by descending absolute value (ties: positive first);
/// columns are right eigenvectors of unit length.
inline EigenResult general_eigen(const Matrix& input, int max_iter_per_value = 100) {
  if (!input.is_square()) throw Error(Errc::LengthMismatch, "general_eigen: matrix is not square");
  detail::require_finite(input, "general_eigen");
  const std::size_t n = input.rows();
  Matrix h = input;
  Matrix z = Matrix::identity(n);

  // Householder reduction to upper Hessenberg form, H = Z^T A Z.
  for (std::size_t k = 0; k + 2 < n; ++k) {
    const std::size_t m = n - k - 1;
    Vector v(m);
    double xnorm = 0.0;
    for (std::size_t i = 0; i < m; ++i) {
      v[i] = h(k + 1 + i, k);
      xnorm += v[i] * v[i];
    }
    xnorm = std::sqrt(xnorm);
    if (xnorm == 0.0) continue;
    const double alpha = v[0] >= 0.0 ? -xnorm : xnorm;
    v[0] -= alpha;
    const double vv = dot(v, v);
    if (vv == 0.0) continue;
    for (std::size_t j = 0; j < n; ++j) {
      double s = 0.0;
      for (std::size_t i = 0; i < m; ++i) s += v[i] * h(k + 1 + i, j);
      s *= 2.0 / vv;
      for (std::size_t i = 0; i < m; ++i) h(k + 1 + i, j) -= s * v[i];
    }
    for (std::size_t i = 0; i < n; ++i) {
      double s = 0.0;
      for (std::size_t j = 0; j < m; ++j) s += h(i, k + 1 + j) * v[j];
      s *= 2.0 / vv;
      for (std::size_t j = 0; j < m; ++j) h(i, k + 1 + j) -= s * v[j];
    }
    for (std::size_t i = 0; i < n; ++i) {
      double s = 0.0;
      for (std::size_t j = 0; j < m; ++j) s += z(i, k + 1 + j) * v[j];
      s *= 2.0 / vv;
      for (std::size_t j = 0; j < m; ++j) z(i, k + 1 + j) -= s * v[j];
    }
    for (std::size_t i = k + 2; i < n; ++i) h(i, k) = 0.0;
  }

  const double eps = std::numeric_limits<double>::epsilon();
  const double hnorm = std::max(h.max_abs(), 1e-300);

  // Shifted QR on the active window [lo, hi].
  std::ptrdiff_t hi = static_cast<std::ptrdiff_t>(n) - 1;
  int iter = 0, total = 0;
  const int cap = max_iter_per_value * static_cast<int>(n);
  while (hi > 0) {
    std::ptrdiff_t lo = hi;
    while (lo > 0) {
      const double sub = std::abs(h(lo, lo - 1));
      const double diag = std::abs(h(lo - 1, lo - 1)) + std::abs(h(lo, lo));
      if (sub <= eps * (diag > 0.0 ? diag : hnorm)) {
        h(lo, lo - 1) = 0.0;
        break;
      }
      --lo;
    }
    if (lo == hi) {
      --hi;
      iter = 0;
      continue;
    }
    if (lo == hi - 1) {
      detail::split_2x2(h, z, static_cast<std::size_t>(lo));
      hi -= 2;
      iter = 0;
      continue;
    }
    if (++total > cap) throw Error(Errc::NoConvergence, "general_eigen: QR iteration cap exceeded");
    ++iter;

    const auto uh = static_cast<std::size_t>(hi);
    const auto ul = static_cast<std::size_t>(lo);
    const double a = h(uh - 1, uh - 1), b = h(uh - 1, uh), c = h(uh, uh - 1), d = h(uh, uh);
    double mu = d;
    const double half = 0.5 * (a - d);
    const double disc = half * half + b * c;
    if (disc >= 0.0) {
      const double r1 = 0.5 * (a + d) + std::sqrt(disc), r2 = 0.5 * (a + d) - std::sqrt(disc);
      mu = std::abs(r1 - d) < std::abs(r2 - d) ? r1 : r2;
    }
    if (iter % 11 == 10) mu = d + std::abs(c);  // exceptional shift

    for (std::size_t i = ul; i <= uh; ++i) h(i, i) -= mu;
    std::vector<std::pair<double, double>> rot;
    rot.reserve(uh - ul);
    for (std::size_t k = ul; k < uh; ++k) {
      const double x = h(k, k), y = h(k + 1, k);
      const double r = std::hypot(x, y);
      const double cs = r == 0.0 ? 1.0 : x / r, sn = r == 0.0 ? 0.0 : y / r;
      rot.emplace_back(cs, sn);
      for (std::size_t j = k; j < n; ++j) {
        const double p = h(k, j), q = h(k + 1, j);
        h(k, j) = cs * p + sn * q;
        h(k + 1, j) = -sn * p + cs * q;
      }
      h(k + 1, k) = 0.0;
    }
    for (std::size_t k = ul; k < uh; ++k) {
      const auto [cs, sn] = rot[k - ul];
      for (std::size_t i = 0; i <= std::min(k + 1, uh); ++i) {
        const double p = h(i, k), q = h(i, k + 1);
        h(i, k) = cs * p + sn * q;
        h(i, k + 1) = -sn * p + cs * q;
      }
      for (std::size_t i = 0; i < n; ++i) {
        const double p = z(i, k), q = z(i, k + 1);
        z(i, k) = cs * p + sn * q;
        z(i, k + 1) = -sn * p + cs * q;
      }
    }
    for (std::size_t i = ul; i <= uh; ++i) h(i, i) += mu;
  }

  // Eigenvectors of the triangular factor by back substitution, then map back.
  Vector values(n);
  for (std::size_t i = 0; i < n; ++i) values[i] = h(i, i);
  const double tol = 1e-14 * hnorm;
  Matrix vecs(n, n);
  for (std::size_t k = 0; k < n; ++k) {
    Vector y(n, 0.0);
    y[k] = 1.0;
    for (std::size_t ii = k; ii-- > 0;) {
      double rhs = 0.0;
      for (std::size_t j = ii + 1; j <= k; ++j) rhs -= h(ii, j) * y[j];
      double den = h(ii, ii) - values[k];
      if (std::abs(den) < tol) {
        if (std::abs(rhs) <= tol) {
          y[ii] = 0.0;
          continue;
        }
        den = den < 0.0 ? -tol : tol;
      }
      y[ii] = rhs / den;
    }
    const Vector x = z * y;
    for (std::size_t r = 0; r < n; ++r) vecs(r, k) = x[r];
  }

  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(),
                   [&](std::size_t l, std::size_t r) { return std::abs(values[l]) > std::abs(values[r]); });
  // Near-ties in magnitude: positive value first.
  for (std::size_t l = 0; l + 1 < n; ++l) {
    const double a = values[order[l]], b = values[order[l + 1]];
    if (std::abs(std::abs(a) - std::abs(b)) <= 1e-12 * hnorm && b > a) std::swap(order[l], order[l + 1]);
  }
  return detail::reorder(values, vecs, order);
}

// ---------------------------------------------------------------------------
// Factorisations

/// Lower-triangular L with L L^T = a.
inline Matrix cholesky(const Matrix& a) {
  detail::require_symmetric(a, "cholesky");
  const std::size_t n = a.rows();
  double scale = 0.0;
  for (std::size_t i = 0; i < n; ++i) scale = std::max(scale, std::abs(a(i, i)));
  const double tol = kPdTolerance * std::max(scale, std::numeric_limits<double>::min());
  Matrix l(n, n);
  for (std::size_t j = 0; j < n; ++j) {
    double d = a(j, j);
    for (std::size_t k = 0; k < j; ++k) d -= l(j, k) * l(j, k);
    if (!(d > tol))
      throw IndexedError(Errc::NotPositiveDefinite, "cholesky: non-positive pivot at " + std::to_string(j), j);
    l(j, j) = std::sqrt(d);
    for (std::size_t i = j + 1; i < n; ++i) {
      double s = a(i, j);
      for (std::size_t k = 0; k < j; ++k) s -= l(i, k) * l(j, k);
      l(i, j) = s / l(j, j);
    }
  }
  return l;
}

/// All eigenvalues above kPdTolerance times the largest one.
inline bool is_positive_definite(const Matrix& a) {
  detail::require_symmetric(a, "is_positive_definite");
  const EigenResult e = sym_eigen(a);
  const double top = e.values.front();
  if (!(top > 0.0)) return false;
  return e.values.back() > kPdTolerance * top;
}

/// Solves L x = b for lower-triangular L.
inline Vector forward_subst(const Matrix& l, std::span<const double> b) {
  const std::size_t n = l.rows();
  Vector x(b.begin(), b.end());
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t k = 0; k < i; ++k) x[i] -= l(i, k) * x[k];
    x[i] /= l(i, i);
  }
  return x;
}

/// Solves L^T x = b for lower-triangular L.
inline Vector back_subst_transpose(const Matrix& l, std::span<const double> b) {
  const std::size_t n = l.rows();
  Vector x(b.begin(), b.end());
  for (std::size_t ii = n; ii-- > 0;) {
    for (std::size_t k = ii + 1; k < n; ++k) x[ii] -= l(k, ii) * x[k];
    x[ii] /= l(ii, ii);
  }
  return x;
}

inline constexpr double kConditionCap = 1e12;

/// Gauss-Jordan inverse with partial pivoting; rejects matrices whose
/// 1-norm condition number exceeds kConditionCap.
inline Matrix inverse(const Matrix& a) {
  if (!a.is_square()) throw Error(Errc::LengthMismatch, "inverse: matrix is not square");
  detail::require_finite(a, "inverse");
  const std::size_t n = a.rows();
  Matrix w = a;
  Matrix inv = Matrix::identity(n);
  const double scale = a.max_abs();
  if (scale == 0.0) throw Error(Errc::Singular, "inverse: zero matrix");

  for (std::size_t col = 0; col < n; ++col) {
    std::size_t piv = col;
    for (std::size_t r = col + 1; r < n; ++r)
      if (std::abs(w(r, col)) > std::abs(w(piv, col))) piv = r;
    if (std::abs(w(piv, col)) <= 1e-14 * scale)
      throw Error(Errc::Singular, "inverse: zero pivot in column " + std::to_string(col));
    if (piv != col)
      for (std::size_t c = 0; c < n; ++c) {
        std::swap(w(piv, c), w(col, c));
        std::swap(inv(piv, c), inv(col, c));
      }
    const double p = w(col, col);
    for (std::size_t c = 0; c < n; ++c) {
      w(col, c) /= p;
      inv(col, c) /= p;
    }
    for (std::size_t r = 0; r < n; ++r) {
      if (r == col) continue;
      const double f = w(r, col);
      if (f == 0.0) continue;
      for (std::size_t c = 0; c < n; ++c) {
        w(r, c) -= f * w(col, c);
        inv(r, c) -= f * inv(col, c);
      }
    }
  }

  auto norm1 = [n](const Matrix& m) {
    double best = 0.0;
    for (std::size_t c = 0; c < n; ++c) {
      double s = 0.0;
      for (std::size_t r = 0; r < n; ++r) s += std::abs(m(r, c));
      best = std::max(best, s);
    }
    return best;
  };
  const double cond = norm1(a) * norm1(inv);
  if (!(cond <= kConditionCap))
    throw Error(Errc::IllConditioned, "inverse: condition estimate " + std::to_string(cond) + " exceeds cap");
  return inv;
}

/// Raises every eigenvalue of a symmetric matrix to at least `floor`.
struct FlooredSpectrum {
  Matrix matrix;
  double max_change = 0.0;  // largest eigenvalue adjustment
};

inline FlooredSpectrum floor_eigenvalues(const Matrix& a, double floor) {
  const EigenResult e = sym_eigen(a);
  const std::size_t n = a.rows();
  FlooredSpectrum out{Matrix(n, n), 0.0};
  for (std::size_t l = 0; l < n; ++l) {
    const double lam = std::max(e.values[l], floor);
    out.max_change = std::max(out.max_change, lam - e.values[l]);
    for (std::size_t r = 0; r < n; ++r)
      for (std::size_t c = 0; c < n; ++c) out.matrix(r, c) += lam * e.vectors(r, l) * e.vectors(c, l);
  }
  for (std::size_t r = 0; r < n; ++r)
    for (std::size_t c = r + 1; c < n; ++c) out.matrix(r, c) = out.matrix(c, r) = 0.5 * (out.matrix(r, c) + out.matrix(c, r));
  return out;
}

}  // namespace macnet
