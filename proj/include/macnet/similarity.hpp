#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <span>
#include <string>
#include <utility>

#include "macnet/error.hpp"
#include "macnet/matrix.hpp"
#include "macnet/numkernel.hpp"

namespace macnet {

/// Marginal and cross correlation blocks for one node pair. sigma_ij(l, m)
/// is corr(X_i^(l), X_j^(m)), so the joint correlation of the stacked vector
/// (X_i, X_j) is [[sigma_ii, sigma_ij], [sigma_ij^T, sigma_jj]].
class PairCorrelationStructure {
 public:
  PairCorrelationStructure(Matrix sigma_ii, Matrix sigma_jj, Matrix sigma_ij)
      : ii_(std::move(sigma_ii)), jj_(std::move(sigma_jj)), ij_(std::move(sigma_ij)) {
    const std::size_t k = ii_.rows();
    if (!ii_.is_square() || jj_.rows() != k || jj_.cols() != k || ij_.rows() != k || ij_.cols() != k)
      throw Error(Errc::LengthMismatch, "PairCorrelationStructure: blocks must all be k x k");
    check_marginal(ii_, "sigma_ii");
    check_marginal(jj_, "sigma_jj");
    for (double x : ij_.data())
      if (!(std::abs(x) <= 1.0)) throw Error(Errc::OutOfDomain, "PairCorrelationStructure: cross correlation outside [-1, 1]");
  }

  /// Splits a 2k x 2k joint correlation matrix of (X_i, X_j).
  static PairCorrelationStructure from_joint(const Matrix& joint) {
    if (!joint.is_square() || joint.rows() % 2 != 0)
      throw Error(Errc::LengthMismatch, "from_joint: expected a 2k x 2k matrix");
    const std::size_t k = joint.rows() / 2;
    return {joint.block(0, 0, k, k), joint.block(k, k, k, k), joint.block(0, k, k, k)};
  }

  /// Homogeneous structure: sigma_ii = sigma_jj = sigma_m, sigma_ij = sigma_c.
  static PairCorrelationStructure homogeneous(const Matrix& sigma_m, const Matrix& sigma_c) {
    return {sigma_m, sigma_m, sigma_c};
  }

  std::size_t k() const noexcept { return ii_.rows(); }
  const Matrix& sigma_ii() const noexcept { return ii_; }
  const Matrix& sigma_jj() const noexcept { return jj_; }
  const Matrix& sigma_ij() const noexcept { return ij_; }

  Matrix supermatrix() const {
    const std::size_t k = this->k();
    Matrix s(2 * k, 2 * k);
    s.set_block(0, 0, ii_);
    s.set_block(k, k, jj_);
    s.set_block(0, k, ij_);
    s.set_block(k, 0, ij_.transpose());
    return s;
  }

  /// The same pair seen from node j.
  PairCorrelationStructure swapped() const { return {jj_, ii_, ij_.transpose()}; }

  bool is_homogeneous(double tol = 1e-12) const {
    return max_abs_diff(ii_, jj_) <= tol && ij_.asymmetry() <= tol;
  }

 private:
  static void check_marginal(const Matrix& m, const char* name) {
    if (m.asymmetry() > 1e-12) throw Error(Errc::NotSymmetric, std::string(name) + " is not symmetric");
    for (std::size_t i = 0; i < m.rows(); ++i)
      if (std::abs(m(i, i) - 1.0) > 1e-12) throw Error(Errc::OutOfDomain, std::string(name) + " lacks a unit diagonal");
  }

  Matrix ii_, jj_, ij_;
};

/// The two-attribute homogeneous parameterisation: sigma_m = [[1, r], [r, 1]],
/// sigma_c = [[rho1, b], [b, rho2]].
struct K2Params {
  double r = 0.0;
  double b = 0.0;
  double rho1 = 0.0;
  double rho2 = 0.0;

  double a1() const { return std::sqrt((1.0 - rho1) * (1.0 - rho2)); }
  double a2() const { return std::sqrt((1.0 + rho1) * (1.0 + rho2)); }
  double discriminant() const { return (rho1 - rho2) * (rho1 - rho2) + 4.0 * (b - rho1 * r) * (b - rho2 * r); }
  bool valid() const { return std::abs(b - r) < a1() && std::abs(b + r) < a2(); }

  Matrix sigma_m() const { return {{1.0, r}, {r, 1.0}}; }
  Matrix sigma_c() const { return {{rho1, b}, {b, rho2}}; }
};

struct CanonicalSolution {
  Vector roots;        // all canonical roots, descending
  double rho_c = 0.0;  // first root
  Vector w_i, w_j;     // first-root weights, scaled to unit canonical variance
  Vector contrib_i, contrib_j;
  bool degenerate = false;  // first root repeated; weights are one choice among many

  /// Per-edge contribution: mean of the two endpoints' squared standardized weights.
  Vector edge_contrib() const {
    Vector c(contrib_i.size());
    for (std::size_t l = 0; l < c.size(); ++l) c[l] = 0.5 * (contrib_i[l] + contrib_j[l]);
    return c;
  }
};

/// Squared entries of w after rescaling w to unit Euclidean length.
inline Vector squared_standardized(std::span<const double> w) {
  double s = 0.0;
  for (double x : w) s += x * x;
  Vector c(w.size());
  if (s == 0.0) return c;
  for (std::size_t l = 0; l < w.size(); ++l) c[l] = w[l] * w[l] / s;
  return c;
}

/// corr(w_i^T X_i, w_j^T X_j) under the given structure.
inline double canonical_objective(const PairCorrelationStructure& s, std::span<const double> w_i,
                                  std::span<const double> w_j) {
  const double num = quad_form(w_i, s.sigma_ij(), w_j);
  return num / std::sqrt(quad_form(w_i, s.sigma_ii(), w_i) * quad_form(w_j, s.sigma_jj(), w_j));
}

namespace detail {

inline constexpr double kRootClamp = 1e-12;
inline constexpr double kRepeatedRoot = 1e-10;

// Squared root to [0, 1] with the tolerated slack on either side.
inline double clamp_squared_root(double lambda2) {
  if (lambda2 < -kRootClamp || lambda2 > 1.0 + kRootClamp || std::isnan(lambda2))
    throw Error(Errc::InternalNumericalError, "canonical root squared = " + std::to_string(lambda2) + " outside [0, 1]");
  return std::clamp(lambda2, 0.0, 1.0);
}

inline void scale_to_unit_variance(Vector& w, const Matrix& sigma) {
  const double v = quad_form(w, sigma, w);
  if (v > 0.0)
    for (double& x : w) x /= std::sqrt(v);
}

}  // namespace detail

/// General canonical correlation of one pair. Solves the eigenproblem
/// sigma_jj^-1 sigma_ij^T sigma_ii^-1 sigma_ij w_j = lambda^2 w_j through
/// the symmetric similarity transform obtained from Cholesky whitening of
/// both marginal blocks; w_i follows from the companion equation.
inline CanonicalSolution canonical_corr(const PairCorrelationStructure& s) {
  if (!is_positive_definite(s.supermatrix()))
    throw Error(Errc::NotPositiveDefinite, "canonical_corr: correlation supermatrix is not positive-definite");
  const std::size_t k = s.k();
  const Matrix lii = cholesky(s.sigma_ii());
  const Matrix ljj = cholesky(s.sigma_jj());

  // whitened cross block M = Lii^-1 sigma_ij Ljj^-T
  Matrix b(k, k);
  for (std::size_t c = 0; c < k; ++c) {
    const Vector col = forward_subst(lii, s.sigma_ij().col(c));
    for (std::size_t r = 0; r < k; ++r) b(r, c) = col[r];
  }
  Matrix m(k, k);
  for (std::size_t r = 0; r < k; ++r) {
    const Vector row = forward_subst(ljj, b.row(r));
    for (std::size_t c = 0; c < k; ++c) m(r, c) = row[c];
  }

  const EigenResult eig = sym_eigen(m.transpose() * m);
  CanonicalSolution sol;
  sol.roots.resize(k);
  for (std::size_t l = 0; l < k; ++l) sol.roots[l] = std::sqrt(detail::clamp_squared_root(eig.values[l]));
  sol.rho_c = sol.roots.front();
  sol.degenerate = k > 1 && eig.values[0] - eig.values[1] <= detail::kRepeatedRoot;

  const Vector v = eig.vector(0);
  sol.w_j = back_subst_transpose(ljj, v);
  if (sol.rho_c > 1e-12) {
    Vector mv = m * v;
    for (double& x : mv) x /= sol.rho_c;
    sol.w_i = back_subst_transpose(lii, mv);
  } else {
    const EigenResult left = sym_eigen(m * m.transpose());
    sol.w_i = back_subst_transpose(lii, left.vector(0));
  }
  detail::scale_to_unit_variance(sol.w_i, s.sigma_ii());
  detail::scale_to_unit_variance(sol.w_j, s.sigma_jj());
  sol.contrib_i = squared_standardized(sol.w_i);
  sol.contrib_j = squared_standardized(sol.w_j);
  return sol;
}

/// Canonical correlation under homogeneity (sigma_ii = sigma_jj = sigma_m,
/// symmetric sigma_ij = sigma_c): the single eigenproblem
/// sigma_m^-1 sigma_c w = lambda w. rho_c is the largest |lambda| and one
/// weight vector serves both endpoints.
inline CanonicalSolution canonical_corr_homogeneous(const Matrix& sigma_m, const Matrix& sigma_c) {
  if (!sigma_c.is_square() || sigma_c.rows() != sigma_m.rows())
    throw Error(Errc::LengthMismatch, "canonical_corr_homogeneous: sigma_m and sigma_c must be k x k");
  if (sigma_c.asymmetry() > 1e-12) throw Error(Errc::NotSymmetric, "canonical_corr_homogeneous: sigma_c is not symmetric");
  const auto structure = PairCorrelationStructure::homogeneous(sigma_m, sigma_c);
  cholesky(sigma_m);  // throws NotPositiveDefinite
  if (!is_positive_definite(structure.supermatrix()))
    throw Error(Errc::NotPositiveDefinite, "canonical_corr_homogeneous: supermatrix is not positive-definite");

  const std::size_t k = sigma_m.rows();
  const EigenResult eig = general_eigen(inverse(sigma_m) * sigma_c);
  CanonicalSolution sol;
  sol.roots.resize(k);
  for (std::size_t l = 0; l < k; ++l) {
    const double a = std::abs(eig.values[l]);
    sol.roots[l] = std::sqrt(detail::clamp_squared_root(a * a));
  }
  sol.rho_c = sol.roots.front();
  sol.degenerate = k > 1 && std::abs(eig.values[0]) - std::abs(eig.values[1]) <= detail::kRepeatedRoot;

  Vector w = eig.vector(0);
  detail::scale_to_unit_variance(w, sigma_m);
  sol.w_i = w;
  sol.w_j = w;
  sol.contrib_i = squared_standardized(w);
  sol.contrib_j = sol.contrib_i;
  return sol;
}

/// Closed-form rho_c for the two-attribute homogeneous parameterisation.
inline double k2_closed_form(const K2Params& p) {
  if (std::abs(p.r) >= 1.0) throw Error(Errc::DegenerateR, "k2_closed_form: |r| = 1");
  if (!p.valid()) throw Error(Errc::OutOfDomain, "k2_closed_form: (r, b) outside the positive-definite domain");
  const double sq = std::sqrt(std::max(p.discriminant(), 0.0));
  const double base = p.rho1 + p.rho2 - 2.0 * p.b * p.r;
  const double den = 2.0 * (1.0 - p.r * p.r);
  return std::max(std::abs(base - sq), std::abs(base + sq)) / den;
}

/// True iff the assembled 4 x 4 correlation matrix is positive-definite.
inline bool k2_domain(const K2Params& p) { return p.valid(); }

/// Equal-correlation structure for k attributes: sigma_m has off-diagonal r,
/// sigma_c has diagonal rho and off-diagonal b.
inline std::pair<Matrix, Matrix> equal_corr_structure(std::size_t k, double r, double rho, double b) {
  Matrix m(k, k, r), c(k, k, b);
  for (std::size_t i = 0; i < k; ++i) {
    m(i, i) = 1.0;
    c(i, i) = rho;
  }
  return {m, c};
}

inline double equal_corr_closed_form(std::size_t k, double r, double rho, double b) {
  if (k < 2) throw Error(Errc::OutOfDomain, "equal_corr_closed_form: k must be at least 2");
  const double km1 = static_cast<double>(k - 1);
  const bool ok = -1.0 / km1 < r && r < 1.0 && std::abs(rho - b) < std::abs(1.0 - r) &&
                  std::abs(rho + km1 * b) < std::abs(1.0 + km1 * r);
  if (!ok) throw Error(Errc::OutOfDomain, "equal_corr_closed_form: parameters outside the positive-definite domain");
  return std::max(std::abs((rho - b) / (1.0 - r)), std::abs((rho + km1 * b) / (1.0 + km1 * r)));
}

enum class Extreme { Max, Min };

/// Signed max or min of per-attribute correlations.
inline double aggregate_extreme(std::span<const double> rhos, Extreme mode) {
  if (rhos.empty()) throw Error(Errc::EmptyInput, "aggregate_extreme: empty list");
  return mode == Extreme::Max ? *std::max_element(rhos.begin(), rhos.end())
                              : *std::min_element(rhos.begin(), rhos.end());
}

}  // namespace macnet
