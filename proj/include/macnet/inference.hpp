#pragma once

// Edge tests for each similarity measure, Benjamini-Hochberg FDR control and
// the pairwise homogeneity likelihood-ratio test.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <numeric>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "macnet/distributions.hpp"
#include "macnet/error.hpp"
#include "macnet/matrix.hpp"
#include "macnet/numkernel.hpp"
#include "macnet/random.hpp"
#include "macnet/similarity.hpp"

namespace macnet {

enum class Method { Pearson, Max, Min, Cca };

inline std::string_view method_name(Method m) noexcept {
  switch (m) {
    case Method::Pearson: return "pearson";
    case Method::Max: return "max";
    case Method::Min: return "min";
    case Method::Cca: return "cca";
  }
  return "?";
}

inline Method parse_method(std::string_view s) {
  if (s == "pearson") return Method::Pearson;
  if (s == "max") return Method::Max;
  if (s == "min") return Method::Min;
  if (s == "cca") return Method::Cca;
  throw Error(Errc::Usage, "unknown method '" + std::string(s) + "'");
}

/// Network inference tests H1: SIM != 0; the power study tests H1: SIM > 0.
enum class Sidedness { TwoSided, Greater };

/// Tail probabilities for max/min of two correlated z statistics.
enum class PValueMode { Formula, MonteCarlo };

inline PValueMode parse_pvalue_mode(std::string_view s) {
  if (s == "formula") return PValueMode::Formula;
  if (s == "montecarlo") return PValueMode::MonteCarlo;
  throw Error(Errc::Usage, "unknown p-value mode '" + std::string(s) + "'");
}

/// The W-formula correction term uses the normal CDF Phi(cL/2) - 1/2 (Efron's
/// rhombus formula, reduces to the single-variable tail when L = 0).
/// PrintedDensity keeps the density phi(cL/2) in that slot instead; it is
/// retained for comparison in the calibration table only.
enum class WFormulaVariant { Cdf, PrintedDensity };

struct EdgeTest {
  std::size_t i = 0, j = 0;
  Method method = Method::Pearson;
  double similarity = 0.0;
  double statistic = 0.0;   // z for pearson/max/min, chi-square for cca
  std::optional<double> df;  // cca only
  double p = 1.0;
  double q = 1.0;
  std::size_t n = 0;
};

// ---------------------------------------------------------------------------
// Fisher z

inline double fisher_z(double rho_hat, std::size_t n) {
  if (n < 4) throw Error(Errc::InsufficientSamples, "fisher_z: need n >= 4");
  if (!std::isfinite(rho_hat)) throw Error(Errc::NonFiniteInput, "fisher_z: non-finite correlation");
  if (std::abs(rho_hat) >= 1.0) throw Error(Errc::DegenerateCorrelation, "fisher_z: |rho| = 1");
  return std::sqrt(static_cast<double>(n) - 3.0) * std::atanh(rho_hat);
}

inline double z_pvalue(double z, Sidedness side) {
  return side == Sidedness::TwoSided ? std::min(1.0, 2.0 * normal_sf(std::abs(z))) : normal_sf(z);
}

// ---------------------------------------------------------------------------
// Bartlett chi-square

struct ChiSquareTest {
  double statistic = 0.0;
  double df = 0.0;
  double p = 1.0;
};

/// Minimum n for estimating a (2k)-dimensional correlation supermatrix.
inline bool bartlett_sample_ok(std::size_t n, std::size_t k) {
  return n > 2 * k + 2 && n - 1 >= (2 * k) * (2 * k - 1) / 2;
}

inline ChiSquareTest bartlett_chi2(std::span<const double> roots, std::size_t n, std::size_t k) {
  if (k == 0 || roots.empty() || roots.size() > k) throw Error(Errc::RootOutOfRange, "bartlett_chi2: expected 1..k roots");
  if (!bartlett_sample_ok(n, k))
    throw Error(Errc::InsufficientSamples,
                "bartlett_chi2: n = " + std::to_string(n) + " too small for k = " + std::to_string(k));
  double log_prod = 0.0;
  for (double r : roots) {
    if (!(r >= 0.0 && r <= 1.0)) throw Error(Errc::RootOutOfRange, "bartlett_chi2: root " + std::to_string(r) + " outside [0, 1]");
    log_prod += std::log1p(-r * r);
  }
  const double factor = (static_cast<double>(n) - 1.0) - (static_cast<double>(k) + 0.5);
  ChiSquareTest t;
  t.statistic = log_prod == 0.0 ? 0.0 : -factor * log_prod;
  t.df = static_cast<double>(k * k);
  t.p = chi2_sf(t.statistic, t.df);
  return t;
}

// ---------------------------------------------------------------------------
// Max / min of two correlated z statistics

namespace detail {

inline double w_correction(double c, double rho_z, WFormulaVariant variant) {
  const double l = std::acos(std::clamp(rho_z, -1.0, 1.0));
  if (variant == WFormulaVariant::Cdf) {
    const double x = 0.5 * c * l;
    if (std::abs(x) < 1e-8) return l * normal_pdf(0.0);  // limit as c -> 0
    return (normal_cdf(x) - 0.5) / (0.5 * c);
  }
  return (normal_pdf(0.5 * c * l) - 0.5) / (0.5 * c);
}

inline void check_extreme_inputs(double a, double b, double rho_z) {
  if (!std::isfinite(a) || !std::isfinite(b) || !std::isfinite(rho_z))
    throw Error(Errc::NonFiniteInput, "extreme_corr_pvalue: non-finite input");
  if (std::abs(rho_z) > 1.0 + 1e-12) throw Error(Errc::OutOfDomain, "extreme_corr_pvalue: |rho_z| > 1");
}

}  // namespace detail

/// W-formula approximation of P(max(z1, z2) > c) or P(min(z1, z2) > c) where
/// corr(z1, z2) = rho_z.
inline double w_formula_tail(double c, double rho_z, Extreme mode, WFormulaVariant variant = WFormulaVariant::Cdf) {
  detail::check_extreme_inputs(c, 0.0, rho_z);
  const double corr = normal_pdf(c) * detail::w_correction(c, rho_z, variant);
  const double p = mode == Extreme::Max ? normal_sf(c) + corr : normal_sf(c) - corr;
  return std::isnan(p) ? 0.0 : std::clamp(p, 0.0, 1.0);
}

/// Upper-tail p-value of the observed extreme: c = max(z1, z2) in max mode,
/// the minimum in min mode.
inline double extreme_corr_pvalue(double z1, double z2, double rho_z, Extreme mode,
                                  WFormulaVariant variant = WFormulaVariant::Cdf) {
  detail::check_extreme_inputs(z1, z2, rho_z);
  const double c = mode == Extreme::Max ? std::max(z1, z2) : std::min(z1, z2);
  return w_formula_tail(c, rho_z, mode, variant);
}

/// Monte Carlo tail for the extreme of a standard bivariate normal pair.
/// One fixed set of draws is reused for every (c, rho) query, so results are
/// deterministic for a given seed.
class ExtremeTailSampler {
 public:
  static constexpr std::size_t kDefaultDraws = 1'000'000;

  explicit ExtremeTailSampler(std::size_t draws = kDefaultDraws, std::uint64_t seed = 20240601)
      : u_(draws), v_(draws) {
    Engine eng = substream(seed, {0x7a11});
    std::normal_distribution<double> nd;
    for (std::size_t d = 0; d < draws; ++d) {
      u_[d] = nd(eng);
      v_[d] = nd(eng);
    }
  }

  std::size_t draws() const noexcept { return u_.size(); }

  double tail(double c, double rho_z, Extreme mode) const {
    detail::check_extreme_inputs(c, 0.0, rho_z);
    const double rho = std::clamp(rho_z, -1.0, 1.0);
    const double s = std::sqrt(std::max(0.0, 1.0 - rho * rho));
    std::size_t hits = 0;
    for (std::size_t d = 0; d < u_.size(); ++d) {
      const double z1 = u_[d], z2 = rho * u_[d] + s * v_[d];
      const double e = mode == Extreme::Max ? std::max(z1, z2) : std::min(z1, z2);
      hits += e > c;
    }
    return static_cast<double>(hits) / static_cast<double>(u_.size());
  }

  /// Monte Carlo standard error of a tail estimate p.
  double standard_error(double p) const { return std::sqrt(p * (1.0 - p) / static_cast<double>(u_.size())); }

  /// Sorted max and min of every draw at a fixed correlation, for fast
  /// repeated tail queries. tail_sorted(c, v) equals tail(c, rho, mode).
  std::vector<double> sorted_extremes(double rho_z, Extreme mode) const {
    detail::check_extreme_inputs(0.0, 0.0, rho_z);
    const double rho = std::clamp(rho_z, -1.0, 1.0);
    const double s = std::sqrt(std::max(0.0, 1.0 - rho * rho));
    std::vector<double> e(u_.size());
    for (std::size_t d = 0; d < u_.size(); ++d) {
      const double z1 = u_[d], z2 = rho * u_[d] + s * v_[d];
      e[d] = mode == Extreme::Max ? std::max(z1, z2) : std::min(z1, z2);
    }
    std::sort(e.begin(), e.end());
    return e;
  }

  static double tail_sorted(double c, const std::vector<double>& sorted) {
    const auto it = std::upper_bound(sorted.begin(), sorted.end(), c);
    return static_cast<double>(sorted.end() - it) / static_cast<double>(sorted.size());
  }

 private:
  std::vector<double> u_, v_;
};

/// Tail evaluator for max/min statistics: W-formula or Monte Carlo.
class ExtremeTail {
 public:
  explicit ExtremeTail(PValueMode mode = PValueMode::Formula, std::size_t draws = ExtremeTailSampler::kDefaultDraws,
                       std::uint64_t seed = 20240601)
      : mode_(mode) {
    if (mode == PValueMode::MonteCarlo) sampler_.emplace(draws, seed);
  }

  PValueMode mode() const noexcept { return mode_; }

  double upper(double c, double rho_z, Extreme which) const {
    return mode_ == PValueMode::Formula ? w_formula_tail(c, rho_z, which) : sampler_->tail(c, rho_z, which);
  }

  /// Evaluator at one fixed correlation; in Monte Carlo mode it sorts the
  /// draws once so each query is a binary search.
  class AtRho {
   public:
    AtRho(const ExtremeTail& parent, double rho_z) : parent_(parent), rho_(rho_z) {
      if (parent.mode_ == PValueMode::MonteCarlo) {
        max_ = parent.sampler_->sorted_extremes(rho_z, Extreme::Max);
        min_ = parent.sampler_->sorted_extremes(rho_z, Extreme::Min);
      } else {
        detail::check_extreme_inputs(0.0, 0.0, rho_z);
      }
    }

    double upper(double c, Extreme which) const {
      if (parent_.mode_ == PValueMode::Formula) return w_formula_tail(c, rho_, which);
      if (!std::isfinite(c)) throw Error(Errc::NonFiniteInput, "extreme tail: non-finite statistic");
      return ExtremeTailSampler::tail_sorted(c, which == Extreme::Max ? max_ : min_);
    }

    double pvalue(double stat, Extreme which, Sidedness side) const {
      return combine(upper(stat, which), side == Sidedness::Greater ? 0.0 : upper(-stat, other(which)), side);
    }

   private:
    const ExtremeTail& parent_;
    double rho_;
    std::vector<double> max_, min_;
  };

  AtRho at(double rho_z) const { return AtRho(*this, rho_z); }

  /// p-value for an observed extreme statistic. Two-sided p doubles the
  /// smaller tail; the lower tail of the max is the upper tail of the min of
  /// the negated pair, which has the same correlation.
  double pvalue(double stat, double rho_z, Extreme which, Sidedness side) const {
    const double up = upper(stat, rho_z, which);
    return combine(up, side == Sidedness::Greater ? 0.0 : upper(-stat, rho_z, other(which)), side);
  }

 private:
  static Extreme other(Extreme e) { return e == Extreme::Max ? Extreme::Min : Extreme::Max; }
  static double combine(double up, double down, Sidedness side) {
    return side == Sidedness::Greater ? up : std::min(1.0, 2.0 * std::min(up, down));
  }

  PValueMode mode_;
  std::optional<ExtremeTailSampler> sampler_;
};

// ---------------------------------------------------------------------------
// Benjamini-Hochberg

struct FdrDecision {
  double gamma = 0.05;
  std::size_t cutoff_index = 0;       // number of rejections (largest passing rank)
  std::vector<std::size_t> rejected;  // original indices, ascending
  Vector q;                           // adjusted values aligned with the input
};

/// Relative slack when comparing p to its step-up threshold, so that exact
/// ties on decimal grids count as passing.
inline constexpr double kBhTieTolerance = 1e-12;

inline FdrDecision bh_fdr(std::span<const double> pvalues, double gamma) {
  if (!(gamma > 0.0 && gamma < 1.0)) throw Error(Errc::InvalidGamma, "bh_fdr: gamma must lie in (0, 1)");
  for (double p : pvalues)
    if (!(p >= 0.0 && p <= 1.0)) throw Error(Errc::InvalidP, "bh_fdr: p-value " + std::to_string(p) + " outside [0, 1]");

  const std::size_t m = pvalues.size();
  std::vector<std::size_t> order(m);
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return pvalues[a] < pvalues[b]; });

  FdrDecision d;
  d.gamma = gamma;
  d.q.assign(m, 1.0);
  const double md = static_cast<double>(m);
  for (std::size_t rank = m; rank >= 1; --rank) {
    const double threshold = static_cast<double>(rank) * gamma / md;
    if (pvalues[order[rank - 1]] <= threshold * (1.0 + kBhTieTolerance)) {
      d.cutoff_index = rank;
      break;
    }
  }

  double running = 1.0;
  for (std::size_t rank = m; rank >= 1; --rank) {
    const std::size_t idx = order[rank - 1];
    running = std::min(running, md * pvalues[idx] / static_cast<double>(rank));
    d.q[idx] = std::clamp(running, pvalues[idx], 1.0);
    if (rank <= d.cutoff_index) d.q[idx] = std::max(pvalues[idx], std::min(d.q[idx], gamma));
  }

  d.rejected.assign(order.begin(), order.begin() + static_cast<std::ptrdiff_t>(d.cutoff_index));
  std::sort(d.rejected.begin(), d.rejected.end());
  return d;
}

// ---------------------------------------------------------------------------
// Homogeneity likelihood ratio

struct LrtResult {
  double statistic = 0.0;
  double df = 0.0;
  double p = 1.0;
};

/// Degrees of freedom: k(k+1)/2 equalities for sigma_ii = sigma_jj plus
/// k(k-1)/2 symmetry constraints on sigma_ij.
inline std::size_t homogeneity_df(std::size_t k) { return k * (k + 1) / 2 + k * (k - 1) / 2; }

namespace detail {

inline double log_det_spd(const Matrix& a) {
  Matrix l;
  try {
    l = cholesky(a);
  } catch (const Error&) {
    throw Error(Errc::SingularCovariance, "homogeneity_lrt: sample covariance is singular");
  }
  double s = 0.0;
  for (std::size_t i = 0; i < l.rows(); ++i) s += 2.0 * std::log(l(i, i));
  return s;
}

}  // namespace detail

/// -2 log Lambda for the Gaussian model of the stacked vector (X_i, X_j)
/// against the model invariant under swapping the two nodes, i.e.
/// sigma_ii = sigma_jj and sigma_ij = sigma_ij^T. The constrained maximum
/// likelihood estimate is the average of S and its swapped copy, which is
/// the fixed point of alternately equalising the marginal blocks and
/// symmetrising the cross block.
inline LrtResult homogeneity_lrt(const Matrix& samples_i, const Matrix& samples_j) {
  if (samples_i.rows() != samples_j.rows() || samples_i.cols() != samples_j.cols())
    throw Error(Errc::LengthMismatch, "homogeneity_lrt: sample blocks differ in shape");
  const std::size_t n = samples_i.rows(), k = samples_i.cols();
  if (n < 2 * k + 2) throw Error(Errc::InsufficientSamples, "homogeneity_lrt: need n >= 2k + 2");

  const std::size_t d = 2 * k;
  Vector mean(d, 0.0);
  for (std::size_t r = 0; r < n; ++r)
    for (std::size_t c = 0; c < k; ++c) {
      mean[c] += samples_i(r, c);
      mean[k + c] += samples_j(r, c);
    }
  for (double& m : mean) m /= static_cast<double>(n);

  Matrix s(d, d);
  Vector row(d);
  for (std::size_t r = 0; r < n; ++r) {
    for (std::size_t c = 0; c < k; ++c) {
      row[c] = samples_i(r, c) - mean[c];
      row[k + c] = samples_j(r, c) - mean[k + c];
    }
    for (std::size_t a = 0; a < d; ++a)
      for (std::size_t b = 0; b < d; ++b) s(a, b) += row[a] * row[b];
  }
  s *= 1.0 / static_cast<double>(n);

  auto swap_index = [k](std::size_t a) { return a < k ? a + k : a - k; };
  Matrix constrained(d, d);
  for (std::size_t a = 0; a < d; ++a)
    for (std::size_t b = 0; b < d; ++b) constrained(a, b) = 0.5 * (s(a, b) + s(swap_index(a), swap_index(b)));

  LrtResult res;
  res.df = static_cast<double>(homogeneity_df(k));
  if (max_abs_diff(constrained, s) <= 1e-14 * std::max(1.0, s.max_abs())) return res;  // already swap-invariant
  const double stat = static_cast<double>(n) * (detail::log_det_spd(constrained) - detail::log_det_spd(s));
  res.statistic = std::max(stat, 0.0);
  res.p = chi2_sf(res.statistic, res.df);
  return res;
}

}  // namespace macnet
