#pragma once

#include <cmath>
#include <numbers>
#include <string>

#include <boost/math/special_functions/gamma.hpp>

#include "macnet/error.hpp"

namespace macnet {

inline double normal_pdf(double x) noexcept {
  return std::exp(-0.5 * x * x) / std::sqrt(2.0 * std::numbers::pi);
}

/// Upper tail of the standard normal, P(Z > x).
inline double normal_sf(double x) noexcept { return 0.5 * std::erfc(x / std::numbers::sqrt2); }

inline double normal_cdf(double x) noexcept { return 0.5 * std::erfc(-x / std::numbers::sqrt2); }

/// Upper tail of the chi-square distribution, P(X > x) with `df` degrees of freedom.
inline double chi2_sf(double x, double df) {
  if (!(df >= 1.0) || !std::isfinite(df)) throw Error(Errc::InvalidDf, "chi2_sf: df must be >= 1, got " + std::to_string(df));
  if (std::isnan(x)) throw Error(Errc::NonFiniteInput, "chi2_sf: NaN statistic");
  if (x <= 0.0) return 1.0;
  if (std::isinf(x)) return 0.0;
  return boost::math::gamma_q(0.5 * df, 0.5 * x);
}

}  // namespace macnet
