#pragma once

// Structured-covariance sampling and the five-scenario power study for the
// two-attribute homogeneous model.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <optional>
#include <random>
#include <string>
#include <vector>

#include <boost/math/distributions/normal.hpp>

#include "macnet/error.hpp"
#include "macnet/inference.hpp"
#include "macnet/matrix.hpp"
#include "macnet/numkernel.hpp"
#include "macnet/parallel.hpp"
#include "macnet/random.hpp"
#include "macnet/similarity.hpp"

namespace macnet {

/// [[sigma_m, sigma_c], [sigma_c, sigma_m]] with variables ordered
/// (node i attr 1, node i attr 2, node j attr 1, node j attr 2).
inline Matrix build_sigma(const K2Params& p) {
  if (!p.valid())
    throw Error(Errc::OutOfDomain, "build_sigma: (r, b) = (" + std::to_string(p.r) + ", " + std::to_string(p.b) +
                                       ") is outside the positive-definite domain");
  Matrix s(4, 4);
  s.set_block(0, 0, p.sigma_m());
  s.set_block(2, 2, p.sigma_m());
  s.set_block(0, 2, p.sigma_c());
  s.set_block(2, 0, p.sigma_c());
  return s;
}

/// n draws from N(0, sigma): rows are iid standard normal vectors times L^T.
inline Matrix sample_mvn(const Matrix& sigma, std::size_t n, Engine& eng) {
  const Matrix l = cholesky(sigma);
  const std::size_t d = sigma.rows();
  std::normal_distribution<double> nd;
  Matrix out(n, d);
  Vector z(d);
  for (std::size_t r = 0; r < n; ++r) {
    for (double& x : z) x = nd(eng);
    for (std::size_t a = 0; a < d; ++a) {
      double s = 0.0;
      for (std::size_t b = 0; b <= a; ++b) s += l(a, b) * z[b];
      out(r, a) = s;
    }
  }
  return out;
}

inline Matrix sample_mvn(const Matrix& sigma, std::size_t n, std::uint64_t seed) {
  Engine eng = substream(seed, {});
  return sample_mvn(sigma, n, eng);
}

struct GridPoint {
  double r = 0.0;
  double b = 0.0;
  bool operator==(const GridPoint&) const = default;
};

enum class SliceKind { BFromR, RFromB };  // b = f r, or r = f b

/// Points of a one-parameter slice at the given step over [-1, 1], keeping
/// only those strictly inside the positive-definite domain.
inline std::vector<GridPoint> slice_grid(SliceKind kind, double factor, double rho1, double rho2, double step = 0.05) {
  std::vector<GridPoint> out;
  const int steps = static_cast<int>(std::lround(1.0 / step));
  for (int s = -steps; s <= steps; ++s) {
    const double t = std::round(s * step * 1e12) / 1e12;
    const GridPoint g = kind == SliceKind::BFromR ? GridPoint{t, factor * t} : GridPoint{factor * t, t};
    if (K2Params{g.r, g.b, rho1, rho2}.valid()) out.push_back(g);
  }
  return out;
}

struct PowerStudySpec {
  double rho1 = 0.3;
  double rho2 = 0.1;
  std::vector<GridPoint> grid;
  std::size_t n = 50;
  std::size_t reps = 1000;
  double alpha = 0.05;
  std::uint64_t seed = 1;
  std::vector<int> scenarios{1, 2, 3, 4, 5};
  Sidedness sidedness = Sidedness::Greater;
  std::optional<double> rho_z;  // plug-in correlation of the two z statistics
  PValueMode pvalue_mode = PValueMode::Formula;

  void validate() const {
    if (reps < 1) throw Error(Errc::Usage, "power study: reps must be at least 1");
    if (!(alpha > 0.0 && alpha < 1.0)) throw Error(Errc::Usage, "power study: alpha must lie in (0, 1)");
    if (!bartlett_sample_ok(n, 2)) throw Error(Errc::InsufficientSamples, "power study: n too small for k = 2");
    if (grid.empty()) throw Error(Errc::Usage, "power study: empty grid");
    for (int s : scenarios)
      if (s < 1 || s > 5) throw Error(Errc::Usage, "power study: scenarios are numbered 1 to 5");
    for (const auto& g : grid) build_sigma({g.r, g.b, rho1, rho2});
    if (rho_z && std::abs(*rho_z) > 1.0) throw Error(Errc::OutOfDomain, "power study: |rho_z| > 1");
  }
};

struct PowerCell {
  GridPoint point;
  int scenario = 0;
  std::size_t count = 0;
  std::size_t reps = 0;
  double power = 0.0;
  double mc_se = 0.0;
  double rho_z = 0.0;  // correlation of the z statistics used for scenarios 3 and 4
};

struct PowerResult {
  std::vector<PowerCell> cells;  // grid order, then scenario order

  const PowerCell& at(std::size_t grid_index, int scenario) const {
    for (const auto& c : cells)
      if (c.scenario == scenario && grid_index-- == 0) return c;
    throw Error(Errc::Usage, "power result: no such cell");
  }
};

namespace detail {

struct ReplicateStats {
  double z1 = 0.0, z2 = 0.0;
  double bartlett_p = 1.0;
};

inline ReplicateStats replicate_stats(const Matrix& x, std::size_t n) {
  const Matrix c = corr_matrix(x);
  ReplicateStats s;
  s.z1 = fisher_z(c(0, 2), n);
  s.z2 = fisher_z(c(1, 3), n);
  const CanonicalSolution sol = canonical_corr(PairCorrelationStructure::from_joint(c));
  s.bartlett_p = bartlett_chi2(sol.roots, n, 2).p;
  return s;
}

}  // namespace detail

/// Scenarios: 1 and 2 test the single-attribute correlations with Fisher z,
/// 3 and 4 the max and min of the two z statistics, 5 the canonical
/// correlation with Bartlett's statistic. All scenarios share each
/// replicate's draws; replicate draws come from a substream keyed on
/// (seed, grid index, replicate index).
inline PowerResult power_study(const PowerStudySpec& spec, std::size_t threads = thread_count()) {
  spec.validate();
  const ExtremeTail tail(spec.pvalue_mode, ExtremeTailSampler::kDefaultDraws, spec.seed);
  PowerResult res;
  std::vector<detail::ReplicateStats> stats(spec.reps);
  for (std::size_t gi = 0; gi < spec.grid.size(); ++gi) {
    const GridPoint g = spec.grid[gi];
    const Matrix sigma = build_sigma({g.r, g.b, spec.rho1, spec.rho2});
    parallel_for(
        spec.reps,
        [&](std::size_t rep) {
          Engine eng = substream(spec.seed, {static_cast<std::uint64_t>(gi), static_cast<std::uint64_t>(rep)});
          stats[rep] = detail::replicate_stats(sample_mvn(sigma, spec.n, eng), spec.n);
        },
        threads);

    double rho_z = 0.0;
    if (spec.rho_z) {
      rho_z = *spec.rho_z;
    } else if (spec.reps >= 3) {
      Vector a(spec.reps), b(spec.reps);
      for (std::size_t r = 0; r < spec.reps; ++r) {
        a[r] = stats[r].z1;
        b[r] = stats[r].z2;
      }
      try {
        rho_z = pearson_corr(a, b);
      } catch (const Error&) {
        rho_z = 0.0;
      }
    }

    const ExtremeTail::AtRho tail_at = tail.at(rho_z);
    for (int sc : spec.scenarios) {
      PowerCell cell{g, sc, 0, spec.reps, 0.0, 0.0, rho_z};
      for (const auto& s : stats) {
        double p = 1.0;
        switch (sc) {
          case 1: p = z_pvalue(s.z1, spec.sidedness); break;
          case 2: p = z_pvalue(s.z2, spec.sidedness); break;
          case 3: p = tail_at.pvalue(std::max(s.z1, s.z2), Extreme::Max, spec.sidedness); break;
          case 4: p = tail_at.pvalue(std::min(s.z1, s.z2), Extreme::Min, spec.sidedness); break;
          default: p = s.bartlett_p; break;
        }
        cell.count += p <= spec.alpha;
      }
      cell.power = static_cast<double>(cell.count) / static_cast<double>(spec.reps);
      cell.mc_se = std::sqrt(cell.power * (1.0 - cell.power) / static_cast<double>(spec.reps));
      res.cells.push_back(cell);
    }
  }
  return res;
}

/// Power of the one-sided Fisher z test from the normal approximation
/// z ~ N(sqrt(n - 3) atanh(rho), 1).
inline double fisher_power_approx(double rho, std::size_t n, double alpha) {
  const double crit = boost::math::quantile(boost::math::complement(boost::math::normal_distribution<double>(), alpha));
  return normal_cdf(std::sqrt(static_cast<double>(n) - 3.0) * std::atanh(rho) - crit);
}

struct CalibrationRow {
  double rho_z = 0.0;
  double c = 0.0;
  double formula = 0.0;          // W-formula with the normal CDF correction
  double formula_density = 0.0;  // W-formula with the density in the correction
  double monte_carlo = 0.0;
  double mc_se = 0.0;
  std::optional<double> independence;  // 1 - Phi(c)^2 when rho_z = 0
};

/// Max-mode tail approximations against Monte Carlo on a (rho_z, c) grid.
inline std::vector<CalibrationRow> wformula_calibration(const ExtremeTailSampler& sampler,
                                                        const std::vector<double>& rhos = {0.0, 0.3, 0.6},
                                                        const std::vector<double>& cs = {1.5, 2.0, 2.5}) {
  std::vector<CalibrationRow> rows;
  for (double rho : rhos)
    for (double c : cs) {
      CalibrationRow r;
      r.rho_z = rho;
      r.c = c;
      r.formula = w_formula_tail(c, rho, Extreme::Max, WFormulaVariant::Cdf);
      r.formula_density = w_formula_tail(c, rho, Extreme::Max, WFormulaVariant::PrintedDensity);
      r.monte_carlo = sampler.tail(c, rho, Extreme::Max);
      r.mc_se = sampler.standard_error(r.monte_carlo);
      if (rho == 0.0) {
        const double phi = normal_cdf(c);
        r.independence = 1.0 - phi * phi;
      }
      rows.push_back(r);
    }
  return rows;
}

}  // namespace macnet
