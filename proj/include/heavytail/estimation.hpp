#ifndef HEAVYTAIL_ESTIMATION_HPP
#define HEAVYTAIL_ESTIMATION_HPP

// Maximum-likelihood fitting of the three families, the block-maxima and
// peaks-over-threshold pipelines, and residual transforms onto the
// unit-exponential scale.

#include <algorithm>
#include <array>
#include <cmath>
#include <limits>
#include <numeric>
#include <optional>
#include <span>
#include <stdexcept>
#include <string_view>
#include <vector>

#include "heavytail/distributions.hpp"
#include "heavytail/extremes.hpp"
#include "heavytail/numerics.hpp"
#include "heavytail/sample.hpp"

namespace heavytail {

enum class FitMethod { direct, block_maxima, pot };

inline std::string_view to_string(FitMethod method) {
  switch (method) {
    case FitMethod::direct: return "direct";
    case FitMethod::block_maxima: return "block-maxima";
    case FitMethod::pot: return "pot";
  }
  return "unknown";
}

struct FitResult {
  DistributionModel model;
  double log_likelihood = -std::numeric_limits<double>::infinity();
  FitMethod method = FitMethod::direct;
  std::optional<double> threshold{};  // pot only
  std::size_t n_used = 0;           // observations the likelihood was evaluated on
  std::size_t n_total = 0;          // size of the sample the pipeline started from
  bool converged = false;
};

namespace detail {

inline double mean_of(std::span<const double> v) {
  return std::accumulate(v.begin(), v.end(), 0.0) / static_cast<double>(v.size());
}

inline double sample_sd(std::span<const double> v) {
  const double m = mean_of(v);
  double ss = 0.0;
  for (double x : v) ss += (x - m) * (x - m);
  return std::sqrt(ss / static_cast<double>(v.size() - 1));
}

}  // namespace detail

/// Closed-form lognormal MLE: mean and (divisor n) variance of ln x.
inline FitResult fit_lognormal(std::span<const double> values) {
  require_positive(values, "fit_lognormal");
  const double n = static_cast<double>(values.size());
  double sum = 0.0;
  for (double x : values) sum += std::log(x);
  const double mu = sum / n;
  double ss = 0.0;
  for (double x : values) {
    const double d = std::log(x) - mu;
    ss += d * d;
  }
  const double sigma = std::sqrt(ss / n);
  if (!(sigma > 0.0)) throw std::invalid_argument("fit_lognormal: zero variance in log data");
  DistributionModel model{LognormalParams{mu, sigma}};
  return {model, log_likelihood(model, values), FitMethod::direct, std::nullopt,
          values.size(), values.size(), true};
}

/// Moment-based GEV starting point: Gumbel scale and location from the mean
/// and standard deviation, shape 0.1 halved toward 0 until every observation
/// is inside the support.
inline GevParams gev_initial_guess(std::span<const double> values) {
  const double sd = detail::sample_sd(values);
  if (!(sd > 0.0)) throw std::invalid_argument("fit_gev: sample has zero variance");
  GevParams start{0.1, 0.0, sd * std::sqrt(6.0) / std::numbers::pi};
  start.location = detail::mean_of(values) - std::numbers::egamma * start.scale;
  auto inside = [&](const GevParams& p) {
    return log_likelihood(DistributionModel{p}, values) > -std::numeric_limits<double>::infinity();
  };
  while (!inside(start)) {
    start.shape *= 0.5;
    if (std::abs(start.shape) < 1e-3) {
      start.shape = 0.0;
      break;
    }
  }
  return start;
}

/// Three-parameter GEV maximum likelihood by Nelder-Mead.
///
/// The search runs in coordinates standardized by the starting point,
/// (shape, (location - loc0) / scale0, ln(scale / scale0)), which makes the
/// fit equivariant under affine changes of the data. The simplex is restarted
/// from its best vertex until a restart no longer improves the optimum.
inline FitResult fit_gev(std::span<const double> values) {
  if (values.size() < 5) throw std::invalid_argument("fit_gev: need at least 5 observations");
  for (double x : values)
    if (!std::isfinite(x)) throw std::invalid_argument("fit_gev: non-finite observation");

  const GevParams start = gev_initial_guess(values);
  auto to_params = [&](std::span<const double> c) {
    return GevParams{c[0], start.location + c[1] * start.scale, start.scale * std::exp(c[2])};
  };
  const Objective negative_ll = [&](std::span<const double> c) {
    const GevParams p = to_params(c);
    if (!std::isfinite(p.scale) || !(p.scale > 0.0) || !std::isfinite(c[0]))
      return std::numeric_limits<double>::infinity();
    return -log_likelihood(DistributionModel{p}, values);
  };

  NelderMeadOptions options;
  options.tolerance = 1e-9;
  options.max_iter = 4000;
  std::vector<double> coords{start.shape, 0.0, 0.0};
  OptimizerResult best = nelder_mead(negative_ll, coords, options);
  for (int restart = 0; restart < 5; ++restart) {
    options.absolute_step = 0.02;
    OptimizerResult next = nelder_mead(negative_ll, best.argmin, options);
    const bool improved = next.objective_value < best.objective_value - 1e-10;
    const bool was_converged = best.converged;
    if (next.objective_value <= best.objective_value) best = std::move(next);
    if (!improved && was_converged) break;
  }

  DistributionModel model{to_params(best.argmin)};
  return {model, log_likelihood(model, values), FitMethod::direct, std::nullopt,
          values.size(), values.size(), best.converged && std::isfinite(best.objective_value)};
}

/// GPD profile log-likelihood in the parameterization 1 - tau * y:
/// for fixed tau, shape = mean ln(1 - tau y) and scale = -shape / tau.
struct GpdProfilePoint {
  double tau = 0.0;
  double shape = 0.0;
  double scale = 0.0;
  double log_likelihood = -std::numeric_limits<double>::infinity();
};

inline GpdProfilePoint gpd_profile(std::span<const double> excess, double tau) {
  const double n = static_cast<double>(excess.size());
  const double y_max = *std::max_element(excess.begin(), excess.end());
  GpdProfilePoint point;
  point.tau = tau;
  if (std::abs(tau) * y_max < 1e-12) {
    // Exponential limit.
    point.shape = 0.0;
    point.scale = detail::mean_of(excess);
    point.log_likelihood = -n * std::log(point.scale) - n;
    return point;
  }
  double s = 0.0;
  for (double y : excess) {
    const double arg = -tau * y;
    if (!(arg > -1.0)) return point;
    s += std::log1p(arg);
  }
  point.shape = s / n;
  point.scale = -point.shape / tau;
  if (!(point.scale > 0.0) || !std::isfinite(point.scale)) return point;
  point.log_likelihood = -n * std::log(point.scale) - n - s;
  return point;
}

/// GPD maximum likelihood from raw exceedances via the profile over tau.
///
/// tau ranges over (-10 / mean(y), (1 - 1e-9) / max(y)). A 512-point grid,
/// log-spaced toward 0 on both sides and toward the upper bound, brackets the
/// maximum before golden-section refinement. A maximizer at tau ~ 0 yields
/// the exponential fit (shape 0, scale = mean(y)).
inline FitResult fit_gpd(std::span<const double> excess) {
  if (excess.size() < 5) throw std::invalid_argument("fit_gpd: need at least 5 exceedances");
  require_positive(excess, "fit_gpd");
  const double y_mean = detail::mean_of(excess);
  const double y_max = *std::max_element(excess.begin(), excess.end());
  const double lower = -10.0 / y_mean;
  const double upper = (1.0 - 1e-9) / y_max;

  std::vector<double> grid;
  grid.reserve(512);
  constexpr int kSide = 170;
  for (int i = 0; i < kSide; ++i) grid.push_back(lower * std::pow(10.0, -6.0 * i / (kSide - 1)));
  grid.push_back(0.0);
  for (int i = 0; i < kSide; ++i) grid.push_back(upper * std::pow(10.0, -6.0 + 5.7 * i / (kSide - 1)));
  for (int i = 0; i < kSide + 1; ++i) grid.push_back(upper * (1.0 - std::pow(10.0, -0.3 - 8.7 * i / kSide)));
  std::sort(grid.begin(), grid.end());
  grid.erase(std::unique(grid.begin(), grid.end()), grid.end());

  std::size_t arg = 0;
  GpdProfilePoint best = gpd_profile(excess, grid[0]);
  for (std::size_t i = 1; i < grid.size(); ++i) {
    GpdProfilePoint p = gpd_profile(excess, grid[i]);
    if (p.log_likelihood > best.log_likelihood) {
      best = p;
      arg = i;
    }
  }
  const double lo = arg == 0 ? lower : grid[arg - 1];
  const double hi = arg + 1 == grid.size() ? upper : grid[arg + 1];
  if (lo < hi) {
    const double tau = golden_section_max(
        [&](double t) { return gpd_profile(excess, t).log_likelihood; }, lo, hi, (hi - lo) * 1e-12);
    GpdProfilePoint refined = gpd_profile(excess, tau);
    if (refined.log_likelihood >= best.log_likelihood) best = refined;
  }

  const bool interior = arg != 0 && arg + 1 != grid.size() && std::isfinite(best.log_likelihood);
  DistributionModel model{GpdParams{best.shape, best.scale}};
  return {model, log_likelihood(model, excess), FitMethod::direct, std::nullopt,
          excess.size(), excess.size(), interior};
}

inline FitResult fit_gpd(const ExceedanceSet& set) {
  FitResult fit = fit_gpd(std::span<const double>(set.exceedances));
  fit.method = FitMethod::pot;
  fit.threshold = set.threshold;
  fit.n_total = set.n_total;
  return fit;
}

/// Block maxima followed by a GEV fit of the maxima.
inline FitResult fit_block_maxima(std::span<const double> values, const BlockSpec& spec) {
  FitResult fit = fit_gev(block_maxima(values, spec));
  fit.method = FitMethod::block_maxima;
  fit.n_total = values.size();
  return fit;
}

/// Automatic threshold: Hill-plot stability over windows starting at k >= 6,
/// so at least five observations exceed the chosen order statistic.
inline ThresholdChoice auto_threshold(std::span<const double> values, ThresholdConfig config = {}) {
  config.min_k = std::max<std::size_t>(config.min_k, 6);
  return select_threshold(hill_series(values), config);
}

/// Exceedances over a fixed or automatically chosen threshold, then a GPD fit.
inline FitResult fit_pot(std::span<const double> values, std::optional<double> threshold,
                         const ThresholdConfig& config = {}) {
  const double u = threshold ? *threshold : auto_threshold(values, config).threshold;
  return fit_gpd(exceedances(values, u));
}

/// The data the fit's likelihood is evaluated on: block maxima, exceedances
/// or the sample itself.
inline std::vector<double> fitted_data(const FitResult& fit, std::span<const double> values,
                                       const BlockSpec& spec = {}) {
  switch (fit.method) {
    case FitMethod::block_maxima: return block_maxima(values, spec);
    case FitMethod::pot: return exceedances(values, fit.threshold.value()).exceedances;
    case FitMethod::direct: break;
  }
  return {values.begin(), values.end()};
}

/// Unit-exponential residuals of `data` under the fitted model: -ln F for the
/// GEV, -ln(1 - F) for the GPD (data are exceedances) and the lognormal.
/// Throws std::invalid_argument if a point lies outside the support.
inline std::vector<double> residuals(const DistributionModel& model, std::span<const double> data) {
  std::vector<double> out;
  out.reserve(data.size());
  for (double x : data) {
    if (log_pdf(model, x) == -std::numeric_limits<double>::infinity())
      throw std::invalid_argument("residuals: observation outside the model support");
    double r = 0.0;
    switch (model.family()) {
      case Family::gev: r = detail::gev_neg_log_cdf(model.as<GevParams>(), x); break;
      case Family::gpd: r = detail::gpd_neg_log_sf(model.as<GpdParams>(), x); break;
      case Family::lognormal: r = -std::log(sf(model, x)); break;
    }
    out.push_back(r);
  }
  return out;
}

inline std::vector<double> residuals(const FitResult& fit, std::span<const double> data) {
  return residuals(fit.model, data);
}

/// Refits the family of `model` to `data` by its direct estimator.
inline FitResult refit(Family family, std::span<const double> data) {
  switch (family) {
    case Family::lognormal: return fit_lognormal(data);
    case Family::gev: return fit_gev(data);
    case Family::gpd: return fit_gpd(data);
  }
  throw std::logic_error("refit: unknown family");
}

}  // namespace heavytail

#endif  // HEAVYTAIL_ESTIMATION_HPP
