#ifndef HEAVYTAIL_DIAGNOSTICS_HPP
#define HEAVYTAIL_DIAGNOSTICS_HPP

// Plot-data builders for the tail diagnostics: histogram, exponential QQ,
// Zipf, mean excess, Hill, residual QQ, excess CDF, POT tail and density
// comparison. Series are data only; rendering is left to the caller.

#include <algorithm>
#include <charconv>
#include <cmath>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "heavytail/distributions.hpp"
#include "heavytail/estimation.hpp"
#include "heavytail/extremes.hpp"
#include "heavytail/gof.hpp"

namespace heavytail {

struct PlotPoint {
  double x = 0.0;
  double y = 0.0;
  bool operator==(const PlotPoint&) const = default;
};

/// A named point sequence. `fitted`, when non-empty, is a model curve aligned
/// with `points` (same abscissae).
struct PlotSeries {
  std::string name;
  std::vector<PlotPoint> points;
  std::vector<double> fitted;
  std::vector<std::pair<std::string, std::string>> meta;  // insertion order

  void set_meta(std::string key, std::string value) {
    for (auto& [k, v] : meta) {
      if (k == key) {
        v = std::move(value);
        return;
      }
    }
    meta.emplace_back(std::move(key), std::move(value));
  }
  void set_meta(std::string key, double value);
  std::optional<double> meta_number(std::string_view key) const;
};

/// Shortest decimal text that round-trips to the same double.
inline std::string format_number(double value) {
  char buffer[64];
  const auto result = std::to_chars(buffer, buffer + sizeof buffer, value);
  return std::string(buffer, result.ptr);
}

inline void PlotSeries::set_meta(std::string key, double value) {
  set_meta(std::move(key), format_number(value));
}

inline std::optional<double> PlotSeries::meta_number(std::string_view key) const {
  for (const auto& [k, v] : meta) {
    if (k == key) {
      double out = 0.0;
      const auto res = std::from_chars(v.data(), v.data() + v.size(), out);
      if (res.ec == std::errc()) return out;
      return std::nullopt;
    }
  }
  return std::nullopt;
}

struct LineFit {
  double slope = 0.0;
  double intercept = 0.0;
  double r_squared = 0.0;
};

/// Ordinary least squares of y on x.
inline LineFit least_squares(std::span<const PlotPoint> points) {
  const double n = static_cast<double>(points.size());
  double mx = 0.0, my = 0.0;
  for (const auto& p : points) {
    mx += p.x;
    my += p.y;
  }
  mx /= n;
  my /= n;
  double sxx = 0.0, sxy = 0.0, syy = 0.0;
  for (const auto& p : points) {
    sxx += (p.x - mx) * (p.x - mx);
    sxy += (p.x - mx) * (p.y - my);
    syy += (p.y - my) * (p.y - my);
  }
  LineFit fit;
  fit.slope = sxx > 0.0 ? sxy / sxx : 0.0;
  fit.intercept = my - fit.slope * mx;
  fit.r_squared = sxx > 0.0 && syy > 0.0 ? sxy * sxy / (sxx * syy) : 1.0;
  return fit;
}

namespace detail {

inline std::vector<double> sorted_copy(std::span<const double> values) {
  std::vector<double> v(values.begin(), values.end());
  std::sort(v.begin(), v.end());
  return v;
}

inline double quantile_sorted(const std::vector<double>& v, double p) {
  const double pos = p * static_cast<double>(v.size() - 1);
  const auto lo = static_cast<std::size_t>(std::floor(pos));
  const std::size_t hi = std::min(lo + 1, v.size() - 1);
  return v[lo] + (pos - static_cast<double>(lo)) * (v[hi] - v[lo]);
}

struct Binning {
  double start = 0.0;
  double width = 1.0;
  std::size_t bins = 1;
  std::vector<double> counts;
};

inline Binning bin_values(const std::vector<double>& sorted, std::optional<std::size_t> bins) {
  const double lo = sorted.front(), hi = sorted.back();
  const double n = static_cast<double>(sorted.size());
  std::size_t b = 1;
  if (bins) {
    b = std::max<std::size_t>(1, *bins);
  } else if (hi > lo) {
    // Freedman-Diaconis, falling back to sqrt(n) bins when the IQR is zero.
    const double iqr = quantile_sorted(sorted, 0.75) - quantile_sorted(sorted, 0.25);
    b = iqr > 0.0 ? static_cast<std::size_t>(std::ceil((hi - lo) / (2.0 * iqr * std::cbrt(1.0 / n))))
                  : static_cast<std::size_t>(std::ceil(std::sqrt(n)));
    b = std::clamp<std::size_t>(b, 1, sorted.size());
  }
  Binning out;
  out.start = lo;
  out.bins = b;
  out.width = hi > lo ? (hi - lo) / static_cast<double>(b) : 1.0;
  if (!(hi > lo)) out.start = lo - 0.5;
  out.counts.assign(b, 0.0);
  for (double x : sorted) {
    auto idx = static_cast<std::size_t>(std::floor((x - out.start) / out.width));
    out.counts[std::min(idx, b - 1)] += 1.0;
  }
  return out;
}

// Points of an exponential QQ plot: theoretical quantile -ln(1 - i/(n+1)) on
// x, ascending order statistic on y.
inline PlotSeries exp_qq_points(std::vector<double> sorted, std::string name) {
  PlotSeries s;
  s.name = std::move(name);
  const double n = static_cast<double>(sorted.size());
  for (std::size_t i = 0; i < sorted.size(); ++i)
    s.points.push_back({-std::log1p(-(static_cast<double>(i) + 1.0) / (n + 1.0)), sorted[i]});
  const LineFit line = least_squares(s.points);
  s.set_meta("orientation", "x=exponential quantile,y=order statistic");
  s.set_meta("plotting_position", "i/(n+1)");
  s.set_meta("slope", line.slope);
  s.set_meta("intercept", line.intercept);
  s.set_meta("r_squared", line.r_squared);
  // Mean residual above the reference line over the top decile; positive for
  // tails heavier than exponential (convex in this orientation).
  const std::size_t top = std::max<std::size_t>(1, sorted.size() / 10);
  double resid = 0.0;
  for (std::size_t i = sorted.size() - top; i < sorted.size(); ++i)
    resid += s.points[i].y - (line.intercept + line.slope * s.points[i].x);
  s.set_meta("upper_decile_residual", resid / static_cast<double>(top));
  return s;
}

}  // namespace detail

/// Histogram bin midpoints against counts. Meta carries the shape summary
/// (mean, median, skewness) used to judge right skew.
inline PlotSeries histogram_series(std::span<const double> values, std::optional<std::size_t> bins = {}) {
  if (values.size() < 2) throw std::invalid_argument("histogram_series: need at least 2 observations");
  const auto sorted = detail::sorted_copy(values);
  const auto binning = detail::bin_values(sorted, bins);

  PlotSeries s;
  s.name = "hist";
  for (std::size_t b = 0; b < binning.bins; ++b)
    s.points.push_back({binning.start + (static_cast<double>(b) + 0.5) * binning.width, binning.counts[b]});

  const double n = static_cast<double>(sorted.size());
  const double mean = detail::mean_of(sorted);
  double m2 = 0.0, m3 = 0.0;
  for (double x : sorted) {
    m2 += (x - mean) * (x - mean);
    m3 += (x - mean) * (x - mean) * (x - mean);
  }
  m2 /= n;
  m3 /= n;
  s.set_meta("bin_width", binning.width);
  s.set_meta("mean", mean);
  s.set_meta("median", detail::quantile_sorted(sorted, 0.5));
  s.set_meta("skewness", m2 > 0.0 ? m3 / std::pow(m2, 1.5) : 0.0);
  return s;
}

inline PlotSeries exp_qq_series(std::span<const double> values) {
  if (values.size() < 2) throw std::invalid_argument("exp_qq_series: need at least 2 observations");
  return detail::exp_qq_points(detail::sorted_copy(values), "exp_qq");
}

/// Log-log empirical survival: (ln x, ln(#{X >= x} / n)) over distinct values.
/// Meta slope estimates -alpha for Pareto-type tails.
inline PlotSeries zipf_series(std::span<const double> values) {
  if (values.size() < 2) throw std::invalid_argument("zipf_series: need at least 2 observations");
  require_positive(values, "zipf_series");
  const auto sorted = detail::sorted_copy(values);
  const double n = static_cast<double>(sorted.size());
  PlotSeries s;
  s.name = "zipf";
  for (std::size_t i = 0; i < sorted.size(); ++i) {
    if (i > 0 && sorted[i] == sorted[i - 1]) continue;
    const double at_least = n - static_cast<double>(i);
    s.points.push_back({std::log(sorted[i]), std::log(at_least / n)});
  }
  const LineFit line = least_squares(s.points);
  s.set_meta("slope", line.slope);
  s.set_meta("intercept", line.intercept);
  s.set_meta("r_squared", line.r_squared);
  return s;
}

/// Empirical mean excess at each distinct order statistic below the two
/// largest observations. With a GPD fit, meta also carries the reference
/// slope shape / (1 - shape).
inline PlotSeries mean_excess_series(std::span<const double> values, const FitResult* gpd_fit = nullptr) {
  if (values.size() < 3) throw std::invalid_argument("mean_excess_series: need at least 3 observations");
  const auto sorted = detail::sorted_copy(values);
  PlotSeries s;
  s.name = "mean_excess";
  // Suffix sums give every mean excess in one pass.
  std::vector<double> suffix(sorted.size() + 1, 0.0);
  for (std::size_t i = sorted.size(); i-- > 0;) suffix[i] = suffix[i + 1] + sorted[i];
  const double top_exclusive = sorted[sorted.size() - 2];
  for (std::size_t i = 0; i + 2 < sorted.size(); ++i) {
    const double u = sorted[i];
    if (i + 1 < sorted.size() && sorted[i + 1] == u) continue;  // use the last of a tie run
    if (!(u < top_exclusive)) break;
    const double count = static_cast<double>(sorted.size() - i - 1);
    s.points.push_back({u, (suffix[i + 1] - count * u) / count});
  }
  if (s.points.empty()) throw std::invalid_argument("mean_excess_series: no distinct thresholds");
  const LineFit line = least_squares(s.points);
  s.set_meta("slope", line.slope);
  s.set_meta("intercept", line.intercept);
  if (gpd_fit && gpd_fit->model.family() == Family::gpd) {
    const auto& p = gpd_fit->model.as<GpdParams>();
    if (p.shape < 1.0) s.set_meta("gpd_reference_slope", p.shape / (1.0 - p.shape));
  }
  return s;
}

inline PlotSeries hill_plot_series(const HillSeries& hill, std::optional<double> threshold = {}) {
  if (hill.points.empty()) throw std::invalid_argument("hill_plot_series: empty Hill series");
  PlotSeries s;
  s.name = "hill";
  for (const auto& p : hill.points) s.points.push_back({static_cast<double>(p.k), p.alpha_hat});
  if (threshold) s.set_meta("threshold", *threshold);
  return s;
}

/// Exponential QQ plot of the fit's unit-exponential residuals.
inline PlotSeries residual_qq_series(const FitResult& fit, std::span<const double> data) {
  auto r = residuals(fit, data);
  if (r.size() < 2) throw std::invalid_argument("residual_qq_series: need at least 2 residuals");
  std::sort(r.begin(), r.end());
  return detail::exp_qq_points(std::move(r), "residual_qq");
}

/// Empirical CDF of the exceedances (i/n at each order statistic) with the
/// fitted GPD CDF at the same abscissae. Meta `max_gap` is the KS distance.
inline PlotSeries excess_cdf_series(const ExceedanceSet& excess, const FitResult& fit) {
  if (fit.model.family() != Family::gpd) throw std::invalid_argument("excess_cdf_series: fit is not a GPD");
  const auto sorted = detail::sorted_copy(excess.exceedances);
  PlotSeries s;
  s.name = "excess_cdf";
  const double n = static_cast<double>(sorted.size());
  for (std::size_t i = 0; i < sorted.size(); ++i) {
    s.points.push_back({sorted[i], (static_cast<double>(i) + 1.0) / n});
    s.fitted.push_back(cdf(fit.model, sorted[i]));
  }
  s.set_meta("threshold", excess.threshold);
  s.set_meta("max_gap", ks_statistic(sorted, fit.model));
  return s;
}

/// Fitted POT tail probability P(X > x) = (n_exceed / n_total) (1 - G(x - u)).
inline double pot_tail_probability(const FitResult& fit, double x) {
  if (!fit.threshold || fit.n_total == 0 || fit.model.family() != Family::gpd)
    throw std::invalid_argument("pot_tail_probability: fit lacks threshold metadata");
  const double rate = static_cast<double>(fit.n_used) / static_cast<double>(fit.n_total);
  return rate * sf(fit.model, x - *fit.threshold);
}

/// Empirical survival #{X >= x} / n of the observations above the threshold
/// overlaid with the fitted POT tail.
inline PlotSeries tail_series(std::span<const double> values, const FitResult& fit) {
  if (!fit.threshold || fit.n_total == 0 || fit.model.family() != Family::gpd)
    throw std::invalid_argument("tail_series: fit lacks threshold metadata");
  const auto sorted = detail::sorted_copy(values);
  const double n = static_cast<double>(sorted.size());
  PlotSeries s;
  s.name = "tail";
  for (std::size_t i = 0; i < sorted.size(); ++i) {
    if (!(sorted[i] > *fit.threshold)) continue;
    if (i > 0 && sorted[i] == sorted[i - 1]) continue;
    s.points.push_back({sorted[i], (n - static_cast<double>(i)) / n});
    s.fitted.push_back(pot_tail_probability(fit, sorted[i]));
  }
  if (s.points.empty()) throw std::invalid_argument("tail_series: no observation above the threshold");
  s.set_meta("threshold", *fit.threshold);
  s.set_meta("exceedance_rate", static_cast<double>(fit.n_used) / static_cast<double>(fit.n_total));
  return s;
}

/// Area-normalized histogram against the fitted density at bin midpoints.
inline PlotSeries density_compare_series(std::span<const double> values, const FitResult& fit,
                                         std::optional<std::size_t> bins = {}) {
  if (values.size() < 10) throw std::invalid_argument("density_compare_series: need at least 10 observations");
  const auto sorted = detail::sorted_copy(values);
  const auto binning = detail::bin_values(sorted, bins);
  const double n = static_cast<double>(sorted.size());
  PlotSeries s;
  s.name = "density_compare";
  for (std::size_t b = 0; b < binning.bins; ++b) {
    const double mid = binning.start + (static_cast<double>(b) + 0.5) * binning.width;
    s.points.push_back({mid, binning.counts[b] / (n * binning.width)});
    s.fitted.push_back(pdf(fit.model, mid));
  }
  s.set_meta("bin_width", binning.width);
  return s;
}

}  // namespace heavytail

#endif  // HEAVYTAIL_DIAGNOSTICS_HPP
