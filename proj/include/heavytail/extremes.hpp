#ifndef HEAVYTAIL_EXTREMES_HPP
#define HEAVYTAIL_EXTREMES_HPP

// Extreme-value data preparation: block maxima, threshold exceedances, the
// Hill estimator, the empirical mean excess function and Hill-plot based
// threshold selection.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <functional>
#include <numeric>
#include <span>
#include <stdexcept>
#include <vector>

#include "heavytail/numerics.hpp"
#include "heavytail/sample.hpp"

namespace heavytail {

enum class BlockAssignment { contiguous, random };

struct BlockSpec {
  std::size_t block_count = 10;
  BlockAssignment assignment = BlockAssignment::contiguous;
  std::uint64_t seed = 0;  // random assignment only
};

/// Sizes of `block_count` nearly equal blocks covering n items, larger first.
inline std::vector<std::size_t> block_sizes(std::size_t n, std::size_t block_count) {
  std::vector<std::size_t> sizes(block_count, n / block_count);
  for (std::size_t i = 0; i < n % block_count; ++i) ++sizes[i];
  return sizes;
}

/// Maximum of each block.
///
/// Contiguous assignment splits the series into consecutive runs; random
/// assignment shuffles the indices with SeededRng(seed) first and then splits
/// the permuted order the same way.
inline std::vector<double> block_maxima(std::span<const double> values, const BlockSpec& spec) {
  if (spec.block_count < 2) throw std::invalid_argument("block_maxima: block_count must be >= 2");
  if (spec.block_count > values.size())
    throw std::invalid_argument("block_maxima: block_count exceeds sample size");

  std::vector<std::size_t> order(values.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  if (spec.assignment == BlockAssignment::random) {
    SeededRng rng(spec.seed);
    shuffle(order, rng);
  }

  std::vector<double> maxima;
  maxima.reserve(spec.block_count);
  std::size_t pos = 0;
  for (std::size_t size : block_sizes(values.size(), spec.block_count)) {
    double best = values[order[pos]];
    for (std::size_t i = pos + 1; i < pos + size; ++i) best = std::max(best, values[order[i]]);
    maxima.push_back(best);
    pos += size;
  }
  return maxima;
}

/// Affine standardization of a maxima sequence by its own mean and
/// population standard deviation.
inline std::vector<double> standardize_block_maxima(std::span<const double> maxima) {
  if (maxima.size() < 2) throw std::invalid_argument("standardize_block_maxima: need at least 2 maxima");
  const double n = static_cast<double>(maxima.size());
  const double mean = std::accumulate(maxima.begin(), maxima.end(), 0.0) / n;
  double ss = 0.0;
  for (double m : maxima) ss += (m - mean) * (m - mean);
  const double sd = std::sqrt(ss / n);
  if (!(sd > 0.0)) throw std::invalid_argument("standardize_block_maxima: maxima are all equal");
  std::vector<double> out;
  out.reserve(maxima.size());
  for (double m : maxima) out.push_back((m - mean) / sd);
  return out;
}

struct ExceedanceSet {
  double threshold = 0.0;
  std::vector<double> exceedances;  // x - threshold for x > threshold, original order
  std::size_t n_total = 0;

  std::size_t n_exceed() const noexcept { return exceedances.size(); }
};

inline ExceedanceSet exceedances(std::span<const double> values, double threshold) {
  if (!(threshold > 0.0) || !std::isfinite(threshold))
    throw std::invalid_argument("exceedances: threshold must be finite and > 0");
  ExceedanceSet set{threshold, {}, values.size()};
  for (double x : values)
    if (x > threshold) set.exceedances.push_back(x - threshold);
  if (set.exceedances.empty()) throw std::invalid_argument("exceedances: no observation above threshold");
  return set;
}

struct HillPoint {
  std::size_t k;
  double alpha_hat;
};

struct HillSeries {
  std::vector<HillPoint> points;
  std::vector<double> order_stats;  // descending, X_{1,n} >= X_{2,n} >= ...
};

/// Hill estimates xi(k) = (1/k) sum_{j<=k} ln(X_{j,n} / X_{k+1,n}) and
/// alpha(k) = 1 / xi(k) for k = 1 .. n-1. Points with xi(k) <= 0 (ties at the
/// top of the sample) are omitted.
inline HillSeries hill_series(std::span<const double> values) {
  if (values.size() < 3) throw std::invalid_argument("hill_series: need at least 3 observations");
  require_positive(values, "hill_series");

  HillSeries series;
  series.order_stats.assign(values.begin(), values.end());
  std::stable_sort(series.order_stats.begin(), series.order_stats.end(), std::greater<>());

  const auto& x = series.order_stats;
  const double log_top = std::log(x.front());
  // Logs are taken relative to the maximum so the running sum stays small.
  double sum_rel_logs = 0.0;
  for (std::size_t k = 1; k < x.size(); ++k) {
    sum_rel_logs += std::log(x[k - 1]) - log_top;
    const double xi = sum_rel_logs / static_cast<double>(k) - (std::log(x[k]) - log_top);
    if (xi > 0.0) series.points.push_back({k, 1.0 / xi});
  }
  return series;
}

/// Mean of x - u over the observations strictly above u.
inline double empirical_mean_excess(std::span<const double> values, double u) {
  double sum = 0.0;
  std::size_t count = 0;
  for (double x : values) {
    if (x > u) {
      sum += x - u;
      ++count;
    }
  }
  if (count == 0) throw std::invalid_argument("empirical_mean_excess: no observation above u");
  return sum / static_cast<double>(count);
}

struct ThresholdConfig {
  std::size_t window = 0;       // 0 selects 10% of n, at least 5
  double relative_tolerance = 0.05;
  std::size_t min_k = 1;        // earliest Hill index a window may start at
};

struct ThresholdChoice {
  double threshold = 0.0;       // X_{k,n}
  std::size_t k = 0;
  double alpha_hat = 0.0;       // Hill estimate at k
  double window_ratio = 0.0;    // (max - min) / median over the chosen window
  bool fallback = false;        // no window met the tolerance
};

inline std::size_t default_threshold_window(std::size_t n) {
  return std::max<std::size_t>(5, n / 10);
}

/// Picks the first Hill index whose following window of alpha estimates is
/// stable, i.e. (max - min) / median <= tolerance, and returns the order
/// statistic X_{k,n} there. If no window qualifies, the window with the
/// smallest ratio is used and `fallback` is set.
inline ThresholdChoice select_threshold(const HillSeries& series, const ThresholdConfig& config = {}) {
  const std::size_t window =
      config.window > 0 ? config.window : default_threshold_window(series.order_stats.size());
  const auto& pts = series.points;
  std::size_t first = 0;
  while (first < pts.size() && pts[first].k < config.min_k) ++first;
  if (pts.size() < first + window || window == 0)
    throw std::invalid_argument("select_threshold: Hill series shorter than the stability window");

  std::vector<double> buffer(window);
  auto ratio_at = [&](std::size_t start) {
    for (std::size_t i = 0; i < window; ++i) buffer[i] = pts[start + i].alpha_hat;
    const auto [lo, hi] = std::minmax_element(buffer.begin(), buffer.end());
    const double spread = *hi - *lo;
    auto mid = buffer.begin() + static_cast<std::ptrdiff_t>(window / 2);
    std::nth_element(buffer.begin(), mid, buffer.end());
    double median = *mid;
    if (window % 2 == 0) median = 0.5 * (median + *std::max_element(buffer.begin(), mid));
    return spread / median;
  };

  std::size_t best = first;
  double best_ratio = std::numeric_limits<double>::infinity();
  bool found = false;
  for (std::size_t start = first; start + window <= pts.size(); ++start) {
    const double r = ratio_at(start);
    if (r <= config.relative_tolerance) {
      best = start;
      best_ratio = r;
      found = true;
      break;
    }
    if (r < best_ratio) {
      best_ratio = r;
      best = start;
    }
  }
  const std::size_t k = pts[best].k;
  return {series.order_stats[k - 1], k, pts[best].alpha_hat, best_ratio, !found};
}

}  // namespace heavytail

#endif  // HEAVYTAIL_EXTREMES_HPP
