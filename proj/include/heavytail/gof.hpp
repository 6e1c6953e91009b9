#ifndef HEAVYTAIL_GOF_HPP
#define HEAVYTAIL_GOF_HPP

// Kolmogorov-Smirnov, chi-square and Anderson-Darling goodness-of-fit tests
// against a fitted model, with asymptotic or parametric-bootstrap p-values.

#include <algorithm>
#include <array>
#include <cmath>
#include <functional>
#include <optional>
#include <span>
#include <stdexcept>
#include <string_view>
#include <vector>

#include "heavytail/distributions.hpp"
#include "heavytail/estimation.hpp"
#include "heavytail/numerics.hpp"

namespace heavytail {

enum class GofTest { ks, chi_square, ad };
enum class PMethod { asymptotic, bootstrap };

inline std::string_view to_string(GofTest test) {
  switch (test) {
    case GofTest::ks: return "KS";
    case GofTest::chi_square: return "ChiSquare";
    case GofTest::ad: return "AD";
  }
  return "unknown";
}

inline std::string_view to_string(PMethod method) {
  return method == PMethod::asymptotic ? "asymptotic" : "bootstrap";
}

struct GofResult {
  GofTest test = GofTest::ks;
  double statistic = 0.0;
  double p_value = 1.0;
  bool reject = false;
  double alpha = 0.05;
  PMethod p_method = PMethod::bootstrap;
  std::size_t bootstrap_reps = 0;  // 0 for asymptotic p-values
  std::size_t redraws = 0;         // bootstrap replicates redrawn after a failed refit

  bool operator==(const GofResult&) const = default;
};

/// Reject the null hypothesis iff p < alpha.
inline bool decision(double p_value, double alpha) {
  return p_value < alpha;
}

// ---------------------------------------------------------------------------
// Statistics
// ---------------------------------------------------------------------------

inline double ks_statistic(std::span<const double> data, const DistributionModel& model) {
  if (data.empty()) throw std::invalid_argument("ks_statistic: empty data");
  std::vector<double> sorted(data.begin(), data.end());
  std::sort(sorted.begin(), sorted.end());
  const double n = static_cast<double>(sorted.size());
  double d = 0.0;
  for (std::size_t i = 0; i < sorted.size(); ++i) {
    const double f = cdf(model, sorted[i]);
    d = std::max({d, (static_cast<double>(i) + 1.0) / n - f, f - static_cast<double>(i) / n});
  }
  return d;
}

/// Bin count used when none is requested: max(4, n/10), reduced so every
/// equiprobable bin expects at least 5 observations.
inline std::size_t auto_chi_square_bins(std::size_t n) {
  return std::min<std::size_t>(std::max<std::size_t>(4, n / 10), n / 5);
}

inline std::size_t resolve_chi_square_bins(std::size_t n, std::optional<std::size_t> bins) {
  const std::size_t b = bins ? *bins : auto_chi_square_bins(n);
  if (b < 2 || n < 5 * b)
    throw std::invalid_argument("chi_square_test: too few observations for expected count 5 per bin");
  return b;
}

/// Pearson statistic over `bins` equiprobable bins of the model.
inline double chi_square_statistic(std::span<const double> data, const DistributionModel& model,
                                   std::size_t bins) {
  std::vector<double> observed(bins, 0.0);
  for (double x : data) {
    const double u = cdf(model, x);
    const auto b = static_cast<std::size_t>(std::clamp(u * static_cast<double>(bins), 0.0,
                                                       static_cast<double>(bins - 1)));
    observed[b] += 1.0;
  }
  const double expected = static_cast<double>(data.size()) / static_cast<double>(bins);
  double stat = 0.0;
  for (double o : observed) stat += (o - expected) * (o - expected) / expected;
  return stat;
}

/// Anderson-Darling A^2 with F clamped to [1e-12, 1 - 1e-12].
inline double ad_statistic(std::span<const double> data, const DistributionModel& model) {
  if (data.empty()) throw std::invalid_argument("ad_statistic: empty data");
  std::vector<double> sorted(data.begin(), data.end());
  std::sort(sorted.begin(), sorted.end());
  const std::size_t n = sorted.size();
  std::vector<double> log_f(n), log_sf(n);
  for (std::size_t i = 0; i < n; ++i) {
    log_f[i] = std::log(std::clamp(cdf(model, sorted[i]), 1e-12, 1.0 - 1e-12));
    log_sf[i] = std::log(std::clamp(sf(model, sorted[i]), 1e-12, 1.0 - 1e-12));
  }
  double sum = 0.0;
  for (std::size_t i = 0; i < n; ++i) sum += (2.0 * static_cast<double>(i) + 1.0) * (log_f[i] + log_sf[n - 1 - i]);
  return -static_cast<double>(n) - sum / static_cast<double>(n);
}

// ---------------------------------------------------------------------------
// Parametric bootstrap
// ---------------------------------------------------------------------------

using StatisticFn = std::function<double(std::span<const double>, const DistributionModel&)>;

struct BootstrapOutcome {
  std::vector<double> p_values;  // one per statistic
  std::size_t reps = 0;          // replicates that contributed
  std::size_t redraws = 0;       // refits that failed and were redrawn
  std::size_t dropped = 0;       // replicates abandoned after 10 redraws
};

/// Parametric bootstrap for several statistics sharing the same replicates.
///
/// Replicate r draws n points from `model` using rng.stream(r), refits the
/// same family and evaluates each statistic under the refitted model. A
/// failed refit is redrawn from rng.stream(r).stream(attempt), up to 10
/// times. p = (1 + #{stat_r >= observed}) / (reps + 1).
inline BootstrapOutcome bootstrap_pvalues(std::span<const double> observed, std::size_t n,
                                          const DistributionModel& model,
                                          std::span<const StatisticFn> statistics, std::size_t reps,
                                          const SeededRng& rng) {
  if (observed.size() != statistics.size())
    throw std::invalid_argument("bootstrap_pvalues: one observed value per statistic");
  constexpr int kMaxRedraws = 10;
  std::vector<std::size_t> exceed(statistics.size(), 0);
  BootstrapOutcome out;
  std::vector<double> replicate_stats(statistics.size());
  for (std::size_t r = 0; r < reps; ++r) {
    const SeededRng base = rng.stream(r);
    bool done = false;
    for (int attempt = 0; attempt <= kMaxRedraws && !done; ++attempt) {
      SeededRng draw_rng = attempt == 0 ? base : base.stream(static_cast<std::uint64_t>(attempt));
      try {
        const std::vector<double> draw = sample(model, n, draw_rng);
        const FitResult fit = refit(model.family(), draw);
        for (std::size_t s = 0; s < statistics.size(); ++s) {
          replicate_stats[s] = statistics[s](draw, fit.model);
          if (std::isnan(replicate_stats[s])) throw std::runtime_error("statistic is NaN");
        }
        done = true;
      } catch (const std::exception&) {
        if (attempt < kMaxRedraws) ++out.redraws;
      }
    }
    if (!done) {
      ++out.dropped;
      continue;
    }
    ++out.reps;
    for (std::size_t s = 0; s < statistics.size(); ++s)
      if (replicate_stats[s] >= observed[s]) ++exceed[s];
  }
  for (std::size_t count : exceed)
    out.p_values.push_back((1.0 + static_cast<double>(count)) / (static_cast<double>(out.reps) + 1.0));
  return out;
}

/// Single-statistic bootstrap p-value. Requires reps >= 99.
inline BootstrapOutcome bootstrap_pvalue(double observed_stat, std::span<const double> data,
                                         const DistributionModel& model, const StatisticFn& statistic,
                                         std::size_t reps, const SeededRng& rng) {
  if (reps < 99) throw std::invalid_argument("bootstrap_pvalue: reps must be >= 99");
  const std::array<double, 1> observed{observed_stat};
  const std::array<StatisticFn, 1> stats{statistic};
  return bootstrap_pvalues(observed, data.size(), model, stats, reps, rng);
}

// ---------------------------------------------------------------------------
// Tests
// ---------------------------------------------------------------------------

namespace detail {

inline void check_alpha(double alpha) {
  if (!(alpha > 0.0 && alpha < 1.0)) throw std::invalid_argument("gof: alpha must lie in (0, 1)");
}

inline GofResult make_result(GofTest test, double stat, double p, double alpha, PMethod method,
                             std::size_t reps, std::size_t redraws) {
  p = std::clamp(p, 0.0, 1.0);
  return {test, stat, p, decision(p, alpha), alpha, method, method == PMethod::bootstrap ? reps : 0, redraws};
}

}  // namespace detail

/// Two-sided KS test; asymptotic p = Q(sqrt(n) D) ignores estimation of the
/// parameters, the bootstrap p-value refits each replicate.
inline GofResult ks_test(std::span<const double> data, const DistributionModel& model, double alpha,
                         PMethod p_method = PMethod::bootstrap, std::size_t reps = 1000,
                         const SeededRng& rng = SeededRng(42)) {
  detail::check_alpha(alpha);
  const double d = ks_statistic(data, model);
  if (p_method == PMethod::asymptotic) {
    const double p = kolmogorov_sf(std::sqrt(static_cast<double>(data.size())) * d);
    return detail::make_result(GofTest::ks, d, p, alpha, p_method, 0, 0);
  }
  const auto boot = bootstrap_pvalue(d, data, model, ks_statistic, reps, rng);
  return detail::make_result(GofTest::ks, d, boot.p_values[0], alpha, p_method, boot.reps, boot.redraws);
}

/// Pearson chi-square test on equiprobable bins; asymptotic p-value with
/// bins - 1 - fitted_param_count degrees of freedom (at least 1).
inline GofResult chi_square_test(std::span<const double> data, const DistributionModel& model, double alpha,
                                 std::optional<std::size_t> bins, int fitted_param_count,
                                 PMethod p_method = PMethod::bootstrap, std::size_t reps = 1000,
                                 const SeededRng& rng = SeededRng(42)) {
  detail::check_alpha(alpha);
  const std::size_t b = resolve_chi_square_bins(data.size(), bins);
  const double stat = chi_square_statistic(data, model, b);
  if (p_method == PMethod::asymptotic) {
    const double dof = std::max(1.0, static_cast<double>(b) - 1.0 - fitted_param_count);
    return detail::make_result(GofTest::chi_square, stat, chi_square_sf(stat, dof), alpha, p_method, 0, 0);
  }
  const StatisticFn fn = [b](std::span<const double> x, const DistributionModel& m) {
    return chi_square_statistic(x, m, b);
  };
  const auto boot = bootstrap_pvalue(stat, data, model, fn, reps, rng);
  return detail::make_result(GofTest::chi_square, stat, boot.p_values[0], alpha, p_method, boot.reps,
                             boot.redraws);
}

/// Anderson-Darling test; bootstrap p-values only.
inline GofResult ad_test(std::span<const double> data, const DistributionModel& model, double alpha,
                         std::size_t reps = 1000, const SeededRng& rng = SeededRng(42)) {
  detail::check_alpha(alpha);
  const double a2 = ad_statistic(data, model);
  const auto boot = bootstrap_pvalue(a2, data, model, ad_statistic, reps, rng);
  return detail::make_result(GofTest::ad, a2, boot.p_values[0], alpha, PMethod::bootstrap, boot.reps,
                             boot.redraws);
}

struct GofConfig {
  double alpha = 0.05;
  PMethod p_method = PMethod::bootstrap;  // AD always uses the bootstrap
  std::size_t reps = 1000;
  std::optional<std::size_t> chi_square_bins{};
};

/// KS, chi-square and AD together. Bootstrap replicates are drawn once and
/// shared, so each result equals the corresponding single test run with the
/// same rng.
inline std::array<GofResult, 3> run_gof_suite(std::span<const double> data, const DistributionModel& model,
                                              const GofConfig& config, const SeededRng& rng) {
  detail::check_alpha(config.alpha);
  const std::size_t bins = resolve_chi_square_bins(data.size(), config.chi_square_bins);
  const double d = ks_statistic(data, model);
  const double chi = chi_square_statistic(data, model, bins);
  const double a2 = ad_statistic(data, model);
  const StatisticFn chi_fn = [bins](std::span<const double> x, const DistributionModel& m) {
    return chi_square_statistic(x, m, bins);
  };

  std::vector<double> observed{a2};
  std::vector<StatisticFn> stats{ad_statistic};
  const bool boot_all = config.p_method == PMethod::bootstrap;
  if (boot_all) {
    observed.insert(observed.end(), {d, chi});
    stats.insert(stats.end(), {StatisticFn(ks_statistic), chi_fn});
  }
  if (config.reps < 99) throw std::invalid_argument("run_gof_suite: reps must be >= 99");
  const auto boot = bootstrap_pvalues(observed, data.size(), model, stats, config.reps, rng);

  std::array<GofResult, 3> results;
  results[2] = detail::make_result(GofTest::ad, a2, boot.p_values[0], config.alpha, PMethod::bootstrap,
                                   boot.reps, boot.redraws);
  if (boot_all) {
    results[0] = detail::make_result(GofTest::ks, d, boot.p_values[1], config.alpha, PMethod::bootstrap,
                                     boot.reps, boot.redraws);
    results[1] = detail::make_result(GofTest::chi_square, chi, boot.p_values[2], config.alpha,
                                     PMethod::bootstrap, boot.reps, boot.redraws);
  } else {
    const double n = static_cast<double>(data.size());
    results[0] = detail::make_result(GofTest::ks, d, kolmogorov_sf(std::sqrt(n) * d), config.alpha,
                                     PMethod::asymptotic, 0, 0);
    const double dof =
        std::max(1.0, static_cast<double>(bins) - 1.0 - parameter_count(model.family()));
    results[1] = detail::make_result(GofTest::chi_square, chi, chi_square_sf(chi, dof), config.alpha,
                                     PMethod::asymptotic, 0, 0);
  }
  return results;
}

}  // namespace heavytail

#endif  // HEAVYTAIL_GOF_HPP
