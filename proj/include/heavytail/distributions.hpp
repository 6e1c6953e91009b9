#ifndef HEAVYTAIL_DISTRIBUTIONS_HPP
#define HEAVYTAIL_DISTRIBUTIONS_HPP

// Lognormal, generalized extreme value (location-scale) and generalized
// Pareto families: CDF, survival, density, quantile, log-likelihood and
// inverse-transform sampling.

#include <cmath>
#include <limits>
#include <span>
#include <stdexcept>
#include <string_view>
#include <variant>
#include <vector>

#include "heavytail/numerics.hpp"

namespace heavytail {

/// Shape magnitudes below this use the exponential (Gumbel / exponential) limit.
inline constexpr double kShapeZero = 1e-9;

/// Lognormal: ln X ~ Normal(mu, sigma^2).
struct LognormalParams {
  double mu = 0.0;
  double sigma = 1.0;
  bool operator==(const LognormalParams&) const = default;
};

/// GEV with F(x) = exp(-(1 + shape z)^(-1/shape)), z = (x - location) / scale.
struct GevParams {
  double shape = 0.0;
  double location = 0.0;
  double scale = 1.0;
  bool operator==(const GevParams&) const = default;
};

/// Generalized Pareto with F(x) = 1 - (1 + shape x / scale)^(-1/shape), x >= 0.
struct GpdParams {
  double shape = 0.0;
  double scale = 1.0;
  bool operator==(const GpdParams&) const = default;
};

enum class Family { lognormal, gev, gpd };

inline std::string_view to_string(Family family) {
  switch (family) {
    case Family::lognormal: return "lognormal";
    case Family::gev: return "gev";
    case Family::gpd: return "gpd";
  }
  return "unknown";
}

/// One of the three parameter sets; the variant index is the family tag.
class DistributionModel {
 public:
  DistributionModel(LognormalParams p) : params_(validated(p)) {}
  DistributionModel(GevParams p) : params_(validated(p)) {}
  DistributionModel(GpdParams p) : params_(validated(p)) {}

  Family family() const noexcept { return static_cast<Family>(params_.index()); }
  const auto& params() const noexcept { return params_; }

  template <typename P>
  const P& as() const {
    return std::get<P>(params_);
  }

  bool operator==(const DistributionModel&) const = default;

 private:
  static LognormalParams validated(LognormalParams p) {
    if (!std::isfinite(p.mu) || !(p.sigma > 0.0) || !std::isfinite(p.sigma))
      throw std::invalid_argument("lognormal: sigma must be finite and > 0");
    return p;
  }
  static GevParams validated(GevParams p) {
    if (!std::isfinite(p.shape) || !std::isfinite(p.location) || !(p.scale > 0.0) || !std::isfinite(p.scale))
      throw std::invalid_argument("gev: scale must be finite and > 0");
    return p;
  }
  static GpdParams validated(GpdParams p) {
    if (!std::isfinite(p.shape) || !(p.scale > 0.0) || !std::isfinite(p.scale))
      throw std::invalid_argument("gpd: scale must be finite and > 0");
    return p;
  }

  std::variant<LognormalParams, GevParams, GpdParams> params_;
};

namespace detail {

template <class... Ts>
struct overloaded : Ts... {
  using Ts::operator()...;
};
template <class... Ts>
overloaded(Ts...) -> overloaded<Ts...>;

// Returns -log F(x) for the GEV (the "exponential residual"), +inf below the
// lower endpoint and 0 above the upper endpoint.
inline double gev_neg_log_cdf(const GevParams& p, double x) {
  const double z = (x - p.location) / p.scale;
  if (std::abs(p.shape) < kShapeZero) return std::exp(-z);
  const double t = 1.0 + p.shape * z;
  if (!(t > 0.0)) return p.shape > 0.0 ? std::numeric_limits<double>::infinity() : 0.0;
  return std::exp(-std::log(t) / p.shape);
}

// Returns -log(1 - G(y)) for the GPD; +inf at or beyond a finite upper endpoint.
inline double gpd_neg_log_sf(const GpdParams& p, double y) {
  if (!(y > 0.0)) return 0.0;
  if (std::abs(p.shape) < kShapeZero) return y / p.scale;
  const double arg = p.shape * y / p.scale;
  if (!(arg > -1.0)) return std::numeric_limits<double>::infinity();
  return std::log1p(arg) / p.shape;
}

inline double gpd_upper_endpoint(const GpdParams& p) {
  return p.shape < 0.0 && std::abs(p.shape) >= kShapeZero ? -p.scale / p.shape
                                                          : std::numeric_limits<double>::infinity();
}

}  // namespace detail

/// Cumulative distribution function; clamps to 0 or 1 outside the support.
inline double cdf(const DistributionModel& model, double x) {
  return std::visit(
      detail::overloaded{
          [x](const LognormalParams& p) { return x > 0.0 ? normal_cdf((std::log(x) - p.mu) / p.sigma) : 0.0; },
          [x](const GevParams& p) { return std::exp(-detail::gev_neg_log_cdf(p, x)); },
          [x](const GpdParams& p) {
            if (x >= detail::gpd_upper_endpoint(p)) return 1.0;
            return -std::expm1(-detail::gpd_neg_log_sf(p, x));
          },
      },
      model.params());
}

/// Survival function 1 - F(x), computed without cancellation in the upper tail.
inline double sf(const DistributionModel& model, double x) {
  return std::visit(
      detail::overloaded{
          [x](const LognormalParams& p) { return x > 0.0 ? normal_cdf(-(std::log(x) - p.mu) / p.sigma) : 1.0; },
          [x](const GevParams& p) { return -std::expm1(-detail::gev_neg_log_cdf(p, x)); },
          [x](const GpdParams& p) {
            if (x >= detail::gpd_upper_endpoint(p)) return 0.0;
            return std::exp(-detail::gpd_neg_log_sf(p, x));
          },
      },
      model.params());
}

/// Log density; -infinity outside the support.
inline double log_pdf(const DistributionModel& model, double x) {
  constexpr double neg_inf = -std::numeric_limits<double>::infinity();
  return std::visit(
      detail::overloaded{
          [x](const LognormalParams& p) {
            if (!(x > 0.0)) return neg_inf;
            const double lx = std::log(x);
            const double z = (lx - p.mu) / p.sigma;
            return -0.5 * z * z - lx - std::log(p.sigma) - 0.5 * std::log(2.0 * std::numbers::pi);
          },
          [x](const GevParams& p) {
            const double z = (x - p.location) / p.scale;
            if (std::abs(p.shape) < kShapeZero) return -std::log(p.scale) - z - std::exp(-z);
            const double t = 1.0 + p.shape * z;
            if (!(t > 0.0)) return neg_inf;
            const double log_t = std::log(t);
            return -std::log(p.scale) - (1.0 + 1.0 / p.shape) * log_t - std::exp(-log_t / p.shape);
          },
          [x](const GpdParams& p) {
            if (x < 0.0) return neg_inf;
            if (std::abs(p.shape) < kShapeZero) return -std::log(p.scale) - x / p.scale;
            const double arg = p.shape * x / p.scale;
            if (arg < -1.0) return neg_inf;
            const double exponent = -(1.0 + 1.0 / p.shape);
            if (arg == -1.0) {
              // Closed upper endpoint: left-limit density.
              if (exponent == 0.0) return -std::log(p.scale);
              return exponent > 0.0 ? neg_inf : std::numeric_limits<double>::infinity();
            }
            return -std::log(p.scale) + exponent * std::log1p(arg);
          },
      },
      model.params());
}

/// Density; zero outside the support.
inline double pdf(const DistributionModel& model, double x) {
  return std::exp(log_pdf(model, x));
}

/// Closed-form inverse CDF. Throws std::domain_error for p outside (0, 1).
inline double quantile(const DistributionModel& model, double p) {
  if (!(p > 0.0 && p < 1.0)) throw std::domain_error("quantile: p must lie in (0, 1)");
  return std::visit(
      detail::overloaded{
          [p](const LognormalParams& q) { return std::exp(q.mu + q.sigma * normal_quantile(p)); },
          [p](const GevParams& q) {
            const double e = -std::log(p);  // unit-exponential residual
            if (std::abs(q.shape) < kShapeZero) return q.location - q.scale * std::log(e);
            return q.location + q.scale * std::expm1(-q.shape * std::log(e)) / q.shape;
          },
          [p](const GpdParams& q) {
            const double e = -std::log1p(-p);
            if (std::abs(q.shape) < kShapeZero) return q.scale * e;
            return q.scale * std::expm1(q.shape * e) / q.shape;
          },
      },
      model.params());
}

/// Sum of log densities; -infinity if any observation is outside the support.
inline double log_likelihood(const DistributionModel& model, std::span<const double> data) {
  double total = 0.0;
  for (double x : data) {
    const double term = log_pdf(model, x);
    if (term == -std::numeric_limits<double>::infinity()) return term;
    total += term;
  }
  return total;
}

/// n inverse-transform draws, one uniform per draw.
inline std::vector<double> sample(const DistributionModel& model, std::size_t n, SeededRng& rng) {
  std::vector<double> out;
  out.reserve(n);
  for (std::size_t i = 0; i < n; ++i) out.push_back(quantile(model, rng.uniform()));
  return out;
}

/// Number of free parameters of the family.
inline int parameter_count(Family family) {
  return family == Family::gev ? 3 : 2;
}

}  // namespace heavytail

#endif  // HEAVYTAIL_DISTRIBUTIONS_HPP
