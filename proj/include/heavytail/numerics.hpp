#ifndef HEAVYTAIL_NUMERICS_HPP
#define HEAVYTAIL_NUMERICS_HPP

// Special functions, a Nelder-Mead simplex minimizer, golden-section search
// and the seeded generator shared by the rest of the library.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <functional>
#include <limits>
#include <numbers>
#include <span>
#include <stdexcept>
#include <vector>

namespace heavytail {

// ---------------------------------------------------------------------------
// Seeded generator
// ---------------------------------------------------------------------------

namespace detail {

// splitmix64 finalizer (Steele, Lea & Flood 2014).
constexpr std::uint64_t mix64(std::uint64_t z) noexcept {
  z += 0x9e3779b97f4a7c15ULL;
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

constexpr std::uint64_t rotl(std::uint64_t x, int k) noexcept {
  return (x << k) | (x >> (64 - k));
}

}  // namespace detail

/// xoshiro256** generator keyed by (master_seed, stream_id).
///
/// The four state words are filled by running splitmix64 from a seed that
/// mixes both keys, so streams derived from one master seed are independent
/// for practical purposes. Satisfies UniformRandomBitGenerator.
class SeededRng {
 public:
  using result_type = std::uint64_t;

  explicit SeededRng(std::uint64_t master_seed, std::uint64_t stream_id = 0)
      : master_seed_(master_seed), stream_id_(stream_id) {
    std::uint64_t s = detail::mix64(master_seed ^ detail::mix64(stream_id + 0x632be59bd9b4e019ULL));
    for (auto& word : state_) {
      s += 0x9e3779b97f4a7c15ULL;
      word = detail::mix64(s);
    }
  }

  static constexpr result_type min() noexcept { return 0; }
  static constexpr result_type max() noexcept { return std::numeric_limits<result_type>::max(); }

  result_type operator()() noexcept {
    const std::uint64_t result = detail::rotl(state_[1] * 5, 7) * 9;
    const std::uint64_t t = state_[1] << 17;
    state_[2] ^= state_[0];
    state_[3] ^= state_[1];
    state_[1] ^= state_[2];
    state_[0] ^= state_[3];
    state_[2] ^= t;
    state_[3] = detail::rotl(state_[3], 45);
    return result;
  }

  /// Uniform variate on the open interval (0, 1).
  double uniform() noexcept {
    return (static_cast<double>((*this)() >> 11) + 0.5) * 0x1.0p-53;
  }

  /// Uniform integer in [0, bound) by rejection, bound > 0.
  std::uint64_t below(std::uint64_t bound) noexcept {
    const std::uint64_t limit = max() - max() % bound;
    std::uint64_t draw = (*this)();
    while (draw >= limit) draw = (*this)();
    return draw % bound;
  }

  /// Child stream; children of distinct parents or indices do not collide.
  SeededRng stream(std::uint64_t index) const {
    return SeededRng(master_seed_, detail::mix64(stream_id_ ^ detail::mix64(index + 1)));
  }

  std::uint64_t master_seed() const noexcept { return master_seed_; }
  std::uint64_t stream_id() const noexcept { return stream_id_; }

 private:
  std::uint64_t master_seed_;
  std::uint64_t stream_id_;
  std::uint64_t state_[4]{};
};

/// Fisher-Yates shuffle driven by SeededRng, portable across standard libraries.
template <typename T>
void shuffle(std::vector<T>& items, SeededRng& rng) {
  for (std::size_t i = items.size(); i > 1; --i) {
    const auto j = static_cast<std::size_t>(rng.below(i));
    std::swap(items[i - 1], items[j]);
  }
}

// ---------------------------------------------------------------------------
// Special functions
// ---------------------------------------------------------------------------

/// Standard normal CDF.
inline double normal_cdf(double z) {
  return 0.5 * std::erfc(-z / std::numbers::sqrt2);
}

inline double normal_pdf(double z) {
  return std::exp(-0.5 * z * z) / std::sqrt(2.0 * std::numbers::pi);
}

/// Inverse standard normal CDF.
///
/// Wichura's AS241 (PPND16) rational approximation followed by one Newton
/// step against normal_cdf. Throws std::domain_error outside (0, 1).
inline double normal_quantile(double p) {
  if (!(p > 0.0 && p < 1.0)) {
    throw std::domain_error("normal_quantile: p must lie in (0, 1)");
  }
  const double q = p - 0.5;
  double x;
  if (std::abs(q) <= 0.425) {
    const double r = 0.180625 - q * q;
    x = q *
        (((((((2509.0809287301226727 * r + 33430.575583588128105) * r + 67265.770927008700853) * r +
             45921.953931549871457) * r + 13731.693765509461125) * r + 1971.5909503065514427) * r +
          133.14166789178437745) * r + 3.387132872796366608) /
        (((((((5226.495278852545925 * r + 28729.085735721942674) * r + 39307.89580009271061) * r +
             21213.794301586595867) * r + 5394.1960214247511077) * r + 687.1870074920579083) * r +
          42.313330701600911252) * r + 1.0);
  } else {
    double r = std::sqrt(-std::log(q < 0.0 ? p : 1.0 - p));
    if (r <= 5.0) {
      r -= 1.6;
      x = (((((((7.7454501427834140764e-4 * r + 0.0227238449892691845833) * r + 0.24178072517745061177) * r +
              1.27045825245236838258) * r + 3.64784832476320460504) * r + 5.7694972214606914055) * r +
            4.6303378461565452959) * r + 1.42343711074968357734) /
          (((((((1.05075007164441684324e-9 * r + 5.475938084995344946e-4) * r + 0.0151986665636164571966) * r +
              0.14810397642748007459) * r + 0.68976733498510000455) * r + 1.6763848301838038494) * r +
            2.05319162663775882187) * r + 1.0);
    } else {
      r -= 5.0;
      x = (((((((2.01033439929228813265e-7 * r + 2.71155556874348757815e-5) * r + 0.0012426609473880784386) * r +
              0.026532189526576123093) * r + 0.29656057182850489123) * r + 1.7848265399172913358) * r +
            5.4637849111641143699) * r + 6.6579046435011037772) /
          (((((((2.04426310338993978564e-15 * r + 1.4215117583164458887e-7) * r + 1.8463183175100546818e-5) * r +
              7.868691311456132591e-4) * r + 0.0148753612908506148525) * r + 0.13692988092273580531) * r +
            0.59983220655588793769) * r + 1.0);
    }
    if (q < 0.0) x = -x;
  }
  const double density = normal_pdf(x);
  if (density > 0.0) {
    // Both branches equal cdf(x) - p; use the smaller tail so it does not cancel.
    const double residual = x < 0.0 ? normal_cdf(x) - p : (1.0 - p) - normal_cdf(-x);
    x -= residual / density;
  }
  return x;
}

namespace detail {

inline double lower_gamma_series(double a, double x) {
  double term = 1.0 / a;
  double sum = term;
  for (int n = 1; n < 10000; ++n) {
    term *= x / (a + n);
    sum += term;
    if (std::abs(term) < std::abs(sum) * 1e-17) break;
  }
  return sum * std::exp(-x + a * std::log(x) - std::lgamma(a));
}

// Modified Lentz evaluation of the continued fraction for Q(a, x).
inline double upper_gamma_fraction(double a, double x) {
  constexpr double tiny = 1e-300;
  double b = x + 1.0 - a;
  double c = 1.0 / tiny;
  double d = 1.0 / b;
  double h = d;
  for (int i = 1; i < 10000; ++i) {
    const double an = -i * (i - a);
    b += 2.0;
    d = an * d + b;
    if (std::abs(d) < tiny) d = tiny;
    c = b + an / c;
    if (std::abs(c) < tiny) c = tiny;
    d = 1.0 / d;
    const double delta = d * c;
    h *= delta;
    if (std::abs(delta - 1.0) < 1e-16) break;
  }
  return std::exp(-x + a * std::log(x) - std::lgamma(a)) * h;
}

inline void check_gamma_args(double a, double x) {
  if (!(a > 0.0) || !std::isfinite(a)) throw std::domain_error("incomplete gamma: a must be > 0");
  if (!(x >= 0.0)) throw std::domain_error("incomplete gamma: x must be >= 0");
}

}  // namespace detail

/// Regularized lower incomplete gamma P(a, x).
inline double regularized_lower_gamma(double a, double x) {
  detail::check_gamma_args(a, x);
  if (x == 0.0) return 0.0;
  if (std::isinf(x)) return 1.0;
  if (x < a + 1.0) return std::clamp(detail::lower_gamma_series(a, x), 0.0, 1.0);
  return std::clamp(1.0 - detail::upper_gamma_fraction(a, x), 0.0, 1.0);
}

/// Regularized upper incomplete gamma Q(a, x) = 1 - P(a, x), accurate in the
/// far right tail.
inline double regularized_upper_gamma(double a, double x) {
  detail::check_gamma_args(a, x);
  if (x == 0.0) return 1.0;
  if (std::isinf(x)) return 0.0;
  if (x < a + 1.0) return std::clamp(1.0 - detail::lower_gamma_series(a, x), 0.0, 1.0);
  return std::clamp(detail::upper_gamma_fraction(a, x), 0.0, 1.0);
}

/// Upper tail of the chi-square distribution with `dof` degrees of freedom.
inline double chi_square_sf(double statistic, double dof) {
  return regularized_upper_gamma(0.5 * dof, 0.5 * std::max(statistic, 0.0));
}

/// Survival function of the Kolmogorov distribution,
/// Q(t) = 2 sum_{k>=1} (-1)^{k-1} exp(-2 k^2 t^2).
///
/// The alternating series converges slowly for small t; there the
/// Jacobi-theta dual form 1 - sqrt(2 pi)/t sum exp(-(2k-1)^2 pi^2 / (8 t^2))
/// is used instead.
inline double kolmogorov_sf(double t) {
  if (!(t > 0.0)) return 1.0;
  if (t < 1.0) {
    const double factor = -std::numbers::pi * std::numbers::pi / (8.0 * t * t);
    double sum = 0.0;
    for (int k = 1; k < 100; ++k) {
      const double odd = 2.0 * k - 1.0;
      const double term = std::exp(factor * odd * odd);
      sum += term;
      if (term < 1e-17) break;
    }
    return std::clamp(1.0 - std::sqrt(2.0 * std::numbers::pi) / t * sum, 0.0, 1.0);
  }
  double sum = 0.0;
  double sign = 1.0;
  for (int k = 1; k < 100; ++k) {
    const double term = std::exp(-2.0 * k * k * t * t);
    sum += sign * term;
    if (term < 1e-12 * 1e-12) break;
    sign = -sign;
  }
  return std::clamp(2.0 * sum, 0.0, 1.0);
}

// ---------------------------------------------------------------------------
// Optimization
// ---------------------------------------------------------------------------

struct OptimizerResult {
  std::vector<double> argmin;
  double objective_value = std::numeric_limits<double>::infinity();
  std::size_t iterations = 0;
  bool converged = false;
};

struct NelderMeadOptions {
  double tolerance = 1e-8;
  std::size_t max_iter = 5000;
  // Initial simplex edge along coordinate i: max(relative_step * |x_i|, absolute_step).
  double relative_step = 0.05;
  double absolute_step = 0.1;
};

using Objective = std::function<double(std::span<const double>)>;

/// Nelder-Mead minimization from an explicit initial simplex of n + 1 vertices.
///
/// Coefficients: reflection 1, expansion 2, contraction 0.5, shrink 0.5.
/// Converged when both the simplex diameter (max distance of a vertex from
/// the best one, infinity norm) and the spread of objective values drop
/// below the tolerance. Ties in objective value keep the earlier vertex
/// first. Non-finite objective values are treated as +infinity.
inline OptimizerResult nelder_mead(const Objective& objective,
                                   std::vector<std::vector<double>> simplex,
                                   double tolerance, std::size_t max_iter) {
  if (!(tolerance > 0.0)) throw std::invalid_argument("nelder_mead: tolerance must be > 0");
  if (simplex.empty()) throw std::invalid_argument("nelder_mead: empty simplex");
  const std::size_t dim = simplex.front().size();
  if (simplex.size() != dim + 1) throw std::invalid_argument("nelder_mead: simplex needs n + 1 vertices");

  constexpr double kReflect = 1.0, kExpand = 2.0, kContract = 0.5, kShrink = 0.5;
  auto eval = [&](const std::vector<double>& x) {
    const double f = objective(x);
    return std::isnan(f) ? std::numeric_limits<double>::infinity() : f;
  };

  std::vector<double> values(simplex.size());
  for (std::size_t i = 0; i < simplex.size(); ++i) values[i] = eval(simplex[i]);

  std::vector<std::size_t> order(simplex.size());
  auto sort_simplex = [&] {
    for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
    std::stable_sort(order.begin(), order.end(),
                     [&](std::size_t a, std::size_t b) { return values[a] < values[b]; });
    std::vector<std::vector<double>> sorted_points(simplex.size());
    std::vector<double> sorted_values(simplex.size());
    for (std::size_t i = 0; i < order.size(); ++i) {
      sorted_points[i] = std::move(simplex[order[i]]);
      sorted_values[i] = values[order[i]];
    }
    simplex = std::move(sorted_points);
    values = std::move(sorted_values);
  };
  auto diameter = [&] {
    double d = 0.0;
    for (std::size_t i = 1; i < simplex.size(); ++i)
      for (std::size_t j = 0; j < dim; ++j) d = std::max(d, std::abs(simplex[i][j] - simplex[0][j]));
    return d;
  };
  auto along = [&](const std::vector<double>& from, const std::vector<double>& to, double t) {
    std::vector<double> p(dim);
    for (std::size_t j = 0; j < dim; ++j) p[j] = from[j] + t * (to[j] - from[j]);
    return p;
  };

  OptimizerResult result;
  sort_simplex();
  std::size_t iter = 0;
  for (; iter < max_iter; ++iter) {
    const double spread = values.back() - values.front();
    if (diameter() < tolerance && (spread < tolerance || !std::isfinite(values.back()))) {
      result.converged = std::isfinite(values.front());
      break;
    }

    std::vector<double> centroid(dim, 0.0);
    for (std::size_t i = 0; i < dim; ++i)
      for (std::size_t j = 0; j < dim; ++j) centroid[j] += simplex[i][j] / static_cast<double>(dim);

    const auto& worst = simplex.back();
    auto reflected = along(centroid, worst, -kReflect);
    const double f_reflected = eval(reflected);

    if (f_reflected < values.front()) {
      auto expanded = along(centroid, worst, -kExpand);
      const double f_expanded = eval(expanded);
      if (f_expanded < f_reflected) {
        simplex.back() = std::move(expanded);
        values.back() = f_expanded;
      } else {
        simplex.back() = std::move(reflected);
        values.back() = f_reflected;
      }
    } else if (f_reflected < values[dim - 1]) {
      simplex.back() = std::move(reflected);
      values.back() = f_reflected;
    } else {
      const bool outside = f_reflected < values.back();
      auto contracted = outside ? along(centroid, reflected, kContract) : along(centroid, worst, kContract);
      const double f_contracted = eval(contracted);
      if (f_contracted < (outside ? f_reflected : values.back())) {
        simplex.back() = std::move(contracted);
        values.back() = f_contracted;
      } else {
        for (std::size_t i = 1; i < simplex.size(); ++i) {
          simplex[i] = along(simplex[0], simplex[i], kShrink);
          values[i] = eval(simplex[i]);
        }
      }
    }
    sort_simplex();
  }
  result.iterations = iter;
  result.argmin = simplex.front();
  result.objective_value = values.front();
  return result;
}

/// Nelder-Mead from a start point; the initial simplex steps along each axis.
inline OptimizerResult nelder_mead(const Objective& objective, std::span<const double> start,
                                   const NelderMeadOptions& options = {}) {
  std::vector<std::vector<double>> simplex;
  simplex.emplace_back(start.begin(), start.end());
  for (std::size_t i = 0; i < start.size(); ++i) {
    std::vector<double> vertex(start.begin(), start.end());
    vertex[i] += std::max(options.relative_step * std::abs(start[i]), options.absolute_step);
    simplex.push_back(std::move(vertex));
  }
  return nelder_mead(objective, std::move(simplex), options.tolerance, options.max_iter);
}

inline OptimizerResult nelder_mead(const Objective& objective, std::span<const double> start,
                                   double tolerance, std::size_t max_iter) {
  NelderMeadOptions options;
  options.tolerance = tolerance;
  options.max_iter = max_iter;
  return nelder_mead(objective, start, options);
}

/// Golden-section search for the maximizer of a unimodal function on [lo, hi].
inline double golden_section_max(const std::function<double(double)>& objective, double lo, double hi,
                                  double tolerance) {
  if (!(lo < hi)) throw std::domain_error("golden_section_max: requires lo < hi");
  if (!(tolerance > 0.0)) throw std::domain_error("golden_section_max: tolerance must be > 0");
  constexpr double inv_phi = 0.6180339887498948482;
  double a = lo, b = hi;
  double c = b - inv_phi * (b - a);
  double d = a + inv_phi * (b - a);
  double fc = objective(c), fd = objective(d);
  while (b - a > tolerance) {
    if (fc == fd) {
      // Indistinguishable values: keep the middle section so a flat top
      // stays centred.
      a = c;
      b = d;
      c = b - inv_phi * (b - a);
      d = a + inv_phi * (b - a);
      fc = objective(c);
      fd = objective(d);
    } else if (fc > fd) {
      b = d;
      d = c;
      fd = fc;
      c = b - inv_phi * (b - a);
      fc = objective(c);
    } else {
      a = c;
      c = d;
      fc = fd;
      d = a + inv_phi * (b - a);
      fd = objective(d);
    }
    if (c >= d) break;  // interval has collapsed to adjacent doubles
  }
  return 0.5 * (a + b);
}

}  // namespace heavytail

#endif  // HEAVYTAIL_NUMERICS_HPP
