#ifndef HEAVYTAIL_SAMPLE_HPP
#define HEAVYTAIL_SAMPLE_HPP

#include <cmath>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

namespace heavytail {

/// A univariate series of observations with provenance.
///
/// Algorithms take std::span<const double>; Sample is the owning carrier used
/// at the ingestion and reporting boundary, where values must be positive.
struct Sample {
  std::vector<double> values;
  std::string label;
  std::optional<std::string> period_start;  // YYYY-MM
  std::optional<std::string> period_end;

  std::size_t size() const noexcept { return values.size(); }
  std::span<const double> view() const noexcept { return values; }

  bool operator==(const Sample&) const = default;
};

/// Throws std::invalid_argument unless `values` is nonempty, finite and
/// strictly positive.
inline void require_positive(std::span<const double> values, const char* what) {
  if (values.empty()) throw std::invalid_argument(std::string(what) + ": empty sample");
  for (double v : values) {
    if (!std::isfinite(v) || !(v > 0.0)) {
      throw std::invalid_argument(std::string(what) + ": values must be finite and > 0");
    }
  }
}

}  // namespace heavytail

#endif  // HEAVYTAIL_SAMPLE_HPP
