#ifndef HEAVYTAIL_SYNTHETIC_HPP
#define HEAVYTAIL_SYNTHETIC_HPP

// Seeded synthetic monthly premium series used as the bundled fixture.

#include <array>
#include <cstdio>
#include <string>
#include <string_view>

#include "heavytail/distributions.hpp"
#include "heavytail/numerics.hpp"
#include "heavytail/report.hpp"

namespace heavytail {

struct SyntheticCompany {
  std::string_view name;
  GevParams generator;
};

// GEV generators on the scale of published premium fits (shape, location, scale).
inline constexpr std::array<SyntheticCompany, 10> kSyntheticCompanies{{
    {"Company A", {0.368, 53.335, 30.848}},
    {"Company B", {0.625, 57.601, 36.772}},
    {"Company C", {0.008, 117.728, 66.970}},
    {"Company D", {0.378, 84.508, 57.462}},
    {"Company E", {0.264, 190.516, 153.200}},
    {"Company F", {0.285, 139.234, 98.745}},
    {"Company G", {0.706, 84.998, 82.215}},
    {"Company H", {0.685, 49.846, 33.423}},
    {"Company I", {0.198, 160.477, 131.428}},
    {"Company J", {0.053, 138.016, 130.343}},
}};

inline constexpr int kSyntheticFirstPeriod = 2003 * 12 + 3;  // 2003-04
inline constexpr std::size_t kSyntheticMonths = 177;         // through 2017-12

/// CSV text (`company,period,premium`) of the synthetic fixture.
///
/// Company i draws from rng.stream(i); draws that would print as a
/// nonpositive premium at three decimals are redrawn.
inline std::string synthetic_premiums_csv(std::uint64_t seed, std::size_t months = kSyntheticMonths) {
  const SeededRng root(seed);
  std::string out = "company,period,premium\n";
  char buffer[128];
  for (std::size_t c = 0; c < kSyntheticCompanies.size(); ++c) {
    const auto& company = kSyntheticCompanies[c];
    const DistributionModel model{company.generator};
    SeededRng rng = root.stream(c);
    for (std::size_t m = 0; m < months; ++m) {
      double premium = 0.0;
      do {
        premium = quantile(model, rng.uniform());
      } while (!(premium >= 0.001));
      std::snprintf(buffer, sizeof buffer, "%s,%s,%.3f\n", std::string(company.name).c_str(),
                    detail::format_period(kSyntheticFirstPeriod + static_cast<int>(m)).c_str(), premium);
      out += buffer;
    }
  }
  return out;
}

}  // namespace heavytail

#endif  // HEAVYTAIL_SYNTHETIC_HPP
