#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>
#include <numbers>
#include <vector>

#include "heavytail/distributions.hpp"
#include "heavytail/gof.hpp"

namespace ht = heavytail;
using ht::DistributionModel;
using ht::GevParams;
using ht::GpdParams;
using ht::LognormalParams;

namespace {

// Adaptive Simpson quadrature, test-only oracle.
template <typename F>
double simpson(F&& f, double a, double b, double fa, double fm, double fb, double whole, double eps, int depth) {
  const double m = 0.5 * (a + b);
  const double lm = 0.5 * (a + m), rm = 0.5 * (m + b);
  const double flm = f(lm), frm = f(rm);
  const double left = (m - a) / 6.0 * (fa + 4.0 * flm + fm);
  const double right = (b - m) / 6.0 * (fm + 4.0 * frm + fb);
  if (depth <= 0 || std::abs(left + right - whole) <= 15.0 * eps) return left + right + (left + right - whole) / 15.0;
  return simpson(f, a, m, fa, flm, fm, left, eps / 2.0, depth - 1) +
         simpson(f, m, b, fm, frm, fb, right, eps / 2.0, depth - 1);
}

template <typename F>
double integrate(F&& f, double a, double b, double eps = 1e-10) {
  const double fa = f(a), fb = f(b), fm = f(0.5 * (a + b));
  return simpson(f, a, b, fa, fm, fb, (b - a) / 6.0 * (fa + 4.0 * fm + fb), eps, 50);
}

std::vector<DistributionModel> representative_models() {
  return {LognormalParams{0.0, 1.0},      LognormalParams{4.23, 0.64},       GevParams{0.0, 0.0, 1.0},
          GevParams{0.368, 53.335, 30.848}, GevParams{-0.3, 10.0, 2.0},      GpdParams{0.0, 2.0},
          GpdParams{0.5, 1.0},            GpdParams{-0.451, 119.918}};
}

}  // namespace

TEST(Cdf, TableOneValues) {
  EXPECT_NEAR(ht::cdf(DistributionModel{LognormalParams{0.0, 1.0}}, 1.0), 0.5, 1e-15);
  EXPECT_NEAR(ht::cdf(DistributionModel{GevParams{0.0, 0.0, 1.0}}, 0.0), std::exp(-1.0), 1e-15);
  EXPECT_NEAR(ht::cdf(DistributionModel{GpdParams{1.0, 1.0}}, 1.0), 0.5, 1e-15);
}

TEST(Cdf, ClampsOutsideSupport) {
  const DistributionModel ln{LognormalParams{0.0, 1.0}};
  EXPECT_EQ(ht::cdf(ln, 0.0), 0.0);
  EXPECT_EQ(ht::cdf(ln, -3.0), 0.0);
  const DistributionModel frechet{GevParams{0.5, 0.0, 1.0}};  // lower endpoint -2
  EXPECT_EQ(ht::cdf(frechet, -2.5), 0.0);
  const DistributionModel weibull{GevParams{-0.5, 0.0, 1.0}};  // upper endpoint 2
  EXPECT_EQ(ht::cdf(weibull, 2.5), 1.0);
  const DistributionModel bounded{GpdParams{-0.5, 1.0}};  // endpoint 2
  EXPECT_EQ(ht::cdf(bounded, -1.0), 0.0);
  EXPECT_EQ(ht::cdf(bounded, 2.0), 1.0);
  EXPECT_EQ(ht::cdf(bounded, 3.0), 1.0);
}

TEST(Cdf, MonotoneOnSortedGrid) {
  for (const auto& m : representative_models()) {
    double prev = 0.0;
    for (double x = -50.0; x < 600.0; x += 0.25) {
      const double v = ht::cdf(m, x);
      ASSERT_GE(v, prev);
      ASSERT_LE(v, 1.0);
      prev = v;
    }
  }
}

TEST(Pdf, KnownValues) {
  EXPECT_NEAR(ht::pdf(DistributionModel{LognormalParams{0.0, 1.0}}, 1.0), 1.0 / std::sqrt(2.0 * std::numbers::pi),
              1e-15);
  EXPECT_NEAR(ht::pdf(DistributionModel{GpdParams{0.0, 2.0}}, 0.0), 0.5, 1e-15);
  EXPECT_EQ(ht::pdf(DistributionModel{GpdParams{0.3, 2.0}}, -0.1), 0.0);
}

TEST(Pdf, GevIntegratesToOne) {
  const DistributionModel m{GevParams{0.368, 53.335, 30.848}};
  const double lower = 53.335 - 30.848 / 0.368;
  // Substitute x = lower + t/(1-t) to map the infinite upper tail onto [0, 1).
  const double total = integrate(
      [&](double t) {
        if (t >= 1.0) return 0.0;
        const double x = lower + t / (1.0 - t) * 30.848;
        return ht::pdf(m, x) * 30.848 / ((1.0 - t) * (1.0 - t));
      },
      0.0, 1.0, 1e-12);
  EXPECT_NEAR(total, 1.0, 1e-6);
}

TEST(Pdf, GpdUpperEndpointIsLeftLimit) {
  EXPECT_EQ(ht::pdf(DistributionModel{GpdParams{-0.5, 1.0}}, 2.0), 0.0);
  EXPECT_NEAR(ht::pdf(DistributionModel{GpdParams{-1.0, 4.0}}, 4.0), 0.25, 1e-15);
  EXPECT_EQ(ht::pdf(DistributionModel{GpdParams{-0.5, 1.0}}, 2.0 + 1e-9), 0.0);
}

TEST(Pdf, MatchesCdfFiniteDifference) {
  for (const auto& m : representative_models()) {
    for (int i = 1; i <= 100; ++i) {
      const double x = ht::quantile(m, i / 101.0);
      const double h = 1e-5 * std::max(1.0, std::abs(x));
      const double numeric = (ht::cdf(m, x + h) - ht::cdf(m, x - h)) / (2.0 * h);
      const double density = ht::pdf(m, x);
      EXPECT_NEAR(numeric, density, 1e-5 * std::max(density, 1e-3)) << "x=" << x;
    }
  }
}

TEST(Quantile, KnownValues) {
  EXPECT_NEAR(ht::quantile(DistributionModel{LognormalParams{0.0, 1.0}}, 0.5), 1.0, 1e-15);
  EXPECT_NEAR(ht::quantile(DistributionModel{GpdParams{0.0, 1.0}}, 1.0 - std::exp(-1.0)), 1.0, 1e-14);
  EXPECT_NEAR(ht::quantile(DistributionModel{GevParams{0.5, 0.0, 1.0}}, std::exp(-0.25)), 2.0, 1e-14);
}

TEST(Quantile, DomainErrors) {
  const DistributionModel m{GpdParams{0.1, 1.0}};
  EXPECT_THROW(ht::quantile(m, 0.0), std::domain_error);
  EXPECT_THROW(ht::quantile(m, 1.0), std::domain_error);
  EXPECT_THROW(ht::quantile(m, 1.5), std::domain_error);
}

TEST(Quantile, RoundTripRandomParameters) {
  ht::SeededRng rng(1);
  for (int i = 0; i < 1000; ++i) {
    const double p = rng.uniform();
    const DistributionModel models[] = {
        LognormalParams{10.0 * rng.uniform() - 5.0, 0.05 + 2.0 * rng.uniform()},
        GevParams{1.6 * rng.uniform() - 0.8, 200.0 * rng.uniform() - 100.0, 0.1 + 100.0 * rng.uniform()},
        GpdParams{1.6 * rng.uniform() - 0.8, 0.1 + 100.0 * rng.uniform()}};
    for (const auto& m : models) ASSERT_NEAR(ht::cdf(m, ht::quantile(m, p)), p, 1e-9);
  }
}

TEST(ShapeContinuity, NearZeroMatchesExponentialBranch) {
  for (int i = 1; i <= 100; ++i) {
    const double x = -3.0 + 0.09 * i;
    EXPECT_NEAR(ht::cdf(DistributionModel{GevParams{1e-10, 0.0, 1.0}}, x),
                ht::cdf(DistributionModel{GevParams{0.0, 0.0, 1.0}}, x), 1e-6);
    EXPECT_NEAR(ht::cdf(DistributionModel{GevParams{-1e-10, 0.0, 1.0}}, x),
                ht::cdf(DistributionModel{GevParams{0.0, 0.0, 1.0}}, x), 1e-6);
    const double y = 0.08 * i;
    EXPECT_NEAR(ht::cdf(DistributionModel{GpdParams{1e-10, 1.0}}, y),
                ht::cdf(DistributionModel{GpdParams{0.0, 1.0}}, y), 1e-6);
    EXPECT_NEAR(ht::cdf(DistributionModel{GpdParams{-1e-10, 1.0}}, y),
                ht::cdf(DistributionModel{GpdParams{0.0, 1.0}}, y), 1e-6);
  }
  // Just outside the exponential band the general formula is still continuous.
  EXPECT_NEAR(ht::cdf(DistributionModel{GevParams{2e-9, 0.0, 1.0}}, 1.0),
              ht::cdf(DistributionModel{GevParams{0.0, 0.0, 1.0}}, 1.0), 1e-8);
}

TEST(LogLikelihood, KnownValues) {
  const std::vector<double> ones{1.0, 1.0, 1.0};
  EXPECT_NEAR(ht::log_likelihood(DistributionModel{GpdParams{0.0, 1.0}}, ones), -3.0, 1e-15);
  const std::vector<double> with_negative{1.0, -1.0};
  EXPECT_EQ(ht::log_likelihood(DistributionModel{GpdParams{0.0, 1.0}}, with_negative),
            -std::numeric_limits<double>::infinity());
  const std::vector<double> beyond{0.5, 3.0};
  EXPECT_EQ(ht::log_likelihood(DistributionModel{GpdParams{-0.5, 1.0}}, beyond),
            -std::numeric_limits<double>::infinity());
  EXPECT_EQ(ht::log_likelihood(DistributionModel{GevParams{0.5, 0.0, 1.0}}, std::vector<double>{-2.5}),
            -std::numeric_limits<double>::infinity());
}

TEST(LogLikelihood, LognormalTermwiseOracle) {
  ht::SeededRng rng(100);
  const DistributionModel m{LognormalParams{0.0, 1.0}};
  const auto x = ht::sample(m, 100, rng);
  double expected = 0.0;
  for (double v : x) {
    // Independent closed form: log of exp(-ln(v)^2 / 2) / (v sqrt(2 pi)).
    expected += std::log(std::exp(-0.5 * std::log(v) * std::log(v)) / (v * std::sqrt(2.0 * std::numbers::pi)));
  }
  EXPECT_NEAR(ht::log_likelihood(m, x), expected, 1e-10);
}

TEST(Sample, InverseTransformOfOneUniform) {
  const DistributionModel m{GevParams{0.2, 5.0, 2.0}};
  ht::SeededRng a(77), b(77);
  const auto draw = ht::sample(m, 1, a);
  EXPECT_EQ(draw.front(), ht::quantile(m, b.uniform()));
}

TEST(Sample, BoundedGpdSupport) {
  ht::SeededRng rng(3);
  const auto x = ht::sample(DistributionModel{GpdParams{-0.5, 1.0}}, 10'000, rng);
  EXPECT_GE(*std::min_element(x.begin(), x.end()), 0.0);
  EXPECT_LE(*std::max_element(x.begin(), x.end()), 2.0);
}

TEST(Sample, GevMatchesOwnCdf) {
  ht::SeededRng rng(4);
  const DistributionModel m{GevParams{0.3, 0.0, 1.0}};
  const auto x = ht::sample(m, 100'000, rng);
  EXPECT_LE(ht::ks_statistic(x, m), 0.02);
}

TEST(Sample, GeneratingModelBeatsPerturbedModel) {
  for (std::uint64_t seed = 0; seed < 20; ++seed) {
    ht::SeededRng rng(seed);
    const DistributionModel truth[] = {LognormalParams{1.0, 0.8}, GevParams{0.2, 5.0, 2.0}, GpdParams{0.2, 2.0}};
    const DistributionModel perturbed[] = {LognormalParams{1.5, 1.3}, GevParams{0.7, 5.5, 2.5},
                                           GpdParams{0.7, 2.5}};
    for (int f = 0; f < 3; ++f) {
      const auto x = ht::sample(truth[f], 5000, rng);
      EXPECT_GT(ht::log_likelihood(truth[f], x) / 5000.0, ht::log_likelihood(perturbed[f], x) / 5000.0);
    }
  }
}

TEST(DistributionModel, RejectsInvalidParameters) {
  EXPECT_THROW(DistributionModel(LognormalParams{0.0, 0.0}), std::invalid_argument);
  EXPECT_THROW(DistributionModel(GevParams{0.1, 0.0, -1.0}), std::invalid_argument);
  EXPECT_THROW(DistributionModel(GpdParams{0.1, 0.0}), std::invalid_argument);
  EXPECT_EQ(DistributionModel(GpdParams{0.1, 1.0}).family(), ht::Family::gpd);
  EXPECT_EQ(DistributionModel(GevParams{}).family(), ht::Family::gev);
}
