#include "mfmfe/random_field.hpp"

#include <gtest/gtest.h>

#include <cmath>

using namespace mfmfe;

namespace {

// General Matern form sigma^2 2^(1-nu)/Gamma(nu) x^nu K_nu(x).
double matern_bessel(double nu, double range, double var, double h) {
  if (h == 0.0) return var;
  const double x = 2.0 * std::sqrt(nu) * h / range;
  return var * std::pow(2.0, 1.0 - nu) / std::tgamma(nu) * std::pow(x, nu) * std::cyl_bessel_k(nu, x);
}

} // namespace

TEST(Matern, ZeroLagIsVariance) {
  EXPECT_DOUBLE_EQ(matern_cov({0.5, 0.3, 2.0}, 0.0), 2.0);
  EXPECT_DOUBLE_EQ(matern_cov({1.5, 0.3, 0.7}, 0.0), 0.7);
}

TEST(Matern, ExponentialCaseAtRange) {
  EXPECT_NEAR(matern_cov({0.5, 0.3, 1.0}, 0.3), std::exp(-std::sqrt(2.0)), 1e-15);
  EXPECT_NEAR(matern_cov({0.5, 0.3, 1.0}, 0.3), 0.2431, 1e-4);
}

TEST(Matern, ClosedFormsMatchBesselForm) {
  for (double nu : {0.5, 1.5})
    for (double h : {0.01, 0.1, 0.3, 0.77, 1.4})
      EXPECT_NEAR(matern_cov({nu, 0.3, 1.3}, h), matern_bessel(nu, 0.3, 1.3, h), 1e-12);
}

TEST(Matern, Monotone) {
  for (double nu : {0.5, 1.5}) {
    double prev = matern_cov({nu, 0.3, 1.0}, 0.0);
    for (int k = 1; k < 100; ++k) {
      const double c = matern_cov({nu, 0.3, 1.0}, 0.02 * k);
      EXPECT_LT(c, prev);
      prev = c;
    }
  }
}

TEST(Matern, Validation) {
  EXPECT_THROW(matern_cov({1.0, 0.3, 1.0}, 0.1), ParameterError);
  EXPECT_THROW(matern_cov({0.5, -0.3, 1.0}, 0.1), ParameterError);
  EXPECT_THROW(matern_cov({0.5, 0.3, 0.0}, 0.1), ParameterError);
  EXPECT_THROW(matern_cov({0.5, 0.3, 1.0}, -0.1), DomainError);
}

TEST(Sampler, Deterministic) {
  const MaternParams p{0.5, 0.3, 1.0};
  const auto a = sample_log_normal_field(48, 48, p, 42);
  const auto b = sample_log_normal_field(48, 48, p, 42);
  const auto c = sample_log_normal_field(48, 48, p, 43);
  EXPECT_EQ(a.values, b.values);
  EXPECT_NE(a.values, c.values);
  EXPECT_EQ(a.values.size(), 48u * 48u);
}

TEST(Sampler, PermeabilityIsExponential) {
  const auto s = sample_log_normal_field(8, 8, {1.5, 0.2, 1.0}, 3);
  const auto k = s.permeability();
  for (std::size_t a = 0; a < k.size(); ++a) EXPECT_DOUBLE_EQ(k[a], std::exp(s.values[a]));
}

TEST(Sampler, VanishingVarianceGivesUnitPermeability) {
  const auto s = sample_log_normal_field(32, 32, {0.5, 0.3, 1e-14}, 8);
  for (double k : s.permeability()) EXPECT_NEAR(k, 1.0, 1e-5);
}

TEST(Sampler, SmoothCaseEmbeds) {
  const GaussianFieldSampler s(128, 128, {1.5, 0.3, 1.0});
  EXPECT_TRUE(s.uses_circulant());
  EXPECT_GE(s.padding(), 2);
}

TEST(Sampler, DenseFallbackAndFailure) {
  const GaussianFieldSampler small(16, 16, {0.5, 0.3, 1.0}, 1);
  EXPECT_FALSE(small.uses_circulant());
  EXPECT_EQ(small.sample(1).values.size(), 256u);
  EXPECT_THROW(GaussianFieldSampler(80, 80, {0.5, 0.3, 1.0}, 1), SamplingError);
}

TEST(Sampler, MomentStatistics) {
  const int n = 32, samples = 200;
  const MaternParams p{0.5, 0.3, 1.0};
  const GaussianFieldSampler sampler(n, n, p);
  double var = 0.0, cov9 = 0.0, cov10 = 0.0;
  long pairs9 = 0, pairs10 = 0;
  for (int s = 0; s < samples; ++s) {
    const auto f = sampler.sample(1000 + s);
    for (int j = 0; j < n; ++j)
      for (int i = 0; i < n; ++i) {
        var += f.at(i, j) * f.at(i, j);
        if (i + 9 < n) { cov9 += f.at(i, j) * f.at(i + 9, j); ++pairs9; }
        if (j + 9 < n) { cov9 += f.at(i, j) * f.at(i, j + 9); ++pairs9; }
        if (i + 10 < n) { cov10 += f.at(i, j) * f.at(i + 10, j); ++pairs10; }
        if (j + 10 < n) { cov10 += f.at(i, j) * f.at(i, j + 10); ++pairs10; }
      }
  }
  var /= double(samples) * n * n;
  cov9 /= pairs9;
  cov10 /= pairs10;
  const double t = 0.3 * n - 9.0;
  const double cov = (1 - t) * cov9 + t * cov10;
  EXPECT_GE(var, 0.9);
  EXPECT_LE(var, 1.1);
  EXPECT_NEAR(cov, matern_cov(p, 0.3), 0.05);
}
