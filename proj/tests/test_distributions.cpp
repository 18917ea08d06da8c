#include <gtest/gtest.h>

#include <cmath>
#include <limits>
#include <numbers>
#include <vector>

#include "btc/distributions.hpp"
#include "btc/rng.hpp"
#include "support/checks.hpp"
#include "support/suites.hpp"

namespace btc {
namespace {

using testing::draws;
using testing::moments;

constexpr std::size_t kMillion = 1'000'000;

double normal_cdf(double x) { return 0.5 * std::erfc(-x / std::numbers::sqrt2); }

TEST(Rng, SameSeedAndStreamReplay) {
  Rng a(42, 7), b(42, 7);
  for (int k = 0; k < 1000; ++k) ASSERT_EQ(a(), b());
  Rng c(42, 7), d(42, 7);
  for (int k = 0; k < 1000; ++k) ASSERT_EQ(c.normal(), d.normal());
}

TEST(Rng, DistinctStreamsDiffer) {
  Rng a(42, stream_id(0, 0, kStreamFit)), b(42, stream_id(1, 0, kStreamFit));
  Rng c(43, stream_id(0, 0, kStreamFit));
  int same_ab = 0, same_ac = 0;
  for (int k = 0; k < 1000; ++k) {
    const auto x = a();
    same_ab += x == b();
    same_ac += x == c();
  }
  EXPECT_EQ(same_ab, 0);
  EXPECT_EQ(same_ac, 0);
}

TEST(Rng, StreamsAreUncorrelated) {
  Rng a(9, 1), b(9, 2);
  const auto x = draws(100000, [&] { return a.normal(); });
  const auto y = draws(100000, [&] { return b.normal(); });
  double cross = 0.0;
  for (std::size_t k = 0; k < x.size(); ++k) cross += x[k] * y[k];
  EXPECT_LT(std::abs(cross / 100000.0), 4.0 / std::sqrt(100000.0));
}

TEST(Rng, UniformStaysInOpenInterval) {
  Rng rng(1, 0);
  for (int k = 0; k < 100000; ++k) {
    const double u = rng.uniform();
    ASSERT_GT(u, 0.0);
    ASSERT_LT(u, 1.0);
  }
}

// Two-sided mean and variance test at 4 Monte-Carlo sigma, given the
// distribution's variance and fourth central moment.
void expect_moments(const std::vector<double>& x, double mean, double var, double mu4,
                    const char* what) {
  const auto m = moments(x);
  const double n = static_cast<double>(x.size());
  EXPECT_NEAR(m.mean, mean, 4.0 * std::sqrt(var / n)) << what << " mean";
  EXPECT_NEAR(m.variance, var, 4.0 * std::sqrt((mu4 - var * var) / n)) << what << " variance";
}

TEST(Moments, StandardNormal) {
  Rng rng(2, 0);
  expect_moments(draws(kMillion, [&] { return rng.normal(); }), 0.0, 1.0, 3.0, "normal");
}

TEST(Moments, Exponential) {
  Rng rng(3, 0);
  expect_moments(draws(kMillion, [&] { return rng.exponential(); }), 1.0, 1.0, 9.0,
                 "exponential");
}

TEST(Moments, Gamma) {
  Rng rng(4, 0);
  for (double shape : {0.3, 1.0, 2.5, 12.0}) {
    const double rate = 2.0;
    const double var = shape / (rate * rate);
    const double mu4 = var * var * (3.0 + 6.0 / shape);
    expect_moments(draws(kMillion, [&] { return sample_gamma(shape, rate, rng); }),
                   shape / rate, var, mu4, "gamma");
  }
}

TEST(Moments, InverseGaussian) {
  Rng rng(5, 0);
  for (auto [mu, lambda] : {std::pair{2.0, 4.0}, std::pair{0.5, 10.0}}) {
    const double var = mu * mu * mu / lambda;
    const double mu4 = var * var * (3.0 + 15.0 * mu / lambda);
    expect_moments(draws(kMillion, [&] { return sample_inverse_gaussian(mu, lambda, rng); }), mu,
                   var, mu4, "inverse gaussian");
  }
}

TEST(Exactness, SuiteChecksPass) {
  for (const auto& c : testing::sampler_exactness_checks()) EXPECT_TRUE(c.pass) << c.describe();
}

TEST(InverseGaussian, CdfAtAnalyticMedian) {
  auto cdf = [](double x) {
    const double s = std::sqrt(1.0 / x);
    return normal_cdf(s * (x - 1.0)) + std::exp(2.0) * normal_cdf(-s * (x + 1.0));
  };
  double lo = 0.01, hi = 10.0;
  for (int it = 0; it < 200; ++it) {
    const double mid = 0.5 * (lo + hi);
    (cdf(mid) < 0.5 ? lo : hi) = mid;
  }
  const double median = 0.5 * (lo + hi);
  Rng rng(6, 0);
  std::size_t below = 0;
  for (std::size_t k = 0; k < kMillion; ++k) below += sample_inverse_gaussian(1.0, 1.0, rng) <= median;
  EXPECT_NEAR(static_cast<double>(below) / kMillion, 0.5, 0.005);
}

TEST(InverseGaussian, RejectsBadParameters) {
  Rng rng(1, 0);
  const double inf = std::numeric_limits<double>::infinity();
  EXPECT_THROW(sample_inverse_gaussian(inf, 1.0, rng), ParameterError);
  EXPECT_THROW(sample_inverse_gaussian(1.0, std::nan(""), rng), ParameterError);
  EXPECT_THROW(sample_inverse_gaussian(0.0, 1.0, rng), ParameterError);
  EXPECT_THROW(sample_inverse_gaussian(1.0, -1.0, rng), ParameterError);
}

TEST(GigHalf, ZeroChiIsGamma) {
  Rng rng(7, 0);
  const auto gig = draws(100000, [&] { return sample_gig_half(3.0, 0.0, rng); });
  const auto gam = draws(100000, [&] { return sample_gamma(0.5, 1.5, rng); });
  EXPECT_LT(testing::ks_two_sample(gig, gam), 0.01);
}

TEST(GigHalf, ReciprocalIsInverseGaussian) {
  Rng rng(8, 0);
  const double a = 2.0, b = 3.0;
  const auto inv = draws(kMillion, [&] { return 1.0 / sample_gig_half(a, b, rng); });
  const auto ig = draws(kMillion, [&] { return sample_inverse_gaussian(std::sqrt(a / b), a, rng); });
  const auto mi = moments(inv), mg = moments(ig);
  EXPECT_NEAR(mi.mean / mg.mean, 1.0, 0.01);
  EXPECT_NEAR(mi.variance / mg.variance, 1.0, 0.01);
  EXPECT_NEAR(mi.mean, std::sqrt(a / b), 0.01 * std::sqrt(a / b));
}

TEST(GigHalf, RejectsBadParameters) {
  Rng rng(1, 0);
  EXPECT_THROW(sample_gig_half(0.0, 1.0, rng), ParameterError);
  EXPECT_THROW(sample_gig_half(-1.0, 1.0, rng), ParameterError);
  EXPECT_THROW(sample_gig_half(1.0, -1.0, rng), ParameterError);
}

TEST(Gig, GeneralOrderMeansMatchBesselRatio) {
  Rng rng(9, 0);
  struct Case { double p, a, b; };
  for (const Case c : {Case{-2.5, 1.0, 3.0}, Case{2.0, 0.5, 1.5}, Case{0.3, 0.05, 0.02},
                       Case{-0.7, 8.0, 0.4}, Case{-40.0, 2.0, 30.0}}) {
    const double w = std::sqrt(c.a * c.b);
    const double target = std::sqrt(c.b / c.a) *
                          std::exp(log_bessel_k(c.p + 1.0, w) - log_bessel_k(c.p, w));
    const auto m = moments(draws(400000, [&] { return sample_gig(c.p, c.a, c.b, rng); }));
    EXPECT_NEAR(m.mean / target, 1.0, 0.01) << "p=" << c.p << " a=" << c.a << " b=" << c.b;
  }
}

TEST(Gig, BoundaryCasesAreGammaOrInverseGamma) {
  Rng rng(10, 0);
  const auto g = moments(draws(400000, [&] { return sample_gig(2.0, 3.0, 0.0, rng); }));
  EXPECT_NEAR(g.mean, 2.0 / 1.5, 0.01);
  const auto ig = moments(draws(400000, [&] { return sample_gig(-3.0, 0.0, 4.0, rng); }));
  EXPECT_NEAR(ig.mean, 2.0 / (3.0 - 1.0), 0.01);
  EXPECT_THROW(sample_gig(-1.0, 1.0, 0.0, rng), ParameterError);
  EXPECT_THROW(sample_gig(1.0, 0.0, 1.0, rng), ParameterError);
}

TEST(BesselK, MatchesStandardLibrary) {
  for (double nu : {0.0, 0.5, 1.5, 3.2, 10.0}) {
    for (double x : {0.1, 1.0, 5.0, 30.0}) {
      const double expected = std::log(std::cyl_bessel_k(nu, x));
      EXPECT_NEAR(log_bessel_k(nu, x), expected, 1e-9 * std::max(1.0, std::abs(expected)))
          << "nu=" << nu << " x=" << x;
    }
  }
  EXPECT_NEAR(log_bessel_k(-2.0, 3.0), log_bessel_k(2.0, 3.0), 1e-14);
  EXPECT_TRUE(std::isfinite(log_bessel_k(500.0, 1e-3)));
  EXPECT_THROW(log_bessel_k(1.0, 0.0), ParameterError);
}

TEST(PolyaGamma, MeanAtZero) {
  Rng rng(11, 0);
  EXPECT_NEAR(moments(draws(kMillion, [&] { return sample_polya_gamma_1(0.0, rng); })).mean, 0.25,
              0.002);
}

TEST(PolyaGamma, MeanMatchesClosedFormAcrossTilts) {
  Rng rng(12, 0);
  for (double c : {0.5, 2.0, 7.0, 30.0}) {
    const double target = std::tanh(c / 2.0) / (2.0 * c);
    const auto m = moments(draws(400000, [&] { return sample_polya_gamma_1(c, rng); }));
    EXPECT_NEAR(m.mean / target, 1.0, 0.01) << "c=" << c;
  }
}

TEST(PolyaGamma, SignInvariance) {
  Rng rng(13, 0);
  const auto pos = draws(100000, [&] { return sample_polya_gamma_1(1.7, rng); });
  const auto neg = draws(100000, [&] { return sample_polya_gamma_1(-1.7, rng); });
  EXPECT_LT(testing::ks_two_sample(pos, neg), 0.01);
}

TEST(PolyaGamma, AgreesWithTruncatedSeriesDefinition) {
  // PG(1, c) = (1 / 2 pi^2) sum_k g_k / ((k - 1/2)^2 + c^2 / (4 pi^2)), g_k ~ Exp(1);
  // the first K terms are simulated and the tail replaced by its mean.
  const double c = 2.0;
  const double pi2 = std::numbers::pi * std::numbers::pi;
  constexpr int kTerms = 200;
  double tail = 0.0;
  for (int k = kTerms + 1; k < 2'000'000; ++k) {
    tail += 1.0 / ((k - 0.5) * (k - 0.5) + c * c / (4.0 * pi2));
  }
  tail /= 2.0 * pi2;
  Rng rng(14, 0);
  const auto series = draws(40000, [&] {
    double s = 0.0;
    for (int k = 1; k <= kTerms; ++k) s += rng.exponential() / ((k - 0.5) * (k - 0.5) + c * c / (4.0 * pi2));
    return s / (2.0 * pi2) + tail;
  });
  const auto direct = draws(40000, [&] { return sample_polya_gamma_1(c, rng); });
  const auto ms = moments(series), md = moments(direct);
  EXPECT_NEAR(ms.mean, std::tanh(1.0) / 4.0, 4.0 * std::sqrt(ms.variance / 40000.0));
  EXPECT_NEAR(ms.mean, md.mean, 4.0 * std::sqrt((ms.variance + md.variance) / 40000.0));
  EXPECT_LT(testing::ks_two_sample(series, direct), testing::ks_two_sample_critical(40000, 40000));
}

TEST(PolyaGamma, RejectsNonFiniteTilt) {
  Rng rng(1, 0);
  EXPECT_THROW(sample_polya_gamma_1(std::numeric_limits<double>::infinity(), rng), ParameterError);
}

TEST(Dirichlet, SingleComponentIsOne) {
  Rng rng(15, 0);
  for (int k = 0; k < 100; ++k) EXPECT_EQ(sample_dirichlet(std::vector<double>{0.3}, rng)[0], 1.0);
}

TEST(Dirichlet, ComponentMeansAndSimplex) {
  Rng rng(16, 0);
  for (const auto& alphas : {std::vector<double>{1.0, 1.0}, std::vector<double>{2.0, 1.0},
                             std::vector<double>{0.05, 0.05, 0.05}}) {
    double total = 0.0;
    for (double a : alphas) total += a;
    std::vector<double> mean(alphas.size(), 0.0);
    constexpr int kN = 100000;
    for (int k = 0; k < kN; ++k) {
      const auto phi = sample_dirichlet(alphas, rng);
      double s = 0.0;
      for (std::size_t r = 0; r < phi.size(); ++r) {
        ASSERT_GT(phi[r], 0.0);
        s += phi[r];
        mean[r] += phi[r] / kN;
      }
      ASSERT_NEAR(s, 1.0, 1e-12);
    }
    for (std::size_t r = 0; r < alphas.size(); ++r) EXPECT_NEAR(mean[r], alphas[r] / total, 0.01);
  }
}

TEST(Dirichlet, RejectsBadConcentrations) {
  Rng rng(1, 0);
  EXPECT_THROW(sample_dirichlet(std::vector<double>{1.0, 0.0}, rng), ParameterError);
  EXPECT_THROW(sample_dirichlet(std::vector<double>{}, rng), ParameterError);
}

TEST(Gamma, RejectsBadParameters) {
  Rng rng(1, 0);
  EXPECT_THROW(sample_gamma(0.0, 1.0, rng), ParameterError);
  EXPECT_THROW(sample_gamma(1.0, -2.0, rng), ParameterError);
}

TEST(Augmentation, SuiteChecksPass) {
  for (const auto& c : testing::augmentation_checks()) EXPECT_TRUE(c.pass) << c.describe();
}

TEST(Augmentation, HingeMixtureCarriesNoSigmaPrefactor) {
  // The mixture integral equals exp(-(2/sigma^2) max(1 - yf, 0)); the
  // sigma^-2 form of the pseudo-likelihood differs by the constant sigma^2.
  for (double sigma2 : {1.0, 6.0}) {
    for (double yf : {-1.0, 0.0, 0.5, 1.0, 2.0}) {
      const double scaled = std::exp(-2.0 / sigma2 * std::max(1.0 - yf, 0.0)) / sigma2;
      EXPECT_NEAR(testing::hinge_mixture_integral(yf, sigma2) / scaled, sigma2, 1e-6 * sigma2);
    }
  }
}

}  // namespace
}  // namespace btc
