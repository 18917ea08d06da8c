#ifndef BTC_TESTS_SUITES_HPP
#define BTC_TESTS_SUITES_HPP

// Check suites that are both unit-tested and reported by the acceptance
// binary: sampler exactness, augmentation identities and the structural
// identities behind the back-fitting margin updates.

#include <boost/math/quadrature/exp_sinh.hpp>

#include <cmath>
#include <cstdint>
#include <limits>
#include <numbers>
#include <string>
#include <vector>

#include "btc/distributions.hpp"
#include "btc/lr_sampler.hpp"
#include "btc/sampler.hpp"
#include "btc/svm_sampler.hpp"
#include "btc/tensor.hpp"
#include "support/checks.hpp"

namespace btc::testing {

inline std::string fmt(const char* pattern, double a, double b = 0.0) {
  char buf[128];
  std::snprintf(buf, sizeof buf, pattern, a, b);
  return buf;
}

/// PG, inverse-Gaussian and GIG(1/2) moment checks at N = 10^6.
inline std::vector<Check> sampler_exactness_checks(std::uint64_t seed = 11) {
  constexpr std::size_t kN = 1'000'000;
  std::vector<Check> out;
  Rng rng(seed, 0);

  const auto pg0 = moments(draws(kN, [&] { return sample_polya_gamma_1(0.0, rng); }));
  out.push_back(near("PG(1,0) mean", pg0.mean, 0.25, 0.002));

  const double pg2_target = std::tanh(1.0) / 4.0;
  const auto pg2 = moments(draws(kN, [&] { return sample_polya_gamma_1(2.0, rng); }));
  out.push_back(near("PG(1,2) mean", pg2.mean, pg2_target, 0.01 * pg2_target));

  // IG(mu, lambda): variance mu^3/lambda, fourth central moment
  // var^2 (3 + 15 mu / lambda).
  const double mu = 2.0, lambda = 4.0;
  const double var = mu * mu * mu / lambda;
  const auto ig = moments(draws(kN, [&] { return sample_inverse_gaussian(mu, lambda, rng); }));
  const double n = static_cast<double>(kN);
  out.push_back(near("IG(2,4) mean", ig.mean, mu, 4.0 * std::sqrt(var / n)));
  out.push_back(near("IG(2,4) variance", ig.variance, var,
                     4.0 * var * std::sqrt((2.0 + 15.0 * mu / lambda) / n)));

  for (auto [a, b] : {std::pair{1.0, 1.0}, std::pair{4.0, 4.0}, std::pair{0.5, 8.0}}) {
    const double target = std::sqrt(b / a) + 1.0 / a;
    const auto g = moments(draws(kN, [&] { return sample_gig_half(a, b, rng); }));
    out.push_back(near(fmt("GIG(1/2, %g, %g) mean", a, b), g.mean, target, 0.01 * target));
  }
  return out;
}

/// int_0^inf (sigma sqrt(2 pi rho))^-1 exp(-(1 + rho - yf)^2 / (2 rho sigma^2)) drho,
/// integrated in t = sqrt(rho) so the rho^-1/2 endpoint singularity disappears.
inline double hinge_mixture_integral(double yf, double sigma2) {
  const double a = 1.0 - yf;
  const double c = 2.0 / std::sqrt(2.0 * std::numbers::pi * sigma2);
  auto integrand = [&](double t) {
    if (t == 0.0) return a == 0.0 ? c : 0.0;
    const double u = (a + t * t) / t;
    return c * std::exp(-u * u / (2.0 * sigma2));
  };
  boost::math::quadrature::exp_sinh<double> integrator;
  return integrator.integrate(integrand, 1e-14);
}

/// Hinge mixture identity at yf in {-1, 0, 0.5, 1, 2} for sigma^2 in {1, 6}
/// (mixture equals exp(-(2/sigma^2) max(1 - yf, 0))), and the PG logistic
/// identity at psi in {-2, -0.5, 0, 0.5, 2} for both labels.
inline std::vector<Check> augmentation_checks(std::uint64_t seed = 12) {
  std::vector<Check> out;
  for (double sigma2 : {1.0, 6.0}) {
    for (double yf : {-1.0, 0.0, 0.5, 1.0, 2.0}) {
      const double closed = std::exp(-2.0 / sigma2 * std::max(1.0 - yf, 0.0));
      const double rel = std::abs(hinge_mixture_integral(yf, sigma2) / closed - 1.0);
      out.push_back(near(fmt("hinge mixture yf=%g sigma2=%g relative error", yf, sigma2), rel,
                         0.0, 1e-6));
    }
  }
  constexpr std::size_t kN = 1'000'000;
  Rng rng(seed, 0);
  const auto omega = draws(kN, [&] { return sample_polya_gamma_1(0.0, rng); });
  for (double psi : {-2.0, -0.5, 0.0, 0.5, 2.0}) {
    double tilt = 0.0;
    for (double w : omega) tilt += std::exp(-w * psi * psi / 2.0);
    tilt /= static_cast<double>(kN);
    for (double y : {0.0, 1.0}) {
      const double kappa = y - 0.5;
      const double mc = 0.5 * std::exp(kappa * psi) * tilt;
      const double exact = std::exp(y * psi) / (1.0 + std::exp(psi));
      out.push_back(near(fmt("PG identity psi=%g y=%g relative error", psi, y),
                         std::abs(mc / exact - 1.0), 0.0, 0.01));
    }
  }
  return out;
}

inline ParafacFactors random_factors(std::size_t rank, const Dims& dims, Rng& rng) {
  ParafacFactors f(rank, dims);
  for (std::size_t r = 0; r < rank; ++r) {
    for (std::size_t j = 0; j < dims.size(); ++j) {
      for (auto& v : f.margin(j, r)) v = rng.normal();
    }
  }
  return f;
}

inline DenseTensor random_tensor(const Dims& dims, Rng& rng) {
  DenseTensor t(dims);
  for (auto& v : t.values()) v = rng.normal();
  return t;
}

inline Dims random_dims(Rng& rng, std::size_t max_order = 3, std::size_t max_p = 6) {
  const std::size_t order = 2 + static_cast<std::size_t>(rng.uniform() * static_cast<double>(max_order - 1));
  Dims dims(order);
  for (auto& p : dims) p = 1 + static_cast<std::size_t>(rng.uniform() * static_cast<double>(max_p));
  return dims;
}

/// Largest |h . beta_j^(r) - <X, B_r>| over every (j, r) of `instances`
/// random (X, factors) pairs.
inline double design_row_identity_error(std::size_t instances, std::uint64_t seed) {
  Rng rng(seed, 1);
  double worst = 0.0;
  for (std::size_t k = 0; k < instances; ++k) {
    const Dims dims = random_dims(rng);
    const std::size_t rank = 1 + static_cast<std::size_t>(rng.uniform() * 4.0);
    const ParafacFactors f = random_factors(rank, dims, rng);
    const DenseTensor x = random_tensor(dims, rng);
    for (std::size_t r = 0; r < rank; ++r) {
      const double direct = tensor_inner(x, compose_component(f, r));
      for (std::size_t j = 0; j < dims.size(); ++j) {
        const auto h = mode_design_row(x, f, j, r);
        const auto beta = f.margin(j, r);
        double dot = 0.0;
        for (std::size_t q = 0; q < h.size(); ++q) dot += h[q] * beta[q];
        worst = std::max(worst, std::abs(dot - direct));
      }
    }
  }
  return worst;
}

inline Dataset random_dataset(const Dims& dims, std::size_t n, std::size_t extra,
                              LabelConvention convention, Rng& rng) {
  Dataset d;
  d.dims = dims;
  d.convention = convention;
  d.design.resize(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(cell_count(dims)));
  for (Eigen::Index i = 0; i < d.design.size(); ++i) d.design.data()[i] = rng.normal();
  d.covariates.resize(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(extra + 1));
  d.labels.resize(static_cast<Eigen::Index>(n));
  for (Eigen::Index i = 0; i < static_cast<Eigen::Index>(n); ++i) {
    d.covariates(i, 0) = 1.0;
    for (Eigen::Index k = 1; k <= static_cast<Eigen::Index>(extra); ++k) {
      d.covariates(i, k) = rng.normal();
    }
    const bool positive = rng.uniform() < 0.5;
    d.labels[i] = positive ? 1.0 : (convention == LabelConvention::PlusMinusOne ? -1.0 : 0.0);
  }
  return d;
}

/// Largest gap between the cached predictor and f recomputed from scratch
/// after each margin and gamma update.
template <class Loss>
double backfit_gap(const Dataset& data, ChainState<Loss>& state) {
  const Eigen::VectorXd cached = state.predictor();
  double worst = 0.0;
  for (std::size_t i = 0; i < data.size(); ++i) {
    const double f = linear_predictor(data.tensor(i), data.covariate_row(i), state.factors,
                                      state.gamma);
    worst = std::max(worst, std::abs(cached[static_cast<Eigen::Index>(i)] - f));
  }
  return worst;
}

template <class Loss>
double backfit_identity_error_one(const Dataset& data, Loss loss, Rng& rng) {
  FitConfig config;
  config.rank = 1 + static_cast<std::size_t>(rng.uniform() * 3.0);
  config.init_scale = 1.0;
  auto state = initial_state(data, config, loss, rng);
  const auto hyper = MdgdpHyper::defaults(config.rank, data.dims.size());
  double worst = 0.0;
  for (int sweep = 0; sweep < 2; ++sweep) {
    state.loss.draw_latent(data.labels, state.predictor(), state.latent, rng);
    Eigen::VectorXd weights, response;
    state.loss.working(data.labels, state.latent, weights, response);
    for (std::size_t r = 0; r < config.rank; ++r) {
      for (std::size_t j = 0; j < data.dims.size(); ++j) {
        update_margin(j, r, data, state, weights, response, rng);
        worst = std::max(worst, backfit_gap(data, state));
      }
    }
    update_gamma(data, state, weights, response, rng);
    worst = std::max(worst, backfit_gap(data, state));
    gibbs_sweep(data, state, hyper, rng);
    worst = std::max(worst, backfit_gap(data, state));
  }
  return worst;
}

/// Back-fitting residual identity over `instances` random datasets,
/// alternating the hinge and logistic kernels.
inline double backfit_identity_error(std::size_t instances, std::uint64_t seed) {
  Rng rng(seed, 2);
  double worst = 0.0;
  for (std::size_t k = 0; k < instances; ++k) {
    const Dims dims = random_dims(rng, 3, 5);
    const std::size_t n = 5 + static_cast<std::size_t>(rng.uniform() * 20.0);
    const std::size_t extra = static_cast<std::size_t>(rng.uniform() * 3.0);
    if (k % 2 == 0) {
      const auto data = random_dataset(dims, n, extra, LabelConvention::PlusMinusOne, rng);
      worst = std::max(worst, backfit_identity_error_one(data, HingeLoss{6.0}, rng));
    } else {
      const auto data = random_dataset(dims, n, extra, LabelConvention::ZeroOne, rng);
      worst = std::max(worst, backfit_identity_error_one(data, LogisticLoss{}, rng));
    }
  }
  return worst;
}

inline std::vector<Check> structural_checks(std::uint64_t seed = 13) {
  return {near("mode_design_row identity, 100 instances", design_row_identity_error(100, seed),
               0.0, 1e-8),
          near("back-fitting identity, 100 instances", backfit_identity_error(100, seed), 0.0,
               1e-8)};
}

}  // namespace btc::testing

#endif  // BTC_TESTS_SUITES_HPP
