#ifndef BTC_LR_SAMPLER_HPP
#define BTC_LR_SAMPLER_HPP

// BT-LR: Bernoulli likelihood e^{y f} / (1 + e^f), y in {0, 1}, augmented
// with omega_i ~ PG(1, f_i) so that, given omega_i, the sample contributes
//   exp(kappa_i f_i - omega_i f_i^2 / 2),  kappa_i = y_i - 1/2.

#include <Eigen/Dense>

#include <cmath>
#include <vector>

#include "btc/distributions.hpp"
#include "btc/sampler.hpp"

namespace btc {

/// log(1 + e^f) without overflow.
inline double log1p_exp(double f) {
  return std::max(f, 0.0) + std::log1p(std::exp(-std::abs(f)));
}

/// Bernoulli log-likelihood y f - log(1 + e^f) for y in {0, 1}, written as
/// -log(1 + e^(-f)) when y = 1 so large positive f does not cancel.
inline double logistic_log_lik(double y, double f) {
  return y > 0.5 ? -log1p_exp(-f) : -log1p_exp(f);
}

/// e^f / (1 + e^f), evaluated on the side that cannot overflow.
inline double logistic(double f) {
  if (f >= 0.0) return 1.0 / (1.0 + std::exp(-f));
  const double e = std::exp(f);
  return e / (1.0 + e);
}

struct LogisticLoss {
  static constexpr LabelConvention kLabels = LabelConvention::ZeroOne;
  static constexpr Model kModel = Model::BtLr;

  void draw_latent(const Eigen::VectorXd& /*y*/, const Eigen::VectorXd& f,
                   Eigen::VectorXd& omega, Rng& rng) const {
    omega.resize(f.size());
    for (Eigen::Index i = 0; i < f.size(); ++i) omega[i] = sample_polya_gamma_1(f[i], rng);
  }

  /// Weight omega_i and working response kappa_i / omega_i.
  void working(const Eigen::VectorXd& y, const Eigen::VectorXd& omega,
               Eigen::VectorXd& weights, Eigen::VectorXd& response) const {
    weights = omega;
    response = ((y.array() - 0.5) / omega.array()).matrix();
  }

  double log_lik(const Eigen::VectorXd& y, const Eigen::VectorXd& f) const {
    double total = 0.0;
    for (Eigen::Index i = 0; i < y.size(); ++i) total += logistic_log_lik(y[i], f[i]);
    return total;
  }
};

using LrChainState = ChainState<LogisticLoss>;

inline Eigen::VectorXd update_omega(const Eigen::VectorXd& f, Rng& rng) {
  Eigen::VectorXd omega;
  LogisticLoss{}.draw_latent(f, f, omega, rng);
  return omega;
}

inline std::vector<double> update_margin_lr(std::size_t j, std::size_t r, const Dataset& data,
                                            LrChainState& state, Rng& rng) {
  Eigen::VectorXd weights, response;
  state.loss.working(data.labels, state.latent, weights, response);
  return update_margin(j, r, data, state, weights, response, rng);
}

inline std::vector<double> update_gamma_lr(const Dataset& data, LrChainState& state, Rng& rng) {
  Eigen::VectorXd weights, response;
  state.loss.working(data.labels, state.latent, weights, response);
  return update_gamma(data, state, weights, response, rng);
}

inline ChainOutput run_chain_lr(const Dataset& data, const FitConfig& config) {
  return run_chain(data, config, LogisticLoss{});
}

}  // namespace btc

#endif  // BTC_LR_SAMPLER_HPP
