#ifndef BTC_SVM_SAMPLER_HPP
#define BTC_SVM_SAMPLER_HPP

// BT-SVM: hinge pseudo-likelihood
//   L_i = sigma^-2 exp(-(2 / sigma^2) max(1 - y_i f_i, 0)),  y_i in {-1, +1},
// augmented with rho_i so that, given rho_i, the sample contributes
//   exp(-(1 + rho_i - y_i f_i)^2 / (2 rho_i sigma^2)).

#include <Eigen/Dense>

#include <cmath>
#include <span>
#include <vector>

#include "btc/distributions.hpp"
#include "btc/sampler.hpp"

namespace btc {

/// Lower clamp on |1 - y_i f_i| in the rho step.
inline constexpr double kHingeClamp = 1e-8;

/// log L_i for one sample under the hinge pseudo-likelihood.
inline double hinge_log_lik(double y, double f, double sigma2) {
  return -std::log(sigma2) - 2.0 / sigma2 * std::max(1.0 - y * f, 0.0);
}

struct HingeLoss {
  static constexpr LabelConvention kLabels = LabelConvention::PlusMinusOne;
  static constexpr Model kModel = Model::BtSvm;

  double sigma2 = 6.0;

  /// rho_i^-1 ~ InverseGaussian(|1 - y_i f_i|^-1, 1 / sigma2).
  void draw_latent(const Eigen::VectorXd& y, const Eigen::VectorXd& f,
                   Eigen::VectorXd& rho, Rng& rng) const {
    rho.resize(y.size());
    for (Eigen::Index i = 0; i < y.size(); ++i) {
      const double gap = std::max(std::abs(1.0 - y[i] * f[i]), kHingeClamp);
      rho[i] = detail::reciprocal_inverse_gaussian(gap, 1.0 / sigma2, rng);
    }
  }

  /// Weight 1 / (rho_i sigma^2) and working response y_i (1 + rho_i).
  void working(const Eigen::VectorXd& y, const Eigen::VectorXd& rho,
               Eigen::VectorXd& weights, Eigen::VectorXd& response) const {
    weights = (rho.array() * sigma2).inverse().matrix();
    response = (y.array() * (1.0 + rho.array())).matrix();
  }

  double log_lik(const Eigen::VectorXd& y, const Eigen::VectorXd& f) const {
    double total = 0.0;
    for (Eigen::Index i = 0; i < y.size(); ++i) total += hinge_log_lik(y[i], f[i], sigma2);
    return total;
  }
};

using SvmChainState = ChainState<HingeLoss>;

/// Latent rho update for labels y in {-1, +1} and predictors f.
inline Eigen::VectorXd update_rho(const Eigen::VectorXd& y, const Eigen::VectorXd& f,
                                  double sigma2, Rng& rng) {
  if (y.size() != f.size()) throw StructuralError("update_rho: y and f lengths differ");
  for (Eigen::Index i = 0; i < y.size(); ++i) {
    if (y[i] != 1.0 && y[i] != -1.0) throw StructuralError("update_rho: labels must be +-1");
  }
  Eigen::VectorXd rho;
  HingeLoss{sigma2}.draw_latent(y, f, rho, rng);
  return rho;
}

inline std::vector<double> update_margin_svm(std::size_t j, std::size_t r, const Dataset& data,
                                             SvmChainState& state, Rng& rng) {
  Eigen::VectorXd weights, response;
  state.loss.working(data.labels, state.latent, weights, response);
  return update_margin(j, r, data, state, weights, response, rng);
}

inline std::vector<double> update_gamma_svm(const Dataset& data, SvmChainState& state,
                                            Rng& rng) {
  Eigen::VectorXd weights, response;
  state.loss.working(data.labels, state.latent, weights, response);
  return update_gamma(data, state, weights, response, rng);
}

inline ChainOutput run_chain_svm(const Dataset& data, const FitConfig& config) {
  return run_chain(data, config, HingeLoss{config.sigma2});
}

}  // namespace btc

#endif  // BTC_SVM_SAMPLER_HPP
