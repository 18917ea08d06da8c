#ifndef BTC_SAMPLER_HPP
#define BTC_SAMPLER_HPP

// Data-augmented Gibbs kernel shared by the hinge and logistic models.
//
// Conditional on the latent augmentation variables both pseudo-likelihoods
// are Gaussian in the linear predictor f: each sample contributes
// exp(-v_i (t_i - f_i)^2 / 2) for a per-sample weight v_i and working
// response t_i. A loss policy supplies the latent draw and (v, t); the
// margin and gamma steps below are then conjugate Gaussian regressions.
//
// A loss policy must provide:
//   static constexpr LabelConvention kLabels;  static constexpr Model kModel;
//   void draw_latent(labels, f, latent&, rng) const;
//   void working(labels, latent, weights&, response&) const;
//   double log_lik(labels, f) const;

#include <Eigen/Cholesky>
#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <sstream>
#include <utility>
#include <vector>

#include "btc/chain.hpp"
#include "btc/dataset.hpp"
#include "btc/distributions.hpp"
#include "btc/error.hpp"
#include "btc/prior.hpp"
#include "btc/rng.hpp"
#include "btc/tensor.hpp"

namespace btc {

template <class Loss>
struct ChainState {
  ParafacFactors factors;
  std::vector<double> gamma;
  Eigen::VectorXd latent;  // rho for the hinge model, omega for the logistic model
  MdgdpState prior;
  Loss loss;
  double gamma_prior_precision = 0.01;

  // Back-fitting caches: component_inner(i, r) = <X_i, B_r>, z_gamma = Z gamma.
  Eigen::MatrixXd component_inner;
  Eigen::VectorXd z_gamma;

  Eigen::VectorXd predictor() const {
    return component_inner.rowwise().sum() + z_gamma;
  }
};

/// Recompute the back-fitting caches from the current factors and gamma.
template <class Loss>
void refresh_caches(const Dataset& data, ChainState<Loss>& state) {
  const auto n = static_cast<Eigen::Index>(data.size());
  const auto R = state.factors.rank();
  const std::size_t last = state.factors.order() - 1;
  state.component_inner.resize(n, static_cast<Eigen::Index>(R));
  RowMatrix h;
  for (std::size_t r = 0; r < R; ++r) {
    mode_design_matrix(data.design, state.factors, last, r, h);
    const auto m = state.factors.margin(last, r);
    const Eigen::Map<const Eigen::VectorXd> beta(m.data(), static_cast<Eigen::Index>(m.size()));
    state.component_inner.col(static_cast<Eigen::Index>(r)) = h * beta;
  }
  const Eigen::Map<const Eigen::VectorXd> g(state.gamma.data(),
                                            static_cast<Eigen::Index>(state.gamma.size()));
  state.z_gamma = data.covariates * g;
}

/// Draw from N(P^-1 b, P^-1) given the precision P and linear term b.
inline Eigen::VectorXd draw_gaussian_from_precision(const Eigen::MatrixXd& precision,
                                                    const Eigen::VectorXd& linear,
                                                    Rng& rng) {
  Eigen::LLT<Eigen::MatrixXd> llt(precision);
  if (llt.info() != Eigen::Success) {
    std::ostringstream msg;
    msg << "precision matrix of size " << precision.rows()
        << " is not positive definite (min diagonal " << precision.diagonal().minCoeff()
        << ", max diagonal " << precision.diagonal().maxCoeff() << ")";
    throw NumericError(msg.str());
  }
  Eigen::VectorXd noise(precision.rows());
  for (Eigen::Index k = 0; k < noise.size(); ++k) noise[k] = rng.normal();
  Eigen::VectorXd draw = llt.solve(linear);
  draw += llt.matrixU().solve(noise);
  return draw;
}

/// Conjugate update of margin (j, r): weighted regression of the residual
/// working response on the mode-j design rows, under the N(0, phi_r tau W_jr)
/// prior. The cached <X_i, B_r> column is refreshed from the new margin.
template <class Loss>
std::vector<double> update_margin(std::size_t j, std::size_t r, const Dataset& data,
                                  ChainState<Loss>& state, const Eigen::VectorXd& weights,
                                  const Eigen::VectorXd& response, Rng& rng) {
  RowMatrix h;
  mode_design_matrix(data.design, state.factors, j, r, h);
  const auto rc = static_cast<Eigen::Index>(r);

  const Eigen::VectorXd offset =
      state.z_gamma + state.component_inner.rowwise().sum() - state.component_inner.col(rc);
  const Eigen::VectorXd target = response - offset;

  const Eigen::MatrixXd hw = weights.cwiseSqrt().asDiagonal() * h;
  Eigen::MatrixXd precision = hw.transpose() * hw;
  const double scale = state.prior.phi[r] * state.prior.tau;
  const auto& w = state.prior.w_at(j, r);
  for (Eigen::Index k = 0; k < precision.rows(); ++k) {
    precision(k, k) += 1.0 / (scale * w[static_cast<std::size_t>(k)]);
  }
  const Eigen::VectorXd linear = h.transpose() * weights.cwiseProduct(target);
  const Eigen::VectorXd beta = draw_gaussian_from_precision(precision, linear, rng);

  std::vector<double> out(beta.data(), beta.data() + beta.size());
  state.factors.set_margin(j, r, out);
  state.component_inner.col(rc) = h * beta;
  return out;
}

/// Conjugate update of gamma given B, with independent N(0, 1/precision)
/// priors on each coefficient.
template <class Loss>
std::vector<double> update_gamma(const Dataset& data, ChainState<Loss>& state,
                                 const Eigen::VectorXd& weights,
                                 const Eigen::VectorXd& response, Rng& rng) {
  const Eigen::VectorXd target = response - state.component_inner.rowwise().sum();
  const Eigen::MatrixXd gw = weights.cwiseSqrt().asDiagonal() * data.covariates;
  Eigen::MatrixXd precision = gw.transpose() * gw;
  precision.diagonal().array() += state.gamma_prior_precision;
  const Eigen::VectorXd linear = data.covariates.transpose() * weights.cwiseProduct(target);
  const Eigen::VectorXd g = draw_gaussian_from_precision(precision, linear, rng);
  state.gamma.assign(g.data(), g.data() + g.size());
  state.z_gamma = data.covariates * g;
  return state.gamma;
}

/// Starting state: margins ~ N(0, init_scale^2) unless a warm start is given,
/// gamma = 0, neutral prior state.
template <class Loss>
ChainState<Loss> initial_state(const Dataset& data, const FitConfig& config, Loss loss,
                               Rng& rng) {
  ChainState<Loss> state;
  state.factors = ParafacFactors(config.rank, data.dims);
  for (std::size_t r = 0; r < config.rank; ++r) {
    for (std::size_t j = 0; j < data.dims.size(); ++j) {
      for (auto& b : state.factors.margin(j, r)) b = config.init_scale * rng.normal();
    }
  }
  if (config.initial_factors) {
    if (config.initial_factors->dims() != data.dims) {
      throw StructuralError("initial factors have dims " + dims_string(config.initial_factors->dims()) +
                            ", data has " + dims_string(data.dims));
    }
    state.factors = *config.initial_factors;
  }
  state.gamma.assign(data.covariate_count(), 0.0);
  state.latent = Eigen::VectorXd::Ones(static_cast<Eigen::Index>(data.size()));
  state.prior = MdgdpState::initial(config.rank, data.dims);
  state.loss = std::move(loss);
  state.gamma_prior_precision = config.gamma_prior_precision;
  refresh_caches(data, state);
  return state;
}

struct SweepInfo {
  bool phi_accepted = true;
};

/// One full sweep: latent variables, (Phi, tau), back-fitted margins with
/// their local scales, then gamma.
template <class Loss>
SweepInfo gibbs_sweep(const Dataset& data, ChainState<Loss>& state, const MdgdpHyper& hyper,
                      Rng& rng, bool random_scan = false) {
  SweepInfo info;
  const Eigen::VectorXd f = state.predictor();
  state.loss.draw_latent(data.labels, f, state.latent, rng);
  Eigen::VectorXd weights, response;
  state.loss.working(data.labels, state.latent, weights, response);

  const auto global = update_global_scales(state.factors, state.prior, hyper, rng);
  state.prior.phi = global.phi;
  state.prior.tau = global.tau;
  info.phi_accepted = global.proposal_accepted;

  std::vector<std::pair<std::size_t, std::size_t>> order;
  for (std::size_t r = 0; r < state.factors.rank(); ++r) {
    for (std::size_t j = 0; j < state.factors.order(); ++j) order.emplace_back(j, r);
  }
  if (random_scan) {
    for (std::size_t k = order.size(); k > 1; --k) {
      const auto pick = static_cast<std::size_t>(rng.uniform() * static_cast<double>(k));
      std::swap(order[k - 1], order[std::min(pick, k - 1)]);
    }
  }
  for (const auto& [j, r] : order) {
    auto local = update_local_scales(state.factors.margin(j, r), state.prior.phi[r],
                                     state.prior.tau, hyper, rng);
    state.prior.lambda_at(j, r) = local.lambda;
    state.prior.w_at(j, r) = std::move(local.w);
    update_margin(j, r, data, state, weights, response, rng);
  }
  update_gamma(data, state, weights, response, rng);
  return info;
}

template <class Loss>
ChainOutput run_chain(const Dataset& data, const FitConfig& config, Loss loss) {
  config.validate();
  data.validate();
  if (data.convention != Loss::kLabels) {
    throw ConfigError(to_string(Loss::kModel) + " requires " + to_string(Loss::kLabels) +
                      " labels, dataset uses " + to_string(data.convention));
  }
  const MdgdpHyper hyper = config.resolved_hyper(data.dims.size());
  hyper.validate();

  Rng rng(config.seed, config.stream);
  ChainState<Loss> state = initial_state(data, config, std::move(loss), rng);

  ChainOutput out;
  out.model = Loss::kModel;
  out.config = config;
  out.config.hyper = hyper;
  out.dims = data.dims;
  out.covariate_count = data.covariate_count();
  const auto kept = static_cast<Eigen::Index>(config.kept_draws());
  out.b_draws.resize(kept, static_cast<Eigen::Index>(cell_count(data.dims)));
  out.gamma_draws.resize(kept, static_cast<Eigen::Index>(data.covariate_count()));
  out.phi_draws.resize(kept, static_cast<Eigen::Index>(config.rank));
  out.tau_draws.reserve(static_cast<std::size_t>(kept));
  out.loglik.reserve(config.iterations);

  Eigen::Index slot = 0;
  for (std::size_t it = 0; it < config.iterations; ++it) {
    const auto info = gibbs_sweep(data, state, hyper, rng, config.random_scan);
    if (!info.phi_accepted) ++out.phi_proposals_rejected;
    out.loglik.push_back(state.loss.log_lik(data.labels, state.predictor()));
    if (it >= config.burnin && (it - config.burnin) % config.thin == 0) {
      const DenseTensor b = parafac_compose(state.factors);
      out.b_draws.row(slot) =
          Eigen::Map<const Eigen::RowVectorXd>(b.values().data(), static_cast<Eigen::Index>(b.size()));
      for (std::size_t k = 0; k < state.gamma.size(); ++k) {
        out.gamma_draws(slot, static_cast<Eigen::Index>(k)) = state.gamma[k];
      }
      for (std::size_t r = 0; r < config.rank; ++r) {
        out.phi_draws(slot, static_cast<Eigen::Index>(r)) = state.prior.phi[r];
      }
      out.tau_draws.push_back(state.prior.tau);
      out.kept_iterations.push_back(it);
      if (config.keep_margins) out.margin_draws.push_back(state.factors);
      ++slot;
    }
  }
  out.final_factors = state.factors;
  return out;
}

}  // namespace btc

#endif  // BTC_SAMPLER_HPP
