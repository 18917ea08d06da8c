#ifndef BTC_PRIOR_HPP
#define BTC_PRIOR_HPP

// Multiway Dirichlet generalized double Pareto (M-DGDP) shrinkage prior on
// PARAFAC margins:
//
//   beta_j^(r) ~ N(0, phi_r * tau * W_jr),   w_jr,k ~ Exp(rate lambda_jr^2 / 2),
//   lambda_jr ~ Ga(a_lambda, b_lambda),      tau ~ Ga(a_tau, b_tau),
//   (phi_1..phi_R) ~ Dirichlet(alpha, ..., alpha).
//
// Gamma distributions use the shape/rate convention.

#include <cmath>
#include <span>
#include <vector>

#include "btc/distributions.hpp"
#include "btc/error.hpp"
#include "btc/rng.hpp"
#include "btc/tensor.hpp"

namespace btc {

/// Lower clamp applied to tau, phi_r and w_jr,k.
inline constexpr double kScaleFloor = 1e-12;

struct MdgdpHyper {
  double a_tau = 1.0;
  double b_tau = 1.0;
  double alpha = 1.0;
  double a_lambda = 3.0;
  double b_lambda = 1.0;

  /// Default settings for rank R and order D: alpha = 1/R, a_tau = R alpha,
  /// b_tau = alpha R^(1/D), a_lambda = 3, b_lambda = a_lambda^(1/(2D)).
  static MdgdpHyper defaults(std::size_t rank, std::size_t order) {
    MdgdpHyper h;
    const double R = static_cast<double>(rank);
    const double D = static_cast<double>(order);
    h.alpha = 1.0 / R;
    h.a_tau = R * h.alpha;
    h.b_tau = h.alpha * std::pow(R, 1.0 / D);
    h.a_lambda = 3.0;
    h.b_lambda = std::pow(h.a_lambda, 1.0 / (2.0 * D));
    return h;
  }

  void validate() const {
    for (double v : {a_tau, b_tau, alpha, a_lambda, b_lambda}) {
      if (!(v > 0.0) || !std::isfinite(v)) {
        throw ParameterError("M-DGDP hyperparameters must be positive and finite");
      }
    }
  }
};

struct MdgdpState {
  double tau = 1.0;
  std::vector<double> phi;                  // length R, on the simplex
  std::vector<double> lambda;               // R x D, index r * D + j
  std::vector<std::vector<double>> w;       // R x D vectors of length p_j

  std::size_t rank() const { return phi.size(); }
  std::size_t order() const { return rank() ? lambda.size() / rank() : 0; }

  double& lambda_at(std::size_t j, std::size_t r) { return lambda[r * order() + j]; }
  double lambda_at(std::size_t j, std::size_t r) const { return lambda[r * order() + j]; }
  std::vector<double>& w_at(std::size_t j, std::size_t r) { return w[r * order() + j]; }
  const std::vector<double>& w_at(std::size_t j, std::size_t r) const {
    return w[r * order() + j];
  }

  /// Neutral starting point: tau = 1, phi uniform, unit rates and scales.
  static MdgdpState initial(std::size_t rank, const Dims& dims) {
    MdgdpState s;
    s.tau = 1.0;
    s.phi.assign(rank, 1.0 / static_cast<double>(rank));
    s.lambda.assign(rank * dims.size(), 1.0);
    s.w.resize(rank * dims.size());
    for (std::size_t r = 0; r < rank; ++r) {
      for (std::size_t j = 0; j < dims.size(); ++j) {
        s.w[r * dims.size() + j].assign(dims[j], 1.0);
      }
    }
    return s;
  }

  /// Throws if any positivity or simplex invariant is violated.
  void check_invariants() const {
    if (!(tau > 0.0) || !std::isfinite(tau)) throw NumericError("tau not positive");
    double total = 0.0;
    for (double p : phi) {
      if (!(p > 0.0) || !(p <= 1.0)) throw NumericError("phi outside (0,1]");
      total += p;
    }
    if (std::abs(total - 1.0) > 1e-9) throw NumericError("phi off the simplex");
    for (double l : lambda) {
      if (!(l > 0.0) || !std::isfinite(l)) throw NumericError("lambda not positive");
    }
    for (const auto& v : w) {
      for (double x : v) {
        if (!(x > 0.0) || !std::isfinite(x)) throw NumericError("w not positive");
      }
    }
  }
};

/// Draw one state from the prior (margins excluded).
inline MdgdpState sample_prior_state(std::size_t rank, const Dims& dims,
                                     const MdgdpHyper& hyper, Rng& rng) {
  MdgdpState s = MdgdpState::initial(rank, dims);
  std::vector<double> alphas(rank, hyper.alpha);
  s.phi = sample_dirichlet(alphas, rng);
  s.tau = std::max(sample_gamma(hyper.a_tau, hyper.b_tau, rng), kScaleFloor);
  for (std::size_t r = 0; r < rank; ++r) {
    for (std::size_t j = 0; j < dims.size(); ++j) {
      const double lam = sample_gamma(hyper.a_lambda, hyper.b_lambda, rng);
      s.lambda_at(j, r) = lam;
      for (auto& x : s.w_at(j, r)) {
        x = std::max(sample_gamma(1.0, lam * lam / 2.0, rng), kScaleFloor);
      }
    }
  }
  for (auto& p : s.phi) p = std::max(p, kScaleFloor);
  return s;
}

struct LocalScales {
  double lambda;
  std::vector<double> w;
};

/// [w_jr, lambda_jr | beta_j^(r), phi_r, tau]: lambda from its Gamma
/// conditional with w integrated out, then each w_jr,k from GIG(1/2, .).
inline LocalScales update_local_scales(std::span<const double> beta, double phi_r,
                                       double tau, const MdgdpHyper& hyper, Rng& rng) {
  const double scale = phi_r * tau;
  if (!(scale > 0.0) || !std::isfinite(scale)) {
    throw ParameterError("update_local_scales: phi_r * tau must be positive");
  }
  double l1 = 0.0;
  for (double b : beta) l1 += std::abs(b);
  LocalScales out;
  out.lambda = sample_gamma(hyper.a_lambda + static_cast<double>(beta.size()),
                            hyper.b_lambda + l1 / std::sqrt(scale), rng);
  out.w.resize(beta.size());
  const double a = out.lambda * out.lambda;
  for (std::size_t k = 0; k < beta.size(); ++k) {
    out.w[k] = std::max(sample_gig_half(a, beta[k] * beta[k] / scale, rng), kScaleFloor);
  }
  return out;
}

struct GlobalScales {
  std::vector<double> phi;
  double tau;
  bool used_prior_fallback = false;
  bool proposal_accepted = true;
};

namespace detail {

// log of int Ga(tau; shape, rate) * tau^(-m/2) exp(-S/(2 tau)) dtau, up to
// terms that do not depend on S.
inline double log_tau_marginal(double shape, double rate, double half_total, double s) {
  const double nu = shape - half_total;
  return 0.5 * nu * std::log(s / (2.0 * rate)) +
         log_bessel_k(nu, std::sqrt(2.0 * rate * s)) +
         shape * std::log(rate) - std::lgamma(shape);
}

}  // namespace detail

/// [Phi, tau | B, W] drawn compositionally as [Phi | B, W][tau | Phi, B, W].
///
/// Phi: with psi_r = phi_r * tau, psi_r ~ GIG(alpha - P/2, 2 b_tau, C_r)
/// independently and Phi = psi / sum(psi) is an exact draw when
/// a_tau = R * alpha. For other a_tau the same draw is used as an
/// independence proposal, corrected by a Metropolis-Hastings step on the
/// tau-marginalized target. tau is then drawn exactly from
/// GIG(a_tau - R P / 2, 2 b_tau, sum_r C_r / phi_r).
/// Here P = sum_j p_j and C_r = sum_j beta_j^(r)' W_jr^-1 beta_j^(r).
inline GlobalScales update_global_scales(const ParafacFactors& factors,
                                         const MdgdpState& state,
                                         const MdgdpHyper& hyper, Rng& rng) {
  const std::size_t R = factors.rank();
  const std::size_t D = factors.order();
  if (state.rank() != R || state.order() != D) {
    throw StructuralError("update_global_scales: state does not match factors");
  }
  double total_dim = 0.0;
  for (auto p : factors.dims()) total_dim += static_cast<double>(p);

  std::vector<double> c(R, 0.0);
  bool degenerate = false;
  for (std::size_t r = 0; r < R; ++r) {
    for (std::size_t j = 0; j < D; ++j) {
      const auto b = factors.margin(j, r);
      const auto& w = state.w_at(j, r);
      for (std::size_t k = 0; k < b.size(); ++k) c[r] += b[k] * b[k] / w[k];
    }
    if (!(c[r] > 0.0) || !std::isfinite(c[r])) degenerate = true;
  }

  GlobalScales out;
  if (degenerate) {
    // All-zero margins leave the GIG conditionals improper.
    std::vector<double> alphas(R, hyper.alpha);
    out.phi = sample_dirichlet(alphas, rng);
    out.tau = std::max(sample_gamma(hyper.a_tau, hyper.b_tau, rng), kScaleFloor);
    out.used_prior_fallback = true;
  } else {
    auto weighted = [&](const std::vector<double>& phi) {
      double s = 0.0;
      for (std::size_t r = 0; r < R; ++r) s += c[r] / phi[r];
      return s;
    };
    std::vector<double> psi(R);
    double psum = 0.0;
    for (std::size_t r = 0; r < R; ++r) {
      psi[r] = R == 1 ? 1.0
                      : sample_gig(hyper.alpha - total_dim / 2.0, 2.0 * hyper.b_tau,
                                   c[r], rng);
      psum += psi[r];
    }
    std::vector<double> proposal(R);
    for (std::size_t r = 0; r < R; ++r) {
      proposal[r] = std::max(psi[r] / psum, kScaleFloor);
    }

    const double exact_shape = static_cast<double>(R) * hyper.alpha;
    out.phi = proposal;
    if (R > 1 && std::abs(hyper.a_tau - exact_shape) > 1e-12) {
      const double half_total = static_cast<double>(R) * total_dim / 2.0;
      auto log_weight = [&](const std::vector<double>& phi) {
        const double s = weighted(phi);
        return detail::log_tau_marginal(hyper.a_tau, hyper.b_tau, half_total, s) -
               detail::log_tau_marginal(exact_shape, hyper.b_tau, half_total, s);
      };
      const double log_ratio = log_weight(proposal) - log_weight(state.phi);
      if (std::log(rng.uniform()) > log_ratio) {
        out.phi = state.phi;
        out.proposal_accepted = false;
      }
    }
    const double s = weighted(out.phi);
    out.tau = std::max(
        sample_gig(hyper.a_tau - static_cast<double>(R) * total_dim / 2.0,
                   2.0 * hyper.b_tau, s, rng),
        kScaleFloor);
  }
  double total = 0.0;
  for (auto& p : out.phi) {
    p = std::max(p, kScaleFloor);
    total += p;
  }
  for (auto& p : out.phi) p /= total;
  return out;
}

}  // namespace btc

#endif  // BTC_PRIOR_HPP
