#ifndef BTC_CHAIN_HPP
#define BTC_CHAIN_HPP

#include <Eigen/Dense>

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "btc/error.hpp"
#include "btc/prior.hpp"
#include "btc/rng.hpp"
#include "btc/tensor.hpp"

namespace btc {

enum class Model { BtSvm, BtLr };

inline std::string to_string(Model m) { return m == Model::BtSvm ? "bt-svm" : "bt-lr"; }

inline Model parse_model(const std::string& s) {
  if (s == "bt-svm") return Model::BtSvm;
  if (s == "bt-lr") return Model::BtLr;
  throw ConfigError("unknown model '" + s + "' (expected bt-svm or bt-lr)");
}

struct FitConfig {
  std::size_t rank = 3;
  std::size_t iterations = 3000;
  std::size_t burnin = 1000;
  std::size_t thin = 1;
  std::uint64_t seed = 1;
  std::uint64_t stream = stream_id(0, 0, kStreamFit);
  /// Unset means MdgdpHyper::defaults(rank, order).
  std::optional<MdgdpHyper> hyper;
  double sigma2 = 6.0;
  /// Prior precision of each gamma coefficient (prior variance 100).
  double gamma_prior_precision = 0.01;
  /// Standard deviation of the N(0, s^2) draws that initialize the margins.
  double init_scale = 0.1;
  /// Warm start; overrides the random initialization when set.
  std::optional<ParafacFactors> initial_factors;
  bool random_scan = false;
  bool keep_margins = false;

  MdgdpHyper resolved_hyper(std::size_t order) const {
    return hyper ? *hyper : MdgdpHyper::defaults(rank, order);
  }

  void validate() const {
    if (rank < 1) throw ConfigError("rank must be at least 1");
    if (iterations == 0) throw ConfigError("iterations must be positive");
    if (burnin >= iterations) throw ConfigError("burn-in must be smaller than iterations");
    if (thin < 1) throw ConfigError("thinning must be at least 1");
    if (!(sigma2 > 0.0) || !std::isfinite(sigma2)) throw ConfigError("sigma2 must be positive");
    if (!(gamma_prior_precision > 0.0)) {
      throw ConfigError("gamma prior precision must be positive");
    }
    if (!(init_scale > 0.0)) throw ConfigError("init scale must be positive");
    if (hyper) hyper->validate();
    if (initial_factors && initial_factors->rank() != rank) {
      throw ConfigError("initial factors have rank " + std::to_string(initial_factors->rank()) +
                        ", expected " + std::to_string(rank));
    }
  }

  std::size_t kept_draws() const { return (iterations - burnin + thin - 1) / thin; }
};

/// Post-burn-in thinned draws plus the full log-likelihood trace.
struct ChainOutput {
  Model model = Model::BtSvm;
  FitConfig config;
  Dims dims;
  std::size_t covariate_count = 0;
  RowMatrix b_draws;       // kept draws x cells, composed B
  RowMatrix gamma_draws;   // kept draws x covariates
  std::vector<double> tau_draws;
  RowMatrix phi_draws;     // kept draws x rank
  std::vector<double> loglik;        // one entry per iteration
  std::vector<std::size_t> kept_iterations;
  std::vector<ParafacFactors> margin_draws;  // only with keep_margins
  ParafacFactors final_factors;              // state after the last sweep
  std::size_t phi_proposals_rejected = 0;

  std::size_t draw_count() const { return static_cast<std::size_t>(b_draws.rows()); }

  void require_draws() const {
    if (draw_count() == 0) throw ConfigError("chain holds no draws");
  }

  DenseTensor posterior_mean_b() const {
    require_draws();
    const Eigen::VectorXd mean = b_draws.colwise().mean().transpose();
    return DenseTensor(dims, std::vector<double>(mean.data(), mean.data() + mean.size()));
  }

  std::vector<double> posterior_mean_gamma() const {
    require_draws();
    const Eigen::VectorXd mean = gamma_draws.colwise().mean().transpose();
    return {mean.data(), mean.data() + mean.size()};
  }

  /// Log-likelihood at the kept iterations, aligned with the draws.
  std::vector<double> kept_loglik() const {
    std::vector<double> out;
    out.reserve(kept_iterations.size());
    for (auto it : kept_iterations) out.push_back(loglik.at(it));
    return out;
  }
};

}  // namespace btc

#endif  // BTC_CHAIN_HPP
