#ifndef BTC_SIMGEN_HPP
#define BTC_SIMGEN_HPP

// Simulation scenarios for the coefficient tensor and binary outcomes.
//
//   1: rank-3 PARAFAC with Binomial(2, 0.2) margins, rescaled to max cell 1
//   2: rank-3 PARAFAC with fixed margins (shipped asset, a cross pattern)
//   3: centered rectangle of ones covering ~30% of the cells
//   4: centered disk of ones covering ~10% of the cells
//
// Covariate tensors are i.i.d. N(0, 1) and the true gamma is zero.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <map>
#include <numeric>
#include <string>
#include <vector>

#include "btc/dataset.hpp"
#include "btc/error.hpp"
#include "btc/formats.hpp"
#include "btc/lr_sampler.hpp"
#include "btc/rng.hpp"
#include "btc/scenario2_asset.hpp"
#include "btc/tensor.hpp"

namespace btc {

enum class OutcomeLoss { Svm, Logistic };

inline std::string to_string(OutcomeLoss l) { return l == OutcomeLoss::Svm ? "svm" : "logistic"; }

inline OutcomeLoss parse_outcome_loss(const std::string& s) {
  if (s == "svm") return OutcomeLoss::Svm;
  if (s == "logistic") return OutcomeLoss::Logistic;
  throw ConfigError("unknown loss '" + s + "' (expected svm or logistic)");
}

struct ScenarioSpec {
  int id = 2;
  Dims dims{48, 48};
  std::size_t true_rank = 3;
  std::uint64_t seed = 1;

  void validate() const {
    if (id < 1 || id > 4) throw ConfigError("scenario must be 1, 2, 3 or 4");
    validate_dims(dims);
    if (id != 1 && dims.size() != 2) {
      throw ConfigError("scenarios 2-4 are defined for 2-D tensors only");
    }
    if (true_rank < 1) throw ConfigError("true rank must be at least 1");
  }
};

inline constexpr double kRectangleFraction = 0.30;
inline constexpr double kDiskFraction = 0.10;

/// Scenario-2 margins: the shipped 48x48 asset, resampled by nearest index
/// for other grid sizes.
inline ParafacFactors scenario2_factors(const Dims& dims) {
  const ParafacFactors asset = decode_tsrm(kScenario2Asset);
  if (dims == asset.dims()) return asset;
  ParafacFactors out(asset.rank(), dims);
  for (std::size_t r = 0; r < asset.rank(); ++r) {
    for (std::size_t j = 0; j < dims.size(); ++j) {
      const auto src = asset.margin(j, r);
      auto dst = out.margin(j, r);
      for (std::size_t k = 0; k < dst.size(); ++k) {
        dst[k] = src[k * src.size() / dst.size()];
      }
    }
  }
  return out;
}

namespace detail {

inline DenseTensor scenario_rectangle(const Dims& dims) {
  const std::size_t total = cell_count(dims);
  const double target = kRectangleFraction * static_cast<double>(total);
  const auto h = std::clamp<std::size_t>(
      static_cast<std::size_t>(std::lround(static_cast<double>(dims[0]) * std::sqrt(kRectangleFraction))),
      1, dims[0]);
  const auto w = std::clamp<std::size_t>(
      static_cast<std::size_t>(std::lround(target / static_cast<double>(h))), 1, dims[1]);
  DenseTensor b(dims);
  const std::size_t top = (dims[0] - h) / 2;
  const std::size_t left = (dims[1] - w) / 2;
  for (std::size_t i = top; i < top + h; ++i) {
    for (std::size_t k = left; k < left + w; ++k) b[i * dims[1] + k] = 1.0;
  }
  return b;
}

inline DenseTensor scenario_disk(const Dims& dims) {
  const double ci = (static_cast<double>(dims[0]) - 1.0) / 2.0;
  const double ck = (static_cast<double>(dims[1]) - 1.0) / 2.0;
  const double target = kDiskFraction * static_cast<double>(cell_count(dims));
  // Squared radius thresholds in increasing order with their cumulative counts.
  std::map<double, std::size_t> counts;
  for (std::size_t i = 0; i < dims[0]; ++i) {
    for (std::size_t k = 0; k < dims[1]; ++k) {
      const double d2 = (i - ci) * (i - ci) + (k - ck) * (k - ck);
      ++counts[d2];
    }
  }
  double best_r2 = counts.begin()->first;
  double best_gap = std::numeric_limits<double>::infinity();
  std::size_t cumulative = 0;
  for (const auto& [r2, c] : counts) {
    cumulative += c;
    const double gap = std::abs(static_cast<double>(cumulative) - target);
    if (gap < best_gap) {
      best_gap = gap;
      best_r2 = r2;
    }
  }
  DenseTensor b(dims);
  for (std::size_t i = 0; i < dims[0]; ++i) {
    for (std::size_t k = 0; k < dims[1]; ++k) {
      const double d2 = (i - ci) * (i - ci) + (k - ck) * (k - ck);
      if (d2 <= best_r2) b[i * dims[1] + k] = 1.0;
    }
  }
  return b;
}

inline DenseTensor scenario_binomial(const ScenarioSpec& spec) {
  Rng rng(spec.seed, stream_id(0, 0, kStreamScenario));
  while (true) {
    ParafacFactors f(spec.true_rank, spec.dims);
    for (std::size_t r = 0; r < f.rank(); ++r) {
      for (std::size_t j = 0; j < f.order(); ++j) {
        for (auto& v : f.margin(j, r)) {
          v = (rng.uniform() < 0.2 ? 1.0 : 0.0) + (rng.uniform() < 0.2 ? 1.0 : 0.0);
        }
      }
    }
    DenseTensor b = parafac_compose(f);
    const double top = *std::max_element(b.values().begin(), b.values().end());
    if (top <= 0.0) continue;
    for (auto& v : b.values()) v /= top;
    return b;
  }
}

}  // namespace detail

/// True coefficient tensor for a scenario; a pure function of the spec.
inline DenseTensor gen_scenario(const ScenarioSpec& spec) {
  spec.validate();
  switch (spec.id) {
    case 1:
      return detail::scenario_binomial(spec);
    case 2:
      return parafac_compose(scenario2_factors(spec.dims));
    case 3:
      return detail::scenario_rectangle(spec.dims);
    default:
      return detail::scenario_disk(spec.dims);
  }
}

/// n covariate tensors with i.i.d. N(0, 1) cells, rows of the returned matrix.
inline RowMatrix gen_covariate_tensors(std::size_t n, const Dims& dims, Rng& rng) {
  RowMatrix x(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(cell_count(dims)));
  for (Eigen::Index i = 0; i < x.rows(); ++i) {
    for (Eigen::Index c = 0; c < x.cols(); ++c) x(i, c) = rng.normal();
  }
  return x;
}

/// Intercept column followed by `extra` i.i.d. N(0, 1) covariates.
inline RowMatrix gen_scalar_covariates(std::size_t n, std::size_t extra, Rng& rng) {
  RowMatrix z(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(extra + 1));
  for (Eigen::Index i = 0; i < z.rows(); ++i) {
    z(i, 0) = 1.0;
    for (Eigen::Index k = 1; k < z.cols(); ++k) z(i, k) = rng.normal();
  }
  return z;
}

/// Labels from psi_i = <X_i, B>: sign rule for the SVM mechanism (psi = 0
/// maps to +1), Bernoulli(1 / (1 + e^-psi)) in {0, 1} for the logistic one.
inline Eigen::VectorXd gen_outcomes(const DenseTensor& b, const RowMatrix& design,
                                    OutcomeLoss loss, Rng& rng) {
  if (static_cast<std::size_t>(design.cols()) != b.size()) {
    throw StructuralError("gen_outcomes: design width does not match coefficient tensor");
  }
  const Eigen::Map<const Eigen::VectorXd> coef(b.values().data(), static_cast<Eigen::Index>(b.size()));
  const Eigen::VectorXd psi = design * coef;
  Eigen::VectorXd y(psi.size());
  for (Eigen::Index i = 0; i < psi.size(); ++i) {
    if (loss == OutcomeLoss::Svm) {
      y[i] = psi[i] >= 0.0 ? 1.0 : -1.0;
    } else {
      y[i] = rng.uniform() < logistic(psi[i]) ? 1.0 : 0.0;
    }
  }
  return y;
}

struct SimulationSpec {
  ScenarioSpec scenario;
  OutcomeLoss loss = OutcomeLoss::Svm;
  std::size_t n = 400;
  std::size_t extra_covariates = 0;
  double train_fraction = 0.7;
  std::uint32_t replicate = 0;
};

struct SimulatedData {
  Dataset train;
  Dataset test;
};

/// Full replicate: truth, covariates, outcomes and a seeded train/test split.
inline SimulatedData simulate(const SimulationSpec& spec) {
  spec.scenario.validate();
  if (spec.n < 2) throw ConfigError("simulation needs at least 2 samples");
  if (!(spec.train_fraction > 0.0 && spec.train_fraction < 1.0)) {
    throw ConfigError("train fraction must lie in (0, 1)");
  }
  const std::uint64_t seed = spec.scenario.seed;
  const DenseTensor b = gen_scenario(spec.scenario);

  Dataset all;
  all.dims = spec.scenario.dims;
  Rng cov_rng(seed, stream_id(spec.replicate, 0, kStreamCovariates));
  all.design = gen_covariate_tensors(spec.n, all.dims, cov_rng);
  all.covariates = gen_scalar_covariates(spec.n, spec.extra_covariates, cov_rng);
  Rng out_rng(seed, stream_id(spec.replicate, 0, kStreamOutcomes));
  all.labels = gen_outcomes(b, all.design, spec.loss, out_rng);
  all.convention = spec.loss == OutcomeLoss::Svm ? LabelConvention::PlusMinusOne
                                                 : LabelConvention::ZeroOne;
  all.truth = GroundTruth{b, std::vector<double>(all.covariate_count(), 0.0)};

  std::vector<std::size_t> order(spec.n);
  std::iota(order.begin(), order.end(), std::size_t{0});
  Rng split_rng(seed, stream_id(spec.replicate, 0, kStreamSplit));
  for (std::size_t k = order.size(); k > 1; --k) {
    const auto pick = std::min(
        static_cast<std::size_t>(split_rng.uniform() * static_cast<double>(k)), k - 1);
    std::swap(order[k - 1], order[pick]);
  }
  const auto n_train = static_cast<std::size_t>(
      std::lround(spec.train_fraction * static_cast<double>(spec.n)));
  std::vector<std::size_t> train_idx(order.begin(), order.begin() + static_cast<std::ptrdiff_t>(n_train));
  std::vector<std::size_t> test_idx(order.begin() + static_cast<std::ptrdiff_t>(n_train), order.end());
  std::sort(train_idx.begin(), train_idx.end());
  std::sort(test_idx.begin(), test_idx.end());
  return {all.subset(train_idx), all.subset(test_idx)};
}

}  // namespace btc

#endif  // BTC_SIMGEN_HPP
