#ifndef BTC_METRICS_HPP
#define BTC_METRICS_HPP

// Evaluation metrics, cell selection, DIC and the Geweke diagnostic.
// Metrics that can divide by zero return std::nullopt instead of a value.

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <optional>
#include <span>
#include <vector>

#include "btc/chain.hpp"
#include "btc/dataset.hpp"
#include "btc/error.hpp"
#include "btc/lr_sampler.hpp"
#include "btc/svm_sampler.hpp"
#include "btc/tensor.hpp"

namespace btc {

struct EstimationMetrics {
  std::optional<double> re;
  double rmse = 0.0;
  std::optional<double> corr;
};

/// Relative L1 error, root-mean-square error and Pearson correlation over cells.
inline EstimationMetrics estimation_metrics(const DenseTensor& estimate, const DenseTensor& truth) {
  if (estimate.dims() != truth.dims()) {
    throw StructuralError("estimation_metrics: dimension mismatch");
  }
  const auto n = static_cast<double>(truth.size());
  double abs_err = 0.0, abs_truth = 0.0, sq_err = 0.0;
  double mean_e = 0.0, mean_t = 0.0;
  for (std::size_t c = 0; c < truth.size(); ++c) {
    const double d = estimate[c] - truth[c];
    abs_err += std::abs(d);
    abs_truth += std::abs(truth[c]);
    sq_err += d * d;
    mean_e += estimate[c];
    mean_t += truth[c];
  }
  mean_e /= n;
  mean_t /= n;
  double see = 0.0, stt = 0.0, set = 0.0;
  for (std::size_t c = 0; c < truth.size(); ++c) {
    const double de = estimate[c] - mean_e;
    const double dt = truth[c] - mean_t;
    see += de * de;
    stt += dt * dt;
    set += de * dt;
  }
  EstimationMetrics m;
  if (abs_truth > 0.0) m.re = abs_err / abs_truth;
  m.rmse = std::sqrt(sq_err / n);
  if (see > 0.0 && stt > 0.0) m.corr = set / std::sqrt(see * stt);
  return m;
}

struct ConfusionCounts {
  std::size_t tp = 0, fp = 0, tn = 0, fn = 0;
  std::size_t total() const { return tp + fp + tn + fn; }
};

inline ConfusionCounts confusion(const std::vector<bool>& predicted,
                                 const std::vector<bool>& actual) {
  if (predicted.size() != actual.size()) throw StructuralError("confusion: length mismatch");
  ConfusionCounts c;
  for (std::size_t i = 0; i < actual.size(); ++i) {
    if (actual[i]) {
      (predicted[i] ? c.tp : c.fn) += 1;
    } else {
      (predicted[i] ? c.fp : c.tn) += 1;
    }
  }
  return c;
}

struct ClassificationMetrics {
  double misclassification = 0.0;
  std::optional<double> f1;
};

inline ClassificationMetrics classification_metrics(const ConfusionCounts& c) {
  if (c.total() == 0) throw StructuralError("classification metrics need at least one item");
  ClassificationMetrics m;
  m.misclassification = static_cast<double>(c.fp + c.fn) / static_cast<double>(c.total());
  const double denom = static_cast<double>(c.tp) + 0.5 * static_cast<double>(c.fp + c.fn);
  if (denom > 0.0) m.f1 = static_cast<double>(c.tp) / denom;
  return m;
}

/// Labels are compared under either convention; positives are labels > 0.
inline ClassificationMetrics classification_metrics(std::span<const double> predicted,
                                                    std::span<const double> actual) {
  if (predicted.size() != actual.size()) {
    throw StructuralError("classification_metrics: length mismatch");
  }
  std::vector<bool> p(predicted.size()), a(actual.size());
  for (std::size_t i = 0; i < actual.size(); ++i) {
    p[i] = predicted[i] > 0.0;
    a[i] = actual[i] > 0.0;
  }
  return classification_metrics(confusion(p, a));
}

struct SelectionMetrics {
  std::optional<double> sensitivity;
  std::optional<double> specificity;
  std::optional<double> f1;
  double mcc = 0.0;
};

/// MCC is defined as 0 whenever a factor under its square root is zero.
inline SelectionMetrics selection_metrics(const ConfusionCounts& c) {
  SelectionMetrics m;
  const double tp = static_cast<double>(c.tp), fp = static_cast<double>(c.fp);
  const double tn = static_cast<double>(c.tn), fn = static_cast<double>(c.fn);
  if (tp + fn > 0.0) m.sensitivity = tp / (tp + fn);
  if (tn + fp > 0.0) m.specificity = tn / (tn + fp);
  if (tp + fp + fn > 0.0) m.f1 = tp / (tp + 0.5 * (fp + fn));
  const double denom = (tp + fp) * (tp + fn) * (tn + fp) * (tn + fn);
  m.mcc = denom > 0.0 ? (tp * tn - fp * fn) / std::sqrt(denom) : 0.0;
  return m;
}

/// Positives are the non-zero cells of the true tensor.
inline SelectionMetrics selection_metrics(const std::vector<bool>& selected,
                                          const DenseTensor& truth) {
  if (selected.size() != truth.size()) throw StructuralError("selection_metrics: size mismatch");
  std::vector<bool> actual(truth.size());
  for (std::size_t c = 0; c < truth.size(); ++c) actual[c] = truth[c] != 0.0;
  return selection_metrics(confusion(selected, actual));
}

/// Sample quantile with linear interpolation between order statistics.
inline double quantile_sorted(std::span<const double> sorted, double q) {
  if (sorted.empty()) throw ConfigError("quantile of an empty sample");
  const double h = q * static_cast<double>(sorted.size() - 1);
  const auto lo = static_cast<std::size_t>(std::floor(h));
  const auto hi = std::min(lo + 1, sorted.size() - 1);
  return sorted[lo] + (h - static_cast<double>(lo)) * (sorted[hi] - sorted[lo]);
}

struct PosteriorSummary {
  DenseTensor mean;
  DenseTensor lower;
  DenseTensor upper;
  std::vector<double> gamma_mean;
  std::vector<double> gamma_lower;
  std::vector<double> gamma_upper;
  double level = 0.95;
};

/// Posterior means and equal-tailed credible intervals at `level`.
inline PosteriorSummary summarize(const ChainOutput& chain, double level = 0.95) {
  chain.require_draws();
  PosteriorSummary s;
  s.level = level;
  s.mean = chain.posterior_mean_b();
  s.lower = DenseTensor(chain.dims);
  s.upper = DenseTensor(chain.dims);
  const double tail = (1.0 - level) / 2.0;
  std::vector<double> column(chain.draw_count());
  auto interval = [&](const RowMatrix& draws, Eigen::Index c) {
    for (Eigen::Index s_ = 0; s_ < draws.rows(); ++s_) {
      column[static_cast<std::size_t>(s_)] = draws(s_, c);
    }
    std::sort(column.begin(), column.end());
    return std::pair{quantile_sorted(column, tail), quantile_sorted(column, 1.0 - tail)};
  };
  for (Eigen::Index c = 0; c < chain.b_draws.cols(); ++c) {
    const auto [lo, hi] = interval(chain.b_draws, c);
    s.lower[static_cast<std::size_t>(c)] = lo;
    s.upper[static_cast<std::size_t>(c)] = hi;
  }
  s.gamma_mean = chain.posterior_mean_gamma();
  for (Eigen::Index k = 0; k < chain.gamma_draws.cols(); ++k) {
    const auto [lo, hi] = interval(chain.gamma_draws, k);
    s.gamma_lower.push_back(lo);
    s.gamma_upper.push_back(hi);
  }
  return s;
}

/// A cell is selected when its credible interval excludes zero.
inline std::vector<bool> select_cells(const PosteriorSummary& summary) {
  std::vector<bool> mask(summary.mean.size());
  for (std::size_t c = 0; c < mask.size(); ++c) {
    mask[c] = summary.lower[c] > 0.0 || summary.upper[c] < 0.0;
  }
  return mask;
}

/// Posterior-mean linear predictor <X_i, mean B> + z_i' mean gamma.
inline Eigen::VectorXd posterior_mean_predictor(const ChainOutput& chain, const Dataset& data) {
  chain.require_draws();
  if (data.dims != chain.dims || data.covariate_count() != chain.covariate_count) {
    throw StructuralError("dataset does not match the chain's dimensions");
  }
  const Eigen::VectorXd b = chain.b_draws.colwise().mean().transpose();
  const Eigen::VectorXd g = chain.gamma_draws.colwise().mean().transpose();
  return data.design * b + data.covariates * g;
}

/// Score per sample: posterior-mean f for BT-SVM, posterior-mean
/// probability e^f / (1 + e^f) for BT-LR.
inline Eigen::VectorXd predict_scores(const ChainOutput& chain, const Dataset& data) {
  if (chain.model == Model::BtSvm) return posterior_mean_predictor(chain, data);
  chain.require_draws();
  if (data.dims != chain.dims || data.covariate_count() != chain.covariate_count) {
    throw StructuralError("dataset does not match the chain's dimensions");
  }
  const Eigen::MatrixXd f = data.design * chain.b_draws.transpose() +
                            data.covariates * chain.gamma_draws.transpose();
  Eigen::VectorXd p(f.rows());
  for (Eigen::Index i = 0; i < f.rows(); ++i) {
    double total = 0.0;
    for (Eigen::Index s = 0; s < f.cols(); ++s) total += logistic(f(i, s));
    p[i] = total / static_cast<double>(f.cols());
  }
  return p;
}

/// BT-SVM: sign of the posterior-mean predictor (0 maps to +1), labels +-1.
/// BT-LR: 1 iff the posterior-mean probability is at least 0.5, labels 0/1.
inline Eigen::VectorXd predict_labels(const ChainOutput& chain, const Dataset& data) {
  const Eigen::VectorXd score = predict_scores(chain, data);
  Eigen::VectorXd y(score.size());
  for (Eigen::Index i = 0; i < score.size(); ++i) {
    y[i] = chain.model == Model::BtSvm ? (score[i] >= 0.0 ? 1.0 : -1.0)
                                       : (score[i] >= 0.5 ? 1.0 : 0.0);
  }
  return y;
}

/// Log-likelihood of `data` at predictor values f under the chain's model.
inline double model_log_lik(const ChainOutput& chain, const Eigen::VectorXd& labels,
                            const Eigen::VectorXd& f) {
  if (chain.model == Model::BtSvm) return HingeLoss{chain.config.sigma2}.log_lik(labels, f);
  return LogisticLoss{}.log_lik(labels, f);
}

struct DicResult {
  double dic = 0.0;
  double effective_parameters = 0.0;
  double loglik_at_mean = 0.0;
  double mean_loglik = 0.0;
};

/// DIC = -2 logL(theta_bar) + 2 pD with pD = 2 (logL(theta_bar) - mean logL),
/// averaging the log-likelihood over the kept draws.
inline DicResult dic(const ChainOutput& chain, const Dataset& data) {
  chain.require_draws();
  const auto kept = chain.kept_loglik();
  if (kept.empty()) throw ConfigError("chain has no kept log-likelihood values");
  const auto expected = chain.model == Model::BtSvm ? LabelConvention::PlusMinusOne
                                                    : LabelConvention::ZeroOne;
  const Dataset d = data.with_convention(expected);
  DicResult r;
  double total = 0.0;
  for (double v : kept) total += v;
  r.mean_loglik = total / static_cast<double>(kept.size());
  r.loglik_at_mean = model_log_lik(chain, d.labels, posterior_mean_predictor(chain, d));
  r.effective_parameters = 2.0 * (r.loglik_at_mean - r.mean_loglik);
  r.dic = -2.0 * r.loglik_at_mean + 2.0 * r.effective_parameters;
  return r;
}

namespace detail {

// Variance of the window mean from non-overlapping batch means.
inline std::optional<double> batch_means_variance(std::span<const double> x) {
  const std::size_t m = x.size();
  if (m < 2) return std::nullopt;
  const auto b = std::max<std::size_t>(1, static_cast<std::size_t>(std::sqrt(static_cast<double>(m))));
  const std::size_t a = m / b;
  if (a < 2) return std::nullopt;
  std::vector<double> means(a, 0.0);
  for (std::size_t k = 0; k < a; ++k) {
    for (std::size_t t = 0; t < b; ++t) means[k] += x[k * b + t];
    means[k] /= static_cast<double>(b);
  }
  double grand = 0.0;
  for (double v : means) grand += v;
  grand /= static_cast<double>(a);
  double ss = 0.0;
  for (double v : means) ss += (v - grand) * (v - grand);
  const double long_run = static_cast<double>(b) * ss / static_cast<double>(a - 1);
  return long_run / static_cast<double>(a * b);
}

}  // namespace detail

inline constexpr std::size_t kGewekeMinLength = 100;

/// Geweke z: mean of the first `first` fraction minus mean of the last
/// `last` fraction, over the root of the summed batch-means variances.
inline std::optional<double> geweke_z(std::span<const double> chain, double first = 0.1,
                                      double last = 0.5) {
  if (chain.size() < kGewekeMinLength) {
    throw ConfigError("geweke_z needs at least " + std::to_string(kGewekeMinLength) +
                      " draws, got " + std::to_string(chain.size()));
  }
  const auto n1 = static_cast<std::size_t>(first * static_cast<double>(chain.size()));
  const auto n2 = static_cast<std::size_t>(last * static_cast<double>(chain.size()));
  const auto head = chain.first(n1);
  const auto tail = chain.last(n2);
  auto mean = [](std::span<const double> x) {
    double s = 0.0;
    for (double v : x) s += v;
    return s / static_cast<double>(x.size());
  };
  const auto v1 = detail::batch_means_variance(head);
  const auto v2 = detail::batch_means_variance(tail);
  if (!v1 || !v2) return std::nullopt;
  const double denom = *v1 + *v2;
  if (!(denom > 0.0)) return std::nullopt;
  return (mean(head) - mean(tail)) / std::sqrt(denom);
}

/// Fraction of B cells whose Geweke z lies in (-1.96, 1.96). Cells with an
/// undefined score (constant traces) are excluded from the denominator.
inline double geweke_pass_fraction(const ChainOutput& chain, double bound = 1.96) {
  chain.require_draws();
  std::vector<double> trace(chain.draw_count());
  std::size_t pass = 0, defined = 0;
  for (Eigen::Index c = 0; c < chain.b_draws.cols(); ++c) {
    for (Eigen::Index s = 0; s < chain.b_draws.rows(); ++s) {
      trace[static_cast<std::size_t>(s)] = chain.b_draws(s, c);
    }
    const auto z = geweke_z(trace);
    if (!z) continue;
    ++defined;
    if (std::abs(*z) < bound) ++pass;
  }
  return defined ? static_cast<double>(pass) / static_cast<double>(defined) : 0.0;
}

}  // namespace btc

#endif  // BTC_METRICS_HPP
