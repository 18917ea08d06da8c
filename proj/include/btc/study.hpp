#ifndef BTC_STUDY_HPP
#define BTC_STUDY_HPP

// Simulation-study drivers shared by the CLI and the acceptance suite:
// model dispatch, per-replicate evaluation, DIC rank selection,
// hyperparameter sweeps and a replicate work pool.

#include <algorithm>
#include <atomic>
#include <exception>
#include <functional>
#include <string>
#include <thread>
#include <vector>

#include "btc/chain.hpp"
#include "btc/dataset.hpp"
#include "btc/error.hpp"
#include "btc/lr_sampler.hpp"
#include "btc/metrics.hpp"
#include "btc/svm_sampler.hpp"

namespace btc {

inline LabelConvention model_labels(Model m) {
  return m == Model::BtSvm ? LabelConvention::PlusMinusOne : LabelConvention::ZeroOne;
}

/// Fit either model, converting the label convention when needed.
inline ChainOutput fit_model(Model model, const Dataset& train, const FitConfig& config) {
  const Dataset data = train.with_convention(model_labels(model));
  return model == Model::BtSvm ? run_chain_svm(data, config) : run_chain_lr(data, config);
}

/// One row of the simulation tables: estimation and classification columns,
/// then cell-selection columns.
struct EvaluationRow {
  EstimationMetrics estimation;
  ClassificationMetrics classification;
  SelectionMetrics selection;
};

inline EvaluationRow evaluate(const ChainOutput& chain, const Dataset& test,
                              const DenseTensor& truth) {
  const PosteriorSummary summary = summarize(chain);
  const Dataset data = test.with_convention(model_labels(chain.model));
  const Eigen::VectorXd predicted = predict_labels(chain, data);
  EvaluationRow row;
  row.estimation = estimation_metrics(summary.mean, truth);
  row.classification = classification_metrics(
      std::span<const double>(predicted.data(), static_cast<std::size_t>(predicted.size())),
      std::span<const double>(data.labels.data(), data.size()));
  row.selection = selection_metrics(select_cells(summary), truth);
  return row;
}

inline const std::vector<std::string>& evaluation_header() {
  static const std::vector<std::string> header{"RE",  "RMSE", "Corr",  "MisClass", "F1",
                                               "Sens", "Spec", "SelF1", "MCC"};
  return header;
}

inline std::vector<std::optional<double>> evaluation_values(const EvaluationRow& r) {
  return {r.estimation.re,          r.estimation.rmse,      r.estimation.corr,
          r.classification.misclassification, r.classification.f1,
          r.selection.sensitivity,  r.selection.specificity, r.selection.f1,
          r.selection.mcc};
}

/// Column means over rows, skipping undefined entries.
inline std::vector<std::optional<double>> column_means(
    const std::vector<std::vector<std::optional<double>>>& rows) {
  if (rows.empty()) return {};
  std::vector<std::optional<double>> out(rows.front().size());
  for (std::size_t c = 0; c < out.size(); ++c) {
    double total = 0.0;
    std::size_t count = 0;
    for (const auto& row : rows) {
      if (row.at(c)) {
        total += *row[c];
        ++count;
      }
    }
    if (count) out[c] = total / static_cast<double>(count);
  }
  return out;
}

struct RankScore {
  std::size_t rank;
  DicResult dic;
};

struct RankSelection {
  std::vector<RankScore> scores;
  std::size_t chosen = 0;
};

/// Fit each candidate rank and keep the one with the smallest DIC (the
/// smaller rank on exact ties).
inline RankSelection select_rank(Model model, const Dataset& train, const FitConfig& base,
                                 const std::vector<std::size_t>& ranks) {
  if (ranks.empty()) throw ConfigError("rank selection needs at least one candidate rank");
  RankSelection out;
  for (auto r : ranks) {
    FitConfig config = base;
    config.rank = r;
    config.hyper.reset();
    config.initial_factors.reset();
    const ChainOutput chain = fit_model(model, train, config);
    out.scores.push_back({r, dic(chain, train)});
  }
  const auto best = std::min_element(out.scores.begin(), out.scores.end(),
                                     [](const RankScore& a, const RankScore& b) {
                                       return a.dic.dic < b.dic.dic ||
                                              (a.dic.dic == b.dic.dic && a.rank < b.rank);
                                     });
  out.chosen = best->rank;
  return out;
}

enum class SweepParam { Alpha, ALambda, ATau, BLambda, BTau };

inline std::string to_string(SweepParam p) {
  switch (p) {
    case SweepParam::Alpha: return "alpha";
    case SweepParam::ALambda: return "a_lambda";
    case SweepParam::ATau: return "a_tau";
    case SweepParam::BLambda: return "b_lambda";
    default: return "b_tau";
  }
}

inline SweepParam parse_sweep_param(const std::string& s) {
  for (auto p : {SweepParam::Alpha, SweepParam::ALambda, SweepParam::ATau, SweepParam::BLambda,
                 SweepParam::BTau}) {
    if (to_string(p) == s) return p;
  }
  throw ConfigError("unknown sweep parameter '" + s +
                    "' (expected alpha, a_lambda, a_tau, b_lambda or b_tau)");
}

/// Defaults for (rank, order) with a single hyperparameter replaced; the
/// others stay at their default values.
inline MdgdpHyper swept_hyper(std::size_t rank, std::size_t order, SweepParam p, double value) {
  MdgdpHyper h = MdgdpHyper::defaults(rank, order);
  switch (p) {
    case SweepParam::Alpha: h.alpha = value; break;
    case SweepParam::ALambda: h.a_lambda = value; break;
    case SweepParam::ATau: h.a_tau = value; break;
    case SweepParam::BLambda: h.b_lambda = value; break;
    case SweepParam::BTau: h.b_tau = value; break;
  }
  h.validate();
  return h;
}

/// Run task(k) for k = 0..count-1 on up to `threads` workers. The first
/// exception (lowest index) is rethrown after all workers finish.
inline void parallel_for(std::size_t count, std::size_t threads,
                         const std::function<void(std::size_t)>& task) {
  threads = std::max<std::size_t>(1, std::min(threads, count));
  std::vector<std::exception_ptr> errors(count);
  std::atomic<std::size_t> next{0};
  auto worker = [&] {
    for (std::size_t k = next++; k < count; k = next++) {
      try {
        task(k);
      } catch (...) {
        errors[k] = std::current_exception();
      }
    }
  };
  if (threads == 1) {
    worker();
  } else {
    std::vector<std::thread> pool;
    pool.reserve(threads);
    for (std::size_t t = 0; t < threads; ++t) pool.emplace_back(worker);
    for (auto& t : pool) t.join();
  }
  for (auto& e : errors) {
    if (e) std::rethrow_exception(e);
  }
}

}  // namespace btc

#endif  // BTC_STUDY_HPP
