#ifndef BTC_DATASET_HPP
#define BTC_DATASET_HPP

#include <Eigen/Dense>

#include <optional>
#include <span>
#include <string>
#include <vector>

#include "btc/error.hpp"
#include "btc/tensor.hpp"

namespace btc {

/// {-1, +1} labels for the hinge model, {0, 1} for the logistic model.
enum class LabelConvention { PlusMinusOne, ZeroOne };

inline std::string to_string(LabelConvention c) {
  return c == LabelConvention::PlusMinusOne ? "pm1" : "zero-one";
}

inline LabelConvention parse_label_convention(const std::string& s) {
  if (s == "pm1") return LabelConvention::PlusMinusOne;
  if (s == "zero-one") return LabelConvention::ZeroOne;
  throw FormatError("unknown label convention '" + s + "'");
}

struct GroundTruth {
  DenseTensor B;
  std::vector<double> gamma;
};

/// n samples of (X_i, z_i, y_i). Row i of `design` is X_i vectorized
/// row-major; row i of `covariates` is z_i with the intercept column first.
struct Dataset {
  Dims dims;
  RowMatrix design;
  RowMatrix covariates;
  Eigen::VectorXd labels;
  LabelConvention convention = LabelConvention::PlusMinusOne;
  std::optional<GroundTruth> truth;

  std::size_t size() const { return static_cast<std::size_t>(labels.size()); }
  std::size_t covariate_count() const { return static_cast<std::size_t>(covariates.cols()); }

  DenseTensor tensor(std::size_t i) const {
    const auto row = design.row(static_cast<Eigen::Index>(i));
    return DenseTensor(dims, std::vector<double>(row.data(), row.data() + row.size()));
  }

  std::span<const double> covariate_row(std::size_t i) const {
    return {covariates.data() + i * covariates.cols(),
            static_cast<std::size_t>(covariates.cols())};
  }

  void validate() const {
    validate_dims(dims);
    const auto n = labels.size();
    if (design.rows() != n || covariates.rows() != n) {
      throw StructuralError("dataset: design, covariates and labels disagree on n");
    }
    if (static_cast<std::size_t>(design.cols()) != cell_count(dims)) {
      throw StructuralError("dataset: design width does not match tensor dims " +
                            dims_string(dims));
    }
    if (covariates.cols() < 1) {
      throw StructuralError("dataset: covariates need at least the intercept column");
    }
    for (Eigen::Index i = 0; i < n; ++i) {
      const double y = labels[i];
      const bool ok = convention == LabelConvention::PlusMinusOne
                          ? (y == -1.0 || y == 1.0)
                          : (y == 0.0 || y == 1.0);
      if (!ok) {
        throw StructuralError("dataset: label " + std::to_string(y) + " at row " +
                              std::to_string(i) + " violates convention " +
                              to_string(convention));
      }
    }
  }

  /// Same data with labels mapped to the requested convention.
  Dataset with_convention(LabelConvention target) const {
    Dataset out = *this;
    if (target == convention) return out;
    for (Eigen::Index i = 0; i < out.labels.size(); ++i) {
      out.labels[i] = target == LabelConvention::ZeroOne ? (labels[i] > 0 ? 1.0 : 0.0)
                                                         : (labels[i] > 0 ? 1.0 : -1.0);
    }
    out.convention = target;
    return out;
  }

  /// Rows selected by `index`, in that order; ground truth is carried over.
  Dataset subset(std::span<const std::size_t> index) const {
    Dataset out;
    out.dims = dims;
    out.convention = convention;
    out.truth = truth;
    const auto m = static_cast<Eigen::Index>(index.size());
    out.design.resize(m, design.cols());
    out.covariates.resize(m, covariates.cols());
    out.labels.resize(m);
    for (Eigen::Index k = 0; k < m; ++k) {
      const auto i = static_cast<Eigen::Index>(index[static_cast<std::size_t>(k)]);
      if (i >= labels.size()) throw StructuralError("dataset subset index out of range");
      out.design.row(k) = design.row(i);
      out.covariates.row(k) = covariates.row(i);
      out.labels[k] = labels[i];
    }
    return out;
  }
};

}  // namespace btc

#endif  // BTC_DATASET_HPP
