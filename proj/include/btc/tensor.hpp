#ifndef BTC_TENSOR_HPP
#define BTC_TENSOR_HPP

// Dense D-way tensors, rank-R PARAFAC factors and the contractions the
// samplers are built on. Storage is row-major with the last index varying
// fastest everywhere in the library (file formats included).

#include <Eigen/Dense>

#include <cstddef>
#include <functional>
#include <numeric>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "btc/error.hpp"

namespace btc {

using Dims = std::vector<std::size_t>;

inline std::size_t cell_count(const Dims& dims) {
  return std::accumulate(dims.begin(), dims.end(), std::size_t{1},
                         std::multiplies<>());
}

inline std::string dims_string(const Dims& dims) {
  std::string s = "(";
  for (std::size_t k = 0; k < dims.size(); ++k) {
    if (k) s += "x";
    s += std::to_string(dims[k]);
  }
  return s + ")";
}

inline void validate_dims(const Dims& dims) {
  if (dims.empty()) throw StructuralError("tensor must have at least one mode");
  for (auto p : dims) {
    if (p == 0) throw StructuralError("tensor modes must be non-empty");
  }
}

/// Neumaier compensated accumulator.
class CompensatedSum {
 public:
  void add(double v) {
    const double t = sum_ + v;
    if (std::abs(sum_) >= std::abs(v)) {
      carry_ += (sum_ - t) + v;
    } else {
      carry_ += (v - t) + sum_;
    }
    sum_ = t;
  }
  double value() const { return sum_ + carry_; }

 private:
  double sum_ = 0.0;
  double carry_ = 0.0;
};

class DenseTensor {
 public:
  DenseTensor() = default;

  explicit DenseTensor(Dims dims) : dims_(std::move(dims)) {
    validate_dims(dims_);
    values_.assign(cell_count(dims_), 0.0);
  }

  DenseTensor(Dims dims, std::vector<double> values)
      : dims_(std::move(dims)), values_(std::move(values)) {
    validate_dims(dims_);
    if (values_.size() != cell_count(dims_)) {
      throw StructuralError("tensor " + dims_string(dims_) + " needs " +
                            std::to_string(cell_count(dims_)) +
                            " values, got " + std::to_string(values_.size()));
    }
  }

  const Dims& dims() const { return dims_; }
  std::size_t order() const { return dims_.size(); }
  std::size_t size() const { return values_.size(); }

  std::span<double> values() { return values_; }
  std::span<const double> values() const { return values_; }

  double& operator[](std::size_t flat) { return values_[flat]; }
  double operator[](std::size_t flat) const { return values_[flat]; }

  /// Row-major flat offset of a multi-index.
  std::size_t offset(std::span<const std::size_t> index) const {
    if (index.size() != dims_.size()) {
      throw StructuralError("index order does not match tensor order");
    }
    std::size_t flat = 0;
    for (std::size_t k = 0; k < dims_.size(); ++k) {
      if (index[k] >= dims_[k]) throw StructuralError("tensor index out of range");
      flat = flat * dims_[k] + index[k];
    }
    return flat;
  }

  double at(std::initializer_list<std::size_t> index) const {
    return values_[offset(std::span<const std::size_t>(index.begin(), index.size()))];
  }

  bool operator==(const DenseTensor&) const = default;

 private:
  Dims dims_;
  std::vector<double> values_;
};

/// Rank-R PARAFAC representation: margin (j, r) is a vector of length p_j.
class ParafacFactors {
 public:
  ParafacFactors() = default;

  /// All-zero margins of the given rank and mode sizes.
  ParafacFactors(std::size_t rank, Dims dims) : rank_(rank), dims_(std::move(dims)) {
    validate_dims(dims_);
    if (rank_ == 0) throw StructuralError("PARAFAC rank must be at least 1");
    margins_.resize(rank_ * dims_.size());
    for (std::size_t r = 0; r < rank_; ++r) {
      for (std::size_t j = 0; j < dims_.size(); ++j) {
        margins_[r * dims_.size() + j].assign(dims_[j], 0.0);
      }
    }
  }

  std::size_t rank() const { return rank_; }
  std::size_t order() const { return dims_.size(); }
  const Dims& dims() const { return dims_; }

  std::span<double> margin(std::size_t j, std::size_t r) {
    return margins_[slot(j, r)];
  }
  std::span<const double> margin(std::size_t j, std::size_t r) const {
    return margins_[slot(j, r)];
  }

  void set_margin(std::size_t j, std::size_t r, std::span<const double> values) {
    auto& m = margins_[slot(j, r)];
    if (values.size() != m.size()) {
      throw StructuralError("margin (" + std::to_string(j) + "," +
                            std::to_string(r) + ") needs length " +
                            std::to_string(m.size()));
    }
    std::copy(values.begin(), values.end(), m.begin());
  }

  bool operator==(const ParafacFactors&) const = default;

 private:
  std::size_t slot(std::size_t j, std::size_t r) const {
    if (j >= dims_.size() || r >= rank_) {
      throw StructuralError("margin index (" + std::to_string(j) + "," +
                            std::to_string(r) + ") out of range");
    }
    return r * dims_.size() + j;
  }

  std::size_t rank_ = 0;
  Dims dims_;
  std::vector<std::vector<double>> margins_;
};

namespace detail {

inline void require_same_dims(const Dims& a, const Dims& b, const char* what) {
  if (a != b) {
    throw StructuralError(std::string(what) + ": dimension mismatch " +
                          dims_string(a) + " vs " + dims_string(b));
  }
}

// Outer product of margins [first, last) of component r, row-major.
inline std::vector<double> partial_outer(const ParafacFactors& f, std::size_t r,
                                         std::size_t first, std::size_t last) {
  std::vector<double> out{1.0};
  for (std::size_t j = first; j < last; ++j) {
    const auto m = f.margin(j, r);
    std::vector<double> next(out.size() * m.size());
    for (std::size_t a = 0; a < out.size(); ++a) {
      for (std::size_t k = 0; k < m.size(); ++k) next[a * m.size() + k] = out[a] * m[k];
    }
    out = std::move(next);
  }
  return out;
}

}  // namespace detail

/// The r-th rank-1 component beta_1^(r) o ... o beta_D^(r).
inline DenseTensor compose_component(const ParafacFactors& factors, std::size_t r) {
  return DenseTensor(factors.dims(),
                     detail::partial_outer(factors, r, 0, factors.order()));
}

/// B = sum_r beta_1^(r) o ... o beta_D^(r).
inline DenseTensor parafac_compose(const ParafacFactors& factors) {
  if (factors.rank() == 0) throw StructuralError("empty PARAFAC factors");
  for (std::size_t r = 0; r < factors.rank(); ++r) {
    for (std::size_t j = 0; j < factors.order(); ++j) {
      if (factors.margin(j, r).size() != factors.dims()[j]) {
        throw StructuralError("margin length does not match mode size");
      }
    }
  }
  DenseTensor out(factors.dims());
  for (std::size_t r = 0; r < factors.rank(); ++r) {
    const auto comp = detail::partial_outer(factors, r, 0, factors.order());
    for (std::size_t c = 0; c < comp.size(); ++c) out[c] += comp[c];
  }
  return out;
}

/// <X, B>, accumulated with compensated summation.
inline double tensor_inner(const DenseTensor& x, const DenseTensor& b) {
  detail::require_same_dims(x.dims(), b.dims(), "tensor_inner");
  CompensatedSum acc;
  for (std::size_t c = 0; c < x.size(); ++c) acc.add(x[c] * b[c]);
  return acc.value();
}

/// Design row h for margin (j, r): h . beta_j^(r) = <X, B_r>, where B_r is
/// the r-th rank-1 component. h_k sums x over every cell whose mode-j index
/// is k, weighted by the product of the other margins at that cell.
inline std::vector<double> mode_design_row(const DenseTensor& x,
                                           const ParafacFactors& factors,
                                           std::size_t j, std::size_t r) {
  detail::require_same_dims(x.dims(), factors.dims(), "mode_design_row");
  if (j >= factors.order() || r >= factors.rank()) {
    throw StructuralError("mode_design_row: index out of range");
  }
  const auto pre = detail::partial_outer(factors, r, 0, j);
  const auto post = detail::partial_outer(factors, r, j + 1, factors.order());
  const std::size_t pj = factors.dims()[j];
  std::vector<double> h(pj, 0.0);
  const auto v = x.values();
  for (std::size_t a = 0; a < pre.size(); ++a) {
    for (std::size_t k = 0; k < pj; ++k) {
      const double* cell = v.data() + (a * pj + k) * post.size();
      CompensatedSum acc;
      for (std::size_t b = 0; b < post.size(); ++b) acc.add(cell[b] * post[b]);
      h[k] += pre[a] * acc.value();
    }
  }
  return h;
}

/// <X, B_r> for one rank-1 component without materializing it.
inline double rank1_inner(const DenseTensor& x, const ParafacFactors& factors,
                          std::size_t r) {
  const std::size_t last = factors.order() - 1;
  const auto h = mode_design_row(x, factors, last, r);
  const auto m = factors.margin(last, r);
  CompensatedSum acc;
  for (std::size_t k = 0; k < h.size(); ++k) acc.add(h[k] * m[k]);
  return acc.value();
}

/// f = <X, B> + z'gamma with B given by its PARAFAC factors.
inline double linear_predictor(const DenseTensor& x, std::span<const double> z,
                               const ParafacFactors& factors,
                               std::span<const double> gamma) {
  if (z.size() != gamma.size()) {
    throw StructuralError("linear_predictor: z has length " +
                          std::to_string(z.size()) + " but gamma has " +
                          std::to_string(gamma.size()));
  }
  detail::require_same_dims(x.dims(), factors.dims(), "linear_predictor");
  CompensatedSum acc;
  for (std::size_t r = 0; r < factors.rank(); ++r) acc.add(rank1_inner(x, factors, r));
  for (std::size_t k = 0; k < z.size(); ++k) acc.add(z[k] * gamma[k]);
  return acc.value();
}

using RowMatrix = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

/// Batched design rows for n samples stored as the rows of `design`
/// (n x prod(dims), each row a row-major tensor). Row i of the result is
/// mode_design_row(X_i, factors, j, r), computed with two matrix-vector
/// products instead of a per-cell loop.
inline void mode_design_matrix(const RowMatrix& design, const ParafacFactors& factors,
                               std::size_t j, std::size_t r, RowMatrix& out) {
  const auto pre = detail::partial_outer(factors, r, 0, j);
  const auto post = detail::partial_outer(factors, r, j + 1, factors.order());
  const auto n = design.rows();
  const auto pj = static_cast<Eigen::Index>(factors.dims()[j]);
  const auto npre = static_cast<Eigen::Index>(pre.size());
  const auto npost = static_cast<Eigen::Index>(post.size());
  if (design.cols() != npre * pj * npost) {
    throw StructuralError("mode_design_matrix: design width does not match factors");
  }
  out.resize(n, pj);
  if (n == 0) return;
  const Eigen::Map<const Eigen::VectorXd> wpost(post.data(), npost);
  const Eigen::Map<const Eigen::VectorXd> wpre(pre.data(), npre);
  // Contract the trailing modes: (n*pre*pj) x post times wpost.
  const Eigen::Map<const RowMatrix> tall(design.data(), n * npre * pj, npost);
  const Eigen::VectorXd partial = tall * wpost;
  if (npre == 1) {
    // pre holds one weight: 1 for j = 0, beta_0 itself when p_0 = 1.
    out = pre[0] * Eigen::Map<const RowMatrix>(partial.data(), n, pj);
    return;
  }
  for (Eigen::Index i = 0; i < n; ++i) {
    const Eigen::Map<const RowMatrix> block(partial.data() + i * npre * pj, npre, pj);
    out.row(i).noalias() = wpre.transpose() * block;
  }
}

}  // namespace btc

#endif  // BTC_TENSOR_HPP
