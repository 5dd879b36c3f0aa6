#pragma once

// Dense tensors, tensor-valued time series, and the small set of
// multilinear primitives everything else is built from.
//
// Layout convention (used everywhere, including serialization):
//   * entries are stored flat with the FIRST index varying fastest, i.e. the
//     natural generalization of column-major order:
//       flat(i_1,...,i_K) = i_1 + d_1*(i_2 + d_2*(i_3 + ...))
//   * the mode-k unfolding unfold(X, k) is the d_k x (prod_{j!=k} d_j)
//     matrix whose rows are indexed by i_k and whose columns run through the
//     remaining modes in the cyclic order (k+1, ..., K, 1, ..., k-1) with
//     the first listed mode varying fastest.
//
// For K = 2 this makes unfold(X, 0) the identity reshape and
// unfold(X, 1) the transpose, and for any K the mode-0 unfolding is a plain
// reshape of the flat buffer.  Modes are 0-based throughout the C++ API.

#include <vector>

#include <Eigen/Dense>

#include "tfm/common.hpp"

namespace tfm {

// ---------------------------------------------------------------------------
// DenseTensor
// ---------------------------------------------------------------------------

class DenseTensor {
 public:
  // Zero tensor of the given shape.  Order must lie in [1, kMaxOrder] and
  // every extent must be positive.
  explicit DenseTensor(std::vector<Index> dims);

  // Tensor with explicit contents; data.size() must equal the shape product.
  DenseTensor(std::vector<Index> dims, std::vector<double> data);

  Index order() const { return static_cast<Index>(dims_.size()); }
  const std::vector<Index>& dims() const { return dims_; }
  Index dim(Index mode) const;
  Index size() const { return static_cast<Index>(data_.size()); }

  double* data() { return data_.data(); }
  const double* data() const { return data_.data(); }

  // Multi-index element access (mainly for tests and small constructions;
  // bulk math goes through unfold / mode products).
  double& at(const std::vector<Index>& idx);
  double at(const std::vector<Index>& idx) const;

  // Flat views of the underlying buffer.
  Eigen::Map<Eigen::VectorXd> vec() {
    return {data_.data(), static_cast<Eigen::Index>(data_.size())};
  }
  Eigen::Map<const Eigen::VectorXd> vec() const {
    return {data_.data(), static_cast<Eigen::Index>(data_.size())};
  }

 private:
  std::vector<Index> dims_;
  std::vector<double> data_;
};

// ---------------------------------------------------------------------------
// TensorSeries
// ---------------------------------------------------------------------------

// An ordered collection X_1, ..., X_T of tensors sharing one shape.  A
// series has at least two observations; anything shorter has no temporal
// structure to exploit.  Safe to share across threads for reading.
class TensorSeries {
 public:
  // Series of `length` zero tensors with the given shape.
  TensorSeries(std::vector<Index> dims, Index length);

  // Takes ownership of pre-built items; all must share the first item's
  // shape and there must be at least two of them.
  static TensorSeries from_items(std::vector<DenseTensor> items);

  Index length() const { return static_cast<Index>(items_.size()); }
  const std::vector<Index>& dims() const { return dims_; }
  Index order() const { return static_cast<Index>(dims_.size()); }

  const DenseTensor& operator[](Index t) const;
  DenseTensor& operator[](Index t);

 private:
  TensorSeries() = default;

  std::vector<Index> dims_;
  std::vector<DenseTensor> items_;
};

// ---------------------------------------------------------------------------
// Multilinear primitives
// ---------------------------------------------------------------------------

// Mode-k unfolding under the cyclic column convention described above.
Eigen::MatrixXd unfold(const DenseTensor& x, Index mode);

// Inverse of unfold: rebuilds the tensor of shape `dims` whose mode-k
// unfolding is `m`.  refold(unfold(x, k), k, x.dims()) == x exactly.
DenseTensor refold(const Eigen::MatrixXd& m, Index mode,
                   const std::vector<Index>& dims);

// Mode-k product x ×_k u: multiplies every mode-k fiber by the matrix u
// (u.cols() must equal dim(mode)); the result has dim(mode) == u.rows().
DenseTensor mode_product(const DenseTensor& x, const Eigen::MatrixXd& u,
                         Index mode);

// Tensor (outer) product: result order is order(a) + order(b), with a's
// modes first; result(i..., j...) = a(i...) * b(j...).
DenseTensor outer_product(const DenseTensor& a, const DenseTensor& b);

// Hilbert–Schmidt (Frobenius) norm: the Euclidean norm of the flat buffer.
double hs_norm(const DenseTensor& x);

// Stacks a series into a single order-(K+1) tensor with time as the last
// (slowest) mode.
DenseTensor stack_time(const TensorSeries& series);

}  // namespace tfm
