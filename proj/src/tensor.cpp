#include "tfm/tensor.hpp"

#include <string>
#include <utility>

namespace tfm {
namespace {

// Validates a shape and returns its entry count, guarding against overflow.
Index checked_size(const std::vector<Index>& dims) {
  const Index order = static_cast<Index>(dims.size());
  if (order < 1) {
    throw InvalidArgument("tensor order must be at least 1 (order-0 scalars "
                          "are not representable)");
  }
  if (order > kMaxOrder) {
    throw InvalidArgument("tensor order " + std::to_string(order) +
                          " exceeds the supported maximum " +
                          std::to_string(kMaxOrder));
  }
  Index size = 1;
  for (Index d : dims) {
    if (d < 1) {
      throw InvalidArgument("tensor extents must be positive");
    }
    if (size > (static_cast<Index>(1) << 56) / d) {
      throw InvalidArgument("tensor shape is too large");
    }
    size *= d;
  }
  return size;
}

void check_mode(Index mode, Index order) {
  if (mode < 0 || mode >= order) {
    throw InvalidArgument("mode " + std::to_string(mode) +
                          " is out of range for an order-" +
                          std::to_string(order) + " tensor");
  }
}

// Strides of the cyclic mode-k unfolding: the flat offset decomposes as
//   flat = a + inner*i_k + inner*d_k*b
// with a running over modes < k (first fastest) and b over modes > k.
struct UnfoldShape {
  Index rows;   // d_k
  Index inner;  // prod_{j<k} d_j
  Index outer;  // prod_{j>k} d_j
};

UnfoldShape unfold_shape(const std::vector<Index>& dims, Index mode) {
  UnfoldShape s{dims[static_cast<std::size_t>(mode)], 1, 1};
  for (Index j = 0; j < mode; ++j) s.inner *= dims[static_cast<std::size_t>(j)];
  for (Index j = mode + 1; j < static_cast<Index>(dims.size()); ++j) {
    s.outer *= dims[static_cast<std::size_t>(j)];
  }
  return s;
}

}  // namespace

// ---------------------------------------------------------------------------
// DenseTensor
// ---------------------------------------------------------------------------

DenseTensor::DenseTensor(std::vector<Index> dims) : dims_(std::move(dims)) {
  data_.assign(static_cast<std::size_t>(checked_size(dims_)), 0.0);
}

DenseTensor::DenseTensor(std::vector<Index> dims, std::vector<double> data)
    : dims_(std::move(dims)), data_(std::move(data)) {
  if (checked_size(dims_) != static_cast<Index>(data_.size())) {
    throw DimensionMismatch("tensor data length does not match its shape");
  }
}

Index DenseTensor::dim(Index mode) const {
  check_mode(mode, order());
  return dims_[static_cast<std::size_t>(mode)];
}

namespace {

Index checked_flat(const std::vector<Index>& dims,
                   const std::vector<Index>& idx) {
  if (idx.size() != dims.size()) {
    throw DimensionMismatch("multi-index length does not match tensor order");
  }
  Index flat = 0;
  Index stride = 1;
  for (std::size_t k = 0; k < dims.size(); ++k) {
    if (idx[k] < 0 || idx[k] >= dims[k]) {
      throw InvalidArgument("multi-index out of bounds in mode " +
                            std::to_string(k));
    }
    flat += stride * idx[k];
    stride *= dims[k];
  }
  return flat;
}

}  // namespace

double& DenseTensor::at(const std::vector<Index>& idx) {
  return data_[static_cast<std::size_t>(checked_flat(dims_, idx))];
}

double DenseTensor::at(const std::vector<Index>& idx) const {
  return data_[static_cast<std::size_t>(checked_flat(dims_, idx))];
}

// ---------------------------------------------------------------------------
// TensorSeries
// ---------------------------------------------------------------------------

TensorSeries::TensorSeries(std::vector<Index> dims, Index length) {
  if (length < 2) {
    throw InvalidArgument("a tensor series needs at least two observations");
  }
  checked_size(dims);
  dims_ = std::move(dims);
  items_.reserve(static_cast<std::size_t>(length));
  for (Index t = 0; t < length; ++t) items_.emplace_back(dims_);
}

TensorSeries TensorSeries::from_items(std::vector<DenseTensor> items) {
  if (items.size() < 2) {
    throw InvalidArgument("a tensor series needs at least two observations");
  }
  for (const DenseTensor& item : items) {
    if (item.dims() != items.front().dims()) {
      throw DimensionMismatch("all tensors in a series must share one shape");
    }
  }
  TensorSeries series;
  series.dims_ = items.front().dims();
  series.items_ = std::move(items);
  return series;
}

const DenseTensor& TensorSeries::operator[](Index t) const {
  if (t < 0 || t >= length()) {
    throw InvalidArgument("series index out of range");
  }
  return items_[static_cast<std::size_t>(t)];
}

DenseTensor& TensorSeries::operator[](Index t) {
  return const_cast<DenseTensor&>(std::as_const(*this)[t]);
}

// ---------------------------------------------------------------------------
// Multilinear primitives
// ---------------------------------------------------------------------------

Eigen::MatrixXd unfold(const DenseTensor& x, Index mode) {
  check_mode(mode, x.order());
  const UnfoldShape s = unfold_shape(x.dims(), mode);
  Eigen::MatrixXd out(s.rows, s.inner * s.outer);
  const double* src = x.data();
  // Column index of entry (a, i, b) is b + outer*a: the modes above k form
  // the fast block (cyclic order k+1, ..., K, 1, ..., k-1).
  for (Index b = 0; b < s.outer; ++b) {
    for (Index i = 0; i < s.rows; ++i) {
      const double* slab = src + s.inner * (i + s.rows * b);
      for (Index a = 0; a < s.inner; ++a) {
        out(i, b + s.outer * a) = slab[a];
      }
    }
  }
  return out;
}

DenseTensor refold(const Eigen::MatrixXd& m, Index mode,
                   const std::vector<Index>& dims) {
  const Index size = checked_size(dims);
  check_mode(mode, static_cast<Index>(dims.size()));
  const UnfoldShape s = unfold_shape(dims, mode);
  if (m.rows() != s.rows || m.cols() != s.inner * s.outer) {
    throw DimensionMismatch("matrix shape does not match the requested "
                            "refold target");
  }
  DenseTensor out(dims);
  static_cast<void>(size);
  double* dst = out.data();
  for (Index b = 0; b < s.outer; ++b) {
    for (Index i = 0; i < s.rows; ++i) {
      double* slab = dst + s.inner * (i + s.rows * b);
      for (Index a = 0; a < s.inner; ++a) {
        slab[a] = m(i, b + s.outer * a);
      }
    }
  }
  return out;
}

DenseTensor mode_product(const DenseTensor& x, const Eigen::MatrixXd& u,
                         Index mode) {
  check_mode(mode, x.order());
  if (u.cols() != x.dim(mode)) {
    throw DimensionMismatch("mode_product: matrix has " +
                            std::to_string(u.cols()) +
                            " columns but mode extent is " +
                            std::to_string(x.dim(mode)));
  }
  std::vector<Index> out_dims = x.dims();
  out_dims[static_cast<std::size_t>(mode)] = u.rows();
  return refold(u * unfold(x, mode), mode, out_dims);
}

DenseTensor outer_product(const DenseTensor& a, const DenseTensor& b) {
  std::vector<Index> dims = a.dims();
  dims.insert(dims.end(), b.dims().begin(), b.dims().end());
  // checked_size enforces the combined-order cap before any allocation.
  checked_size(dims);
  DenseTensor out(dims);
  // With a's modes first and the first index fastest, a's flat index is the
  // fast block: out.vec() is the flat outer product b ⊗ a.
  Eigen::Map<Eigen::MatrixXd>(out.data(), a.size(), b.size()).noalias() =
      a.vec() * b.vec().transpose();
  return out;
}

double hs_norm(const DenseTensor& x) { return x.vec().norm(); }

DenseTensor stack_time(const TensorSeries& series) {
  std::vector<Index> dims = series.dims();
  dims.push_back(series.length());
  DenseTensor out(dims);
  // Time is the slowest mode, so the items concatenate in the flat buffer.
  const Index item_size = series[0].size();
  for (Index t = 0; t < series.length(); ++t) {
    Eigen::Map<Eigen::VectorXd>(out.data() + t * item_size, item_size) =
        series[t].vec();
  }
  return out;
}

}  // namespace tfm
