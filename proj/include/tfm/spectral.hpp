#pragma once

// Orthonormal bases, truncated left singular decompositions, and the
// projection metric used to compare column spaces.

#include <Eigen/Dense>

#include "tfm/common.hpp"

namespace tfm {

// A matrix with orthonormal columns spanning an estimated or true loading
// space.  Construction validates orthonormality so downstream code can rely
// on U'U == I without re-checking.
class OrthoBasis {
 public:
  // Throws InvalidArgument unless max|cols'cols - I| <= 1e-10.
  explicit OrthoBasis(Eigen::MatrixXd cols);

  Index dim() const { return cols_.rows(); }
  Index rank() const { return cols_.cols(); }
  const Eigen::MatrixXd& matrix() const { return cols_; }

 private:
  Eigen::MatrixXd cols_;
};

// Leading `rank` left singular vectors of m, ordered by descending singular
// value.  Each column's sign is fixed so that its largest-magnitude entry is
// positive (first such entry on ties), which pins the output bit-for-bit for
// a given input.  Requires 1 <= rank <= rows(m) and finite entries.
OrthoBasis lsvd(const Eigen::MatrixXd& m, Index rank);

// Same subspace extracted from the Gram matrix G = M M' instead of M itself:
// the leading `rank` eigenvectors of G with the sign convention above.
// G must be symmetric and positive semidefinite up to round-off (checks are
// relative to the scale of G).  Preferred whenever M is much wider than
// tall; by convention the Gram route takes over once the wide side exceeds
// four times the tall side.
OrthoBasis gram_lsvd(const Eigen::MatrixXd& gram, Index rank);

// Orthogonal projector U U' onto the basis's column space.
Eigen::MatrixXd projector(const OrthoBasis& u);

// Projection distance between two column spaces of equal dimension and rank:
// the spectral norm of the projector difference, which equals the sine of
// the largest principal angle.  Ranges over [0, 1]; 0 iff the spaces match,
// 1 iff some direction of one space is orthogonal to all of the other.
double subspace_distance(const OrthoBasis& a, const OrthoBasis& b);

}  // namespace tfm
