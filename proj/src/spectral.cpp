#include "tfm/spectral.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include <Eigen/Eigenvalues>
#include <Eigen/SVD>

namespace tfm {
namespace {

// Flips every column so that its entry of largest magnitude is positive
// (lowest index wins on ties).  Makes factorization output deterministic
// across code paths that agree on the subspace but not on signs.
void fix_column_signs(Eigen::MatrixXd& u) {
  for (Eigen::Index j = 0; j < u.cols(); ++j) {
    Eigen::Index imax = 0;
    u.col(j).cwiseAbs().maxCoeff(&imax);
    if (u(imax, j) < 0.0) u.col(j) = -u.col(j);
  }
}

void check_rank(Index rank, Index dim) {
  if (rank < 1 || rank > dim) {
    throw InvalidArgument("requested rank " + std::to_string(rank) +
                          " is outside [1, " + std::to_string(dim) + "]");
  }
}

}  // namespace

OrthoBasis::OrthoBasis(Eigen::MatrixXd cols) : cols_(std::move(cols)) {
  if (cols_.rows() < 1 || cols_.cols() < 1 || cols_.cols() > cols_.rows()) {
    throw InvalidArgument("an orthonormal basis needs 1 <= rank <= dim");
  }
  const Eigen::MatrixXd gram = cols_.transpose() * cols_;
  const double defect =
      (gram - Eigen::MatrixXd::Identity(cols_.cols(), cols_.cols()))
          .cwiseAbs()
          .maxCoeff();
  if (!(defect <= 1e-10)) {
    throw InvalidArgument("basis columns are not orthonormal (defect " +
                          std::to_string(defect) + ")");
  }
}

OrthoBasis lsvd(const Eigen::MatrixXd& m, Index rank) {
  check_rank(rank, m.rows());
  if (!m.allFinite()) {
    throw InvalidArgument("lsvd input contains non-finite entries");
  }
  if (rank > std::min(m.rows(), m.cols())) {
    throw InvalidArgument("requested rank exceeds the number of singular "
                          "vectors the matrix can supply");
  }
  Eigen::BDCSVD<Eigen::MatrixXd> svd(m, Eigen::ComputeThinU);
  Eigen::MatrixXd u = svd.matrixU().leftCols(rank);
  fix_column_signs(u);
  return OrthoBasis(std::move(u));
}

OrthoBasis gram_lsvd(const Eigen::MatrixXd& gram, Index rank) {
  if (gram.rows() != gram.cols()) {
    throw DimensionMismatch("a Gram matrix must be square");
  }
  check_rank(rank, gram.rows());
  if (!gram.allFinite()) {
    throw InvalidArgument("gram_lsvd input contains non-finite entries");
  }
  const double scale = std::max(1.0, gram.cwiseAbs().maxCoeff());
  const double asym = (gram - gram.transpose()).cwiseAbs().maxCoeff();
  if (!(asym <= 1e-9 * scale)) {
    throw InvalidArgument("gram_lsvd input is not symmetric");
  }
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(
      (gram + gram.transpose()) / 2.0);
  if (eig.info() != Eigen::Success) {
    throw Error("eigendecomposition failed to converge");
  }
  // Eigenvalues come back ascending; a meaningfully negative one means the
  // caller's matrix was no Gram matrix at all.
  if (eig.eigenvalues()(0) < -1e-8 * scale) {
    throw InvalidArgument("gram_lsvd input is not positive semidefinite");
  }
  const Eigen::Index n = gram.rows();
  Eigen::MatrixXd u(n, rank);
  for (Index j = 0; j < rank; ++j) u.col(j) = eig.eigenvectors().col(n - 1 - j);
  fix_column_signs(u);
  return OrthoBasis(std::move(u));
}

Eigen::MatrixXd projector(const OrthoBasis& u) {
  return u.matrix() * u.matrix().transpose();
}

double subspace_distance(const OrthoBasis& a, const OrthoBasis& b) {
  if (a.dim() != b.dim()) {
    throw DimensionMismatch("subspace_distance requires equal ambient "
                            "dimensions");
  }
  if (a.rank() != b.rank()) {
    throw DimensionMismatch("subspace_distance requires equal ranks");
  }
  // For orthonormal U, V of equal rank, ||UU' - VV'||_2 = sin(theta_max),
  // and sin(theta_max) is the largest singular value of (I - UU')V.  The
  // residual form is evaluated directly (rather than as sqrt(1 - cos^2) from
  // the singular values of U'V) because it stays accurate when the spaces
  // nearly coincide: near-identical subspaces should measure ~1e-15, not the
  // ~1e-8 that the complement of a rounded cosine would give.
  const Eigen::MatrixXd residual =
      b.matrix() - a.matrix() * (a.matrix().transpose() * b.matrix());
  Eigen::JacobiSVD<Eigen::MatrixXd> svd(residual);
  return std::min(1.0, svd.singularValues().maxCoeff());
}

}  // namespace tfm
