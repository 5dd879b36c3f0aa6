#include "tfm/moment.hpp"

#include <cmath>
#include <string>

#include <Eigen/SVD>

namespace tfm {
namespace {

void check_h0(int h0, Index T) {
  if (h0 < 1 || static_cast<Index>(h0) >= T) {
    throw InvalidArgument("h0 must satisfy 1 <= h0 < T (got h0 = " +
                          std::to_string(h0) + ", T = " + std::to_string(T) +
                          ")");
  }
}

// Mode-k unfoldings of every observation, computed once per estimator call.
std::vector<Eigen::MatrixXd> unfold_all(const TensorSeries& series,
                                        Index mode) {
  std::vector<Eigen::MatrixXd> mats;
  mats.reserve(static_cast<std::size_t>(series.length()));
  for (Index t = 0; t < series.length(); ++t) {
    mats.push_back(unfold(series[t], mode));
  }
  return mats;
}

// Descending singular values via the Gram spectrum (eigenvalues clamped at
// zero before the square root).
Eigen::VectorXd gram_singular_values(const Eigen::MatrixXd& gram) {
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(gram,
                                                     Eigen::EigenvaluesOnly);
  Eigen::VectorXd sv = eig.eigenvalues().cwiseMax(0.0).cwiseSqrt();
  return sv.reverse();
}

}  // namespace

Eigen::MatrixXd topup_gram(const TensorSeries& series, Index mode, int h0) {
  const Index T = series.length();
  check_h0(h0, T);
  const std::vector<Eigen::MatrixXd> y = unfold_all(series, mode);
  const Index dk = y[0].rows();
  const Index drest = y[0].cols();
  const Index d = dk * drest;

  // For lag h let Theta_h = sum_t mat_k(X_{t-h}) (x) mat_k(X_t) / (T-h).
  // The Gram of the mode-1 unfolding of the stack over h is
  //   sum_h (T-h)^{-2} sum_{t,s>h} <X_t, X_s> Y_{t-h} Y_{s-h}'
  // with Y_t = mat_k(X_t).  Expanding the inner product over entries q of
  // vec(Y) turns each lag term into S_h S_h' where
  //   S_h[:, q] = sum_{t>h} vec(Y_{t-h}) Y-vec_t[q],
  // i.e. one (d x n) x (n x d) product, followed by one product of the d_k
  // x (d_rest * d) matrix that reinterprets S_h's columns as stacked
  // unfoldings.  Nothing of order 5 is ever materialized.
  Eigen::MatrixXd lagged(d, T);  // vec(Y_t) as columns
  for (Index t = 0; t < T; ++t) {
    lagged.col(t) = Eigen::Map<const Eigen::VectorXd>(y[t].data(), d);
  }

  Eigen::MatrixXd gram = Eigen::MatrixXd::Zero(dk, dk);
  for (int h = 1; h <= h0; ++h) {
    const Index n = T - h;
    const Eigen::MatrixXd s =
        lagged.leftCols(n) * lagged.rightCols(n).transpose();
    const Eigen::Map<const Eigen::MatrixXd> wide(s.data(), dk, drest * d);
    const double w = 1.0 / (static_cast<double>(n) * static_cast<double>(n));
    gram.noalias() += w * (wide * wide.transpose());
  }
  return (gram + gram.transpose()) / 2.0;
}

Eigen::MatrixXd tipup_matrix(const TensorSeries& series, Index mode, int h0) {
  const Index T = series.length();
  check_h0(h0, T);
  const std::vector<Eigen::MatrixXd> y = unfold_all(series, mode);
  const Index dk = y[0].rows();

  Eigen::MatrixXd out(dk, dk * static_cast<Index>(h0));
  for (int h = 1; h <= h0; ++h) {
    Eigen::MatrixXd block = Eigen::MatrixXd::Zero(dk, dk);
    for (Index t = h; t < T; ++t) {
      block.noalias() +=
          y[static_cast<std::size_t>(t - h)] *
          y[static_cast<std::size_t>(t)].transpose();
    }
    out.middleCols(dk * static_cast<Index>(h - 1), dk) =
        block / static_cast<double>(T - h);
  }
  return out;
}

Eigen::MatrixXd up_gram(const TensorSeries& series, Index mode) {
  const std::vector<Eigen::MatrixXd> y = unfold_all(series, mode);
  const Index dk = y[0].rows();
  Eigen::MatrixXd gram = Eigen::MatrixXd::Zero(dk, dk);
  for (const Eigen::MatrixXd& yt : y) {
    gram.noalias() += yt * yt.transpose();
  }
  return (gram + gram.transpose()) / 2.0;
}

namespace {

void check_degenerate_sv(double top_sv) {
  if (!(top_sv > kDegeneracyFloor)) {
    throw DegenerateMoment("moment matrix is numerically zero; no loading "
                           "direction can be estimated");
  }
}

OrthoBasis loading_from_gram(const Eigen::MatrixXd& gram, Index rank) {
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> probe(gram,
                                                       Eigen::EigenvaluesOnly);
  check_degenerate_sv(
      std::sqrt(std::max(0.0, probe.eigenvalues().maxCoeff())));
  return gram_lsvd(gram, rank);
}

}  // namespace

OrthoBasis estimate_loading(const TensorSeries& series, Index mode, Index rank,
                            const MomentConfig& config) {
  const Index dk = series.dims().at(static_cast<std::size_t>(mode));
  if (rank < 1 || rank > dk) {
    throw InvalidArgument("rank for mode " + std::to_string(mode) +
                          " must lie in [1, " + std::to_string(dk) + "]");
  }
  if (rank == dk) {
    // Full-rank request: the answer is the whole coordinate space.
    return OrthoBasis(Eigen::MatrixXd::Identity(dk, dk));
  }
  switch (config.flavor) {
    case Flavor::TOPUP:
      return loading_from_gram(topup_gram(series, mode, config.h0), rank);
    case Flavor::TIPUP: {
      const Eigen::MatrixXd m = tipup_matrix(series, mode, config.h0);
      Eigen::BDCSVD<Eigen::MatrixXd> probe(m);
      check_degenerate_sv(probe.singularValues().maxCoeff());
      return lsvd(m, rank);
    }
    case Flavor::UP: {
      // The stacked unfolding is d_k x (d_rest * T); go through its Gram
      // once the wide side dwarfs the tall one (the usual case), otherwise
      // decompose the explicit matrix.  Both give the same subspace.
      const Index wide =
          (series[0].size() / dk) * series.length();
      if (wide > 4 * dk) {
        return loading_from_gram(up_gram(series, mode), rank);
      }
      Eigen::MatrixXd stacked(dk, wide);
      const Index cols = series[0].size() / dk;
      for (Index t = 0; t < series.length(); ++t) {
        stacked.middleCols(t * cols, cols) = unfold(series[t], mode);
      }
      Eigen::BDCSVD<Eigen::MatrixXd> probe(stacked);
      check_degenerate_sv(probe.singularValues().maxCoeff());
      return lsvd(stacked, rank);
    }
  }
  throw InvalidArgument("unknown moment flavor");
}

double apply_normalization(double sv, int h0, SignalNormalization norm) {
  switch (norm) {
    case SignalNormalization::LAG_MEAN:
      return sv / static_cast<double>(h0);
    case SignalNormalization::LAG_SQRT:
      return sv / std::sqrt(static_cast<double>(h0));
  }
  throw InvalidArgument("unknown signal normalization");
}

SignalDiagnostics signal_strength(const TensorSeries& series,
                                  const std::vector<Index>& ranks, int h0,
                                  SignalNormalization norm) {
  const Index K = series.order();
  if (static_cast<Index>(ranks.size()) != K) {
    throw DimensionMismatch("signal_strength needs one rank per mode");
  }
  check_h0(h0, series.length());
  SignalDiagnostics diag;
  diag.normalization = norm;
  diag.h0 = h0;
  for (Index k = 0; k < K; ++k) {
    const Index dk = series.dims()[static_cast<std::size_t>(k)];
    const Index rk = ranks[static_cast<std::size_t>(k)];
    if (rk < 1 || rk > dk) {
      throw InvalidArgument("rank for mode " + std::to_string(k) +
                            " must lie in [1, " + std::to_string(dk) + "]");
    }
    const Eigen::VectorXd top_sv =
        gram_singular_values(topup_gram(series, k, h0));
    Eigen::BDCSVD<Eigen::MatrixXd> tip(tipup_matrix(series, k, h0));
    const Eigen::VectorXd tip_sv = tip.singularValues();

    diag.lambda_sq.push_back(apply_normalization(top_sv(rk - 1), h0, norm));
    diag.lambda_star_sq.push_back(
        apply_normalization(tip_sv(rk - 1), h0, norm));
    diag.topup_spectrum.emplace_back(top_sv.data(), top_sv.data() + dk);
    diag.tipup_spectrum.emplace_back(tip_sv.data(), tip_sv.data() + dk);
  }
  return diag;
}

}  // namespace tfm
