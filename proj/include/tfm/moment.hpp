#pragma once

// Lagged moment estimators for the loading spaces of a tensor factor model
//
//   X_t = F_t x_1 A_1 x_2 ... x_K A_K + E_t,
//
// where the noise is white across time, so every cross-lag moment of X_t at
// lag h >= 1 carries only signal.  Three flavors of moment are supported:
//
//   TOPUP  - time series outer-product unfolding: for each lag h the order-4
//            object sum_t mat_k(X_{t-h}) (x) mat_k(X_t) / (T-h); lags are
//            stacked and the loading space is read off the leading left
//            singular vectors of the mode-1 unfolding of the stack.
//   TIPUP  - time series inner-product unfolding: the same moments with the
//            non-k indices contracted, i.e. the d_k x d_k lag blocks
//            sum_t mat_k(X_{t-h}) mat_k(X_t)' / (T-h), stacked side by side.
//   UP     - lag-free unfolding of the raw data (time treated as one more
//            mode); the estimator classical PCA would suggest, kept as the
//            natural baseline.
//
// Lag h = 0 is always excluded: the contemporaneous moment mixes in the
// noise covariance, which is exactly what the lagged estimators avoid.

#include <vector>

#include <Eigen/Dense>

#include "tfm/spectral.hpp"
#include "tfm/tensor.hpp"

namespace tfm {

enum class Flavor { TOPUP, TIPUP, UP };

struct MomentConfig {
  int h0 = 1;  // number of lags pooled (1 <= h0 < T); ignored by UP
  Flavor flavor = Flavor::TOPUP;
};

// Gram matrix (d_k x d_k) of the mode-1 unfolding of the stacked TOPUP
// moments.  Computed without materializing the order-5 stack, via
//   sum_h (T-h)^{-2} sum_{t,s>h} <X_t, X_s>  mat_k(X_{t-h}) mat_k(X_{s-h})',
// which collapses to two small matrix products per lag.  The result is
// symmetrized to remove round-off drift, so gram_lsvd accepts it directly.
Eigen::MatrixXd topup_gram(const TensorSeries& series, Index mode, int h0);

// The d_k x (d_k * h0) TIPUP matrix: lag blocks side by side, lag 1 first.
Eigen::MatrixXd tipup_matrix(const TensorSeries& series, Index mode, int h0);

// Gram matrix sum_t mat_k(X_t) mat_k(X_t)' of the lag-free unfolding (UP).
Eigen::MatrixXd up_gram(const TensorSeries& series, Index mode);

// Estimated loading basis for one mode: the leading `rank` left singular
// directions of the configured moment.  Routes TOPUP through its Gram
// matrix, TIPUP through a direct SVD of the (narrow) TIPUP matrix, and UP
// through whichever of the stacked unfolding / its Gram is cheaper.  A
// full-rank request (rank == d_k) short-circuits to the identity basis: the
// whole space is the only rank-d_k answer, and it keeps residuals of a
// full-rank fit exactly zero.  Throws DegenerateMoment when every singular
// value sits below the degeneracy floor (e.g. an all-zero series).
OrthoBasis estimate_loading(const TensorSeries& series, Index mode, Index rank,
                            const MomentConfig& config);

// How the r_k-th singular value of a lag-pooled moment is normalized into a
// squared signal-strength estimate: divide by h0 (LAG_MEAN, the default) or
// by sqrt(h0) (LAG_SQRT).  Both agree at h0 = 1.
enum class SignalNormalization { LAG_MEAN, LAG_SQRT };

double apply_normalization(double sv, int h0, SignalNormalization norm);

// Signal-strength diagnostics for every mode of a series: the normalized
// r_k-th singular values of the TOPUP stack (lambda_sq) and of the TIPUP
// matrix (lambda_star_sq), plus the full leading spectra they were read
// from.  A degenerate (all-zero) series yields zeros rather than an error;
// the diagnostics describe, they do not estimate directions.
struct SignalDiagnostics {
  SignalNormalization normalization = SignalNormalization::LAG_MEAN;
  int h0 = 1;
  std::vector<double> lambda_sq;       // per mode, TOPUP-based
  std::vector<double> lambda_star_sq;  // per mode, TIPUP-based
  std::vector<std::vector<double>> topup_spectrum;  // per mode, descending
  std::vector<std::vector<double>> tipup_spectrum;
};

SignalDiagnostics signal_strength(const TensorSeries& series,
                                  const std::vector<Index>& ranks, int h0,
                                  SignalNormalization norm);

}  // namespace tfm
