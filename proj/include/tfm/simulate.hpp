#pragma once

// Synthetic tensor factor model generator and its population analytics.
//
// The generator draws
//   X_t = lambda * (F_t x_1 U_1 ... x_K U_K) + sigma * (Z_t x_1 Psi_1^{1/2} ...),
// where the U_k are orthonormal bases obtained by QR of standard normal
// draws, each entry of F_t follows an independent AR(1) with standard normal
// innovations (initialized from its stationary law and burned in), Z_t is
// white standard normal, and Psi_k is an equicorrelation matrix with
// off-diagonal rho_k.  Because the loadings are orthonormal and the factor
// entries independent, every population signal quantity is available in
// closed form, which the tests and benchmarks use as an oracle.

#include <cstdint>
#include <vector>

#include "tfm/iterate.hpp"
#include "tfm/moment.hpp"
#include "tfm/tensor.hpp"

namespace tfm {

struct ModelSpec {
  std::vector<Index> dims;
  std::vector<Index> ranks;
  double lambda = 1.0;
  // AR(1) coefficient per factor entry, in flat (first index fastest)
  // order over the rank shape; a single value broadcasts to all entries.
  std::vector<double> ar_coeffs;
  // Equicorrelation parameter of the noise covariance along each mode; a
  // single value broadcasts.  0 <= rho < 1.
  std::vector<double> noise_rho = {0.2};
  double noise_sigma = 1.0;  // overall noise scale; 0 gives a noiseless model
  std::uint64_t seed = 0;
  int burn_in = 200;  // AR warm-up steps discarded after the stationary init
};

struct GroundTruth {
  LoadingSet loadings;    // true U_k
  TensorSeries factors;   // F_t (rank shape)
  TensorSeries signal;    // lambda * F_t x_k U_k
  TensorSeries noise;     // sigma * Z_t x_k Psi_k^{1/2}
  TensorSeries observed;  // signal + noise
};

GroundTruth generate(const ModelSpec& spec, Index length);

// The three stock experimental settings on a 16 x 16 grid:
//   I   - rank (1,1), phi = 0.8
//   II  - rank (1,2), phi = (0.8, 0.6)
//   III - rank (1,2), phi = (0.8, -0.8); the two factor autocovariances
//         cancel exactly in the mode-1 TIPUP moment at lag 1, the standard
//         stress test separating the outer- and inner-product estimators.
enum class Setting { I, II, III };

ModelSpec setting_preset(Setting setting, double lambda, std::uint64_t seed);

// Matrix square root of the equicorrelation matrix (1-rho) I + rho 11':
// a I + b 11' with a = sqrt(1-rho) and b = (sqrt(1-rho+d*rho) - a) / d.
Eigen::MatrixXd equicorrelation_sqrt(Index d, double rho);

// Population signal strengths lambda_k^2 (TOPUP) or lambda_k^{*2} (TIPUP)
// for every mode: the r_k-th singular value of the stacked population
// moment, normalized like the empirical estimates.  Exact because the
// factor-entry autocovariances gamma(h) = phi^h / (1 - phi^2) are known and
// orthonormal loadings leave singular values untouched.  UP has no lagged
// population analogue and is rejected.
std::vector<double> population_signal(const ModelSpec& spec, int h0,
                                      Flavor flavor, SignalNormalization norm);

}  // namespace tfm
