#pragma once

// Iterative projection estimation.
//
// Starting from per-mode moment estimates on the raw series, each sweep
// revisits the modes in order and re-estimates mode k from the series
// projected onto the CURRENT estimates of all other modes (those updated
// earlier in the same sweep are used immediately).  Projection shrinks the
// effective noise dimension, so each pass sharpens the estimate; iteration
// stops when no mode's subspace moved more than `epsilon` in projection
// distance, or after `max_sweeps` passes.
//
// The classical method presets are expressed through two knobs: the moment
// flavor used for initialization (uinit) and for sweeps (uiter), plus the
// sweep budget.  "TOPUP" alone is the non-iterative estimate, "1TOPUP" is
// exactly one sweep, "iTOPUP" iterates to tolerance, and mixed names such
// as "TOPUP-1TIPUP" initialize with one flavor and sweep with the other.

#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "tfm/moment.hpp"
#include "tfm/spectral.hpp"
#include "tfm/tensor.hpp"

namespace tfm {

using LoadingSet = std::vector<OrthoBasis>;

struct IterConfig {
  std::vector<Index> ranks;  // target rank per mode (required)
  int h0_init = 1;           // lags pooled by the initializer
  int h0_iter = 1;           // lags pooled inside sweeps
  Flavor uinit = Flavor::TOPUP;
  Flavor uiter = Flavor::TOPUP;
  double epsilon = 1e-4;     // subspace-movement tolerance between sweeps
  int max_sweeps = kAutoSweeps;  // 0 = init only; kAutoSweeps = size-based cap
  bool record_trajectory = false;

  // Sentinel: resolve the sweep cap to max(10, ceil(ln(prod dims))).
  static constexpr int kAutoSweeps = -1;
};

// Per-sweep movement record (projection distance of each mode's new basis
// from its previous one).
struct SweepDelta {
  std::vector<double> per_mode;
  double max = 0.0;
};

struct EstimationResult {
  LoadingSet loadings;                      // final estimates, one per mode
  std::vector<Eigen::MatrixXd> projectors;  // U_k U_k' for convenience
  TensorSeries factors;    // X_t contracted by every U_k'
  TensorSeries residuals;  // X_t minus its projection onto all loading spaces
  int sweeps_used = 0;
  bool converged = false;  // tolerance met before the sweep cap
  LoadingSet init_loadings;                  // stage snapshot: initializer
  std::optional<LoadingSet> sweep1_loadings;  // stage snapshot: first sweep
  std::vector<SweepDelta> trajectory;  // filled when record_trajectory
  SignalDiagnostics diagnostics;  // signal strengths at the final loadings
};

// Projects every mode except `skip_mode` onto its basis:
//   Z_t = X_t x_{j != skip} U_j'.
// Entry skip_mode of `loadings` is ignored (it may be any basis of the right
// shape).  With K = 1 this is the identity.
TensorSeries project_series(const TensorSeries& series,
                            const LoadingSet& loadings, Index skip_mode);

// Runs initialization plus sweeps as configured and packages the full fit.
EstimationResult run(const TensorSeries& series, const IterConfig& config);

// IterConfig fragment for a named preset: fills uinit/uiter, the sweep
// budget, and epsilon; ranks and h0 remain the caller's to set.  Recognized
// names: UP, 1UP, iUP, TOPUP, 1TOPUP, iTOPUP, TIPUP, 1TIPUP, iTIPUP,
// TIPUP-1TOPUP, TIPUP-iTOPUP, TOPUP-1TIPUP, TOPUP-iTIPUP.
IterConfig method_preset(std::string_view name);

// All preset names, in the canonical order above.
const std::vector<std::string>& method_preset_names();

}  // namespace tfm
