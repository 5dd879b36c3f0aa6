#include "tfm/iterate.hpp"

#include <algorithm>
#include <cmath>
#include <map>

namespace tfm {
namespace {

int resolve_sweep_cap(const IterConfig& config, Index total_size) {
  if (config.max_sweeps == IterConfig::kAutoSweeps) {
    const int by_size = static_cast<int>(
        std::ceil(std::log(static_cast<double>(total_size))));
    return std::max(10, by_size);
  }
  if (config.max_sweeps < 0) {
    throw InvalidArgument("max_sweeps must be >= 0 (or kAutoSweeps)");
  }
  return config.max_sweeps;
}

void validate(const TensorSeries& series, const IterConfig& config) {
  const Index K = series.order();
  if (static_cast<Index>(config.ranks.size()) != K) {
    throw DimensionMismatch("IterConfig needs one rank per series mode");
  }
  for (Index k = 0; k < K; ++k) {
    const Index dk = series.dims()[static_cast<std::size_t>(k)];
    const Index rk = config.ranks[static_cast<std::size_t>(k)];
    if (rk < 1 || rk > dk) {
      throw InvalidArgument("rank for mode " + std::to_string(k) +
                            " must lie in [1, " + std::to_string(dk) + "]");
    }
  }
  if (!(config.epsilon >= 0.0)) {
    throw InvalidArgument("epsilon must be non-negative");
  }
}

// X_t contracted by U_k' on every mode: the factor estimate.
TensorSeries contract_all(const TensorSeries& series,
                          const LoadingSet& loadings) {
  std::vector<DenseTensor> items;
  items.reserve(static_cast<std::size_t>(series.length()));
  for (Index t = 0; t < series.length(); ++t) {
    DenseTensor z = series[t];
    for (Index k = 0; k < series.order(); ++k) {
      z = mode_product(z, loadings[static_cast<std::size_t>(k)]
                              .matrix()
                              .transpose(),
                       k);
    }
    items.push_back(std::move(z));
  }
  return TensorSeries::from_items(std::move(items));
}

}  // namespace

TensorSeries project_series(const TensorSeries& series,
                            const LoadingSet& loadings, Index skip_mode) {
  const Index K = series.order();
  if (static_cast<Index>(loadings.size()) != K) {
    throw DimensionMismatch("project_series needs one basis slot per mode");
  }
  if (skip_mode < 0 || skip_mode >= K) {
    throw InvalidArgument("skip_mode out of range");
  }
  for (Index k = 0; k < K; ++k) {
    if (k == skip_mode) continue;
    if (loadings[static_cast<std::size_t>(k)].dim() !=
        series.dims()[static_cast<std::size_t>(k)]) {
      throw DimensionMismatch("loading basis for mode " + std::to_string(k) +
                              " does not match the series shape");
    }
  }
  std::vector<DenseTensor> items;
  items.reserve(static_cast<std::size_t>(series.length()));
  for (Index t = 0; t < series.length(); ++t) {
    DenseTensor z = series[t];
    for (Index k = 0; k < K; ++k) {
      if (k == skip_mode) continue;
      z = mode_product(z, loadings[static_cast<std::size_t>(k)]
                              .matrix()
                              .transpose(),
                       k);
    }
    items.push_back(std::move(z));
  }
  return TensorSeries::from_items(std::move(items));
}

EstimationResult run(const TensorSeries& series, const IterConfig& config) {
  validate(series, config);
  const Index K = series.order();
  const int sweep_cap = resolve_sweep_cap(config, series[0].size());

  // Initialization: each mode estimated from the raw series.
  LoadingSet loadings;
  for (Index k = 0; k < K; ++k) {
    loadings.push_back(estimate_loading(
        series, k, config.ranks[static_cast<std::size_t>(k)],
        MomentConfig{config.h0_init, config.uinit}));
  }

  EstimationResult result{.loadings = loadings,
                          .projectors = {},
                          .factors = contract_all(series, loadings),
                          .residuals = series,
                          .sweeps_used = 0,
                          .converged = false,
                          .init_loadings = loadings,
                          .sweep1_loadings = std::nullopt,
                          .trajectory = {},
                          .diagnostics = {}};

  for (int sweep = 1; sweep <= sweep_cap; ++sweep) {
    const LoadingSet previous = loadings;
    for (Index k = 0; k < K; ++k) {
      // Modes before k already hold this sweep's update; modes after k
      // still hold the previous sweep's.
      const TensorSeries z = project_series(series, loadings, k);
      loadings[static_cast<std::size_t>(k)] = estimate_loading(
          z, k, config.ranks[static_cast<std::size_t>(k)],
          MomentConfig{config.h0_iter, config.uiter});
    }
    SweepDelta delta;
    for (Index k = 0; k < K; ++k) {
      delta.per_mode.push_back(
          subspace_distance(loadings[static_cast<std::size_t>(k)],
                            previous[static_cast<std::size_t>(k)]));
    }
    delta.max = *std::max_element(delta.per_mode.begin(),
                                  delta.per_mode.end());
    if (config.record_trajectory) result.trajectory.push_back(delta);
    result.sweeps_used = sweep;
    if (sweep == 1) result.sweep1_loadings = loadings;
    if (delta.max <= config.epsilon) {
      result.converged = true;
      break;
    }
  }

  result.loadings = loadings;
  result.factors = contract_all(series, loadings);

  // Residuals: subtract the projection of X_t onto every loading space.
  // Rebuilding the fit from the contracted factors applies exactly
  // U_k U_k' per mode, so X == fit + residual holds by construction.
  std::vector<DenseTensor> residuals;
  residuals.reserve(static_cast<std::size_t>(series.length()));
  for (Index t = 0; t < series.length(); ++t) {
    DenseTensor fit = result.factors[t];
    for (Index k = 0; k < K; ++k) {
      fit = mode_product(fit, loadings[static_cast<std::size_t>(k)].matrix(),
                         k);
    }
    DenseTensor res = series[t];
    res.vec() -= fit.vec();
    residuals.push_back(std::move(res));
  }
  result.residuals = TensorSeries::from_items(std::move(residuals));

  for (Index k = 0; k < K; ++k) {
    result.projectors.push_back(
        projector(loadings[static_cast<std::size_t>(k)]));
  }

  // Signal diagnostics, read from the series each mode's final moment
  // actually saw: projected onto the other modes' final loadings.
  result.diagnostics.normalization = SignalNormalization::LAG_MEAN;
  result.diagnostics.h0 = config.h0_iter;
  for (Index k = 0; k < K; ++k) {
    const TensorSeries z = project_series(series, loadings, k);
    std::vector<Index> zranks(z.order(), 1);
    zranks[static_cast<std::size_t>(k)] =
        config.ranks[static_cast<std::size_t>(k)];
    const SignalDiagnostics d = signal_strength(
        z, zranks, config.h0_iter, SignalNormalization::LAG_MEAN);
    result.diagnostics.lambda_sq.push_back(
        d.lambda_sq[static_cast<std::size_t>(k)]);
    result.diagnostics.lambda_star_sq.push_back(
        d.lambda_star_sq[static_cast<std::size_t>(k)]);
    result.diagnostics.topup_spectrum.push_back(
        d.topup_spectrum[static_cast<std::size_t>(k)]);
    result.diagnostics.tipup_spectrum.push_back(
        d.tipup_spectrum[static_cast<std::size_t>(k)]);
  }
  return result;
}

namespace {

struct PresetSpec {
  Flavor uinit;
  Flavor uiter;
  int max_sweeps;  // 0 none, 1 single, kAutoSweeps iterate
  double epsilon;
};

const std::map<std::string, PresetSpec, std::less<>>& preset_table() {
  constexpr int kAuto = IterConfig::kAutoSweeps;
  constexpr double kTol = 1e-4;
  static const std::map<std::string, PresetSpec, std::less<>> table = {
      {"UP", {Flavor::UP, Flavor::UP, 0, kTol}},
      {"1UP", {Flavor::UP, Flavor::UP, 1, 0.0}},
      {"iUP", {Flavor::UP, Flavor::UP, kAuto, kTol}},
      {"TOPUP", {Flavor::TOPUP, Flavor::TOPUP, 0, kTol}},
      {"1TOPUP", {Flavor::TOPUP, Flavor::TOPUP, 1, 0.0}},
      {"iTOPUP", {Flavor::TOPUP, Flavor::TOPUP, kAuto, kTol}},
      {"TIPUP", {Flavor::TIPUP, Flavor::TIPUP, 0, kTol}},
      {"1TIPUP", {Flavor::TIPUP, Flavor::TIPUP, 1, 0.0}},
      {"iTIPUP", {Flavor::TIPUP, Flavor::TIPUP, kAuto, kTol}},
      {"TIPUP-1TOPUP", {Flavor::TIPUP, Flavor::TOPUP, 1, 0.0}},
      {"TIPUP-iTOPUP", {Flavor::TIPUP, Flavor::TOPUP, kAuto, kTol}},
      {"TOPUP-1TIPUP", {Flavor::TOPUP, Flavor::TIPUP, 1, 0.0}},
      {"TOPUP-iTIPUP", {Flavor::TOPUP, Flavor::TIPUP, kAuto, kTol}},
  };
  return table;
}

}  // namespace

IterConfig method_preset(std::string_view name) {
  const auto& table = preset_table();
  const auto it = table.find(name);
  if (it == table.end()) {
    throw InvalidArgument("unknown method preset '" + std::string(name) +
                          "'");
  }
  IterConfig config;
  config.uinit = it->second.uinit;
  config.uiter = it->second.uiter;
  config.max_sweeps = it->second.max_sweeps;
  config.epsilon = it->second.epsilon;
  return config;
}

const std::vector<std::string>& method_preset_names() {
  static const std::vector<std::string> names = {
      "UP",           "1UP",          "iUP",          "TOPUP",
      "1TOPUP",       "iTOPUP",       "TIPUP",        "1TIPUP",
      "iTIPUP",       "TIPUP-1TOPUP", "TIPUP-iTOPUP", "TOPUP-1TIPUP",
      "TOPUP-iTIPUP",
  };
  return names;
}

}  // namespace tfm
