// C API shim: translates between opaque handles plus status codes and the
// C++ core.  All exceptions are caught at this boundary.

#include "tfm/tfm.h"

#include <cstring>
#include <memory>
#include <string>

#include "tfm/bench.hpp"
#include "tfm/iterate.hpp"
#include "tfm/moment.hpp"
#include "tfm/series_io.hpp"
#include "tfm/simulate.hpp"

struct tfm_series {
  tfm::TensorSeries value;
};

struct tfm_spec {
  tfm::ModelSpec value;
};

struct tfm_truth {
  tfm::GroundTruth value;
};

struct tfm_result {
  tfm::EstimationResult value;
};

namespace {

thread_local std::string g_last_error;

tfm_status fail(tfm_status code, const char* what) {
  g_last_error = what;
  return code;
}

// Runs `body` and converts the exception taxonomy into status codes.
template <typename Fn>
tfm_status guarded(Fn&& body) {
  try {
    return body();
  } catch (const tfm::DegenerateMoment& e) {
    return fail(TFM_ERR_DEGENERATE_MOMENT, e.what());
  } catch (const tfm::DimensionMismatch& e) {
    return fail(TFM_ERR_DIMENSION_MISMATCH, e.what());
  } catch (const tfm::InvalidArgument& e) {
    return fail(TFM_ERR_INVALID_ARGUMENT, e.what());
  } catch (const tfm::IoError& e) {
    return fail(TFM_ERR_IO, e.what());
  } catch (const std::exception& e) {
    return fail(TFM_ERR_INTERNAL, e.what());
  } catch (...) {
    return fail(TFM_ERR_INTERNAL, "unknown error");
  }
}

tfm_status require(bool ok, const char* what) {
  return ok ? TFM_OK : fail(TFM_ERR_INVALID_ARGUMENT, what);
}

tfm::Flavor to_flavor(tfm_flavor flavor) {
  switch (flavor) {
    case TFM_FLAVOR_TOPUP:
      return tfm::Flavor::TOPUP;
    case TFM_FLAVOR_TIPUP:
      return tfm::Flavor::TIPUP;
    case TFM_FLAVOR_UP:
      return tfm::Flavor::UP;
  }
  throw tfm::InvalidArgument("unknown flavor code");
}

tfm_flavor from_flavor(tfm::Flavor flavor) {
  switch (flavor) {
    case tfm::Flavor::TOPUP:
      return TFM_FLAVOR_TOPUP;
    case tfm::Flavor::TIPUP:
      return TFM_FLAVOR_TIPUP;
    case tfm::Flavor::UP:
      return TFM_FLAVOR_UP;
  }
  return TFM_FLAVOR_TOPUP;
}

tfm::SignalNormalization to_norm(tfm_normalization norm) {
  switch (norm) {
    case TFM_NORM_LAG_MEAN:
      return tfm::SignalNormalization::LAG_MEAN;
    case TFM_NORM_LAG_SQRT:
      return tfm::SignalNormalization::LAG_SQRT;
  }
  throw tfm::InvalidArgument("unknown normalization code");
}

// Copies a matrix into a caller buffer, checking capacity.
tfm_status copy_matrix(const Eigen::MatrixXd& m, double* buf,
                       int64_t capacity, int64_t* d, int64_t* r) {
  if (buf == nullptr) {
    return fail(TFM_ERR_INVALID_ARGUMENT, "output buffer is NULL");
  }
  if (capacity < m.rows() * m.cols()) {
    return fail(TFM_ERR_DIMENSION_MISMATCH,
                "output buffer capacity is too small");
  }
  Eigen::Map<Eigen::MatrixXd>(buf, m.rows(), m.cols()) = m;
  if (d != nullptr) *d = m.rows();
  if (r != nullptr) *r = m.cols();
  return TFM_OK;
}

}  // namespace

extern "C" {

const char* tfm_version(void) { return "0.1.0"; }

const char* tfm_last_error(void) { return g_last_error.c_str(); }

/* -------------------------------- series ------------------------------- */

tfm_status tfm_series_create(int32_t order, const int64_t* dims,
                             int64_t length, tfm_series** out) {
  return guarded([&]() -> tfm_status {
    if (tfm_status s = require(out != nullptr && dims != nullptr &&
                                   order >= 1 && order <= TFM_MAX_ORDER,
                               "tfm_series_create: bad arguments");
        s != TFM_OK) {
      return s;
    }
    std::vector<tfm::Index> shape(dims, dims + order);
    *out = new tfm_series{tfm::TensorSeries(shape, length)};
    return TFM_OK;
  });
}

tfm_status tfm_series_info(const tfm_series* series, int32_t* order,
                           int64_t dims[TFM_MAX_ORDER], int64_t* length) {
  return guarded([&]() -> tfm_status {
    if (tfm_status s = require(series != nullptr,
                               "tfm_series_info: series is NULL");
        s != TFM_OK) {
      return s;
    }
    if (order != nullptr) {
      *order = static_cast<int32_t>(series->value.order());
    }
    if (dims != nullptr) {
      for (tfm::Index k = 0; k < series->value.order(); ++k) {
        dims[k] = series->value.dims()[static_cast<std::size_t>(k)];
      }
    }
    if (length != nullptr) *length = series->value.length();
    return TFM_OK;
  });
}

tfm_status tfm_series_get(const tfm_series* series, int64_t t, double* data,
                          int64_t n) {
  return guarded([&]() -> tfm_status {
    if (tfm_status s = require(series != nullptr && data != nullptr,
                               "tfm_series_get: bad arguments");
        s != TFM_OK) {
      return s;
    }
    const tfm::DenseTensor& item = series->value[t];
    if (n != item.size()) {
      return fail(TFM_ERR_DIMENSION_MISMATCH,
                  "tfm_series_get: n does not match the tensor size");
    }
    std::memcpy(data, item.data(),
                static_cast<std::size_t>(n) * sizeof(double));
    return TFM_OK;
  });
}

tfm_status tfm_series_set(tfm_series* series, int64_t t, const double* data,
                          int64_t n) {
  return guarded([&]() -> tfm_status {
    if (tfm_status s = require(series != nullptr && data != nullptr,
                               "tfm_series_set: bad arguments");
        s != TFM_OK) {
      return s;
    }
    tfm::DenseTensor& item = series->value[t];
    if (n != item.size()) {
      return fail(TFM_ERR_DIMENSION_MISMATCH,
                  "tfm_series_set: n does not match the tensor size");
    }
    std::memcpy(item.data(), data,
                static_cast<std::size_t>(n) * sizeof(double));
    return TFM_OK;
  });
}

tfm_status tfm_series_read(const char* path, tfm_series** out) {
  return guarded([&]() -> tfm_status {
    if (tfm_status s = require(path != nullptr && out != nullptr,
                               "tfm_series_read: bad arguments");
        s != TFM_OK) {
      return s;
    }
    *out = new tfm_series{tfm::read_series(path)};
    return TFM_OK;
  });
}

tfm_status tfm_series_write(const tfm_series* series, const char* path) {
  return guarded([&]() -> tfm_status {
    if (tfm_status s = require(series != nullptr && path != nullptr,
                               "tfm_series_write: bad arguments");
        s != TFM_OK) {
      return s;
    }
    tfm::write_series(series->value, path);
    return TFM_OK;
  });
}

void tfm_series_free(tfm_series* series) { delete series; }

/* ------------------------------ simulation ----------------------------- */

tfm_status tfm_spec_create(int32_t order, const int64_t* dims,
                           const int64_t* ranks, tfm_spec** out) {
  return guarded([&]() -> tfm_status {
    if (tfm_status s = require(out != nullptr && dims != nullptr &&
                                   ranks != nullptr && order >= 1 &&
                                   order <= TFM_MAX_ORDER,
                               "tfm_spec_create: bad arguments");
        s != TFM_OK) {
      return s;
    }
    tfm::ModelSpec spec;
    spec.dims.assign(dims, dims + order);
    spec.ranks.assign(ranks, ranks + order);
    spec.ar_coeffs = {0.8};
    *out = new tfm_spec{std::move(spec)};
    return TFM_OK;
  });
}

tfm_status tfm_spec_preset(const char* setting, tfm_spec** out) {
  return guarded([&]() -> tfm_status {
    if (tfm_status s = require(setting != nullptr && out != nullptr,
                               "tfm_spec_preset: bad arguments");
        s != TFM_OK) {
      return s;
    }
    const std::string name(setting);
    tfm::Setting value;
    if (name == "I") {
      value = tfm::Setting::I;
    } else if (name == "II") {
      value = tfm::Setting::II;
    } else if (name == "III") {
      value = tfm::Setting::III;
    } else {
      return fail(TFM_ERR_INVALID_ARGUMENT,
                  "tfm_spec_preset: setting must be I, II, or III");
    }
    *out = new tfm_spec{tfm::setting_preset(value, 1.0, 0)};
    return TFM_OK;
  });
}

tfm_status tfm_spec_set_lambda(tfm_spec* spec, double lambda) {
  return guarded([&]() -> tfm_status {
    if (tfm_status s = require(spec != nullptr && lambda >= 0.0,
                               "tfm_spec_set_lambda: bad arguments");
        s != TFM_OK) {
      return s;
    }
    spec->value.lambda = lambda;
    return TFM_OK;
  });
}

tfm_status tfm_spec_set_ar(tfm_spec* spec, const double* phis, int64_t n) {
  return guarded([&]() -> tfm_status {
    if (tfm_status s = require(spec != nullptr && phis != nullptr && n >= 1,
                               "tfm_spec_set_ar: bad arguments");
        s != TFM_OK) {
      return s;
    }
    spec->value.ar_coeffs.assign(phis, phis + n);
    return TFM_OK;
  });
}

tfm_status tfm_spec_set_noise(tfm_spec* spec, const double* rhos, int64_t n,
                              double sigma) {
  return guarded([&]() -> tfm_status {
    if (tfm_status s = require(spec != nullptr,
                               "tfm_spec_set_noise: spec is NULL");
        s != TFM_OK) {
      return s;
    }
    if (rhos != nullptr && n >= 1) {
      spec->value.noise_rho.assign(rhos, rhos + n);
    }
    if (sigma >= 0.0) spec->value.noise_sigma = sigma;
    return TFM_OK;
  });
}

tfm_status tfm_spec_set_seed(tfm_spec* spec, uint64_t seed) {
  return guarded([&]() -> tfm_status {
    if (tfm_status s = require(spec != nullptr,
                               "tfm_spec_set_seed: spec is NULL");
        s != TFM_OK) {
      return s;
    }
    spec->value.seed = seed;
    return TFM_OK;
  });
}

tfm_status tfm_spec_set_burn_in(tfm_spec* spec, int32_t burn_in) {
  return guarded([&]() -> tfm_status {
    if (tfm_status s = require(spec != nullptr && burn_in >= 0,
                               "tfm_spec_set_burn_in: bad arguments");
        s != TFM_OK) {
      return s;
    }
    spec->value.burn_in = burn_in;
    return TFM_OK;
  });
}

void tfm_spec_free(tfm_spec* spec) { delete spec; }

tfm_status tfm_generate(const tfm_spec* spec, int64_t length,
                        tfm_truth** out) {
  return guarded([&]() -> tfm_status {
    if (tfm_status s = require(spec != nullptr && out != nullptr,
                               "tfm_generate: bad arguments");
        s != TFM_OK) {
      return s;
    }
    *out = new tfm_truth{tfm::generate(spec->value, length)};
    return TFM_OK;
  });
}

tfm_status tfm_truth_series(const tfm_truth* truth, tfm_truth_part part,
                            tfm_series** out) {
  return guarded([&]() -> tfm_status {
    if (tfm_status s = require(truth != nullptr && out != nullptr,
                               "tfm_truth_series: bad arguments");
        s != TFM_OK) {
      return s;
    }
    switch (part) {
      case TFM_TRUTH_OBSERVED:
        *out = new tfm_series{truth->value.observed};
        return TFM_OK;
      case TFM_TRUTH_SIGNAL:
        *out = new tfm_series{truth->value.signal};
        return TFM_OK;
      case TFM_TRUTH_NOISE:
        *out = new tfm_series{truth->value.noise};
        return TFM_OK;
      case TFM_TRUTH_FACTORS:
        *out = new tfm_series{truth->value.factors};
        return TFM_OK;
    }
    return fail(TFM_ERR_INVALID_ARGUMENT,
                "tfm_truth_series: unknown part code");
  });
}

tfm_status tfm_truth_loading(const tfm_truth* truth, int32_t mode,
                             double* colmajor, int64_t capacity, int64_t* d,
                             int64_t* r) {
  return guarded([&]() -> tfm_status {
    if (tfm_status s = require(truth != nullptr,
                               "tfm_truth_loading: truth is NULL");
        s != TFM_OK) {
      return s;
    }
    const auto& loadings = truth->value.loadings;
    if (mode < 0 || static_cast<std::size_t>(mode) >= loadings.size()) {
      return fail(TFM_ERR_INVALID_ARGUMENT,
                  "tfm_truth_loading: mode out of range");
    }
    return copy_matrix(loadings[static_cast<std::size_t>(mode)].matrix(),
                       colmajor, capacity, d, r);
  });
}

void tfm_truth_free(tfm_truth* truth) { delete truth; }

tfm_status tfm_population_signal(const tfm_spec* spec, int32_t h0,
                                 tfm_flavor flavor, tfm_normalization norm,
                                 double* out_per_mode) {
  return guarded([&]() -> tfm_status {
    if (tfm_status s = require(spec != nullptr && out_per_mode != nullptr,
                               "tfm_population_signal: bad arguments");
        s != TFM_OK) {
      return s;
    }
    const std::vector<double> values = tfm::population_signal(
        spec->value, h0, to_flavor(flavor), to_norm(norm));
    for (std::size_t k = 0; k < values.size(); ++k) {
      out_per_mode[k] = values[k];
    }
    return TFM_OK;
  });
}

/* ------------------------------ estimation ----------------------------- */

tfm_status tfm_estimate_options_init(tfm_estimate_options* options) {
  return guarded([&]() -> tfm_status {
    if (tfm_status s = require(options != nullptr,
                               "tfm_estimate_options_init: options is NULL");
        s != TFM_OK) {
      return s;
    }
    for (int k = 0; k < TFM_MAX_ORDER; ++k) options->ranks[k] = 0;
    options->h0_init = 1;
    options->h0_iter = 1;
    options->uinit = TFM_FLAVOR_TOPUP;
    options->uiter = TFM_FLAVOR_TOPUP;
    options->max_sweeps = -1;
    options->epsilon = 1e-4;
    options->record_trajectory = 0;
    return TFM_OK;
  });
}

tfm_status tfm_method_preset(const char* name, tfm_estimate_options* options) {
  return guarded([&]() -> tfm_status {
    if (tfm_status s = require(name != nullptr && options != nullptr,
                               "tfm_method_preset: bad arguments");
        s != TFM_OK) {
      return s;
    }
    const tfm::IterConfig preset = tfm::method_preset(name);
    options->uinit = from_flavor(preset.uinit);
    options->uiter = from_flavor(preset.uiter);
    options->max_sweeps = preset.max_sweeps == tfm::IterConfig::kAutoSweeps
                              ? -1
                              : preset.max_sweeps;
    options->epsilon = preset.epsilon;
    return TFM_OK;
  });
}

tfm_status tfm_estimate(const tfm_series* series,
                        const tfm_estimate_options* options,
                        tfm_result** out) {
  return guarded([&]() -> tfm_status {
    if (tfm_status s = require(series != nullptr && options != nullptr &&
                                   out != nullptr,
                               "tfm_estimate: bad arguments");
        s != TFM_OK) {
      return s;
    }
    tfm::IterConfig config;
    const tfm::Index K = series->value.order();
    config.ranks.assign(options->ranks, options->ranks + K);
    config.h0_init = options->h0_init;
    config.h0_iter = options->h0_iter;
    config.uinit = to_flavor(options->uinit);
    config.uiter = to_flavor(options->uiter);
    config.max_sweeps = options->max_sweeps < 0
                            ? tfm::IterConfig::kAutoSweeps
                            : options->max_sweeps;
    config.epsilon = options->epsilon;
    config.record_trajectory = options->record_trajectory != 0;
    *out = new tfm_result{tfm::run(series->value, config)};
    return TFM_OK;
  });
}

tfm_status tfm_result_loading(const tfm_result* result, int32_t mode,
                              double* colmajor, int64_t capacity, int64_t* d,
                              int64_t* r) {
  return guarded([&]() -> tfm_status {
    if (tfm_status s = require(result != nullptr,
                               "tfm_result_loading: result is NULL");
        s != TFM_OK) {
      return s;
    }
    const auto& loadings = result->value.loadings;
    if (mode < 0 || static_cast<std::size_t>(mode) >= loadings.size()) {
      return fail(TFM_ERR_INVALID_ARGUMENT,
                  "tfm_result_loading: mode out of range");
    }
    return copy_matrix(loadings[static_cast<std::size_t>(mode)].matrix(),
                       colmajor, capacity, d, r);
  });
}

tfm_status tfm_result_factors(const tfm_result* result, tfm_series** out) {
  return guarded([&]() -> tfm_status {
    if (tfm_status s = require(result != nullptr && out != nullptr,
                               "tfm_result_factors: bad arguments");
        s != TFM_OK) {
      return s;
    }
    *out = new tfm_series{result->value.factors};
    return TFM_OK;
  });
}

tfm_status tfm_result_residuals(const tfm_result* result, tfm_series** out) {
  return guarded([&]() -> tfm_status {
    if (tfm_status s = require(result != nullptr && out != nullptr,
                               "tfm_result_residuals: bad arguments");
        s != TFM_OK) {
      return s;
    }
    *out = new tfm_series{result->value.residuals};
    return TFM_OK;
  });
}

tfm_status tfm_result_info(const tfm_result* result, int32_t* sweeps_used,
                           int32_t* converged) {
  return guarded([&]() -> tfm_status {
    if (tfm_status s = require(result != nullptr,
                               "tfm_result_info: result is NULL");
        s != TFM_OK) {
      return s;
    }
    if (sweeps_used != nullptr) {
      *sweeps_used = result->value.sweeps_used;
    }
    if (converged != nullptr) {
      *converged = result->value.converged ? 1 : 0;
    }
    return TFM_OK;
  });
}

tfm_status tfm_result_signal(const tfm_result* result, double* lambda_sq,
                             double* lambda_star_sq) {
  return guarded([&]() -> tfm_status {
    if (tfm_status s = require(result != nullptr,
                               "tfm_result_signal: result is NULL");
        s != TFM_OK) {
      return s;
    }
    const tfm::SignalDiagnostics& diag = result->value.diagnostics;
    for (std::size_t k = 0; k < diag.lambda_sq.size(); ++k) {
      if (lambda_sq != nullptr) lambda_sq[k] = diag.lambda_sq[k];
      if (lambda_star_sq != nullptr) {
        lambda_star_sq[k] = diag.lambda_star_sq[k];
      }
    }
    return TFM_OK;
  });
}

void tfm_result_free(tfm_result* result) { delete result; }

/* ----------------------- diagnostics and benchmark ---------------------- */

tfm_status tfm_signal_strength(const tfm_series* series, const int64_t* ranks,
                               int32_t h0, tfm_normalization norm,
                               double* lambda_sq, double* lambda_star_sq) {
  return guarded([&]() -> tfm_status {
    if (tfm_status s = require(series != nullptr && ranks != nullptr,
                               "tfm_signal_strength: bad arguments");
        s != TFM_OK) {
      return s;
    }
    const tfm::Index K = series->value.order();
    const std::vector<tfm::Index> rank_vec(ranks, ranks + K);
    const tfm::SignalDiagnostics diag =
        tfm::signal_strength(series->value, rank_vec, h0, to_norm(norm));
    for (std::size_t k = 0; k < static_cast<std::size_t>(K); ++k) {
      if (lambda_sq != nullptr) lambda_sq[k] = diag.lambda_sq[k];
      if (lambda_star_sq != nullptr) {
        lambda_star_sq[k] = diag.lambda_star_sq[k];
      }
    }
    return TFM_OK;
  });
}

tfm_status tfm_subspace_distance(int64_t d, int64_t r, const double* a,
                                 const double* b, double* out) {
  return guarded([&]() -> tfm_status {
    if (tfm_status s = require(a != nullptr && b != nullptr && out != nullptr,
                               "tfm_subspace_distance: bad arguments");
        s != TFM_OK) {
      return s;
    }
    const tfm::OrthoBasis basis_a(
        Eigen::Map<const Eigen::MatrixXd>(a, d, r));
    const tfm::OrthoBasis basis_b(
        Eigen::Map<const Eigen::MatrixXd>(b, d, r));
    *out = tfm::subspace_distance(basis_a, basis_b);
    return TFM_OK;
  });
}

tfm_status tfm_bench_run_file(const char* config_path,
                              const char* records_path,
                              const char* summary_path) {
  return guarded([&]() -> tfm_status {
    if (tfm_status s = require(config_path != nullptr &&
                                   records_path != nullptr,
                               "tfm_bench_run_file: bad arguments");
        s != TFM_OK) {
      return s;
    }
    const tfm::ExperimentConfig config =
        tfm::load_experiment_config(config_path);
    const std::vector<tfm::RunRecord> records = tfm::run_experiment(config);
    tfm::write_records_csv(records, records_path);
    if (summary_path != nullptr) {
      tfm::write_summary_csv(tfm::summarize(records), summary_path);
    }
    return TFM_OK;
  });
}

tfm_status tfm_bench_run_text(const char* config_text,
                              const char* records_path,
                              const char* summary_path) {
  return guarded([&]() -> tfm_status {
    if (tfm_status s = require(config_text != nullptr &&
                                   records_path != nullptr,
                               "tfm_bench_run_text: bad arguments");
        s != TFM_OK) {
      return s;
    }
    const tfm::ExperimentConfig config =
        tfm::parse_experiment_config_text(config_text);
    const std::vector<tfm::RunRecord> records = tfm::run_experiment(config);
    tfm::write_records_csv(records, records_path);
    if (summary_path != nullptr) {
      tfm::write_summary_csv(tfm::summarize(records), summary_path);
    }
    return TFM_OK;
  });
}

}  // extern "C"
