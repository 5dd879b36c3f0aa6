#pragma once

// Monte Carlo benchmark harness: sweeps (T, lambda, h0) grids over a set of
// method presets, records per-replication losses against the simulated
// truth, and aggregates them into summary tables.
//
// Determinism contract: for a fixed configuration (including the master
// seed) the records CSV is byte-identical run to run.  Replication data
// depends only on (seed, T, lambda, rep) — not on h0 or the method list —
// so sweeps over h0 or methods are paired on identical data.  Records are
// emitted in a fixed order (grid point, rep, method, mode, stage) so worker
// scheduling can never leak into the output.  Wall-clock timings are the
// one inherently non-reproducible column; they are written as 0 unless
// `timing` is enabled, which documents that the file will then differ
// between runs.

#include <cstdint>
#include <iosfwd>
#include <string>
#include <vector>

#include "tfm/simulate.hpp"

namespace tfm {

struct ExperimentConfig {
  std::string setting_label = "custom";  // "I", "II", "III", or "custom"
  ModelSpec base;            // lambda and seed fields are overwritten per run
  std::vector<Index> T_list;
  std::vector<double> lambda_list;
  std::vector<int> h0_list;            // applied to both init and sweeps
  std::vector<std::string> methods;    // preset names, in output order
  int nrep = 1;
  std::uint64_t seed = 0;
  double epsilon = 1e-4;
  int max_sweeps = IterConfig::kAutoSweeps;
  bool record_trajectory = true;  // emit the sweep1 stage rows
  bool timing = false;            // write real wall times (non-reproducible)
  int threads = 0;                // replication workers; 0 = hardware count
};

// One row of the records CSV: the loss of one method at one stage for one
// mode of one replication.  `mode` is 1-based in records and summaries,
// matching the usual subscript on loading matrices.
struct RunRecord {
  int rep = 0;
  std::string setting;
  Index T = 0;
  double lambda = 0.0;
  int h0 = 1;
  std::string method;
  int mode = 1;
  std::string stage;  // "init", "sweep1", or "final"
  double loss = 0.0;
  int iters = 0;
  double lambda_hat_sq = 0.0;
  double lambda_star_hat_sq = 0.0;
  double wall_time_ms = 0.0;
};

// Aggregate of one (grid point, method, mode, stage) cell: quartiles of
// log-loss (natural log, losses floored at 1e-16) plus medians of the raw
// loss and of the sweep count.  Quartiles interpolate linearly between
// order statistics.
struct SummaryRow {
  std::string setting;
  Index T = 0;
  double lambda = 0.0;
  int h0 = 1;
  std::string method;
  int mode = 1;
  std::string stage;
  int count = 0;
  double median_log_loss = 0.0;
  double q1_log_loss = 0.0;
  double q3_log_loss = 0.0;
  double median_loss = 0.0;
  double median_iters = 0.0;
};

std::vector<RunRecord> run_experiment(const ExperimentConfig& config);

std::vector<SummaryRow> summarize(const std::vector<RunRecord>& records);

// Flat "key = value" configuration text (# comments, lists comma-separated).
// Keys: setting, dims, ranks, phis, lambda, rho, sigma, T, h0, methods,
// nrep, seed, epsilon, max_iter, burn_in, record_trajectory, timing,
// threads.  A setting of I/II/III fills dims/ranks/phis, which individual
// keys may then override; `methods = all` expands to every preset.
ExperimentConfig parse_experiment_config(std::istream& in);
ExperimentConfig parse_experiment_config_text(const std::string& text);
ExperimentConfig load_experiment_config(const std::string& path);

// CSV emission.  Column order is part of the format contract:
//   records: rep,setting,T,lambda,h0,method,mode,stage,loss,iters,
//            lambda_hat_sq,lambda_star_hat_sq,wall_time_ms
//   summary: setting,T,lambda,h0,method,mode,stage,count,median_log_loss,
//            q1_log_loss,q3_log_loss,median_loss,median_iters
void write_records_csv(const std::vector<RunRecord>& records,
                       const std::string& path);
void write_summary_csv(const std::vector<SummaryRow>& rows,
                       const std::string& path);

// Linear-interpolation quantile of an unsorted sample (p in [0, 1]).
double sample_quantile(std::vector<double> values, double p);

}  // namespace tfm
