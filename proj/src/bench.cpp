#include "tfm/bench.hpp"

#include <algorithm>
#include <atomic>
#include <bit>
#include <chrono>
#include <cmath>
#include <fstream>
#include <map>
#include <sstream>
#include <thread>

#include "tfm/rng.hpp"
#include "text_util.hpp"

namespace tfm {
namespace {

constexpr double kLossFloor = 1e-16;
constexpr std::uint64_t kRoleReplication = 17;

struct GridPoint {
  Index T;
  double lambda;
  int h0;
};

// Data seed for one replication: a function of the master seed, T, lambda,
// and the replication index only, so points differing in h0 (or in the
// method list) see identical data.
std::uint64_t replication_seed(const ExperimentConfig& config,
                               const GridPoint& point, int rep) {
  return substream_seed(config.seed, kRoleReplication,
                        static_cast<std::uint64_t>(point.T),
                        std::bit_cast<std::uint64_t>(point.lambda),
                        static_cast<std::uint64_t>(rep));
}

std::vector<RunRecord> run_one(const ExperimentConfig& config,
                               const GridPoint& point, int rep) {
  ModelSpec spec = config.base;
  spec.lambda = point.lambda;
  spec.seed = replication_seed(config, point, rep);
  const GroundTruth truth = generate(spec, point.T);
  const Index K = static_cast<Index>(spec.dims.size());

  std::vector<RunRecord> records;
  for (const std::string& method : config.methods) {
    IterConfig iter = method_preset(method);
    iter.ranks = spec.ranks;
    iter.h0_init = point.h0;
    iter.h0_iter = point.h0;
    if (iter.max_sweeps == IterConfig::kAutoSweeps) {
      iter.max_sweeps = config.max_sweeps;
      iter.epsilon = config.epsilon;
    }

    const auto start = std::chrono::steady_clock::now();
    const EstimationResult fit = run(truth.observed, iter);
    const double wall_ms =
        config.timing
            ? std::chrono::duration<double, std::milli>(
                  std::chrono::steady_clock::now() - start)
                  .count()
            : 0.0;

    const auto emit = [&](const std::string& stage,
                          const LoadingSet& loadings) {
      for (Index k = 0; k < K; ++k) {
        RunRecord rec;
        rec.rep = rep;
        rec.setting = config.setting_label;
        rec.T = point.T;
        rec.lambda = point.lambda;
        rec.h0 = point.h0;
        rec.method = method;
        rec.mode = static_cast<int>(k) + 1;
        rec.stage = stage;
        rec.loss = subspace_distance(loadings[static_cast<std::size_t>(k)],
                                     truth.loadings[static_cast<std::size_t>(k)]);
        rec.iters = fit.sweeps_used;
        rec.lambda_hat_sq =
            fit.diagnostics.lambda_sq[static_cast<std::size_t>(k)];
        rec.lambda_star_hat_sq =
            fit.diagnostics.lambda_star_sq[static_cast<std::size_t>(k)];
        rec.wall_time_ms = wall_ms;
        records.push_back(std::move(rec));
      }
    };

    emit("init", fit.init_loadings);
    if (fit.sweeps_used >= 1) {
      if (config.record_trajectory && fit.sweep1_loadings) {
        emit("sweep1", *fit.sweep1_loadings);
      }
      emit("final", fit.loadings);
    }
  }
  return records;
}

}  // namespace

std::vector<RunRecord> run_experiment(const ExperimentConfig& config) {
  if (config.T_list.empty() || config.lambda_list.empty() ||
      config.h0_list.empty() || config.methods.empty()) {
    throw InvalidArgument("experiment needs non-empty T, lambda, h0, and "
                          "method lists");
  }
  if (config.nrep < 1) {
    throw InvalidArgument("nrep must be at least 1");
  }
  for (const std::string& m : config.methods) {
    method_preset(m);  // validate names up front
  }

  // Grid in declaration order: T outermost, then lambda, then h0.
  std::vector<GridPoint> grid;
  for (Index T : config.T_list) {
    for (double lambda : config.lambda_list) {
      for (int h0 : config.h0_list) {
        grid.push_back(GridPoint{T, lambda, h0});
      }
    }
  }

  // One task per (point, rep); each writes only its own slot, and slots are
  // concatenated in task order, so the worker count never affects output.
  const std::size_t n_tasks = grid.size() * static_cast<std::size_t>(config.nrep);
  std::vector<std::vector<RunRecord>> slots(n_tasks);
  const auto task = [&](std::size_t index) {
    const std::size_t point_index = index / static_cast<std::size_t>(config.nrep);
    const int rep = static_cast<int>(index % static_cast<std::size_t>(config.nrep));
    slots[index] = run_one(config, grid[point_index], rep);
  };

  unsigned workers = config.threads > 0
                         ? static_cast<unsigned>(config.threads)
                         : std::max(1u, std::thread::hardware_concurrency());
  workers = std::min<unsigned>(workers, static_cast<unsigned>(n_tasks));
  if (workers <= 1) {
    for (std::size_t i = 0; i < n_tasks; ++i) task(i);
  } else {
    std::atomic<std::size_t> next{0};
    std::vector<std::thread> pool;
    pool.reserve(workers);
    for (unsigned w = 0; w < workers; ++w) {
      pool.emplace_back([&] {
        while (true) {
          const std::size_t i = next.fetch_add(1);
          if (i >= n_tasks) return;
          task(i);
        }
      });
    }
    for (std::thread& th : pool) th.join();
  }

  std::vector<RunRecord> records;
  for (std::vector<RunRecord>& slot : slots) {
    records.insert(records.end(), std::make_move_iterator(slot.begin()),
                   std::make_move_iterator(slot.end()));
  }
  return records;
}

namespace {

double log_loss(double loss) { return std::log(std::max(loss, kLossFloor)); }

}  // namespace

double sample_quantile(std::vector<double> values, double p) {
  if (values.empty()) {
    throw InvalidArgument("quantile of an empty sample");
  }
  if (!(p >= 0.0 && p <= 1.0)) {
    throw InvalidArgument("quantile level must lie in [0, 1]");
  }
  std::sort(values.begin(), values.end());
  const double pos = p * static_cast<double>(values.size() - 1);
  const std::size_t lo = static_cast<std::size_t>(pos);
  const std::size_t hi = std::min(lo + 1, values.size() - 1);
  const double frac = pos - static_cast<double>(lo);
  return values[lo] + frac * (values[hi] - values[lo]);
}

std::vector<SummaryRow> summarize(const std::vector<RunRecord>& records) {
  // Group key preserving the record emission order (records arrive sorted
  // by grid point, rep, method, mode, stage; groups keep that order).
  struct CellData {
    std::vector<double> log_losses;
    std::vector<double> losses;
    std::vector<double> iters;
  };
  std::vector<SummaryRow> rows;
  std::map<std::string, std::size_t> index;
  for (const RunRecord& rec : records) {
    const std::string key = rec.setting + '\x1f' + std::to_string(rec.T) +
                            '\x1f' + detail::format_double(rec.lambda) +
                            '\x1f' + std::to_string(rec.h0) + '\x1f' +
                            rec.method + '\x1f' + std::to_string(rec.mode) +
                            '\x1f' + rec.stage;
    if (index.find(key) == index.end()) {
      index.emplace(key, rows.size());
      SummaryRow row;
      row.setting = rec.setting;
      row.T = rec.T;
      row.lambda = rec.lambda;
      row.h0 = rec.h0;
      row.method = rec.method;
      row.mode = rec.mode;
      row.stage = rec.stage;
      rows.push_back(row);
    }
  }
  std::vector<CellData> cells(rows.size());
  for (const RunRecord& rec : records) {
    const std::string key = rec.setting + '\x1f' + std::to_string(rec.T) +
                            '\x1f' + detail::format_double(rec.lambda) +
                            '\x1f' + std::to_string(rec.h0) + '\x1f' +
                            rec.method + '\x1f' + std::to_string(rec.mode) +
                            '\x1f' + rec.stage;
    CellData& cell = cells[index.at(key)];
    cell.log_losses.push_back(log_loss(rec.loss));
    cell.losses.push_back(rec.loss);
    cell.iters.push_back(static_cast<double>(rec.iters));
  }
  for (std::size_t i = 0; i < rows.size(); ++i) {
    rows[i].count = static_cast<int>(cells[i].losses.size());
    rows[i].median_log_loss = sample_quantile(cells[i].log_losses, 0.5);
    rows[i].q1_log_loss = sample_quantile(cells[i].log_losses, 0.25);
    rows[i].q3_log_loss = sample_quantile(cells[i].log_losses, 0.75);
    rows[i].median_loss = sample_quantile(cells[i].losses, 0.5);
    rows[i].median_iters = sample_quantile(cells[i].iters, 0.5);
  }
  return rows;
}

// ---------------------------------------------------------------------------
// Configuration parsing
// ---------------------------------------------------------------------------

namespace {

std::vector<Index> parse_index_list(const std::string& value,
                                    const std::string& what) {
  std::vector<Index> out;
  for (const std::string& field : detail::split(value, ',')) {
    out.push_back(detail::parse_int(field, what));
  }
  return out;
}

std::vector<double> parse_double_list(const std::string& value,
                                      const std::string& what) {
  std::vector<double> out;
  for (const std::string& field : detail::split(value, ',')) {
    out.push_back(detail::parse_double(field, what));
  }
  return out;
}

bool parse_bool(const std::string& value, const std::string& what) {
  if (value == "true" || value == "1" || value == "on") return true;
  if (value == "false" || value == "0" || value == "off") return false;
  throw InvalidArgument("cannot parse '" + value + "' as a boolean for " +
                        what);
}

}  // namespace

ExperimentConfig parse_experiment_config(std::istream& in) {
  ExperimentConfig config;
  config.base.dims = {16, 16};
  bool have_setting = false;
  bool have_dims = false, have_ranks = false, have_phis = false;

  std::string line;
  int line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    const std::size_t hash = line.find('#');
    if (hash != std::string::npos) line.erase(hash);
    const std::string trimmed = detail::trim(line);
    if (trimmed.empty()) continue;
    const std::size_t eq = trimmed.find('=');
    if (eq == std::string::npos) {
      throw InvalidArgument("config line " + std::to_string(line_no) +
                            " is not of the form 'key = value'");
    }
    const std::string key = detail::trim(trimmed.substr(0, eq));
    const std::string value = detail::trim(trimmed.substr(eq + 1));
    if (key.empty() || value.empty()) {
      throw InvalidArgument("config line " + std::to_string(line_no) +
                            " has an empty key or value");
    }

    if (key == "setting") {
      if (value == "I") {
        config.base = setting_preset(Setting::I, 1.0, 0);
      } else if (value == "II") {
        config.base = setting_preset(Setting::II, 1.0, 0);
      } else if (value == "III") {
        config.base = setting_preset(Setting::III, 1.0, 0);
      } else if (value != "custom") {
        throw InvalidArgument("setting must be I, II, III, or custom");
      }
      config.setting_label = value;
      have_setting = true;
    } else if (key == "dims") {
      config.base.dims = parse_index_list(value, "dims");
      have_dims = true;
    } else if (key == "ranks") {
      config.base.ranks = parse_index_list(value, "ranks");
      have_ranks = true;
    } else if (key == "phis") {
      config.base.ar_coeffs = parse_double_list(value, "phis");
      have_phis = true;
    } else if (key == "rho") {
      config.base.noise_rho = parse_double_list(value, "rho");
    } else if (key == "sigma") {
      config.base.noise_sigma = detail::parse_double(value, "sigma");
    } else if (key == "burn_in") {
      config.base.burn_in =
          static_cast<int>(detail::parse_int(value, "burn_in"));
    } else if (key == "lambda") {
      config.lambda_list = parse_double_list(value, "lambda");
    } else if (key == "T") {
      config.T_list = parse_index_list(value, "T");
    } else if (key == "h0") {
      for (Index h : parse_index_list(value, "h0")) {
        config.h0_list.push_back(static_cast<int>(h));
      }
    } else if (key == "methods") {
      if (value == "all") {
        config.methods = method_preset_names();
      } else {
        config.methods = detail::split(value, ',');
      }
    } else if (key == "nrep") {
      config.nrep = static_cast<int>(detail::parse_int(value, "nrep"));
    } else if (key == "seed") {
      config.seed =
          static_cast<std::uint64_t>(detail::parse_int(value, "seed"));
    } else if (key == "epsilon") {
      config.epsilon = detail::parse_double(value, "epsilon");
    } else if (key == "max_iter") {
      const long long v = detail::parse_int(value, "max_iter");
      config.max_sweeps =
          v == 0 ? IterConfig::kAutoSweeps : static_cast<int>(v);
    } else if (key == "record_trajectory") {
      config.record_trajectory = parse_bool(value, key);
    } else if (key == "timing") {
      config.timing = parse_bool(value, key);
    } else if (key == "threads") {
      config.threads = static_cast<int>(detail::parse_int(value, "threads"));
    } else {
      throw InvalidArgument("unknown config key '" + key + "'");
    }
  }

  if (!have_setting && !(have_dims && have_ranks && have_phis)) {
    throw InvalidArgument("config needs a setting, or explicit dims, ranks, "
                          "and phis");
  }
  if (config.setting_label == "custom" &&
      !(have_ranks && have_phis)) {
    throw InvalidArgument("a custom setting needs explicit ranks and phis");
  }
  return config;
}

ExperimentConfig parse_experiment_config_text(const std::string& text) {
  std::istringstream in(text);
  return parse_experiment_config(in);
}

ExperimentConfig load_experiment_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) {
    throw IoError("cannot open config file '" + path + "'");
  }
  return parse_experiment_config(in);
}

// ---------------------------------------------------------------------------
// CSV output
// ---------------------------------------------------------------------------

namespace {

std::ofstream open_out(const std::string& path) {
  std::ofstream os(path);
  if (!os) {
    throw IoError("cannot open '" + path + "' for writing");
  }
  return os;
}

}  // namespace

void write_records_csv(const std::vector<RunRecord>& records,
                       const std::string& path) {
  std::ofstream os = open_out(path);
  os << "rep,setting,T,lambda,h0,method,mode,stage,loss,iters,"
        "lambda_hat_sq,lambda_star_hat_sq,wall_time_ms\n";
  for (const RunRecord& r : records) {
    os << r.rep << ',' << r.setting << ',' << r.T << ','
       << detail::format_double(r.lambda) << ',' << r.h0 << ',' << r.method
       << ',' << r.mode << ',' << r.stage << ','
       << detail::format_double(r.loss) << ',' << r.iters << ','
       << detail::format_double(r.lambda_hat_sq) << ','
       << detail::format_double(r.lambda_star_hat_sq) << ','
       << detail::format_double(r.wall_time_ms) << '\n';
  }
  os.flush();
  if (!os) {
    throw IoError("write to '" + path + "' failed");
  }
}

void write_summary_csv(const std::vector<SummaryRow>& rows,
                       const std::string& path) {
  std::ofstream os = open_out(path);
  os << "setting,T,lambda,h0,method,mode,stage,count,median_log_loss,"
        "q1_log_loss,q3_log_loss,median_loss,median_iters\n";
  for (const SummaryRow& r : rows) {
    os << r.setting << ',' << r.T << ',' << detail::format_double(r.lambda)
       << ',' << r.h0 << ',' << r.method << ',' << r.mode << ',' << r.stage
       << ',' << r.count << ',' << detail::format_double(r.median_log_loss)
       << ',' << detail::format_double(r.q1_log_loss) << ','
       << detail::format_double(r.q3_log_loss) << ','
       << detail::format_double(r.median_loss) << ','
       << detail::format_double(r.median_iters) << '\n';
  }
  os.flush();
  if (!os) {
    throw IoError("write to '" + path + "' failed");
  }
}

}  // namespace tfm
