#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include <json.hpp>

#include "rsub/ais.hpp"
#include "rsub/datagen.hpp"
#include "rsub/stratified.hpp"

namespace rsub {

// One benchmark method slot. `kind` selects the estimator; the per-cell
// subsample size comes from the experiment's m_grid (full_ols ignores it).
struct MethodConfig {
  enum class Kind { ais, stratified, subsample_ols, subsample_mean, ridge, lasso, full_ols };

  Kind kind = Kind::subsample_ols;
  std::string name;  // unique label in reports; defaults to the kind tag
  AisConfig ais;
  StratConfig strat;
  double ridge_lambda = 0.1;
  std::optional<double> lasso_lambda;  // nullopt = data-driven default

  static std::string kind_tag(Kind k);
};

struct ExperimentSpec {
  EnvironmentSpec env;
  Task task = Task::regression;
  std::vector<MethodConfig> methods;
  std::vector<Index> m_grid;  // ascending
  int replicates = 1;
  std::uint64_t seed = 0;

  std::vector<std::string> validate() const;
};

// One (method, m, replicate) fit. stream_id makes the cell reproducible in
// isolation: the dataset stream is the replicate index, the method stream is
// kCellStreamBase + (replicate << 16) + (method_index << 8) + m_index.
struct CellResult {
  std::string method;
  Index m = 0;
  int replicate = 0;
  std::uint64_t stream_id = 0;
  bool ok = false;
  double mse = 0.0;
  double l2_error = 0.0;
  double wall_ms = 0.0;  // volatile; lives under the report's "timing" key
  std::string error;     // non-empty when !ok
  std::vector<std::string> warnings;
};

inline constexpr std::uint64_t kCellStreamBase = std::uint64_t{1} << 32;

struct CellAggregate {
  std::string method;
  Index m = 0;
  int n_ok = 0;
  int n_failed = 0;
  double mse_mean = 0.0;
  double mse_median = 0.0;
  double mse_std = 0.0;       // sample std (n-1), 0 for a single value
  double l2_median = 0.0;
  double wall_ms_mean = 0.0;  // volatile
};

struct RateFitResult {
  double slope = 0.0;
  double intercept = 0.0;
  double r2 = 0.0;
};

struct RateFit {
  std::string method;
  RateFitResult fit;
  int n_points = 0;
};

struct ExperimentReport {
  ExperimentSpec spec;
  std::vector<CellResult> cells;        // sorted by (replicate, method, m)
  std::vector<CellAggregate> aggregates;
  std::vector<RateFit> rate_fits;       // per method, over (m, median l2 error)
  std::string timestamp;                // ISO-8601 UTC; excluded from determinism
  double total_wall_ms = 0.0;           // volatile
};

// (1/p) * ||theta_hat - truth||^2.
double mse(const Vector& theta_hat, const Vector& truth);

// OLS of log(error) on log(m). Requires >= 3 points, all m and errors > 0.
RateFitResult fit_rate(const std::vector<std::pair<double, double>>& errors);

// Runs the full sweep: per replicate a fresh dataset (stream_id = replicate),
// then every method at every m on it. Replicates run in parallel, capped by
// ROBUST_SUBSAMPLE_THREADS (unset/0 = one per hardware thread); results are
// written into preallocated slots so the report does not depend on thread
// scheduling. Fit failures are recorded in the cell, never abort the sweep.
// Mean-task data comes from gen_location, regression data from gen_linear;
// either way truth is the environment's beta vector.
ExperimentReport run_experiment(const ExperimentSpec& spec);

// Stable-key-order JSON; all volatile data confined to the top-level
// "timestamp" and "timing" entries so determinism checks can drop exactly those.
nlohmann::ordered_json report_to_json(const ExperimentReport& report);

// CSV summary: header method,m,replicate,mse,wall_ms; failed cells emit nan.
std::string report_to_csv(const ExperimentReport& report);

nlohmann::ordered_json experiment_spec_to_json(const ExperimentSpec& spec);
ExperimentSpec experiment_spec_from_json(const nlohmann::json& j);

// Thread cap from ROBUST_SUBSAMPLE_THREADS (0/unset = hardware concurrency).
int thread_cap();

}  // namespace rsub
