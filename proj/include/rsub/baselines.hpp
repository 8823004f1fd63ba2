#pragma once

#include <optional>

#include "rsub/dataset.hpp"
#include "rsub/estimate.hpp"
#include "rsub/sampling.hpp"

namespace rsub {

// Reference estimators. Each takes an optional draw restricting the fit to a
// subsample; null means the full sample. No intercept anywhere -- generated
// data are centered.
struct BaselineConfig {
  enum class Method { ols, ridge, lasso };
  Method method = Method::ols;
  double ridge_lambda = 0.0;
  std::optional<double> lasso_lambda;  // nullopt = 0.1 * lambda_max of the data
  std::optional<Index> m;              // nullopt = full sample
};

// Least squares on the chosen rows; minimum-norm with a warning when the
// design is rank-deficient.
EstimateResult fit_ols(const Dataset& d, const SubsampleDraw* draw = nullptr);

// Minimizes ||y - X theta||^2 / (2k) + lambda * ||theta||^2 / 2 on k chosen
// rows. lambda == 0 reduces to fit_ols.
EstimateResult fit_ridge(const Dataset& d, double lambda,
                         const SubsampleDraw* draw = nullptr);

// Cyclic coordinate descent on ||y - X theta||^2 / (2k) + lambda * ||theta||_1,
// stopping when the largest coordinate change in a sweep is below tol.
// lambda nullopt = 0.1 * max_j |x_j' y| / k. objective_trace holds the
// objective after each sweep and never increases.
EstimateResult fit_lasso(const Dataset& d, std::optional<double> lambda,
                         const SubsampleDraw* draw = nullptr, double tol = 1e-10,
                         int max_iter = 10000);

// Plain uniform subsampling baseline: draw m rows without replacement, then
// either their sample mean (mean task) or an OLS fit (regression task).
// m == n uses every row.
EstimateResult uniform_subsample_estimate(const Dataset& d, Task task, Index m,
                                          SeededRng rng);

// Dispatch helper for the CLI.
EstimateResult run_baseline(const Dataset& d, const BaselineConfig& cfg, SeededRng rng);

}  // namespace rsub
