#pragma once

#include <optional>
#include <string>
#include <vector>

#include "rsub/types.hpp"

namespace rsub {

// Common result type for every estimator in the library.
struct EstimateResult {
  Vector theta;
  std::string method;               // "ais", "stratified", "ols", ...
  int iterations = 0;
  std::vector<double> objective_trace;  // per-iteration objective, where meaningful
  std::optional<double> ess;        // effective sample size of the final weights
  std::vector<std::string> warnings;
};

}  // namespace rsub
