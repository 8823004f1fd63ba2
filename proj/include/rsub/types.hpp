#pragma once

#include <Eigen/Core>
#include <stdexcept>
#include <string>

namespace rsub {

using Index = Eigen::Index;

// Observations are rows; dense row-major storage throughout.
using Matrix = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
using Vector = Eigen::VectorXd;
using RowVector = Eigen::Matrix<double, 1, Eigen::Dynamic>;

inline constexpr const char* kLibraryVersion = "0.1.0";

// Estimation task: location of the rows themselves, or regression of y on X.
enum class Task { mean, regression };

// Raised when an estimation run cannot produce a usable result (e.g. every
// stratum had to be skipped). Precondition violations use std::invalid_argument.
class EstimationError : public std::runtime_error {
 public:
  explicit EstimationError(const std::string& what) : std::runtime_error(what) {}
};

}  // namespace rsub
