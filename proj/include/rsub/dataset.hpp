#pragma once

#include <optional>
#include <string>
#include <vector>

#include "rsub/types.hpp"

namespace rsub {

struct DatasetMeta {
  std::string noise = "none";
  std::string dependence = "iid";
  double contamination = 0.0;
  double corruption_magnitude = 0.0;
  std::vector<Index> corrupted_rows;  // ascending
};

struct Dataset {
  Matrix x;                    // n x p design, observations as rows
  std::optional<Vector> y;     // responses; absent for pure location data
  std::optional<Vector> truth; // generating coefficient vector, when known
  DatasetMeta meta;

  Index n() const { return x.rows(); }
  Index p() const { return x.cols(); }
};

// One message per violated invariant; empty means the dataset is well formed.
// Checked: n >= 1, p >= 1, finite entries, y/truth dimensions, corrupted_rows
// sorted and in range.
std::vector<std::string> validate_dataset(const Dataset& d);

// Copies the given rows (and y entries, if present) into a compact block.
Matrix gather_rows(const Matrix& x, const std::vector<Index>& rows);
Vector gather_entries(const Vector& v, const std::vector<Index>& rows);

}  // namespace rsub
