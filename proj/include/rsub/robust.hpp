#pragma once

#include <vector>

#include "rsub/dataset.hpp"
#include "rsub/rng.hpp"

namespace rsub {

// Per-coordinate median of the rows; even counts average the two central
// order statistics.
Vector coordinate_median(const Matrix& points);

// Median of a copy of the values (empty input is invalid).
double median(std::vector<double> values);

// Euclidean distance of every row to the coordinate-wise median.
Vector robust_distances(const Matrix& x);
Vector robust_distances(const Dataset& d);

struct MomConfig {
  // 0 = auto: max(1, floor(sqrt(k))) blocks for k values.
  int n_blocks = 0;
  enum class Assignment { contiguous, shuffled };
  Assignment assignment = Assignment::contiguous;
};

// Median-of-means of the rows of `values` (k x p): split rows into n_blocks
// near-equal blocks (sizes differ by at most one; block b is rows
// [floor(b*k/B), floor((b+1)*k/B))), average each, return the coordinate-wise
// median of the block means. Contiguous assignment uses rows in order and is
// deterministic; shuffled permutes rows with `rng` first.
Vector median_of_means(const Matrix& values, const MomConfig& cfg, SeededRng& rng);

double sum_of_distances(const Matrix& points, const Vector& x);

struct GeomMedianResult {
  Vector point;
  int iterations = 0;
  bool converged = false;
};

// Geometric median by Weiszfeld iteration, started at the coordinate-wise
// median, stopping when the step norm drops below tol. Iterates that coincide
// with a data point (within 1e-12) use the Vardi-Zhang correction: stay put
// when the pull of the remaining points is no larger than the multiplicity,
// otherwise take the damped step.
GeomMedianResult geometric_median(const Matrix& points, double tol = 1e-10,
                                  int max_iter = 1000);

}  // namespace rsub
