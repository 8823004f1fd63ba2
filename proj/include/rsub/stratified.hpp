#pragma once

#include <vector>

#include "rsub/dataset.hpp"
#include "rsub/estimate.hpp"
#include "rsub/robust.hpp"

namespace rsub {

struct StratConfig {
  Index m = 0;              // total subsample budget, >= 1
  int K = 1;                // number of strata, 1 <= K <= n
  Task task = Task::mean;
  MomConfig mom;            // per-stratum median-of-means settings
  double gm_tol = 1e-10;
  int gm_max_iter = 1000;
};

// Quantile strata of the robust distances: ranks 0..n-1 (distance ascending,
// ties by index) cut into K contiguous ranges whose sizes differ by at most
// one (the first n mod K strata get the extra element). Returns the member
// indices of each stratum, ascending.
std::vector<std::vector<Index>> stratify_by_distance(const Vector& distances, int K);
std::vector<std::vector<Index>> stratify(const Dataset& d, int K);

// Proportional allocation by largest remainder, in exact integer arithmetic:
// a_k = floor(m * size_k / n) plus one unit for the largest fractional parts
// (ties to the lower stratum index). sum a_k == m; a_k <= size_k when m <= n.
std::vector<Index> allocate(const std::vector<Index>& strata_sizes, Index m);

// Stratified subsampling: stratify by robust distance, allocate m across
// strata, draw uniformly without replacement inside each, estimate per
// stratum (mean task: median-of-means of the drawn rows; regression task:
// median-of-means over per-block least-squares fits, each block solved with a
// 1e-6 ridge stabilizer), and combine the stratum estimates by their
// geometric median. Strata with zero allocation are skipped with a warning;
// if every stratum is skipped the run fails (EstimationError).
EstimateResult run_stratified(const Dataset& d, const StratConfig& cfg, SeededRng rng);

}  // namespace rsub
