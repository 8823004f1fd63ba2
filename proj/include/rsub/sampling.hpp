#pragma once

#include <vector>

#include "rsub/rng.hpp"
#include "rsub/types.hpp"

namespace rsub {

// Normalized sampling weights over n data points: w_i >= 0, sum w_i == 1
// (up to rounding).
struct WeightVector {
  Vector w;

  Index size() const { return w.size(); }
  static WeightVector uniform(Index n);
  // One message per violated invariant (size, nonnegativity, normalization).
  std::vector<std::string> validate() const;
};

// 1 / sum_i w_i^2. Equals n for uniform weights, 1 for a point mass.
double effective_sample_size(const WeightVector& weights);

enum class SampleMode { with_replacement, without_replacement };

struct SubsampleDraw {
  std::vector<Index> indices;       // in draw order; duplicates only with replacement
  Vector probs;                     // the selection weight of each index at draw time
  SampleMode mode = SampleMode::with_replacement;

  Index m() const { return static_cast<Index>(indices.size()); }
};

// Draws m indices according to `weights`. Without replacement the weights of
// already-selected indices are removed before the next draw (successive
// conditional sampling); requires m <= n and enough positive-weight support.
// Zero-weight indices are never selected. probs[j] records weights.w at the
// selected index: the original weight with replacement, the current
// (pre-removal, unrenormalized) weight without replacement -- which is also
// the original weight, since removals only delete mass elsewhere.
SubsampleDraw draw_weighted(const WeightVector& weights, Index m, SampleMode mode,
                            SeededRng& rng);

// Uniform draw of m distinct indices from [0, n) by partial Fisher-Yates.
// probs are all 1/n.
SubsampleDraw draw_uniform_without_replacement(Index n, Index m, SeededRng& rng);

}  // namespace rsub
