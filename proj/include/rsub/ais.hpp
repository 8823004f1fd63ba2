#pragma once

#include <optional>

#include "rsub/dataset.hpp"
#include "rsub/estimate.hpp"
#include "rsub/loss.hpp"

namespace rsub {

struct AisConfig {
  Index m = 0;                       // subsample size per round, >= 1
  int T = 5;                         // rounds, >= 1
  std::optional<double> beta;        // inverse temperature; nullopt = auto
                                     // (1 / median first-round loss)
  double mix_lambda = 0.05;          // uniform mixing floor, in [0, 0.5]
  LossKind loss = LossKind::squared();
  SampleMode mode = SampleMode::with_replacement;

  std::vector<std::string> validate(Index n) const;
};

// Exponential reweighting with a uniform floor:
//   u_i = exp(-beta * (L_i - min_j L_j)),  w_i = (1-lambda) u_i / sum u + lambda / n.
// The shift by min L makes the update invariant to adding a constant to all
// losses and keeps exp() in range. beta == 0 gives uniform weights. +inf
// losses get zero unmixed mass; NaN or -inf losses are rejected.
WeightVector update_weights(const Vector& losses, double beta, double mix_lambda);

// Adaptive importance sampling: T rounds of (weighted draw of m, importance-
// weighted refit, full-data loss pass, exponential weight update). Regression
// data refit via weighted_erm warm-started at the previous theta; location
// data (no y) use the closed-form weighted mean. objective_trace records the
// full-data mean loss after each round; ess is taken on the final weights.
EstimateResult run_ais(const Dataset& d, const AisConfig& cfg, SeededRng rng);

}  // namespace rsub
