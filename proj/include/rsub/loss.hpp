#pragma once

#include <optional>

#include "rsub/dataset.hpp"
#include "rsub/estimate.hpp"
#include "rsub/sampling.hpp"

namespace rsub {

struct LossKind {
  enum class Tag { squared, huber };

  Tag tag = Tag::squared;
  double huber_delta = 1.0;

  static LossKind squared() { return LossKind{Tag::squared, 1.0}; }
  static LossKind huber(double delta);

  std::string str() const;
  static LossKind parse(const std::string& text);  // "squared" or "huber:1.5"
};

// Regression losses on the residual r = y - x.theta:
//   squared: r^2 / 2
//   huber:   r^2 / 2               for |r| <= delta
//            delta*|r| - delta^2/2 otherwise
double loss_value(const LossKind& kind, const Vector& theta,
                  const Eigen::Ref<const RowVector>& x, double y);
Vector loss_gradient(const LossKind& kind, const Vector& theta,
                     const Eigen::Ref<const RowVector>& x, double y);

// Loss of every observation at theta. Regression data use the losses above;
// datasets without y use the self-loss ||x_i - theta||^2 / 2 (location task).
Vector all_losses(const LossKind& kind, const Dataset& d, const Vector& theta);

// Importance-weighted empirical risk minimization over the drawn subsample:
//   minimize  sum_j c_j * loss(theta; x_{i_j}, y_{i_j}) + ridge/2 * ||theta||^2
// with c_j = 1 / (m * base_weights.w[i_j]), the Horvitz-Thompson coefficients
// that make the subsample risk unbiased for the full-data risk.
//
// ridge: nullopt = automatic -- 0 when m >= p, else a tiny stabilizer
// 1e-8 * trace(X'CX)/p so underdetermined solves stay bounded. Squared loss is
// solved directly (LDLT normal equations, dual form when m < p, minimum-norm
// complete orthogonal decomposition when ridge == 0); Huber runs IRLS from
// `init` with those same inner solves. objective_trace holds the penalized
// objective per iteration and never increases; the result never has a larger
// objective than `init`.
EstimateResult weighted_erm(const LossKind& kind, const Dataset& d,
                            const SubsampleDraw& draw, const WeightVector& base_weights,
                            std::optional<double> ridge, const Vector& init,
                            double tol = 1e-9, int max_iter = 200);

}  // namespace rsub
