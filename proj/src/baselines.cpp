#include "rsub/baselines.hpp"

#include <Eigen/Cholesky>
#include <Eigen/QR>
#include <algorithm>
#include <cmath>
#include <numeric>

namespace rsub {

namespace {

// Materialize the working rows: the draw's subsample, or the full sample.
void select_rows(const Dataset& d, const SubsampleDraw* draw, Matrix& x, Vector& y) {
  if (!d.y) throw std::invalid_argument("baseline fit requires a response");
  if (!draw) {
    x = d.x;
    y = *d.y;
    return;
  }
  if (draw->m() < 1) throw std::invalid_argument("baseline fit: empty draw");
  x = gather_rows(d.x, draw->indices);
  y = gather_entries(*d.y, draw->indices);
}

double lasso_objective(const Matrix& x, const Vector& y, const Vector& theta,
                       double lambda) {
  const double k = static_cast<double>(x.rows());
  return (y - x * theta).squaredNorm() / (2.0 * k) + lambda * theta.lpNorm<1>();
}

}  // namespace

EstimateResult fit_ols(const Dataset& d, const SubsampleDraw* draw) {
  Matrix x;
  Vector y;
  select_rows(d, draw, x, y);

  EstimateResult res;
  res.method = "ols";
  Eigen::CompleteOrthogonalDecomposition<Matrix> cod(x);
  res.theta = cod.solve(y);
  res.iterations = 1;
  if (cod.rank() < x.cols())
    res.warnings.push_back("ols: rank-deficient design; minimum-norm solution");
  return res;
}

EstimateResult fit_ridge(const Dataset& d, double lambda, const SubsampleDraw* draw) {
  if (!(lambda >= 0.0) || !std::isfinite(lambda))
    throw std::invalid_argument("fit_ridge: lambda must be finite and >= 0");
  if (lambda == 0.0) {
    EstimateResult res = fit_ols(d, draw);
    res.method = "ridge";
    return res;
  }
  Matrix x;
  Vector y;
  select_rows(d, draw, x, y);
  const Index k = x.rows();
  const Index p = x.cols();
  const double kd = static_cast<double>(k);

  EstimateResult res;
  res.method = "ridge";
  res.iterations = 1;
  if (k >= p) {
    Matrix gram = x.transpose() * x / kd;
    gram.diagonal().array() += lambda;
    res.theta = Eigen::LDLT<Matrix>(gram).solve(x.transpose() * y / kd);
  } else {
    Matrix gram = x * x.transpose() / kd;  // k x k dual form
    gram.diagonal().array() += lambda;
    res.theta = x.transpose() * Eigen::LDLT<Matrix>(gram).solve(y / kd);
  }
  return res;
}

EstimateResult fit_lasso(const Dataset& d, std::optional<double> lambda,
                         const SubsampleDraw* draw, double tol, int max_iter) {
  Matrix x;
  Vector y;
  select_rows(d, draw, x, y);
  const Index k = x.rows();
  const Index p = x.cols();
  const double kd = static_cast<double>(k);

  double lam;
  if (lambda) {
    if (!(*lambda >= 0.0) || !std::isfinite(*lambda))
      throw std::invalid_argument("fit_lasso: lambda must be finite and >= 0");
    lam = *lambda;
  } else {
    // a fixed fraction of the full-shrinkage threshold keeps runs deterministic
    lam = 0.1 * (x.transpose() * y).cwiseAbs().maxCoeff() / kd;
  }

  EstimateResult res;
  res.method = "lasso";

  // cyclic coordinate descent with residual maintenance
  const Vector col_sq = x.colwise().squaredNorm() / kd;  // x_j'x_j / k
  Vector theta = Vector::Zero(p);
  Vector resid = y;  // y - x*theta
  res.objective_trace.push_back(lasso_objective(x, y, theta, lam));

  int sweep = 0;
  for (; sweep < max_iter; ++sweep) {
    double max_change = 0.0;
    for (Index j = 0; j < p; ++j) {
      if (col_sq(j) <= 0.0) continue;  // dead column stays at zero
      const double old = theta(j);
      const double rho = x.col(j).dot(resid) / kd + col_sq(j) * old;
      const double z = std::abs(rho) - lam;
      const double next = z > 0.0 ? std::copysign(z, rho) / col_sq(j) : 0.0;
      if (next != old) {
        resid += x.col(j) * (old - next);
        theta(j) = next;
        max_change = std::max(max_change, std::abs(next - old));
      }
    }
    res.objective_trace.push_back(lasso_objective(x, y, theta, lam));
    if (max_change < tol) {
      ++sweep;
      break;
    }
  }
  res.iterations = sweep;
  if (sweep >= max_iter)
    res.warnings.push_back("lasso: max_iter sweeps reached before tol");
  res.theta = std::move(theta);
  return res;
}

EstimateResult uniform_subsample_estimate(const Dataset& d, Task task, Index m,
                                          SeededRng rng) {
  const Index n = d.n();
  if (m < 1) throw std::invalid_argument("uniform subsample: m must be >= 1");
  if (m > n) throw std::invalid_argument("uniform subsample: m exceeds n");
  const SubsampleDraw draw = draw_uniform_without_replacement(n, m, rng);

  EstimateResult res;
  if (task == Task::mean) {
    const Matrix rows = gather_rows(d.x, draw.indices);
    res.theta = rows.colwise().mean().transpose();
    res.iterations = 1;
  } else {
    res = fit_ols(d, &draw);
  }
  res.method = "uniform-subsample";
  return res;
}

EstimateResult run_baseline(const Dataset& d, const BaselineConfig& cfg, SeededRng rng) {
  const Index n = d.n();
  std::optional<SubsampleDraw> draw;
  if (cfg.m) {
    if (*cfg.m < 1) throw std::invalid_argument("baseline: m must be >= 1");
    if (*cfg.m > n) throw std::invalid_argument("baseline: m exceeds n");
    if (*cfg.m < n) draw = draw_uniform_without_replacement(n, *cfg.m, rng);
  }
  const SubsampleDraw* dp = draw ? &*draw : nullptr;
  switch (cfg.method) {
    case BaselineConfig::Method::ols:
      return fit_ols(d, dp);
    case BaselineConfig::Method::ridge:
      return fit_ridge(d, cfg.ridge_lambda, dp);
    case BaselineConfig::Method::lasso:
      return fit_lasso(d, cfg.lasso_lambda, dp);
  }
  throw std::invalid_argument("baseline: unknown method");
}

}  // namespace rsub
