#include "rsub/loss.hpp"

#include <Eigen/Cholesky>
#include <Eigen/QR>
#include <algorithm>
#include <cmath>

namespace rsub {

LossKind LossKind::huber(double delta) {
  if (!(delta > 0.0)) throw std::invalid_argument("huber delta must be > 0");
  return LossKind{Tag::huber, delta};
}

std::string LossKind::str() const {
  if (tag == Tag::squared) return "squared";
  char buf[48];
  std::snprintf(buf, sizeof(buf), "huber:%g", huber_delta);
  return buf;
}

LossKind LossKind::parse(const std::string& text) {
  if (text == "squared") return squared();
  const std::string prefix = "huber";
  if (text.rfind(prefix, 0) == 0) {
    if (text.size() == prefix.size()) return huber(1.0);
    if (text[prefix.size()] == ':') {
      try {
        return huber(std::stod(text.substr(prefix.size() + 1)));
      } catch (const std::invalid_argument&) {
        throw;
      } catch (const std::exception&) {
        throw std::invalid_argument("loss: cannot parse '" + text + "'");
      }
    }
  }
  throw std::invalid_argument("loss: unknown kind '" + text +
                              "' (expected squared|huber:delta)");
}

namespace {

double residual_loss(const LossKind& kind, double r) {
  if (kind.tag == LossKind::Tag::squared) return 0.5 * r * r;
  const double a = std::abs(r);
  const double d = kind.huber_delta;
  if (a <= d) return 0.5 * r * r;
  return d * (a - 0.5 * d);
}

double residual_dloss(const LossKind& kind, double r) {
  // d/dr of the residual loss
  if (kind.tag == LossKind::Tag::squared) return r;
  const double d = kind.huber_delta;
  return std::clamp(r, -d, d);
}

}  // namespace

double loss_value(const LossKind& kind, const Vector& theta,
                  const Eigen::Ref<const RowVector>& x, double y) {
  if (theta.size() != x.size())
    throw std::invalid_argument("loss_value: dimension mismatch");
  return residual_loss(kind, y - (x * theta)(0));
}

Vector loss_gradient(const LossKind& kind, const Vector& theta,
                     const Eigen::Ref<const RowVector>& x, double y) {
  if (theta.size() != x.size())
    throw std::invalid_argument("loss_gradient: dimension mismatch");
  const double r = y - (x * theta)(0);
  return -residual_dloss(kind, r) * x.transpose();
}

Vector all_losses(const LossKind& kind, const Dataset& d, const Vector& theta) {
  const Index n = d.n();
  if (theta.size() != d.p())
    throw std::invalid_argument("all_losses: theta has wrong length");
  Vector out(n);
  if (d.y) {
    const Vector r = *d.y - d.x * theta;
    for (Index i = 0; i < n; ++i) out(i) = residual_loss(kind, r(i));
  } else {
    // location task: self-loss ||x_i - theta||^2 / 2
    out = 0.5 * (d.x.rowwise() - theta.transpose()).rowwise().squaredNorm();
  }
  return out;
}

namespace {

// Weighted penalized least squares: minimize sum_j c_j (y_j - x_j'theta)^2 / 2
// + ridge ||theta||^2 / 2. Solved by normal equations when k >= p, by the
// dual (kernel) form when k < p with ridge > 0, and by minimum-norm COD when
// ridge == 0.
Vector solve_weighted_ls(const Matrix& rows, const Vector& targets,
                         const Vector& coeffs, double ridge, bool* rank_warn) {
  const Index k = rows.rows();
  const Index p = rows.cols();
  const Vector root = coeffs.cwiseSqrt();
  Matrix scaled = root.asDiagonal() * rows;        // k x p
  const Vector scaled_y = root.cwiseProduct(targets);

  if (ridge > 0.0) {
    if (k >= p) {
      Matrix gram = scaled.transpose() * scaled;
      gram.diagonal().array() += ridge;
      return Eigen::LDLT<Matrix>(gram).solve(scaled.transpose() * scaled_y);
    }
    Matrix gram = scaled * scaled.transpose();  // k x k
    gram.diagonal().array() += ridge;
    return scaled.transpose() * Eigen::LDLT<Matrix>(gram).solve(scaled_y);
  }

  Eigen::CompleteOrthogonalDecomposition<Matrix> cod(scaled);
  if (rank_warn && cod.rank() < p) *rank_warn = true;
  return cod.solve(scaled_y);
}

}  // namespace

EstimateResult weighted_erm(const LossKind& kind, const Dataset& d,
                            const SubsampleDraw& draw, const WeightVector& base_weights,
                            std::optional<double> ridge, const Vector& init,
                            double tol, int max_iter) {
  const Index n = d.n();
  const Index p = d.p();
  const Index k = draw.m();
  if (k < 1) throw std::invalid_argument("weighted_erm: empty draw");
  if (!d.y) throw std::invalid_argument("weighted_erm: dataset has no response");
  if (base_weights.size() != n)
    throw std::invalid_argument("weighted_erm: base_weights length mismatch");
  if (init.size() != p) throw std::invalid_argument("weighted_erm: init length mismatch");
  if (ridge && (!(*ridge >= 0.0) || !std::isfinite(*ridge)))
    throw std::invalid_argument("weighted_erm: ridge must be finite and >= 0");

  Matrix rows(k, p);
  Vector targets(k);
  Vector coeffs(k);
  const double md = static_cast<double>(k);
  for (Index j = 0; j < k; ++j) {
    const Index i = draw.indices[static_cast<std::size_t>(j)];
    if (i < 0 || i >= n)
      throw std::invalid_argument("weighted_erm: draw index out of range");
    const double w = base_weights.w(i);
    if (!(w > 0.0))
      throw std::invalid_argument("weighted_erm: selected index has zero weight");
    rows.row(j) = d.x.row(i);
    targets(j) = (*d.y)(i);
    coeffs(j) = 1.0 / (md * w);
  }

  double lambda;
  if (ridge) {
    lambda = *ridge;
  } else if (k >= p) {
    lambda = 0.0;
  } else {
    // tiny trace-scaled stabilizer keeps the underdetermined solve bounded
    double tr = 0.0;
    for (Index j = 0; j < k; ++j) tr += coeffs(j) * rows.row(j).squaredNorm();
    lambda = 1e-8 * tr / static_cast<double>(p);
  }

  EstimateResult res;
  res.method = "weighted-erm";
  res.ess = effective_sample_size(base_weights);

  const auto objective = [&](const Vector& theta) {
    double obj = 0.5 * lambda * theta.squaredNorm();
    const Vector r = targets - rows * theta;
    for (Index j = 0; j < k; ++j) obj += coeffs(j) * residual_loss(kind, r(j));
    return obj;
  };

  bool rank_warn = false;
  if (kind.tag == LossKind::Tag::squared) {
    const double f0 = objective(init);
    res.theta = solve_weighted_ls(rows, targets, coeffs, lambda, &rank_warn);
    const double f1 = objective(res.theta);
    res.iterations = 1;
    if (f1 <= f0) {
      res.objective_trace = {f0, f1};
    } else {
      // pathological conditioning; keep the descent contract
      res.theta = init;
      res.objective_trace = {f0, f0};
    }
  } else {
    // IRLS: reweight by the Huber psi ratio, solve weighted LS, repeat.
    Vector theta = init;
    double f_prev = objective(theta);
    res.objective_trace.push_back(f_prev);
    const double delta = kind.huber_delta;
    int it = 0;
    for (; it < max_iter; ++it) {
      const Vector r = targets - rows * theta;
      Vector irls = coeffs;
      for (Index j = 0; j < k; ++j) {
        const double a = std::abs(r(j));
        if (a > delta) irls(j) *= delta / a;
      }
      Vector next = solve_weighted_ls(rows, targets, irls, lambda, &rank_warn);
      double f_next = objective(next);
      if (f_next > f_prev) {
        // MM step should not ascend; halve toward the current iterate if
        // rounding says otherwise
        next = 0.5 * (next + theta);
        f_next = objective(next);
        if (f_next > f_prev) break;
      }
      const double move = (next - theta).norm();
      theta = next;
      f_prev = f_next;
      res.objective_trace.push_back(f_prev);
      if (move < tol * (1.0 + theta.norm())) {
        ++it;
        break;
      }
    }
    res.iterations = it;
    if (it >= max_iter)
      res.warnings.push_back("weighted_erm: IRLS hit max_iter before tol");
    res.theta = theta;
  }

  if (rank_warn)
    res.warnings.push_back(
        "weighted_erm: rank-deficient system; minimum-norm solution returned");
  return res;
}

}  // namespace rsub
