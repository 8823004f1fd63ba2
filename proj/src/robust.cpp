#include "rsub/robust.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

namespace rsub {

namespace {

// Median of the first k entries of buf, destructively.
double median_inplace(std::vector<double>& buf) {
  const std::size_t k = buf.size();
  const std::size_t h = k / 2;
  std::nth_element(buf.begin(), buf.begin() + static_cast<std::ptrdiff_t>(h), buf.end());
  const double hi = buf[h];
  if (k % 2 == 1) return hi;
  const double lo =
      *std::max_element(buf.begin(), buf.begin() + static_cast<std::ptrdiff_t>(h));
  return 0.5 * (lo + hi);
}

}  // namespace

double median(std::vector<double> values) {
  if (values.empty()) throw std::invalid_argument("median: empty input");
  return median_inplace(values);
}

Vector coordinate_median(const Matrix& points) {
  const Index k = points.rows();
  const Index p = points.cols();
  if (k < 1) throw std::invalid_argument("coordinate_median: empty input");
  Vector med(p);
  std::vector<double> buf(static_cast<std::size_t>(k));
  for (Index j = 0; j < p; ++j) {
    for (Index i = 0; i < k; ++i) buf[static_cast<std::size_t>(i)] = points(i, j);
    med(j) = median_inplace(buf);
  }
  return med;
}

Vector robust_distances(const Matrix& x) {
  if (x.rows() < 1) throw std::invalid_argument("robust_distances: empty input");
  const Vector med = coordinate_median(x);
  return (x.rowwise() - med.transpose()).rowwise().norm();
}

Vector robust_distances(const Dataset& d) { return robust_distances(d.x); }

Vector median_of_means(const Matrix& values, const MomConfig& cfg, SeededRng& rng) {
  const Index k = values.rows();
  const Index p = values.cols();
  if (k < 1) throw std::invalid_argument("median_of_means: empty input");
  Index b = cfg.n_blocks;
  if (b == 0)
    b = std::max<Index>(1, static_cast<Index>(std::floor(std::sqrt(
                               static_cast<double>(k)))));
  if (b < 1) throw std::invalid_argument("median_of_means: n_blocks must be >= 1");
  if (k < b)
    throw std::invalid_argument("median_of_means: fewer values than blocks");

  std::vector<Index> order(static_cast<std::size_t>(k));
  std::iota(order.begin(), order.end(), Index{0});
  if (cfg.assignment == MomConfig::Assignment::shuffled) {
    for (Index j = 0; j + 1 < k; ++j) {
      const Index r = j + static_cast<Index>(
                              rng.next_below(static_cast<std::uint64_t>(k - j)));
      std::swap(order[static_cast<std::size_t>(j)], order[static_cast<std::size_t>(r)]);
    }
  }

  Matrix block_means(b, p);
  for (Index blk = 0; blk < b; ++blk) {
    const Index lo = blk * k / b;
    const Index hi = (blk + 1) * k / b;
    Vector acc = Vector::Zero(p);
    for (Index t = lo; t < hi; ++t)
      acc += values.row(order[static_cast<std::size_t>(t)]).transpose();
    block_means.row(blk) = acc.transpose() / static_cast<double>(hi - lo);
  }
  if (b == 1) return block_means.row(0).transpose();
  return coordinate_median(block_means);
}

double sum_of_distances(const Matrix& points, const Vector& x) {
  return (points.rowwise() - x.transpose()).rowwise().norm().sum();
}

GeomMedianResult geometric_median(const Matrix& points, double tol, int max_iter) {
  const Index k = points.rows();
  const Index p = points.cols();
  if (k < 1) throw std::invalid_argument("geometric_median: empty input");
  if (!(tol > 0.0)) throw std::invalid_argument("geometric_median: tol must be > 0");
  if (!points.allFinite())
    throw std::invalid_argument("geometric_median: non-finite input");

  GeomMedianResult res;
  res.point = coordinate_median(points);
  if (k == 1) {
    res.converged = true;
    return res;
  }

  constexpr double kCoincide = 1e-12;
  Vector dist(k);
  for (int it = 0; it < max_iter; ++it) {
    dist = (points.rowwise() - res.point.transpose()).rowwise().norm();

    double inv_sum = 0.0;
    Vector weighted = Vector::Zero(p);
    Vector pull = Vector::Zero(p);  // subgradient of the far points at the iterate
    Index ties = 0;
    for (Index i = 0; i < k; ++i) {
      if (dist(i) <= kCoincide) {
        ++ties;
        continue;
      }
      const double inv = 1.0 / dist(i);
      inv_sum += inv;
      weighted += inv * points.row(i).transpose();
      pull += inv * (points.row(i).transpose() - res.point);
    }

    Vector next(p);
    if (ties == 0) {
      next = weighted / inv_sum;
    } else if (ties == k) {
      // every point coincides with the iterate
      res.iterations = it;
      res.converged = true;
      return res;
    } else {
      // Vardi-Zhang: the iterate sits on a data point of multiplicity
      // `ties`; it is optimal iff the pull of the others is no stronger.
      const double r = pull.norm();
      if (r <= static_cast<double>(ties)) {
        res.iterations = it;
        res.converged = true;
        return res;
      }
      const double step = static_cast<double>(ties) / r;
      next = (1.0 - step) * (weighted / inv_sum) + step * res.point;
    }

    const double move = (next - res.point).norm();
    res.point = next;
    res.iterations = it + 1;
    if (move < tol) {
      res.converged = true;
      return res;
    }
  }
  res.converged = false;
  return res;
}

}  // namespace rsub
