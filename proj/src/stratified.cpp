#include "rsub/stratified.hpp"

#include <Eigen/Cholesky>
#include <algorithm>
#include <cmath>
#include <numeric>
#include <sstream>

#include "rsub/sampling.hpp"

namespace rsub {

std::vector<std::vector<Index>> stratify_by_distance(const Vector& distances, int K) {
  const Index n = distances.size();
  if (n < 1) throw std::invalid_argument("stratify: empty distances");
  if (K < 1) throw std::invalid_argument("stratify: K must be >= 1");
  if (static_cast<Index>(K) > n) throw std::invalid_argument("stratify: K exceeds n");

  std::vector<Index> order(static_cast<std::size_t>(n));
  std::iota(order.begin(), order.end(), Index{0});
  std::stable_sort(order.begin(), order.end(), [&](Index a, Index b) {
    return distances(a) < distances(b);  // stable: ties keep index order
  });

  std::vector<std::vector<Index>> strata(static_cast<std::size_t>(K));
  // contiguous rank ranges, sizes differing by at most one; the first
  // n mod K strata take the extra element
  const Index base = n / K;
  const Index extra = n % K;
  Index pos = 0;
  for (Index k = 0; k < K; ++k) {
    const Index size = base + (k < extra ? 1 : 0);
    auto& s = strata[static_cast<std::size_t>(k)];
    s.assign(order.begin() + pos, order.begin() + pos + size);
    std::sort(s.begin(), s.end());
    pos += size;
  }
  return strata;
}

std::vector<std::vector<Index>> stratify(const Dataset& d, int K) {
  return stratify_by_distance(robust_distances(d), K);
}

std::vector<Index> allocate(const std::vector<Index>& strata_sizes, Index m) {
  const Index K = static_cast<Index>(strata_sizes.size());
  if (K < 1) throw std::invalid_argument("allocate: no strata");
  Index n = 0;
  for (Index sz : strata_sizes) {
    if (sz < 0) throw std::invalid_argument("allocate: negative stratum size");
    n += sz;
  }
  if (n < 1) throw std::invalid_argument("allocate: empty strata");
  if (m < 0) throw std::invalid_argument("allocate: m must be >= 0");
  if (m > n) throw std::invalid_argument("allocate: m exceeds n");

  // exact integer largest-remainder rounding of quotas m*size/n
  std::vector<Index> alloc(static_cast<std::size_t>(K));
  std::vector<Index> rem(static_cast<std::size_t>(K));
  Index assigned = 0;
  for (Index k = 0; k < K; ++k) {
    const Index prod = m * strata_sizes[static_cast<std::size_t>(k)];
    alloc[static_cast<std::size_t>(k)] = prod / n;
    rem[static_cast<std::size_t>(k)] = prod % n;
    assigned += prod / n;
  }
  std::vector<Index> order(static_cast<std::size_t>(K));
  std::iota(order.begin(), order.end(), Index{0});
  std::stable_sort(order.begin(), order.end(), [&](Index a, Index b) {
    return rem[static_cast<std::size_t>(a)] > rem[static_cast<std::size_t>(b)];
  });
  Index left = m - assigned;
  for (Index k : order) {
    if (left == 0) break;
    if (alloc[static_cast<std::size_t>(k)] < strata_sizes[static_cast<std::size_t>(k)]) {
      ++alloc[static_cast<std::size_t>(k)];
      --left;
    }
  }
  return alloc;
}

namespace {

// Per-block least squares with a small ridge so short blocks stay solvable.
// Short wide blocks use the dual identity (X'X + r I)^-1 X'y = X'(XX' + r I)^-1 y,
// exact for r > 0, so the solve is k x k instead of p x p.
Vector block_ls(const Matrix& x, const Vector& y, double ridge) {
  if (x.rows() < x.cols()) {
    Matrix gram = x * x.transpose();
    gram.diagonal().array() += ridge;
    return x.transpose() * Eigen::LDLT<Matrix>(gram).solve(y);
  }
  Matrix gram = x.transpose() * x;
  gram.diagonal().array() += ridge;
  return Eigen::LDLT<Matrix>(gram).solve(x.transpose() * y);
}

// Median-of-means over block-wise regression fits inside one stratum.
Vector regression_mom(const Matrix& x, const Vector& y, const MomConfig& mom,
                      SeededRng& rng) {
  const Index k = x.rows();
  Index b = mom.n_blocks;
  if (b == 0)
    b = std::max<Index>(
        1, static_cast<Index>(std::floor(std::sqrt(static_cast<double>(k)))));

  std::vector<Index> order(static_cast<std::size_t>(k));
  std::iota(order.begin(), order.end(), Index{0});
  if (mom.assignment == MomConfig::Assignment::shuffled) {
    for (Index j = 0; j + 1 < k; ++j) {
      const Index r = j + static_cast<Index>(
                              rng.next_below(static_cast<std::uint64_t>(k - j)));
      std::swap(order[static_cast<std::size_t>(j)], order[static_cast<std::size_t>(r)]);
    }
  }

  constexpr double kBlockRidge = 1e-6;
  Matrix fits(b, x.cols());
  for (Index blk = 0; blk < b; ++blk) {
    const Index lo = blk * k / b;
    const Index hi = (blk + 1) * k / b;
    Matrix bx(hi - lo, x.cols());
    Vector by(hi - lo);
    for (Index t = lo; t < hi; ++t) {
      bx.row(t - lo) = x.row(order[static_cast<std::size_t>(t)]);
      by(t - lo) = y(order[static_cast<std::size_t>(t)]);
    }
    fits.row(blk) = block_ls(bx, by, kBlockRidge).transpose();
  }
  if (b == 1) return fits.row(0).transpose();
  return coordinate_median(fits);
}

}  // namespace

EstimateResult run_stratified(const Dataset& d, const StratConfig& cfg, SeededRng rng) {
  const Index n = d.n();
  const Index p = d.p();
  if (cfg.m < 1) throw std::invalid_argument("run_stratified: m must be >= 1");
  if (cfg.m > n) throw std::invalid_argument("run_stratified: m exceeds n");
  if (cfg.K < 1) throw std::invalid_argument("run_stratified: K must be >= 1");
  if (static_cast<Index>(cfg.K) > n)
    throw std::invalid_argument("run_stratified: K exceeds n");
  if (cfg.task == Task::regression && !d.y)
    throw std::invalid_argument("run_stratified: regression task requires y");

  EstimateResult res;
  res.method = "stratified";

  const auto strata = stratify(d, cfg.K);
  std::vector<Index> sizes;
  sizes.reserve(strata.size());
  for (const auto& s : strata) sizes.push_back(static_cast<Index>(s.size()));
  const auto alloc = allocate(sizes, cfg.m);

  Matrix estimates(static_cast<Index>(strata.size()), p);
  Index kept = 0;
  for (std::size_t k = 0; k < strata.size(); ++k) {
    const Index mk = alloc[k];
    if (mk < 1) {
      std::ostringstream os;
      os << "stratum " << k << " skipped: allocation 0";
      res.warnings.push_back(os.str());
      continue;
    }
    if (cfg.mom.n_blocks > 0 && static_cast<Index>(cfg.mom.n_blocks) > mk) {
      std::ostringstream os;
      os << "stratum " << k << " skipped: " << mk << " points for "
         << cfg.mom.n_blocks << " blocks";
      res.warnings.push_back(os.str());
      continue;
    }
    const SubsampleDraw local =
        draw_uniform_without_replacement(sizes[k], mk, rng);
    std::vector<Index> rows;
    rows.reserve(static_cast<std::size_t>(mk));
    for (Index j : local.indices) rows.push_back(strata[k][static_cast<std::size_t>(j)]);

    const Matrix sx = gather_rows(d.x, rows);
    if (cfg.task == Task::mean) {
      estimates.row(kept++) = median_of_means(sx, cfg.mom, rng).transpose();
    } else {
      const Vector sy = gather_entries(*d.y, rows);
      estimates.row(kept++) = regression_mom(sx, sy, cfg.mom, rng).transpose();
    }
  }
  if (kept == 0)
    throw EstimationError("run_stratified: all strata skipped, nothing to aggregate");

  const GeomMedianResult gm =
      geometric_median(estimates.topRows(kept), cfg.gm_tol, cfg.gm_max_iter);
  if (!gm.converged)
    res.warnings.push_back("geometric median hit max_iter before tol");
  res.theta = gm.point;
  res.iterations = gm.iterations;
  return res;
}

}  // namespace rsub
