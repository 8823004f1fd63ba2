#include "rsub/sampling.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <sstream>

namespace rsub {

WeightVector WeightVector::uniform(Index n) {
  if (n < 1) throw std::invalid_argument("WeightVector::uniform: n must be >= 1");
  WeightVector wv;
  wv.w = Vector::Constant(n, 1.0 / static_cast<double>(n));
  return wv;
}

std::vector<std::string> WeightVector::validate() const {
  std::vector<std::string> out;
  if (w.size() < 1) {
    out.push_back("weight vector is empty");
    return out;
  }
  for (Index i = 0; i < w.size(); ++i) {
    if (!std::isfinite(w(i)) || w(i) < 0.0) {
      std::ostringstream os;
      os << "weight " << i << " is not a finite nonnegative value";
      out.push_back(os.str());
      break;
    }
  }
  const double total = w.sum();
  if (std::abs(total - 1.0) > 1e-12) {
    std::ostringstream os;
    os << "weights sum to " << total << ", expected 1";
    out.push_back(os.str());
  }
  return out;
}

double effective_sample_size(const WeightVector& weights) {
  const double s2 = weights.w.squaredNorm();
  if (s2 <= 0.0)
    throw std::invalid_argument("effective_sample_size: weights are all zero");
  return 1.0 / s2;
}

namespace {

// Fenwick tree over nonnegative reals; supports prefix-search for the first
// index whose cumulative sum exceeds a target.
class FenwickTree {
 public:
  explicit FenwickTree(const Vector& w)
      : n_(w.size()), tree_(static_cast<std::size_t>(n_) + 1, 0.0) {
    for (Index i = 0; i < n_; ++i) tree_[static_cast<std::size_t>(i) + 1] = w(i);
    for (std::size_t i = 1; i <= static_cast<std::size_t>(n_); ++i) {
      const std::size_t parent = i + (i & (~i + 1));
      if (parent <= static_cast<std::size_t>(n_)) tree_[parent] += tree_[i];
    }
    high_bit_ = 1;
    while ((high_bit_ << 1) <= static_cast<std::size_t>(n_)) high_bit_ <<= 1;
  }

  void add(Index i, double delta) {
    for (std::size_t k = static_cast<std::size_t>(i) + 1;
         k <= static_cast<std::size_t>(n_); k += k & (~k + 1))
      tree_[k] += delta;
  }

  // First 0-based index with cumulative sum > target (target < total).
  Index search(double target) const {
    std::size_t pos = 0;
    double rem = target;
    for (std::size_t bit = high_bit_; bit > 0; bit >>= 1) {
      const std::size_t next = pos + bit;
      if (next <= static_cast<std::size_t>(n_) && tree_[next] <= rem) {
        rem -= tree_[next];
        pos = next;
      }
    }
    return static_cast<Index>(pos);  // pos entries have cumsum <= target
  }

 private:
  Index n_;
  std::vector<double> tree_;
  std::size_t high_bit_ = 1;
};

void check_weights(const Vector& w) {
  if (w.size() < 1) throw std::invalid_argument("draw_weighted: empty weights");
  for (Index i = 0; i < w.size(); ++i) {
    if (!std::isfinite(w(i)) || w(i) < 0.0)
      throw std::invalid_argument("draw_weighted: weights must be finite and >= 0");
  }
  if (w.sum() <= 0.0)
    throw std::invalid_argument("draw_weighted: weights must have positive mass");
}

// Nudge a boundary landing off any zero-weight index.
Index skip_zeros(Index idx, const Vector& cur) {
  const Index n = cur.size();
  Index k = idx;
  while (k < n && cur(k) <= 0.0) ++k;
  if (k < n) return k;
  k = std::min(idx, n - 1);
  while (k >= 0 && cur(k) <= 0.0) --k;
  return k;  // -1 only if every weight is zero, which check_weights rules out
}

}  // namespace

SubsampleDraw draw_weighted(const WeightVector& weights, Index m, SampleMode mode,
                            SeededRng& rng) {
  const Vector& w = weights.w;
  check_weights(w);
  const Index n = w.size();
  if (m < 1) throw std::invalid_argument("draw_weighted: m must be >= 1");

  SubsampleDraw draw;
  draw.mode = mode;
  draw.indices.reserve(static_cast<std::size_t>(m));
  draw.probs.resize(m);

  if (mode == SampleMode::with_replacement) {
    std::vector<double> prefix(static_cast<std::size_t>(n));
    std::partial_sum(w.data(), w.data() + n, prefix.begin());
    const double total = prefix.back();
    for (Index j = 0; j < m; ++j) {
      const double u = rng.next_double() * total;
      const auto it = std::upper_bound(prefix.begin(), prefix.end(), u);
      Index idx = std::min<Index>(static_cast<Index>(it - prefix.begin()), n - 1);
      if (w(idx) <= 0.0) idx = skip_zeros(idx, w);
      draw.indices.push_back(idx);
      draw.probs(j) = w(idx);
    }
    return draw;
  }

  if (m > n)
    throw std::invalid_argument("draw_weighted: m exceeds n without replacement");
  Vector cur = w;
  FenwickTree tree(cur);
  double remaining = cur.sum();
  for (Index j = 0; j < m; ++j) {
    if (!(remaining > 0.0))
      throw std::invalid_argument(
          "draw_weighted: positive-weight support exhausted before m draws");
    const double u = rng.next_double() * remaining;
    Index idx = tree.search(std::min(u, remaining * (1.0 - 1e-16)));
    if (idx >= n) idx = n - 1;
    if (cur(idx) <= 0.0) idx = skip_zeros(idx, cur);
    if (idx < 0)
      throw std::invalid_argument(
          "draw_weighted: positive-weight support exhausted before m draws");
    draw.indices.push_back(idx);
    draw.probs(j) = w(idx);
    remaining -= cur(idx);
    tree.add(idx, -cur(idx));
    cur(idx) = 0.0;
  }
  return draw;
}

SubsampleDraw draw_uniform_without_replacement(Index n, Index m, SeededRng& rng) {
  if (n < 1) throw std::invalid_argument("draw_uniform: n must be >= 1");
  if (m < 1) throw std::invalid_argument("draw_uniform: m must be >= 1");
  if (m > n) throw std::invalid_argument("draw_uniform: m exceeds n");
  std::vector<Index> perm(static_cast<std::size_t>(n));
  std::iota(perm.begin(), perm.end(), Index{0});
  SubsampleDraw draw;
  draw.mode = SampleMode::without_replacement;
  draw.indices.resize(static_cast<std::size_t>(m));
  draw.probs = Vector::Constant(m, 1.0 / static_cast<double>(n));
  for (Index j = 0; j < m; ++j) {
    const Index r = j + static_cast<Index>(
                            rng.next_below(static_cast<std::uint64_t>(n - j)));
    std::swap(perm[static_cast<std::size_t>(j)], perm[static_cast<std::size_t>(r)]);
    draw.indices[static_cast<std::size_t>(j)] = perm[static_cast<std::size_t>(j)];
  }
  return draw;
}

}  // namespace rsub
