#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <numeric>
#include <set>
#include <vector>

#include "rsub/datagen.hpp"
#include "rsub/stratified.hpp"

using namespace rsub;

namespace {

Vector iota_vector(Index n) {
  Vector v(n);
  for (Index i = 0; i < n; ++i) v[i] = static_cast<double>(i);
  return v;
}

}  // namespace

TEST_CASE("stratify_by_distance: one stratum holds everything") {
  auto strata = stratify_by_distance(iota_vector(5), 1);
  REQUIRE(strata.size() == 1);
  CHECK(strata[0] == std::vector<Index>{0, 1, 2, 3, 4});
}

TEST_CASE("stratify_by_distance: even split follows distance rank") {
  auto strata = stratify_by_distance(iota_vector(8), 4);
  REQUIRE(strata.size() == 4);
  CHECK(strata[0] == std::vector<Index>{0, 1});
  CHECK(strata[1] == std::vector<Index>{2, 3});
  CHECK(strata[2] == std::vector<Index>{4, 5});
  CHECK(strata[3] == std::vector<Index>{6, 7});
}

TEST_CASE("stratify_by_distance: first n mod K strata take the extra point") {
  auto strata = stratify_by_distance(iota_vector(10), 4);
  REQUIRE(strata.size() == 4);
  CHECK(strata[0].size() == 3);
  CHECK(strata[1].size() == 3);
  CHECK(strata[2].size() == 2);
  CHECK(strata[3].size() == 2);
}

TEST_CASE("stratify_by_distance: ranks invert when distances are reversed") {
  Vector d(6);
  d << 5, 4, 3, 2, 1, 0;
  auto strata = stratify_by_distance(d, 3);
  CHECK(strata[0] == std::vector<Index>{4, 5});
  CHECK(strata[1] == std::vector<Index>{2, 3});
  CHECK(strata[2] == std::vector<Index>{0, 1});
}

TEST_CASE("stratify_by_distance: ties break by index") {
  Vector d = Vector::Zero(8);
  auto strata = stratify_by_distance(d, 4);
  CHECK(strata[0] == std::vector<Index>{0, 1});
  CHECK(strata[1] == std::vector<Index>{2, 3});
  CHECK(strata[2] == std::vector<Index>{4, 5});
  CHECK(strata[3] == std::vector<Index>{6, 7});
}

TEST_CASE("stratify_by_distance: partition and ordering properties") {
  SeededRng rng(2, 930);
  const Index n = 103;
  Vector d(n);
  for (Index i = 0; i < n; ++i) d[i] = rng.next_normal();
  for (int K : {1, 2, 5, 7, 103}) {
    auto strata = stratify_by_distance(d, K);
    REQUIRE(static_cast<int>(strata.size()) == K);
    std::set<Index> seen;
    std::size_t total = 0;
    Index min_size = n, max_size = 0;
    double prev_max = -1e300;
    for (const auto& s : strata) {
      REQUIRE(!s.empty());
      CHECK(std::is_sorted(s.begin(), s.end()));
      total += s.size();
      for (Index i : s) seen.insert(i);
      min_size = std::min<Index>(min_size, static_cast<Index>(s.size()));
      max_size = std::max<Index>(max_size, static_cast<Index>(s.size()));
      double lo = 1e300, hi = -1e300;
      for (Index i : s) {
        lo = std::min(lo, d[i]);
        hi = std::max(hi, d[i]);
      }
      CHECK(lo >= prev_max - 1e-15);  // strata are distance-ordered
      prev_max = hi;
    }
    CHECK(total == static_cast<std::size_t>(n));
    CHECK(seen.size() == static_cast<std::size_t>(n));
    CHECK(max_size - min_size <= 1);
  }
}

TEST_CASE("stratify_by_distance rejects bad arguments") {
  CHECK_THROWS_AS((void)stratify_by_distance(Vector(0), 1), std::invalid_argument);
  CHECK_THROWS_AS((void)stratify_by_distance(iota_vector(4), 0), std::invalid_argument);
  CHECK_THROWS_AS((void)stratify_by_distance(iota_vector(4), 5), std::invalid_argument);
}

TEST_CASE("stratify(dataset) is stratification of the robust distances") {
  EnvironmentSpec env;
  env.n = 60;
  env.p = 3;
  env.s = 2;
  env.noise = NoiseSpec::parse("gaussian:1");
  Dataset d = gen_location(env, SeededRng(4, 0));
  auto a = stratify(d, 6);
  auto b = stratify_by_distance(robust_distances(d), 6);
  CHECK(a == b);
}

TEST_CASE("allocate: exact proportions stay exact") {
  CHECK(allocate({25, 25, 25, 25}, 20) == std::vector<Index>{5, 5, 5, 5});
  CHECK(allocate({10, 20, 30}, 6) == std::vector<Index>{1, 2, 3});
}

TEST_CASE("allocate: largest remainder with ties to the lower index") {
  // quotas 1.5, 1.5, 2.0 -> floors 1,1,2, one leftover unit goes to stratum 0
  CHECK(allocate({3, 3, 4}, 5) == std::vector<Index>{2, 1, 2});
}

TEST_CASE("allocate: edge budgets") {
  CHECK(allocate({4, 3, 2}, 9) == std::vector<Index>{4, 3, 2});  // m == n
  CHECK(allocate({4, 3, 2}, 0) == std::vector<Index>{0, 0, 0});
  CHECK(allocate({7}, 3) == std::vector<Index>{3});
}

TEST_CASE("allocate: sums to m and never exceeds stratum sizes") {
  SeededRng rng(6, 931);
  for (int rep = 0; rep < 200; ++rep) {
    const int K = 1 + static_cast<int>(rng.next_below(8));
    std::vector<Index> sizes;
    Index n = 0;
    for (int k = 0; k < K; ++k) {
      const Index sz = 1 + static_cast<Index>(rng.next_below(30));
      sizes.push_back(sz);
      n += sz;
    }
    const Index m = static_cast<Index>(rng.next_below(static_cast<uint64_t>(n) + 1));
    auto alloc = allocate(sizes, m);
    REQUIRE(alloc.size() == sizes.size());
    Index total = 0;
    for (std::size_t k = 0; k < alloc.size(); ++k) {
      CHECK(alloc[k] >= 0);
      CHECK(alloc[k] <= sizes[k]);
      total += alloc[k];
    }
    CHECK(total == m);
  }
}

TEST_CASE("allocate rejects bad arguments") {
  CHECK_THROWS_AS((void)allocate({}, 1), std::invalid_argument);
  CHECK_THROWS_AS((void)allocate({0, 0}, 0), std::invalid_argument);
  CHECK_THROWS_AS((void)allocate({-1, 5}, 2), std::invalid_argument);
  CHECK_THROWS_AS((void)allocate({3, 3}, 7), std::invalid_argument);
  CHECK_THROWS_AS((void)allocate({3, 3}, -1), std::invalid_argument);
}

TEST_CASE("run_stratified: one stratum, one block, full budget is the mean") {
  SeededRng gen(12, 932);
  Dataset d;
  d.x.resize(30, 4);
  for (Index i = 0; i < 30; ++i)
    for (Index j = 0; j < 4; ++j) d.x(i, j) = gen.next_normal();
  StratConfig cfg;
  cfg.m = 30;
  cfg.K = 1;
  cfg.task = Task::mean;
  cfg.mom.n_blocks = 1;
  EstimateResult fit = run_stratified(d, cfg, SeededRng(12, 1));
  Vector mean = d.x.colwise().mean().transpose();
  CHECK((fit.theta - mean).norm() < 1e-12);
  CHECK(fit.method == "stratified");
  CHECK(fit.warnings.empty());
}

TEST_CASE("run_stratified is deterministic in the seed") {
  EnvironmentSpec env;
  env.n = 200;
  env.p = 4;
  env.s = 2;
  env.noise = NoiseSpec::parse("student_t:3");
  Dataset d = gen_location(env, SeededRng(14, 0));
  StratConfig cfg;
  cfg.m = 60;
  cfg.K = 5;
  EstimateResult a = run_stratified(d, cfg, SeededRng(14, 1));
  EstimateResult b = run_stratified(d, cfg, SeededRng(14, 1));
  EstimateResult c = run_stratified(d, cfg, SeededRng(14, 2));
  CHECK(a.theta == b.theta);  // bitwise
  CHECK((a.theta - c.theta).norm() > 0.0);
}

TEST_CASE("run_stratified shrugs off gross row corruption") {
  EnvironmentSpec env;
  env.n = 1000;
  env.p = 5;
  env.s = 0;  // truth is the zero vector
  env.noise = NoiseSpec::parse("gaussian:1");
  env.contamination = 0.1;
  env.corruption_magnitude = 1e3;
  Dataset d = gen_location(env, SeededRng(15, 0));

  StratConfig cfg;
  cfg.m = 300;
  cfg.K = 10;
  cfg.task = Task::mean;
  EstimateResult fit = run_stratified(d, cfg, SeededRng(15, 1));
  const double plain = d.x.colwise().mean().norm();
  CHECK(plain > 2.0);          // the plain mean is dragged far off zero
  CHECK(fit.theta.norm() < 0.5);
  CHECK(fit.theta.norm() < plain / 4.0);
}

TEST_CASE("run_stratified: regression task recovers a noiseless model") {
  SeededRng gen(18, 933);
  Dataset d;
  d.x.resize(240, 3);
  for (Index i = 0; i < 240; ++i)
    for (Index j = 0; j < 3; ++j) d.x(i, j) = gen.next_normal();
  Vector beta(3);
  beta << 1.5, -2.0, 0.5;
  d.y = d.x * beta;
  StratConfig cfg;
  cfg.m = 240;
  cfg.K = 3;
  cfg.task = Task::regression;
  cfg.mom.n_blocks = 2;
  EstimateResult fit = run_stratified(d, cfg, SeededRng(18, 1));
  CHECK((fit.theta - beta).norm() < 1e-4);  // 1e-6 block ridge leaves a tiny bias
}

TEST_CASE("run_stratified: zero-allocation strata are skipped with warnings") {
  SeededRng gen(20, 934);
  Dataset d;
  d.x.resize(50, 2);
  for (Index i = 0; i < 50; ++i)
    for (Index j = 0; j < 2; ++j) d.x(i, j) = gen.next_normal();
  StratConfig cfg;
  cfg.m = 3;
  cfg.K = 5;  // quotas 0.6 each: three strata get one point, two get none
  cfg.task = Task::mean;
  EstimateResult fit = run_stratified(d, cfg, SeededRng(20, 1));
  CHECK(fit.warnings.size() == 2);
  for (const auto& w : fit.warnings)
    CHECK(w.find("allocation 0") != std::string::npos);
}

TEST_CASE("run_stratified: strata smaller than the block count are skipped") {
  SeededRng gen(22, 935);
  Dataset d;
  d.x.resize(30, 2);
  for (Index i = 0; i < 30; ++i)
    for (Index j = 0; j < 2; ++j) d.x(i, j) = gen.next_normal();
  StratConfig cfg;
  cfg.K = 3;
  cfg.m = 7;  // allocations (3, 2, 2)
  cfg.task = Task::mean;
  cfg.mom.n_blocks = 3;
  EstimateResult fit = run_stratified(d, cfg, SeededRng(22, 1));
  CHECK(fit.warnings.size() == 2);
  for (const auto& w : fit.warnings)
    CHECK(w.find("3 blocks") != std::string::npos);

  // and when every stratum falls short the run fails outright
  cfg.mom.n_blocks = 8;
  CHECK_THROWS_AS((void)run_stratified(d, cfg, SeededRng(22, 2)),
                  EstimationError);
}

TEST_CASE("run_stratified input validation") {
  SeededRng gen(25, 936);
  Dataset d;
  d.x.resize(20, 2);
  for (Index i = 0; i < 20; ++i)
    for (Index j = 0; j < 2; ++j) d.x(i, j) = gen.next_normal();
  StratConfig cfg;
  cfg.m = 0;
  CHECK_THROWS_AS((void)run_stratified(d, cfg, SeededRng(25, 1)),
                  std::invalid_argument);
  cfg.m = 21;
  CHECK_THROWS_AS((void)run_stratified(d, cfg, SeededRng(25, 1)),
                  std::invalid_argument);
  cfg.m = 10;
  cfg.K = 0;
  CHECK_THROWS_AS((void)run_stratified(d, cfg, SeededRng(25, 1)),
                  std::invalid_argument);
  cfg.K = 21;
  CHECK_THROWS_AS((void)run_stratified(d, cfg, SeededRng(25, 1)),
                  std::invalid_argument);
  cfg.K = 2;
  cfg.task = Task::regression;
  CHECK_THROWS_AS((void)run_stratified(d, cfg, SeededRng(25, 1)),
                  std::invalid_argument);  // no y
}

TEST_CASE("run_stratified reports when the aggregation step is cut short") {
  EnvironmentSpec env;
  env.n = 300;
  env.p = 3;
  env.s = 1;
  env.noise = NoiseSpec::parse("pareto:2.5");
  Dataset d = gen_location(env, SeededRng(28, 0));
  StratConfig cfg;
  cfg.m = 120;
  cfg.K = 4;
  cfg.gm_max_iter = 1;  // force the aggregation to stop early
  EstimateResult fit = run_stratified(d, cfg, SeededRng(28, 1));
  REQUIRE(!fit.warnings.empty());
  CHECK(fit.warnings.back().find("max_iter") != std::string::npos);
}
