#include <doctest.h>

#include <cmath>
#include <map>

#include "ppmx/cohesion.hpp"
#include "ppmx/mathutil.hpp"
#include "test_support.hpp"

using namespace ppmx;
using namespace ppmx::testing;

TEST_CASE("log_cohesion rising factorial") {
  CHECK(log_cohesion(1, 0.3) == 0.0);
  CHECK(log_cohesion(1, 0.0) == 0.0);
  CHECK(log_cohesion(4, 0.0) == doctest::Approx(std::log(6.0)).epsilon(1e-14));
  CHECK(log_cohesion(3, 0.3) == doctest::Approx(std::log(0.7 * 1.7)).epsilon(1e-14));
  CHECK_THROWS(log_cohesion(3, 1.0));
  CHECK_THROWS(log_cohesion(0, 0.3));
}

TEST_CASE("cohesion add ratio consistent with differences") {
  CHECK(log_cohesion_add_ratio(3, 0.0) == doctest::Approx(std::log(3.0)));
  CHECK(log_cohesion_add_ratio(1, 0.5) == doctest::Approx(std::log(0.5)));
  Rng rng(4);
  for (int rep = 0; rep < 100; ++rep) {
    int nj = 1 + rng.uniform_int(30);
    double sigma = rng.uniform() * 0.95;
    CHECK(log_cohesion_add_ratio(nj, sigma) ==
          doctest::Approx(log_cohesion(nj + 1, sigma) - log_cohesion(nj, sigma)).epsilon(1e-14));
  }
}

TEST_CASE("dp_log_v basics and exhaustive eppf normalization at sigma=0") {
  CHECK(dp_log_v(1, 1, 2.7) == doctest::Approx(0.0).epsilon(1e-14));
  CHECK(dp_log_v(2, 1, 1.0) == doctest::Approx(std::log(0.5)).epsilon(1e-14));
  // sum of exp(eppf) over the 15 partitions of {1..4}, kappa = 2
  LogVTable table;
  double total = 0.0;
  auto parts = all_partitions(4);
  CHECK(parts.size() == 15);
  for (const auto& p : parts) {
    auto sizes = partition_sizes(p);
    total += std::exp(eppf_logprob(sizes, 2.0, 0.0, table));
  }
  CHECK(total == doctest::Approx(1.0).epsilon(1e-12));
}

TEST_CASE("log_v quadrature: V(1,1)=1, recursion oracle, DP limit") {
  CHECK(log_v_quadrature(1, 1, 2.0, 0.3) == doctest::Approx(0.0).epsilon(1e-10));
  CHECK(log_v_quadrature(1, 1, 0.7353, 0.7353) == doctest::Approx(0.0).epsilon(1e-10));

  // triangular recursion V(n,C) = V(n+1,C)(n - sigma C) + V(n+1,C+1)
  double lhs = log_v_quadrature(5, 2, 1.0, 0.2);
  double rhs = log_add_exp(log_v_quadrature(6, 2, 1.0, 0.2) + std::log(5.0 - 0.2 * 2),
                           log_v_quadrature(6, 3, 1.0, 0.2));
  CHECK(std::abs(std::expm1(rhs - lhs)) < 1e-8);

  CHECK(log_v_quadrature(5, 2, 1.7, 1e-8) == doctest::Approx(dp_log_v(5, 2, 1.7)).epsilon(1e-6));
  CHECK_THROWS(log_v_quadrature(5, 6, 1.0, 0.2));
  CHECK_THROWS(log_v_quadrature(5, 2, 1.0, 1.0));
}

TEST_CASE("eppf: singleton, exhaustive normalization, relabel invariance") {
  LogVTable table;
  std::vector<int> single{1};
  CHECK(eppf_logprob(single, 1.3, 0.4, table) == doctest::Approx(0.0).epsilon(1e-10));

  auto parts = all_partitions(5);
  CHECK(parts.size() == 52);
  double total = 0.0;
  for (const auto& p : parts) total += std::exp(eppf_logprob(partition_sizes(p), 1.0, 0.3, table));
  CHECK(total == doctest::Approx(1.0).epsilon(1e-6));

  // depends on sizes only
  std::vector<int> a{3, 1, 2}, b{2, 3, 1};
  CHECK(eppf_logprob(a, 0.8, 0.25, table) == eppf_logprob(b, 0.8, 0.25, table));
}

TEST_CASE("grid_update degenerate and uniform cases") {
  LogVTable table;
  Rng rng(8);
  NGGPGrid one;
  one.kappa = {2.0};
  one.sigma = {0.3};
  one.log_prior = {0.0};
  std::vector<int> sizes{2, 1};
  for (int rep = 0; rep < 10; ++rep) CHECK(grid_update(sizes, one, table, rng) == 0);

  // flat likelihood (n = 1) + uniform prior -> uniform over the grid
  NGGPGrid grid = NGGPGrid::make_default(3, 3, 6.0, 0.6);
  for (auto& w : grid.log_prior) w = std::log(1.0 / 9);
  std::vector<int> single{1};
  std::vector<int> counts(9, 0);
  const int draws = 18000;
  for (int s = 0; s < draws; ++s) ++counts[grid_update(single, grid, table, rng)];
  for (int gidx = 0; gidx < 9; ++gidx) {
    double p = 1.0 / 9, se = std::sqrt(p * (1 - p) / draws);
    CHECK(std::abs(double(counts[gidx]) / draws - p) < 3.5 * se);
  }
}

TEST_CASE("grid_update: singleton partitions pull sigma upward") {
  LogVTable table;
  Rng rng(9);
  NGGPGrid grid = NGGPGrid::make_default();
  std::vector<int> singletons(12, 1);
  std::vector<int> one_cluster{12};
  double mean_sig_singletons = 0, mean_sig_one = 0;
  const int draws = 10000;
  for (int s = 0; s < draws; ++s) {
    mean_sig_singletons += grid.sigma[grid_update(singletons, grid, table, rng)];
    mean_sig_one += grid.sigma[grid_update(one_cluster, grid, table, rng)];
  }
  CHECK(mean_sig_singletons / draws > mean_sig_one / draws);
}

TEST_CASE("prior partition sampler: n=1 and DP mean cluster count") {
  LogVTable table;
  Rng rng(10);
  auto lab1 = sample_prior_partition(1, 2.0, 0.3, table, rng);
  CHECK(lab1 == std::vector<int>{0});

  const int reps = 10000;
  double mean_c = 0;
  for (int r = 0; r < reps; ++r) {
    auto lab = sample_prior_partition(50, 19.2333, 0.0, table, rng);
    mean_c += 1 + *std::max_element(lab.begin(), lab.end());
  }
  mean_c /= reps;
  CHECK(std::abs(mean_c - 25.0) < 0.5);
}

TEST_CASE("prior partition sampler: NGGP mean count and singleton share") {
  LogVTable table;
  Rng rng(12);
  const int reps = 10000;
  double mean_c = 0, share_units = 0;
  for (int r = 0; r < reps; ++r) {
    auto lab = sample_prior_partition(50, 0.7353, 0.7353, table, rng);
    auto sizes = partition_sizes(lab);
    int m1 = 0;
    for (int s : sizes) m1 += (s == 1);
    mean_c += sizes.size();
    share_units += m1 / 50.0;
  }
  mean_c /= reps;
  share_units /= reps;
  CHECK(std::abs(mean_c - 26.25) / 26.25 < 0.10);
  CHECK(std::abs(share_units - 0.3445) / 0.3445 < 0.10);
}

TEST_CASE("DP sequential sampler matches the exact CRP cluster-count law") {
  // Stirling-number oracle: P(C_n = k) = |s(n,k)| kappa^k Gamma(kappa)/Gamma(kappa+n)
  const int n = 10;
  const double kappa = 1.5;
  std::vector<std::vector<double>> stirling(n + 1, std::vector<double>(n + 1, 0.0));
  stirling[0][0] = 1.0;
  for (int m = 1; m <= n; ++m)
    for (int k = 1; k <= m; ++k)
      stirling[m][k] = stirling[m - 1][k - 1] + (m - 1) * stirling[m - 1][k];
  std::vector<double> pmf(n + 1, 0.0);
  for (int k = 1; k <= n; ++k)
    pmf[k] = stirling[n][k] * std::pow(kappa, k) *
             std::exp(std::lgamma(kappa) - std::lgamma(kappa + n));

  LogVTable table;
  Rng rng(14);
  const int reps = 20000;
  std::vector<int> counts(n + 1, 0);
  for (int r = 0; r < reps; ++r) {
    auto lab = sample_prior_partition(n, kappa, 0.0, table, rng);
    ++counts[1 + *std::max_element(lab.begin(), lab.end())];
  }
  // chi-square over bins with expected count >= 5
  double stat = 0;
  int df = -1;
  double spill_obs = 0, spill_exp = 0;
  for (int k = 1; k <= n; ++k) {
    double expd = pmf[k] * reps;
    if (expd >= 5.0) {
      stat += (counts[k] - expd) * (counts[k] - expd) / expd;
      ++df;
    } else {
      spill_obs += counts[k];
      spill_exp += expd;
    }
  }
  if (spill_exp > 0) {
    stat += (spill_obs - spill_exp) * (spill_obs - spill_exp) / spill_exp;
    ++df;
  }
  CHECK(stat < chisq_criterion(df));
}

TEST_CASE("prior mean cluster count nondecreasing in kappa") {
  LogVTable table;
  Rng rng(15);
  double prev = 0.0;
  for (double kappa : {0.5, 2.0, 8.0}) {
    double mean_c = 0;
    const int reps = 3000;
    for (int r = 0; r < reps; ++r) {
      auto lab = sample_prior_partition(50, kappa, 0.3, table, rng);
      mean_c += 1 + *std::max_element(lab.begin(), lab.end());
    }
    mean_c /= reps;
    CHECK(mean_c > prev - 0.3);
    prev = mean_c;
  }
}

TEST_CASE("default grid discretizes the stated marginals") {
  NGGPGrid g = NGGPGrid::make_default();
  CHECK(g.size() == 100);
  double total = 0;
  for (double lp : g.log_prior) total += std::exp(lp);
  CHECK(total == doctest::Approx(1.0).epsilon(1e-12));
  CHECK(g.kappa[0] == doctest::Approx(0.75));
  CHECK(g.sigma[0] == doctest::Approx(0.03));
  CHECK(*std::max_element(g.kappa.begin(), g.kappa.end()) == doctest::Approx(14.25));
  CHECK(*std::max_element(g.sigma.begin(), g.sigma.end()) == doctest::Approx(0.57));
  NGGPGrid ppm = NGGPGrid::make_ppm();
  CHECK(ppm.size() == 10);
  for (double s : ppm.sigma) CHECK(s == 0.0);
}

TEST_CASE("logV table reproducible and concurrent-read safe") {
  LogVTable t1, t2;
  double a = t1.log_v(20, 5, 2.25, 0.33);
  double b = t1.log_v(20, 5, 2.25, 0.33);  // cached
  double c = t2.log_v(20, 5, 2.25, 0.33);  // fresh instance
  CHECK(a == b);
  CHECK(a == c);
#pragma omp parallel for
  for (int i = 0; i < 64; ++i) {
    double v = t1.log_v(30, 1 + i % 10, 0.75, 0.21);
    CHECK(std::isfinite(v));
  }
}
