#include "ppmx/mathutil.hpp"

#include <algorithm>
#include <stdexcept>

namespace ppmx {

double log_sum_exp(std::span<const double> v) {
  if (v.empty()) return neg_inf;
  double m = *std::max_element(v.begin(), v.end());
  if (m == neg_inf) return neg_inf;
  double s = 0.0;
  for (double x : v) s += std::exp(x - m);
  return m + std::log(s);
}

void normalize_log_weights(std::span<double> logw) {
  double lse = log_sum_exp(logw);
  for (double& x : logw) x = std::exp(x - lse);
}

double beta_cdf_int(double x, int a, int b) {
  if (x <= 0.0) return 0.0;
  if (x >= 1.0) return 1.0;
  const int n = a + b - 1;
  // P(Bin(n, x) >= a), accumulated in log space per term
  double cdf = 0.0;
  for (int j = a; j <= n; ++j) {
    double lt = std::lgamma(n + 1.0) - std::lgamma(j + 1.0) - std::lgamma(n - j + 1.0) +
                j * std::log(x) + (n - j) * std::log1p(-x);
    cdf += std::exp(lt);
  }
  return std::min(cdf, 1.0);
}

MeanVar mean_var(std::span<const double> v) {
  MeanVar mv;
  mv.n = static_cast<long long>(v.size());
  if (mv.n == 0) return mv;
  double s = 0.0;
  for (double x : v) s += x;
  mv.mean = s / mv.n;
  if (mv.n > 1) {
    double ss = 0.0;
    for (double x : v) ss += (x - mv.mean) * (x - mv.mean);
    mv.var = ss / (mv.n - 1);
  }
  return mv;
}

double batch_means_se(std::span<const double> chain, int n_batches) {
  const long long n = static_cast<long long>(chain.size());
  if (n < 2 * n_batches) throw std::invalid_argument("batch_means_se: chain too short");
  const long long bsize = n / n_batches;
  std::vector<double> bm(n_batches);
  for (int b = 0; b < n_batches; ++b) {
    double s = 0.0;
    for (long long i = b * bsize; i < (b + 1) * bsize; ++i) s += chain[i];
    bm[b] = s / bsize;
  }
  MeanVar mv = mean_var(bm);
  return std::sqrt(mv.var / n_batches);
}

}  // namespace ppmx
