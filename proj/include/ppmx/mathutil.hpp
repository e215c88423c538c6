#pragma once

#include <cmath>
#include <span>
#include <vector>

namespace ppmx {

constexpr double neg_inf = -std::numeric_limits<double>::infinity();

// log(1 + e^x) without overflow
inline double softplus(double x) {
  if (x > 35.0) return x + std::exp(-x);
  if (x < -35.0) return std::exp(x);
  return std::log1p(std::exp(x));
}

inline double log_add_exp(double a, double b) {
  if (a == neg_inf) return b;
  if (b == neg_inf) return a;
  double m = std::max(a, b);
  return m + std::log(std::exp(a - m) + std::exp(b - m));
}

double log_sum_exp(std::span<const double> v);

// in-place: log-weights -> normalized probabilities
void normalize_log_weights(std::span<double> logw);

// CDF of Gamma(shape=2, rate=1)
inline double gamma21_cdf(double x) {
  if (x <= 0.0) return 0.0;
  return -std::expm1(-x) - x * std::exp(-x);
}

// Regularized incomplete beta I_x(a,b) for integer a,b via the binomial tail
// P(Bin(a+b-1, x) >= a).
double beta_cdf_int(double x, int a, int b);

// Sample mean / variance (unbiased) of a sequence
struct MeanVar {
  double mean = 0.0;
  double var = 0.0;
  long long n = 0;
};
MeanVar mean_var(std::span<const double> v);

// Spectral-free standard error of an autocorrelated chain via batch means.
double batch_means_se(std::span<const double> chain, int n_batches = 50);

}  // namespace ppmx
