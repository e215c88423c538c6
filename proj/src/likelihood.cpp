#include "ppmx/likelihood.hpp"

#include <cmath>
#include <stdexcept>

#include "ppmx/mathutil.hpp"

namespace ppmx {

Vector log_linear_gamma_log(const Vector& eta, const Matrix& beta, const Vector& z,
                            double cap, WarningCounters* warn) {
  const int k = static_cast<int>(eta.size());
  Vector lg(k);
  for (int j = 0; j < k; ++j) {
    double v = eta(j);
    if (beta.size() > 0) v += beta.col(j).dot(z);
    if (v > cap || v < -cap) {
      v = v > cap ? cap : -cap;
      if (warn) ++warn->exp_cap_hits;
    }
    lg(j) = v;
  }
  return lg;
}

Vector log_linear_gamma(const Vector& eta, const Matrix& beta, const Vector& z,
                        double cap, WarningCounters* warn) {
  return log_linear_gamma_log(eta, beta, z, cap, warn).array().exp();
}

double marginal_response_logpmf(int y, const Vector& gamma) {
  return marginal_response_logpmf_log(y, gamma.array().log());
}

double marginal_response_logpmf_log(int y, const Vector& log_gamma) {
  if (y < 1 || y > log_gamma.size())
    throw std::invalid_argument("marginal_response_logpmf: response out of range");
  return log_gamma(y - 1) -
         log_sum_exp(std::span<const double>(log_gamma.data(), log_gamma.size()));
}

double augmented_loglik_unit(int y, const Vector& d, double u, const Vector& gamma) {
  const int k = static_cast<int>(d.size());
  if (y < 1 || y > k) throw std::invalid_argument("augmented_loglik_unit: response out of range");
  double ll = 0.0;
  for (int j = 0; j < k; ++j) {
    if (d(j) <= 0.0) return neg_inf;
    ll += (gamma(j) - 1.0) * std::log(d(j)) - d(j) * (u + 1.0) - std::lgamma(gamma(j));
  }
  return ll + std::log(d(y - 1));
}

double gamma_kernel_loglik(const Vector& log_d, const Vector& log_gamma) {
  double ll = 0.0;
  for (int j = 0; j < log_d.size(); ++j) {
    double g = std::exp(log_gamma(j));
    ll += (g - 1.0) * log_d(j) - std::lgamma(g);
  }
  return ll;
}

Vector sample_d(int y, const Vector& gamma, double u, Rng& rng) {
  return sample_log_d(y, gamma.array().log(), u, rng).array().exp();
}

Vector sample_log_d(int y, const Vector& log_gamma, double u, Rng& rng) {
  const int k = static_cast<int>(log_gamma.size());
  Vector log_d(k);
  const double log_scale = -std::log1p(u);
  for (int j = 0; j < k; ++j) {
    double shape = std::exp(log_gamma(j)) + (j == y - 1 ? 1.0 : 0.0);
    log_d(j) = rng.log_gamma_draw(shape) + log_scale;
  }
  return log_d;
}

double sample_u(double d_total, Rng& rng) {
  if (!(d_total > 0.0)) throw std::invalid_argument("sample_u: D must be positive");
  return rng.exponential(1.0 / d_total);
}

}  // namespace ppmx
