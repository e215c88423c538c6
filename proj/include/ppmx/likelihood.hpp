#pragma once

#include "ppmx/rng.hpp"
#include "ppmx/types.hpp"

namespace ppmx {

// log gamma_k = eta_k + z . beta_k, clamped to +-cap.  Clamp hits are counted
// as numerical warnings, never errors.
Vector log_linear_gamma_log(const Vector& eta, const Matrix& beta, const Vector& z,
                            double cap = 50.0, WarningCounters* warn = nullptr);

// gamma_k = exp(eta_k + z . beta_k)
Vector log_linear_gamma(const Vector& eta, const Matrix& beta, const Vector& z,
                        double cap = 50.0, WarningCounters* warn = nullptr);

// log p(y | gamma) with the Dirichlet mixing marginalized out: log(gamma_y / sum_k gamma_k)
double marginal_response_logpmf(int y, const Vector& gamma);
double marginal_response_logpmf_log(int y, const Vector& log_gamma);

// log of d_y * prod_k d_k^(gamma_k - 1) exp(-d_k (u+1)) / Gamma(gamma_k)
double augmented_loglik_unit(int y, const Vector& d, double u, const Vector& gamma);

// candidate-dependent part of the augmented likelihood used by the cluster
// membership weights: sum_k (gamma_k - 1) log d_k - lgamma(gamma_k)
double gamma_kernel_loglik(const Vector& log_d, const Vector& log_gamma);

// d_k ~ Gamma(gamma_k + 1{k = y}, 1/(u+1))
Vector sample_d(int y, const Vector& gamma, double u, Rng& rng);
// same draw on the log scale (stable for tiny shapes)
Vector sample_log_d(int y, const Vector& log_gamma, double u, Rng& rng);

// u ~ Gamma(1, 1/D) = Exponential with mean 1/D
double sample_u(double d_total, Rng& rng);

}  // namespace ppmx
