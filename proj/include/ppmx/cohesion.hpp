#pragma once

#include <optional>
#include <shared_mutex>
#include <span>
#include <unordered_map>

#include "ppmx/rng.hpp"
#include "ppmx/similarity.hpp"
#include "ppmx/types.hpp"

namespace ppmx {

// log (1-sigma)_(n_j - 1), the rising-factorial cohesion of a cluster of size n_j
double log_cohesion(int n_j, double sigma);

// log rho(S u {i}) - log rho(S) = log(n_j - sigma)
double log_cohesion_add_ratio(int n_j, double sigma);

// Dirichlet-process normalizer: C log kappa + lgamma(kappa) - lgamma(kappa + n)
double dp_log_v(int n, int c, double kappa);

struct QuadratureSettings {
  int initial_nodes = 256;
  int max_doublings = 8;
  double rel_tol = 1e-9;
  double tail_drop = 60.0;  // integrand cut, in log units below the mode
  bool operator==(const QuadratureSettings&) const = default;
};

// Normalizing constant of the NGGP-induced partition distribution,
//   V(n,C) = kappa^C / Gamma(n) * int_0^inf u^(n-1)
//            exp{-(kappa/sigma)[(1+u)^sigma - 1]} (1+u)^(sigma C - n) du,
// evaluated by adaptive log-space trapezoid quadrature after u = e^w.
// sigma = 0 dispatches to the closed form dp_log_v.  Throws on
// non-convergence after max refinement.
double log_v_quadrature(int n, int c, double kappa, double sigma,
                        const QuadratureSettings& qs = QuadratureSettings());

// Cache of log V values keyed by (n, C, kappa, sigma).  Concurrent reads,
// exclusive-write insertion; values are reproducible bit-for-bit for fixed
// quadrature settings.
class LogVTable {
 public:
  explicit LogVTable(const QuadratureSettings& qs = QuadratureSettings()) : qs_(qs) {}

  double log_v(int n, int c, double kappa, double sigma);
  // log V(n, C+1) - log V(n, C): the factor on new-cluster weights
  double log_v_new_ratio(int n, int c, double kappa, double sigma);

  const QuadratureSettings& settings() const { return qs_; }

 private:
  struct Key {
    int n;
    int c;
    std::uint64_t kappa_bits;
    std::uint64_t sigma_bits;
    bool operator==(const Key&) const = default;
  };
  struct KeyHash {
    std::size_t operator()(const Key& k) const;
  };
  QuadratureSettings qs_;
  std::unordered_map<Key, double, KeyHash> cells_;
  std::shared_mutex mu_;
};

// Discrete (kappa, sigma) prior on a grid; marginal weights discretize
// Gamma(2,1) for kappa and Beta(5,23) for sigma via cell probabilities.
struct NGGPGrid {
  std::vector<double> kappa;
  std::vector<double> sigma;
  std::vector<double> log_prior;  // normalized

  int size() const { return static_cast<int>(kappa.size()); }

  static NGGPGrid make_default(int kappa_points = 10, int sigma_points = 10,
                               double kappa_max = 15.0, double sigma_max = 0.6);
  // sigma fixed at 0: the DP-cohesion "PPM mode" grid
  static NGGPGrid make_ppm(int kappa_points = 10, double kappa_max = 15.0);
};

// log p(partition | kappa, sigma) = log V(n, C) + sum_j log_cohesion(n_j)
double eppf_logprob(std::span<const int> sizes, double kappa, double sigma, LogVTable& table);

// Draw a grid index with probability prop. to prior weight * exp(eppf)
int grid_update(std::span<const int> sizes, const NGGPGrid& grid, LogVTable& table, Rng& rng);

// Sequential draw from the partition prior via the predictive weights.
// With covariates, weights carry the (calibrated) similarity ratios.
std::vector<int> sample_prior_partition(int n, double kappa, double sigma, LogVTable& table,
                                        Rng& rng, const Matrix* x = nullptr,
                                        const SimilarityParams* sim = nullptr);

// One Gibbs scan targeting the exact product measure
// p(P) prop. V(n,C) prod_j rho(n_j) g(x*_j); labels/sizes updated in place.
void gibbs_scan_partition(std::vector<int>& labels, std::vector<int>& sizes, const Matrix& x,
                          double kappa, double sigma, const SimilarityParams& sim,
                          LogVTable& table, Rng& rng);

}  // namespace ppmx
