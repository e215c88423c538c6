#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "ppmx/cohesion.hpp"
#include "ppmx/likelihood.hpp"
#include "ppmx/similarity.hpp"
#include "ppmx/types.hpp"

namespace ppmx {

struct GridConfig {
  int kappa_points = 10;
  int sigma_points = 10;
  double kappa_max = 15.0;
  double sigma_max = 0.6;
};

struct Hyperparams {
  double mu0 = 0.0;          // mean vector is mu0 * ones
  double nu0 = 10.0;
  double s0 = -1.0;          // Wishart shape; resolved to K+2 when negative
  double lambda0_diag = 10.0;  // Wishart rate matrix diagonal
  double exp_cap = 50.0;     // clamp on |log gamma|
};

struct MCMCConfig {
  int iterations = 12000;
  int burnin = 2000;
  int thinning = 5;
  int m_standby = 5;
  int chains = 1;
  std::uint64_t seed = 0;
  double eta_proposal_scale = 0.5;
  double beta_proposal_scale = 0.5;
  bool adapt = true;
  double adapt_target = 0.30;
  bool v_ratio = true;     // multiply new-cluster weights by V(n,C+1)/V(n,C)
  bool ppm_mode = false;   // sigma fixed at 0, similarity off
  bool standardize_x = true;
  bool median_of_utility = false;  // prediction-side flag, echoed in traces
  SimilarityParams sim;
  GridConfig grid;
  Hyperparams hyper;
  QuadratureSettings quadrature;
  bool ablate_likelihood = false;  // test hook: flat likelihood in partition weights

  void validate() const;
  SimilarityParams effective_sim() const;
};

struct AcceptanceStats {
  long long eta_proposed = 0, eta_accepted = 0;
  long long beta_proposed = 0, beta_accepted = 0;
  double eta_rate() const { return eta_proposed ? double(eta_accepted) / eta_proposed : 0.0; }
  double beta_rate() const { return beta_proposed ? double(beta_accepted) / beta_proposed : 0.0; }
};

struct ArmState {
  PartitionState part;
  std::vector<ClusterStats> cstats;
  std::vector<double> log_g;  // cached per-cluster calibrated log similarity
  Vector theta;
  Matrix lambda;  // K x K precision of G0
  int grid_index = 0;
  Matrix log_d;   // n x K
  Vector u;       // n
  Matrix zbeta;   // n x K cache of Z * beta
  Matrix x_std;   // standardized predictive covariates
  double eta_scale = 0.5;
  long long eta_adapt_t = 0;
  AcceptanceStats accept;
};

struct ChainState {
  int K = 0, P = 0, Q = 0, T = 0;
  std::vector<ArmState> arms;
  Matrix beta;        // P x K
  Matrix lambda_hs;   // P x K
  Vector tau;         // K
  Matrix beta_scale;  // P x K proposal scales
  std::vector<long long> beta_adapt_t;  // per (p,k), flattened
  Vector mu0;
  Matrix lambda0;     // Wishart rate matrix
  double s0 = 0.0;
  double nu0 = 10.0;
  AcceptanceStats accept_beta;
  WarningCounters warnings;

  // log gamma for one unit at a candidate effect vector
  Vector unit_log_gamma(int arm, int i, const Vector& eta, double cap);
};

struct ArmTraceDraw {
  std::vector<int> labels;  // 0-based gapless
  Matrix eta;               // C x K
  Vector theta;
  Matrix lambda;
  double kappa = 0.0, sigma = 0.0;
};

struct TraceStore {
  int K = 0, P = 0, Q = 0, T = 0;
  std::vector<std::vector<std::string>> ids;           // per arm
  std::vector<std::vector<ArmTraceDraw>> arms;         // [arm][kept]
  std::vector<Matrix> beta;                            // kept, each P x K
  std::vector<Matrix> lambda_hs;
  std::vector<Vector> tau;
  Matrix loglik;                                       // kept x total_n (arm-major units)
  std::vector<Standardizer> x_standardizers;           // per arm
  std::vector<Matrix> x_train_std;                     // per arm, standardized training X
  bool standardized = true;
  std::vector<AcceptanceStats> accept_arm;
  AcceptanceStats accept_beta;
  WarningCounters warnings;
  std::uint64_t seed = 0;

  int kept() const { return static_cast<int>(beta.size()); }
};

NGGPGrid make_grid(const MCMCConfig& cfg);
std::uint64_t derive_chain_seed(std::uint64_t master, int chain_index);

ChainState init_chain(const CohortData& data, const MCMCConfig& cfg, const NGGPGrid& grid,
                      Rng& rng);
// recompute zbeta / cluster stats / cached similarities from labels and beta
void rebuild_caches(ChainState& state, const MCMCConfig& cfg);

void update_partition(ChainState& state, int arm, const CohortData& data, const MCMCConfig& cfg,
                      const NGGPGrid& grid, LogVTable& table, Rng& rng);
void update_eta(ChainState& state, int arm, const MCMCConfig& cfg, Rng& rng, bool adapt_now);
void update_theta_lambda(ChainState& state, int arm, Rng& rng);
void update_grid_point(ChainState& state, int arm, const NGGPGrid& grid, LogVTable& table,
                       Rng& rng);
void update_beta(ChainState& state, const CohortData& data, const MCMCConfig& cfg, Rng& rng,
                 bool adapt_now);
void update_horseshoe_scales(const Matrix& beta, Matrix& lambda_hs, Vector& tau, Rng& rng);
void update_latent_d(ChainState& state, int arm, const CohortData& data, const MCMCConfig& cfg,
                     Rng& rng);
void update_latent_u(ChainState& state, int arm, Rng& rng);

// one full iteration in the Algorithm-1 order
void sweep(ChainState& state, const CohortData& data, const MCMCConfig& cfg, const NGGPGrid& grid,
           LogVTable& table, std::vector<Rng>& arm_rngs, Rng& shared_rng, bool adapt_now);

TraceStore run_chain(const CohortData& data, const MCMCConfig& cfg);

// fit diagnostics over the pointwise log-likelihood matrix (kept x n)
double compute_lpml(const Matrix& loglik);
double compute_waic(const Matrix& loglik);
// PSRF per monitored scalar; input: per chain a (kept x m) matrix
std::vector<double> compute_psrf(const std::vector<Matrix>& chains);

}  // namespace ppmx
