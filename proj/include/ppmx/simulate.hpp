#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "ppmx/rng.hpp"
#include "ppmx/types.hpp"

namespace ppmx {

// Continuation-ratio generator coefficients.  alpha/phi are per arm with one
// entry per logit level (levels 2..K); iota/chi are level-indexed and shared
// across arms, chi rows are P-vectors.
struct CrCoefficients {
  std::vector<Vector> alpha;
  std::vector<Vector> phi;
  Vector iota;
  Matrix chi;

  static CrCoefficients defaults();  // T=2, K=3, P=2
};

struct ScenarioSpec {
  std::string id = "s1";  // prior-sim | s1 | s2 | s3 | cr-logistic
  int n = 200;
  int q = 4;
  int p = 2;
  int k = 3;
  int t = 2;
  int n_train = 170;
  int n_test = 30;
  double overlap = 1.0;  // train/test overlap of response-generating covariates
  Vector omega;
  std::uint64_t seed = 1;
  CrCoefficients coeffs = CrCoefficients::defaults();

  static ScenarioSpec preset(const std::string& id);
  void validate() const;
};

struct PatientTruth {
  std::string id;
  bool is_test = false;
  int received_arm = 1;  // 1-based
  int y = 1;
  Matrix orp;   // T x K true ordinal response probabilities
  Vector mtu;   // per-arm true utility omega . orp
  int optimal_arm = 1;
  bool tie = false;
  int true_block = -1;  // 0-based block id, -1 when the scenario has none
};

struct GeneratedDataset {
  CohortData train;
  CohortData test;
  std::vector<PatientTruth> truth;  // train patients first, then test
};

// Supplement-style covariate generators
Matrix gen_prior_sim_covariates(int n, Rng& rng);
std::pair<Matrix, std::vector<int>> gen_s1_covariates(Rng& rng);
Matrix gen_s2_s3_covariates(int n, int q, Rng& rng);

// K-1 continuation-ratio logits (levels 2..K) -> K category probabilities
Vector continuation_ratio_probs(const Vector& logits);

// utility-weighted pointwise product of the two continuation-ratio models,
// normalized over levels
Vector ordinal_response_probs(const Vector& omega, const Vector& p_pred, const Vector& p_prog);

// principal-component summary used by the response generator:
// standardized (PC1 + PC2)/sqrt(2), loadings fitted on fit_rows
Vector psi_summary(const Matrix& fit_rows, const Matrix& apply_rows);

GeneratedDataset generate_scenario(const ScenarioSpec& spec);

}  // namespace ppmx
