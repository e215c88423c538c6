#pragma once

#include <span>
#include <string>
#include <vector>

#include "ppmx/engine.hpp"

namespace ppmx {

struct PredictionConfig {
  UtilityWeights omega;
  bool median_of_utility = false;  // median of omega.pi instead of per-level medians
  std::uint64_t seed = 12345;
  int m_slots = 5;
  bool v_ratio = true;
  SimilarityParams sim;
  double exp_cap = 50.0;
};

struct PatientPrediction {
  std::string id;
  Vector phi;           // per-arm median predictive utility
  int recommended = 1;  // 1-based, ties broken toward the lowest arm
  bool tie = false;
  Matrix median_probs;  // T x K per-level medians of the predictive probabilities
};

// Normalized assignment probabilities for a new patient over C existing
// clusters plus m_slots empty ones, given one kept draw's partition.
std::vector<double> predictive_cluster_weights(const Vector& x_new_std,
                                               std::span<const int> sizes,
                                               const std::vector<ClusterStats>& cstats,
                                               const std::vector<double>& log_g, double kappa,
                                               double sigma, int n_train,
                                               const SimilarityParams& sim, int m_slots,
                                               bool v_ratio, LogVTable& table);

// One posterior-predictive probability vector: sample a cluster from the
// weights, draw a fresh effect from G0 = N(theta, lambda^-1) if an empty slot
// is chosen, then draw pi ~ Dirichlet(gamma(eta, beta, z_new)).
Vector sample_predictive_response(const Matrix& eta, const Vector& theta, const Matrix& lambda,
                                  std::span<const double> weights, const Matrix& beta,
                                  const Vector& z_new, double exp_cap, Rng& rng);

// Coordinate-wise medians across draws dotted with omega (or the median of
// per-draw utilities when median_of_utility).
double median_predictive_utility(const Matrix& pi_draws, const Vector& omega,
                                 bool median_of_utility);
Vector median_probabilities(const Matrix& pi_draws);

// argmax with lowest-index tie break; tie flag reports exact ties
std::pair<int, bool> select_treatment(const Vector& utilities);

std::vector<PatientPrediction> predict_patients(const TraceStore& trace, const Matrix& z_new,
                                                const Matrix& x_new,
                                                const std::vector<std::string>& ids,
                                                const PredictionConfig& cfg);
std::vector<PatientPrediction> predict_patients_serial(const TraceStore& trace,
                                                       const Matrix& z_new, const Matrix& x_new,
                                                       const std::vector<std::string>& ids,
                                                       const PredictionConfig& cfg);

}  // namespace ppmx
