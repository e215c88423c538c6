#pragma once

#include <vector>

#include "ppmx/types.hpp"

namespace ppmx {

struct NIGParams {
  double m0 = 0.0;
  double k0 = 1.0;
  double v0 = 1.0;  // shape
  double n0 = 2.0;  // scale
};

struct BetaBernoulliParams {
  double a0 = 1.0;
  double b0 = 1.0;
};

// Sufficient statistics of one cluster's covariates: per covariate a count,
// sum and sum of squares; updatable by single-element add/remove.
struct ClusterStats {
  int count = 0;
  Vector sum;
  Vector sumsq;

  explicit ClusterStats(int q = 0) : sum(Vector::Zero(q)), sumsq(Vector::Zero(q)) {}
  void add(const Vector& x);
  void remove(const Vector& x);
};

struct SimilarityParams {
  bool enabled = true;
  bool calibrate = true;  // raise g to 1/sqrt(Q)
  NIGParams nig;
  // opt-in Bernoulli-Beta similarity for 0/1 covariates; empty = all Gaussian
  std::vector<char> binary_mask;
  BetaBernoulliParams bb;
};

// Closed-form log marginal of one covariate's data under a Normal likelihood
// with NIG(m0, k0, v0, n0) prior.  count = 0 gives 0.
double nig_log_marginal(double count, double sum, double sumsq, const NIGParams& nig);

double beta_bernoulli_log_marginal(double count, double sum, const BetaBernoulliParams& bb);

// Eq-style "double dipper": per covariate, the marginal of the cluster data
// under its own posterior; summed over covariates (uncalibrated).
double double_dipper_log_similarity(const ClusterStats& stats, const SimilarityParams& sim);

// double_dipper / sqrt(Q)
double calibrated_log_similarity(const ClusterStats& stats, const SimilarityParams& sim, int q);

// Cluster score under the configured calibration flag.
double cluster_log_similarity(const ClusterStats& stats, const SimilarityParams& sim);

// log g(stats + {x}) - log g(stats), computed from sufficient statistics
// without mutating stats.  cached_log_g, when finite, skips one evaluation.
double log_similarity_add_ratio(const ClusterStats& stats, const Vector& x,
                                const SimilarityParams& sim,
                                double cached_log_g = std::numeric_limits<double>::quiet_NaN());

// log g({x}) for a singleton cluster
double singleton_log_similarity(const Vector& x, const SimilarityParams& sim);

}  // namespace ppmx
