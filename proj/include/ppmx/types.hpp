#pragma once

#include <string>
#include <vector>

#include <Eigen/Dense>

namespace ppmx {

using Matrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;

// One treatment arm: categorical responses with prognostic (Z) and
// predictive (X) covariate matrices.
struct ArmData {
  std::vector<std::string> ids;
  std::vector<int> y;  // levels 1..K
  Matrix z;            // n x P
  Matrix x;            // n x Q
  int n() const { return static_cast<int>(y.size()); }
};

struct CohortData {
  int K = 0;
  int P = 0;
  int Q = 0;
  std::vector<ArmData> arms;

  int arm_count() const { return static_cast<int>(arms.size()); }
  int total_n() const;

  // Throws std::invalid_argument with a diagnostic on any violated invariant:
  // response levels in 1..K, consistent P/Q across arms, finite values.
  void validate() const;
};

struct UtilityWeights {
  Vector omega;  // length K, nondecreasing, omega[0]=0, omega[K-1]=100 by convention
  void validate(int k) const;
};

// Per-covariate standardization fitted on a training arm.
struct Standardizer {
  Vector mean;
  Vector sd;
  static Standardizer fit(const Matrix& x);
  Matrix apply(const Matrix& x) const;
  Vector apply_row(const Vector& x) const;
};

// Cluster labels for one arm.  Labels are 0-based and gapless internally;
// serialized 1-based.
struct PartitionState {
  std::vector<int> labels;          // length n, values 0..C-1
  std::vector<int> sizes;           // length C
  std::vector<Vector> eta;          // C cluster effects, each length K
  std::vector<Vector> standby;      // M standby effects for the reuse strategy

  int n_clusters() const { return static_cast<int>(sizes.size()); }
  // Throws on gaps, size mismatches, or inconsistent bookkeeping.
  void audit(int n, int k) const;
};

struct WarningCounters {
  long long exp_cap_hits = 0;
  long long scale_jitter = 0;
  long long esm_empty_terms = 0;
};

}  // namespace ppmx
