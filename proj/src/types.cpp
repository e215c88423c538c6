#include "ppmx/types.hpp"

#include <cmath>
#include <stdexcept>

namespace ppmx {

namespace {
void fail(const std::string& msg) { throw std::invalid_argument(msg); }
}  // namespace

int CohortData::total_n() const {
  int n = 0;
  for (const auto& a : arms) n += a.n();
  return n;
}

void CohortData::validate() const {
  if (K < 2) fail("CohortData: K must be at least 2");
  if (arms.empty()) fail("CohortData: no arms");
  for (int a = 0; a < arm_count(); ++a) {
    const ArmData& arm = arms[a];
    const std::string tag = "arm " + std::to_string(a + 1);
    if (arm.n() == 0) fail("CohortData: " + tag + " is empty");
    if (arm.z.rows() != arm.n() || arm.x.rows() != arm.n())
      fail("CohortData: covariate row count mismatch in " + tag);
    if (arm.z.cols() != P || arm.x.cols() != Q)
      fail("CohortData: covariate column count mismatch in " + tag);
    if (static_cast<int>(arm.ids.size()) != arm.n())
      fail("CohortData: id count mismatch in " + tag);
    for (int i = 0; i < arm.n(); ++i) {
      if (arm.y[i] < 1 || arm.y[i] > K)
        fail("CohortData: response out of range 1.." + std::to_string(K) + " in " + tag +
             ", row " + std::to_string(i + 1));
    }
    if (!arm.z.allFinite() || !arm.x.allFinite())
      fail("CohortData: non-finite covariate in " + tag);
  }
}

void UtilityWeights::validate(int k) const {
  if (omega.size() != k) fail("UtilityWeights: omega length must equal K");
  for (int i = 1; i < k; ++i)
    if (omega(i) < omega(i - 1)) fail("UtilityWeights: omega must be nondecreasing");
}

Standardizer Standardizer::fit(const Matrix& x) {
  Standardizer s;
  const auto n = x.rows();
  s.mean = x.colwise().mean();
  s.sd = Vector::Ones(x.cols());
  if (n > 1) {
    for (Eigen::Index q = 0; q < x.cols(); ++q) {
      double ss = (x.col(q).array() - s.mean(q)).square().sum();
      double sd = std::sqrt(ss / (n - 1));
      s.sd(q) = sd > 1e-12 ? sd : 1.0;
    }
  }
  return s;
}

Matrix Standardizer::apply(const Matrix& x) const {
  Matrix out = x;
  out.rowwise() -= mean.transpose();
  out.array().rowwise() /= sd.transpose().array();
  return out;
}

Vector Standardizer::apply_row(const Vector& x) const {
  return (x - mean).cwiseQuotient(sd);
}

void PartitionState::audit(int n, int k) const {
  if (static_cast<int>(labels.size()) != n)
    throw std::logic_error("PartitionState: label count mismatch");
  const int c = n_clusters();
  std::vector<int> counts(c, 0);
  for (int lab : labels) {
    if (lab < 0 || lab >= c) throw std::logic_error("PartitionState: label out of range");
    ++counts[lab];
  }
  int total = 0;
  for (int j = 0; j < c; ++j) {
    if (counts[j] == 0) throw std::logic_error("PartitionState: gap in cluster labels");
    if (counts[j] != sizes[j]) throw std::logic_error("PartitionState: size bookkeeping broken");
    total += counts[j];
  }
  if (total != n) throw std::logic_error("PartitionState: sizes do not sum to n");
  if (static_cast<int>(eta.size()) != c)
    throw std::logic_error("PartitionState: eta count mismatch");
  for (const auto& e : eta)
    if (e.size() != k) throw std::logic_error("PartitionState: eta dimension mismatch");
  for (const auto& e : standby)
    if (e.size() != k) throw std::logic_error("PartitionState: standby dimension mismatch");
}

}  // namespace ppmx
