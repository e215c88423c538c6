#include "ppmx/similarity.hpp"

#include <cmath>
#include <stdexcept>

namespace ppmx {

namespace {

constexpr double log_2pi = 1.8378770664093454836;

// NIG posterior parameters after absorbing (count, sum, sumsq)
struct NIGPost {
  double m, k, v, n;
};

NIGPost nig_posterior(double count, double sum, double sumsq, const NIGParams& p) {
  NIGPost o;
  o.k = p.k0 + count;
  o.m = (p.k0 * p.m0 + sum) / o.k;
  o.v = p.v0 + 0.5 * count;
  double css = 0.0;
  double xbar = 0.0;
  if (count > 0) {
    xbar = sum / count;
    css = std::max(0.0, sumsq - count * xbar * xbar);
  }
  o.n = p.n0 + 0.5 * css + 0.5 * p.k0 * count * (xbar - p.m0) * (xbar - p.m0) / o.k;
  return o;
}

double nig_log_marginal_from(double count, double sum, double sumsq, const NIGParams& p) {
  if (count == 0) return 0.0;
  NIGPost o = nig_posterior(count, sum, sumsq, p);
  return std::lgamma(o.v) - std::lgamma(p.v0) + p.v0 * std::log(p.n0) - o.v * std::log(o.n) +
         0.5 * (std::log(p.k0) - std::log(o.k)) - 0.5 * count * log_2pi;
}

// marginal of the same data with the prior replaced by the data-updated NIG
double nig_double_dip(double count, double sum, double sumsq, const NIGParams& p) {
  if (count == 0) return 0.0;
  NIGPost post = nig_posterior(count, sum, sumsq, p);
  NIGParams updated{post.m, post.k, post.v, post.n};
  return nig_log_marginal_from(count, sum, sumsq, updated);
}

double bb_double_dip(double count, double sum, const BetaBernoulliParams& p) {
  if (count == 0) return 0.0;
  BetaBernoulliParams updated{p.a0 + sum, p.b0 + count - sum};
  return beta_bernoulli_log_marginal(count, sum, updated);
}

double raw_log_similarity(const ClusterStats& s, const SimilarityParams& sim) {
  double lg = 0.0;
  for (Eigen::Index q = 0; q < s.sum.size(); ++q) {
    bool binary = q < static_cast<Eigen::Index>(sim.binary_mask.size()) && sim.binary_mask[q];
    lg += binary ? bb_double_dip(s.count, s.sum(q), sim.bb)
                 : nig_double_dip(s.count, s.sum(q), s.sumsq(q), sim.nig);
  }
  return lg;
}

}  // namespace

void ClusterStats::add(const Vector& x) {
  ++count;
  sum += x;
  sumsq += x.cwiseProduct(x);
}

void ClusterStats::remove(const Vector& x) {
  if (count <= 0) throw std::logic_error("ClusterStats: remove from empty cluster");
  --count;
  if (count == 0) {
    sum.setZero();
    sumsq.setZero();
  } else {
    sum -= x;
    sumsq -= x.cwiseProduct(x);
  }
}

double nig_log_marginal(double count, double sum, double sumsq, const NIGParams& nig) {
  return nig_log_marginal_from(count, sum, sumsq, nig);
}

double beta_bernoulli_log_marginal(double count, double sum, const BetaBernoulliParams& bb) {
  if (count == 0) return 0.0;
  double a1 = bb.a0 + sum;
  double b1 = bb.b0 + count - sum;
  return std::lgamma(a1) + std::lgamma(b1) - std::lgamma(a1 + b1) -
         (std::lgamma(bb.a0) + std::lgamma(bb.b0) - std::lgamma(bb.a0 + bb.b0));
}

double double_dipper_log_similarity(const ClusterStats& stats, const SimilarityParams& sim) {
  return raw_log_similarity(stats, sim);
}

double calibrated_log_similarity(const ClusterStats& stats, const SimilarityParams& sim, int q) {
  if (q < 1) throw std::invalid_argument("calibrated_log_similarity: Q must be at least 1");
  return raw_log_similarity(stats, sim) / std::sqrt(static_cast<double>(q));
}

double cluster_log_similarity(const ClusterStats& stats, const SimilarityParams& sim) {
  if (!sim.enabled) return 0.0;
  const int q = static_cast<int>(stats.sum.size());
  return sim.calibrate ? calibrated_log_similarity(stats, sim, q)
                       : double_dipper_log_similarity(stats, sim);
}

double log_similarity_add_ratio(const ClusterStats& stats, const Vector& x,
                                const SimilarityParams& sim, double cached_log_g) {
  if (!sim.enabled) return 0.0;
  ClusterStats grown = stats;
  grown.add(x);
  double base = std::isnan(cached_log_g) ? cluster_log_similarity(stats, sim) : cached_log_g;
  return cluster_log_similarity(grown, sim) - base;
}

double singleton_log_similarity(const Vector& x, const SimilarityParams& sim) {
  if (!sim.enabled) return 0.0;
  ClusterStats s(static_cast<int>(x.size()));
  s.add(x);
  return cluster_log_similarity(s, sim);
}

}  // namespace ppmx
