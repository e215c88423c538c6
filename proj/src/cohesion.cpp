#include "ppmx/cohesion.hpp"

#include <bit>
#include <cmath>
#include <mutex>
#include <sstream>
#include <stdexcept>

#include "ppmx/mathutil.hpp"

namespace ppmx {

double log_cohesion(int n_j, double sigma) {
  if (n_j < 1) throw std::invalid_argument("log_cohesion: cluster size must be positive");
  if (sigma >= 1.0) throw std::invalid_argument("log_cohesion: sigma must be below 1");
  double lc = 0.0;
  for (int t = 0; t <= n_j - 2; ++t) lc += std::log(1.0 - sigma + t);
  return lc;
}

double log_cohesion_add_ratio(int n_j, double sigma) {
  if (n_j < 1) throw std::invalid_argument("log_cohesion_add_ratio: cluster size must be positive");
  return std::log(n_j - sigma);
}

double dp_log_v(int n, int c, double kappa) {
  return c * std::log(kappa) + std::lgamma(kappa) - std::lgamma(kappa + n);
}

namespace {

struct Integrand {
  double n, c, kappa, sigma, shift;

  double operator()(double w) const {
    double sp = softplus(w);
    return shift + n * w - (kappa / sigma) * std::expm1(sigma * sp) + (sigma * c - n) * sp;
  }
};

double trapezoid_log(const Integrand& f, double lo, double hi, int nodes) {
  const double step = (hi - lo) / (nodes - 1);
  std::vector<double> vals(nodes);
  for (int i = 0; i < nodes; ++i) vals[i] = f(lo + i * step);
  vals.front() -= M_LN2;
  vals.back() -= M_LN2;
  return std::log(step) + log_sum_exp(vals);
}

}  // namespace

double log_v_quadrature(int n, int c, double kappa, double sigma, const QuadratureSettings& qs) {
  if (c < 1 || c > n) throw std::invalid_argument("log_v: need 1 <= C <= n");
  if (!(kappa > 0.0)) throw std::invalid_argument("log_v: kappa must be positive");
  if (sigma < 0.0 || sigma >= 1.0) throw std::invalid_argument("log_v: sigma must be in [0,1)");
  if (sigma == 0.0) return dp_log_v(n, c, kappa);

  const Integrand f{static_cast<double>(n), static_cast<double>(c), kappa, sigma,
                    c * std::log(kappa) - std::lgamma(n)};

  // bracket the mode with a coarse scan, then refine by ternary search
  double w_best = 0.0, h_best = neg_inf;
  for (int i = 0; i <= 360; ++i) {
    double w = -45.0 + 0.25 * i;
    double h = f(w);
    if (h > h_best) {
      h_best = h;
      w_best = w;
    }
  }
  double a = w_best - 0.25, b = w_best + 0.25;
  for (int it = 0; it < 60; ++it) {
    double m1 = a + (b - a) / 3.0, m2 = b - (b - a) / 3.0;
    if (f(m1) < f(m2)) a = m1; else b = m2;
  }
  w_best = 0.5 * (a + b);
  h_best = f(w_best);

  double lo = w_best, hi = w_best;
  while (f(lo) > h_best - qs.tail_drop) lo -= 0.5;
  while (f(hi) > h_best - qs.tail_drop) hi += 0.5;
  lo -= 0.5;
  hi += 0.5;

  int nodes = qs.initial_nodes;
  double prev = trapezoid_log(f, lo, hi, nodes);
  for (int r = 0; r < qs.max_doublings; ++r) {
    nodes *= 2;
    double cur = trapezoid_log(f, lo, hi, nodes);
    if (std::abs(cur - prev) < qs.rel_tol) return cur;
    prev = cur;
  }
  std::ostringstream msg;
  msg << "log_v quadrature failed to converge: n=" << n << " C=" << c << " kappa=" << kappa
      << " sigma=" << sigma << " nodes=" << nodes << " last_change=" << prev;
  throw std::runtime_error(msg.str());
}

std::size_t LogVTable::KeyHash::operator()(const Key& k) const {
  std::size_t h = std::hash<int>()(k.n);
  auto mix = [&h](std::size_t v) { h ^= v + 0x9e3779b97f4a7c15ULL + (h << 6) + (h >> 2); };
  mix(std::hash<int>()(k.c));
  mix(std::hash<std::uint64_t>()(k.kappa_bits));
  mix(std::hash<std::uint64_t>()(k.sigma_bits));
  return h;
}

double LogVTable::log_v(int n, int c, double kappa, double sigma) {
  Key key{n, c, std::bit_cast<std::uint64_t>(kappa), std::bit_cast<std::uint64_t>(sigma)};
  {
    std::shared_lock lock(mu_);
    auto it = cells_.find(key);
    if (it != cells_.end()) return it->second;
  }
  double val = log_v_quadrature(n, c, kappa, sigma, qs_);
  std::unique_lock lock(mu_);
  cells_.emplace(key, val);
  return val;
}

double LogVTable::log_v_new_ratio(int n, int c, double kappa, double sigma) {
  return log_v(n, c + 1, kappa, sigma) - log_v(n, c, kappa, sigma);
}

NGGPGrid NGGPGrid::make_default(int kappa_points, int sigma_points, double kappa_max,
                                double sigma_max) {
  NGGPGrid g;
  std::vector<double> kv(kappa_points), kw(kappa_points);
  std::vector<double> sv(sigma_points), sw(sigma_points);
  for (int i = 0; i < kappa_points; ++i) {
    double le = i * kappa_max / kappa_points, re = (i + 1) * kappa_max / kappa_points;
    kv[i] = 0.5 * (le + re);
    kw[i] = gamma21_cdf(re) - gamma21_cdf(le);
  }
  for (int j = 0; j < sigma_points; ++j) {
    double le = j * sigma_max / sigma_points, re = (j + 1) * sigma_max / sigma_points;
    sv[j] = 0.5 * (le + re);
    sw[j] = beta_cdf_int(re, 5, 23) - beta_cdf_int(le, 5, 23);
  }
  double total = 0.0;
  for (int i = 0; i < kappa_points; ++i)
    for (int j = 0; j < sigma_points; ++j) total += kw[i] * sw[j];
  for (int i = 0; i < kappa_points; ++i)
    for (int j = 0; j < sigma_points; ++j) {
      g.kappa.push_back(kv[i]);
      g.sigma.push_back(sv[j]);
      g.log_prior.push_back(std::log(kw[i] * sw[j] / total));
    }
  return g;
}

NGGPGrid NGGPGrid::make_ppm(int kappa_points, double kappa_max) {
  NGGPGrid g;
  double total = gamma21_cdf(kappa_max);
  for (int i = 0; i < kappa_points; ++i) {
    double le = i * kappa_max / kappa_points, re = (i + 1) * kappa_max / kappa_points;
    g.kappa.push_back(0.5 * (le + re));
    g.sigma.push_back(0.0);
    g.log_prior.push_back(std::log((gamma21_cdf(re) - gamma21_cdf(le)) / total));
  }
  return g;
}

double eppf_logprob(std::span<const int> sizes, double kappa, double sigma, LogVTable& table) {
  int n = 0;
  double lc = 0.0;
  for (int s : sizes) {
    n += s;
    lc += log_cohesion(s, sigma);
  }
  return table.log_v(n, static_cast<int>(sizes.size()), kappa, sigma) + lc;
}

int grid_update(std::span<const int> sizes, const NGGPGrid& grid, LogVTable& table, Rng& rng) {
  std::vector<double> lw(grid.size());
  for (int gidx = 0; gidx < grid.size(); ++gidx)
    lw[gidx] = grid.log_prior[gidx] + eppf_logprob(sizes, grid.kappa[gidx], grid.sigma[gidx], table);
  return rng.categorical_log(lw);
}

std::vector<int> sample_prior_partition(int n, double kappa, double sigma, LogVTable& table,
                                        Rng& rng, const Matrix* x, const SimilarityParams* sim) {
  if (n < 1) throw std::invalid_argument("sample_prior_partition: n must be positive");
  const bool use_sim = x != nullptr && sim != nullptr && sim->enabled;
  const int q = use_sim ? static_cast<int>(x->cols()) : 0;

  std::vector<int> labels(n, 0);
  std::vector<int> sizes{1};
  std::vector<ClusterStats> stats;
  std::vector<double> log_g;
  if (use_sim) {
    stats.emplace_back(q);
    stats[0].add(x->row(0));
    log_g.push_back(cluster_log_similarity(stats[0], *sim));
  }

  std::vector<double> lw;
  for (int i = 1; i < n; ++i) {
    const int c = static_cast<int>(sizes.size());
    lw.assign(c + 1, 0.0);
    Vector xi;
    if (use_sim) xi = x->row(i);
    for (int j = 0; j < c; ++j) {
      lw[j] = log_cohesion_add_ratio(sizes[j], sigma);
      if (use_sim) lw[j] += log_similarity_add_ratio(stats[j], xi, *sim, log_g[j]);
    }
    lw[c] = table.log_v_new_ratio(i + 1, c, kappa, sigma);
    if (use_sim) lw[c] += singleton_log_similarity(xi, *sim);

    int pick = rng.categorical_log(lw);
    labels[i] = pick;
    if (pick == c) {
      sizes.push_back(1);
      if (use_sim) {
        stats.emplace_back(q);
        stats.back().add(xi);
        log_g.push_back(cluster_log_similarity(stats.back(), *sim));
      }
    } else {
      ++sizes[pick];
      if (use_sim) {
        stats[pick].add(xi);
        log_g[pick] = cluster_log_similarity(stats[pick], *sim);
      }
    }
  }
  return labels;
}

void gibbs_scan_partition(std::vector<int>& labels, std::vector<int>& sizes, const Matrix& x,
                          double kappa, double sigma, const SimilarityParams& sim,
                          LogVTable& table, Rng& rng) {
  const int n = static_cast<int>(labels.size());
  const int q = static_cast<int>(x.cols());
  std::vector<ClusterStats> stats(sizes.size(), ClusterStats(q));
  std::vector<double> log_g(sizes.size(), 0.0);
  for (int i = 0; i < n; ++i) stats[labels[i]].add(x.row(i));
  for (std::size_t j = 0; j < sizes.size(); ++j)
    log_g[j] = cluster_log_similarity(stats[j], sim);

  std::vector<double> lw;
  for (int i = 0; i < n; ++i) {
    const int j0 = labels[i];
    Vector xi = x.row(i);
    if (--sizes[j0] == 0) {
      sizes.erase(sizes.begin() + j0);
      stats.erase(stats.begin() + j0);
      log_g.erase(log_g.begin() + j0);
      for (auto& l : labels)
        if (l > j0) --l;
    } else {
      stats[j0].remove(xi);
      log_g[j0] = cluster_log_similarity(stats[j0], sim);
    }
    labels[i] = -1;

    const int c = static_cast<int>(sizes.size());
    lw.assign(c + 1, 0.0);
    for (int j = 0; j < c; ++j) {
      lw[j] = log_cohesion_add_ratio(sizes[j], sigma);
      if (sim.enabled) lw[j] += log_similarity_add_ratio(stats[j], xi, sim, log_g[j]);
    }
    lw[c] = c > 0 ? table.log_v_new_ratio(n, c, kappa, sigma) : 0.0;
    if (sim.enabled) lw[c] += singleton_log_similarity(xi, sim);

    const int pick = rng.categorical_log(lw);
    labels[i] = pick;
    if (pick == c) {
      sizes.push_back(1);
      stats.emplace_back(q);
      stats.back().add(xi);
      log_g.push_back(cluster_log_similarity(stats.back(), sim));
    } else {
      ++sizes[pick];
      stats[pick].add(xi);
      log_g[pick] = cluster_log_similarity(stats[pick], sim);
    }
  }
}

}  // namespace ppmx
