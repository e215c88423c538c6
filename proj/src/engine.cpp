#include "ppmx/engine.hpp"

#include <cmath>
#include <stdexcept>

#include "ppmx/mathutil.hpp"

namespace ppmx {

void MCMCConfig::validate() const {
  if (iterations <= burnin) throw std::invalid_argument("config: iterations must exceed burn-in");
  if (thinning < 1) throw std::invalid_argument("config: thinning must be at least 1");
  if (m_standby < 1) throw std::invalid_argument("config: M must be at least 1");
  if (chains < 1) throw std::invalid_argument("config: chains must be at least 1");
  if (hyper.nu0 <= 0 || hyper.lambda0_diag <= 0 || hyper.exp_cap <= 0)
    throw std::invalid_argument("config: hyperparameters must be positive");
}

SimilarityParams MCMCConfig::effective_sim() const {
  SimilarityParams s = sim;
  if (ppm_mode) s.enabled = false;
  return s;
}

NGGPGrid make_grid(const MCMCConfig& cfg) {
  if (cfg.ppm_mode) return NGGPGrid::make_ppm(cfg.grid.kappa_points, cfg.grid.kappa_max);
  return NGGPGrid::make_default(cfg.grid.kappa_points, cfg.grid.sigma_points, cfg.grid.kappa_max,
                                cfg.grid.sigma_max);
}

std::uint64_t derive_chain_seed(std::uint64_t master, int chain_index) {
  Rng r = Rng::stream(master, 0x10000u + static_cast<std::uint64_t>(chain_index));
  return r.next_u64();
}

Vector ChainState::unit_log_gamma(int arm, int i, const Vector& eta, double cap) {
  Vector lg(K);
  const ArmState& a = arms[arm];
  for (int k = 0; k < K; ++k) {
    double v = a.zbeta(i, k) + eta(k);
    if (v > cap || v < -cap) {
      v = v > cap ? cap : -cap;
      ++warnings.exp_cap_hits;
    }
    lg(k) = v;
  }
  return lg;
}

namespace {

Vector draw_g0(const Vector& theta, const Matrix& lambda, Rng& rng) {
  return rng.mvn_precision(theta, lambda);
}

double log_mvn_precision_kernel(const Vector& x, const Vector& mean, const Matrix& precision) {
  Vector d = x - mean;
  return -0.5 * d.dot(precision * d);
}

void refresh_log_g(ArmState& a, int j, const SimilarityParams& sim) {
  a.log_g[j] = sim.enabled ? cluster_log_similarity(a.cstats[j], sim) : 0.0;
}

}  // namespace

ChainState init_chain(const CohortData& data, const MCMCConfig& cfg, const NGGPGrid& grid,
                      Rng& rng) {
  ChainState st;
  st.K = data.K;
  st.P = data.P;
  st.Q = data.Q;
  st.T = data.arm_count();
  st.mu0 = Vector::Constant(st.K, cfg.hyper.mu0);
  st.lambda0 = Matrix::Identity(st.K, st.K) * cfg.hyper.lambda0_diag;
  st.s0 = cfg.hyper.s0 > 0 ? cfg.hyper.s0 : st.K + 2;
  st.nu0 = cfg.hyper.nu0;
  st.beta = Matrix::Zero(st.P, st.K);
  st.lambda_hs = Matrix::Ones(st.P, st.K);
  st.tau = Vector::Ones(st.K);
  st.beta_scale = Matrix::Constant(st.P, st.K, cfg.beta_proposal_scale);
  st.beta_adapt_t.assign(static_cast<std::size_t>(st.P) * st.K, 0);

  const SimilarityParams sim = cfg.effective_sim();
  st.arms.resize(st.T);
  for (int a = 0; a < st.T; ++a) {
    ArmState& arm = st.arms[a];
    const ArmData& d = data.arms[a];
    const int n = d.n();
    arm.x_std = cfg.standardize_x ? Standardizer::fit(d.x).apply(d.x) : d.x;
    arm.eta_scale = cfg.eta_proposal_scale;

    // all units start in one cluster
    arm.part.labels.assign(n, 0);
    arm.part.sizes = {n};
    arm.theta = st.mu0;
    arm.lambda = Matrix::Identity(st.K, st.K) * (st.s0 / cfg.hyper.lambda0_diag);
    arm.part.eta.push_back(draw_g0(arm.theta, arm.lambda, rng));
    for (int m = 0; m < cfg.m_standby; ++m)
      arm.part.standby.push_back(draw_g0(arm.theta, arm.lambda, rng));
    arm.grid_index = rng.categorical_log(grid.log_prior);

    arm.zbeta = Matrix::Zero(n, st.K);
    arm.cstats.assign(1, ClusterStats(st.Q));
    for (int i = 0; i < n; ++i) arm.cstats[0].add(arm.x_std.row(i));
    arm.log_g.assign(1, 0.0);
    refresh_log_g(arm, 0, sim);

    arm.log_d.resize(n, st.K);
    arm.u = Vector::Ones(n);
    for (int i = 0; i < n; ++i) {
      Vector lg = st.unit_log_gamma(a, i, arm.part.eta[0], cfg.hyper.exp_cap);
      arm.log_d.row(i) = sample_log_d(d.y[i], lg, arm.u(i), rng);
    }
  }
  return st;
}

void rebuild_caches(ChainState& st, const MCMCConfig& cfg) {
  const SimilarityParams sim = cfg.effective_sim();
  for (int a = 0; a < st.T; ++a) {
    ArmState& arm = st.arms[a];
    const int n = static_cast<int>(arm.part.labels.size());
    const int c = arm.part.n_clusters();
    arm.cstats.assign(c, ClusterStats(st.Q));
    for (int i = 0; i < n; ++i) arm.cstats[arm.part.labels[i]].add(arm.x_std.row(i));
    arm.log_g.assign(c, 0.0);
    for (int j = 0; j < c; ++j) refresh_log_g(arm, j, sim);
  }
}

void update_partition(ChainState& st, int arm_idx, const CohortData& data, const MCMCConfig& cfg,
                      const NGGPGrid& grid, LogVTable& table, Rng& rng) {
  ArmState& arm = st.arms[arm_idx];
  const SimilarityParams sim = cfg.effective_sim();
  const int n = data.arms[arm_idx].n();
  const int m_aux = cfg.m_standby;
  const double kappa = grid.kappa[arm.grid_index];
  const double sigma = grid.sigma[arm.grid_index];
  const double cap = cfg.hyper.exp_cap;
  const double log_m = std::log(static_cast<double>(m_aux));

  std::vector<double> lw;
  for (int i = 0; i < n; ++i) {
    const int j0 = arm.part.labels[i];
    Vector xi = arm.x_std.row(i);

    // remove unit i, recycling the effect vector if its cluster empties
    if (--arm.part.sizes[j0] == 0) {
      int slot = rng.uniform_int(m_aux);
      arm.part.standby[slot] = arm.part.eta[j0];
      arm.part.sizes.erase(arm.part.sizes.begin() + j0);
      arm.part.eta.erase(arm.part.eta.begin() + j0);
      arm.cstats.erase(arm.cstats.begin() + j0);
      arm.log_g.erase(arm.log_g.begin() + j0);
      for (auto& l : arm.part.labels)
        if (l > j0) --l;
    } else if (sim.enabled) {
      arm.cstats[j0].remove(xi);
      refresh_log_g(arm, j0, sim);
    }
    arm.part.labels[i] = -1;

    const int c = arm.part.n_clusters();
    const Vector log_d_i = arm.log_d.row(i);
    lw.assign(c + m_aux, 0.0);
    for (int j = 0; j < c; ++j) {
      double w = log_cohesion_add_ratio(arm.part.sizes[j], sigma);
      if (sim.enabled) w += log_similarity_add_ratio(arm.cstats[j], xi, sim, arm.log_g[j]);
      if (!cfg.ablate_likelihood)
        w += gamma_kernel_loglik(log_d_i, st.unit_log_gamma(arm_idx, i, arm.part.eta[j], cap));
      lw[j] = w;
    }
    double w_new = -log_m;
    if (sim.enabled) w_new += singleton_log_similarity(xi, sim);
    if (cfg.v_ratio && c > 0) w_new += table.log_v_new_ratio(n, c, kappa, sigma);
    for (int m = 0; m < m_aux; ++m) {
      double w = w_new;
      if (!cfg.ablate_likelihood)
        w += gamma_kernel_loglik(log_d_i, st.unit_log_gamma(arm_idx, i, arm.part.standby[m], cap));
      lw[c + m] = w;
    }

    const int pick = rng.categorical_log(lw);
    if (pick < c) {
      arm.part.labels[i] = pick;
      ++arm.part.sizes[pick];
      if (sim.enabled) {
        arm.cstats[pick].add(xi);
        refresh_log_g(arm, pick, sim);
      }
    } else {
      const int slot = pick - c;
      arm.part.labels[i] = c;
      arm.part.sizes.push_back(1);
      arm.part.eta.push_back(arm.part.standby[slot]);
      arm.part.standby[slot] = draw_g0(arm.theta, arm.lambda, rng);
      arm.cstats.emplace_back(st.Q);
      arm.cstats.back().add(xi);
      arm.log_g.push_back(0.0);
      refresh_log_g(arm, c, sim);
    }
  }
  // reuse strategy: refresh the full standby pool after the sweep
  for (int m = 0; m < m_aux; ++m) arm.part.standby[m] = draw_g0(arm.theta, arm.lambda, rng);
}

void update_eta(ChainState& st, int arm_idx, const MCMCConfig& cfg, Rng& rng, bool adapt_now) {
  ArmState& arm = st.arms[arm_idx];
  const int c = arm.part.n_clusters();
  const double cap = cfg.hyper.exp_cap;
  std::vector<std::vector<int>> members(c);
  for (int i = 0; i < static_cast<int>(arm.part.labels.size()); ++i)
    members[arm.part.labels[i]].push_back(i);

  for (int j = 0; j < c; ++j) {
    Vector prop = arm.part.eta[j] + arm.eta_scale * rng.normal_vector(st.K);
    double delta = log_mvn_precision_kernel(prop, arm.theta, arm.lambda) -
                   log_mvn_precision_kernel(arm.part.eta[j], arm.theta, arm.lambda);
    for (int i : members[j]) {
      const Vector log_d_i = arm.log_d.row(i);
      delta += gamma_kernel_loglik(log_d_i, st.unit_log_gamma(arm_idx, i, prop, cap)) -
               gamma_kernel_loglik(log_d_i, st.unit_log_gamma(arm_idx, i, arm.part.eta[j], cap));
    }
    ++arm.accept.eta_proposed;
    const bool accept = std::log(rng.uniform()) < delta;
    if (accept) {
      arm.part.eta[j] = prop;
      ++arm.accept.eta_accepted;
    }
    if (adapt_now) {
      ++arm.eta_adapt_t;
      double step = std::pow(static_cast<double>(arm.eta_adapt_t), -0.7);
      arm.eta_scale =
          std::exp(std::log(arm.eta_scale) + step * ((accept ? 1.0 : 0.0) - cfg.adapt_target));
    }
  }
}

void update_theta_lambda(ChainState& st, int arm_idx, Rng& rng) {
  ArmState& arm = st.arms[arm_idx];
  if (arm.part.n_clusters() < 1) throw std::logic_error("update_theta_lambda: no clusters");
  const int n = static_cast<int>(arm.part.labels.size());
  const int c = arm.part.n_clusters();
  const int k = st.K;

  // size-weighted cluster-effect summaries
  Vector eta_bar = Vector::Zero(k);
  for (int j = 0; j < c; ++j) eta_bar += arm.part.sizes[j] * arm.part.eta[j];
  eta_bar /= n;
  Matrix scatter = Matrix::Zero(k, k);
  for (int j = 0; j < c; ++j) {
    Vector d = arm.part.eta[j] - eta_bar;
    scatter += arm.part.sizes[j] * (d * d.transpose());
  }
  Vector dmu = eta_bar - st.mu0;
  const double w = n * st.nu0 / (st.nu0 + n);
  Matrix rate = st.lambda0 + 0.5 * scatter + 0.5 * w * (dmu * dmu.transpose());

  Matrix wishart_scale;
  {
    Eigen::LLT<Matrix> llt(2.0 * rate);
    if (llt.info() != Eigen::Success) {
      rate += 1e-8 * Matrix::Identity(k, k);
      ++st.warnings.scale_jitter;
      llt.compute(2.0 * rate);
      if (llt.info() != Eigen::Success)
        throw std::runtime_error("update_theta_lambda: rate matrix not positive definite");
    }
    wishart_scale = llt.solve(Matrix::Identity(k, k));
  }
  arm.lambda = rng.wishart(wishart_scale, 2.0 * st.s0 + n);
  arm.lambda = 0.5 * (arm.lambda + arm.lambda.transpose());

  Vector mean = (st.nu0 * st.mu0 + n * eta_bar) / (st.nu0 + n);
  arm.theta = rng.mvn_precision(mean, arm.lambda, st.nu0 + n);
}

void update_grid_point(ChainState& st, int arm_idx, const NGGPGrid& grid, LogVTable& table,
                       Rng& rng) {
  ArmState& arm = st.arms[arm_idx];
  arm.grid_index = grid_update(arm.part.sizes, grid, table, rng);
}

void update_beta(ChainState& st, const CohortData& data, const MCMCConfig& cfg, Rng& rng,
                 bool adapt_now) {
  const double cap = cfg.hyper.exp_cap;
  for (int p = 0; p < st.P; ++p) {
    for (int k = 0; k < st.K; ++k) {
      const double scale = st.beta_scale(p, k);
      const double delta = scale * rng.normal();
      const double beta_old = st.beta(p, k);
      const double beta_new = beta_old + delta;
      const double prior_var = st.lambda_hs(p, k) * st.lambda_hs(p, k) * st.tau(k) * st.tau(k);
      double log_ratio = -0.5 * (beta_new * beta_new - beta_old * beta_old) / prior_var;
      for (int a = 0; a < st.T; ++a) {
        const ArmState& arm = st.arms[a];
        const ArmData& d = data.arms[a];
        for (int i = 0; i < d.n(); ++i) {
          const double base = arm.zbeta(i, k) + arm.part.eta[arm.part.labels[i]](k);
          const double g_old = std::exp(std::clamp(base, -cap, cap));
          const double g_new = std::exp(std::clamp(base + delta * d.z(i, p), -cap, cap));
          log_ratio += (g_new - g_old) * arm.log_d(i, k) - std::lgamma(g_new) + std::lgamma(g_old);
        }
      }
      ++st.accept_beta.beta_proposed;
      const bool accept = std::log(rng.uniform()) < log_ratio;
      if (accept) {
        st.beta(p, k) = beta_new;
        for (int a = 0; a < st.T; ++a)
          st.arms[a].zbeta.col(k) += delta * data.arms[a].z.col(p);
        ++st.accept_beta.beta_accepted;
      }
      if (adapt_now) {
        auto& t = st.beta_adapt_t[static_cast<std::size_t>(p) * st.K + k];
        ++t;
        double step = std::pow(static_cast<double>(t), -0.7);
        st.beta_scale(p, k) =
            std::exp(std::log(scale) + step * ((accept ? 1.0 : 0.0) - cfg.adapt_target));
      }
    }
  }
}

namespace {

// slice update of one precision-scale parameter: target p(w) prop.
// exp(-rate w) / (1 + w); returns the new w
double slice_precision_scale(double w, double rate, Rng& rng) {
  double h = rng.uniform() / (1.0 + w);
  double bound = (1.0 - h) / h;
  if (rate <= 0.0) {
    // degenerate case: fall back to the prior half-Cauchy conditional
    double lam = rng.half_cauchy();
    return 1.0 / (lam * lam);
  }
  // inverse-CDF draw from Exp(rate) truncated to (0, bound)
  double tail = -std::expm1(-rate * bound);
  return -std::log1p(-rng.uniform() * tail) / rate;
}

}  // namespace

void update_horseshoe_scales(const Matrix& beta, Matrix& lambda_hs, Vector& tau, Rng& rng) {
  const int p_dim = static_cast<int>(beta.rows());
  const int k_dim = static_cast<int>(beta.cols());
  for (int p = 0; p < p_dim; ++p) {
    for (int k = 0; k < k_dim; ++k) {
      const double zeta = beta(p, k) / tau(k);
      const double w_old = 1.0 / (lambda_hs(p, k) * lambda_hs(p, k));
      const double w_new = slice_precision_scale(w_old, 0.5 * zeta * zeta, rng);
      lambda_hs(p, k) = 1.0 / std::sqrt(w_new);
    }
  }
  for (int k = 0; k < k_dim; ++k) {
    const double zeta_sq = 0.5 * beta.col(k).squaredNorm();
    const double w_old = 1.0 / (tau(k) * tau(k));
    const double w_new = slice_precision_scale(w_old, 0.5 * zeta_sq, rng);
    tau(k) = 1.0 / std::sqrt(w_new);
  }
}

void update_latent_d(ChainState& st, int arm_idx, const CohortData& data, const MCMCConfig& cfg,
                     Rng& rng) {
  ArmState& arm = st.arms[arm_idx];
  const ArmData& d = data.arms[arm_idx];
  for (int i = 0; i < d.n(); ++i) {
    Vector lg = st.unit_log_gamma(arm_idx, i, arm.part.eta[arm.part.labels[i]], cfg.hyper.exp_cap);
    arm.log_d.row(i) = sample_log_d(d.y[i], lg, arm.u(i), rng);
  }
}

void update_latent_u(ChainState& st, int arm_idx, Rng& rng) {
  ArmState& arm = st.arms[arm_idx];
  for (int i = 0; i < arm.u.size(); ++i) {
    double total = arm.log_d.row(i).array().exp().sum();
    if (total < 1e-300) total = 1e-300;
    arm.u(i) = sample_u(total, rng);
  }
}

void sweep(ChainState& state, const CohortData& data, const MCMCConfig& cfg, const NGGPGrid& grid,
           LogVTable& table, std::vector<Rng>& arm_rngs, Rng& shared_rng, bool adapt_now) {
  // arm-local steps run concurrently on independent RNG streams; results are
  // identical for any thread count
#pragma omp parallel for schedule(static)
  for (int a = 0; a < state.T; ++a) {
    update_partition(state, a, data, cfg, grid, table, arm_rngs[a]);
    update_eta(state, a, cfg, arm_rngs[a], adapt_now);
    update_theta_lambda(state, a, arm_rngs[a]);
    update_grid_point(state, a, grid, table, arm_rngs[a]);
  }
  update_beta(state, data, cfg, shared_rng, adapt_now);
  update_horseshoe_scales(state.beta, state.lambda_hs, state.tau, shared_rng);
#pragma omp parallel for schedule(static)
  for (int a = 0; a < state.T; ++a) {
    update_latent_d(state, a, data, cfg, arm_rngs[a]);
    update_latent_u(state, a, arm_rngs[a]);
  }
}

TraceStore run_chain(const CohortData& data, const MCMCConfig& cfg) {
  data.validate();
  cfg.validate();
  NGGPGrid grid = make_grid(cfg);
  LogVTable table(cfg.quadrature);

  Rng init_rng = Rng::stream(cfg.seed, 0);
  Rng shared_rng = Rng::stream(cfg.seed, 1);
  std::vector<Rng> arm_rngs;
  for (int a = 0; a < data.arm_count(); ++a) arm_rngs.push_back(Rng::stream(cfg.seed, 2 + a));

  ChainState st = init_chain(data, cfg, grid, init_rng);

  TraceStore trace;
  trace.K = st.K;
  trace.P = st.P;
  trace.Q = st.Q;
  trace.T = st.T;
  trace.seed = cfg.seed;
  trace.standardized = cfg.standardize_x;
  trace.arms.resize(st.T);
  trace.ids.resize(st.T);
  for (int a = 0; a < st.T; ++a) {
    trace.ids[a] = data.arms[a].ids;
    trace.x_standardizers.push_back(cfg.standardize_x ? Standardizer::fit(data.arms[a].x)
                                                      : Standardizer{Vector::Zero(st.Q),
                                                                     Vector::Ones(st.Q)});
    trace.x_train_std.push_back(st.arms[a].x_std);
  }
  const int kept_total = (cfg.iterations - cfg.burnin) / cfg.thinning;
  trace.loglik.resize(kept_total, data.total_n());

  int kept = 0;
  for (int it = 0; it < cfg.iterations; ++it) {
    const bool adapt_now = cfg.adapt && it < cfg.burnin;
    sweep(st, data, cfg, grid, table, arm_rngs, shared_rng, adapt_now);
    if (it >= cfg.burnin && (it - cfg.burnin) % cfg.thinning == 0 && kept < kept_total) {
      int offset = 0;
      for (int a = 0; a < st.T; ++a) {
        const ArmState& arm = st.arms[a];
        ArmTraceDraw draw;
        draw.labels = arm.part.labels;
        draw.eta.resize(arm.part.n_clusters(), st.K);
        for (int j = 0; j < arm.part.n_clusters(); ++j) draw.eta.row(j) = arm.part.eta[j];
        draw.theta = arm.theta;
        draw.lambda = arm.lambda;
        draw.kappa = grid.kappa[arm.grid_index];
        draw.sigma = grid.sigma[arm.grid_index];
        trace.arms[a].push_back(std::move(draw));
        for (int i = 0; i < data.arms[a].n(); ++i) {
          Vector lg = st.unit_log_gamma(a, i, arm.part.eta[arm.part.labels[i]],
                                        cfg.hyper.exp_cap);
          trace.loglik(kept, offset + i) = marginal_response_logpmf_log(data.arms[a].y[i], lg);
        }
        offset += data.arms[a].n();
      }
      trace.beta.push_back(st.beta);
      trace.lambda_hs.push_back(st.lambda_hs);
      trace.tau.push_back(st.tau);
      ++kept;
    }
  }
  for (int a = 0; a < st.T; ++a) {
    st.arms[a].part.audit(data.arms[a].n(), st.K);
    trace.accept_arm.push_back(st.arms[a].accept);
  }
  trace.accept_beta = st.accept_beta;
  trace.warnings = st.warnings;
  return trace;
}

double compute_lpml(const Matrix& loglik) {
  if (loglik.rows() == 0) throw std::invalid_argument("compute_lpml: empty trace");
  const auto s = loglik.rows();
  double lpml = 0.0;
  std::vector<double> neg(s);
  for (Eigen::Index i = 0; i < loglik.cols(); ++i) {
    for (Eigen::Index r = 0; r < s; ++r) neg[r] = -loglik(r, i);
    // log CPO_i = -log mean(1/L_i)
    lpml += std::log(static_cast<double>(s)) - log_sum_exp(neg);
  }
  return lpml;
}

double compute_waic(const Matrix& loglik) {
  if (loglik.rows() == 0) throw std::invalid_argument("compute_waic: empty trace");
  const auto s = loglik.rows();
  double lppd = 0.0, p_waic = 0.0;
  std::vector<double> col(s);
  for (Eigen::Index i = 0; i < loglik.cols(); ++i) {
    for (Eigen::Index r = 0; r < s; ++r) col[r] = loglik(r, i);
    lppd += log_sum_exp(col) - std::log(static_cast<double>(s));
    p_waic += mean_var(col).var;
  }
  return -2.0 * (lppd - p_waic);
}

std::vector<double> compute_psrf(const std::vector<Matrix>& chains) {
  if (chains.size() < 2) throw std::invalid_argument("compute_psrf: need at least 2 chains");
  const auto m = chains.size();
  const auto s = chains[0].rows();
  const auto dim = chains[0].cols();
  for (const auto& c : chains)
    if (c.rows() != s || c.cols() != dim)
      throw std::invalid_argument("compute_psrf: chains must share dimensions");
  std::vector<double> out(dim);
  for (Eigen::Index j = 0; j < dim; ++j) {
    std::vector<double> means(m), vars(m);
    for (std::size_t c = 0; c < m; ++c) {
      std::vector<double> v(chains[c].col(j).data(), chains[c].col(j).data() + s);
      MeanVar mv = mean_var(v);
      means[c] = mv.mean;
      vars[c] = mv.var;
    }
    double w = 0.0;
    for (double v : vars) w += v;
    w /= m;
    double b_over_s = mean_var(means).var;  // B/s
    if (w <= 0.0) {
      out[j] = 1.0;
      continue;
    }
    double var_plus = (s - 1.0) / s * w + b_over_s;
    out[j] = std::sqrt(var_plus / w);
  }
  return out;
}

}  // namespace ppmx
