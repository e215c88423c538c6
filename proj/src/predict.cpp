#include "ppmx/predict.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "ppmx/mathutil.hpp"

namespace ppmx {

std::vector<double> predictive_cluster_weights(const Vector& x_new_std,
                                               std::span<const int> sizes,
                                               const std::vector<ClusterStats>& cstats,
                                               const std::vector<double>& log_g, double kappa,
                                               double sigma, int n_train,
                                               const SimilarityParams& sim, int m_slots,
                                               bool v_ratio, LogVTable& table) {
  const int c = static_cast<int>(sizes.size());
  std::vector<double> lw(c + m_slots);
  for (int j = 0; j < c; ++j) {
    lw[j] = log_cohesion_add_ratio(sizes[j], sigma);
    if (sim.enabled) lw[j] += log_similarity_add_ratio(cstats[j], x_new_std, sim, log_g[j]);
  }
  double w_new = -std::log(static_cast<double>(m_slots));
  if (sim.enabled) w_new += singleton_log_similarity(x_new_std, sim);
  if (v_ratio && c > 0) w_new += table.log_v_new_ratio(n_train + 1, c, kappa, sigma);
  for (int m = 0; m < m_slots; ++m) lw[c + m] = w_new;
  normalize_log_weights(lw);
  return lw;
}

Vector sample_predictive_response(const Matrix& eta, const Vector& theta, const Matrix& lambda,
                                  std::span<const double> weights, const Matrix& beta,
                                  const Vector& z_new, double exp_cap, Rng& rng) {
  const int c = static_cast<int>(eta.rows());
  const int k = static_cast<int>(theta.size());
  // weights are probabilities; inverse-CDF draw keeps one uniform per call
  double u = rng.uniform(), cum = 0.0;
  int pick = static_cast<int>(weights.size()) - 1;
  for (std::size_t j = 0; j < weights.size(); ++j) {
    cum += weights[j];
    if (u <= cum) {
      pick = static_cast<int>(j);
      break;
    }
  }
  Vector effect = pick < c ? Vector(eta.row(pick)) : rng.mvn_precision(theta, lambda);
  Vector log_gamma(k);
  for (int j = 0; j < k; ++j) {
    double v = effect(j);
    if (beta.size() > 0) v += beta.col(j).dot(z_new);
    log_gamma(j) = std::clamp(v, -exp_cap, exp_cap);
  }
  Vector log_draw(k);
  for (int j = 0; j < k; ++j) log_draw(j) = rng.log_gamma_draw(std::exp(log_gamma(j)));
  double lse = log_sum_exp(std::span<const double>(log_draw.data(), k));
  return (log_draw.array() - lse).exp();
}

namespace {

double median(std::vector<double>& v) {
  const std::size_t n = v.size();
  if (n == 0) throw std::invalid_argument("median of empty sample");
  std::sort(v.begin(), v.end());
  if (n % 2 == 1) return v[n / 2];
  return 0.5 * (v[n / 2 - 1] + v[n / 2]);
}

}  // namespace

Vector median_probabilities(const Matrix& pi_draws) {
  Vector med(pi_draws.cols());
  std::vector<double> col(pi_draws.rows());
  for (Eigen::Index k = 0; k < pi_draws.cols(); ++k) {
    for (Eigen::Index s = 0; s < pi_draws.rows(); ++s) col[s] = pi_draws(s, k);
    med(k) = median(col);
  }
  return med;
}

double median_predictive_utility(const Matrix& pi_draws, const Vector& omega,
                                 bool median_of_utility) {
  if (pi_draws.rows() == 0) throw std::invalid_argument("median_predictive_utility: no draws");
  if (median_of_utility) {
    std::vector<double> util(pi_draws.rows());
    for (Eigen::Index s = 0; s < pi_draws.rows(); ++s)
      util[s] = omega.dot(pi_draws.row(s).transpose());
    return median(util);
  }
  return omega.dot(median_probabilities(pi_draws));
}

std::pair<int, bool> select_treatment(const Vector& utilities) {
  if (utilities.size() < 2) throw std::invalid_argument("select_treatment: need T >= 2 arms");
  int best = 0;
  for (int a = 1; a < utilities.size(); ++a)
    if (utilities(a) > utilities(best)) best = a;
  bool tie = false;
  for (int a = 0; a < utilities.size(); ++a)
    if (a != best && utilities(a) == utilities(best)) tie = true;
  return {best + 1, tie};
}

namespace {

// per-draw cluster statistics rebuilt once per arm; clusters are put in
// first-appearance order so any relabeling of the stored draw yields
// bit-identical predictions
struct DrawContext {
  std::vector<int> sizes;
  std::vector<ClusterStats> cstats;
  std::vector<double> log_g;
  Matrix eta;  // canonical order
};

std::vector<DrawContext> build_contexts(const TraceStore& trace, int arm,
                                        const SimilarityParams& sim) {
  const Matrix& x = trace.x_train_std[arm];
  const int q = static_cast<int>(x.cols());
  std::vector<DrawContext> ctx(trace.arms[arm].size());
  for (std::size_t s = 0; s < trace.arms[arm].size(); ++s) {
    const auto& draw = trace.arms[arm][s];
    const int c = static_cast<int>(draw.eta.rows());
    DrawContext& d = ctx[s];
    std::vector<int> remap(c, -1);
    int next = 0;
    d.sizes.assign(c, 0);
    d.cstats.assign(c, ClusterStats(q));
    d.eta.resize(c, draw.eta.cols());
    for (std::size_t i = 0; i < draw.labels.size(); ++i) {
      int raw = draw.labels[i];
      if (remap[raw] < 0) {
        remap[raw] = next;
        d.eta.row(next) = draw.eta.row(raw);
        ++next;
      }
      int j = remap[raw];
      ++d.sizes[j];
      d.cstats[j].add(x.row(i));
    }
    d.log_g.assign(c, 0.0);
    if (sim.enabled)
      for (int j = 0; j < c; ++j) d.log_g[j] = cluster_log_similarity(d.cstats[j], sim);
  }
  return ctx;
}

std::vector<PatientPrediction> predict_impl(const TraceStore& trace, const Matrix& z_new,
                                            const Matrix& x_new,
                                            const std::vector<std::string>& ids,
                                            const PredictionConfig& cfg, bool parallel) {
  if (z_new.cols() != trace.P || x_new.cols() != trace.Q)
    throw std::invalid_argument("predict: covariate dimensions do not match the trace");
  if (z_new.rows() != x_new.rows() ||
      z_new.rows() != static_cast<Eigen::Index>(ids.size()))
    throw std::invalid_argument("predict: row count mismatch");
  cfg.omega.validate(trace.K);
  const int n_new = static_cast<int>(ids.size());
  const int t_arms = trace.T;
  const int s_draws = trace.kept();
  if (s_draws == 0) throw std::invalid_argument("predict: empty trace");

  LogVTable table;
  std::vector<std::vector<DrawContext>> ctx(t_arms);
  for (int a = 0; a < t_arms; ++a) ctx[a] = build_contexts(trace, a, cfg.sim);

  std::vector<PatientPrediction> out(n_new);
#pragma omp parallel for schedule(dynamic) if (parallel)
  for (int i = 0; i < n_new; ++i) {
    PatientPrediction& pp = out[i];
    pp.id = ids[i];
    pp.phi.resize(t_arms);
    pp.median_probs.resize(t_arms, trace.K);
    Vector z_i = z_new.row(i);
    for (int a = 0; a < t_arms; ++a) {
      Rng rng = Rng::stream(cfg.seed, static_cast<std::uint64_t>(i) * t_arms + a);
      Vector x_i = trace.x_standardizers[a].apply_row(x_new.row(i));
      const int n_train = static_cast<int>(trace.ids[a].size());
      Matrix pi_draws(s_draws, trace.K);
      for (int s = 0; s < s_draws; ++s) {
        const auto& draw = trace.arms[a][s];
        const auto& dc = ctx[a][s];
        auto w = predictive_cluster_weights(x_i, dc.sizes, dc.cstats, dc.log_g, draw.kappa,
                                            draw.sigma, n_train, cfg.sim, cfg.m_slots,
                                            cfg.v_ratio, table);
        pi_draws.row(s) = sample_predictive_response(dc.eta, draw.theta, draw.lambda, w,
                                                     trace.beta[s], z_i, cfg.exp_cap, rng);
      }
      pp.phi(a) = median_predictive_utility(pi_draws, cfg.omega.omega, cfg.median_of_utility);
      pp.median_probs.row(a) = median_probabilities(pi_draws);
    }
    if (t_arms >= 2) {
      auto [rec, tie] = select_treatment(pp.phi);
      pp.recommended = rec;
      pp.tie = tie;
    } else {
      pp.recommended = 1;
    }
  }
  return out;
}

}  // namespace

std::vector<PatientPrediction> predict_patients(const TraceStore& trace, const Matrix& z_new,
                                                const Matrix& x_new,
                                                const std::vector<std::string>& ids,
                                                const PredictionConfig& cfg) {
  return predict_impl(trace, z_new, x_new, ids, cfg, true);
}

std::vector<PatientPrediction> predict_patients_serial(const TraceStore& trace,
                                                       const Matrix& z_new, const Matrix& x_new,
                                                       const std::vector<std::string>& ids,
                                                       const PredictionConfig& cfg) {
  return predict_impl(trace, z_new, x_new, ids, cfg, false);
}

}  // namespace ppmx
