#include "ppmx/simulate.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>

#include "ppmx/mathutil.hpp"

namespace ppmx {

CrCoefficients CrCoefficients::defaults() {
  CrCoefficients c;
  c.alpha = {(Vector(2) << -0.5, -1.0).finished(), (Vector(2) << 0.7, -1.0).finished()};
  c.phi = {(Vector(2) << 1.5, 2.0).finished(), (Vector(2) << -0.5, -1.0).finished()};
  c.iota = (Vector(2) << 1.0, -0.5).finished();
  c.chi = (Matrix(2, 2) << 1.0, 0.5, 0.7, 1.0).finished();
  return c;
}

ScenarioSpec ScenarioSpec::preset(const std::string& id) {
  ScenarioSpec s;
  s.id = id;
  s.omega = (Vector(3) << 0.0, 40.0, 100.0).finished();
  if (id == "s1") {
    s.n = 200; s.q = 4; s.n_train = 170; s.n_test = 30;
  } else if (id == "s2") {
    s.n = 200; s.q = 10; s.n_train = 170; s.n_test = 30;
  } else if (id == "s3") {
    s.n = 200; s.q = 20; s.n_train = 170; s.n_test = 30;
  } else if (id == "cr-logistic") {
    s.n = 152; s.q = 25; s.n_train = 124; s.n_test = 28;
  } else if (id == "prior-sim") {
    s.n = 50; s.q = 5; s.p = 0; s.n_train = 50; s.n_test = 0;
  } else {
    throw std::invalid_argument("unknown scenario id: " + id);
  }
  return s;
}

void ScenarioSpec::validate() const {
  if (n_train + n_test != n)
    throw std::invalid_argument("scenario: train/test sizes must sum to n");
  if (overlap < 0.0 || overlap > 1.0)
    throw std::invalid_argument("scenario: overlap must lie in [0,1]");
  if (id == "s1" && n != 200)
    throw std::invalid_argument("scenario s1 is defined for n = 200");
  if ((id == "s2" || id == "s3" || id == "cr-logistic") && q % 5 != 0)
    throw std::invalid_argument("scenario: Q must be divisible by 5");
  if (k != 3) throw std::invalid_argument("response generator is defined for K = 3");
  if (t != 2) throw std::invalid_argument("response generator is defined for T = 2");
}

Matrix gen_prior_sim_covariates(int n, Rng& rng) {
  Matrix x(n, 5);
  const double sd = std::sqrt(0.5);
  for (int i = 0; i < n; ++i) {
    double u = rng.uniform();
    double mu = u < 0.2 ? -2.1 : (u < 0.7 ? 0.0 : 2.3);
    for (int q = 0; q < 5; ++q) x(i, q) = mu + sd * rng.normal();
  }
  return x;
}

std::pair<Matrix, std::vector<int>> gen_s1_covariates(Rng& rng) {
  const int sizes[3] = {75, 75, 50};
  const double mu[3][2] = {{-3.0, 3.0}, {0.0, 0.0}, {3.0, 3.0}};
  const double bern_q[3] = {0.1, 0.5, 0.9};
  Matrix x(200, 4);
  std::vector<int> block(200);
  const double sd = std::sqrt(0.5);
  int row = 0;
  for (int g = 0; g < 3; ++g) {
    for (int i = 0; i < sizes[g]; ++i, ++row) {
      block[row] = g;
      x(row, 0) = mu[g][0] + sd * rng.normal();
      x(row, 1) = mu[g][1] + sd * rng.normal();
      x(row, 2) = rng.uniform() < bern_q[g] ? 1.0 : 0.0;
      x(row, 3) = rng.uniform() < bern_q[g] ? 1.0 : 0.0;
    }
  }
  return {x, block};
}

Matrix gen_s2_s3_covariates(int n, int q, Rng& rng) {
  if (q % 5 != 0) throw std::invalid_argument("gen_s2_s3_covariates: Q must be divisible by 5");
  Matrix x(n, q);
  const int f = q / 5;
  const double sn_delta = 10.0 / std::sqrt(101.0);
  for (int i = 0; i < n; ++i) {
    for (int j = 0; j < q; ++j) {
      int family = j / f;
      switch (family) {
        case 0: x(i, j) = rng.normal(); break;
        case 1: x(i, j) = 10.0 * rng.uniform(); break;
        case 2: x(i, j) = rng.normal() / std::sqrt(rng.chisq(4.0) / 4.0); break;
        case 3: {
          double u0 = rng.normal(), v = rng.normal();
          x(i, j) = 10.0 + sn_delta * std::abs(u0) + std::sqrt(1.0 - sn_delta * sn_delta) * v;
          break;
        }
        default:
          x(i, j) = rng.uniform() < 0.4 ? rng.normal() : 10.0 + std::sqrt(2.0) * rng.normal();
      }
    }
  }
  return x;
}

Vector continuation_ratio_probs(const Vector& logits) {
  const int k = static_cast<int>(logits.size()) + 1;
  Vector logp(k);
  double lp1 = 0.0;
  for (int j = 0; j < k - 1; ++j) lp1 -= softplus(logits(j));
  logp(0) = lp1;
  double log_cum = lp1;
  for (int j = 1; j < k; ++j) {
    logp(j) = logits(j - 1) + log_cum;
    log_cum = log_add_exp(log_cum, logp(j));
  }
  Vector p = logp.array().exp();
  return p / p.sum();
}

Vector psi_summary(const Matrix& fit_rows, const Matrix& apply_rows) {
  Vector mean = fit_rows.colwise().mean();
  Matrix centered = fit_rows.rowwise() - mean.transpose();
  Matrix cov = centered.transpose() * centered / std::max<double>(1.0, fit_rows.rows() - 1);
  Eigen::SelfAdjointEigenSolver<Matrix> eig(cov);
  const auto q = cov.cols();
  Vector v1 = eig.eigenvectors().col(q - 1);
  Vector v2 = q >= 2 ? Vector(eig.eigenvectors().col(q - 2)) : Vector(Vector::Zero(q));
  // deterministic sign: largest-magnitude loading positive
  auto fix_sign = [](Vector& v) {
    Eigen::Index idx;
    v.cwiseAbs().maxCoeff(&idx);
    if (v(idx) < 0) v = -v;
  };
  fix_sign(v1);
  if (q >= 2) fix_sign(v2);

  Vector s1 = centered * v1;
  Vector s2 = centered * v2;
  auto sd = [](const Vector& s) {
    double var = s.squaredNorm() / std::max<double>(1.0, s.size() - 1);
    return var > 1e-24 ? std::sqrt(var) : 1.0;
  };
  double sd1 = sd(s1), sd2 = sd(s2);

  Matrix ac = apply_rows.rowwise() - mean.transpose();
  Vector z1 = (ac * v1) / sd1;
  Vector z2 = (ac * v2) / sd2;
  return (z1 + z2) / std::sqrt(2.0);
}

namespace {

Vector log_orp(const Vector& omega, const Vector& p_pred, const Vector& p_prog) {
  const int k = static_cast<int>(omega.size());
  Vector lo(k);
  for (int j = 0; j < k; ++j)
    lo(j) = (omega(j) > 0.0 ? std::log(omega(j)) : neg_inf) + std::log(p_pred(j)) +
            std::log(p_prog(j));
  double lse = log_sum_exp(std::span<const double>(lo.data(), k));
  if (lse == neg_inf) throw std::runtime_error("ORP degenerate: all utility-weighted mass zero");
  return lo.array() - lse;
}

}  // namespace

Vector ordinal_response_probs(const Vector& omega, const Vector& p_pred, const Vector& p_prog) {
  return log_orp(omega, p_pred, p_prog).array().exp();
}

namespace {

// balanced random arm assignment, 1-based
std::vector<int> assign_arms(int n, int t, Rng& rng) {
  std::vector<int> arms(n);
  for (int i = 0; i < n; ++i) arms[i] = i % t + 1;
  for (int i = n - 1; i > 0; --i) std::swap(arms[i], arms[rng.uniform_int(i + 1)]);
  return arms;
}

CohortData build_cohort(const std::vector<PatientTruth>& truth, const Matrix& x, const Matrix& z,
                        const std::vector<int>& rows, int k, int t) {
  CohortData d;
  d.K = k;
  d.P = static_cast<int>(z.cols());
  d.Q = static_cast<int>(x.cols());
  d.arms.resize(t);
  for (int a = 0; a < t; ++a) {
    std::vector<int> members;
    for (int r : rows)
      if (truth[r].received_arm == a + 1) members.push_back(r);
    ArmData& arm = d.arms[a];
    arm.z.resize(members.size(), z.cols());
    arm.x.resize(members.size(), x.cols());
    for (std::size_t m = 0; m < members.size(); ++m) {
      arm.ids.push_back(truth[members[m]].id);
      arm.y.push_back(truth[members[m]].y);
      arm.z.row(m) = z.row(members[m]);
      arm.x.row(m) = x.row(members[m]);
    }
  }
  return d;
}

}  // namespace

GeneratedDataset generate_scenario(const ScenarioSpec& spec) {
  spec.validate();
  Rng rng = Rng::stream(spec.seed, 0);

  Matrix x;
  std::vector<int> block;
  if (spec.id == "s1") {
    auto [xs, blocks] = gen_s1_covariates(rng);
    x = xs;
    block = blocks;
  } else if (spec.id == "prior-sim") {
    x = gen_prior_sim_covariates(spec.n, rng);
    block.assign(spec.n, -1);
  } else {
    x = gen_s2_s3_covariates(spec.n, spec.q, rng);
    block.assign(spec.n, -1);
    if (spec.id == "s2" || spec.id == "s3") {
      // latent structure: component of the first two-component-mixture column
      int mix_col = 4 * (spec.q / 5);
      for (int i = 0; i < spec.n; ++i) block[i] = x(i, mix_col) > 5.0 ? 1 : 0;
    }
  }

  // shuffle patient order, then split train / test
  std::vector<int> perm(spec.n);
  std::iota(perm.begin(), perm.end(), 0);
  for (int i = spec.n - 1; i > 0; --i) std::swap(perm[i], perm[rng.uniform_int(i + 1)]);
  Matrix xs(spec.n, x.cols());
  std::vector<int> blocks(spec.n);
  for (int i = 0; i < spec.n; ++i) {
    xs.row(i) = x.row(perm[i]);
    blocks[i] = block[perm[i]];
  }

  Matrix z(spec.n, spec.p);
  for (int i = 0; i < spec.n; ++i)
    for (int j = 0; j < spec.p; ++j) z(i, j) = rng.normal();

  GeneratedDataset out;
  out.truth.resize(spec.n);
  if (spec.id == "prior-sim") {
    // covariates only; no response mechanism
    for (int i = 0; i < spec.n; ++i) {
      auto& t = out.truth[i];
      t.id = "p" + std::to_string(i + 1);
      t.true_block = blocks[i];
      t.received_arm = 1;
      t.orp = Matrix::Zero(1, spec.k);
      t.mtu = Vector::Zero(1);
    }
    std::vector<int> rows(spec.n);
    std::iota(rows.begin(), rows.end(), 0);
    out.train = build_cohort(out.truth, xs, z, rows, spec.k, 1);
    return out;
  }

  // response-generating covariate sets; with partial overlap the test-set
  // responses depend on a shifted column subset
  const int qg = spec.overlap >= 1.0
                     ? spec.q
                     : static_cast<int>(std::floor(spec.q / (2.0 - spec.overlap)));
  const int shared = static_cast<int>(std::lround(spec.overlap * qg));
  std::vector<int> train_cols(qg), test_cols;
  std::iota(train_cols.begin(), train_cols.end(), 0);
  for (int j = 0; j < shared; ++j) test_cols.push_back(j);
  for (int j = 0; j < qg - shared; ++j) {
    if (qg + j >= spec.q) throw std::invalid_argument("scenario: not enough covariates for overlap");
    test_cols.push_back(qg + j);
  }

  std::vector<int> train_rows(spec.n_train), test_rows(spec.n_test);
  std::iota(train_rows.begin(), train_rows.end(), 0);
  std::iota(test_rows.begin(), test_rows.end(), spec.n_train);

  auto subset = [&](const std::vector<int>& rows, const std::vector<int>& cols) {
    Matrix m(rows.size(), cols.size());
    for (std::size_t i = 0; i < rows.size(); ++i)
      for (std::size_t j = 0; j < cols.size(); ++j) m(i, j) = xs(rows[i], cols[j]);
    return m;
  };
  Matrix train_gen = subset(train_rows, train_cols);
  Vector psi_train = psi_summary(train_gen, train_gen);
  Vector psi_test;
  if (spec.n_test > 0) {
    Matrix fit = subset(train_rows, test_cols);
    psi_test = psi_summary(fit, subset(test_rows, test_cols));
  }

  std::vector<int> arms_train = assign_arms(spec.n_train, spec.t, rng);
  std::vector<int> arms_test = assign_arms(spec.n_test, spec.t, rng);

  for (int i = 0; i < spec.n; ++i) {
    auto& t = out.truth[i];
    const bool test = i >= spec.n_train;
    t.id = "p" + std::to_string(i + 1);
    t.is_test = test;
    t.true_block = blocks[i];
    t.received_arm = test ? arms_test[i - spec.n_train] : arms_train[i];
    double psi = test ? psi_test(i - spec.n_train) : psi_train(i);
    double psi3 = psi * psi * psi;

    Vector prog_logits = spec.coeffs.iota + spec.coeffs.chi * z.row(i).transpose();
    Vector p_prog = continuation_ratio_probs(prog_logits);

    t.orp = Matrix::Zero(spec.t, spec.k);
    t.mtu = Vector::Zero(spec.t);
    for (int a = 0; a < spec.t; ++a) {
      Vector pred_logits = spec.coeffs.alpha[a] + spec.coeffs.phi[a] * psi3;
      Vector p_pred = continuation_ratio_probs(pred_logits);
      Vector lo = log_orp(spec.omega, p_pred, p_prog);
      t.orp.row(a) = lo.array().exp();
      t.mtu(a) = spec.omega.dot(t.orp.row(a).transpose());
    }
    Eigen::Index best;
    t.mtu.maxCoeff(&best);
    t.optimal_arm = static_cast<int>(best) + 1;
    t.tie = false;
    for (int a = 0; a < spec.t; ++a)
      if (a != best && std::abs(t.mtu(a) - t.mtu(best)) <= 1e-12 * std::max(1.0, t.mtu(best)))
        t.tie = true;

    // observed response under the received arm
    Vector p = t.orp.row(t.received_arm - 1);
    double u = rng.uniform(), cum = 0.0;
    t.y = spec.k;
    for (int j = 0; j < spec.k; ++j) {
      cum += p(j);
      if (u <= cum) {
        t.y = j + 1;
        break;
      }
    }
  }

  out.train = build_cohort(out.truth, xs, z, train_rows, spec.k, spec.t);
  if (spec.n_test > 0) out.test = build_cohort(out.truth, xs, z, test_rows, spec.k, spec.t);
  return out;
}

}  // namespace ppmx
