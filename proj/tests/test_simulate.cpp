#include <doctest.h>

#include <cmath>
#include <set>

#include "ppmx/metrics.hpp"
#include "ppmx/simulate.hpp"
#include "test_support.hpp"

using namespace ppmx;
using namespace ppmx::testing;

TEST_CASE("prior-sim covariate mixture moments and determinism") {
  Rng rng(41);
  const int n = 30000;
  Matrix x = gen_prior_sim_covariates(n, rng);
  // column mean 0.2*(-2.1) + 0.5*0 + 0.3*2.3 = 0.27; element variance ~2.9
  double se = std::sqrt(2.9 / n);
  for (int q = 0; q < 5; ++q) CHECK(std::abs(x.col(q).mean() - 0.27) < 3 * se);

  Rng r1(7), r2(7);
  CHECK(gen_prior_sim_covariates(20, r1).isApprox(gen_prior_sim_covariates(20, r2)));

  // component counts for n = 50 average (10, 25, 15); classify by nearest mean
  const int reps = 300;
  Vector counts = Vector::Zero(3);
  Rng rng2(42);
  for (int r = 0; r < reps; ++r) {
    Matrix xs = gen_prior_sim_covariates(50, rng2);
    for (int i = 0; i < 50; ++i) {
      double m = xs.row(i).mean();
      int comp = std::abs(m + 2.1) < std::abs(m) ? 0 : (std::abs(m - 2.3) < std::abs(m) ? 2 : 1);
      counts(comp) += 1.0;
    }
  }
  counts /= reps;
  CHECK(std::abs(counts(0) - 10.0) < 0.5);
  CHECK(std::abs(counts(1) - 25.0) < 0.6);
  CHECK(std::abs(counts(2) - 15.0) < 0.5);
}

TEST_CASE("s1 covariates: sizes, Bernoulli means, three blocks") {
  Rng rng(43);
  auto [x, block] = gen_s1_covariates(rng);
  CHECK(x.rows() == 200);
  CHECK(x.cols() == 4);
  std::vector<int> sizes(3, 0);
  for (int b : block) ++sizes[b];
  CHECK(sizes == std::vector<int>{75, 75, 50});
  CHECK(std::set<int>(block.begin(), block.end()).size() == 3);

  double g1_x3 = 0;
  for (int i = 0; i < 75; ++i) g1_x3 += x(i, 2);
  g1_x3 /= 75;
  CHECK(std::abs(g1_x3 - 0.1) < 3 * std::sqrt(0.1 * 0.9 / 75));
  double g1_mean_x1 = x.col(0).head(75).mean();
  CHECK(std::abs(g1_mean_x1 + 3.0) < 3 * std::sqrt(0.5 / 75));
}

TEST_CASE("s2/s3 covariate families: bounds, kurtosis, bimodality") {
  Rng rng(44);
  const int n = 10000;
  Matrix x = gen_s2_s3_covariates(n, 10, rng);

  // uniform family bounded in [0, 10]
  for (int q = 2; q <= 3; ++q) {
    CHECK(x.col(q).minCoeff() >= 0.0);
    CHECK(x.col(q).maxCoeff() <= 10.0);
  }
  // t4 family: positive sample excess kurtosis
  for (int q = 4; q <= 5; ++q) {
    double m = x.col(q).mean();
    double m2 = (x.col(q).array() - m).square().mean();
    double m4 = (x.col(q).array() - m).pow(4).mean();
    CHECK(m4 / (m2 * m2) - 3.0 > 0.5);
  }
  // mixture family bimodal: a two-peak dip statistic against a normal reference
  auto dip = [](const Vector& col) {
    const int bins = 40;
    double lo = col.minCoeff(), hi = col.maxCoeff() + 1e-9;
    std::vector<double> h(bins, 0.0);
    for (int i = 0; i < col.size(); ++i)
      h[static_cast<int>((col(i) - lo) / (hi - lo) * bins)] += 1.0 / col.size();
    int b1 = 0;
    for (int b = 0; b < bins; ++b)
      if (h[b] > h[b1]) b1 = b;
    int b2 = -1;
    for (int b = 0; b < bins; ++b)
      if (std::abs(b - b1) >= 10 && (b2 < 0 || h[b] > h[b2])) b2 = b;
    double valley = 1.0;
    for (int b = std::min(b1, b2); b <= std::max(b1, b2); ++b) valley = std::min(valley, h[b]);
    return std::min(h[b1], h[b2]) - valley;
  };
  Vector normal_ref(n);
  Rng rng2(45);
  for (int i = 0; i < n; ++i) normal_ref(i) = rng2.normal();
  for (int q = 8; q <= 9; ++q) CHECK(dip(x.col(q)) > dip(normal_ref) + 0.01);
  // skew-normal family lives right of its location parameter's tail
  CHECK(x.col(6).mean() > 10.0);
}

TEST_CASE("continuation ratio probabilities: inversion oracle and flat case") {
  Vector zero = Vector::Zero(2);
  Vector p = continuation_ratio_probs(zero);
  CHECK(p(0) == doctest::Approx(0.25).epsilon(1e-12));
  CHECK(p(1) == doctest::Approx(0.25).epsilon(1e-12));
  CHECK(p(2) == doctest::Approx(0.5).epsilon(1e-12));

  Rng rng(46);
  for (int rep = 0; rep < 50; ++rep) {
    Vector r(2);
    r << 3.0 * rng.normal(), 3.0 * rng.normal();
    Vector q = continuation_ratio_probs(r);
    CHECK(q.sum() == doctest::Approx(1.0).epsilon(1e-12));
    // invert the definition directly: r_k = log(p_k / p_{<k})
    CHECK(std::log(q(1) / q(0)) == doctest::Approx(r(0)).epsilon(1e-9));
    CHECK(std::log(q(2) / (q(0) + q(1))) == doctest::Approx(r(1)).epsilon(1e-9));
  }
}

TEST_CASE("paper default generator coefficients") {
  CrCoefficients c = CrCoefficients::defaults();
  CHECK(c.alpha[0](0) == -0.5);
  CHECK(c.alpha[0](1) == -1.0);
  CHECK(c.alpha[1](0) == 0.7);
  CHECK(c.phi[0](0) == 1.5);
  CHECK(c.phi[0](1) == 2.0);
  CHECK(c.iota(0) == 1.0);
  CHECK(c.iota(1) == -0.5);
  CHECK(c.chi(0, 0) == 1.0);
  CHECK(c.chi(0, 1) == 0.5);
  CHECK(c.chi(1, 0) == 0.7);
  CHECK(c.chi(1, 1) == 1.0);
}

TEST_CASE("ordinal response probabilities: hand evaluation and properties") {
  Vector omega(3);
  omega << 0, 40, 100;
  Vector p_pred(3), p_prog(3);
  p_pred << 0.2, 0.3, 0.5;
  p_prog << 0.1, 0.6, 0.3;
  Vector orp = ordinal_response_probs(omega, p_pred, p_prog);
  // by hand: weights (0, 40*0.18, 100*0.15) = (0, 7.2, 15) -> /22.2
  CHECK(orp(0) == doctest::Approx(0.0));
  CHECK(orp(1) == doctest::Approx(7.2 / 22.2).epsilon(1e-10));
  CHECK(orp(2) == doctest::Approx(15.0 / 22.2).epsilon(1e-10));
  CHECK(orp.sum() == doctest::Approx(1.0).epsilon(1e-12));
}

TEST_CASE("scenario generation: shapes, splits, determinism, slope-free case") {
  ScenarioSpec spec = ScenarioSpec::preset("s1");
  spec.seed = 99;
  GeneratedDataset ds = generate_scenario(spec);
  CHECK(ds.train.total_n() == 170);
  CHECK(ds.test.total_n() == 30);
  CHECK(static_cast<int>(ds.truth.size()) == 200);
  CHECK(ds.train.K == 3);
  CHECK(ds.train.P == 2);
  CHECK(ds.train.Q == 4);

  // split disjoint and exhaustive by id
  std::set<std::string> ids;
  for (const auto& arm : ds.train.arms) ids.insert(arm.ids.begin(), arm.ids.end());
  for (const auto& arm : ds.test.arms) ids.insert(arm.ids.begin(), arm.ids.end());
  CHECK(ids.size() == 200);

  // ORP rows on the simplex; optimal arm consistent with utilities
  for (const auto& p : ds.truth) {
    for (int a = 0; a < 2; ++a)
      CHECK(p.orp.row(a).sum() == doctest::Approx(1.0).epsilon(1e-10));
    Eigen::Index best;
    p.mtu.maxCoeff(&best);
    CHECK(p.optimal_arm == static_cast<int>(best) + 1);
    CHECK(p.true_block >= 0);
  }

  GeneratedDataset ds2 = generate_scenario(spec);
  CHECK(ds2.truth.size() == ds.truth.size());
  for (std::size_t i = 0; i < ds.truth.size(); ++i) {
    CHECK(ds2.truth[i].y == ds.truth[i].y);
    CHECK(ds2.truth[i].received_arm == ds.truth[i].received_arm);
    CHECK(ds2.truth[i].orp.isApprox(ds.truth[i].orp));
  }

  // identical arms force utility ties everywhere
  ScenarioSpec tie_spec = spec;
  tie_spec.coeffs.alpha[1] = tie_spec.coeffs.alpha[0];
  tie_spec.coeffs.phi[1] = tie_spec.coeffs.phi[0];
  GeneratedDataset tied = generate_scenario(tie_spec);
  for (const auto& p : tied.truth) CHECK(p.tie);

  // zero slopes: probabilities ignore the covariates
  ScenarioSpec flat = spec;
  flat.coeffs.phi[0].setZero();
  flat.coeffs.phi[1].setZero();
  flat.coeffs.chi.setZero();
  GeneratedDataset fd = generate_scenario(flat);
  for (std::size_t i = 1; i < fd.truth.size(); ++i)
    CHECK(fd.truth[i].orp.isApprox(fd.truth[0].orp, 1e-12));
}

TEST_CASE("cr-logistic preset dimensions") {
  ScenarioSpec spec = ScenarioSpec::preset("cr-logistic");
  spec.seed = 5;
  CHECK(spec.n == 152);
  CHECK(spec.n_train == 124);
  CHECK(spec.n_test == 28);
  GeneratedDataset ds = generate_scenario(spec);
  CHECK(ds.train.total_n() == 124);
  CHECK(ds.test.total_n() == 28);
  CHECK(ds.train.Q == 25);
}

TEST_CASE("metric fixtures: MOT") {
  std::vector<int> opt{1, 2, 1, 2, 1};
  CHECK(metric_mot(opt, opt) == 0);
  std::vector<int> flipped{2, 1, 2, 1, 2};
  CHECK(metric_mot(flipped, opt) == 5);
  std::vector<int> two_wrong{1, 1, 1, 1, 1};
  CHECK(metric_mot(two_wrong, opt) == 2);
}

TEST_CASE("metric fixtures: pct delta MTU including boundaries") {
  Matrix util(2, 2);
  util << 50, 60, 80, 50;  // gaps 10 and 30
  std::vector<int> optimal{2, 1};
  CHECK(metric_pct_delta_mtu(optimal, optimal, util).value == doctest::Approx(1.0));
  std::vector<int> wrong{1, 2};
  CHECK(metric_pct_delta_mtu(wrong, optimal, util).value == doctest::Approx(-1.0));
  std::vector<int> mixed{2, 2};  // first right (gap 10), second wrong (gap 30)
  auto r = metric_pct_delta_mtu(mixed, optimal, util);
  CHECK(r.defined);
  CHECK(r.value == doctest::Approx(-0.5).epsilon(1e-12));

  Matrix equal_util = Matrix::Constant(2, 2, 40.0);
  CHECK_FALSE(metric_pct_delta_mtu(optimal, optimal, equal_util).defined);
}

TEST_CASE("metric fixtures: NPC") {
  std::vector<int> obs{1, 2, 3, 1, 2, 3, 1};
  CHECK(metric_npc(obs, obs) == 7);
  std::vector<int> none{2, 3, 1, 2, 3, 1, 2};
  CHECK(metric_npc(none, obs) == 0);
  std::vector<int> three{1, 2, 3, 2, 3, 1, 2};
  CHECK(metric_npc(three, obs) == 3);
}

TEST_CASE("metric fixtures: ESM") {
  // perfect oracle, arm 2 always cures, 50/50 allocation
  std::vector<int> outcome{0, 0, 1, 1}, received{1, 1, 2, 2}, rec_all2{2, 2, 2, 2};
  auto oracle = metric_esm(outcome, received, rec_all2);
  CHECK(oracle.value == doctest::Approx(0.5).epsilon(1e-12));

  // 8-patient hand-tabulated case: ESM = 3/8*1/2 + 5/8*2/3 - 1/2 = 5/48
  std::vector<int> y{1, 0, 1, 0, 0, 1, 1, 0};
  std::vector<int> got{1, 1, 1, 1, 2, 2, 2, 2};
  std::vector<int> rec{1, 1, 2, 2, 1, 2, 2, 2};
  auto hand = metric_esm(y, got, rec);
  CHECK(hand.value == doctest::Approx(5.0 / 48).epsilon(1e-12));
  CHECK(hand.empty_terms == 0);

  // recommendation independent of outcome -> ESM near zero
  Rng rng(47);
  const int n = 20000;
  std::vector<int> yy(n), gg(n), rr(n);
  for (int i = 0; i < n; ++i) {
    yy[i] = rng.uniform() < 0.4;
    gg[i] = 1 + rng.uniform_int(2);
    rr[i] = 1 + rng.uniform_int(2);
  }
  CHECK(std::abs(metric_esm(yy, gg, rr).value) < 3.0 * 0.5 / std::sqrt(n));

  // empty agreement subset contributes zero with a warning
  std::vector<int> all_rec2{2, 2, 2, 2}, all_got1{1, 1, 1, 1}, out01{1, 0, 1, 0};
  auto empty = metric_esm(out01, all_got1, all_rec2);
  CHECK(empty.empty_terms == 1);
  CHECK(empty.value == doctest::Approx(-0.5));
}
