// Timing comparison of the OpenMP kernels against their serial references.
#include <chrono>
#include <cstdio>

#include <omp.h>

#include "ppmx/cohesion.hpp"
#include "ppmx/predict.hpp"
#include "ppmx/simulate.hpp"
#include "ppmx/summary.hpp"

using namespace ppmx;
using clock_type = std::chrono::steady_clock;

namespace {

template <typename F>
double time_ms(F&& f) {
  auto t0 = clock_type::now();
  f();
  auto t1 = clock_type::now();
  return std::chrono::duration<double, std::milli>(t1 - t0).count();
}

std::vector<std::vector<int>> random_draws(int n, int s, Rng& rng) {
  std::vector<std::vector<int>> draws(s, std::vector<int>(n));
  for (auto& d : draws) {
    int c = 3 + rng.uniform_int(8);
    for (int i = 0; i < n; ++i) d[i] = rng.uniform_int(c);
    d[0] = 0;  // keep label 0 occupied
  }
  for (auto& d : draws) d = canonical_labels(d);
  return draws;
}

}  // namespace

int main() {
  std::printf("threads: %d\n", omp_get_max_threads());
  Rng rng(7);

  {
    auto draws = random_draws(150, 1500, rng);
    Matrix a, b;
    double ts = time_ms([&] { a = cooccurrence_serial(draws); });
    double tp = time_ms([&] { b = cooccurrence(draws); });
    std::printf("cooccurrence        serial %8.1f ms   omp %8.1f ms   max|diff| %.2e\n", ts, tp,
                (a - b).cwiseAbs().maxCoeff());
  }
  {
    auto draws = random_draws(120, 800, rng);
    std::vector<int> a, b;
    double ts = time_ms([&] { a = point_estimate_partition_serial(draws); });
    double tp = time_ms([&] { b = point_estimate_partition(draws); });
    std::printf("vi point estimate   serial %8.1f ms   omp %8.1f ms   equal %d\n", ts, tp,
                int(a == b));
  }
  {
    // small fitted trace + batch prediction
    ScenarioSpec spec = ScenarioSpec::preset("s1");
    spec.seed = 11;
    auto ds = generate_scenario(spec);
    MCMCConfig cfg;
    cfg.iterations = 600;
    cfg.burnin = 100;
    cfg.thinning = 5;
    cfg.seed = 1;
    TraceStore trace = run_chain(ds.train, cfg);
    PredictionConfig pc;
    pc.omega.omega = (Vector(3) << 0, 40, 100).finished();
    Matrix z(ds.test.arms[0].z.rows() + ds.test.arms[1].z.rows(), ds.test.P);
    Matrix x(z.rows(), ds.test.Q);
    std::vector<std::string> ids;
    int r = 0;
    for (const auto& arm : ds.test.arms)
      for (int i = 0; i < arm.n(); ++i, ++r) {
        z.row(r) = arm.z.row(i);
        x.row(r) = arm.x.row(i);
        ids.push_back(arm.ids[i]);
      }
    std::vector<PatientPrediction> a, b;
    double ts = time_ms([&] { a = predict_patients_serial(trace, z, x, ids, pc); });
    double tp = time_ms([&] { b = predict_patients(trace, z, x, ids, pc); });
    bool equal = a.size() == b.size();
    for (std::size_t i = 0; equal && i < a.size(); ++i)
      equal = a[i].recommended == b[i].recommended && a[i].phi == b[i].phi;
    std::printf("batch prediction    serial %8.1f ms   omp %8.1f ms   equal %d\n", ts, tp,
                int(equal));
  }
  {
    LogVTable table;
    auto run_prior = [&](bool parallel) {
      double sum = 0;
#pragma omp parallel for schedule(dynamic) reduction(+ : sum) if (parallel)
      for (int r = 0; r < 2000; ++r) {
        Rng rr = Rng::stream(3, r);
        auto lab = sample_prior_partition(50, 0.7353, 0.7353, table, rr);
        sum += 1 + *std::max_element(lab.begin(), lab.end());
      }
      return sum;
    };
    double s1 = 0, s2 = 0;
    double ts = time_ms([&] { s1 = run_prior(false); });
    double tp = time_ms([&] { s2 = run_prior(true); });
    std::printf("prior simulation    serial %8.1f ms   omp %8.1f ms   equal %d\n", ts, tp,
                int(s1 == s2));
  }
  return 0;
}
