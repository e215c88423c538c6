#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <optional>

#include <CLI11.hpp>
#include <json.hpp>
#include <omp.h>

#include "ppmx/cohesion.hpp"
#include "ppmx/engine.hpp"
#include "ppmx/io.hpp"
#include "ppmx/mathutil.hpp"
#include "ppmx/metrics.hpp"
#include "ppmx/predict.hpp"
#include "ppmx/simulate.hpp"
#include "ppmx/summary.hpp"

namespace fs = std::filesystem;
using nlohmann::json;
using namespace ppmx;

namespace {

Vector parse_omega(const std::string& s) {
  std::vector<double> vals;
  std::string cur;
  for (char ch : s + ",") {
    if (ch == ',') {
      vals.push_back(parse_double(cur, "--omega"));
      cur.clear();
    } else {
      cur.push_back(ch);
    }
  }
  Vector om(vals.size());
  for (std::size_t i = 0; i < vals.size(); ++i) om(i) = vals[i];
  return om;
}

json load_json(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open config file: " + path);
  json j;
  in >> j;
  return j;
}

// per-arm cluster-count trace, a PSRF-monitored scalar alongside each beta
Matrix monitored_scalars(const TraceStore& tr) {
  const int m = tr.P * tr.K + tr.T;
  Matrix out(tr.kept(), m);
  for (int s = 0; s < tr.kept(); ++s) {
    int c = 0;
    for (int p = 0; p < tr.P; ++p)
      for (int k = 0; k < tr.K; ++k) out(s, c++) = tr.beta[s](p, k);
    for (int a = 0; a < tr.T; ++a) out(s, c++) = static_cast<double>(tr.arms[a][s].eta.rows());
  }
  return out;
}

int cmd_fit(const std::string& config_path, const std::string& data_path,
            const std::string& out_dir, std::uint64_t seed, const json& overrides) {
  MCMCConfig cfg;
  if (!config_path.empty()) cfg = config_from_json(load_json(config_path));
  cfg = config_from_json(overrides, cfg);
  cfg.seed = seed;

  CohortData data = read_cohort_csv(data_path);
  std::vector<TraceStore> chains;
  for (int c = 0; c < cfg.chains; ++c) {
    MCMCConfig chain_cfg = cfg;
    chain_cfg.seed = cfg.chains == 1 ? seed : derive_chain_seed(seed, c);
    chains.push_back(run_chain(data, chain_cfg));
  }

  json report;
  report["kept_per_chain"] = chains[0].kept();
  Matrix pooled_ll = pool_chains(chains).loglik;
  report["lpml"] = compute_lpml(pooled_ll);
  report["waic"] = compute_waic(pooled_ll);
  json acc = json::array();
  for (int a = 0; a < data.arm_count(); ++a) {
    double rate = 0.0;
    for (const auto& ch : chains) rate += ch.accept_arm[a].eta_rate();
    acc.push_back(rate / chains.size());
  }
  report["eta_acceptance"] = acc;
  double beta_rate = 0.0;
  long long cap_hits = 0, jitters = 0;
  for (const auto& ch : chains) {
    beta_rate += ch.accept_beta.beta_rate();
    cap_hits += ch.warnings.exp_cap_hits;
    jitters += ch.warnings.scale_jitter;
  }
  report["beta_acceptance"] = data.P > 0 ? beta_rate / chains.size() : 0.0;
  report["warnings"] = {{"exp_cap_hits", cap_hits}, {"scale_jitter", jitters}};
  if (cfg.chains >= 2) {
    std::vector<Matrix> scalars;
    for (const auto& ch : chains) scalars.push_back(monitored_scalars(ch));
    auto psrf = compute_psrf(scalars);
    report["psrf"] = psrf;
    report["psrf_max"] = *std::max_element(psrf.begin(), psrf.end());
  }

  write_run(out_dir, data, cfg, chains, report);
  {
    std::ofstream rep(out_dir + "/report.txt");
    rep << "fit report\n==========\n";
    rep << "data: " << data_path << "\n";
    rep << "arms: " << data.arm_count() << "  n: " << data.total_n() << "  K: " << data.K
        << "  P: " << data.P << "  Q: " << data.Q << "\n";
    rep << "chains: " << cfg.chains << "  kept per chain: " << chains[0].kept() << "\n";
    rep << "lpml: " << report["lpml"] << "\nwaic: " << report["waic"] << "\n";
    rep << "eta acceptance:";
    for (const auto& r : report["eta_acceptance"]) rep << " " << r;
    rep << "\nbeta acceptance: " << report["beta_acceptance"] << "\n";
    if (report.contains("psrf_max")) rep << "max PSRF: " << report["psrf_max"] << "\n";
    rep << "exp-cap warnings: " << cap_hits << "\nscale jitter warnings: " << jitters << "\n";
  }
  std::cout << "fit written to " << out_dir << " (lpml " << report["lpml"] << ", waic "
            << report["waic"] << ")\n";
  return 0;
}

int cmd_predict(const std::string& trace_dir, const std::string& newdata_path,
                const std::string& out_path, std::uint64_t seed,
                const std::optional<std::string>& omega_arg, bool median_of_utility) {
  LoadedRun run = load_run(trace_dir);
  TraceStore trace = pool_chains(run.chains);

  PredictionConfig pc;
  pc.seed = seed;
  pc.m_slots = run.config.m_standby;
  pc.v_ratio = run.config.v_ratio;
  pc.sim = run.config.effective_sim();
  pc.exp_cap = run.config.hyper.exp_cap;
  pc.median_of_utility = median_of_utility || run.config.median_of_utility;
  pc.omega.omega = omega_arg ? parse_omega(*omega_arg)
                             : (Vector(3) << 0.0, 40.0, 100.0).finished();
  if (run.meta.contains("omega") && !omega_arg) {
    const auto& om = run.meta["omega"];
    pc.omega.omega.resize(om.size());
    for (std::size_t i = 0; i < om.size(); ++i) pc.omega.omega(i) = om[i];
  }

  NewData nd = read_newdata_csv(newdata_path, trace.P, trace.Q);
  std::vector<Recommendation> recs;
  if (!nd.ids.empty()) {
    auto preds = predict_patients(trace, nd.z, nd.x, nd.ids, pc);
    for (const auto& p : preds)
      recs.push_back({p.id, p.phi, p.recommended, p.tie, p.median_probs});
  }
  write_recommendations_csv(out_path, recs);
  json meta;
  meta["trace"] = trace_dir;
  meta["newdata"] = newdata_path;
  meta["seed"] = seed;
  meta["median_of_utility"] = pc.median_of_utility;
  json om = json::array();
  for (int k = 0; k < pc.omega.omega.size(); ++k) om.push_back(pc.omega.omega(k));
  meta["omega"] = om;
  std::ofstream(out_path + ".meta.json") << meta.dump(2) << "\n";
  std::cout << "wrote " << recs.size() << " recommendations to " << out_path << "\n";
  return 0;
}

int cmd_simulate(const std::string& scenario, std::uint64_t seed, const std::string& out_dir,
                 const json& overrides) {
  ScenarioSpec spec = ScenarioSpec::preset(scenario);
  spec.seed = seed;
  if (overrides.contains("n")) {
    spec.n = overrides["n"];
    spec.n_train = spec.n - spec.n_test;
  }
  if (overrides.contains("q")) spec.q = overrides["q"];
  if (overrides.contains("p")) spec.p = overrides["p"];
  if (overrides.contains("train")) spec.n_train = overrides["train"];
  if (overrides.contains("test")) spec.n_test = overrides["test"];
  if (overrides.contains("overlap")) spec.overlap = overrides["overlap"];
  if (overrides.contains("omega")) {
    const auto& om = overrides["omega"];
    spec.omega.resize(om.size());
    for (std::size_t i = 0; i < om.size(); ++i) spec.omega(i) = om[i];
  }

  GeneratedDataset ds = generate_scenario(spec);
  fs::create_directories(out_dir);
  write_cohort_csv(out_dir + "/train.csv", ds.train);
  if (spec.n_test > 0) {
    write_cohort_csv(out_dir + "/test.csv", ds.test);
    // prediction-schema view of the test set
    auto out = std::ofstream(out_dir + "/newdata.csv");
    out << "id";
    for (int j = 1; j <= ds.test.P; ++j) out << ",z_" << j;
    for (int j = 1; j <= ds.test.Q; ++j) out << ",x_" << j;
    out << "\n";
    for (int a = 0; a < ds.test.arm_count(); ++a)
      for (int i = 0; i < ds.test.arms[a].n(); ++i) {
        out << ds.test.arms[a].ids[i];
        for (int j = 0; j < ds.test.P; ++j)
          out << ',' << format_double(ds.test.arms[a].z(i, j));
        for (int j = 0; j < ds.test.Q; ++j)
          out << ',' << format_double(ds.test.arms[a].x(i, j));
        out << "\n";
      }
  }
  if (scenario != "prior-sim") {
    write_truth_csv(out_dir + "/truth.csv", ds, false);
    write_orp_csv(out_dir + "/orp.csv", ds);
  }
  bool has_blocks = false;
  for (const auto& p : ds.truth) has_blocks = has_blocks || p.true_block >= 0;
  if (has_blocks) write_partition_csv(out_dir + "/partition.csv", ds);

  if (scenario == "prior-sim") {
    // histogram of the prior cluster count under the paper's NGGP-sim setup
    LogVTable table;
    SimilarityParams sim;
    Rng rng = Rng::stream(seed, 99);
    Matrix x = Standardizer::fit(ds.train.arms[0].x).apply(ds.train.arms[0].x);
    std::map<int, int> hist;
    for (int r = 0; r < 2000; ++r) {
      auto labels = sample_prior_partition(spec.n, 0.7353, 0.7353, table, rng, &x, &sim);
      int c = *std::max_element(labels.begin(), labels.end()) + 1;
      ++hist[c];
    }
    auto out = std::ofstream(out_dir + "/cluster_histogram.csv");
    out << "clusters,count\n";
    for (auto& [c, cnt] : hist) out << c << ',' << cnt << "\n";
  }

  json meta;
  meta["scenario"] = scenario;
  meta["seed"] = seed;
  meta["n"] = spec.n;
  meta["q"] = spec.q;
  meta["p"] = spec.p;
  meta["train"] = spec.n_train;
  meta["test"] = spec.n_test;
  meta["overlap"] = spec.overlap;
  json om = json::array();
  for (int k = 0; k < spec.omega.size(); ++k) om.push_back(spec.omega(k));
  meta["omega"] = om;
  std::ofstream(out_dir + "/meta.json") << meta.dump(2) << "\n";
  std::cout << "scenario " << scenario << " written to " << out_dir << "\n";
  return 0;
}

struct TruthRow {
  bool is_test;
  int arm, y, optimal, tie;
  std::vector<double> mtu;
};

std::map<std::string, TruthRow> read_truth(const std::string& path) {
  CsvTable t = read_csv(path);
  int c_id = t.require("id"), c_test = t.require("is_test"), c_arm = t.require("arm");
  int c_y = t.require("response"), c_opt = t.require("optimal_arm"), c_tie = t.require("tie");
  int t_arms = 0;
  while (t.col("mtu_" + std::to_string(t_arms + 1)) >= 0) ++t_arms;
  std::map<std::string, TruthRow> out;
  for (const auto& row : t.rows) {
    TruthRow tr;
    tr.is_test = row[c_test] == "1";
    tr.arm = static_cast<int>(std::stol(row[c_arm]));
    tr.y = static_cast<int>(std::stol(row[c_y]));
    tr.optimal = static_cast<int>(std::stol(row[c_opt]));
    tr.tie = row[c_tie] == "1" ? 1 : 0;
    for (int a = 1; a <= t_arms; ++a)
      tr.mtu.push_back(parse_double(row[t.require("mtu_" + std::to_string(a))], "mtu"));
    out[row[c_id]] = tr;
  }
  return out;
}

int cmd_evaluate(const std::string& rec_path, const std::string& truth_path,
                 const std::string& out_path, const std::string& trace_dir,
                 const std::string& partition_path) {
  auto recs = read_recommendations_csv(rec_path);
  auto truth = read_truth(truth_path);

  std::vector<int> recommended, optimal, predicted, observed, received, outcome01;
  Matrix utilities(recs.size(), 2);
  for (std::size_t i = 0; i < recs.size(); ++i) {
    auto it = truth.find(recs[i].id);
    if (it == truth.end())
      throw std::invalid_argument("evaluate: id '" + recs[i].id + "' missing from truth file");
    const TruthRow& tr = it->second;
    recommended.push_back(recs[i].recommended);
    optimal.push_back(tr.optimal);
    received.push_back(tr.arm);
    observed.push_back(tr.y);
    if (static_cast<int>(tr.mtu.size()) != 2)
      throw std::invalid_argument("evaluate: %dMTU requires exactly 2 arms");
    utilities(i, 0) = tr.mtu[0];
    utilities(i, 1) = tr.mtu[1];
    const int k_levels = static_cast<int>(recs[i].median_probs.cols());
    Eigen::Index best;
    recs[i].median_probs.row(tr.arm - 1).maxCoeff(&best);
    predicted.push_back(static_cast<int>(best) + 1);
    outcome01.push_back(tr.y == k_levels ? 1 : 0);
  }

  json metrics;
  metrics["n"] = recs.size();
  metrics["mot"] = metric_mot(recommended, optimal);
  auto dm = metric_pct_delta_mtu(recommended, optimal, utilities);
  metrics["pct_delta_mtu"] = dm.defined ? json(dm.value) : json();
  metrics["pct_delta_mtu_defined"] = dm.defined;
  metrics["npc"] = metric_npc(predicted, observed);
  auto esm = metric_esm(outcome01, received, recommended);
  metrics["esm"] = esm.value;
  metrics["esm_empty_terms"] = esm.empty_terms;

  if (!trace_dir.empty() && !partition_path.empty()) {
    LoadedRun run = load_run(trace_dir);
    TraceStore trace = pool_chains(run.chains);
    CsvTable pt = read_csv(partition_path);
    int c_id = pt.require("id"), c_block = pt.require("block");
    std::map<std::string, int> blocks;
    for (const auto& row : pt.rows)
      blocks[row[c_id]] = static_cast<int>(std::stol(row[c_block]));
    json ari = json::array();
    for (int a = 0; a < trace.T; ++a) {
      std::vector<std::vector<int>> draws;
      for (const auto& d : trace.arms[a]) draws.push_back(d.labels);
      auto point = point_estimate_partition(draws);
      std::vector<int> truth_labels;
      for (const auto& id : trace.ids[a]) {
        auto it = blocks.find(id);
        if (it == blocks.end())
          throw std::invalid_argument("evaluate: id '" + id + "' missing from partition file");
        truth_labels.push_back(it->second);
      }
      ari.push_back(adjusted_rand_index(point, truth_labels));
    }
    metrics["ari"] = ari;
  }

  {
    auto out = std::ofstream(out_path);
    out << "metric,value\n";
    out << "n," << metrics["n"] << "\n";
    out << "mot," << metrics["mot"] << "\n";
    out << "pct_delta_mtu," << (dm.defined ? format_double(dm.value) : "undefined") << "\n";
    out << "npc," << metrics["npc"] << "\n";
    out << "esm," << format_double(esm.value) << "\n";
    if (metrics.contains("ari"))
      for (std::size_t a = 0; a < metrics["ari"].size(); ++a)
        out << "ari_" << (a + 1) << "," << format_double(metrics["ari"][a]) << "\n";
  }
  std::ofstream(out_path + ".summary.txt")
      << "evaluation over " << recs.size() << " patients\n"
      << "  MOT  " << metrics["mot"] << "\n"
      << "  %dMTU " << (dm.defined ? format_double(dm.value) : "undefined (all gaps zero)")
      << "\n"
      << "  NPC  " << metrics["npc"] << "\n"
      << "  ESM  " << format_double(esm.value)
      << (esm.empty_terms ? " (warning: empty agreement subset)" : "") << "\n"
      << (metrics.contains("ari") ? "  ARI " + metrics["ari"].dump() + "\n" : "");
  std::cout << "metrics written to " << out_path << "\n";
  return 0;
}

int cmd_prior_sim(const std::string& out_dir, int n, int replicates, std::uint64_t seed,
                  int gibbs_scans) {
  fs::create_directories(out_dir);
  struct Config {
    const char* name;
    double kappa, sigma;
    bool sim, calibrate;
  };
  const Config configs[] = {{"DP", 19.2333, 0.0, false, false},
                            {"DP-sim", 19.2333, 0.0, true, true},
                            {"NGGP", 0.7353, 0.7353, false, false},
                            {"NGGP-nocal", 0.7353, 0.7353, true, false},
                            {"NGGP-sim", 0.7353, 0.7353, true, true}};

  auto summary = std::ofstream(out_dir + "/priorsim_summary.csv");
  summary << "config,kappa,sigma,mean_clusters,singleton_share_clusters,singleton_share_units\n";
  auto hist_out = std::ofstream(out_dir + "/priorsim_hist.csv");
  hist_out << "config,clusters,count\n";

  for (const auto& c : configs) {
    LogVTable table;
    SimilarityParams sim;
    sim.enabled = c.sim;
    sim.calibrate = c.calibrate;
    std::vector<double> counts(replicates), share_c(replicates), share_u(replicates);
#pragma omp parallel for schedule(dynamic)
    for (int r = 0; r < replicates; ++r) {
      Rng rng = Rng::stream(seed, 1000 + r);
      Matrix x = gen_prior_sim_covariates(n, rng);
      Matrix xs = Standardizer::fit(x).apply(x);
      auto labels = sample_prior_partition(n, c.kappa, c.sigma, table, rng,
                                           c.sim ? &xs : nullptr, c.sim ? &sim : nullptr);
      std::vector<int> sizes(*std::max_element(labels.begin(), labels.end()) + 1, 0);
      for (int l : labels) ++sizes[l];
      if (c.sim) {
        // the sequential draw does not target the PPMx measure when a
        // similarity is present; refine by Gibbs scans over the exact target
        for (int scan = 0; scan < gibbs_scans; ++scan)
          gibbs_scan_partition(labels, sizes, xs, c.kappa, c.sigma, sim, table, rng);
      }
      int m1 = 0;
      for (int s : sizes) m1 += (s == 1);
      counts[r] = static_cast<double>(sizes.size());
      share_c[r] = static_cast<double>(m1) / sizes.size();
      share_u[r] = static_cast<double>(m1) / n;
    }
    MeanVar mc = mean_var(counts), msc = mean_var(share_c), msu = mean_var(share_u);
    summary << c.name << ',' << format_double(c.kappa) << ',' << format_double(c.sigma) << ','
            << format_double(mc.mean) << ',' << format_double(msc.mean) << ','
            << format_double(msu.mean) << "\n";
    std::map<int, int> hist;
    for (double v : counts) ++hist[static_cast<int>(v)];
    for (auto& [cl, cnt] : hist) hist_out << c.name << ',' << cl << ',' << cnt << "\n";
    std::cout << c.name << ": mean clusters " << mc.mean << ", singleton share (clusters) "
              << msc.mean << ", (units) " << msu.mean << "\n";
  }
  std::cout << "prior simulation written to " << out_dir << "\n";
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  if (const char* threads = std::getenv("PPMX_THREADS"))
    omp_set_num_threads(std::max(1, atoi(threads)));

  CLI::App app{"PPMx treatment-selection model: fit, predict, simulate, evaluate"};
  app.require_subcommand(1);

  // fit
  auto* fit = app.add_subcommand("fit", "run the MCMC sampler on a training CSV");
  std::string fit_config, fit_data, fit_out;
  std::uint64_t fit_seed = 0;
  bool fit_seed_set = false;
  json fit_over;
  fit->add_option("--config", fit_config, "JSON config file");
  fit->add_option("--data", fit_data, "training CSV (id,arm,response,z_*,x_*)")->required();
  fit->add_option("--out", fit_out, "output trace directory")->required();
  fit->add_option_function<std::uint64_t>(
         "--seed", [&](std::uint64_t s) { fit_seed = s; fit_seed_set = true; }, "chain seed")
      ->required();
  fit->add_option_function<int>("--iterations", [&](int v) { fit_over["iterations"] = v; });
  fit->add_option_function<int>("--burnin", [&](int v) { fit_over["burnin"] = v; });
  fit->add_option_function<int>("--thinning", [&](int v) { fit_over["thinning"] = v; });
  fit->add_option_function<int>("--chains", [&](int v) { fit_over["chains"] = v; });
  fit->add_option_function<int>("--m-standby", [&](int v) { fit_over["m_standby"] = v; });
  fit->add_flag_function("--ppm-mode", [&](int) { fit_over["ppm_mode"] = true; },
                         "DP cohesion (sigma=0) with similarity off");
  fit->add_flag_function("--no-similarity",
                         [&](int) { fit_over["similarity"] = {{"enabled", false}}; });
  fit->add_flag_function("--no-calibrate",
                         [&](int) { fit_over["similarity"] = {{"calibrate", false}}; });
  fit->add_flag_function("--paper-appendix-weights",
                         [&](int) { fit_over["paper_appendix_weights"] = true; },
                         "drop the V-ratio factor from new-cluster weights");
  fit->add_flag_function("--no-standardize", [&](int) { fit_over["standardize_x"] = false; });

  // predict
  auto* predict = app.add_subcommand("predict", "posterior-predictive treatment recommendation");
  std::string pr_trace, pr_newdata, pr_out, pr_omega;
  std::uint64_t pr_seed = 12345;
  bool pr_mou = false;
  predict->add_option("--trace", pr_trace, "fitted trace directory")->required();
  predict->add_option("--newdata", pr_newdata, "CSV with id,z_*,x_*")->required();
  predict->add_option("--out", pr_out, "recommendations CSV path")->required();
  predict->add_option("--seed", pr_seed, "prediction seed (default 12345)");
  predict->add_option("--omega", pr_omega, "utility weights, e.g. 0,40,100");
  predict->add_flag("--median-of-utility", pr_mou, "median of per-draw utilities");

  // simulate
  auto* simulate = app.add_subcommand("simulate", "generate a synthetic scenario dataset");
  std::string sim_scenario, sim_out, sim_omega;
  std::uint64_t sim_seed = 0;
  json sim_over;
  simulate->add_option("--scenario", sim_scenario, "prior-sim | s1 | s2 | s3 | cr-logistic")
      ->required();
  simulate->add_option("--out", sim_out, "output directory")->required();
  simulate->add_option("--seed", sim_seed, "generator seed")->required();
  simulate->add_option_function<int>("--n", [&](int v) { sim_over["n"] = v; });
  simulate->add_option_function<int>("--q", [&](int v) { sim_over["q"] = v; });
  simulate->add_option_function<int>("--p", [&](int v) { sim_over["p"] = v; });
  simulate->add_option_function<int>("--train", [&](int v) { sim_over["train"] = v; });
  simulate->add_option_function<int>("--test", [&](int v) { sim_over["test"] = v; });
  simulate->add_option_function<double>("--overlap", [&](double v) { sim_over["overlap"] = v; });
  simulate->add_option("--omega", sim_omega, "utility weights, e.g. 0,40,100");

  // evaluate
  auto* evaluate = app.add_subcommand("evaluate", "score recommendations against truth files");
  std::string ev_rec, ev_truth, ev_out, ev_trace, ev_partition;
  evaluate->add_option("--recommendations", ev_rec)->required();
  evaluate->add_option("--truth", ev_truth)->required();
  evaluate->add_option("--out", ev_out)->required();
  evaluate->add_option("--trace", ev_trace, "trace dir for ARI of the partition point estimate");
  evaluate->add_option("--true-partition", ev_partition, "id,block CSV");

  // prior-sim
  auto* prior = app.add_subcommand("prior-sim", "induced prior distribution of cluster counts");
  std::string ps_out;
  int ps_n = 50, ps_reps = 10000, ps_scans = 30;
  std::uint64_t ps_seed = 20240101;
  prior->add_option("--out", ps_out)->required();
  prior->add_option("--n", ps_n);
  prior->add_option("--replicates", ps_reps);
  prior->add_option("--seed", ps_seed);
  prior->add_option("--gibbs-scans", ps_scans);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    int code = app.exit(e);
    return code == 0 ? 0 : 1;
  }

  try {
    if (*fit) return cmd_fit(fit_config, fit_data, fit_out, fit_seed, fit_over);
    if (*predict)
      return cmd_predict(pr_trace, pr_newdata, pr_out, pr_seed,
                         pr_omega.empty() ? std::nullopt : std::optional(pr_omega), pr_mou);
    if (*simulate) {
      if (!sim_omega.empty()) {
        json om = json::array();
        Vector v = parse_omega(sim_omega);
        for (int i = 0; i < v.size(); ++i) om.push_back(v(i));
        sim_over["omega"] = om;
      }
      return cmd_simulate(sim_scenario, sim_seed, sim_out, sim_over);
    }
    if (*evaluate) return cmd_evaluate(ev_rec, ev_truth, ev_out, ev_trace, ev_partition);
    if (*prior) return cmd_prior_sim(ps_out, ps_n, ps_reps, ps_seed, ps_scans);
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  }
  return 0;
}
