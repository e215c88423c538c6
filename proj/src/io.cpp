#include "ppmx/io.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <map>
#include <sstream>
#include <stdexcept>

namespace fs = std::filesystem;
using nlohmann::json;

namespace ppmx {

std::string format_double(double x) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.17g", x);
  return buf;
}

double parse_double(const std::string& s, const std::string& context) {
  if (s.empty()) throw std::invalid_argument(context + ": empty numeric field");
  char* end = nullptr;
  double v = std::strtod(s.c_str(), &end);
  if (end != s.c_str() + s.size())
    throw std::invalid_argument(context + ": cannot parse number '" + s + "'");
  if (!std::isfinite(v)) throw std::invalid_argument(context + ": non-finite value '" + s + "'");
  return v;
}

namespace {

long parse_int(const std::string& s, const std::string& context) {
  if (s.empty()) throw std::invalid_argument(context + ": empty integer field");
  char* end = nullptr;
  long v = std::strtol(s.c_str(), &end, 10);
  if (end != s.c_str() + s.size())
    throw std::invalid_argument(context + ": cannot parse integer '" + s + "'");
  return v;
}

std::vector<std::string> split_line(const std::string& line) {
  std::vector<std::string> out;
  std::string cur;
  for (char ch : line) {
    if (ch == ',') {
      out.push_back(cur);
      cur.clear();
    } else if (ch != '\r') {
      cur.push_back(ch);
    }
  }
  out.push_back(cur);
  return out;
}

std::ofstream open_out(const std::string& path) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot open for writing: " + path);
  return out;
}

// covariate columns named <prefix>_1..<prefix>_m, in order
std::vector<int> covariate_columns(const CsvTable& t, const std::string& prefix) {
  std::map<int, int> found;
  for (std::size_t c = 0; c < t.header.size(); ++c) {
    const std::string& h = t.header[c];
    if (h.rfind(prefix + "_", 0) == 0) {
      int idx = static_cast<int>(parse_int(h.substr(prefix.size() + 1), "header " + h));
      found[idx] = static_cast<int>(c);
    }
  }
  std::vector<int> cols;
  int expect = 1;
  for (auto& [idx, c] : found) {
    if (idx != expect)
      throw std::invalid_argument("covariate columns not contiguous: missing " + prefix + "_" +
                                  std::to_string(expect));
    cols.push_back(c);
    ++expect;
  }
  return cols;
}

}  // namespace

int CsvTable::col(const std::string& name) const {
  for (std::size_t i = 0; i < header.size(); ++i)
    if (header[i] == name) return static_cast<int>(i);
  return -1;
}

int CsvTable::require(const std::string& name) const {
  int c = col(name);
  if (c < 0) throw std::invalid_argument("missing required column: " + name);
  return c;
}

CsvTable read_csv(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open: " + path);
  CsvTable t;
  std::string line;
  if (!std::getline(in, line)) throw std::invalid_argument(path + ": empty file, header required");
  t.header = split_line(line);
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    auto row = split_line(line);
    if (row.size() != t.header.size())
      throw std::invalid_argument(path + ": row " + std::to_string(t.rows.size() + 2) +
                                  " has " + std::to_string(row.size()) + " fields, expected " +
                                  std::to_string(t.header.size()));
    t.rows.push_back(std::move(row));
  }
  return t;
}

CohortData read_cohort_csv(const std::string& path) {
  CsvTable t = read_csv(path);
  const int c_id = t.require("id");
  const int c_arm = t.require("arm");
  const int c_y = t.require("response");
  auto zc = covariate_columns(t, "z");
  auto xc = covariate_columns(t, "x");

  int t_arms = 0, k_levels = 0;
  for (std::size_t r = 0; r < t.rows.size(); ++r) {
    const std::string ctx = path + " row " + std::to_string(r + 2);
    int arm = static_cast<int>(parse_int(t.rows[r][c_arm], ctx + " column arm"));
    int y = static_cast<int>(parse_int(t.rows[r][c_y], ctx + " column response"));
    if (arm < 1) throw std::invalid_argument(ctx + ": arm must be a positive integer");
    if (y < 1) throw std::invalid_argument(ctx + ": response must be a positive integer");
    t_arms = std::max(t_arms, arm);
    k_levels = std::max(k_levels, y);
  }
  CohortData data;
  data.K = k_levels;
  data.P = static_cast<int>(zc.size());
  data.Q = static_cast<int>(xc.size());
  data.arms.resize(t_arms);

  std::vector<std::vector<int>> arm_rows(t_arms);
  for (std::size_t r = 0; r < t.rows.size(); ++r) {
    int arm = static_cast<int>(parse_int(t.rows[r][c_arm], "arm"));
    arm_rows[arm - 1].push_back(static_cast<int>(r));
  }
  for (int a = 0; a < t_arms; ++a) {
    ArmData& arm = data.arms[a];
    const auto& rows = arm_rows[a];
    arm.z.resize(rows.size(), data.P);
    arm.x.resize(rows.size(), data.Q);
    for (std::size_t m = 0; m < rows.size(); ++m) {
      const auto& row = t.rows[rows[m]];
      const std::string ctx = path + " row " + std::to_string(rows[m] + 2);
      arm.ids.push_back(row[c_id]);
      arm.y.push_back(static_cast<int>(parse_int(row[c_y], ctx)));
      for (int j = 0; j < data.P; ++j)
        arm.z(m, j) = parse_double(row[zc[j]], ctx + " column z_" + std::to_string(j + 1));
      for (int j = 0; j < data.Q; ++j)
        arm.x(m, j) = parse_double(row[xc[j]], ctx + " column x_" + std::to_string(j + 1));
    }
  }
  data.validate();
  return data;
}

void write_cohort_csv(const std::string& path, const CohortData& data) {
  auto out = open_out(path);
  out << "id,arm,response";
  for (int j = 1; j <= data.P; ++j) out << ",z_" << j;
  for (int j = 1; j <= data.Q; ++j) out << ",x_" << j;
  out << "\n";
  for (int a = 0; a < data.arm_count(); ++a) {
    const ArmData& arm = data.arms[a];
    for (int i = 0; i < arm.n(); ++i) {
      out << arm.ids[i] << ',' << (a + 1) << ',' << arm.y[i];
      for (int j = 0; j < data.P; ++j) out << ',' << format_double(arm.z(i, j));
      for (int j = 0; j < data.Q; ++j) out << ',' << format_double(arm.x(i, j));
      out << "\n";
    }
  }
}

NewData read_newdata_csv(const std::string& path, int p, int q) {
  CsvTable t = read_csv(path);
  const int c_id = t.require("id");
  auto zc = covariate_columns(t, "z");
  auto xc = covariate_columns(t, "x");
  if (static_cast<int>(zc.size()) != p || static_cast<int>(xc.size()) != q)
    throw std::invalid_argument(path + ": expected " + std::to_string(p) + " prognostic and " +
                                std::to_string(q) + " predictive covariates, found " +
                                std::to_string(zc.size()) + "/" + std::to_string(xc.size()));
  NewData nd;
  nd.z.resize(t.rows.size(), p);
  nd.x.resize(t.rows.size(), q);
  for (std::size_t r = 0; r < t.rows.size(); ++r) {
    const std::string ctx = path + " row " + std::to_string(r + 2);
    nd.ids.push_back(t.rows[r][c_id]);
    for (int j = 0; j < p; ++j) nd.z(r, j) = parse_double(t.rows[r][zc[j]], ctx);
    for (int j = 0; j < q; ++j) nd.x(r, j) = parse_double(t.rows[r][xc[j]], ctx);
  }
  return nd;
}

void write_truth_csv(const std::string& path, const GeneratedDataset& ds, bool test_only) {
  auto out = open_out(path);
  const int t_arms = static_cast<int>(ds.truth.empty() ? 0 : ds.truth[0].mtu.size());
  out << "id,is_test,arm,response,optimal_arm,tie";
  for (int a = 1; a <= t_arms; ++a) out << ",mtu_" << a;
  out << "\n";
  for (const auto& p : ds.truth) {
    if (test_only && !p.is_test) continue;
    out << p.id << ',' << (p.is_test ? 1 : 0) << ',' << p.received_arm << ',' << p.y << ','
        << p.optimal_arm << ',' << (p.tie ? 1 : 0);
    for (int a = 0; a < t_arms; ++a) out << ',' << format_double(p.mtu(a));
    out << "\n";
  }
}

void write_orp_csv(const std::string& path, const GeneratedDataset& ds) {
  auto out = open_out(path);
  out << "id,arm,k,orp\n";
  for (const auto& p : ds.truth)
    for (Eigen::Index a = 0; a < p.orp.rows(); ++a)
      for (Eigen::Index k = 0; k < p.orp.cols(); ++k)
        out << p.id << ',' << (a + 1) << ',' << (k + 1) << ',' << format_double(p.orp(a, k))
            << "\n";
}

void write_partition_csv(const std::string& path, const GeneratedDataset& ds) {
  auto out = open_out(path);
  out << "id,block\n";
  for (const auto& p : ds.truth) out << p.id << ',' << (p.true_block + 1) << "\n";
}

namespace {

const char* const kConfigKeys[] = {
    "iterations", "burnin", "thinning", "m_standby", "chains", "seed", "eta_proposal_scale",
    "beta_proposal_scale", "adapt", "adapt_target", "v_ratio", "paper_appendix_weights",
    "ppm_mode", "standardize_x", "median_of_utility", "similarity", "grid", "hyper",
    "quadrature",
    // CLI-level keys tolerated in the same file
    "data", "out", "omega", "newdata", "trace"};

void check_keys(const json& j, std::initializer_list<const char*> keys, const std::string& where) {
  for (auto it = j.begin(); it != j.end(); ++it) {
    bool known = false;
    for (const char* k : keys)
      if (it.key() == k) known = true;
    if (!known) throw std::invalid_argument("unknown config key '" + it.key() + "' in " + where);
  }
}

}  // namespace

MCMCConfig config_from_json(const json& j, const MCMCConfig& base) {
  for (auto it = j.begin(); it != j.end(); ++it) {
    bool known = false;
    for (const char* k : kConfigKeys)
      if (it.key() == k) known = true;
    if (!known) throw std::invalid_argument("unknown config key '" + it.key() + "'");
  }
  MCMCConfig c = base;
  c.iterations = j.value("iterations", c.iterations);
  c.burnin = j.value("burnin", c.burnin);
  c.thinning = j.value("thinning", c.thinning);
  c.m_standby = j.value("m_standby", c.m_standby);
  c.chains = j.value("chains", c.chains);
  c.seed = j.value("seed", c.seed);
  c.eta_proposal_scale = j.value("eta_proposal_scale", c.eta_proposal_scale);
  c.beta_proposal_scale = j.value("beta_proposal_scale", c.beta_proposal_scale);
  c.adapt = j.value("adapt", c.adapt);
  c.adapt_target = j.value("adapt_target", c.adapt_target);
  c.v_ratio = j.value("v_ratio", c.v_ratio);
  if (j.value("paper_appendix_weights", false)) c.v_ratio = false;
  c.ppm_mode = j.value("ppm_mode", c.ppm_mode);
  c.standardize_x = j.value("standardize_x", c.standardize_x);
  c.median_of_utility = j.value("median_of_utility", c.median_of_utility);
  if (j.contains("similarity")) {
    const json& s = j["similarity"];
    check_keys(s, {"enabled", "calibrate", "nig", "bernoulli_binary_mask"}, "similarity");
    c.sim.enabled = s.value("enabled", c.sim.enabled);
    c.sim.calibrate = s.value("calibrate", c.sim.calibrate);
    if (s.contains("nig")) {
      const json& g = s["nig"];
      check_keys(g, {"m0", "k0", "v0", "n0"}, "similarity.nig");
      c.sim.nig.m0 = g.value("m0", c.sim.nig.m0);
      c.sim.nig.k0 = g.value("k0", c.sim.nig.k0);
      c.sim.nig.v0 = g.value("v0", c.sim.nig.v0);
      c.sim.nig.n0 = g.value("n0", c.sim.nig.n0);
    }
    if (s.contains("bernoulli_binary_mask")) {
      c.sim.binary_mask.clear();
      for (bool b : s["bernoulli_binary_mask"]) c.sim.binary_mask.push_back(b ? 1 : 0);
    }
  }
  if (j.contains("grid")) {
    const json& g = j["grid"];
    check_keys(g, {"kappa_points", "sigma_points", "kappa_max", "sigma_max"}, "grid");
    c.grid.kappa_points = g.value("kappa_points", c.grid.kappa_points);
    c.grid.sigma_points = g.value("sigma_points", c.grid.sigma_points);
    c.grid.kappa_max = g.value("kappa_max", c.grid.kappa_max);
    c.grid.sigma_max = g.value("sigma_max", c.grid.sigma_max);
  }
  if (j.contains("hyper")) {
    const json& h = j["hyper"];
    check_keys(h, {"mu0", "nu0", "s0", "lambda0_diag", "exp_cap"}, "hyper");
    c.hyper.mu0 = h.value("mu0", c.hyper.mu0);
    c.hyper.nu0 = h.value("nu0", c.hyper.nu0);
    c.hyper.s0 = h.value("s0", c.hyper.s0);
    c.hyper.lambda0_diag = h.value("lambda0_diag", c.hyper.lambda0_diag);
    c.hyper.exp_cap = h.value("exp_cap", c.hyper.exp_cap);
  }
  if (j.contains("quadrature")) {
    const json& q = j["quadrature"];
    check_keys(q, {"initial_nodes", "max_doublings", "rel_tol", "tail_drop"}, "quadrature");
    c.quadrature.initial_nodes = q.value("initial_nodes", c.quadrature.initial_nodes);
    c.quadrature.max_doublings = q.value("max_doublings", c.quadrature.max_doublings);
    c.quadrature.rel_tol = q.value("rel_tol", c.quadrature.rel_tol);
    c.quadrature.tail_drop = q.value("tail_drop", c.quadrature.tail_drop);
  }
  return c;
}

json config_to_json(const MCMCConfig& c) {
  json j;
  j["iterations"] = c.iterations;
  j["burnin"] = c.burnin;
  j["thinning"] = c.thinning;
  j["m_standby"] = c.m_standby;
  j["chains"] = c.chains;
  j["seed"] = c.seed;
  j["eta_proposal_scale"] = c.eta_proposal_scale;
  j["beta_proposal_scale"] = c.beta_proposal_scale;
  j["adapt"] = c.adapt;
  j["adapt_target"] = c.adapt_target;
  j["v_ratio"] = c.v_ratio;
  j["ppm_mode"] = c.ppm_mode;
  j["standardize_x"] = c.standardize_x;
  j["median_of_utility"] = c.median_of_utility;
  j["similarity"] = {{"enabled", c.sim.enabled}, {"calibrate", c.sim.calibrate},
                     {"nig", {{"m0", c.sim.nig.m0}, {"k0", c.sim.nig.k0}, {"v0", c.sim.nig.v0},
                              {"n0", c.sim.nig.n0}}}};
  if (!c.sim.binary_mask.empty()) {
    json mask = json::array();
    for (char b : c.sim.binary_mask) mask.push_back(b != 0);
    j["similarity"]["bernoulli_binary_mask"] = mask;
  }
  j["grid"] = {{"kappa_points", c.grid.kappa_points}, {"sigma_points", c.grid.sigma_points},
               {"kappa_max", c.grid.kappa_max}, {"sigma_max", c.grid.sigma_max}};
  j["hyper"] = {{"mu0", c.hyper.mu0}, {"nu0", c.hyper.nu0}, {"s0", c.hyper.s0},
                {"lambda0_diag", c.hyper.lambda0_diag}, {"exp_cap", c.hyper.exp_cap}};
  j["quadrature"] = {{"initial_nodes", c.quadrature.initial_nodes},
                     {"max_doublings", c.quadrature.max_doublings},
                     {"rel_tol", c.quadrature.rel_tol}, {"tail_drop", c.quadrature.tail_drop}};
  return j;
}

namespace {

void write_trace_chain(const std::string& dir, const TraceStore& tr) {
  fs::create_directories(dir);
  for (int a = 0; a < tr.T; ++a) {
    const std::string suffix = std::to_string(a + 1) + ".csv";
    {
      auto out = open_out(dir + "/partitions_" + suffix);
      out << "iter";
      for (const auto& id : tr.ids[a]) out << ',' << id;
      out << "\n";
      for (int s = 0; s < tr.kept(); ++s) {
        out << (s + 1);
        for (int lab : tr.arms[a][s].labels) out << ',' << (lab + 1);
        out << "\n";
      }
    }
    {
      auto out = open_out(dir + "/eta_" + suffix);
      out << "iter,cluster,k,value\n";
      for (int s = 0; s < tr.kept(); ++s) {
        const Matrix& eta = tr.arms[a][s].eta;
        for (Eigen::Index j = 0; j < eta.rows(); ++j)
          for (Eigen::Index k = 0; k < eta.cols(); ++k)
            out << (s + 1) << ',' << (j + 1) << ',' << (k + 1) << ','
                << format_double(eta(j, k)) << "\n";
      }
    }
    {
      auto out = open_out(dir + "/g0_" + suffix);
      out << "iter,k,theta";
      for (int k = 1; k <= tr.K; ++k) out << ",lambda_" << k;
      out << "\n";
      for (int s = 0; s < tr.kept(); ++s)
        for (int k = 0; k < tr.K; ++k) {
          out << (s + 1) << ',' << (k + 1) << ',' << format_double(tr.arms[a][s].theta(k));
          for (int k2 = 0; k2 < tr.K; ++k2)
            out << ',' << format_double(tr.arms[a][s].lambda(k, k2));
          out << "\n";
        }
    }
    {
      auto out = open_out(dir + "/nggp_" + suffix);
      out << "iter,kappa,sigma\n";
      for (int s = 0; s < tr.kept(); ++s)
        out << (s + 1) << ',' << format_double(tr.arms[a][s].kappa) << ','
            << format_double(tr.arms[a][s].sigma) << "\n";
    }
  }
  {
    auto out = open_out(dir + "/beta.csv");
    out << "iter,p,k,beta,lambda,tau\n";
    for (int s = 0; s < tr.kept(); ++s)
      for (int p = 0; p < tr.P; ++p)
        for (int k = 0; k < tr.K; ++k)
          out << (s + 1) << ',' << (p + 1) << ',' << (k + 1) << ','
              << format_double(tr.beta[s](p, k)) << ',' << format_double(tr.lambda_hs[s](p, k))
              << ',' << format_double(tr.tau[s](k)) << "\n";
  }
  {
    auto out = open_out(dir + "/loglik.csv");
    out << "iter";
    for (int a = 0; a < tr.T; ++a)
      for (const auto& id : tr.ids[a]) out << ',' << id;
    out << "\n";
    for (int s = 0; s < tr.kept(); ++s) {
      out << (s + 1);
      for (Eigen::Index i = 0; i < tr.loglik.cols(); ++i)
        out << ',' << format_double(tr.loglik(s, i));
      out << "\n";
    }
  }
}

TraceStore read_trace_chain(const std::string& dir, const json& meta) {
  TraceStore tr;
  tr.K = meta.at("K");
  tr.P = meta.at("P");
  tr.Q = meta.at("Q");
  tr.T = meta.at("T");
  tr.seed = meta.at("seed");
  tr.standardized = meta.at("standardize_x");
  tr.arms.resize(tr.T);
  tr.ids.resize(tr.T);
  for (int a = 0; a < tr.T; ++a) {
    for (const auto& id : meta.at("arms")[a].at("ids")) tr.ids[a].push_back(id);
    Standardizer st;
    st.mean.resize(tr.Q);
    st.sd.resize(tr.Q);
    for (int q = 0; q < tr.Q; ++q) {
      st.mean(q) = meta.at("arms")[a].at("x_mean")[q];
      st.sd(q) = meta.at("arms")[a].at("x_sd")[q];
    }
    tr.x_standardizers.push_back(st);
  }

  int kept = 0;
  for (int a = 0; a < tr.T; ++a) {
    const std::string suffix = std::to_string(a + 1) + ".csv";
    CsvTable parts = read_csv(dir + "/partitions_" + suffix);
    kept = static_cast<int>(parts.rows.size());
    tr.arms[a].resize(kept);
    const int n = static_cast<int>(tr.ids[a].size());
    for (int s = 0; s < kept; ++s) {
      auto& draw = tr.arms[a][s];
      draw.labels.resize(n);
      int c = 0;
      for (int i = 0; i < n; ++i) {
        draw.labels[i] = static_cast<int>(parse_int(parts.rows[s][i + 1], "partitions")) - 1;
        c = std::max(c, draw.labels[i] + 1);
      }
      draw.eta = Matrix::Zero(c, tr.K);
      draw.theta = Vector::Zero(tr.K);
      draw.lambda = Matrix::Zero(tr.K, tr.K);
    }
    CsvTable eta = read_csv(dir + "/eta_" + suffix);
    for (const auto& row : eta.rows) {
      int s = static_cast<int>(parse_int(row[0], "eta iter")) - 1;
      int j = static_cast<int>(parse_int(row[1], "eta cluster")) - 1;
      int k = static_cast<int>(parse_int(row[2], "eta k")) - 1;
      tr.arms[a][s].eta(j, k) = parse_double(row[3], "eta value");
    }
    CsvTable g0 = read_csv(dir + "/g0_" + suffix);
    for (const auto& row : g0.rows) {
      int s = static_cast<int>(parse_int(row[0], "g0 iter")) - 1;
      int k = static_cast<int>(parse_int(row[1], "g0 k")) - 1;
      tr.arms[a][s].theta(k) = parse_double(row[2], "g0 theta");
      for (int k2 = 0; k2 < tr.K; ++k2)
        tr.arms[a][s].lambda(k, k2) = parse_double(row[3 + k2], "g0 lambda");
    }
    CsvTable nggp = read_csv(dir + "/nggp_" + suffix);
    for (int s = 0; s < kept; ++s) {
      tr.arms[a][s].kappa = parse_double(nggp.rows[s][1], "nggp kappa");
      tr.arms[a][s].sigma = parse_double(nggp.rows[s][2], "nggp sigma");
    }
  }

  tr.beta.assign(kept, Matrix::Zero(tr.P, tr.K));
  tr.lambda_hs.assign(kept, Matrix::Ones(tr.P, tr.K));
  tr.tau.assign(kept, Vector::Ones(tr.K));
  CsvTable beta = read_csv(dir + "/beta.csv");
  for (const auto& row : beta.rows) {
    int s = static_cast<int>(parse_int(row[0], "beta iter")) - 1;
    int p = static_cast<int>(parse_int(row[1], "beta p")) - 1;
    int k = static_cast<int>(parse_int(row[2], "beta k")) - 1;
    tr.beta[s](p, k) = parse_double(row[3], "beta");
    tr.lambda_hs[s](p, k) = parse_double(row[4], "lambda");
    tr.tau[s](k) = parse_double(row[5], "tau");
  }

  CsvTable ll = read_csv(dir + "/loglik.csv");
  tr.loglik.resize(kept, static_cast<int>(ll.header.size()) - 1);
  for (int s = 0; s < kept; ++s)
    for (Eigen::Index i = 0; i < tr.loglik.cols(); ++i)
      tr.loglik(s, i) = parse_double(ll.rows[s][i + 1], "loglik");
  return tr;
}

}  // namespace

void write_run(const std::string& dir, const CohortData& data, const MCMCConfig& cfg,
               const std::vector<TraceStore>& chains, const json& report) {
  fs::create_directories(dir);
  json meta;
  meta["format_version"] = 1;
  meta["seed"] = cfg.seed;
  meta["K"] = data.K;
  meta["P"] = data.P;
  meta["Q"] = data.Q;
  meta["T"] = data.arm_count();
  meta["chains"] = static_cast<int>(chains.size());
  meta["standardize_x"] = cfg.standardize_x;
  meta["config"] = config_to_json(cfg);
  meta["arms"] = json::array();
  for (int a = 0; a < data.arm_count(); ++a) {
    json arm;
    arm["n"] = data.arms[a].n();
    arm["ids"] = chains[0].ids[a];
    json mean = json::array(), sd = json::array();
    for (int q = 0; q < data.Q; ++q) {
      mean.push_back(chains[0].x_standardizers[a].mean(q));
      sd.push_back(chains[0].x_standardizers[a].sd(q));
    }
    arm["x_mean"] = mean;
    arm["x_sd"] = sd;
    meta["arms"].push_back(arm);
  }
  meta["report"] = report;
  {
    auto out = open_out(dir + "/meta.json");
    out << meta.dump(2) << "\n";
  }
  for (int a = 0; a < data.arm_count(); ++a) {
    auto out = open_out(dir + "/xtrain_" + std::to_string(a + 1) + ".csv");
    out << "id";
    for (int q = 1; q <= data.Q; ++q) out << ",x_" << q;
    out << "\n";
    const Matrix& x = chains[0].x_train_std[a];
    for (int i = 0; i < data.arms[a].n(); ++i) {
      out << data.arms[a].ids[i];
      for (int q = 0; q < data.Q; ++q) out << ',' << format_double(x(i, q));
      out << "\n";
    }
  }
  for (std::size_t c = 0; c < chains.size(); ++c)
    write_trace_chain(dir + "/chain_" + std::to_string(c + 1), chains[c]);
}

LoadedRun load_run(const std::string& dir) {
  LoadedRun run;
  {
    std::ifstream in(dir + "/meta.json");
    if (!in) throw std::runtime_error("cannot open " + dir + "/meta.json");
    in >> run.meta;
  }
  run.config = config_from_json(run.meta.at("config"));
  const int n_chains = run.meta.at("chains");
  const int t_arms = run.meta.at("T");
  const int q = run.meta.at("Q");
  for (int c = 0; c < n_chains; ++c) {
    TraceStore tr = read_trace_chain(dir + "/chain_" + std::to_string(c + 1), run.meta);
    for (int a = 0; a < t_arms; ++a) {
      CsvTable xt = read_csv(dir + "/xtrain_" + std::to_string(a + 1) + ".csv");
      Matrix x(xt.rows.size(), q);
      for (std::size_t i = 0; i < xt.rows.size(); ++i)
        for (int j = 0; j < q; ++j) x(i, j) = parse_double(xt.rows[i][j + 1], "xtrain");
      tr.x_train_std.push_back(x);
    }
    run.chains.push_back(std::move(tr));
  }
  return run;
}

TraceStore pool_chains(const std::vector<TraceStore>& chains) {
  if (chains.empty()) throw std::invalid_argument("pool_chains: no chains");
  TraceStore out = chains[0];
  for (std::size_t c = 1; c < chains.size(); ++c) {
    const TraceStore& tr = chains[c];
    for (int a = 0; a < out.T; ++a)
      out.arms[a].insert(out.arms[a].end(), tr.arms[a].begin(), tr.arms[a].end());
    out.beta.insert(out.beta.end(), tr.beta.begin(), tr.beta.end());
    out.lambda_hs.insert(out.lambda_hs.end(), tr.lambda_hs.begin(), tr.lambda_hs.end());
    out.tau.insert(out.tau.end(), tr.tau.begin(), tr.tau.end());
    Matrix merged(out.loglik.rows() + tr.loglik.rows(), out.loglik.cols());
    merged << out.loglik, tr.loglik;
    out.loglik = merged;
  }
  return out;
}

void write_recommendations_csv(const std::string& path,
                               const std::vector<Recommendation>& recs) {
  auto out = open_out(path);
  if (recs.empty()) {
    out << "id,recommended_arm,tie\n";
    return;
  }
  const int t_arms = static_cast<int>(recs[0].phi.size());
  const int k = static_cast<int>(recs[0].median_probs.cols());
  out << "id";
  for (int a = 1; a <= t_arms; ++a) out << ",phi_" << a;
  out << ",recommended_arm,tie";
  for (int a = 1; a <= t_arms; ++a)
    for (int j = 1; j <= k; ++j) out << ",prob_" << a << "_" << j;
  out << "\n";
  for (const auto& r : recs) {
    out << r.id;
    for (int a = 0; a < t_arms; ++a) out << ',' << format_double(r.phi(a));
    out << ',' << r.recommended << ',' << (r.tie ? 1 : 0);
    for (int a = 0; a < t_arms; ++a)
      for (int j = 0; j < k; ++j) out << ',' << format_double(r.median_probs(a, j));
    out << "\n";
  }
}

std::vector<Recommendation> read_recommendations_csv(const std::string& path) {
  CsvTable t = read_csv(path);
  const int c_id = t.require("id");
  const int c_rec = t.require("recommended_arm");
  const int c_tie = t.require("tie");
  int t_arms = 0;
  while (t.col("phi_" + std::to_string(t_arms + 1)) >= 0) ++t_arms;
  int k = 0;
  while (t.col("prob_1_" + std::to_string(k + 1)) >= 0) ++k;
  std::vector<Recommendation> recs;
  for (const auto& row : t.rows) {
    Recommendation r;
    r.id = row[c_id];
    r.recommended = static_cast<int>(parse_int(row[c_rec], "recommended_arm"));
    r.tie = parse_int(row[c_tie], "tie") != 0;
    r.phi.resize(t_arms);
    for (int a = 0; a < t_arms; ++a)
      r.phi(a) = parse_double(row[t.require("phi_" + std::to_string(a + 1))], "phi");
    r.median_probs.resize(t_arms, k);
    for (int a = 0; a < t_arms; ++a)
      for (int j = 0; j < k; ++j)
        r.median_probs(a, j) = parse_double(
            row[t.require("prob_" + std::to_string(a + 1) + "_" + std::to_string(j + 1))],
            "prob");
    recs.push_back(std::move(r));
  }
  return recs;
}

}  // namespace ppmx
