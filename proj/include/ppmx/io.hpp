#pragma once

#include <string>
#include <vector>

#include <json.hpp>

#include "ppmx/engine.hpp"
#include "ppmx/simulate.hpp"
#include "ppmx/types.hpp"

namespace ppmx {

// floats serialized with 17 significant digits for bit-faithful round trips
std::string format_double(double x);
double parse_double(const std::string& s, const std::string& context);

struct CsvTable {
  std::vector<std::string> header;
  std::vector<std::vector<std::string>> rows;
  int col(const std::string& name) const;           // -1 when absent
  int require(const std::string& name) const;       // throws naming the column
};

CsvTable read_csv(const std::string& path);

// training schema: id, arm, response, z_1..z_P, x_1..x_Q
CohortData read_cohort_csv(const std::string& path);
void write_cohort_csv(const std::string& path, const CohortData& data);

// prediction schema: id, z_1..z_P, x_1..x_Q
struct NewData {
  std::vector<std::string> ids;
  Matrix z;
  Matrix x;
};
NewData read_newdata_csv(const std::string& path, int p, int q);

// truth sidecars emitted by the simulator
void write_truth_csv(const std::string& path, const GeneratedDataset& ds, bool test_only);
void write_orp_csv(const std::string& path, const GeneratedDataset& ds);
void write_partition_csv(const std::string& path, const GeneratedDataset& ds);

// config <-> JSON; unknown keys are rejected to catch typos
MCMCConfig config_from_json(const nlohmann::json& j, const MCMCConfig& base = MCMCConfig());
nlohmann::json config_to_json(const MCMCConfig& cfg);

// one fitted run: meta.json + xtrain_<arm>.csv at top level, chain_<c>/ dirs
void write_run(const std::string& dir, const CohortData& data, const MCMCConfig& cfg,
               const std::vector<TraceStore>& chains, const nlohmann::json& report);

struct LoadedRun {
  nlohmann::json meta;
  MCMCConfig config;
  std::vector<TraceStore> chains;
};
LoadedRun load_run(const std::string& dir);
TraceStore pool_chains(const std::vector<TraceStore>& chains);

struct Recommendation {
  std::string id;
  Vector phi;
  int recommended = 1;
  bool tie = false;
  Matrix median_probs;  // T x K
};

void write_recommendations_csv(const std::string& path,
                               const std::vector<Recommendation>& recs);
std::vector<Recommendation> read_recommendations_csv(const std::string& path);

}  // namespace ppmx
