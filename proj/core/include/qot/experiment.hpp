#pragma once

#include <cstdint>
#include <functional>
#include <map>
#include <stdexcept>
#include <string>
#include <vector>

namespace qot {

// Flat key=value configuration with [sections]; section names qualify keys
// as "section.key". Unknown parameter keys are rejected per experiment.
struct ExperimentConfig {
  std::string experiment;
  std::uint64_t seed = 0;
  std::string out_dir = ".";
  bool trace = false;
  std::map<std::string, std::string> params;  // qualified keys

  bool has(const std::string& key) const { return params.count(key) > 0; }
  double get_double(const std::string& key, double fallback) const;
  int get_int(const std::string& key, int fallback) const;
  std::string get_string(const std::string& key, const std::string& fallback) const;
  std::vector<double> get_list(const std::string& key, const std::vector<double>& fallback) const;
};

ExperimentConfig parse_config_file(const std::string& path);
ExperimentConfig parse_config_text(const std::string& text);

struct ConfigError : std::runtime_error {
  using std::runtime_error::runtime_error;
};
struct SolverNonConvergence : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// One measured quantity with its asserted bound; pass is recomputable from
// the stored fields.
struct ResultRecord {
  std::string experiment;
  std::string param;     // parameter tuple, e.g. "hbar=0.1;n=20"
  std::string quantity;  // what was measured
  double measured = 0.0;
  double bound = 0.0;
  std::string cmp;  // le | ge | abs | rel
  double tolerance = 0.0;
  bool pass = false;
  double runtime_s = 0.0;
};

bool evaluate_record(const ResultRecord& r);
ResultRecord make_record(const std::string& experiment, const std::string& param,
                         const std::string& quantity, double measured, double bound,
                         const std::string& cmp, double tolerance);

void write_records_csv(const std::vector<ResultRecord>& records, const std::string& path);
std::vector<ResultRecord> read_records_csv(const std::string& path);
void write_records_json(const std::vector<ResultRecord>& records, const ExperimentConfig& cfg,
                        const std::string& path);

struct Experiment {
  std::string name;
  std::string description;  // one line naming the claim it reproduces
  std::vector<std::string> accepted_keys;
  std::function<std::vector<ResultRecord>(const ExperimentConfig&)> run;
};

const std::vector<Experiment>& experiment_catalog();
const Experiment& find_experiment(const std::string& name);

// Run an experiment end to end: validates keys, executes, writes CSV and
// JSON under cfg.out_dir. Returns the records.
std::vector<ResultRecord> run_experiment(const ExperimentConfig& cfg);

// Recompute pass/fail from a stored CSV; returns false when any stored flag
// disagrees with its recomputation or any record fails.
struct VerifySummary {
  int total = 0;
  int failing = 0;
  int inconsistent = 0;
  bool ok() const { return failing == 0 && inconsistent == 0; }
};
VerifySummary verify_records(const std::vector<ResultRecord>& records);

}  // namespace qot
