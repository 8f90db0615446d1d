#include "qot/experiment.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>

#include <json.hpp>

namespace qot {

namespace {

std::string trim(const std::string& s) {
  size_t a = s.find_first_not_of(" \t\r\n");
  if (a == std::string::npos) return "";
  size_t b = s.find_last_not_of(" \t\r\n");
  return s.substr(a, b - a + 1);
}

std::string fmt_double(double v) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

}  // namespace

double ExperimentConfig::get_double(const std::string& key, double fallback) const {
  auto it = params.find(key);
  if (it == params.end()) return fallback;
  try {
    size_t pos = 0;
    double v = std::stod(it->second, &pos);
    if (pos != it->second.size()) throw std::invalid_argument("trailing");
    return v;
  } catch (const std::exception&) {
    throw ConfigError("bad numeric value for key '" + key + "': " + it->second);
  }
}

int ExperimentConfig::get_int(const std::string& key, int fallback) const {
  auto it = params.find(key);
  if (it == params.end()) return fallback;
  try {
    size_t pos = 0;
    int v = std::stoi(it->second, &pos);
    if (pos != it->second.size()) throw std::invalid_argument("trailing");
    return v;
  } catch (const std::exception&) {
    throw ConfigError("bad integer value for key '" + key + "': " + it->second);
  }
}

std::string ExperimentConfig::get_string(const std::string& key,
                                         const std::string& fallback) const {
  auto it = params.find(key);
  return it == params.end() ? fallback : it->second;
}

std::vector<double> ExperimentConfig::get_list(const std::string& key,
                                               const std::vector<double>& fallback) const {
  auto it = params.find(key);
  if (it == params.end()) return fallback;
  std::vector<double> out;
  std::stringstream ss(it->second);
  std::string tok;
  while (std::getline(ss, tok, ',')) {
    tok = trim(tok);
    if (tok.empty()) continue;
    try {
      out.push_back(std::stod(tok));
    } catch (const std::exception&) {
      throw ConfigError("bad list value for key '" + key + "': " + it->second);
    }
  }
  if (out.empty()) throw ConfigError("empty list for key '" + key + "'");
  return out;
}

ExperimentConfig parse_config_text(const std::string& text) {
  ExperimentConfig cfg;
  std::string section;
  std::stringstream ss(text);
  std::string line;
  while (std::getline(ss, line)) {
    line = trim(line);
    if (line.empty() || line[0] == '#') continue;
    if (line.front() == '[' && line.back() == ']') {
      section = trim(line.substr(1, line.size() - 2));
      if (section.empty()) throw ConfigError("empty section name");
      continue;
    }
    size_t eq = line.find('=');
    if (eq == std::string::npos) throw ConfigError("expected key = value: " + line);
    std::string key = trim(line.substr(0, eq));
    std::string value = trim(line.substr(eq + 1));
    if (key.empty()) throw ConfigError("empty key in line: " + line);
    if (section.empty()) {
      if (key == "experiment")
        cfg.experiment = value;
      else if (key == "seed")
        cfg.seed = std::stoull(value);
      else if (key == "out")
        cfg.out_dir = value;
      else if (key == "trace")
        cfg.trace = (value == "1" || value == "true");
      else
        throw ConfigError("unknown top-level key: " + key);
    } else {
      cfg.params[section + "." + key] = value;
    }
  }
  return cfg;
}

ExperimentConfig parse_config_file(const std::string& path) {
  std::ifstream is(path);
  if (!is) throw ConfigError("cannot open config file: " + path);
  std::stringstream ss;
  ss << is.rdbuf();
  return parse_config_text(ss.str());
}

bool evaluate_record(const ResultRecord& r) {
  if (r.cmp == "le") return r.measured <= r.bound + r.tolerance;
  if (r.cmp == "ge") return r.measured >= r.bound - r.tolerance;
  if (r.cmp == "abs") return std::abs(r.measured - r.bound) <= r.tolerance;
  if (r.cmp == "rel")
    return std::abs(r.measured - r.bound) <= r.tolerance * std::max(1.0, std::abs(r.bound));
  throw std::runtime_error("unknown comparison kind: " + r.cmp);
}

ResultRecord make_record(const std::string& experiment, const std::string& param,
                         const std::string& quantity, double measured, double bound,
                         const std::string& cmp, double tolerance) {
  ResultRecord r;
  r.experiment = experiment;
  r.param = param;
  r.quantity = quantity;
  r.measured = measured;
  r.bound = bound;
  r.cmp = cmp;
  r.tolerance = tolerance;
  r.pass = evaluate_record(r);
  return r;
}

void write_records_csv(const std::vector<ResultRecord>& records, const std::string& path) {
  std::ofstream os(path);
  if (!os) throw std::runtime_error("cannot open " + path);
  os << "experiment,param,quantity,measured,bound,cmp,tolerance,pass,runtime_s\n";
  for (const auto& r : records) {
    os << r.experiment << ',' << r.param << ',' << r.quantity << ',' << fmt_double(r.measured)
       << ',' << fmt_double(r.bound) << ',' << r.cmp << ',' << fmt_double(r.tolerance) << ','
       << (r.pass ? 1 : 0) << ',' << fmt_double(r.runtime_s) << '\n';
  }
}

std::vector<ResultRecord> read_records_csv(const std::string& path) {
  std::ifstream is(path);
  if (!is) throw std::runtime_error("cannot open " + path);
  std::vector<ResultRecord> out;
  std::string line;
  std::getline(is, line);  // header
  while (std::getline(is, line)) {
    if (trim(line).empty()) continue;
    std::stringstream ss(line);
    std::string tok;
    ResultRecord r;
    std::getline(ss, r.experiment, ',');
    std::getline(ss, r.param, ',');
    std::getline(ss, r.quantity, ',');
    std::getline(ss, tok, ',');
    r.measured = std::stod(tok);
    std::getline(ss, tok, ',');
    r.bound = std::stod(tok);
    std::getline(ss, r.cmp, ',');
    std::getline(ss, tok, ',');
    r.tolerance = std::stod(tok);
    std::getline(ss, tok, ',');
    r.pass = (tok == "1");
    std::getline(ss, tok, ',');
    r.runtime_s = std::stod(tok);
    out.push_back(std::move(r));
  }
  return out;
}

void write_records_json(const std::vector<ResultRecord>& records, const ExperimentConfig& cfg,
                        const std::string& path) {
  nlohmann::json j;
  j["schema_version"] = 1;
  j["experiment"] = cfg.experiment;
  j["seed"] = cfg.seed;
  bool all = true;
  nlohmann::json rows = nlohmann::json::array();
  for (const auto& r : records) {
    all = all && r.pass;
    rows.push_back({{"param", r.param},
                    {"quantity", r.quantity},
                    {"measured", r.measured},
                    {"bound", r.bound},
                    {"cmp", r.cmp},
                    {"tolerance", r.tolerance},
                    {"pass", r.pass}});
  }
  j["pass"] = all;
  j["records"] = rows;
  std::ofstream os(path);
  if (!os) throw std::runtime_error("cannot open " + path);
  os << j.dump(2) << '\n';
}

const Experiment& find_experiment(const std::string& name) {
  for (const auto& e : experiment_catalog())
    if (e.name == name) return e;
  throw ConfigError("unknown experiment: " + name);
}

std::vector<ResultRecord> run_experiment(const ExperimentConfig& cfg) {
  const Experiment& exp = find_experiment(cfg.experiment);
  for (const auto& [key, value] : cfg.params) {
    (void)value;
    if (std::find(exp.accepted_keys.begin(), exp.accepted_keys.end(), key) ==
        exp.accepted_keys.end())
      throw ConfigError("unknown key '" + key + "' for experiment " + cfg.experiment);
  }
  std::vector<ResultRecord> records = exp.run(cfg);
  std::filesystem::create_directories(cfg.out_dir);
  write_records_csv(records, cfg.out_dir + "/" + cfg.experiment + ".csv");
  write_records_json(records, cfg, cfg.out_dir + "/" + cfg.experiment + ".json");
  return records;
}

VerifySummary verify_records(const std::vector<ResultRecord>& records) {
  VerifySummary s;
  for (const auto& r : records) {
    ++s.total;
    bool recomputed = evaluate_record(r);
    if (recomputed != r.pass) ++s.inconsistent;
    if (!recomputed) ++s.failing;
  }
  return s;
}

}  // namespace qot
