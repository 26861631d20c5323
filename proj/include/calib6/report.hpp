#pragma once

#include <json.hpp>

#include <map>
#include <string>
#include <vector>

namespace calib6 {

struct ReportCheck {
  std::string name;
  bool pass = false;
  double value = 0;
  double tol = 0;
  std::string paper_ref;
};

// Schema calib6/1: command echo, hashed config, one row per check,
// timings and emitted files.
struct Report {
  std::string command;
  nlohmann::json config;
  std::vector<ReportCheck> checks;
  std::map<std::string, double> timings;
  std::vector<std::string> files;
  nlohmann::json details;  // structured per-command payload

  void add(const std::string& name, bool pass, double value, double tol,
           const std::string& ref) {
    checks.push_back({name, pass, value, tol, ref});
  }
  bool all_pass() const {
    for (const auto& c : checks)
      if (!c.pass) return false;
    return true;
  }
  nlohmann::json to_json() const;
};

std::string config_hash(const nlohmann::json& config);

// write-once via temp file + rename
void write_atomic(const std::string& path, const std::string& content);

void print_report(const Report& report);

}  // namespace calib6
