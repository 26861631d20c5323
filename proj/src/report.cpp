#include "calib6/report.hpp"

#include <cinttypes>
#include <cstdio>
#include <fstream>
#include <stdexcept>

namespace calib6 {

std::string config_hash(const nlohmann::json& config) {
  std::string text = config.dump();  // nlohmann keeps keys sorted
  uint64_t h = 1469598103934665603ull;
  for (unsigned char c : text) {
    h ^= c;
    h *= 1099511628211ull;
  }
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016" PRIx64, h);
  return buf;
}

nlohmann::json Report::to_json() const {
  nlohmann::json j;
  j["schema"] = "calib6/1";
  j["command"] = command;
  j["config"] = config;
  j["config"]["hash"] = config_hash(config);
  j["checks"] = nlohmann::json::array();
  for (const auto& c : checks) {
    nlohmann::json row;
    row["name"] = c.name;
    row["status"] = c.pass ? "pass" : "fail";
    row["value"] = c.value;
    row["tol"] = c.tol;
    row["paper_ref"] = c.paper_ref;
    j["checks"].push_back(row);
  }
  j["status"] = all_pass() ? "pass" : "fail";
  j["timings"] = timings;
  j["files"] = files;
  if (!details.is_null()) j["details"] = details;
  return j;
}

void write_atomic(const std::string& path, const std::string& content) {
  std::string tmp = path + ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw std::runtime_error("cannot open " + tmp);
    out << content;
  }
  if (std::rename(tmp.c_str(), path.c_str()) != 0)
    throw std::runtime_error("cannot rename " + tmp + " to " + path);
}

void print_report(const Report& report) {
  std::printf("== %s ==\n", report.command.c_str());
  for (const auto& c : report.checks)
    std::printf("  [%s] %-44s value %13.6e  tol %-10.4g (%s)\n",
                c.pass ? "pass" : "FAIL", c.name.c_str(), c.value, c.tol,
                c.paper_ref.c_str());
  std::printf("overall: %s\n", report.all_pass() ? "pass" : "FAIL");
}

}  // namespace calib6
