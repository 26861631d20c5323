#pragma once

#include "calib6/graph_embed.hpp"
#include "calib6/report.hpp"

namespace calib6 {

struct VerifyRaysConfig {
  int seeds = 50000;
  int threads = 2;
  std::string out;  // optional report path
};

Report cmd_verify_rays(const VerifyRaysConfig& cfg);

struct VerifyOrbitConfig {
  int nmax = 12;
  std::string out;
};

Report cmd_verify_orbit(const VerifyOrbitConfig& cfg);

Report cmd_kappa(int nmax, const std::string& out);

struct GlueSegmentConfig {
  GlueConfig glue;
  std::string out;   // report path
  std::string mesh;  // optional OBJ path
};

Report cmd_glue_segment(const GlueSegmentConfig& cfg);

struct EmbedGraphConfig {
  EmbedOptions embed;
  std::string graph_json;   // file contents (already read)
  std::string out_dir;      // artifact directory, optional
  std::string glue_edges = "default";  // all | none | <k> | default
  int glue_grid_n = 17;
  int glue_grid_axial = 129;
};

Report cmd_embed_graph(const EmbedGraphConfig& cfg);

// JSON serialization of an embedding plan (positions, matrices, pages,
// polylines), the schema behind embed-graph artifacts
nlohmann::json embedding_plan_json(const EmbeddingPlan& plan);

const char* glue_mode_name(GlueMode mode);

}  // namespace calib6
