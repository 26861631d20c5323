// calib6: verification harness for twisted special Lagrangian gluing data.
//
// Subcommands: verify-rays, verify-orbit, glue-segment, embed-graph, kappa.
// Exit codes: 0 pass, 1 check failure, 2 usage error, 3 numeric failure.

#include <CLI11.hpp>

#include <fstream>
#include <sstream>

#include "calib6/commands.hpp"

using namespace calib6;

namespace {

// optional JSON config files; explicitly passed flags win
nlohmann::json load_config(const std::string& path) {
  if (path.empty()) return nlohmann::json::object();
  std::ifstream in(path);
  if (!in) throw std::invalid_argument("cannot read config file " + path);
  return nlohmann::json::parse(in);
}

template <class T>
void set_if(CLI::App* sub, const char* flag, const nlohmann::json& j,
            const char* key, T& target) {
  if (sub->count(flag) == 0 && j.contains(key)) target = j.at(key).get<T>();
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"calibrated-geometry verification toolkit"};
  app.require_subcommand(1);

  VerifyRaysConfig rays_cfg;
  std::string rays_config_file;
  auto* rays = app.add_subcommand("verify-rays", "ray counts of the cone-plane table");
  rays->add_option("--seeds", rays_cfg.seeds, "seed lattice size");
  rays->add_option("--threads", rays_cfg.threads, "worker threads");
  rays->add_option("--out", rays_cfg.out, "report path");
  rays->add_option("--config", rays_config_file, "JSON config file (flags win)");

  VerifyOrbitConfig orbit_cfg;
  std::string orbit_config_file;
  auto* orbit = app.add_subcommand("verify-orbit", "orbit differential rank and kappa table");
  orbit->add_option("--nmax", orbit_cfg.nmax, "kappa table size");
  orbit->add_option("--out", orbit_cfg.out, "report path");
  orbit->add_option("--config", orbit_config_file, "JSON config file (flags win)");

  int kappa_nmax = 12;
  std::string kappa_out;
  auto* kappa = app.add_subcommand("kappa", "dimension-count table only");
  kappa->add_option("--nmax", kappa_nmax, "table size");
  kappa->add_option("--out", kappa_out, "report path");

  GlueSegmentConfig glue_cfg;
  std::string glue_mode = "reflected";
  auto* glue = app.add_subcommand("glue-segment", "segment gluing certificates");
  glue->add_option("--mode", glue_mode, "reflected|slopes|tangent")
      ->check(CLI::IsMember({"reflected", "slopes", "tangent"}));
  glue->add_option("--rho1", glue_cfg.glue.rho1, "first slope (slopes mode)");
  glue->add_option("--rho2", glue_cfg.glue.rho2, "second slope (slopes mode)");
  glue->add_option("--p3", glue_cfg.glue.p3, "half-distance of the cone points");
  glue->add_option("--grid", glue_cfg.glue.grid_n, "transverse grid nodes");
  glue->add_option("--grid-axial", glue_cfg.glue.grid_axial, "axial grid nodes");
  glue->add_option("--tube-radius", glue_cfg.glue.tube_radius,
                   "tube radius (<=0: auto-shrink)");
  glue->add_option("--comass-points", glue_cfg.glue.comass_points,
                   "comass sample points");
  glue->add_option("--mesh", glue_cfg.mesh, "OBJ output path");
  glue->add_option("--out", glue_cfg.out, "report path");
  std::string glue_config_file;
  glue->add_option("--config", glue_config_file, "JSON config file (flags win)");

  EmbedGraphConfig embed_cfg;
  std::string graph_path;
  auto* embed = app.add_subcommand("embed-graph", "book embedding of a graph");
  embed->add_option("--graph", graph_path, "graph JSON file")->required();
  embed->add_option("--p3", embed_cfg.embed.p3, "spine spacing half-unit");
  embed->add_option("--seeds", embed_cfg.embed.ray_seeds, "ray-count seeds");
  embed->add_option("--samples", embed_cfg.embed.polyline_samples,
                    "polyline samples per edge");
  embed->add_option("--glue-edges", embed_cfg.glue_edges,
                    "all | none | <count> | default");
  embed->add_option("--glue-grid", embed_cfg.glue_grid_n,
                    "transverse grid for edge packages");
  embed->add_option("--glue-grid-axial", embed_cfg.glue_grid_axial,
                    "axial grid for edge packages");
  embed->add_option("--out", embed_cfg.out_dir, "artifact directory");
  std::string embed_config_file;
  embed->add_option("--config", embed_config_file, "JSON config file (flags win)");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);  // help output, exit 0
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return 2;
  }

  try {
    Report report;
    if (rays->parsed()) {
      auto j = load_config(rays_config_file);
      set_if(rays, "--seeds", j, "seeds", rays_cfg.seeds);
      set_if(rays, "--threads", j, "threads", rays_cfg.threads);
      set_if(rays, "--out", j, "out", rays_cfg.out);
      report = cmd_verify_rays(rays_cfg);
    } else if (orbit->parsed()) {
      auto j = load_config(orbit_config_file);
      set_if(orbit, "--nmax", j, "nmax", orbit_cfg.nmax);
      set_if(orbit, "--out", j, "out", orbit_cfg.out);
      report = cmd_verify_orbit(orbit_cfg);
    } else if (kappa->parsed()) {
      report = cmd_kappa(kappa_nmax, kappa_out);
    } else if (glue->parsed()) {
      auto j = load_config(glue_config_file);
      set_if(glue, "--mode", j, "mode", glue_mode);
      set_if(glue, "--rho1", j, "rho1", glue_cfg.glue.rho1);
      set_if(glue, "--rho2", j, "rho2", glue_cfg.glue.rho2);
      set_if(glue, "--p3", j, "p3", glue_cfg.glue.p3);
      set_if(glue, "--grid", j, "grid", glue_cfg.glue.grid_n);
      set_if(glue, "--grid-axial", j, "grid_axial", glue_cfg.glue.grid_axial);
      set_if(glue, "--tube-radius", j, "tube_radius", glue_cfg.glue.tube_radius);
      set_if(glue, "--comass-points", j, "comass_points", glue_cfg.glue.comass_points);
      set_if(glue, "--mesh", j, "mesh", glue_cfg.mesh);
      set_if(glue, "--out", j, "out", glue_cfg.out);
      glue_cfg.glue.mode = glue_mode == "reflected" ? GlueMode::reflected
                           : glue_mode == "slopes"  ? GlueMode::slopes
                                                    : GlueMode::tangent;
      report = cmd_glue_segment(glue_cfg);
    } else if (embed->parsed()) {
      auto j = load_config(embed_config_file);
      set_if(embed, "--p3", j, "p3", embed_cfg.embed.p3);
      set_if(embed, "--seeds", j, "seeds", embed_cfg.embed.ray_seeds);
      set_if(embed, "--samples", j, "samples", embed_cfg.embed.polyline_samples);
      set_if(embed, "--glue-edges", j, "glue_edges", embed_cfg.glue_edges);
      set_if(embed, "--glue-grid", j, "glue_grid", embed_cfg.glue_grid_n);
      set_if(embed, "--glue-grid-axial", j, "glue_grid_axial", embed_cfg.glue_grid_axial);
      set_if(embed, "--out", j, "out", embed_cfg.out_dir);
      std::ifstream in(graph_path);
      if (!in) {
        std::fprintf(stderr, "cannot read graph file %s\n", graph_path.c_str());
        return 2;
      }
      std::stringstream ss;
      ss << in.rdbuf();
      embed_cfg.graph_json = ss.str();
      report = cmd_embed_graph(embed_cfg);
    }
    print_report(report);
    return report.all_pass() ? 0 : 1;
  } catch (const std::invalid_argument& e) {
    std::fprintf(stderr, "usage error: %s\n", e.what());
    return 2;
  } catch (const nlohmann::json::exception& e) {
    std::fprintf(stderr, "usage error: %s\n", e.what());
    return 2;
  } catch (const std::exception& e) {
    std::fprintf(stderr, "numeric failure: %s\n", e.what());
    return 3;
  }
}
