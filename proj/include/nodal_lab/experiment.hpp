#pragma once

#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "nodal_lab/concentration.hpp"
#include "nodal_lab/mesh.hpp"

namespace nodal_lab {

// Resolved configuration of one check run. Precedence: CLI flags over config
// file over defaults; the resolved values are echoed into every report.
struct ExperimentConfig {
  std::string check;                  // nodal-tube | boundary | iteration |
                                      // bsep | cm-omega | tail | lp | chebyshev
  std::string model;                  // "icosphere:depth=5", "torus:n=128",
                                      // "disk:depth=5", "square:n=64",
                                      // "strip:n=64,width=1", or "file:PATH"
  std::string mode;                   // AnalyticMode spec, when applicable
  std::string tier = "discrete";      // "oracle" | "discrete"
  double xi = 0.1;
  std::vector<double> etas = {0.25};
  std::optional<double> c;            // tail/lp constant; fitted when absent
  std::vector<double> p_list = {1, 2, 4, 8, 16};
  int r_points = 60;
  std::optional<double> r_max;
  int steiner = 2;
  int bsep_k = 1;
  std::string out;                    // report JSON path ("" = stdout)
  std::string csv;                    // optional CSV mirror

  static ExperimentConfig from_json(const nlohmann::ordered_json& j);
  nlohmann::ordered_json to_json() const;
};

// Model construction ("icosphere:depth=4" etc.); GeometryMismatch/
// InvalidArgument on unknown shapes or parameters.
TriMesh make_model(const std::string& model_spec);

// Runs one configured check; returns every report it produced (iteration and
// bsep runs can emit several).
std::vector<CheckReport> run_check(const ExperimentConfig& config);

// Named suites. Entries run concurrently up to `jobs`; reports land in
// out_dir as <entry>.report.json/.csv plus an aggregate suite.json. Returns
// true when every entry passed. "convergence" also writes supgap.csv.
bool run_suite(const std::string& name, const std::string& out_dir, int jobs);

// Suite entry listing (name + config), exposed for tests.
struct SuiteEntry {
  std::string name;
  ExperimentConfig config;
};
std::vector<SuiteEntry> suite_entries(const std::string& name);

// NODAL_LAB_JOBS env var, else 1.
int default_jobs();

// CLI entry point (gen/eig/nodal/check/suite/fit). Returns the process exit
// code: 0 pass, 1 violation, 2 error.
int run_cli(int argc, const char* const* argv);

}  // namespace nodal_lab
