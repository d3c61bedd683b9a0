#include "nodal_lab/experiment.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <thread>

#include <CLI11.hpp>

#include "nodal_lab/analytic.hpp"
#include "nodal_lab/errors.hpp"
#include "nodal_lab/nodal.hpp"
#include "nodal_lab/spectral.hpp"

namespace nodal_lab {

namespace {

using ordered_json = nlohmann::ordered_json;

std::vector<double> as_doubles(const ordered_json& v, const std::string& key) {
  if (!v.is_array() || v.empty())
    throw InvalidArgument("config key '" + key + "' needs a nonempty array");
  std::vector<double> out;
  for (const auto& x : v) {
    if (!x.is_number())
      throw InvalidArgument("config key '" + key + "' holds a non-number");
    out.push_back(x.get<double>());
  }
  return out;
}

}  // namespace

ExperimentConfig ExperimentConfig::from_json(const ordered_json& j) {
  if (!j.is_object()) throw InvalidArgument("config must be a JSON object");
  ExperimentConfig cfg;
  for (const auto& [key, val] : j.items()) {
    if (key == "check") cfg.check = val.get<std::string>();
    else if (key == "model") cfg.model = val.get<std::string>();
    else if (key == "mode") cfg.mode = val.get<std::string>();
    else if (key == "tier") cfg.tier = val.get<std::string>();
    else if (key == "xi") cfg.xi = val.get<double>();
    else if (key == "etas") cfg.etas = as_doubles(val, key);
    else if (key == "c") { if (!val.is_null()) cfg.c = val.get<double>(); }
    else if (key == "p_list") cfg.p_list = as_doubles(val, key);
    else if (key == "r_points") cfg.r_points = val.get<int>();
    else if (key == "r_max") { if (!val.is_null()) cfg.r_max = val.get<double>(); }
    else if (key == "steiner") cfg.steiner = val.get<int>();
    else if (key == "bsep_k") cfg.bsep_k = val.get<int>();
    else if (key == "out") cfg.out = val.get<std::string>();
    else if (key == "csv") cfg.csv = val.get<std::string>();
    else throw InvalidArgument("unknown config key: " + key);
  }
  return cfg;
}

ordered_json ExperimentConfig::to_json() const {
  ordered_json j;
  j["check"] = check;
  j["model"] = model;
  j["mode"] = mode;
  j["tier"] = tier;
  j["xi"] = xi;
  j["etas"] = etas;
  j["c"] = c ? ordered_json(*c) : ordered_json(nullptr);
  j["p_list"] = p_list;
  j["r_points"] = r_points;
  j["r_max"] = r_max ? ordered_json(*r_max) : ordered_json(nullptr);
  j["steiner"] = steiner;
  j["bsep_k"] = bsep_k;
  j["out"] = out;
  j["csv"] = csv;
  return j;
}

namespace {

std::map<std::string, std::string> split_params(const std::string& body) {
  std::map<std::string, std::string> kv;
  size_t pos = 0;
  while (pos < body.size()) {
    size_t comma = body.find(',', pos);
    if (comma == std::string::npos) comma = body.size();
    std::string item = body.substr(pos, comma - pos);
    size_t eq = item.find('=');
    if (eq == std::string::npos || eq == 0 || eq + 1 == item.size())
      throw InvalidArgument("expected key=value, got '" + item + "'");
    kv[item.substr(0, eq)] = item.substr(eq + 1);
    pos = comma + 1;
  }
  return kv;
}

int parse_int(const std::string& s) {
  size_t used = 0;
  int v = 0;
  try {
    v = std::stoi(s, &used);
  } catch (const std::exception&) {
    throw InvalidArgument("bad integer '" + s + "'");
  }
  if (used != s.size()) throw InvalidArgument("bad integer '" + s + "'");
  return v;
}

double parse_double(const std::string& s) {
  size_t used = 0;
  double v = 0;
  try {
    v = std::stod(s, &used);
  } catch (const std::exception&) {
    throw InvalidArgument("bad number '" + s + "'");
  }
  if (used != s.size()) throw InvalidArgument("bad number '" + s + "'");
  return v;
}

// Parameter map with consumption tracking, so leftovers turn into errors.
class Params {
 public:
  explicit Params(const std::string& body) : kv_(split_params(body)) {}
  int geti(const std::string& key, int fallback) {
    auto it = kv_.find(key);
    if (it == kv_.end()) return fallback;
    int v = parse_int(it->second);
    kv_.erase(it);
    return v;
  }
  double getd(const std::string& key, double fallback) {
    auto it = kv_.find(key);
    if (it == kv_.end()) return fallback;
    double v = parse_double(it->second);
    kv_.erase(it);
    return v;
  }
  void expect_empty(const std::string& what) const {
    if (!kv_.empty())
      throw InvalidArgument("unknown " + what + " parameter: " +
                            kv_.begin()->first);
  }

 private:
  std::map<std::string, std::string> kv_;
};

// x-bounded, y-periodic band of width w: a torus of period 2w cut at x = w.
TriMesh make_strip(int n, double width) {
  if (n < 3) throw InvalidArgument("strip needs n >= 3");
  if (!(width > 0)) throw InvalidArgument("strip width must be positive");
  TriMesh torus = generate_flat_torus(2 * n, n, 2.0 * width, 1.0);
  std::vector<int> subset;
  double cut = width * (1.0 + 1e-12);
  for (int v = 0; v < torus.vertex_count(); ++v)
    if (torus.vertices[v].x() <= cut) subset.push_back(v);
  return extract_submesh(torus, subset);
}

}  // namespace

TriMesh make_model(const std::string& model_spec) {
  if (model_spec.empty()) throw InvalidArgument("empty model spec");
  size_t colon = model_spec.find(':');
  std::string shape = model_spec.substr(0, colon);
  std::string body =
      colon == std::string::npos ? "" : model_spec.substr(colon + 1);
  if (shape == "file") {
    if (body.empty()) throw InvalidArgument("file: needs a path");
    return read_off(body);
  }

  Params params(body);
  TriMesh mesh;
  if (shape == "icosphere") {
    int depth = params.geti("depth", -1);
    if (depth < 0) throw InvalidArgument("icosphere needs depth=<int>");
    mesh = generate_icosphere(depth);
  } else if (shape == "torus") {
    int n = params.geti("n", -1);
    int nx = params.geti("nx", n), ny = params.geti("ny", n);
    double lx = params.getd("lx", 1.0), ly = params.getd("ly", 1.0);
    if (nx < 0 || ny < 0) throw InvalidArgument("torus needs n=<int>");
    mesh = generate_flat_torus(nx, ny, lx, ly);
  } else if (shape == "disk") {
    int depth = params.geti("depth", -1);
    double radius = params.getd("radius", 1.0);
    if (depth < 0) throw InvalidArgument("disk needs depth=<int>");
    mesh = generate_disk(depth, radius);
  } else if (shape == "square") {
    int n = params.geti("n", -1);
    int nx = params.geti("nx", n), ny = params.geti("ny", n);
    double lx = params.getd("lx", 1.0), ly = params.getd("ly", 1.0);
    if (nx < 0 || ny < 0) throw InvalidArgument("square needs n=<int>");
    mesh = generate_grid(nx, ny, lx, ly);
  } else if (shape == "strip") {
    int n = params.geti("n", 48);
    double width = params.getd("width", 1.0);
    mesh = make_strip(n, width);
  } else {
    throw InvalidArgument("unknown model shape: " + shape);
  }
  params.expect_empty(shape);
  return mesh;
}

namespace {

std::vector<double> make_grid(double r_max, int points) {
  if (points < 2) throw InvalidArgument("r_points must be >= 2");
  if (!(r_max > 0)) throw InvalidArgument("r_max must be positive");
  std::vector<double> grid(points);
  for (int i = 0; i < points; ++i) grid[i] = r_max * i / (points - 1);
  return grid;
}

double resolve_r_max(const ExperimentConfig& cfg, double lambda) {
  if (cfg.r_max) return *cfg.r_max;
  return 1.2 * 5.0 / std::sqrt(lambda);
}

const std::string& require_model(const ExperimentConfig& cfg) {
  if (cfg.model.empty())
    throw InvalidArgument(cfg.check + " (discrete tier) needs a model");
  return cfg.model;
}

AnalyticMode require_mode(const ExperimentConfig& cfg) {
  if (cfg.mode.empty()) throw InvalidArgument(cfg.check + " needs a mode");
  AnalyticMode mode = AnalyticMode::parse(cfg.mode);
  if (!(mode.lambda > 0))
    throw InvalidArgument("mode must have a positive eigenvalue");
  return mode;
}

// Boundary-oracle shape for a model spec; discretization parameters (n,
// depth) are irrelevant to the exact curve and skipped.
BoundaryShape model_boundary_shape(const std::string& model_spec) {
  size_t colon = model_spec.find(':');
  std::string shape = model_spec.substr(0, colon);
  std::string body =
      colon == std::string::npos ? "" : model_spec.substr(colon + 1);
  Params params(body);
  BoundaryShape out;
  if (shape == "disk") {
    params.geti("depth", 0);
    out.kind = BoundaryShape::Kind::Disk;
    out.size = params.getd("radius", 1.0);
  } else if (shape == "square") {
    params.geti("n", 0);
    params.geti("nx", 0);
    params.geti("ny", 0);
    double lx = params.getd("lx", 1.0), ly = params.getd("ly", 1.0);
    if (lx != ly)
      throw UnsupportedOracle("boundary oracle needs a square, got " +
                              model_spec);
    out.kind = BoundaryShape::Kind::Square;
    out.size = lx;
  } else if (shape == "strip") {
    params.geti("n", 0);
    out.kind = BoundaryShape::Kind::Strip;
    out.size = params.getd("width", 1.0);
  } else {
    throw UnsupportedOracle("no boundary oracle for model: " + model_spec);
  }
  params.expect_empty(shape);
  return out;
}

CheckRecord plain_record(double x, double lhs, double rhs, double tol) {
  CheckRecord rec;
  rec.x = x;
  rec.lhs = lhs;
  rec.rhs = rhs;
  rec.slack = rhs - lhs;
  rec.pass = lhs <= rhs + tol;
  return rec;
}

void refresh_summary(CheckReport& report) {
  report.pass_all = true;
  report.max_violation = 0.0;
  for (const auto& rec : report.records) {
    report.pass_all = report.pass_all && rec.pass;
    report.max_violation = std::max(report.max_violation, rec.lhs - rec.rhs);
  }
  report.max_violation = std::max(report.max_violation, 0.0);
}

void stamp_mesh(CheckReport& report, const TriMesh& mesh) {
  report.mesh_h = mesh.mean_edge_length();
  report.mesh_depth = mesh.depth_hint;
}

double profile_supgap(const TubeProfile& profile, const OracleCurve& curve) {
  double gap = 0.0;
  for (size_t i = 0; i < profile.r.size(); ++i)
    gap = std::max(gap, std::abs(profile.mu[i] - curve.mu(profile.r[i])));
  return gap;
}

void echo_config(CheckReport& report, const ExperimentConfig& cfg) {
  ordered_json merged = cfg.to_json();
  for (const auto& [key, val] : report.config.items()) merged[key] = val;
  report.config = std::move(merged);
}

std::vector<CheckReport> run_nodal_tube(const ExperimentConfig& cfg) {
  AnalyticMode mode = require_mode(cfg);
  auto grid = make_grid(resolve_r_max(cfg, mode.lambda), cfg.r_points);
  CheckReport report;
  if (cfg.tier == "oracle") {
    OracleCurve curve = tube_complement_oracle(mode);
    TubeProfile profile = discretize_curve(curve.mu, grid);
    report = check_nodal_concentration(profile, mode.lambda, 0.0);
    report.config["oracle"] = curve.description;
  } else if (cfg.tier == "discrete") {
    TriMesh mesh = make_model(require_model(cfg));
    VolumeMeasure measure = normalized_measure(mesh);
    Eigen::VectorXd field = sample(mode, mesh);
    NodalSet nodal = extract_nodal_set(mesh, field);
    DistanceField dist = distance_to_set(mesh, nodal, cfg.steiner);
    TubeProfile profile = tube_profile(dist, measure, grid);
    double tol =
        discretization_tolerance(mesh.mean_edge_length(), mode.lambda);
    report = check_nodal_concentration(profile, mode.lambda, tol);
    stamp_mesh(report, mesh);
    try {
      report.config["oracle_supgap"] =
          profile_supgap(profile, tube_complement_oracle(mode));
    } catch (const UnsupportedOracle&) {
    }
  } else {
    throw InvalidArgument("unknown tier: " + cfg.tier);
  }
  return {report};
}

// Shared profile acquisition for the boundary-decay family of checks.
struct BoundaryContext {
  TubeProfile profile;
  double lambda1 = 0.0;
  double tol = 0.0;
  double mesh_h = 0.0;
  int mesh_depth = -1;
  std::optional<double> supgap;
};

BoundaryContext boundary_context(const ExperimentConfig& cfg) {
  BoundaryContext ctx;
  if (cfg.tier == "oracle") {
    BoundaryShape shape = model_boundary_shape(require_model(cfg));
    OracleCurve curve = boundary_oracle(shape);
    ctx.lambda1 = curve.lambda;
    auto grid = make_grid(resolve_r_max(cfg, ctx.lambda1), cfg.r_points);
    ctx.profile = discretize_curve(curve.mu, grid);
  } else if (cfg.tier == "discrete") {
    TriMesh mesh = make_model(require_model(cfg));
    if (mesh.closed())
      throw InvalidArgument("boundary checks need a mesh with boundary");
    VolumeMeasure measure = normalized_measure(mesh);
    ctx.lambda1 = dirichlet_lambda1(mesh);
    auto grid = make_grid(resolve_r_max(cfg, ctx.lambda1), cfg.r_points);
    ctx.profile =
        boundary_distance_profile(mesh, measure, grid, cfg.steiner);
    ctx.tol = discretization_tolerance(mesh.mean_edge_length(), ctx.lambda1);
    ctx.mesh_h = mesh.mean_edge_length();
    ctx.mesh_depth = mesh.depth_hint;
    try {
      ctx.supgap = profile_supgap(
          ctx.profile, boundary_oracle(model_boundary_shape(cfg.model)));
    } catch (const UnsupportedOracle&) {
    }
  } else {
    throw InvalidArgument("unknown tier: " + cfg.tier);
  }
  return ctx;
}

void stamp_boundary(CheckReport& report, const BoundaryContext& ctx) {
  report.mesh_h = ctx.mesh_h;
  report.mesh_depth = ctx.mesh_depth;
  if (ctx.supgap) report.config["oracle_supgap"] = *ctx.supgap;
}

std::vector<CheckReport> run_boundary(const ExperimentConfig& cfg) {
  BoundaryContext ctx = boundary_context(cfg);
  CheckReport report = check_boundary_decay(ctx.profile, ctx.lambda1, ctx.tol);
  stamp_boundary(report, ctx);
  return {report};
}

std::vector<CheckReport> run_iteration(const ExperimentConfig& cfg) {
  BoundaryContext ctx = boundary_context(cfg);
  // Pairs over the uniform grid itself, so r + eps lands back on the grid.
  const auto& grid = ctx.profile.r;
  int last = static_cast<int>(grid.size()) - 1;
  int max_i = 2 * last / 3, max_j = std::max(1, last / 3);
  std::vector<std::pair<double, double>> pairs;
  for (int i = 0; i <= max_i; ++i)
    for (int j = 1; j <= max_j && i + j <= last; ++j)
      pairs.emplace_back(grid[i], grid[j]);
  CheckReport report =
      check_iteration_inequality(ctx.profile, ctx.lambda1, pairs, ctx.tol);
  stamp_boundary(report, ctx);
  return {report};
}

std::vector<CheckReport> run_bsep(const ExperimentConfig& cfg) {
  if (cfg.etas.empty()) throw InvalidArgument("bsep needs at least one eta");
  if (cfg.bsep_k <= 1) {
    BoundaryContext ctx = boundary_context(cfg);
    CheckReport report;
    report.check = "bsep";
    report.lambda = ctx.lambda1;
    report.tol_h = ctx.tol;
    for (double eta : cfg.etas) {
      BsepResult result = bsep_k1(ctx.profile, ctx.lambda1, eta, ctx.tol);
      report.records.push_back(result.report.records[0]);
    }
    refresh_summary(report);
    stamp_boundary(report, ctx);
    return {report};
  }

  if (cfg.tier != "discrete")
    throw InvalidArgument("bsep with k > 1 runs on the discrete tier");
  TriMesh mesh = make_model(require_model(cfg));
  VolumeMeasure measure = normalized_measure(mesh);
  std::vector<double> etas = cfg.etas;
  if (static_cast<int>(etas.size()) == 1)
    etas.assign(cfg.bsep_k, etas[0]);
  if (static_cast<int>(etas.size()) != cfg.bsep_k)
    throw InvalidArgument("bsep needs one eta per region");
  double lambda_k = dirichlet_lambdas(mesh, cfg.bsep_k)[cfg.bsep_k - 1];
  double tol = discretization_tolerance(mesh.mean_edge_length(), lambda_k);
  SeparationCandidate cand =
      separation_candidate(mesh, measure, lambda_k, etas, tol);
  CheckReport report = cand.report;
  stamp_mesh(report, mesh);
  report.config["candidate"] = cand.separation;
  report.config["lambda_k"] = lambda_k;
  return {report};
}

// Discrete pipeline shared by cm-omega, tail, and lp.
struct CoverBundle {
  TriMesh mesh;
  VolumeMeasure measure;
  Eigen::VectorXd field;
  double lambda = 0.0;
  NodalCover cover;
  double total_energy = 0.0;  // m_g-weighted |grad f|^2, the Rayleigh numerator
  double tol = 0.0;
};

CoverBundle build_cover(const ExperimentConfig& cfg) {
  if (cfg.tier != "discrete")
    throw InvalidArgument(cfg.check + " runs on the discrete tier");
  AnalyticMode mode = require_mode(cfg);
  CoverBundle bundle;
  bundle.mesh = make_model(require_model(cfg));
  bundle.measure = normalized_measure(bundle.mesh);
  bundle.field = sample(mode, bundle.mesh);
  bundle.lambda = mode.lambda;
  NodalSet nodal = extract_nodal_set(bundle.mesh, bundle.field);
  GeodesicGraph graph(bundle.mesh, &nodal, cfg.steiner);
  DistanceField nodal_distance = distance_to_set(graph, bundle.mesh, nodal);
  Eigen::VectorXd energy =
      dirichlet_energy_density(bundle.mesh, bundle.field);
  bundle.cover = construct_nodal_cover(bundle.mesh, bundle.measure,
                                       bundle.field, nodal, graph,
                                       nodal_distance, energy, bundle.lambda,
                                       cfg.xi, CoverParams{});
  bundle.total_energy = bundle.measure.weights.dot(energy);
  bundle.tol = discretization_tolerance(bundle.mesh.mean_edge_length(),
                                        bundle.lambda);
  return bundle;
}

void echo_cover(CheckReport& report, const CoverBundle& bundle) {
  const NodalCover& cover = bundle.cover;
  ordered_json c;
  c["ball_radius"] = cover.ball_radius;
  c["energy_radius"] = cover.energy_radius;
  c["energy_radius_clamped"] = cover.energy_radius_clamped;
  c["centers"] = cover.center_nodes.size();
  c["kept"] = cover.kept.size();
  c["rejected"] = cover.rejected.size();
  c["threshold"] = cover.threshold;
  c["multiplicity"] = cover.covering_multiplicity;
  c["omega_measure"] = cover.omega_measure;
  c["rejected_measure"] = cover.rejected_measure;
  c["field_l2"] = cover.field_l2;
  report.config["cover"] = std::move(c);
}

std::vector<CheckReport> run_cm_omega(const ExperimentConfig& cfg) {
  CoverBundle bundle = build_cover(cfg);
  const NodalCover& cover = bundle.cover;
  CheckReport report;
  report.check = "cm-omega";
  report.lambda = bundle.lambda;
  report.tol_h = bundle.tol;
  stamp_mesh(report, bundle.mesh);

  // Good-set measure: m_g(Omega) >= 1 - xi, up to discretization.
  report.records.push_back(
      plain_record(cover.xi, 1.0 - cover.omega_measure, cover.xi,
                   bundle.tol));
  // Markov step over the energy balls, exact by construction.
  double rejected_energy_mass = 0.0;
  for (int i : cover.rejected)
    rejected_energy_mass += cover.energy_ball_measure[i];
  report.records.push_back(plain_record(
      static_cast<double>(cover.covering_multiplicity), rejected_energy_mass,
      cover.covering_multiplicity * bundle.total_energy / cover.threshold,
      0.0));
  // Triple-ball coverage of the R-neighborhood of the zero set, exact.
  report.records.push_back(
      plain_record(0.0, cover.covers_ball_neighborhood ? 0.0 : 1.0, 0.0,
                   0.0));
  report.fitted_constant = cover.inclusion_constant;
  refresh_summary(report);
  echo_cover(report, bundle);
  return {report};
}

std::vector<CheckReport> run_tail(const ExperimentConfig& cfg) {
  CoverBundle bundle = build_cover(cfg);
  double peak = bundle.field.cwiseAbs().maxCoeff();
  auto grid = make_grid(cfg.r_max ? *cfg.r_max : peak, cfg.r_points);
  double c = cfg.c ? *cfg.c
                   : fit_tail_constant(bundle.field, bundle.cover.in_omega,
                                       bundle.measure, cfg.xi, grid);
  CheckReport report =
      check_restricted_tail(bundle.field, bundle.cover.in_omega,
                            bundle.measure, cfg.xi, c, grid, bundle.tol);
  report.lambda = bundle.lambda;
  stamp_mesh(report, bundle.mesh);
  report.config["c_used"] = c;
  echo_cover(report, bundle);
  return {report};
}

std::vector<CheckReport> run_lp(const ExperimentConfig& cfg) {
  CoverBundle bundle = build_cover(cfg);
  double c = 0.0;
  if (cfg.c) {
    c = *cfg.c;
  } else {
    double peak = bundle.field.cwiseAbs().maxCoeff();
    c = fit_tail_constant(bundle.field, bundle.cover.in_omega, bundle.measure,
                          cfg.xi, make_grid(peak, cfg.r_points));
  }
  CheckReport report =
      check_restricted_lp(bundle.field, bundle.cover.in_omega, bundle.measure,
                          cfg.p_list, cfg.xi, c, bundle.tol);
  report.lambda = bundle.lambda;
  stamp_mesh(report, bundle.mesh);
  report.config["c_used"] = c;
  echo_cover(report, bundle);
  return {report};
}

std::vector<CheckReport> run_chebyshev(const ExperimentConfig& cfg) {
  if (cfg.tier != "discrete")
    throw InvalidArgument("chebyshev runs on the discrete tier");
  AnalyticMode mode = require_mode(cfg);
  TriMesh mesh = make_model(require_model(cfg));
  VolumeMeasure measure = normalized_measure(mesh);
  Eigen::VectorXd field = sample(mode, mesh);
  double peak = field.cwiseAbs().maxCoeff();
  if (!(peak > 0)) throw DegenerateField("field is identically zero");
  double top = cfg.r_max ? *cfg.r_max : 1.05 * peak;

  CheckReport report;
  report.check = "chebyshev";
  report.lambda = mode.lambda;
  report.tol_h = 0.0;  // finite Markov inequality, exact
  stamp_mesh(report, mesh);
  for (int i = 1; i <= cfg.r_points; ++i) {
    double r = top * i / cfg.r_points;
    report.records.push_back(chebyshev_tail(field, measure, r));
  }
  refresh_summary(report);
  return {report};
}

}  // namespace

std::vector<CheckReport> run_check(const ExperimentConfig& cfg) {
  std::vector<CheckReport> reports;
  if (cfg.check == "nodal-tube") reports = run_nodal_tube(cfg);
  else if (cfg.check == "boundary") reports = run_boundary(cfg);
  else if (cfg.check == "iteration") reports = run_iteration(cfg);
  else if (cfg.check == "bsep") reports = run_bsep(cfg);
  else if (cfg.check == "cm-omega") reports = run_cm_omega(cfg);
  else if (cfg.check == "tail") reports = run_tail(cfg);
  else if (cfg.check == "lp") reports = run_lp(cfg);
  else if (cfg.check == "chebyshev") reports = run_chebyshev(cfg);
  else throw InvalidArgument("unknown check: " + cfg.check);
  for (auto& report : reports) echo_config(report, cfg);
  return reports;
}

namespace {

ExperimentConfig suite_config(std::string check, std::string model,
                              std::string mode, std::string tier) {
  ExperimentConfig cfg;
  cfg.check = std::move(check);
  cfg.model = std::move(model);
  cfg.mode = std::move(mode);
  cfg.tier = std::move(tier);
  return cfg;
}

const std::vector<double> kSuiteEtas = {0.05, 0.1, 0.25, 0.5, 0.9};

}  // namespace

std::vector<SuiteEntry> suite_entries(const std::string& name) {
  std::vector<SuiteEntry> entries;
  auto add = [&entries](std::string entry_name, ExperimentConfig cfg) {
    entries.push_back({std::move(entry_name), std::move(cfg)});
  };

  if (name == "paper-core") {
    add("tube-torus-k1-oracle",
        suite_config("nodal-tube", "", "torus:kx=1,ky=0", "oracle"));
    add("tube-torus-k5-oracle",
        suite_config("nodal-tube", "", "torus:kx=5,ky=0", "oracle"));
    add("tube-sphere-l5-oracle",
        suite_config("nodal-tube", "", "sphere:l=5,m=0", "oracle"));
    add("tube-sphere-l8-oracle",
        suite_config("nodal-tube", "", "sphere:l=8,m=0", "oracle"));
    add("tube-torus-k3-discrete",
        suite_config("nodal-tube", "torus:n=64", "torus:kx=3,ky=0",
                     "discrete"));
    add("tube-sphere-l3-discrete",
        suite_config("nodal-tube", "icosphere:depth=4", "sphere:l=3,m=0",
                     "discrete"));
    add("boundary-disk-oracle",
        suite_config("boundary", "disk:radius=1", "", "oracle"));
    add("boundary-disk-discrete",
        suite_config("boundary", "disk:depth=5", "", "discrete"));
    add("boundary-square-discrete",
        suite_config("boundary", "square:n=48", "", "discrete"));
    add("iteration-disk-oracle",
        suite_config("iteration", "disk:radius=1", "", "oracle"));
    add("iteration-square-discrete",
        suite_config("iteration", "square:n=48", "", "discrete"));
    {
      auto cfg = suite_config("bsep", "disk:radius=1", "", "oracle");
      cfg.etas = kSuiteEtas;
      add("bsep-disk-oracle", cfg);
    }
    {
      auto cfg = suite_config("bsep", "strip:width=1", "", "oracle");
      cfg.etas = kSuiteEtas;
      add("bsep-strip-oracle", cfg);
    }
    {
      auto cfg = suite_config("bsep", "square:n=48", "", "discrete");
      cfg.etas = kSuiteEtas;
      add("bsep-square-discrete", cfg);
    }
    {
      auto cfg = suite_config("bsep", "square:n=48", "", "discrete");
      cfg.bsep_k = 2;
      cfg.etas = {0.1, 0.1};
      add("bsep-square-k2", cfg);
    }
  } else if (name == "cm") {
    {
      auto cfg = suite_config("cm-omega", "torus:n=128", "torus:kx=2,ky=0",
                              "discrete");
      cfg.xi = 0.1;
      add("cm-omega-torus-k2", cfg);
    }
    {
      auto cfg = suite_config("cm-omega", "torus:n=128", "torus:kx=3,ky=0",
                              "discrete");
      cfg.xi = 0.3;
      add("cm-omega-torus-k3", cfg);
    }
    {
      auto cfg =
          suite_config("tail", "torus:n=128", "torus:kx=2,ky=0", "discrete");
      cfg.xi = 0.1;
      add("tail-torus-k2", cfg);
    }
    {
      auto cfg =
          suite_config("lp", "torus:n=128", "torus:kx=2,ky=0", "discrete");
      cfg.xi = 0.1;
      add("lp-torus-k2", cfg);
    }
    add("chebyshev-torus-k1",
        suite_config("chebyshev", "torus:n=64", "torus:kx=1,ky=0",
                     "discrete"));
  } else if (name == "convergence") {
    for (int depth : {3, 4, 5})
      add("tube-sphere-l5-d" + std::to_string(depth),
          suite_config("nodal-tube", "icosphere:depth=" + std::to_string(depth),
                       "sphere:l=5,m=0", "discrete"));
    for (int n : {32, 64, 128})
      add("tube-torus-k2-n" + std::to_string(n),
          suite_config("nodal-tube", "torus:n=" + std::to_string(n),
                       "torus:kx=2,ky=0", "discrete"));
    for (int depth : {4, 5, 6})
      add("boundary-disk-d" + std::to_string(depth),
          suite_config("boundary", "disk:depth=" + std::to_string(depth), "",
                       "discrete"));
  } else {
    throw InvalidArgument("unknown suite: " + name);
  }
  return entries;
}

int default_jobs() {
  const char* env = std::getenv("NODAL_LAB_JOBS");
  if (!env) return 1;
  int jobs = std::atoi(env);
  return jobs >= 1 ? jobs : 1;
}

bool run_suite(const std::string& name, const std::string& out_dir, int jobs) {
  auto entries = suite_entries(name);
  std::filesystem::create_directories(out_dir);
  // Configs carry paths relative to out_dir, so two runs of the same suite
  // emit byte-identical reports no matter where they land.
  for (auto& entry : entries) {
    entry.config.out = entry.name + ".report.json";
    entry.config.csv = entry.name + ".report.csv";
  }

  const size_t n = entries.size();
  std::vector<std::vector<CheckReport>> results(n);
  std::vector<std::exception_ptr> failures(n);
  auto worker = [&](size_t i) {
    try {
      results[i] = run_check(entries[i].config);
    } catch (...) {
      failures[i] = std::current_exception();
    }
  };
  if (jobs <= 1) {
    for (size_t i = 0; i < n; ++i) worker(i);
  } else {
    std::atomic<size_t> next{0};
    std::vector<std::thread> pool;
    size_t width = std::min<size_t>(jobs, n);
    for (size_t t = 0; t < width; ++t)
      pool.emplace_back([&] {
        for (size_t i = next++; i < n; i = next++) worker(i);
      });
    for (auto& thread : pool) thread.join();
  }
  for (size_t i = 0; i < n; ++i)
    if (failures[i]) std::rethrow_exception(failures[i]);

  // Report files in suite order, independent of execution order.
  bool all_pass = true;
  ordered_json listing = ordered_json::array();
  for (size_t i = 0; i < n; ++i) {
    const CheckReport& report = results[i][0];
    report.write_json(out_dir + "/" + entries[i].config.out);
    report.write_csv(out_dir + "/" + entries[i].config.csv);
    all_pass = all_pass && report.pass_all;
    ordered_json item;
    item["name"] = entries[i].name;
    item["check"] = report.check;
    item["pass_all"] = report.pass_all;
    item["report"] = entries[i].name + ".report.json";
    listing.push_back(std::move(item));
  }

  ordered_json suite_json;
  suite_json["suite"] = name;
  suite_json["entries"] = std::move(listing);

  if (name == "convergence") {
    // Ladder families are named <family>-<level>; their oracle sup-gaps
    // must shrink as the level refines.
    std::ofstream csv(out_dir + "/supgap.csv");
    if (!csv) throw IoError("cannot open supgap.csv for writing");
    csv << "entry,h,supgap\n" << std::setprecision(17);
    std::map<std::string, std::vector<double>> families;
    std::vector<std::string> family_order;
    for (size_t i = 0; i < n; ++i) {
      const CheckReport& report = results[i][0];
      if (!report.config.contains("oracle_supgap")) continue;
      double gap = report.config["oracle_supgap"].get<double>();
      csv << entries[i].name << ',' << report.mesh_h << ',' << gap << '\n';
      std::string family = entries[i].name.substr(0, entries[i].name.rfind('-'));
      if (!families.count(family)) family_order.push_back(family);
      families[family].push_back(gap);
    }
    if (!csv) throw IoError("failed writing supgap.csv");
    bool monotone = true;
    for (const auto& family : family_order)
      for (size_t i = 1; i < families[family].size(); ++i)
        monotone = monotone && families[family][i] < families[family][i - 1];
    suite_json["supgap_monotone"] = monotone;
    all_pass = all_pass && monotone;
  }

  suite_json["pass"] = all_pass;
  std::ofstream os(out_dir + "/suite.json");
  if (!os) throw IoError("cannot open suite.json for writing");
  os << suite_json.dump(2) << '\n';
  if (!os) throw IoError("failed writing suite.json");
  return all_pass;
}

namespace {

void emit_json(const ordered_json& j, const std::string& out) {
  if (out.empty()) {
    std::cout << j.dump(2) << '\n';
    return;
  }
  std::ofstream os(out);
  if (!os) throw IoError("cannot open " + out + " for writing");
  os << j.dump(2) << '\n';
  if (!os) throw IoError("failed writing " + out);
}

int cmd_check(ExperimentConfig cfg) {
  auto reports = run_check(cfg);
  bool all_pass = true;
  for (size_t i = 0; i < reports.size(); ++i) {
    all_pass = all_pass && reports[i].pass_all;
    std::string out = cfg.out;
    std::string csv = cfg.csv;
    if (i > 0) {  // extra reports get a numeric suffix
      if (!out.empty()) out += "." + std::to_string(i);
      if (!csv.empty()) csv += "." + std::to_string(i);
    }
    if (out.empty())
      std::cout << reports[i].to_json().dump(2) << '\n';
    else
      reports[i].write_json(out);
    if (!csv.empty()) reports[i].write_csv(csv);
  }
  return all_pass ? 0 : 1;
}

}  // namespace

int run_cli(int argc, const char* const* argv) {
  CLI::App app{"nodal-lab: eigenfunction concentration checks on meshes"};
  app.require_subcommand(1);

  // gen
  auto* gen = app.add_subcommand("gen", "generate a model mesh, write OFF");
  std::string gen_shape, gen_out;
  int gen_depth = -1, gen_n = -1;
  double gen_radius = 1.0, gen_width = 1.0, gen_lx = 1.0, gen_ly = 1.0;
  gen->add_option("--shape", gen_shape, "icosphere|torus|disk|square|strip")
      ->required();
  gen->add_option("--depth", gen_depth, "refinement depth (icosphere, disk)");
  gen->add_option("--n", gen_n, "cells per side (torus, square, strip)");
  gen->add_option("--radius", gen_radius, "disk radius");
  gen->add_option("--width", gen_width, "strip width");
  gen->add_option("--lx", gen_lx, "x period/extent");
  gen->add_option("--ly", gen_ly, "y period/extent");
  gen->add_option("--out", gen_out, "output OFF path")->required();

  // eig
  auto* eig = app.add_subcommand("eig", "solve smallest eigenpairs");
  std::string eig_mesh, eig_out;
  int eig_k = 6;
  bool eig_dirichlet = false;
  eig->add_option("--mesh", eig_mesh, "OFF mesh path")->required();
  eig->add_option("--k", eig_k, "number of eigenpairs");
  eig->add_flag("--dirichlet", eig_dirichlet, "restrict to interior vertices");
  eig->add_option("--out", eig_out, "output JSON path (stdout when absent)");

  // nodal
  auto* nodal_cmd = app.add_subcommand("nodal",
                                       "extract the nodal set of a mode");
  std::string nodal_mesh, nodal_mode, nodal_out, nodal_csv;
  nodal_cmd->add_option("--mesh", nodal_mesh, "OFF mesh path")->required();
  nodal_cmd->add_option("--mode", nodal_mode, "analytic mode spec")
      ->required();
  nodal_cmd->add_option("--out", nodal_out, "nodal-set JSON path");
  nodal_cmd->add_option("--csv", nodal_csv, "tube-profile CSV path");

  // check
  auto* check = app.add_subcommand("check", "run one inequality check");
  std::string check_name, check_config;
  ExperimentConfig flags;
  check
      ->add_option("name", check_name,
                   "nodal-tube|boundary|iteration|bsep|cm-omega|tail|lp|"
                   "chebyshev")
      ->required()
      ->check(CLI::IsMember({"nodal-tube", "boundary", "iteration", "bsep",
                             "cm-omega", "tail", "lp", "chebyshev"}));
  check->add_option("--config", check_config, "JSON config file");
  check->add_option("--model", flags.model, "model spec");
  check->add_option("--mode", flags.mode, "analytic mode spec");
  check->add_option("--tier", flags.tier, "oracle|discrete");
  check->add_option("--xi", flags.xi, "bad-set budget");
  check->add_option("--eta", flags.etas, "separation measures");
  double flag_c = 0.0;
  check->add_option("--c", flag_c, "tail/lp constant (fitted when absent)");
  check->add_option("--p", flags.p_list, "Lp exponents");
  check->add_option("--r-points", flags.r_points, "grid size");
  double flag_r_max = 0.0;
  check->add_option("--r-max", flag_r_max, "grid upper end");
  check->add_option("--steiner", flags.steiner, "steiner points per edge");
  check->add_option("--k", flags.bsep_k, "number of separated regions");
  check->add_option("--out", flags.out, "report JSON path");
  check->add_option("--csv", flags.csv, "report CSV path");

  // suite
  auto* suite = app.add_subcommand("suite", "run a named check suite");
  std::string suite_name, suite_dir;
  int suite_jobs = default_jobs();
  suite->add_option("name", suite_name, "paper-core|cm|convergence")
      ->required();
  suite->add_option("--out-dir", suite_dir, "report directory")->required();
  suite->add_option("--jobs", suite_jobs, "parallel entries");

  // fit
  auto* fit = app.add_subcommand("fit", "fit an empirical constant");
  std::string fit_target, fit_mode, fit_tier = "analytic", fit_model, fit_out;
  double fit_xi = 0.1;
  int fit_steiner = GeodesicGraph::kDefaultSteinerPerEdge;
  fit->add_option("--target", fit_target, "density-c|tail-c|inclusion-c")
      ->required()
      ->check(CLI::IsMember({"density-c", "tail-c", "inclusion-c"}));
  fit->add_option("--mode", fit_mode, "analytic mode spec")->required();
  fit->add_option("--tier", fit_tier, "analytic|discrete (density-c only)");
  fit->add_option("--model", fit_model, "model spec (discrete fits)");
  fit->add_option("--xi", fit_xi, "bad-set budget (tail-c, inclusion-c)");
  fit->add_option("--steiner", fit_steiner, "steiner points per edge");
  fit->add_option("--out", fit_out, "output JSON path (stdout when absent)");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    int code = app.exit(e);
    return code == 0 ? 0 : 2;
  }

  try {
    if (gen->parsed()) {
      std::string spec;
      if (gen_shape == "icosphere" || gen_shape == "disk") {
        if (gen_depth < 0)
          throw InvalidArgument(gen_shape + " needs --depth");
        spec = gen_shape + ":depth=" + std::to_string(gen_depth);
        if (gen_shape == "disk")
          spec += ",radius=" + std::to_string(gen_radius);
      } else if (gen_shape == "torus" || gen_shape == "square") {
        if (gen_n < 0) throw InvalidArgument(gen_shape + " needs --n");
        spec = gen_shape + ":n=" + std::to_string(gen_n) +
               ",lx=" + std::to_string(gen_lx) +
               ",ly=" + std::to_string(gen_ly);
      } else if (gen_shape == "strip") {
        if (gen_n < 0) throw InvalidArgument("strip needs --n");
        spec = "strip:n=" + std::to_string(gen_n) +
               ",width=" + std::to_string(gen_width);
      } else {
        throw InvalidArgument("unknown shape: " + gen_shape);
      }
      TriMesh mesh = make_model(spec);
      write_off(mesh, gen_out);
      std::cout << gen_shape << ": " << mesh.vertex_count() << " vertices, "
                << mesh.face_count() << " faces, chi "
                << mesh.euler_characteristic() << '\n';
      return 0;
    }

    if (eig->parsed()) {
      TriMesh mesh = read_off(eig_mesh);
      std::vector<EigenPair> pairs = eig_dirichlet
                                         ? dirichlet_eigenpairs(mesh, eig_k)
                                         : smallest_eigenpairs(mesh, eig_k);
      ordered_json j;
      auto lambdas = ordered_json::array();
      auto fields = ordered_json::array();
      auto residuals = ordered_json::array();
      for (const auto& pair : pairs) {
        lambdas.push_back(pair.lambda);
        fields.push_back(std::vector<double>(
            pair.field.data(), pair.field.data() + pair.field.size()));
        residuals.push_back(pair.residual);
      }
      j["lambda"] = std::move(lambdas);
      j["fields"] = std::move(fields);
      j["residuals"] = std::move(residuals);
      emit_json(j, eig_out);
      return 0;
    }

    if (nodal_cmd->parsed()) {
      TriMesh mesh = read_off(nodal_mesh);
      AnalyticMode mode = AnalyticMode::parse(nodal_mode);
      Eigen::VectorXd field = sample(mode, mesh);
      NodalSet nodal = extract_nodal_set(mesh, field);
      DomainLabeling domains = nodal_domains(mesh, field);
      if (!nodal_out.empty()) write_nodal_set_json(mesh, nodal, nodal_out);
      if (!nodal_csv.empty()) {
        VolumeMeasure measure = normalized_measure(mesh);
        DistanceField dist = distance_to_set(mesh, nodal);
        tube_profile(dist, measure, default_r_grid(mode.lambda))
            .write_csv(nodal_csv);
      }
      std::cout << "crossings " << nodal.crossings.size() << '\n'
                << "zero-vertices " << nodal.zero_vertices.size() << '\n'
                << "domains " << domains.count << '\n';
      return 0;
    }

    if (check->parsed()) {
      ExperimentConfig cfg;
      if (check->count("--config")) {
        std::ifstream is(check_config);
        if (!is) throw IoError("cannot read config " + check_config);
        cfg = ExperimentConfig::from_json(ordered_json::parse(is));
      }
      cfg.check = check_name;
      if (check->count("--model")) cfg.model = flags.model;
      if (check->count("--mode")) cfg.mode = flags.mode;
      if (check->count("--tier")) cfg.tier = flags.tier;
      if (check->count("--xi")) cfg.xi = flags.xi;
      if (check->count("--eta")) cfg.etas = flags.etas;
      if (check->count("--c")) cfg.c = flag_c;
      if (check->count("--p")) cfg.p_list = flags.p_list;
      if (check->count("--r-points")) cfg.r_points = flags.r_points;
      if (check->count("--r-max")) cfg.r_max = flag_r_max;
      if (check->count("--steiner")) cfg.steiner = flags.steiner;
      if (check->count("--k")) cfg.bsep_k = flags.bsep_k;
      if (check->count("--out")) cfg.out = flags.out;
      if (check->count("--csv")) cfg.csv = flags.csv;
      return cmd_check(std::move(cfg));
    }

    if (suite->parsed())
      return run_suite(suite_name, suite_dir, suite_jobs) ? 0 : 1;

    if (fit->parsed()) {
      AnalyticMode mode = AnalyticMode::parse(fit_mode);
      ordered_json j;
      j["target"] = fit_target;
      j["mode"] = mode.name();
      j["lambda"] = mode.lambda;
      double value = 0.0;
      if (fit_target == "density-c") {
        j["tier"] = fit_tier;
        if (fit_tier == "analytic") {
          value = std::sqrt(mode.lambda) * max_nodal_distance(mode);
        } else if (fit_tier == "discrete") {
          if (fit_model.empty())
            throw InvalidArgument("discrete fit needs --model");
          j["model"] = fit_model;
          TriMesh mesh = make_model(fit_model);
          Eigen::VectorXd field = sample(mode, mesh);
          NodalSet nodal = extract_nodal_set(mesh, field);
          DistanceField dist = distance_to_set(mesh, nodal, fit_steiner);
          value = fit_density_constant(dist, mode.lambda);
        } else {
          throw InvalidArgument("unknown tier: " + fit_tier);
        }
      } else {
        if (fit_model.empty())
          throw InvalidArgument(fit_target + " needs --model");
        j["model"] = fit_model;
        j["xi"] = fit_xi;
        ExperimentConfig cfg;
        cfg.check = fit_target;
        cfg.model = fit_model;
        cfg.mode = fit_mode;
        cfg.xi = fit_xi;
        cfg.steiner = fit_steiner;
        CoverBundle bundle = build_cover(cfg);
        if (fit_target == "inclusion-c") {
          value = bundle.cover.inclusion_constant;
        } else {
          double peak = bundle.field.cwiseAbs().maxCoeff();
          value = fit_tail_constant(bundle.field, bundle.cover.in_omega,
                                    bundle.measure, fit_xi,
                                    make_grid(peak, 60));
        }
      }
      j["value"] = value;
      emit_json(j, fit_out);
      return 0;
    }
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 2;
  }
  return 2;
}

}  // namespace nodal_lab
