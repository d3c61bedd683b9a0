#include "nodal_lab/nodal.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <iomanip>
#include <limits>
#include <map>
#include <queue>
#include <set>

#include <json.hpp>

#include "nodal_lab/errors.hpp"
#include "nodal_lab/kernels.hpp"

namespace nodal_lab {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

// Sign after zero snapping: 0 when |f| <= tol * ||f||oo.
std::vector<int> snapped_signs(const Eigen::VectorXd& field, double zero_tol) {
  double peak = field.cwiseAbs().maxCoeff();
  if (!(peak > 0.0))
    throw DegenerateField("field is identically zero");
  double cut = zero_tol * peak;
  std::vector<int> sign(field.size());
  int nonzero = 0;
  for (Eigen::Index i = 0; i < field.size(); ++i) {
    sign[i] = std::abs(field[i]) <= cut ? 0 : (field[i] > 0 ? 1 : -1);
    nonzero += sign[i] != 0;
  }
  if (nonzero == 0)
    throw DegenerateField("field is identically zero after snapping");
  return sign;
}

}  // namespace

Eigen::Vector3d NodalSet::point_position(const TriMesh& mesh, int idx) const {
  int nc = static_cast<int>(crossings.size());
  if (idx < nc) return crossings[idx].position;
  return mesh.vertices[zero_vertices[idx - nc]];
}

NodalSet extract_nodal_set(const TriMesh& mesh, const Eigen::VectorXd& field,
                           double zero_tol) {
  if (field.size() != mesh.vertex_count())
    throw GeometryMismatch("field size does not match vertex count");
  auto sign = snapped_signs(field, zero_tol);

  NodalSet nodal;
  for (int v = 0; v < mesh.vertex_count(); ++v)
    if (sign[v] == 0) nodal.zero_vertices.push_back(v);

  std::vector<int> crossing_of_edge(mesh.edge_count(), -1);
  for (int e = 0; e < mesh.edge_count(); ++e) {
    int u = mesh.edges[e][0], v = mesh.edges[e][1];
    if (sign[u] * sign[v] >= 0) continue;
    Crossing c;
    c.edge = e;
    c.t = field[u] / (field[u] - field[v]);
    c.position = mesh.vertices[u] + c.t * mesh.displacement(u, v);
    crossing_of_edge[e] = static_cast<int>(nodal.crossings.size());
    nodal.crossings.push_back(c);
  }

  // Unified point ids: crossings first, then zero vertices.
  std::vector<int> zero_point_id(mesh.vertex_count(), -1);
  for (int i = 0; i < static_cast<int>(nodal.zero_vertices.size()); ++i)
    zero_point_id[nodal.zero_vertices[i]] =
        static_cast<int>(nodal.crossings.size()) + i;

  std::set<std::array<int, 2>> segments;
  std::map<std::array<int, 2>, int> edge_ids;
  for (int e = 0; e < mesh.edge_count(); ++e) edge_ids[mesh.edges[e]] = e;
  for (int f = 0; f < mesh.face_count(); ++f) {
    const auto& face = mesh.faces[f];
    std::vector<int> pts;
    for (int c = 0; c < 3; ++c) {
      if (zero_point_id[face[c]] >= 0) pts.push_back(zero_point_id[face[c]]);
      int u = face[c], v = face[(c + 1) % 3];
      int e = edge_ids[{std::min(u, v), std::max(u, v)}];
      if (crossing_of_edge[e] >= 0) pts.push_back(crossing_of_edge[e]);
    }
    std::sort(pts.begin(), pts.end());
    pts.erase(std::unique(pts.begin(), pts.end()), pts.end());
    if (pts.size() < 2) continue;
    for (size_t a = 0; a < pts.size(); ++a)
      for (size_t b = a + 1; b < pts.size(); ++b)
        segments.insert({pts[a], pts[b]});
  }
  nodal.segments.assign(segments.begin(), segments.end());
  return nodal;
}

DomainLabeling nodal_domains(const TriMesh& mesh, const Eigen::VectorXd& field,
                             double zero_tol) {
  if (field.size() != mesh.vertex_count())
    throw GeometryMismatch("field size does not match vertex count");
  auto sign = snapped_signs(field, zero_tol);

  std::vector<std::vector<int>> adjacency(mesh.vertex_count());
  for (const auto& e : mesh.edges) {
    adjacency[e[0]].push_back(e[1]);
    adjacency[e[1]].push_back(e[0]);
  }

  DomainLabeling out;
  out.label.assign(mesh.vertex_count(), -1);
  for (int seed = 0; seed < mesh.vertex_count(); ++seed) {
    if (sign[seed] == 0 || out.label[seed] != -1) continue;
    int id = out.count++;
    out.sign.push_back(sign[seed]);
    std::queue<int> frontier;
    frontier.push(seed);
    out.label[seed] = id;
    while (!frontier.empty()) {
      int v = frontier.front();
      frontier.pop();
      for (int w : adjacency[v]) {
        if (out.label[w] == -1 && sign[w] == sign[seed]) {
          out.label[w] = id;
          frontier.push(w);
        }
      }
    }
  }
  return out;
}

std::vector<int> domain_vertices_with_closure(const TriMesh& mesh,
                                              const DomainLabeling& labeling,
                                              int domain) {
  if (domain < 0 || domain >= labeling.count)
    throw InvalidArgument("domain id out of range");
  std::vector<char> take(mesh.vertex_count(), 0);
  for (int v = 0; v < mesh.vertex_count(); ++v)
    if (labeling.label[v] == domain) take[v] = 1;
  for (const auto& e : mesh.edges) {
    // Zero vertices adjacent to the domain join its closure.
    for (int side = 0; side < 2; ++side) {
      int z = e[side], d = e[1 - side];
      if (labeling.label[z] == -1 && take[d] && labeling.label[d] == domain)
        take[z] = 1;
    }
  }
  std::vector<int> out;
  for (int v = 0; v < mesh.vertex_count(); ++v)
    if (take[v]) out.push_back(v);
  return out;
}

namespace {

// 2D unfolding of a face: corner 0 at origin, corner 1 on the +x axis.
struct Face2d {
  Eigen::Vector2d q[3];
};

Face2d unfold(const TriMesh& mesh, int f) {
  auto c = mesh.face_corners(f);
  Eigen::Vector3d e1 = c[1] - c[0], e2 = c[2] - c[0];
  double a = e1.norm();
  double x = e1.dot(e2) / a;
  double y2 = e2.squaredNorm() - x * x;
  Face2d out;
  out.q[0] = {0.0, 0.0};
  out.q[1] = {a, 0.0};
  out.q[2] = {x, std::sqrt(std::max(0.0, y2))};
  return out;
}

}  // namespace

class GraphBuilder {
 public:
  GraphBuilder(GeodesicGraph& g, const TriMesh& mesh, const NodalSet* nodal,
               int steiner)
      : graph_(g), mesh_(mesh) {
    if (steiner < 0) throw InvalidArgument("steiner count must be >= 0");
    const int nv = mesh.vertex_count();
    graph_.vertex_count_ = nv;
    graph_.positions_.reserve(nv + mesh.edge_count() * (steiner + 1));
    graph_.positions_ = mesh.vertices;

    // Split points per edge: crossings plus uniform Steiner nodes, sorted by
    // parameter; node ids follow edge order.
    splits_.resize(mesh.edge_count());
    if (nodal) {
      graph_.crossing_nodes_.resize(nodal->crossings.size());
      for (int ci = 0; ci < static_cast<int>(nodal->crossings.size()); ++ci)
        splits_[nodal->crossings[ci].edge].push_back({nodal->crossings[ci].t,
                                                      ~ci});
    }
    for (int e = 0; e < mesh.edge_count(); ++e) {
      for (int s = 1; s <= steiner; ++s)
        splits_[e].push_back({s / (steiner + 1.0), 0});
      std::sort(splits_[e].begin(), splits_[e].end());
      int u = mesh.edges[e][0], v = mesh.edges[e][1];
      Eigen::Vector3d base = mesh.vertices[u];
      Eigen::Vector3d dir = mesh.displacement(u, v);
      for (auto& [t, tag] : splits_[e]) {
        int node = static_cast<int>(graph_.positions_.size());
        graph_.positions_.push_back(base + t * dir);
        if (tag < 0) graph_.crossing_nodes_[~tag] = node;
        tag = node;
      }
    }

    adjacency_.resize(graph_.positions_.size());
    build_chains();
    build_face_links();
    pack();
  }

 private:
  void link(int a, int b, double len) {
    adjacency_[a].emplace_back(b, len);
    adjacency_[b].emplace_back(a, len);
  }

  void build_chains() {
    for (int e = 0; e < mesh_.edge_count(); ++e) {
      int u = mesh_.edges[e][0], v = mesh_.edges[e][1];
      double len = mesh_.edge_length(e);
      int prev = u;
      double prev_t = 0.0;
      for (const auto& [t, node] : splits_[e]) {
        link(prev, node, (t - prev_t) * len);
        prev = node;
        prev_t = t;
      }
      link(prev, v, (1.0 - prev_t) * len);
    }
  }

  void build_face_links() {
    std::map<std::array<int, 2>, int> edge_ids;
    for (int e = 0; e < mesh_.edge_count(); ++e)
      edge_ids[mesh_.edges[e]] = e;

    for (int f = 0; f < mesh_.face_count(); ++f) {
      const auto& face = mesh_.faces[f];
      Face2d flat = unfold(mesh_, f);
      // Boundary nodes with 2D coordinates and a tag of the mesh edge they
      // lie on (-1 for corners, which belong to two edges).
      std::vector<std::tuple<int, Eigen::Vector2d, int>> nodes;
      for (int c = 0; c < 3; ++c)
        nodes.emplace_back(face[c], flat.q[c], -1 - c);
      for (int c = 0; c < 3; ++c) {
        int a = face[c], b = face[(c + 1) % 3];
        int e = edge_ids[{std::min(a, b), std::max(a, b)}];
        // Parameters are stored from the lower-id endpoint.
        bool forward = mesh_.edges[e][0] == a;
        for (const auto& [t, node] : splits_[e]) {
          double s = forward ? t : 1.0 - t;
          Eigen::Vector2d q = flat.q[c] + s * (flat.q[(c + 1) % 3] - flat.q[c]);
          nodes.emplace_back(node, q, e);
        }
      }
      auto same_mesh_edge = [&](int tag_a, int tag_b) {
        // Corner-corner pairs and pairs on one shared edge are chained
        // already; in-face straight links would duplicate them.
        if (tag_a < 0 && tag_b < 0) return true;
        if (tag_a < 0) std::swap(tag_a, tag_b);
        if (tag_b >= 0) return tag_a == tag_b;
        int corner = -1 - tag_b;  // corner vertex: on-edge iff edge touches it
        int a = face[corner], b = face[(corner + 1) % 3],
            c = face[(corner + 2) % 3];
        int e1 = edge_ids[{std::min(a, b), std::max(a, b)}];
        int e2 = edge_ids[{std::min(a, c), std::max(a, c)}];
        return tag_a == e1 || tag_a == e2;
      };
      for (size_t i = 0; i < nodes.size(); ++i)
        for (size_t j = i + 1; j < nodes.size(); ++j) {
          const auto& [ni, qi, ti] = nodes[i];
          const auto& [nj, qj, tj] = nodes[j];
          if (same_mesh_edge(ti, tj)) continue;
          link(ni, nj, (qi - qj).norm());
        }
    }
  }

  void pack() {
    graph_.adj_offsets_.assign(graph_.positions_.size() + 1, 0);
    for (size_t n = 0; n < adjacency_.size(); ++n) {
      std::sort(adjacency_[n].begin(), adjacency_[n].end());
      graph_.adj_offsets_[n + 1] =
          graph_.adj_offsets_[n] + static_cast<int>(adjacency_[n].size());
    }
    graph_.adj_nodes_.reserve(graph_.adj_offsets_.back());
    graph_.adj_lengths_.reserve(graph_.adj_offsets_.back());
    for (const auto& list : adjacency_)
      for (const auto& [node, len] : list) {
        graph_.adj_nodes_.push_back(node);
        graph_.adj_lengths_.push_back(len);
      }
  }

  GeodesicGraph& graph_;
  const TriMesh& mesh_;
  std::vector<std::vector<std::pair<double, int>>> splits_;
  std::vector<std::vector<std::pair<int, double>>> adjacency_;
};

GeodesicGraph::GeodesicGraph(const TriMesh& mesh, const NodalSet* nodal,
                             int steiner_per_edge) {
  GraphBuilder builder(*this, mesh, nodal, steiner_per_edge);
}

std::vector<double> GeodesicGraph::distances(const std::vector<int>& sources,
                                             double bound) const {
  if (sources.empty()) throw EmptyDomain("distance query with no sources");
  std::vector<double> dist(node_count(), kInf);
  using Entry = std::pair<double, int>;  // ties resolved by lowest node id
  std::priority_queue<Entry, std::vector<Entry>, std::greater<>> heap;
  for (int s : sources) {
    if (s < 0 || s >= node_count())
      throw InvalidArgument("source node out of range");
    if (dist[s] > 0.0) {
      dist[s] = 0.0;
      heap.emplace(0.0, s);
    }
  }
  while (!heap.empty()) {
    auto [d, n] = heap.top();
    heap.pop();
    if (d > dist[n]) continue;
    for (int i = adj_offsets_[n]; i < adj_offsets_[n + 1]; ++i) {
      double nd = d + adj_lengths_[i];
      int m = adj_nodes_[i];
      if (nd < dist[m] && nd <= bound) {
        dist[m] = nd;
        heap.emplace(nd, m);
      }
    }
  }
  return dist;
}

std::vector<double> GeodesicGraph::distances(
    const std::vector<int>& sources) const {
  return distances(sources, kInf);
}

namespace {

std::vector<int> nodal_sources(const GeodesicGraph& graph,
                               const NodalSet& nodal) {
  std::vector<int> sources;
  for (int ci = 0; ci < static_cast<int>(nodal.crossings.size()); ++ci)
    sources.push_back(graph.crossing_node(ci));
  for (int v : nodal.zero_vertices) sources.push_back(graph.vertex_node(v));
  return sources;
}

DistanceField vertex_field(const std::vector<double>& node_dist, int nv) {
  DistanceField field;
  field.distance.resize(nv);
  for (int v = 0; v < nv; ++v) field.distance[v] = node_dist[v];
  return field;
}

}  // namespace

DistanceField distance_to_set(const GeodesicGraph& graph, const TriMesh& mesh,
                              const NodalSet& nodal) {
  if (nodal.empty()) throw EmptyDomain("nodal set is empty");
  auto dist = graph.distances(nodal_sources(graph, nodal));
  return vertex_field(dist, mesh.vertex_count());
}

DistanceField distance_to_set(const TriMesh& mesh, const NodalSet& nodal,
                              int steiner_per_edge) {
  GeodesicGraph graph(mesh, &nodal, steiner_per_edge);
  return distance_to_set(graph, mesh, nodal);
}

DistanceField distance_to_boundary(const TriMesh& mesh, int steiner_per_edge) {
  if (mesh.closed())
    throw EmptyDomain("closed mesh has no boundary to measure from");
  GeodesicGraph graph(mesh, nullptr, steiner_per_edge);
  std::vector<int> sources;
  for (int v = 0; v < mesh.vertex_count(); ++v)
    if (mesh.is_boundary_vertex[v]) sources.push_back(v);
  return vertex_field(graph.distances(sources), mesh.vertex_count());
}

std::vector<double> default_r_grid(double lambda, int points) {
  if (!(lambda > 0)) throw InvalidArgument("r grid needs lambda > 0");
  if (points < 2) throw InvalidArgument("r grid needs >= 2 points");
  double r_max = 1.2 * 5.0 / std::sqrt(lambda);
  std::vector<double> grid(points);
  for (int i = 0; i < points; ++i) grid[i] = r_max * i / (points - 1);
  return grid;
}

namespace {

void validate_grid(const std::vector<double>& grid) {
  if (grid.empty()) throw InvalidArgument("empty r grid");
  for (size_t i = 0; i < grid.size(); ++i) {
    if (grid[i] < 0) throw InvalidArgument("r grid values must be >= 0");
    if (i > 0 && grid[i] <= grid[i - 1])
      throw InvalidArgument("r grid must be strictly increasing");
  }
}

}  // namespace

TubeProfile tube_profile(const DistanceField& dist, const VolumeMeasure& m,
                         const std::vector<double>& r_grid) {
  validate_grid(r_grid);
  if (dist.distance.size() != m.weights.size())
    throw GeometryMismatch("distance field and measure size mismatch");
  TubeProfile profile;
  profile.r = r_grid;
  Eigen::VectorXd mu = kernels::tube_counts(dist.distance, m.weights, r_grid);
  profile.mu.assign(mu.data(), mu.data() + mu.size());
  return profile;
}

TubeProfile boundary_distance_profile(const TriMesh& mesh,
                                      const VolumeMeasure& m,
                                      const std::vector<double>& r_grid,
                                      int steiner_per_edge) {
  return tube_profile(distance_to_boundary(mesh, steiner_per_edge), m, r_grid);
}

TubeProfile discretize_curve(const std::function<double(double)>& mu,
                             const std::vector<double>& r_grid) {
  validate_grid(r_grid);
  TubeProfile profile;
  profile.r = r_grid;
  profile.mu.resize(r_grid.size());
  for (size_t i = 0; i < r_grid.size(); ++i) profile.mu[i] = mu(r_grid[i]);
  return profile;
}

double TubeProfile::mu_at(double radius) const {
  auto it = std::lower_bound(r.begin(), r.end(), radius - 1e-9);
  if (it == r.end() || std::abs(*it - radius) > 1e-9)
    throw GridRange("radius " + std::to_string(radius) + " not on the grid");
  return mu[it - r.begin()];
}

void TubeProfile::write_csv(const std::string& path) const {
  std::ofstream os(path);
  if (!os) throw IoError("cannot open " + path + " for writing");
  os << "r,mu\n" << std::setprecision(17);
  for (size_t i = 0; i < r.size(); ++i) os << r[i] << ',' << mu[i] << '\n';
  if (!os) throw IoError("failed writing " + path);
}

void write_nodal_set_json(const TriMesh& mesh, const NodalSet& nodal,
                          const std::string& path) {
  nlohmann::ordered_json j;
  auto point = [&](int idx) {
    Eigen::Vector3d p = nodal.point_position(mesh, idx);
    return nlohmann::ordered_json::array({p.x(), p.y(), p.z()});
  };
  auto segments = nlohmann::ordered_json::array();
  for (const auto& s : nodal.segments)
    segments.push_back(nlohmann::ordered_json::array({point(s[0]),
                                                      point(s[1])}));
  j["segments"] = std::move(segments);
  j["crossing_count"] = nodal.crossings.size();
  j["zero_vertex_count"] = nodal.zero_vertices.size();
  j["zero_vertices"] = nodal.zero_vertices;
  std::ofstream os(path);
  if (!os) throw IoError("cannot open " + path + " for writing");
  os << j.dump(2) << '\n';
  if (!os) throw IoError("failed writing " + path);
}

}  // namespace nodal_lab
