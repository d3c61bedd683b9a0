#pragma once

#include <Eigen/Core>
#include <array>
#include <functional>
#include <string>
#include <vector>

#include "nodal_lab/mesh.hpp"

namespace nodal_lab {

// Zero set of a vertex field: vertices snapped to zero (|f| <= tol * ||f||oo)
// plus linear crossings on edges whose endpoints have strictly opposite sign.
struct Crossing {
  int edge = -1;
  double t = 0.0;  // position = p_u + t * displacement(u, v)
  Eigen::Vector3d position = Eigen::Vector3d::Zero();
};

struct NodalSet {
  std::vector<Crossing> crossings;
  std::vector<int> zero_vertices;
  // Per-face segments between the face's two nodal points, as indices into a
  // unified point list: crossings first, then zero vertices.
  std::vector<std::array<int, 2>> segments;
  bool empty() const { return crossings.empty() && zero_vertices.empty(); }
  int point_count() const {
    return static_cast<int>(crossings.size() + zero_vertices.size());
  }
  Eigen::Vector3d point_position(const TriMesh& mesh, int idx) const;
};

constexpr double kDefaultZeroTol = 1e-9;

NodalSet extract_nodal_set(const TriMesh& mesh, const Eigen::VectorXd& field,
                           double zero_tol = kDefaultZeroTol);

// Connected components of same-sign vertices; zero vertices stay unlabeled
// (label -1). Labels are assigned in ascending lowest-vertex order.
struct DomainLabeling {
  std::vector<int> label;
  std::vector<int> sign;  // per domain, +1 / -1
  int count = 0;
};

DomainLabeling nodal_domains(const TriMesh& mesh, const Eigen::VectorXd& field,
                             double zero_tol = kDefaultZeroTol);

// Vertices of one domain plus its adjacent zero vertices. This closure makes
// the induced submesh's boundary sit on the snapped nodal line, which is what
// the Dirichlet-eigenvalue identity needs.
std::vector<int> domain_vertices_with_closure(const TriMesh& mesh,
                                              const DomainLabeling& labeling,
                                              int domain);

// Geodesic distance graph: mesh vertices, plus crossing and uniform Steiner
// nodes on edges, plus complete straight-segment links among each face's
// boundary nodes. Dijkstra with (distance, node-id) tie-break; node ids are
// deterministic (vertices, then edge nodes in edge/t order).
class GeodesicGraph {
 public:
  static constexpr int kDefaultSteinerPerEdge = 2;

  GeodesicGraph(const TriMesh& mesh, const NodalSet* nodal,
                int steiner_per_edge = kDefaultSteinerPerEdge);

  int node_count() const { return static_cast<int>(positions_.size()); }
  int vertex_node(int v) const { return v; }
  int crossing_node(int crossing_index) const {
    return crossing_nodes_[crossing_index];
  }
  const Eigen::Vector3d& node_position(int node) const {
    return positions_[node];
  }

  // Multi-source Dijkstra; nodes beyond `bound` keep +infinity.
  std::vector<double> distances(const std::vector<int>& sources,
                                double bound) const;
  std::vector<double> distances(const std::vector<int>& sources) const;

 private:
  int vertex_count_ = 0;
  std::vector<int> crossing_nodes_;
  std::vector<Eigen::Vector3d> positions_;
  std::vector<int> adj_offsets_;  // CSR adjacency
  std::vector<int> adj_nodes_;
  std::vector<double> adj_lengths_;
  friend class GraphBuilder;
};

// Per-vertex distances to a source set.
struct DistanceField {
  Eigen::VectorXd distance;
};

// Distance to the nodal set (crossings + zero vertices as sources).
DistanceField distance_to_set(const TriMesh& mesh, const NodalSet& nodal,
                              int steiner_per_edge =
                                  GeodesicGraph::kDefaultSteinerPerEdge);
DistanceField distance_to_set(const GeodesicGraph& graph, const TriMesh& mesh,
                              const NodalSet& nodal);

// Distance to the mesh boundary; EmptyDomain on closed meshes.
DistanceField distance_to_boundary(const TriMesh& mesh,
                                   int steiner_per_edge =
                                       GeodesicGraph::kDefaultSteinerPerEdge);

// Complement-measure profile mu(r) = m_g({dist > r}) on an r grid.
struct TubeProfile {
  std::vector<double> r;
  std::vector<double> mu;
  // Exact-abscissa lookup (1e-9 tolerance); GridRange otherwise.
  double mu_at(double radius) const;
  void write_csv(const std::string& path) const;
};

// Default grid: n points from 0 to 1.2 * 5 / sqrt(lambda).
std::vector<double> default_r_grid(double lambda, int points = 60);

TubeProfile tube_profile(const DistanceField& dist, const VolumeMeasure& m,
                         const std::vector<double>& r_grid);
TubeProfile boundary_distance_profile(const TriMesh& mesh,
                                      const VolumeMeasure& m,
                                      const std::vector<double>& r_grid,
                                      int steiner_per_edge =
                                          GeodesicGraph::kDefaultSteinerPerEdge);

// Evaluate an exact curve on a grid, producing the same profile shape the
// discrete pipeline emits.
TubeProfile discretize_curve(const std::function<double(double)>& mu,
                             const std::vector<double>& r_grid);

// Line-segment soup JSON: {"segments":[[[x,y,z],[x,y,z]],...], ...}.
void write_nodal_set_json(const TriMesh& mesh, const NodalSet& nodal,
                          const std::string& path);

}  // namespace nodal_lab
