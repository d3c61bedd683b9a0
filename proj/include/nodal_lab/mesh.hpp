#pragma once

#include <Eigen/Core>
#include <array>
#include <string>
#include <vector>

namespace nodal_lab {

// Triangle mesh over one of three geometries. Flat-torus meshes live in the
// quotient [0,Lx) x [0,Ly); every metric quantity (edge vectors, face areas,
// gradients) goes through displacement(), which picks the wrapped
// representative. Triangles must stay smaller than half a period.
struct TriMesh {
  enum class Geometry { Embedded3d, FlatTorus, PlanarWithBoundary };

  Geometry geometry = Geometry::Embedded3d;
  double period_x = 0.0;    // flat torus only
  double period_y = 0.0;    // flat torus only
  bool unit_sphere = false; // refine() re-projects when set
  int depth_hint = -1;      // generator refinement level, -1 if unknown

  std::vector<Eigen::Vector3d> vertices;
  std::vector<std::array<int, 3>> faces;

  // Derived connectivity, filled by finalize(). Edges are stored as sorted
  // vertex pairs in lexicographic order; edge_faces holds up to two incident
  // faces (-1 when absent).
  std::vector<std::array<int, 2>> edges;
  std::vector<std::array<int, 2>> edge_faces;
  std::vector<int> boundary_edges;
  std::vector<char> is_boundary_vertex;
  std::vector<double> face_areas;
  double total_area = 0.0;

  enum class Validation { Topology, Full };

  // Builds derived data and validates: manifold edges (1-2 faces each),
  // consistent orientation, and with Validation::Full strictly positive face
  // areas. Throws InvalidArgument / AssemblyError on violations.
  static TriMesh build(std::vector<Eigen::Vector3d> vertices,
                       std::vector<std::array<int, 3>> faces,
                       Geometry geometry = Geometry::Embedded3d,
                       double period_x = 0.0, double period_y = 0.0,
                       Validation validation = Validation::Full);

  int vertex_count() const { return static_cast<int>(vertices.size()); }
  int face_count() const { return static_cast<int>(faces.size()); }
  int edge_count() const { return static_cast<int>(edges.size()); }
  bool closed() const { return boundary_edges.empty(); }
  int euler_characteristic() const {
    return vertex_count() - edge_count() + face_count();
  }

  // Wrapped displacement from u to v (plain difference off the torus).
  Eigen::Vector3d displacement(int u, int v) const;
  double edge_length(int edge_id) const;
  double mean_edge_length() const;

  // Corner positions of face f unfolded around its first vertex, so that
  // differences are valid metric vectors even across the torus seam.
  std::array<Eigen::Vector3d, 3> face_corners(int f) const;

  int boundary_loop_count() const;

  // Cheap metric diameter surrogate used for ball-radius clamps: exact for
  // the flat torus, pi for unit spheres, bounding-box diagonal otherwise.
  double metric_diameter() const;
};

// Vertex weights of the normalized volume measure m_g: one third of incident
// face area per vertex, divided by total area. Sums to 1.
struct VolumeMeasure {
  Eigen::VectorXd weights;
  double total_area = 0.0;
};

VolumeMeasure normalized_measure(const TriMesh& mesh);

// Polar icosphere: vertices at the +-z poles, iterated 1-to-4 subdivision
// with projection to the unit sphere. depth in [0, 8]; V = 10*4^d + 2.
TriMesh generate_icosphere(int depth);

// Flat torus grid, nx x ny cells over [0,Lx) x [0,Ly), each cell split along
// the (i,j)-(i+1,j+1) diagonal. nx, ny >= 3.
TriMesh generate_flat_torus(int nx, int ny, double lx = 1.0, double ly = 1.0);

// Planar disk of radius r: n = 2^depth concentric rings, ring j carrying 6j
// vertices, annuli zipped by angle. depth in [0, 8].
TriMesh generate_disk(int depth, double radius = 1.0);

// Planar rectangle [0,Lx] x [0,Ly] with nx x ny cells, right-triangulated.
TriMesh generate_grid(int nx, int ny, double lx = 1.0, double ly = 1.0);

// One 1-to-4 subdivision step; wrapped midpoints on the torus, re-projection
// on unit spheres.
TriMesh refine(const TriMesh& mesh);

// Submesh induced by a vertex subset: keeps faces whose three corners all
// lie in the subset, relabels vertices in ascending original order.
TriMesh extract_submesh(const TriMesh& mesh, const std::vector<int>& subset);

// ASCII OFF with a JSON sidecar at path + ".json" carrying the geometry tag
// (and periods / unit-sphere flag). Import infers a missing sidecar:
// boundary + z==0 -> planar, else embedded.
void write_off(const TriMesh& mesh, const std::string& path);
TriMesh read_off(const std::string& path);

}  // namespace nodal_lab
