#include "nodal_lab/mesh.hpp"

#include <Eigen/Geometry>

#include <algorithm>
#include <cmath>
#include <fstream>
#include <functional>
#include <iomanip>
#include <map>
#include <numbers>

#include <json.hpp>

#include "nodal_lab/errors.hpp"

namespace nodal_lab {

namespace {

double wrap_coord(double x, double period) {
  double w = x - period * std::floor(x / period);
  if (w >= period) w = 0.0;  // guard against floor rounding at the seam
  return w;
}

double wrap_delta(double d, double period) {
  return d - period * std::round(d / period);
}

Eigen::Vector3d canonical_position(const Eigen::Vector3d& p,
                                   TriMesh::Geometry geometry, double lx,
                                   double ly) {
  if (geometry != TriMesh::Geometry::FlatTorus) return p;
  return {wrap_coord(p.x(), lx), wrap_coord(p.y(), ly), 0.0};
}

}  // namespace

Eigen::Vector3d TriMesh::displacement(int u, int v) const {
  Eigen::Vector3d d = vertices[v] - vertices[u];
  if (geometry == Geometry::FlatTorus) {
    d.x() = wrap_delta(d.x(), period_x);
    d.y() = wrap_delta(d.y(), period_y);
  }
  return d;
}

std::array<Eigen::Vector3d, 3> TriMesh::face_corners(int f) const {
  const auto& face = faces[f];
  Eigen::Vector3d p0 = vertices[face[0]];
  return {p0, p0 + displacement(face[0], face[1]),
          p0 + displacement(face[0], face[2])};
}

double TriMesh::edge_length(int edge_id) const {
  const auto& e = edges[edge_id];
  return displacement(e[0], e[1]).norm();
}

double TriMesh::mean_edge_length() const {
  double sum = 0.0;
  for (int e = 0; e < edge_count(); ++e) sum += edge_length(e);
  return sum / edge_count();
}

double TriMesh::metric_diameter() const {
  if (geometry == Geometry::FlatTorus)
    return std::hypot(period_x / 2.0, period_y / 2.0);
  if (unit_sphere) return std::numbers::pi;
  Eigen::Vector3d lo = vertices.front(), hi = vertices.front();
  for (const auto& p : vertices) {
    lo = lo.cwiseMin(p);
    hi = hi.cwiseMax(p);
  }
  return (hi - lo).norm();
}

TriMesh TriMesh::build(std::vector<Eigen::Vector3d> vertices,
                       std::vector<std::array<int, 3>> faces,
                       Geometry geometry, double period_x, double period_y,
                       Validation validation) {
  TriMesh mesh;
  mesh.geometry = geometry;
  mesh.period_x = period_x;
  mesh.period_y = period_y;
  mesh.vertices = std::move(vertices);
  mesh.faces = std::move(faces);

  const int nv = mesh.vertex_count();
  if (nv < 3 || mesh.faces.empty())
    throw InvalidArgument("mesh needs at least 3 vertices and 1 face");
  for (const auto& f : mesh.faces) {
    for (int c : f)
      if (c < 0 || c >= nv) throw InvalidArgument("face index out of range");
    if (f[0] == f[1] || f[1] == f[2] || f[0] == f[2])
      throw InvalidArgument("degenerate face with repeated vertex");
  }

  // Undirected edge list in lexicographic order, with directed-use counting
  // for the orientation check.
  std::map<std::array<int, 2>, std::array<int, 3>> edge_info;  // {fwd,bwd,face}
  for (int f = 0; f < mesh.face_count(); ++f) {
    const auto& face = mesh.faces[f];
    for (int c = 0; c < 3; ++c) {
      int u = face[c], v = face[(c + 1) % 3];
      std::array<int, 2> key{std::min(u, v), std::max(u, v)};
      auto& info = edge_info.try_emplace(key, std::array<int, 3>{0, 0, -1})
                       .first->second;
      (u < v ? info[0] : info[1]) += 1;
      if (info[2] < 0)
        info[2] = f;
      else if (info[0] + info[1] > 2)
        throw InvalidArgument("non-manifold edge shared by >2 faces");
    }
  }

  mesh.edges.reserve(edge_info.size());
  mesh.edge_faces.reserve(edge_info.size());
  std::map<std::array<int, 2>, int> edge_ids;
  for (const auto& [key, info] : edge_info) {
    if (info[0] > 1 || info[1] > 1)
      throw InvalidArgument("inconsistent face orientation at shared edge");
    int id = static_cast<int>(mesh.edges.size());
    edge_ids[key] = id;
    mesh.edges.push_back(key);
    mesh.edge_faces.push_back({info[2], -1});
  }
  // second incident face per edge
  for (int f = 0; f < mesh.face_count(); ++f) {
    const auto& face = mesh.faces[f];
    for (int c = 0; c < 3; ++c) {
      int u = face[c], v = face[(c + 1) % 3];
      int id = edge_ids[{std::min(u, v), std::max(u, v)}];
      if (mesh.edge_faces[id][0] != f && mesh.edge_faces[id][1] == -1)
        mesh.edge_faces[id][1] = f;
    }
  }

  mesh.is_boundary_vertex.assign(nv, 0);
  for (int e = 0; e < mesh.edge_count(); ++e) {
    if (mesh.edge_faces[e][1] == -1) {
      mesh.boundary_edges.push_back(e);
      mesh.is_boundary_vertex[mesh.edges[e][0]] = 1;
      mesh.is_boundary_vertex[mesh.edges[e][1]] = 1;
    }
  }

  mesh.face_areas.resize(mesh.face_count());
  mesh.total_area = 0.0;
  for (int f = 0; f < mesh.face_count(); ++f) {
    auto c = mesh.face_corners(f);
    double area = 0.5 * (c[1] - c[0]).cross(c[2] - c[0]).norm();
    if (validation == Validation::Full && !(area > 0.0))
      throw InvalidArgument("face " + std::to_string(f) +
                            " has nonpositive area");
    mesh.face_areas[f] = area;
    mesh.total_area += area;
  }
  return mesh;
}

int TriMesh::boundary_loop_count() const {
  if (boundary_edges.empty()) return 0;
  // Union-find over boundary vertices linked by boundary edges.
  std::map<int, int> parent;
  std::function<int(int)> find = [&](int x) {
    while (parent[x] != x) x = parent[x] = parent[parent[x]];
    return x;
  };
  for (int e : boundary_edges)
    for (int v : edges[e])
      parent.try_emplace(v, v);
  int loops = static_cast<int>(parent.size());
  for (int e : boundary_edges) {
    int a = find(edges[e][0]), b = find(edges[e][1]);
    if (a != b) {
      parent[a] = b;
      --loops;
    }
  }
  return loops;
}

VolumeMeasure normalized_measure(const TriMesh& mesh) {
  VolumeMeasure m;
  m.total_area = mesh.total_area;
  m.weights = Eigen::VectorXd::Zero(mesh.vertex_count());
  for (int f = 0; f < mesh.face_count(); ++f) {
    double share = mesh.face_areas[f] / 3.0;
    for (int c : mesh.faces[f]) m.weights[c] += share;
  }
  m.weights /= mesh.total_area;
  return m;
}

TriMesh generate_icosphere(int depth) {
  if (depth < 0) throw InvalidArgument("icosphere depth must be >= 0");
  if (depth > 8) throw ResourceLimit("icosphere depth capped at 8");

  const double pi = std::numbers::pi;
  std::vector<Eigen::Vector3d> verts;
  verts.emplace_back(0, 0, 1);
  double z = 1.0 / std::sqrt(5.0), rho = 2.0 / std::sqrt(5.0);
  for (int k = 0; k < 5; ++k) {
    double a = 2.0 * pi * k / 5.0;
    verts.emplace_back(rho * std::cos(a), rho * std::sin(a), z);
  }
  for (int k = 0; k < 5; ++k) {
    double a = 2.0 * pi * (k + 0.5) / 5.0;
    verts.emplace_back(rho * std::cos(a), rho * std::sin(a), -z);
  }
  verts.emplace_back(0, 0, -1);

  std::vector<std::array<int, 3>> faces;
  for (int k = 0; k < 5; ++k) {
    int k1 = (k + 1) % 5;
    faces.push_back({0, 1 + k, 1 + k1});
    faces.push_back({1 + k, 6 + k, 1 + k1});
    faces.push_back({1 + k1, 6 + k, 6 + k1});
    faces.push_back({11, 6 + k1, 6 + k});
  }

  TriMesh mesh = TriMesh::build(std::move(verts), std::move(faces));
  mesh.unit_sphere = true;
  mesh.depth_hint = 0;
  for (int d = 0; d < depth; ++d) mesh = refine(mesh);
  return mesh;
}

TriMesh generate_flat_torus(int nx, int ny, double lx, double ly) {
  if (nx < 3 || ny < 3)
    throw InvalidArgument("flat torus needs nx, ny >= 3");
  if (lx <= 0 || ly <= 0) throw InvalidArgument("torus periods must be > 0");
  if (static_cast<long long>(nx) * ny > 1 << 22)
    throw ResourceLimit("torus grid too large");

  std::vector<Eigen::Vector3d> verts;
  verts.reserve(static_cast<size_t>(nx) * ny);
  for (int j = 0; j < ny; ++j)
    for (int i = 0; i < nx; ++i)
      verts.emplace_back(lx * i / nx, ly * j / ny, 0.0);

  auto id = [&](int i, int j) {
    return ((i % nx + nx) % nx) + nx * ((j % ny + ny) % ny);
  };
  std::vector<std::array<int, 3>> faces;
  faces.reserve(2 * static_cast<size_t>(nx) * ny);
  for (int j = 0; j < ny; ++j)
    for (int i = 0; i < nx; ++i) {
      int a = id(i, j), b = id(i + 1, j), c = id(i + 1, j + 1),
          d = id(i, j + 1);
      faces.push_back({a, b, c});
      faces.push_back({a, c, d});
    }
  TriMesh mesh = TriMesh::build(std::move(verts), std::move(faces),
                                TriMesh::Geometry::FlatTorus, lx, ly);
  mesh.depth_hint = nx;
  return mesh;
}

TriMesh generate_disk(int depth, double radius) {
  if (depth < 0) throw InvalidArgument("disk depth must be >= 0");
  if (depth > 8) throw ResourceLimit("disk depth capped at 8");
  if (radius <= 0) throw InvalidArgument("disk radius must be > 0");

  const double pi = std::numbers::pi;
  const int n = 1 << depth;  // rings
  std::vector<Eigen::Vector3d> verts;
  verts.emplace_back(0, 0, 0);
  std::vector<int> ring_start(n + 1, 0);
  for (int j = 1; j <= n; ++j) {
    ring_start[j] = static_cast<int>(verts.size());
    double r = radius * j / n;
    for (int m = 0; m < 6 * j; ++m) {
      double a = 2.0 * pi * m / (6.0 * j);
      verts.emplace_back(r * std::cos(a), r * std::sin(a), 0.0);
    }
  }

  std::vector<std::array<int, 3>> faces;
  for (int m = 0; m < 6; ++m)
    faces.push_back({0, ring_start[1] + m, ring_start[1] + (m + 1) % 6});
  for (int j = 2; j <= n; ++j) {
    int c1 = 6 * (j - 1), c2 = 6 * j;
    auto inner = [&](int i) { return ring_start[j - 1] + i % c1; };
    auto outer = [&](int i) { return ring_start[j] + i % c2; };
    int i1 = 0, i2 = 0;
    while (i1 < c1 || i2 < c2) {
      bool advance_inner =
          i1 < c1 &&
          (i2 == c2 || static_cast<long long>(i1 + 1) * c2 <=
                           static_cast<long long>(i2 + 1) * c1);
      if (advance_inner) {
        faces.push_back({inner(i1), outer(i2), inner(i1 + 1)});
        ++i1;
      } else {
        faces.push_back({outer(i2), outer(i2 + 1), inner(i1)});
        ++i2;
      }
    }
  }
  TriMesh mesh = TriMesh::build(std::move(verts), std::move(faces),
                                TriMesh::Geometry::PlanarWithBoundary);
  mesh.depth_hint = depth;
  return mesh;
}

TriMesh generate_grid(int nx, int ny, double lx, double ly) {
  if (nx < 1 || ny < 1) throw InvalidArgument("grid needs nx, ny >= 1");
  if (lx <= 0 || ly <= 0) throw InvalidArgument("grid extents must be > 0");
  if (static_cast<long long>(nx) * ny > 1 << 22)
    throw ResourceLimit("grid too large");

  std::vector<Eigen::Vector3d> verts;
  verts.reserve(static_cast<size_t>(nx + 1) * (ny + 1));
  for (int j = 0; j <= ny; ++j)
    for (int i = 0; i <= nx; ++i)
      verts.emplace_back(lx * i / nx, ly * j / ny, 0.0);

  auto id = [&](int i, int j) { return i + (nx + 1) * j; };
  std::vector<std::array<int, 3>> faces;
  faces.reserve(2 * static_cast<size_t>(nx) * ny);
  for (int j = 0; j < ny; ++j)
    for (int i = 0; i < nx; ++i) {
      int a = id(i, j), b = id(i + 1, j), c = id(i + 1, j + 1),
          d = id(i, j + 1);
      faces.push_back({a, b, c});
      faces.push_back({a, c, d});
    }
  TriMesh mesh = TriMesh::build(std::move(verts), std::move(faces),
                                TriMesh::Geometry::PlanarWithBoundary);
  mesh.depth_hint = nx;
  return mesh;
}

TriMesh refine(const TriMesh& mesh) {
  std::vector<Eigen::Vector3d> verts = mesh.vertices;
  verts.reserve(verts.size() + mesh.edges.size());
  // One midpoint per edge, appended in edge order.
  for (int e = 0; e < mesh.edge_count(); ++e) {
    const auto& edge = mesh.edges[e];
    Eigen::Vector3d mid = mesh.vertices[edge[0]] +
                          0.5 * mesh.displacement(edge[0], edge[1]);
    if (mesh.unit_sphere) mid.normalize();
    mid = canonical_position(mid, mesh.geometry, mesh.period_x, mesh.period_y);
    verts.push_back(mid);
  }

  std::map<std::array<int, 2>, int> edge_ids;
  for (int e = 0; e < mesh.edge_count(); ++e) edge_ids[mesh.edges[e]] = e;
  auto mid_id = [&](int u, int v) {
    return mesh.vertex_count() + edge_ids[{std::min(u, v), std::max(u, v)}];
  };

  std::vector<std::array<int, 3>> faces;
  faces.reserve(4 * mesh.faces.size());
  for (const auto& f : mesh.faces) {
    int ab = mid_id(f[0], f[1]), bc = mid_id(f[1], f[2]),
        ca = mid_id(f[2], f[0]);
    faces.push_back({f[0], ab, ca});
    faces.push_back({ab, f[1], bc});
    faces.push_back({ca, bc, f[2]});
    faces.push_back({ab, bc, ca});
  }

  TriMesh out = TriMesh::build(std::move(verts), std::move(faces),
                               mesh.geometry, mesh.period_x, mesh.period_y);
  out.unit_sphere = mesh.unit_sphere;
  if (mesh.depth_hint >= 0)
    out.depth_hint = mesh.geometry == TriMesh::Geometry::FlatTorus
                         ? mesh.depth_hint * 2
                         : mesh.depth_hint + 1;
  return out;
}

TriMesh extract_submesh(const TriMesh& mesh, const std::vector<int>& subset) {
  std::vector<int> ids = subset;
  std::sort(ids.begin(), ids.end());
  ids.erase(std::unique(ids.begin(), ids.end()), ids.end());
  if (ids.empty()) throw EmptyDomain("empty vertex subset");
  for (int v : ids)
    if (v < 0 || v >= mesh.vertex_count())
      throw InvalidArgument("subset vertex out of range");

  std::vector<int> old_to_new(mesh.vertex_count(), -1);
  std::vector<Eigen::Vector3d> verts;
  verts.reserve(ids.size());
  for (int v : ids) {
    old_to_new[v] = static_cast<int>(verts.size());
    verts.push_back(mesh.vertices[v]);
  }

  std::vector<std::array<int, 3>> faces;
  for (const auto& f : mesh.faces) {
    int a = old_to_new[f[0]], b = old_to_new[f[1]], c = old_to_new[f[2]];
    if (a >= 0 && b >= 0 && c >= 0) faces.push_back({a, b, c});
  }
  if (faces.empty()) throw EmptyDomain("vertex subset induces no faces");

  TriMesh out = TriMesh::build(std::move(verts), std::move(faces),
                               mesh.geometry, mesh.period_x, mesh.period_y);
  out.unit_sphere = mesh.unit_sphere;
  return out;
}

void write_off(const TriMesh& mesh, const std::string& path) {
  std::ofstream os(path);
  if (!os) throw IoError("cannot open " + path + " for writing");
  os << "OFF\n"
     << mesh.vertex_count() << ' ' << mesh.face_count() << " 0\n";
  os << std::setprecision(17);
  for (const auto& p : mesh.vertices)
    os << p.x() << ' ' << p.y() << ' ' << p.z() << '\n';
  for (const auto& f : mesh.faces)
    os << "3 " << f[0] << ' ' << f[1] << ' ' << f[2] << '\n';
  if (!os) throw IoError("failed writing " + path);

  nlohmann::ordered_json sidecar;
  switch (mesh.geometry) {
    case TriMesh::Geometry::FlatTorus:
      sidecar["geometry"] = "flat-torus";
      sidecar["Lx"] = mesh.period_x;
      sidecar["Ly"] = mesh.period_y;
      break;
    case TriMesh::Geometry::PlanarWithBoundary:
      sidecar["geometry"] = "planar-with-boundary";
      break;
    case TriMesh::Geometry::Embedded3d:
      sidecar["geometry"] = "embedded-3d";
      sidecar["unit_sphere"] = mesh.unit_sphere;
      break;
  }
  if (mesh.depth_hint >= 0) sidecar["depth"] = mesh.depth_hint;
  std::ofstream js(path + ".json");
  if (!js) throw IoError("cannot write sidecar for " + path);
  js << sidecar.dump(2) << '\n';
}

TriMesh read_off(const std::string& path) {
  std::ifstream is(path);
  if (!is) throw IoError("cannot open " + path);
  std::string magic;
  is >> magic;
  if (magic != "OFF") throw IoError(path + ": not an ASCII OFF file");
  int nv = 0, nf = 0, ne = 0;
  is >> nv >> nf >> ne;
  if (!is || nv <= 0 || nf <= 0) throw IoError(path + ": bad OFF header");

  std::vector<Eigen::Vector3d> verts(nv);
  for (auto& p : verts) is >> p.x() >> p.y() >> p.z();
  std::vector<std::array<int, 3>> faces(nf);
  for (auto& f : faces) {
    int arity = 0;
    is >> arity;
    if (arity != 3) throw IoError(path + ": only triangle faces supported");
    is >> f[0] >> f[1] >> f[2];
  }
  if (!is) throw IoError(path + ": truncated OFF body");

  TriMesh::Geometry geometry = TriMesh::Geometry::Embedded3d;
  double lx = 0, ly = 0;
  bool unit_sphere = false;
  int depth = -1;
  std::ifstream js(path + ".json");
  if (js) {
    nlohmann::json sidecar;
    try {
      js >> sidecar;
    } catch (const nlohmann::json::exception& e) {
      throw IoError(path + ".json: " + e.what());
    }
    std::string tag = sidecar.value("geometry", "embedded-3d");
    if (tag == "flat-torus") {
      geometry = TriMesh::Geometry::FlatTorus;
      lx = sidecar.at("Lx").get<double>();
      ly = sidecar.at("Ly").get<double>();
      if (lx <= 0 || ly <= 0) throw IoError(path + ".json: bad periods");
    } else if (tag == "planar-with-boundary") {
      geometry = TriMesh::Geometry::PlanarWithBoundary;
    } else if (tag == "embedded-3d") {
      unit_sphere = sidecar.value("unit_sphere", false);
    } else {
      throw IoError(path + ".json: unknown geometry tag " + tag);
    }
    depth = sidecar.value("depth", -1);
  } else {
    bool planar = std::all_of(verts.begin(), verts.end(), [](const auto& p) {
      return std::abs(p.z()) < 1e-12;
    });
    if (planar) geometry = TriMesh::Geometry::PlanarWithBoundary;
  }

  TriMesh mesh =
      TriMesh::build(std::move(verts), std::move(faces), geometry, lx, ly);
  mesh.unit_sphere = unit_sphere;
  mesh.depth_hint = depth;
  if (geometry == TriMesh::Geometry::PlanarWithBoundary && mesh.closed())
    throw IoError(path + ": planar tag on a closed mesh");
  return mesh;
}

}  // namespace nodal_lab
