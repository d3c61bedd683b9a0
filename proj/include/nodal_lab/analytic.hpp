#pragma once

#include <Eigen/Core>
#include <functional>
#include <string>
#include <vector>

#include "nodal_lab/mesh.hpp"

namespace nodal_lab {

// Closed-form Laplace eigenfunctions on the two model surfaces.
struct AnalyticMode {
  enum class Surface { UnitSphere, FlatTorus };

  Surface surface = Surface::UnitSphere;
  double lambda = 0.0;

  // sphere parameters
  int l = 0, m = 0;
  // torus parameters
  int kx = 0, ky = 0;
  double phase = 0.0, lx = 1.0, ly = 1.0;

  double evaluate(const Eigen::Vector3d& p) const;

  // Real orthonormal spherical harmonic Y_l^m; lambda = l(l+1).
  static AnalyticMode sphere_harmonic(int l, int m);
  // cos(2*pi*(kx x/Lx + ky y/Ly) + phase); lambda = 4pi^2(kx^2/Lx^2+ky^2/Ly^2).
  static AnalyticMode torus_wave(int kx, int ky, double phase = 0.0,
                                 double lx = 1.0, double ly = 1.0);
  // "sphere:l=5,m=0" | "torus:kx=3,ky=0,phase=0"
  static AnalyticMode parse(const std::string& text);
  std::string name() const;
};

// Vertex samples; checks the mesh geometry matches the mode's surface.
Eigen::VectorXd sample(const AnalyticMode& mode, const TriMesh& mesh);

// Exact complement-measure curve r -> m_g(points farther than r from a set).
struct OracleCurve {
  std::string description;
  double lambda = 0.0;  // lambda for tube oracles, lambda_1^D for boundary
  std::function<double(double)> mu;
};

// Closed-form tube-complement curve; supported for single-frequency torus
// waves and zonal (m = 0) spherical harmonics, otherwise UnsupportedOracle.
OracleCurve tube_complement_oracle(const AnalyticMode& mode);

// Boundary-distance complement curves for model shapes with boundary.
struct BoundaryShape {
  enum class Kind { Disk, Square, Strip };
  Kind kind = Kind::Disk;
  double size = 1.0;  // disk radius R, square side L, strip width w
  static BoundaryShape parse(const std::string& text);  // "disk:r=1" etc.
  std::string name() const;
};
OracleCurve boundary_oracle(const BoundaryShape& shape);

// Legendre machinery behind the zonal oracles.
double legendre_p(int l, double x);
double legendre_p_derivative(int l, double x);
double associated_legendre(int l, int m, double x);
// Zeros of P_l, ascending, Newton-refined to ~1e-13.
std::vector<double> legendre_zeros(int l);

// Nodal latitudes (ascending polar angles) of the zonal harmonic Y_l^0.
std::vector<double> zonal_nodal_latitudes(int l);

// Largest distance from a point of the surface to the mode's nodal set,
// in closed form (density radius of the nodal set).
double max_nodal_distance(const AnalyticMode& mode);

}  // namespace nodal_lab
