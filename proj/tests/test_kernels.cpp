#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <random>
#include <vector>

#include "nodal_lab/kernels.hpp"
#include "nodal_lab/mesh.hpp"
#include "nodal_lab/spectral.hpp"

using namespace nodal_lab;

namespace {

Eigen::VectorXd random_field(int n, unsigned seed) {
  std::mt19937 rng(seed);
  std::uniform_real_distribution<double> dist(-1.0, 1.0);
  Eigen::VectorXd f(n);
  for (int i = 0; i < n; ++i) f[i] = dist(rng);
  return f;
}

std::vector<kernels::FaceFrame> frames_of(const TriMesh& mesh) {
  std::vector<kernels::FaceFrame> frames(mesh.face_count());
  for (int f = 0; f < mesh.face_count(); ++f) {
    auto c = mesh.face_corners(f);
    Eigen::Vector3d e1 = c[1] - c[0], e2 = c[2] - c[0];
    frames[f] = {mesh.faces[f][0], mesh.faces[f][1], mesh.faces[f][2],
                 e1.dot(e1),       e1.dot(e2),       e2.dot(e2)};
  }
  return frames;
}

}  // namespace

TEST_CASE("spmv matches the serial reference bitwise and Eigen numerically") {
  TriMesh mesh = generate_flat_torus(24, 24);
  OperatorPair ops = assemble(mesh);
  for (unsigned seed : {1u, 2u, 3u}) {
    Eigen::VectorXd x = random_field(mesh.vertex_count(), seed);
    Eigen::VectorXd par = kernels::spmv(ops.stiffness, x);
    Eigen::VectorXd ser = kernels::spmv_serial(ops.stiffness, x);
    CHECK(par == ser);
    Eigen::VectorXd ref = ops.stiffness * x;
    CHECK((par - ref).lpNorm<Eigen::Infinity>() < 1e-12);
  }
}

TEST_CASE("spmv is bitwise stable across repeated calls") {
  TriMesh mesh = generate_icosphere(3);
  OperatorPair ops = assemble(mesh);
  Eigen::VectorXd x = random_field(mesh.vertex_count(), 7u);
  Eigen::VectorXd first = kernels::spmv(ops.stiffness, x);
  for (int rep = 0; rep < 5; ++rep)
    CHECK(kernels::spmv(ops.stiffness, x) == first);
}

TEST_CASE("face_grad_sq: linear fields have constant gradient") {
  TriMesh mesh = generate_grid(9, 7, 1.0, 1.0);
  const double a = 2.0, b = -3.0;
  Eigen::VectorXd f(mesh.vertex_count());
  for (int v = 0; v < mesh.vertex_count(); ++v)
    f[v] = a * mesh.vertices[v].x() + b * mesh.vertices[v].y();
  auto frames = frames_of(mesh);
  Eigen::VectorXd g = kernels::face_grad_sq(frames, f);
  for (int face = 0; face < mesh.face_count(); ++face)
    CHECK(g[face] == doctest::Approx(a * a + b * b).epsilon(1e-12));
  CHECK(kernels::face_grad_sq_serial(frames, f) == g);
}

TEST_CASE("face_grad_sq matches serial bitwise on curved geometry") {
  TriMesh mesh = generate_icosphere(3);
  auto frames = frames_of(mesh);
  Eigen::VectorXd f = random_field(mesh.vertex_count(), 11u);
  CHECK(kernels::face_grad_sq(frames, f) ==
        kernels::face_grad_sq_serial(frames, f));
}

TEST_CASE("face_grad_sq ties out with the stiffness quadratic form") {
  // sum_f A_f |grad f|^2 == f^T S f for the cotangent stiffness.
  TriMesh mesh = generate_flat_torus(12, 12);
  OperatorPair ops = assemble(mesh);
  auto frames = frames_of(mesh);
  Eigen::VectorXd f = random_field(mesh.vertex_count(), 13u);
  Eigen::VectorXd g = kernels::face_grad_sq(frames, f);
  double lhs = 0.0;
  for (int face = 0; face < mesh.face_count(); ++face)
    lhs += mesh.face_areas[face] * g[face];
  double rhs = f.dot(ops.stiffness * f);
  CHECK(lhs == doctest::Approx(rhs).epsilon(1e-10));
}

TEST_CASE("tube_counts against a brute-force double loop") {
  const int n = 400;
  Eigen::VectorXd dist = random_field(n, 17u).cwiseAbs();
  Eigen::VectorXd weights = random_field(n, 19u).cwiseAbs();
  std::vector<double> grid = {0.0, 0.1, 0.25, 0.5, 0.9, 1.5};
  Eigen::VectorXd mu = kernels::tube_counts(dist, weights, grid);
  REQUIRE(mu.size() == static_cast<int>(grid.size()));
  for (size_t j = 0; j < grid.size(); ++j) {
    double brute = 0.0;
    for (int i = 0; i < n; ++i)
      if (dist[i] > grid[j]) brute += weights[i];
    CHECK(mu[j] == doctest::Approx(brute).epsilon(1e-13));
  }
  CHECK(kernels::tube_counts_serial(dist, weights, grid) == mu);
}

TEST_CASE("tube_counts is strict at the threshold") {
  Eigen::VectorXd dist(4), weights(4);
  dist << 0.0, 0.5, 0.5, 1.0;
  weights << 0.25, 0.25, 0.25, 0.25;
  std::vector<double> grid = {0.0, 0.5, 1.0};
  Eigen::VectorXd mu = kernels::tube_counts(dist, weights, grid);
  CHECK(mu[0] == doctest::Approx(0.75));  // d > 0 excludes the zero entry
  CHECK(mu[1] == doctest::Approx(0.25));  // d > 0.5 excludes the pair at 0.5
  CHECK(mu[2] == doctest::Approx(0.0));   // nothing beyond 1.0
}

TEST_CASE("tube_counts output is monotone nonincreasing in r") {
  Eigen::VectorXd dist = random_field(1000, 23u).cwiseAbs() * 2.0;
  Eigen::VectorXd weights =
      Eigen::VectorXd::Constant(1000, 1.0 / 1000);
  std::vector<double> grid;
  for (int i = 0; i < 50; ++i) grid.push_back(i * 0.04);
  Eigen::VectorXd mu = kernels::tube_counts(dist, weights, grid);
  for (int j = 1; j < mu.size(); ++j) CHECK(mu[j] <= mu[j - 1]);
  CHECK(mu[0] <= 1.0 + 1e-12);  // summation rounding only
}
