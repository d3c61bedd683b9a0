#include "nodal_lab/spectral.hpp"

#include <Eigen/Cholesky>
#include <Eigen/Dense>
#include <Eigen/SparseCholesky>
#include <algorithm>
#include <cmath>
#include <random>
#include <sstream>
#include <vector>

#include "nodal_lab/errors.hpp"
#include "nodal_lab/kernels.hpp"

namespace nodal_lab {

namespace {

using SpMat = Eigen::SparseMatrix<double>;

std::vector<kernels::FaceFrame> face_frames(const TriMesh& mesh) {
  std::vector<kernels::FaceFrame> frames(mesh.face_count());
  for (int f = 0; f < mesh.face_count(); ++f) {
    auto c = mesh.face_corners(f);
    Eigen::Vector3d e1 = c[1] - c[0], e2 = c[2] - c[0];
    frames[f] = {mesh.faces[f][0], mesh.faces[f][1], mesh.faces[f][2],
                 e1.dot(e1), e1.dot(e2), e2.dot(e2)};
  }
  return frames;
}

}  // namespace

OperatorPair assemble(const TriMesh& mesh) {
  const int n = mesh.vertex_count();
  std::vector<Eigen::Triplet<double>> triplets;
  triplets.reserve(12 * mesh.face_count());
  Eigen::VectorXd mass = Eigen::VectorXd::Zero(n);

  for (int f = 0; f < mesh.face_count(); ++f) {
    const auto& face = mesh.faces[f];
    double area = mesh.face_areas[f];
    if (!(area > 0.0))
      throw AssemblyError("face " + std::to_string(f) + " has zero area");

    auto c = mesh.face_corners(f);
    // Squared length of the edge opposite each corner.
    double sq[3] = {(c[2] - c[1]).squaredNorm(), (c[0] - c[2]).squaredNorm(),
                    (c[1] - c[0]).squaredNorm()};
    for (int k = 0; k < 3; ++k) {
      int i = face[(k + 1) % 3], j = face[(k + 2) % 3];
      double cot = (-sq[k] + sq[(k + 1) % 3] + sq[(k + 2) % 3]) / (4.0 * area);
      double w = 0.5 * cot;
      triplets.emplace_back(i, i, w);
      triplets.emplace_back(j, j, w);
      triplets.emplace_back(i, j, -w);
      triplets.emplace_back(j, i, -w);
      mass[face[k]] += area / 3.0;
    }
  }

  OperatorPair ops;
  ops.stiffness.resize(n, n);
  ops.stiffness.setFromTriplets(triplets.begin(), triplets.end());
  ops.stiffness.makeCompressed();
  ops.mass = mass;
  return ops;
}

double eigen_residual(const OperatorPair& ops, double lambda,
                      const Eigen::VectorXd& field) {
  return (kernels::spmv(ops.stiffness, field) -
          lambda * ops.mass.cwiseProduct(field))
      .norm();
}

namespace {

constexpr double kResidualFactor = 1e-8;
constexpr int kMaxIterations = 400;

void sign_fix(Eigen::VectorXd& x) {
  int idx = 0;
  double best = std::abs(x[0]);
  for (int i = 1; i < x.size(); ++i)
    if (std::abs(x[i]) > best) {
      best = std::abs(x[i]);
      idx = i;
    }
  if (x[idx] < 0) x = -x;
}

std::vector<EigenPair> finalize_pairs(const OperatorPair& ops,
                                      const Eigen::MatrixXd& vectors,
                                      const Eigen::VectorXd& values, int k,
                                      double total_area) {
  std::vector<EigenPair> pairs(k);
  for (int j = 0; j < k; ++j) {
    EigenPair p;
    p.lambda = std::max(values[j], 0.0);
    p.field = vectors.col(j);
    double norm_sq = p.field.dot(ops.mass.cwiseProduct(p.field));
    p.field *= std::sqrt(total_area / norm_sq);
    sign_fix(p.field);
    p.residual = eigen_residual(ops, p.lambda, p.field);
    pairs[j] = p;
  }
  return pairs;
}

std::vector<EigenPair> solve_dense(const OperatorPair& ops, int k,
                                   double total_area) {
  Eigen::MatrixXd s(ops.stiffness);
  Eigen::MatrixXd d = ops.mass.asDiagonal();
  Eigen::GeneralizedSelfAdjointEigenSolver<Eigen::MatrixXd> solver(s, d);
  if (solver.info() != Eigen::Success)
    throw ConvergenceFailure("dense generalized eigensolver failed");
  return finalize_pairs(ops, solver.eigenvectors().leftCols(k),
                        solver.eigenvalues().head(k), k, total_area);
}

// D-metric Cholesky QR, applied twice for full re-orthogonalization.
void d_orthonormalize(Eigen::MatrixXd& x, const Eigen::VectorXd& d) {
  for (int pass = 0; pass < 2; ++pass) {
    Eigen::MatrixXd gram = x.transpose() * d.asDiagonal() * x;
    Eigen::LLT<Eigen::MatrixXd> llt(gram);
    if (llt.info() != Eigen::Success)
      throw ConvergenceFailure("block lost rank during orthogonalization");
    Eigen::MatrixXd xt = x.transpose();
    llt.matrixL().solveInPlace(xt);
    x = xt.transpose();
  }
}

}  // namespace

std::vector<EigenPair> smallest_eigenpairs(const OperatorPair& ops, int k,
                                           double total_area) {
  const int n = static_cast<int>(ops.stiffness.rows());
  if (k < 1) throw InvalidArgument("eigenpair count must be >= 1");
  if (k >= n)
    throw InvalidArgument("eigenpair count must be below the vertex count");

  const int block = std::min(n, k + 10);
  if (n <= std::max(300, block + 5)) return solve_dense(ops, k, total_area);

  // Shift-invert operator (S + delta D)^{-1} D with a small positive shift
  // keeping the factorization definite on closed meshes.
  const double scale = ops.stiffness.diagonal().sum() / ops.mass.sum();
  const double delta = std::max(1e-4 * scale, 1e-12);
  SpMat shifted = ops.stiffness;
  for (int i = 0; i < n; ++i) shifted.coeffRef(i, i) += delta * ops.mass[i];
  shifted.makeCompressed();
  Eigen::SimplicialLDLT<SpMat> ldlt(shifted);
  if (ldlt.info() != Eigen::Success)
    throw ConvergenceFailure("sparse factorization of shifted operator failed");

  // Fixed seeded start block: deterministic for a given (n, k).
  std::mt19937 rng(20240615u);
  std::uniform_real_distribution<double> dist(-1.0, 1.0);
  Eigen::MatrixXd x(n, block);
  for (int j = 0; j < block; ++j)
    for (int i = 0; i < n; ++i) x(i, j) = dist(rng);
  d_orthonormalize(x, ops.mass);

  Eigen::VectorXd theta;
  Eigen::MatrixXd sx, dx;
  for (int iter = 0; iter < kMaxIterations; ++iter) {
    Eigen::MatrixXd y = ldlt.solve(ops.mass.asDiagonal() * x);
    d_orthonormalize(y, ops.mass);

    Eigen::MatrixXd sy(n, block);
    for (int j = 0; j < block; ++j)
      sy.col(j) = kernels::spmv(ops.stiffness, y.col(j));
    Eigen::MatrixXd h = y.transpose() * sy;
    h = 0.5 * (h + h.transpose()).eval();
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> ritz(h);
    if (ritz.info() != Eigen::Success)
      throw ConvergenceFailure("Rayleigh-Ritz projection failed");

    x = y * ritz.eigenvectors();
    sx = sy * ritz.eigenvectors();
    dx = ops.mass.asDiagonal() * x;
    theta = ritz.eigenvalues();

    bool converged = true;
    for (int j = 0; j < k && converged; ++j) {
      double res = (sx.col(j) - theta[j] * dx.col(j)).norm();
      converged = res <= kResidualFactor * dx.col(j).norm();
    }
    if (converged)
      return finalize_pairs(ops, x.leftCols(k), theta.head(k), k, total_area);
  }

  std::ostringstream msg;
  msg << "eigensolver did not converge; residuals:";
  for (int j = 0; j < k; ++j)
    msg << ' ' << (sx.col(j) - theta[j] * dx.col(j)).norm();
  throw ConvergenceFailure(msg.str());
}

std::vector<EigenPair> smallest_eigenpairs(const TriMesh& mesh, int k) {
  return smallest_eigenpairs(assemble(mesh), k, mesh.total_area);
}

namespace {

// Deletes boundary rows/columns; returns interior index list.
std::vector<int> interior_vertices(const TriMesh& mesh) {
  if (mesh.closed())
    throw EmptyDomain("Dirichlet problem needs a mesh with boundary");
  std::vector<int> interior;
  for (int v = 0; v < mesh.vertex_count(); ++v)
    if (!mesh.is_boundary_vertex[v]) interior.push_back(v);
  if (interior.empty())
    throw EmptyDomain("Dirichlet problem needs interior vertices");
  return interior;
}

OperatorPair restrict_to(const OperatorPair& ops,
                         const std::vector<int>& subset, int full_n) {
  std::vector<int> to_sub(full_n, -1);
  for (int i = 0; i < static_cast<int>(subset.size()); ++i)
    to_sub[subset[i]] = i;

  std::vector<Eigen::Triplet<double>> triplets;
  for (int col = 0; col < full_n; ++col) {
    if (to_sub[col] < 0) continue;
    for (SpMat::InnerIterator it(ops.stiffness, col); it; ++it) {
      int r = to_sub[it.row()];
      if (r >= 0) triplets.emplace_back(r, to_sub[col], it.value());
    }
  }
  OperatorPair out;
  out.stiffness.resize(subset.size(), subset.size());
  out.stiffness.setFromTriplets(triplets.begin(), triplets.end());
  out.stiffness.makeCompressed();
  out.mass.resize(subset.size());
  for (int i = 0; i < static_cast<int>(subset.size()); ++i)
    out.mass[i] = ops.mass[subset[i]];
  return out;
}

}  // namespace

std::vector<EigenPair> dirichlet_eigenpairs(const TriMesh& mesh, int k) {
  auto interior = interior_vertices(mesh);
  OperatorPair ops = assemble(mesh);
  OperatorPair restricted =
      restrict_to(ops, interior, mesh.vertex_count());
  if (k >= static_cast<int>(interior.size()))
    throw InvalidArgument("k exceeds interior vertex count");
  auto pairs = smallest_eigenpairs(restricted, k, restricted.mass.sum());
  // Pad back to full vertex length with the zero Dirichlet data.
  for (auto& pair : pairs) {
    Eigen::VectorXd full = Eigen::VectorXd::Zero(mesh.vertex_count());
    for (int i = 0; i < static_cast<int>(interior.size()); ++i)
      full[interior[i]] = pair.field[i];
    pair.field = std::move(full);
  }
  return pairs;
}

std::vector<double> dirichlet_lambdas(const TriMesh& mesh, int k) {
  auto pairs = dirichlet_eigenpairs(mesh, k);
  std::vector<double> lambdas(k);
  for (int j = 0; j < k; ++j) lambdas[j] = pairs[j].lambda;
  return lambdas;
}

double dirichlet_lambda1(const TriMesh& mesh) {
  return dirichlet_lambdas(mesh, 1)[0];
}

Eigen::VectorXd dirichlet_energy_density(const TriMesh& mesh,
                                         const Eigen::VectorXd& field) {
  if (field.size() != mesh.vertex_count())
    throw GeometryMismatch("field size does not match vertex count");
  auto frames = face_frames(mesh);
  Eigen::VectorXd per_face = kernels::face_grad_sq(frames, field);

  Eigen::VectorXd num = Eigen::VectorXd::Zero(mesh.vertex_count());
  Eigen::VectorXd den = Eigen::VectorXd::Zero(mesh.vertex_count());
  for (int f = 0; f < mesh.face_count(); ++f) {
    double share = mesh.face_areas[f] / 3.0;
    for (int c : mesh.faces[f]) {
      num[c] += share * per_face[f];
      den[c] += share;
    }
  }
  return num.cwiseQuotient(den);
}

}  // namespace nodal_lab
