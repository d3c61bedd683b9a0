#pragma once

#include <Eigen/Core>
#include <Eigen/SparseCore>
#include <vector>

#include "nodal_lab/mesh.hpp"

namespace nodal_lab {

// Cotangent stiffness S (positive semidefinite, row sums zero on closed
// meshes) and lumped diagonal mass D (vertex share of incident face areas).
struct OperatorPair {
  Eigen::SparseMatrix<double> stiffness;
  Eigen::VectorXd mass;  // diagonal of D; sums to total_area
};

OperatorPair assemble(const TriMesh& mesh);

struct EigenPair {
  double lambda = 0.0;
  Eigen::VectorXd field;   // normalized so sum_i m_i field_i^2 = total_area
  double residual = 0.0;   // ||S f - lambda D f||_2
};

// k smallest generalized eigenpairs of (S, D) by shift-invert block subspace
// iteration: SimplicialLDLT of S + delta*D, fixed seeded start block, full
// re-orthogonalization (D-metric Cholesky QR, twice), dense Rayleigh-Ritz.
// Residual target 1e-8 * ||D f||. Deterministic for fixed input. Throws
// ConvergenceFailure with a residual report if the cap is hit.
std::vector<EigenPair> smallest_eigenpairs(const OperatorPair& ops, int k,
                                           double total_area);
std::vector<EigenPair> smallest_eigenpairs(const TriMesh& mesh, int k);

// Dirichlet eigenvalues: restrict (S, D) to interior vertices (delete
// boundary rows/columns). Mesh must have a boundary and interior vertices.
// Eigenpair fields come back padded to full vertex length, zero on boundary.
double dirichlet_lambda1(const TriMesh& mesh);
std::vector<double> dirichlet_lambdas(const TriMesh& mesh, int k);
std::vector<EigenPair> dirichlet_eigenpairs(const TriMesh& mesh, int k);

// Per-vertex squared-gradient density: measure-weighted average of incident
// face gradients. The m_g-weighted sum equals f^T S f / total_area exactly
// (same per-face geometry on both sides).
Eigen::VectorXd dirichlet_energy_density(const TriMesh& mesh,
                                         const Eigen::VectorXd& field);

// Euclidean-norm eigen residual, for report surfaces.
double eigen_residual(const OperatorPair& ops, double lambda,
                      const Eigen::VectorXd& field);

}  // namespace nodal_lab
