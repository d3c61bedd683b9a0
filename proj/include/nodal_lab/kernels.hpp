#pragma once

#include <Eigen/Core>
#include <Eigen/SparseCore>
#include <vector>

// Data-parallel inner loops. Each kernel has an OpenMP variant and a serial
// reference; both perform the identical per-output-element arithmetic in the
// same order, so results are bitwise equal for any thread count. Tests assert
// exact equality; tools/bench_kernels compares timings.
namespace nodal_lab::kernels {

using SpMat = Eigen::SparseMatrix<double>;

// y = A * x for symmetric A (column-major storage doubles as row-major).
Eigen::VectorXd spmv(const SpMat& a, const Eigen::VectorXd& x);
Eigen::VectorXd spmv_serial(const SpMat& a, const Eigen::VectorXd& x);

// Per-face squared gradient norm of a vertex field. grams packs, per face,
// the inverse metric solve inputs: [g11, g12, g22] of the corner edge frame.
struct FaceFrame {
  int v0, v1, v2;
  double g11, g12, g22;  // Gram matrix of (p1-p0, p2-p0)
};
Eigen::VectorXd face_grad_sq(const std::vector<FaceFrame>& frames,
                             const Eigen::VectorXd& field);
Eigen::VectorXd face_grad_sq_serial(const std::vector<FaceFrame>& frames,
                                    const Eigen::VectorXd& field);

// mu[j] = sum of weights[i] over dist[i] > grid[j] (strict).
Eigen::VectorXd tube_counts(const Eigen::VectorXd& dist,
                            const Eigen::VectorXd& weights,
                            const std::vector<double>& grid);
Eigen::VectorXd tube_counts_serial(const Eigen::VectorXd& dist,
                                   const Eigen::VectorXd& weights,
                                   const std::vector<double>& grid);

}  // namespace nodal_lab::kernels
