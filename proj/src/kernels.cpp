#include "nodal_lab/kernels.hpp"

namespace nodal_lab::kernels {

namespace {

inline double spmv_row(const SpMat& a, const Eigen::VectorXd& x, int row) {
  double acc = 0.0;
  for (SpMat::InnerIterator it(a, row); it; ++it) acc += it.value() * x[it.index()];
  return acc;
}

inline double grad_sq(const FaceFrame& fr, const Eigen::VectorXd& f) {
  // |grad f|^2 = df^T G^{-1} df on the face's edge frame.
  double d1 = f[fr.v1] - f[fr.v0];
  double d2 = f[fr.v2] - f[fr.v0];
  double det = fr.g11 * fr.g22 - fr.g12 * fr.g12;
  double c1 = (fr.g22 * d1 - fr.g12 * d2) / det;
  double c2 = (fr.g11 * d2 - fr.g12 * d1) / det;
  return c1 * d1 + c2 * d2;
}

inline double count_above(const Eigen::VectorXd& dist,
                          const Eigen::VectorXd& weights, double r) {
  double acc = 0.0;
  for (Eigen::Index i = 0; i < dist.size(); ++i)
    if (dist[i] > r) acc += weights[i];
  return acc;
}

}  // namespace

Eigen::VectorXd spmv(const SpMat& a, const Eigen::VectorXd& x) {
  Eigen::VectorXd y(a.outerSize());
#pragma omp parallel for schedule(static)
  for (int row = 0; row < a.outerSize(); ++row) y[row] = spmv_row(a, x, row);
  return y;
}

Eigen::VectorXd spmv_serial(const SpMat& a, const Eigen::VectorXd& x) {
  Eigen::VectorXd y(a.outerSize());
  for (int row = 0; row < a.outerSize(); ++row) y[row] = spmv_row(a, x, row);
  return y;
}

Eigen::VectorXd face_grad_sq(const std::vector<FaceFrame>& frames,
                             const Eigen::VectorXd& field) {
  Eigen::VectorXd g(frames.size());
#pragma omp parallel for schedule(static)
  for (int f = 0; f < static_cast<int>(frames.size()); ++f)
    g[f] = grad_sq(frames[f], field);
  return g;
}

Eigen::VectorXd face_grad_sq_serial(const std::vector<FaceFrame>& frames,
                                    const Eigen::VectorXd& field) {
  Eigen::VectorXd g(frames.size());
  for (int f = 0; f < static_cast<int>(frames.size()); ++f)
    g[f] = grad_sq(frames[f], field);
  return g;
}

Eigen::VectorXd tube_counts(const Eigen::VectorXd& dist,
                            const Eigen::VectorXd& weights,
                            const std::vector<double>& grid) {
  Eigen::VectorXd mu(grid.size());
#pragma omp parallel for schedule(static)
  for (int j = 0; j < static_cast<int>(grid.size()); ++j)
    mu[j] = count_above(dist, weights, grid[j]);
  return mu;
}

Eigen::VectorXd tube_counts_serial(const Eigen::VectorXd& dist,
                                   const Eigen::VectorXd& weights,
                                   const std::vector<double>& grid) {
  Eigen::VectorXd mu(grid.size());
  for (int j = 0; j < static_cast<int>(grid.size()); ++j)
    mu[j] = count_above(dist, weights, grid[j]);
  return mu;
}

}  // namespace nodal_lab::kernels
