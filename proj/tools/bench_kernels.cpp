// Timing harness for the OpenMP kernels against their serial references.
// Prints a table of median wall times and speedups; exits nonzero if any
// parallel kernel disagrees with its reference bitwise.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <vector>

#include "nodal_lab/kernels.hpp"
#include "nodal_lab/mesh.hpp"
#include "nodal_lab/nodal.hpp"
#include "nodal_lab/spectral.hpp"

namespace {

using Clock = std::chrono::steady_clock;

double median_ms(const std::function<void()>& fn, int reps) {
  std::vector<double> times;
  for (int i = 0; i < reps; ++i) {
    auto t0 = Clock::now();
    fn();
    auto t1 = Clock::now();
    times.push_back(std::chrono::duration<double, std::milli>(t1 - t0).count());
  }
  std::sort(times.begin(), times.end());
  return times[times.size() / 2];
}

bool report(const char* name, double serial_ms, double parallel_ms,
            bool match) {
  std::printf("%-14s %10.3f ms %10.3f ms %7.2fx %s\n", name, serial_ms,
              parallel_ms, serial_ms / parallel_ms,
              match ? "bitwise-equal" : "MISMATCH");
  return match;
}

}  // namespace

int main() {
  const int n = 512;
  nodal_lab::TriMesh mesh = nodal_lab::generate_flat_torus(n, n, 1.0, 1.0);
  nodal_lab::VolumeMeasure measure = nodal_lab::normalized_measure(mesh);
  nodal_lab::OperatorPair ops = nodal_lab::assemble(mesh);

  Eigen::VectorXd field(mesh.vertex_count());
  for (int v = 0; v < mesh.vertex_count(); ++v) {
    const auto& p = mesh.vertices[v];
    field[v] = std::sin(7.0 * p.x()) * std::cos(5.0 * p.y()) + 0.25 * p.x();
  }

  std::printf("torus %dx%d: %d vertices, %d faces\n", n, n,
              mesh.vertex_count(), mesh.face_count());
  std::printf("%-14s %13s %13s %8s\n", "kernel", "serial", "parallel",
              "speedup");

  const int reps = 9;
  bool all_match = true;

  {
    Eigen::VectorXd ys, yp;
    double ts = median_ms([&] { ys = nodal_lab::kernels::spmv_serial(
                                    ops.stiffness, field); },
                          reps);
    double tp = median_ms([&] { yp = nodal_lab::kernels::spmv(ops.stiffness,
                                                              field); },
                          reps);
    all_match &= report("spmv", ts, tp, ys == yp);
  }

  {
    std::vector<nodal_lab::kernels::FaceFrame> frames(mesh.face_count());
    for (int f = 0; f < mesh.face_count(); ++f) {
      auto corners = mesh.face_corners(f);
      Eigen::Vector3d e1 = corners[1] - corners[0];
      Eigen::Vector3d e2 = corners[2] - corners[0];
      frames[f] = {mesh.faces[f][0], mesh.faces[f][1], mesh.faces[f][2],
                   e1.dot(e1),       e1.dot(e2),       e2.dot(e2)};
    }
    Eigen::VectorXd gs, gp;
    double ts = median_ms(
        [&] { gs = nodal_lab::kernels::face_grad_sq_serial(frames, field); },
        reps);
    double tp = median_ms(
        [&] { gp = nodal_lab::kernels::face_grad_sq(frames, field); }, reps);
    all_match &= report("face_grad_sq", ts, tp, gs == gp);
  }

  {
    nodal_lab::NodalSet nodal = nodal_lab::extract_nodal_set(mesh, field);
    nodal_lab::DistanceField dist = nodal_lab::distance_to_set(mesh, nodal);
    std::vector<double> grid = nodal_lab::default_r_grid(74.0, 200);
    Eigen::VectorXd ms, mp;
    double ts = median_ms([&] { ms = nodal_lab::kernels::tube_counts_serial(
                                    dist.distance, measure.weights, grid); },
                          reps);
    double tp = median_ms([&] { mp = nodal_lab::kernels::tube_counts(
                                    dist.distance, measure.weights, grid); },
                          reps);
    all_match &= report("tube_counts", ts, tp, ms == mp);
  }

  return all_match ? 0 : 1;
}
