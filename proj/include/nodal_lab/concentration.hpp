#pragma once

#include <Eigen/Core>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "nodal_lab/analytic.hpp"
#include "nodal_lab/mesh.hpp"
#include "nodal_lab/nodal.hpp"

namespace nodal_lab {

// One tested inequality instance. x is the abscissa (r, p, or the r of an
// (r, eps) pair with x2 = eps); pass means lhs <= rhs + tol.
struct CheckRecord {
  double x = 0.0;
  std::optional<double> x2;
  double lhs = 0.0;
  double rhs = 0.0;
  double slack = 0.0;  // rhs - lhs
  bool pass = true;
};

struct CheckReport {
  std::string check;
  double lambda = 0.0;
  double mesh_h = 0.0;
  int mesh_depth = -1;
  double tol_h = 0.0;
  std::vector<CheckRecord> records;
  double max_violation = 0.0;  // max(lhs - rhs, 0) over records
  std::optional<double> fitted_constant;
  bool pass_all = true;
  nlohmann::ordered_json config;  // resolved parameters, echoed for provenance

  nlohmann::ordered_json to_json() const;
  void write_json(const std::string& path) const;
  // Columns: x,lhs,rhs,slack,pass. Pair abscissae are written "r|eps".
  void write_csv(const std::string& path) const;
};

// Discretization allowance kappa * h * sqrt(lambda); zero for oracle tiers.
double discretization_tolerance(double mesh_h, double lambda,
                                double kappa = 2.0);

// mu(r) <= exp(1 - sqrt(lambda) * r) over the profile's grid.
CheckReport check_nodal_concentration(const TubeProfile& profile,
                                      double lambda, double tol_h);

// mu(r) <= exp(1 - sqrt(lambda1)*r) for boundary-distance profiles.
CheckReport check_boundary_decay(const TubeProfile& profile, double lambda1,
                                 double tol_h);

// (1 + eps^2 lambda1) mu(r + eps) <= mu(r) for (r, eps) pairs; both abscissae
// must lie on the profile grid (GridRange otherwise).
CheckReport check_iteration_inequality(const TubeProfile& profile,
                                       double lambda1,
                                       const std::vector<std::pair<double, double>>& pairs,
                                       double tol_h);

// Largest grid radius whose complement still holds measure eta, checked
// against (1/sqrt(lambda1)) * log(e/eta). eta in (0,1).
struct BsepResult {
  double quantile = 0.0;
  CheckReport report;
};
BsepResult bsep_k1(const TubeProfile& profile, double lambda1, double eta,
                   double tol_h);

// Greedy k-region packing: grows k regions of measure >= eta_alpha around
// farthest-from-everything seeds, then measures the min pairwise/boundary
// separation. The candidate is a lower bound for the optimal separation and
// must respect 2 / sqrt(lambda_k * min eta).
struct SeparationCandidate {
  double separation = 0.0;
  std::vector<std::vector<int>> regions;
  CheckReport report;
};
SeparationCandidate separation_candidate(const TriMesh& mesh,
                                         const VolumeMeasure& measure,
                                         double lambda_k,
                                         const std::vector<double>& etas,
                                         double tol_h);

// Energy-filtered ball cover around the nodal set (the "cm-omega" check).
struct CoverParams {
  double c_ball = 1.5707963267948966;  // R = c_ball / sqrt(lambda)
  double c_thresh = 8.0;               // energy threshold multiplier
  double lambda_min = 100.0;           // guard: construction needs lambda >= this
  double energy_radius_factor = 20.0;  // energy balls of radius factor * R
};

struct NodalCover {
  double lambda = 0.0;
  double xi = 0.0;
  double ball_radius = 0.0;       // R
  double energy_radius = 0.0;     // min(20R, diam/4)
  bool energy_radius_clamped = false;
  std::vector<int> center_nodes;  // graph node ids, greedy order
  std::vector<double> energy_avg; // E_i, ball-averaged |grad f|^2
  std::vector<double> energy_ball_measure;  // m_g of each energy ball
  double threshold = 0.0;         // tau = c_thresh * (lambda/xi) * ||f||_2^2
  std::vector<int> kept;          // centers with E_i <= tau
  std::vector<int> rejected;
  std::vector<char> in_omega;     // per-vertex membership of Omega
  double omega_measure = 0.0;
  double rejected_measure = 0.0;  // measure of the rejected 3R-balls' union
  int covering_multiplicity = 0;  // max energy balls covering one vertex
  bool covers_ball_neighborhood = false;  // Omega u Omega' contains B_R(zeros)
  double inclusion_constant = 0.0;        // fitted C-hat
  double field_l2 = 0.0;
};

NodalCover construct_nodal_cover(const TriMesh& mesh,
                                 const VolumeMeasure& measure,
                                 const Eigen::VectorXd& field,
                                 const NodalSet& nodal,
                                 const GeodesicGraph& graph,
                                 const DistanceField& nodal_distance,
                                 const Eigen::VectorXd& energy_density,
                                 double lambda, double xi,
                                 const CoverParams& params = {});

// m_g({v in Omega : |f(v)| > r}) <= exp(1 - C sqrt(xi) r / ||f||_2) on the
// grid; fitted_constant is the largest C passing every record.
CheckReport check_restricted_tail(const Eigen::VectorXd& field,
                                  const std::vector<char>& in_omega,
                                  const VolumeMeasure& measure, double xi,
                                  double c, const std::vector<double>& r_grid,
                                  double tol_h);

double fit_tail_constant(const Eigen::VectorXd& field,
                         const std::vector<char>& in_omega,
                         const VolumeMeasure& measure, double xi,
                         const std::vector<double>& r_grid);

// (sum_Omega w |f|^p)^(1/p) <= e Gamma(p+1)^(1/p) ||f||_2 / (C sqrt(xi)),
// with a Cavalieri cross-check: rhs' integrates the fitted exponential tail
// numerically and must not exceed rhs.
CheckReport check_restricted_lp(const Eigen::VectorXd& field,
                                const std::vector<char>& in_omega,
                                const VolumeMeasure& measure,
                                const std::vector<double>& p_list, double xi,
                                double c, double tol_h);

// m_g({|f| > r}) <= ||f||_2^2 / r^2, exact (finite Markov), no tolerance.
CheckRecord chebyshev_tail(const Eigen::VectorXd& field,
                           const VolumeMeasure& measure, double r);

// m_g-norms of a vertex field.
double field_l2(const Eigen::VectorXd& field, const VolumeMeasure& measure);
double field_lp(const Eigen::VectorXd& field, const VolumeMeasure& measure,
                double p, const std::vector<char>* mask = nullptr);

// Density constant of the nodal set: sqrt(lambda) * max_v dist(v, zeros).
double fit_density_constant(const DistanceField& nodal_distance,
                            double lambda);

}  // namespace nodal_lab
