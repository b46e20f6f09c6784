#pragma once

#include <array>
#include <vector>

#include <Eigen/Dense>
#include <nlohmann/json.hpp>

#include "ocmc/metric.hpp"
#include "ocmc/quadrature.hpp"
#include "ocmc/reduced_functional.hpp"

namespace ocmc {

// Harmonic indices (see RealHarmonics) carried by a height function of
// degree L: every l <= L except l = 1.
std::vector<int> graph_modes(int degree);

// The surface x(y) = lambda (xi + (1 + u(y)) y), y on the unit sphere, with
// u = sum_b coefficients[b] Y_{graph_modes[b]}. The stored u is dimensionless;
// heights over the coordinate sphere of radius lambda are lambda u.
struct SphericalGraph {
  Vec3 xi = Vec3::Zero();
  double lambda = 1.0;
  int degree = 8;
  Eigen::VectorXd coefficients;

  static SphericalGraph round(const Vec3& xi, double lambda, int degree);
  double height(const Vec3& y) const;
  // lambda * height(y).
  double scaled_height(const Vec3& y) const;
  // Mean of scaled_height over the sphere.
  double scaled_mean() const;
};

// Quadrature on the unit sphere of directions y about the center.
struct SphereRule {
  std::vector<Vec3> directions;
  std::vector<double> weights;
};

struct CmcOptions {
  // Rule for tensors without angular kinks: Gauss-Legendre panels in the
  // polar angle about the direction toward the origin, graded toward it.
  int polar_nodes_per_panel = 16;
  int azimuthal_count = 0;  // 0 selects max(48, 6 L)
  // Rule for tensors with angular kinks, applied to the sphere fitted to the
  // current mean height.
  ConicalRuleOptions conical{32, 10, 6, 16};
  int ball_radial_nodes = 48;
  int shell_nodes = 6;
  double tolerance = 1e-10;  // on the projections of lambda (H - 2/lambda - ...)
  int max_iterations = 40;
  int max_halvings = 8;
  int divergence_window = 5;
  double max_condition = 1e12;
  // Reuse the Jacobian while the residual contracts at least this fast.
  double reuse_contraction = 0.25;
};

SphereRule make_sphere_rule(const MetricSpec& m, const Vec3& xi,
                            double base_radius, int degree,
                            const CmcOptions& options = {});

struct GraphGeometry {
  double area = 0.0;
  double volume = 0.0;
  double area_excess = 0.0;    // area - 4 pi lambda^2
  double volume_excess = 0.0;  // volume - 4 pi lambda^3 / 3
  SphereRule rule;
  std::vector<double> mean_curvature;  // H at the rule's directions
  double rho_sigma = 0.0;              // min |x| over the surface
  double mean_H = 0.0;                 // area-weighted mean of H
};

// Area, enclosed volume and mean curvature (outward normal, round spheres
// positive). Throws kGeometry when the graph leaves the regime |u| <= 0.1
// or an area element degenerates.
GraphGeometry graph_geometry(const MetricSpec& m, const SphericalGraph& graph,
                             const CmcOptions& options = {});

struct SolveReport {
  Vec3 xi = Vec3::Zero();
  double lambda = 0.0;
  int degree = 0;
  std::array<double, 4> h{};  // H - 2/lambda = h0 + h1 y1 + h2 y2 + h3 y3
  double residual_norm = 0.0;
  double volume_error = 0.0;  // relative
  double area = 0.0;
  double volume = 0.0;
  double rho_sigma = 0.0;
  double mean_H = 0.0;
  double outlying_a = 0.0;  // mean_H rho_sigma / 2
  // (area - 4 pi lambda^2) / 2 pi, with the area moved to the exact volume
  // by dA/dV = 2/lambda.
  double f_lambda = 0.0;
  int newton_iterations = 0;
  double jacobian_condition = 0.0;
  std::vector<double> residual_history;

  double first_harmonic_norm() const;  // |h1| + |h2| + |h3|
};

struct CmcSolution {
  SphericalGraph graph;
  SolveReport report;
};

// Newton iteration for the graph with vol = 4 pi lambda^3 / 3 whose mean
// curvature equals 2/lambda plus a constant and first harmonics in every
// projection of degree <= L. Requires |xi| > 1.05, lambda >= 100, L >= 4.
// Throws kSolverFailure when the residual grows over the divergence window
// or the iteration budget runs out, kIllConditioned when the Jacobian
// condition number exceeds the limit.
CmcSolution lyapunov_schmidt_solve(const MetricSpec& m, const Vec3& xi,
                                   double lambda, int degree,
                                   const CmcOptions& options = {});

double f_lambda(const MetricSpec& m, const Vec3& xi, double lambda, int degree,
                const CmcOptions& options = {});

// Independent solves on up to `threads` workers; results in input order.
std::vector<SolveReport> solve_many(const MetricSpec& m,
                                    const std::vector<Vec3>& centers,
                                    double lambda, int degree,
                                    const CmcOptions& options = {},
                                    int threads = 1);

// max over lambda in `lambdas` of lambda^3 (|h1| + |h2| + |h3|) for the
// Schwarzschild solve at xi = (0, 0, 2).
double calibrate_multipliers(int degree, const std::vector<double>& lambdas,
                             const CmcOptions& options = {});

struct FindCmcOptions {
  CmcOptions solve;
  CriticalPointOptions search{1e-4, 1e-6, 40, 1.1, 1e3, 0.05, 1e-6};
  double box_half_width = 0.5;  // sup-norm box about the start
  double calibration_constant = 0.0;  // 0: measured at lambda and 2 lambda
};

struct CmcFindResult {
  CmcSolution start;
  CmcSolution solution;
  CriticalPointReport critical;
  double calibration_constant = 0.0;
  double multiplier_bound = 0.0;  // 10 lambda^-3 calibration_constant
};

// Minimizes f_lambda over xi by the trust-region search. Throws kBoundary
// when the search leaves the box or the region |xi| > min_radius, or ends
// anywhere other than a strict minimum.
CmcFindResult find_cmc(const MetricSpec& m, const Vec3& xi0, double lambda,
                       int degree, const FindCmcOptions& options = {});

nlohmann::json solve_report_json(const SolveReport& report);

}  // namespace ocmc
