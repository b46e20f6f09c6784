#pragma once

#include <array>
#include <functional>
#include <iosfwd>
#include <string>
#include <vector>

#include "ocmc/perturbation_tensor.hpp"
#include "ocmc/quadrature.hpp"

namespace ocmc {

double schwarzschild_part(double r);
// r d/dr schwarzschild_part(r).
double phi_lower_bound(double r);

enum class SurfaceRule { kAuto, kProduct, kConical };

// kAuto picks the cone-aligned rule whenever the tensor reports angular
// kinks and the product grid otherwise.
struct FunctionalContext {
  TensorPtr tensor;
  QuadratureGrid sphere_grid;
  RadialRule radial;
  ConicalRuleOptions conical;
  SurfaceRule rule = SurfaceRule::kAuto;
};

FunctionalContext make_context(TensorPtr tensor,
                               int n_polar = kDefaultPolarNodes,
                               int radial_nodes = kDefaultRadialNodes,
                               SurfaceRule rule = SurfaceRule::kAuto);

double integrate_over_sphere(const FunctionalContext& ctx, const ScalarField& f,
                             const Vec3& center);
double integrate_over_ball(const FunctionalContext& ctx, const ScalarField& f,
                           const Vec3& center);

double eval_F(const FunctionalContext& ctx, const Vec3& xi);
double eval_G(const FunctionalContext& ctx, const Vec3& xi, double s);
// Ball integral of the scalar-curvature density.
double eval_K(const FunctionalContext& ctx, const Vec3& xi, double s);
// Same quantity through the divergence theorem, as a sphere integral.
double eval_K_surface(const FunctionalContext& ctx, const Vec3& xi, double s);

// Central difference with one Richardson step: (4 D(h/2) - D(h)) / 3.
double richardson_derivative(const std::function<double(double)>& f, double x,
                             double h);

// |s G'(s) - G(s) - K(s)|.
double flux_residual(const FunctionalContext& ctx, const Vec3& xi, double s);

struct RadialDerivative {
  double finite_difference;  // d/ds F(s xi) at s = 1
  double flux_based;         // phi_lower_bound(|xi|) + (G(1) + K(1)) / 4 pi
};

// Throws kInconsistency when the two paths differ by more than 1e-4.
RadialDerivative radial_derivative_F(const FunctionalContext& ctx,
                                     const Vec3& xi);

enum class Classification { kStrictMin, kSaddle, kMax, kDegenerate };
const char* to_string(Classification c);

struct CriticalPointReport {
  Vec3 xi = Vec3::Zero();
  double value = 0.0;
  double gradient_norm = 0.0;
  std::array<double, 3> hessian_eigenvalues{};
  Classification classification = Classification::kDegenerate;
  int iterations = 0;
  bool converged = false;
};

struct CriticalPointOptions {
  double step = 1e-4;
  double gradient_tol = 1e-8;
  int max_iterations = 200;
  double min_radius = 1.02;
  double max_radius = 1e3;
  double initial_trust_radius = 0.1;
  double degeneracy_ratio = 1e-6;
};

using Objective = std::function<double(const Vec3&)>;

Vec3 fd_gradient(const Objective& f, const Vec3& x, double h);
Mat3 fd_hessian(const Objective& f, const Vec3& x, double h);
Classification classify(const std::array<double, 3>& eigenvalues,
                        double degeneracy_ratio);

// Trust-region Newton iteration for a critical point of f. Iterates that
// reach |xi| <= min_radius (or leave |xi| < max_radius) raise kBoundary.
// Non-convergence returns the last iterate flagged degenerate.
CriticalPointReport find_critical_point(const Objective& f, const Vec3& xi0,
                                        const CriticalPointOptions& options = {});
CriticalPointReport find_critical_point(const FunctionalContext& ctx,
                                        const Vec3& xi0,
                                        const CriticalPointOptions& options = {});

struct ScanRow {
  Vec3 xi;
  double radius;
  double f;
  double df_radial;
  double phi_lower_bound;
  double g1;
  double k1;
  double flux_residual;
};

ScanRow scan_point(const FunctionalContext& ctx, const Vec3& xi);
// Points ordered as given; rows computed on up to `threads` workers.
std::vector<ScanRow> scan_F(const FunctionalContext& ctx,
                            const std::vector<Vec3>& points, int threads = 1);
void write_scan_csv(std::ostream& out, const std::vector<ScanRow>& rows);
extern const char* const kScanCsvHeader;

}  // namespace ocmc
