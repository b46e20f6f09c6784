#include "ocmc/reduced_functional.hpp"

#include <algorithm>
#include <cmath>
#include <iomanip>
#include <numbers>
#include <ostream>
#include <sstream>
#include <thread>
#include <vector>

#include <Eigen/Eigenvalues>

#include "ocmc/errors.hpp"

namespace ocmc {

namespace {

constexpr double kPi = std::numbers::pi;

void require_outside(double r, const char* what) {
  if (!(r > 1.0)) {
    std::ostringstream os;
    os.precision(17);
    os << what << ": radius " << r << " must exceed 1";
    throw Error(ErrorKind::kDomain, os.str());
  }
}

void require_center(const Vec3& c) {
  if (!(c.norm() > 1.0 + 1e-6)) {
    std::ostringstream os;
    os.precision(17);
    os << "center (" << c.x() << ", " << c.y() << ", " << c.z()
       << ") must satisfy |center| > 1 + 1e-6";
    throw Error(ErrorKind::kDomain, os.str());
  }
}

bool use_conical(const FunctionalContext& ctx) {
  switch (ctx.rule) {
    case SurfaceRule::kConical: return true;
    case SurfaceRule::kProduct: return false;
    case SurfaceRule::kAuto: return !ctx.tensor->angular_kinks().empty();
  }
  return false;
}

std::string point_text(const Vec3& x) {
  std::ostringstream os;
  os.precision(17);
  os << "(" << x.x() << ", " << x.y() << ", " << x.z() << ")";
  return os.str();
}

}  // namespace

namespace {

// Coefficient of r^-2m in the large-r expansion of schwarzschild_part; the
// first nonzero one is m = 3.
double schwarzschild_coefficient(int m) {
  return -16.0 / (m + 1.0) + 30.0 / (2.0 * m + 1.0) - 2.0 / (2.0 * m - 1.0);
}

// Sum of c_m r^-2m (weight m -> -2m for phi) from m = 3 until the terms
// stop mattering; the closed forms cancel catastrophically for large r.
double schwarzschild_series(double r, bool radial_derivative) {
  const double u = 1.0 / (r * r);
  std::vector<double> terms;
  double power = u * u * u;
  for (int m = 3; m < 400; ++m, power *= u) {
    const double w = radial_derivative ? -2.0 * m : 1.0;
    const double term = w * schwarzschild_coefficient(m) * power;
    terms.push_back(term);
    if (std::abs(term) < 1e-18 * std::abs(terms.front())) break;
  }
  double sum = 0.0;
  for (auto it = terms.rbegin(); it != terms.rend(); ++it) sum += *it;
  return sum;
}

constexpr double kSeriesRadius = 2.0;

}  // namespace

double schwarzschild_part(double r) {
  require_outside(r, "schwarzschild_part");
  if (r >= kSeriesRadius) return schwarzschild_series(r, false);
  const double l1 = std::log1p(-1.0 / (r * r));
  const double l2 = std::log1p(2.0 / (r - 1.0));
  return -14.0 + 16.0 * r * r * l1 + (15.0 * r - 1.0 / r) * l2;
}

double phi_lower_bound(double r) {
  require_outside(r, "phi_lower_bound");
  if (r >= kSeriesRadius) return schwarzschild_series(r, true);
  const double l1 = std::log1p(-1.0 / (r * r));
  const double l2 = std::log1p(2.0 / (r - 1.0));
  return 32.0 * r * r * l1 + (15.0 * r + 1.0 / r) * l2 +
         2.0 * (r * r + 1.0) / (r * r - 1.0);
}

FunctionalContext make_context(TensorPtr tensor, int n_polar, int radial_nodes,
                               SurfaceRule rule) {
  if (!tensor) throw Error(ErrorKind::kInvalidArgument, "null tensor");
  QuadratureGrid grid = build_sphere_grid(n_polar);
  if (grid.exactness_degree() < 31) {
    throw Error(ErrorKind::kInvalidArgument,
                "functional context needs grid exactness >= 31 (n_polar >= 16)");
  }
  return FunctionalContext{std::move(tensor), std::move(grid),
                           build_radial_rule(radial_nodes), ConicalRuleOptions{},
                           rule};
}

double integrate_over_sphere(const FunctionalContext& ctx, const ScalarField& f,
                             const Vec3& center) {
  if (use_conical(ctx)) {
    const auto kinks = ctx.tensor->angular_kinks();
    return integrate_sphere_conical(f, center, kinks, ctx.conical);
  }
  return integrate_sphere(f, center, grid_for_center(ctx.sphere_grid, center));
}

double integrate_over_ball(const FunctionalContext& ctx, const ScalarField& f,
                           const Vec3& center) {
  if (use_conical(ctx)) {
    const auto kinks = ctx.tensor->angular_kinks();
    return integrate_ball_conical(f, center, kinks, ctx.conical);
  }
  return integrate_ball(f, center, grid_for_center(ctx.sphere_grid, center),
                        ctx.radial, OriginSingular::kYes);
}

double eval_G(const FunctionalContext& ctx, const Vec3& xi, double s) {
  const Vec3 c = s * xi;
  require_center(c);
  if (ctx.tensor->is_zero()) return 0.0;
  const PerturbationTensor& t = *ctx.tensor;
  const double surface = integrate_over_sphere(
      ctx, [&](const Vec3& x) { return trace_sphere(t, c, x); }, c);
  const double volume = integrate_over_ball(
      ctx, [&](const Vec3& x) { return trace_ambient(t, x); }, c);
  return surface - 2.0 * volume;
}

double eval_K(const FunctionalContext& ctx, const Vec3& xi, double s) {
  const Vec3 c = s * xi;
  require_center(c);
  if (ctx.tensor->is_zero()) return 0.0;
  const PerturbationTensor& t = *ctx.tensor;
  return integrate_over_ball(
      ctx, [&](const Vec3& x) { return scalar_density(t, x); }, c);
}

double eval_K_surface(const FunctionalContext& ctx, const Vec3& xi, double s) {
  const Vec3 c = s * xi;
  require_center(c);
  if (ctx.tensor->is_zero()) return 0.0;
  const PerturbationTensor& t = *ctx.tensor;
  return integrate_over_sphere(
      ctx,
      [&](const Vec3& x) {
        const Vec3 nu = x - c;
        const TensorJet j = t.jet(x, 1);
        const Mat3 dnu = nu[0] * j.d1[0] + nu[1] * j.d1[1] + nu[2] * j.d1[2];
        const double tr = j.value.trace();
        const double tr_s = tr - nu.dot(j.value * nu);
        const double dtr_s = dnu.trace() - nu.dot(dnu * nu);
        return 2.0 * tr - 3.0 * tr_s - dtr_s;
      },
      c);
}

double eval_F(const FunctionalContext& ctx, const Vec3& xi) {
  require_center(xi);
  return schwarzschild_part(xi.norm()) + eval_G(ctx, xi, 1.0) / (4.0 * kPi);
}

double richardson_derivative(const std::function<double(double)>& f, double x,
                             double h) {
  const double d1 = (f(x + h) - f(x - h)) / (2.0 * h);
  const double d2 = (f(x + 0.5 * h) - f(x - 0.5 * h)) / h;
  return (4.0 * d2 - d1) / 3.0;
}

double flux_residual(const FunctionalContext& ctx, const Vec3& xi, double s) {
  require_center(s * xi);
  if (ctx.tensor->is_zero()) return 0.0;
  const double g_prime = richardson_derivative(
      [&](double u) { return eval_G(ctx, xi, u); }, s, 1e-4 * s);
  return std::abs(s * g_prime - eval_G(ctx, xi, s) - eval_K(ctx, xi, s));
}

RadialDerivative radial_derivative_F(const FunctionalContext& ctx,
                                     const Vec3& xi) {
  require_center(xi);
  RadialDerivative out;
  out.finite_difference = richardson_derivative(
      [&](double s) { return eval_F(ctx, s * xi); }, 1.0, 1e-4);
  out.flux_based = phi_lower_bound(xi.norm());
  if (!ctx.tensor->is_zero()) {
    out.flux_based += (eval_G(ctx, xi, 1.0) + eval_K(ctx, xi, 1.0)) / (4.0 * kPi);
  }
  if (std::abs(out.finite_difference - out.flux_based) > 1e-4) {
    std::ostringstream os;
    os.precision(17);
    os << "radial derivative at " << point_text(xi)
       << ": finite difference " << out.finite_difference
       << " vs flux identity " << out.flux_based
       << " (quadrature under-resolved?)";
    throw Error(ErrorKind::kInconsistency, os.str());
  }
  return out;
}

const char* to_string(Classification c) {
  switch (c) {
    case Classification::kStrictMin: return "strict-min";
    case Classification::kSaddle: return "saddle";
    case Classification::kMax: return "max";
    case Classification::kDegenerate: return "degenerate";
  }
  return "unknown";
}

Vec3 fd_gradient(const Objective& f, const Vec3& x, double h) {
  Vec3 g;
  for (int k = 0; k < 3; ++k) {
    g[k] = richardson_derivative(
        [&](double u) {
          Vec3 y = x;
          y[k] = u;
          return f(y);
        },
        x[k], h);
  }
  return g;
}

Mat3 fd_hessian(const Objective& f, const Vec3& x, double h) {
  auto at = [&](int k, double a, int m, double b) {
    Vec3 y = x;
    y[k] += a;
    y[m] += b;
    return f(y);
  };
  const double f0 = f(x);
  Mat3 hess;
  for (int k = 0; k < 3; ++k) {
    auto second = [&](double s) {
      return (at(k, s, k, 0.0) - 2.0 * f0 + at(k, -s, k, 0.0)) / (s * s);
    };
    hess(k, k) = (4.0 * second(0.5 * h) - second(h)) / 3.0;
    for (int m = k + 1; m < 3; ++m) {
      auto mixed = [&](double s) {
        return (at(k, s, m, s) - at(k, s, m, -s) - at(k, -s, m, s) +
                at(k, -s, m, -s)) /
               (4.0 * s * s);
      };
      hess(k, m) = (4.0 * mixed(0.5 * h) - mixed(h)) / 3.0;
      hess(m, k) = hess(k, m);
    }
  }
  return hess;
}

Classification classify(const std::array<double, 3>& eig,
                        double degeneracy_ratio) {
  double max_abs = 0.0;
  double min_abs = std::abs(eig[0]);
  for (double e : eig) {
    max_abs = std::max(max_abs, std::abs(e));
    min_abs = std::min(min_abs, std::abs(e));
  }
  if (!(max_abs > 0.0) || min_abs < degeneracy_ratio * max_abs) {
    return Classification::kDegenerate;
  }
  const bool all_pos = std::all_of(eig.begin(), eig.end(), [](double e) { return e > 0; });
  const bool all_neg = std::all_of(eig.begin(), eig.end(), [](double e) { return e < 0; });
  if (all_pos) return Classification::kStrictMin;
  if (all_neg) return Classification::kMax;
  return Classification::kSaddle;
}

CriticalPointReport find_critical_point(const Objective& f, const Vec3& xi0,
                                        const CriticalPointOptions& opt) {
  if (!(xi0.norm() > 1.05)) {
    throw Error(ErrorKind::kInvalidArgument,
                "critical point search needs |xi0| > 1.05");
  }
  auto check_box = [&](const Vec3& x) {
    const double r = x.norm();
    if (r <= opt.min_radius * (1.0 + 1e-12) || r >= opt.max_radius) {
      throw Error(ErrorKind::kBoundary,
                  "critical point search reached the boundary of the search "
                  "region at " + point_text(x));
    }
  };
  CriticalPointReport rep;
  Vec3 x = xi0;
  double fx = f(x);
  double radius = opt.initial_trust_radius;
  Vec3 g = fd_gradient(f, x, opt.step);
  Mat3 hess = fd_hessian(f, x, opt.step);
  int it = 0;
  for (; it < opt.max_iterations; ++it) {
    if (g.norm() <= opt.gradient_tol) {
      rep.converged = true;
      break;
    }
    Eigen::SelfAdjointEigenSolver<Mat3> es(hess);
    const Vec3 lam = es.eigenvalues();
    const double scale = std::max(lam.cwiseAbs().maxCoeff(), 1e-300);
    Vec3 p = Vec3::Zero();
    for (int i = 0; i < 3; ++i) {
      const Vec3 v = es.eigenvectors().col(i);
      p -= (g.dot(v) / std::max(std::abs(lam[i]), 1e-10 * scale)) * v;
    }
    bool accepted = false;
    for (int tries = 0; tries < 30 && !accepted; ++tries) {
      Vec3 step = p;
      if (step.norm() > radius) step *= radius / step.norm();
      Vec3 trial = x + step;
      if (trial.norm() < opt.min_radius) {
        trial *= opt.min_radius / trial.norm();
        step = trial - x;
      }
      const double predicted = g.dot(step) + 0.5 * step.dot(hess * step);
      const double f_trial = f(trial);
      const double actual = f_trial - fx;
      const bool roundoff =
          std::abs(predicted) < 1e-13 * std::max(1.0, std::abs(fx));
      const double ratio = predicted < 0.0 ? actual / predicted : -1.0;
      if (roundoff || ratio > 0.1) {
        if (ratio > 0.75 && step.norm() >= 0.99 * radius) radius *= 2.0;
        x = trial;
        fx = f_trial;
        accepted = true;
      } else {
        radius = 0.25 * step.norm();
      }
    }
    if (!accepted) break;
    check_box(x);
    g = fd_gradient(f, x, opt.step);
    hess = fd_hessian(f, x, opt.step);
  }
  rep.xi = x;
  rep.value = fx;
  rep.gradient_norm = g.norm();
  rep.iterations = it;
  Eigen::SelfAdjointEigenSolver<Mat3> es(hess);
  for (int i = 0; i < 3; ++i) rep.hessian_eigenvalues[i] = es.eigenvalues()[i];
  rep.classification = rep.converged
                           ? classify(rep.hessian_eigenvalues, opt.degeneracy_ratio)
                           : Classification::kDegenerate;
  return rep;
}

CriticalPointReport find_critical_point(const FunctionalContext& ctx,
                                        const Vec3& xi0,
                                        const CriticalPointOptions& options) {
  return find_critical_point(
      [&](const Vec3& x) {
        if (!(x.norm() > 1.0 + 1e-6)) {
          throw Error(ErrorKind::kBoundary,
                      "critical point search left the domain at " + point_text(x));
        }
        return eval_F(ctx, x);
      },
      xi0, options);
}

const char* const kScanCsvHeader =
    "xi1,xi2,xi3,norm_xi,F,dF_radial,phi_lower_bound,G1,K1,flux_residual";

ScanRow scan_point(const FunctionalContext& ctx, const Vec3& xi) {
  ScanRow row;
  row.xi = xi;
  row.radius = xi.norm();
  row.f = eval_F(ctx, xi);
  row.df_radial = radial_derivative_F(ctx, xi).finite_difference;
  row.phi_lower_bound = phi_lower_bound(row.radius);
  row.g1 = eval_G(ctx, xi, 1.0);
  row.k1 = eval_K(ctx, xi, 1.0);
  row.flux_residual = flux_residual(ctx, xi, 1.0);
  return row;
}

std::vector<ScanRow> scan_F(const FunctionalContext& ctx,
                            const std::vector<Vec3>& points, int threads) {
  std::vector<ScanRow> rows(points.size());
  const int n = std::max(1, std::min<int>(threads, static_cast<int>(points.size())));
  if (n <= 1) {
    for (std::size_t i = 0; i < points.size(); ++i) rows[i] = scan_point(ctx, points[i]);
    return rows;
  }
  std::vector<std::exception_ptr> errors(static_cast<std::size_t>(n));
  std::vector<std::thread> pool;
  for (int w = 0; w < n; ++w) {
    pool.emplace_back([&, w] {
      try {
        for (std::size_t i = static_cast<std::size_t>(w); i < points.size();
             i += static_cast<std::size_t>(n)) {
          rows[i] = scan_point(ctx, points[i]);
        }
      } catch (...) {
        errors[static_cast<std::size_t>(w)] = std::current_exception();
      }
    });
  }
  for (auto& t : pool) t.join();
  for (auto& e : errors) {
    if (e) std::rethrow_exception(e);
  }
  return rows;
}

void write_scan_csv(std::ostream& out, const std::vector<ScanRow>& rows) {
  out << kScanCsvHeader << "\n";
  out << std::setprecision(17);
  for (const ScanRow& r : rows) {
    out << r.xi.x() << "," << r.xi.y() << "," << r.xi.z() << "," << r.radius
        << "," << r.f << "," << r.df_radial << "," << r.phi_lower_bound << ","
        << r.g1 << "," << r.k1 << "," << r.flux_residual << "\n";
  }
}

}  // namespace ocmc
