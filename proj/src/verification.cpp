#include "ocmc/verification.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <numbers>
#include <random>

#include "ocmc/cmc_solver.hpp"
#include "ocmc/counterexample.hpp"
#include "ocmc/errors.hpp"
#include "ocmc/reduced_functional.hpp"
#include "ocmc/special_functions.hpp"

namespace ocmc {

namespace {

constexpr double kPi = std::numbers::pi;

class Stopwatch {
 public:
  double seconds() const {
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - start_).count();
  }

 private:
  std::chrono::steady_clock::time_point start_ = std::chrono::steady_clock::now();
};

void finish(SuiteReport& report, const Stopwatch& clock) {
  report.seconds = clock.seconds();
}

double pick(const SuiteOptions& options, double fallback) {
  return options.tolerance_override > 0.0 ? options.tolerance_override : fallback;
}

std::string fixed(double v) {
  std::string s = std::to_string(v);
  s.erase(s.find_last_not_of('0') + 1);
  if (!s.empty() && s.back() == '.') s.pop_back();
  return s;
}

double log_ratio(double r) { return std::log((r + 1.0) / (r - 1.0)); }

const BumpParams& counterexample_params() {
  static const BumpParams p = with_a(make_bump_params(200, 2.0, 64.0));
  return p;
}

double max_abs_multiplier(const SolveReport& r) {
  return std::max({std::abs(r.h[0]), std::abs(r.h[1]), std::abs(r.h[2]), std::abs(r.h[3])});
}

double legendre_profile(const Vec3& y, const Vec3& xi, int lmax) {
  const double r = xi.norm();
  const double c = -y.dot(xi) / r;
  const std::vector<double> p = legendre_all(lmax, c);
  double s = 0.0;
  double power = 1.0 / r;
  for (int l = 0; l <= lmax; ++l, power /= r) {
    if (l != 1) s += power * p[static_cast<std::size_t>(l)] / (l + 2.0);
  }
  return -4.0 * s;
}

Vec3 random_direction(std::mt19937_64& rng) {
  std::normal_distribution<double> normal;
  Vec3 v;
  do {
    v = Vec3(normal(rng), normal(rng), normal(rng));
  } while (v.norm() < 1e-8);
  return v.normalized();
}

}  // namespace

bool SuiteReport::checks_passed() const {
  return !checks.empty() &&
         std::all_of(checks.begin(), checks.end(), [](const Check& c) { return c.passed; });
}

bool SuiteReport::within_time_limit() const {
  return time_limit <= 0.0 || seconds <= time_limit;
}

void SuiteReport::add(std::string name, double value, Relation relation, double bound) {
  bool ok = false;
  switch (relation) {
    case Relation::kAtMost: ok = value <= bound; break;
    case Relation::kAtLeast: ok = value >= bound; break;
    case Relation::kBelow: ok = value < bound; break;
    case Relation::kAbove: ok = value > bound; break;
  }
  checks.push_back({std::move(name), value, bound, relation, ok && std::isfinite(value)});
}

void SuiteReport::add_flag(std::string name, bool ok) {
  add(std::move(name), ok ? 1.0 : 0.0, Relation::kAtLeast, 1.0);
}

const char* to_string(Relation relation) {
  switch (relation) {
    case Relation::kAtMost: return "<=";
    case Relation::kAtLeast: return ">=";
    case Relation::kBelow: return "<";
    case Relation::kAbove: return ">";
  }
  return "?";
}

TensorPtr nonnegative_density_tensor() {
  return std::make_shared<SumTensor>(std::vector<TensorPtr>{
      std::make_shared<IsotropicTensor>(-0.5),
      std::make_shared<AxisymmetricTensor>(std::make_shared<ConstantProfile>(0.05))});
}

SuiteReport verify_identities(const SuiteOptions& options) {
  Stopwatch clock;
  SuiteReport report;
  report.suite = "identities";
  report.time_limit = 30.0;
  const double series_tol = pick(options, 1e-10);
  const double integral_tol = pick(options, 1e-8);
  const std::vector<double> radii{1.5, 2.0, 5.0};

  const std::pair<SeriesKind, const char*> kinds[] = {
      {SeriesKind::kA, "A"}, {SeriesKind::kB, "B"}, {SeriesKind::kC, "C"}};
  for (const auto& [kind, label] : kinds) {
    for (double r : radii) {
      const double closed = series_closed_form(kind, r);
      const double summed = series_truncated(kind, r, default_series_terms(r));
      report.add(std::string("series_") + label + "_r" + fixed(r), std::abs(closed - summed),
                 Relation::kAtMost, series_tol);
    }
  }

  const QuadratureGrid base = build_sphere_grid(kDefaultPolarNodes);
  const RadialRule radial = build_radial_rule(kDefaultRadialNodes);
  const ScalarField inv_sq = [](const Vec3& x) { return 1.0 / x.squaredNorm(); };
  std::mt19937_64 rng(options.seed);
  for (double r : radii) {
    const Vec3 xi = r * random_direction(rng);
    const QuadratureGrid grid = grid_for_center(base, xi);
    const double sphere_closed = 2.0 * kPi / r * log_ratio(r);
    const double ball_closed =
        2.0 * kPi * (1.0 - (r * r - 1.0) / (2.0 * r) * log_ratio(r));
    const double sphere = integrate_sphere(inv_sq, xi, grid);
    const double ball = integrate_ball(inv_sq, xi, grid, radial, OriginSingular::kYes);
    report.add("sphere_inverse_square_r" + fixed(r),
               std::abs(sphere / sphere_closed - 1.0), Relation::kAtMost, integral_tol);
    report.add("ball_inverse_square_r" + fixed(r), std::abs(ball / ball_closed - 1.0),
               Relation::kAtMost, integral_tol);
  }

  // Residual after degree L is bounded by C (L + 2) |xi|^(-L-1); the check
  // is that the envelope constant stays bounded as L grows.
  for (double r : radii) {
    const Vec3 xi = r * random_direction(rng);
    double worst = 0.0;
    for (int sample = 0; sample < 8; ++sample) {
      const Vec3 y = random_direction(rng);
      for (int L = 4; L <= 40; L += 4) {
        const GeneratingResidual res = generating_residual(xi, y, L);
        const double envelope = (L + 2.0) * std::pow(r, -L - 1.0);
        const double tail = std::max(res.inverse_distance, res.radial_derivative / (L + 2.0));
        if (std::pow(r, -L - 1.0) > 1e-13) worst = std::max(worst, tail / envelope);
      }
    }
    report.add("generating_decay_constant_r" + fixed(r), worst, Relation::kAtMost, 10.0);
  }
  finish(report, clock);
  return report;
}

SuiteReport verify_positivity(const SuiteOptions&) {
  Stopwatch clock;
  SuiteReport report;
  report.suite = "positivity";
  report.time_limit = 5.0;
  const int n = 400;
  double min_phi = std::numeric_limits<double>::infinity();
  for (int i = 0; i < n; ++i) {
    const double r = 1.01 * std::pow(100.0 / 1.01, static_cast<double>(i) / (n - 1));
    min_phi = std::min(min_phi, phi_lower_bound(r));
  }
  report.add("phi_min_1.01_to_100", min_phi, Relation::kAbove, 0.0);
  double sup = 0.0;
  double inf = std::numeric_limits<double>::infinity();
  for (int i = 0; i < n; ++i) {
    const double r = 10.0 * std::pow(16.0, static_cast<double>(i) / (n - 1));
    const double v = phi_lower_bound(r) * std::pow(r, 4);
    sup = std::max(sup, v);
    inf = std::min(inf, v);
  }
  // phi ~ c r^-6, so r^4 phi is at most its value at the left end.
  report.add("r4_phi_sup_10_to_160", sup, Relation::kAtMost,
             phi_lower_bound(10.0) * 1e4 * (1.0 + 1e-12));
  report.add("r4_phi_inf_10_to_160", inf, Relation::kAbove, 0.0);
  finish(report, clock);
  return report;
}

SuiteReport verify_flux(const SuiteOptions&) {
  Stopwatch clock;
  SuiteReport report;
  report.suite = "flux";
  report.time_limit = 60.0;
  const FunctionalContext ctx = make_context(make_counterexample_tensor(counterexample_params()));
  const std::pair<Vec3, const char*> directions[] = {
      {Vec3(0, 0, 2), "axis"}, {Vec3(std::sqrt(2.0), 0, std::sqrt(2.0)), "tilted"}};
  for (const auto& [xi, label] : directions) {
    for (double s : {1.0, 1.5, 2.0, 3.0, 5.0}) {
      const std::string tag = std::string(label) + "_s" + fixed(s);
      report.add("flux_residual_" + tag, flux_residual(ctx, xi, s), Relation::kAtMost, 1e-6);
      const double k_ball = eval_K(ctx, xi, s);
      const double k_surface = eval_K_surface(ctx, xi, s);
      report.add("K_routes_relative_" + tag,
                 std::abs(k_ball - k_surface) / std::max(std::abs(k_ball), 1e-300),
                 Relation::kAtMost, 1e-7);
    }
  }
  finish(report, clock);
  return report;
}

SuiteReport verify_certification(const SuiteOptions& options) {
  Stopwatch clock;
  SuiteReport report;
  report.suite = "certification";
  report.time_limit = 300.0;
  const MetricConstruction m = build_metric(make_bump_params(200, 2.0));
  const MinimumCertificate& c = m.certificate;
  report.add_flag("certificate_valid", c.valid);
  report.add("Q_gradient_norm", c.gradient_norm, Relation::kAtMost, 1e-5);
  report.add("Q_hessian_min_eigenvalue",
             *std::min_element(c.hessian_eigenvalues.begin(), c.hessian_eigenvalues.end()),
             Relation::kAbove, 0.0);
  report.add("Q_transverse_pair_relative_gap", c.axis_eigenvalue_pair_gap, Relation::kAtMost,
             1e-6);
  report.add_flag("F_strict_minimum", m.f_minimum.classification == Classification::kStrictMin);
  report.add("F_minimum_radius", m.f_minimum.xi.norm(), Relation::kAbove, 1.0);
  report.add("amplitude", m.params.amplitude, Relation::kAtLeast, 64.0);

  std::mt19937_64 rng(options.seed);
  std::uniform_real_distribution<double> log_radius(std::log(1.0), std::log(50.0));
  double worst_trace = 0.0;
  for (int i = 0; i < 100; ++i) {
    const Vec3 x = std::exp(log_radius(rng)) * random_direction(rng);
    const double scale = m.tensor->value(x).norm() + 1e-300;
    worst_trace = std::max(worst_trace, std::abs(trace_ambient(*m.tensor, x)) / scale);
  }
  report.add("relative_trace_max", worst_trace, Relation::kAtMost, 1e-12);
  double min_density = std::numeric_limits<double>::infinity();
  for (int i = 0; i < 10000; ++i) {
    const Vec3 x = std::exp(log_radius(rng)) * random_direction(rng);
    min_density = std::min(min_density, scalar_density(*m.tensor, x));
  }
  report.add("scalar_density_min", min_density, Relation::kBelow, 0.0);
  finish(report, clock);
  return report;
}

SuiteReport verify_cmc_scaling(const SuiteOptions&) {
  Stopwatch clock;
  SuiteReport report;
  report.suite = "cmc-scaling";
  report.time_limit = 1800.0;
  const MetricSpec m = schwarzschild_metric();
  const Vec3 xi(0, 0, 2);
  const int degree = 8;
  const double limit = schwarzschild_part(2.0);

  double worst_volume = 0.0;
  auto solve = [&](double lambda) {
    CmcSolution s = lyapunov_schmidt_solve(m, xi, lambda, degree);
    worst_volume = std::max(worst_volume, std::abs(s.report.volume_error));
    return s;
  };

  double previous = std::numeric_limits<double>::infinity();
  bool monotone = true;
  for (double lambda : {1e2, 3e2, 1e3, 3e3}) {
    const double gap = std::abs(solve(lambda).report.f_lambda - limit);
    report.add("F_lambda_gap_lambda" + fixed(lambda), gap, Relation::kBelow, previous);
    monotone = monotone && gap < previous;
    previous = gap;
  }
  report.add_flag("F_lambda_gap_monotone", monotone);

  const CmcSolution a = solve(1e3);
  const CmcSolution b = solve(2e3);
  report.add("multiplier_ratio_1000_to_2000",
             max_abs_multiplier(a.report) / max_abs_multiplier(b.report), Relation::kAtLeast, 6.0);

  const QuadratureGrid grid = build_sphere_grid(40);
  auto sup_error = [&](const SphericalGraph& g, int lmax) {
    double worst = 0.0;
    for (const Vec3& y : grid.directions()) {
      worst = std::max(worst, std::abs(g.scaled_height(y) - legendre_profile(y, xi, lmax)));
    }
    return worst;
  };
  report.add("profile_sup_error_lambda1000", sup_error(a.graph, 60), Relation::kAtMost, 5e-2);
  // The l > L tail of the closed form is independent of lambda; the decay
  // rate is measured against the profile truncated at the solver degree.
  const double ea = sup_error(a.graph, degree);
  const double eb = sup_error(b.graph, degree);
  report.add("profile_error_ratio_2000_over_1000", eb / ea, Relation::kAtMost, 0.55);
  report.add("volume_relative_error_max", worst_volume, Relation::kAtMost, 1e-10);
  finish(report, clock);
  return report;
}

SuiteReport verify_outlying_sphere(const SuiteOptions&) {
  Stopwatch clock;
  SuiteReport report;
  report.suite = "outlying-sphere";
  report.time_limit = 3600.0;
  const MetricConstruction built = build_metric(make_bump_params(200, 2.0));
  const double lambda = 1e3;
  const Vec3 start = built.params.s0 * Vec3::UnitZ();
  const CmcFindResult found = find_cmc(built.metric, start, lambda, 8);
  const SolveReport& at = found.solution.report;
  const CriticalPointReport& cp = found.critical;
  report.add_flag("search_converged", cp.converged);
  report.add_flag("strict_minimum", cp.classification == Classification::kStrictMin);
  report.add("minimizer_radius", at.xi.norm(), Relation::kAbove, 1.0);
  report.add("reduced_hessian_min_eigenvalue",
             *std::min_element(cp.hessian_eigenvalues.begin(), cp.hessian_eigenvalues.end()),
             Relation::kAbove, 0.0);
  const double h_start = found.start.report.first_harmonic_norm();
  const double h_end = at.first_harmonic_norm();
  report.add("first_harmonic_reduction", h_start / h_end, Relation::kAtLeast, 10.0);
  report.add("first_harmonic_norm_at_minimizer", h_end, Relation::kAtMost,
             found.multiplier_bound);
  report.add("volume_relative_error", std::abs(at.volume_error), Relation::kAtMost, 1e-10);
  report.add("outlying_a_relative_to_radius_minus_one",
             std::abs(at.outlying_a / (at.xi.norm() - 1.0) - 1.0), Relation::kAtMost, 0.05);
  finish(report, clock);
  return report;
}

SuiteReport verify_no_critical_point(const SuiteOptions& options) {
  Stopwatch clock;
  SuiteReport report;
  report.suite = "no-critical-point";
  report.time_limit = 600.0;
  const std::pair<TensorPtr, const char*> tensors[] = {
      {std::make_shared<ZeroTensor>(), "zero"},
      {nonnegative_density_tensor(), "nonnegative"}};
  for (const auto& [tensor, label] : tensors) {
    const FunctionalContext ctx = make_context(tensor);
    std::mt19937_64 rng(options.seed);
    std::uniform_real_distribution<double> log_radius(std::log(1.2), std::log(10.0));
    double min_density = std::numeric_limits<double>::infinity();
    double worst_margin = std::numeric_limits<double>::infinity();
    for (int i = 0; i < 20; ++i) {
      const Vec3 xi = std::exp(log_radius(rng)) * random_direction(rng);
      if (!tensor->is_zero()) {
        const QuadratureGrid grid = grid_for_center(ctx.sphere_grid, xi);
        for (std::size_t k = 0; k < grid.size(); ++k) {
          for (double t : ctx.radial.nodes) {
            min_density = std::min(min_density,
                                   scalar_density(*tensor, xi + t * grid.directions()[k]));
          }
        }
      }
      const RadialDerivative d = radial_derivative_F(ctx, xi);
      worst_margin = std::min(worst_margin, d.finite_difference - phi_lower_bound(xi.norm()));
    }
    if (!tensor->is_zero()) {
      report.add(std::string("density_min_at_nodes_") + label, min_density, Relation::kAtLeast,
                 0.0);
    }
    report.add(std::string("radial_derivative_minus_phi_min_") + label, worst_margin,
               Relation::kAtLeast, -1e-5);
    for (const Vec3& start : {Vec3(0, 0, 2), Vec3(1.5, -1.0, 0.5), Vec3(3, 3, 3)}) {
      bool interior = false;
      try {
        const CriticalPointReport rep = find_critical_point(ctx, start);
        interior = rep.converged;
      } catch (const Error& e) {
        if (e.kind() != ErrorKind::kBoundary) throw;
      }
      report.add_flag(std::string("no_interior_critical_point_") + label + "_from_" +
                          fixed(start.x()) + "_" + fixed(start.y()) + "_" + fixed(start.z()),
                      !interior);
    }
  }
  finish(report, clock);
  return report;
}

nlohmann::json suite_json(const SuiteReport& report, bool timing) {
  nlohmann::json checks = nlohmann::json::array();
  for (const Check& c : report.checks) {
    checks.push_back({{"name", c.name},
                      {"value", c.value},
                      {"bound", c.bound},
                      {"relation", to_string(c.relation)},
                      {"passed", c.passed}});
  }
  nlohmann::json j = {{"suite", report.suite},
                      {"passed", report.checks_passed()},
                      {"checks", checks}};
  if (timing) {
    j["seconds"] = report.seconds;
    j["time_limit"] = report.time_limit;
  }
  return j;
}

}  // namespace ocmc
