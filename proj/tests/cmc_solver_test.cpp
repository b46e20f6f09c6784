#include "ocmc/cmc_solver.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <numbers>
#include <random>

#include <gtest/gtest.h>

#include "ocmc/errors.hpp"
#include "ocmc/reduced_functional.hpp"
#include "ocmc/special_functions.hpp"
#include "ocmc/spherical_harmonics.hpp"
#include "ocmc/counterexample.hpp"

namespace ocmc {
namespace {

constexpr double kPi = std::numbers::pi;

ErrorKind kind_of(const std::function<void()>& f) {
  try {
    f();
  } catch (const Error& e) {
    return e.kind();
  }
  ADD_FAILURE() << "no error raised";
  return ErrorKind::kIo;
}

// Cached Schwarzschild solves at xi = (0, 0, 2), L = 8.
const CmcSolution& schwarzschild_solve(double lambda) {
  static std::map<double, CmcSolution> cache;
  auto it = cache.find(lambda);
  if (it == cache.end()) {
    it = cache.emplace(lambda, lyapunov_schmidt_solve(schwarzschild_metric(),
                                                      Vec3(0, 0, 2), lambda, 8))
             .first;
  }
  return it->second;
}

double legendre_profile(const Vec3& y, const Vec3& xi, int lmax) {
  const double r = xi.norm();
  const double c = -y.dot(xi) / r;
  double s = 0.0;
  for (int l = 0; l <= lmax; ++l) {
    if (l == 1) continue;
    s += std::pow(r, -l - 1) * legendre(l, c) / (l + 2.0);
  }
  return -4.0 * s;
}

TEST(MetricEval, HorizonAndInfinity) {
  const MetricSpec m = schwarzschild_metric();
  const MetricSample at_one = metric_eval(m, Vec3(0.6, 0.0, 0.8));
  EXPECT_LT((at_one.g - 16.0 * Mat3::Identity()).norm(), 1e-13);
  const MetricSample far = metric_eval(m, Vec3(0.0, 1e4, 0.0));
  const Eigen::SelfAdjointEigenSolver<Mat3> deviation(far.g - Mat3::Identity());
  EXPECT_LE(deviation.eigenvalues().cwiseAbs().maxCoeff(), 5e-4);
  EXPECT_THROW(metric_eval(m, Vec3(0.5, 0.0, 0.0)), Error);
}

TEST(MetricEval, DerivativesMatchFiniteDifferences) {
  // Unit amplitude keeps g positive definite down to |x| = 2.
  BumpParams p = with_a(make_bump_params(200, 2.0, 1.0));
  const std::vector<MetricSpec> metrics{
      schwarzschild_metric(),
      perturbed_metric(std::make_shared<IsotropicTensor>(0.7)),
      perturbed_metric(make_counterexample_tensor(p))};
  std::mt19937_64 rng(11);
  std::normal_distribution<double> gauss;
  std::uniform_real_distribution<double> radius(std::log(2.0), std::log(100.0));
  for (const MetricSpec& m : metrics) {
    for (int trial = 0; trial < 40; ++trial) {
      const Vec3 x = std::exp(radius(rng)) *
                     Vec3(gauss(rng), gauss(rng), gauss(rng)).normalized();
      const MetricSample s = metric_eval(m, x);
      EXPECT_TRUE(s.g.isApprox(s.g.transpose(), 1e-15));
      const double h = 1e-5 * x.norm();
      for (int k = 0; k < 3; ++k) {
        Vec3 e = Vec3::Zero();
        e[k] = h;
        const Mat3 fd = (metric_eval(m, x + e).g - metric_eval(m, x - e).g) / (2.0 * h);
        const double scale = std::max(s.dg[k].norm(), 1e-3 * s.g.norm() / x.norm());
        EXPECT_LE((fd - s.dg[k]).norm(), 1e-7 * scale)
            << m.tensor->describe() << " at " << x.transpose() << " k=" << k;
      }
    }
  }
}

TEST(MetricEval, NonPositiveDefiniteIsRejected) {
  const MetricSpec m = perturbed_metric(std::make_shared<IsotropicTensor>(-100.0));
  EXPECT_EQ(kind_of([&] { metric_eval(m, Vec3(0, 0, 2)); }), ErrorKind::kMetricDegenerate);
}

TEST(GraphModes, FirstHarmonicsAbsent) {
  const auto modes = graph_modes(8);
  EXPECT_EQ(modes.size(), 78u);
  for (int b : modes) EXPECT_NE(RealHarmonics::degree_of(b), 1);
  EXPECT_EQ(graph_modes(4).size(), 22u);
}

TEST(GraphGeometry, RoundSphereInFlatSpace) {
  const double lambda = 500.0;
  const auto g = graph_geometry(flat_metric(),
                                SphericalGraph::round(Vec3(0.3, -1.2, 0.5), lambda, 8));
  EXPECT_NEAR(g.area / (4.0 * kPi * lambda * lambda), 1.0, 1e-13);
  EXPECT_NEAR(g.volume / (4.0 * kPi * lambda * lambda * lambda / 3.0), 1.0, 1e-13);
  for (double H : g.mean_curvature) EXPECT_NEAR(H * lambda, 2.0, 1e-11);
}

TEST(GraphGeometry, SchwarzschildCoordinateSphereExpansions) {
  const double lambda = 1e3;
  const double r = 2.0;
  const double log_ratio = std::log((r + 1.0) / (r - 1.0));
  const auto g =
      graph_geometry(schwarzschild_metric(), SphericalGraph::round(Vec3(0, 0, r), lambda, 8));
  const double area = 4.0 * kPi * lambda * lambda + 16.0 * kPi * lambda / r +
                      12.0 * kPi / r * log_ratio;
  const double volume =
      4.0 * kPi / 3.0 * lambda * lambda * lambda * (1.0 + 6.0 / (lambda * r)) +
      30.0 * kPi * lambda * (1.0 - (r * r - 1.0) / (2.0 * r) * log_ratio);
  EXPECT_LE(std::abs(g.area / area - 1.0), 1e-5);
  EXPECT_LE(std::abs(g.volume / volume - 1.0), 1e-6);
  EXPECT_NEAR(g.rho_sigma, lambda * (r - 1.0), 1e-9 * lambda);
}

TEST(GraphGeometry, MeanCurvatureExpansionHasCubicRemainder) {
  const Vec3 xi(0, 0, 2);
  std::vector<double> sup;
  for (double lambda : {1e3, 2e3}) {
    const auto g =
        graph_geometry(schwarzschild_metric(), SphericalGraph::round(xi, lambda, 8));
    double worst = 0.0;
    for (std::size_t i = 0; i < g.rule.directions.size(); ++i) {
      const Vec3& y = g.rule.directions[i];
      const double c = -y.dot(xi) / xi.norm();
      double s = 0.0;
      for (int l = 0; l <= 60; ++l) s += (l - 1.0) * std::pow(xi.norm(), -l - 1) * legendre(l, c);
      worst = std::max(worst, std::abs(g.mean_curvature[i] - 2.0 / lambda -
                                       4.0 / (lambda * lambda) * s));
    }
    sup.push_back(worst);
  }
  EXPECT_GE(sup[0] / sup[1], 6.0);
}

TEST(GraphGeometry, LeavingGraphRegimeIsRejected) {
  SphericalGraph graph = SphericalGraph::round(Vec3(0, 0, 2), 1e3, 8);
  graph.coefficients[0] = 1.0;
  EXPECT_EQ(kind_of([&] { graph_geometry(schwarzschild_metric(), graph); }),
            ErrorKind::kGeometry);
}

TEST(Solve, FlatModeIsRoundAtFirstIterate) {
  const auto sol = lyapunov_schmidt_solve(flat_metric(), Vec3(0.3, 0.2, 1.5), 1e3, 8);
  EXPECT_EQ(sol.report.newton_iterations, 0);
  EXPECT_EQ(sol.graph.coefficients.cwiseAbs().maxCoeff(), 0.0);
  for (double h : sol.report.h) EXPECT_LE(std::abs(h), 1e-15);
  EXPECT_NEAR(sol.report.f_lambda, 0.0, 1e-6);
}

TEST(Solve, SchwarzschildMeanHeight) {
  const auto& sol = schwarzschild_solve(1e3);
  EXPECT_NEAR(sol.graph.scaled_mean(), -1.0, 2e-2);
  EXPECT_LE(sol.report.residual_norm, CmcOptions{}.tolerance);
  EXPECT_LE(std::abs(sol.report.volume_error), 1e-10);
  EXPECT_NEAR(sol.report.volume / (4.0 * kPi * 1e9 / 3.0), 1.0, 1e-10);
  EXPECT_GT(sol.report.rho_sigma, 0.0);
  EXPECT_DOUBLE_EQ(sol.report.outlying_a,
                   sol.report.mean_H * sol.report.rho_sigma / 2.0);
  EXPECT_LT(sol.report.jacobian_condition, 1e12);
}

// The height basis stops at l = 8, so the oracle is the same truncation;
// the neglected tail is about 7e-4 and would otherwise mask the O(1/lambda)
// decay.
TEST(Solve, SchwarzschildHeightProfile) {
  const Vec3 xi(0, 0, 2);
  const QuadratureGrid grid = build_sphere_grid(40);
  std::vector<double> err;
  for (double lambda : {1e3, 2e3}) {
    const auto& sol = schwarzschild_solve(lambda);
    double worst = 0.0;
    for (const Vec3& y : grid.directions()) {
      worst = std::max(worst, std::abs(sol.graph.scaled_height(y) - legendre_profile(y, xi, 8)));
    }
    err.push_back(worst);
    EXPECT_LE(std::abs(sol.report.volume_error), 1e-10);
  }
  EXPECT_LE(err[0], 5e-2);
  EXPECT_LE(err[1] / err[0], 0.55);
}

TEST(Solve, MultipliersScaleCubically) {
  const auto& a = schwarzschild_solve(1e3);
  const auto& b = schwarzschild_solve(2e3);
  auto max_h = [](const SolveReport& r) {
    return std::max({std::abs(r.h[0]), std::abs(r.h[1]), std::abs(r.h[2]), std::abs(r.h[3])});
  };
  EXPECT_GE(max_h(a.report) / max_h(b.report), 6.0);
  EXPECT_LE(std::abs(a.report.h[1]) + std::abs(a.report.h[2]), 1e-14);
}

TEST(Solve, FirstVariationOfArea) {
  const MetricSpec m = schwarzschild_metric();
  const double lambda = 1e3;
  const double d = 1.0;
  const auto plus = lyapunov_schmidt_solve(m, Vec3(0, 0, 2), lambda + d, 8).report;
  const auto minus = lyapunov_schmidt_solve(m, Vec3(0, 0, 2), lambda - d, 8).report;
  const auto& mid = schwarzschild_solve(lambda).report;
  const double dA = (plus.area - minus.area) / (2.0 * d);
  const double HdV = mid.mean_H * 4.0 * kPi * lambda * lambda;
  EXPECT_LE(std::abs(dA / HdV - 1.0), 1e-2);
}

TEST(Solve, FLambdaApproachesF) {
  const MetricSpec m = schwarzschild_metric();
  const std::vector<Vec3> sample{Vec3(0, 0, 2), Vec3(0, 0, 1.5), Vec3(1, 1, 1),
                                 Vec3(0, 3, 0), Vec3(4, 0, 3)};
  double prev = std::numeric_limits<double>::infinity();
  for (double lambda : {1e2, 3e2, 1e3, 3e3}) {
    double sup = 0.0;
    for (const Vec3& xi : sample) {
      sup = std::max(sup, std::abs(f_lambda(m, xi, lambda, 8) - schwarzschild_part(xi.norm())));
    }
    EXPECT_LT(sup, prev) << lambda;
    prev = sup;
  }
}

TEST(Solve, ReducedFunctionalDerivativesStayBounded) {
  const MetricSpec m = schwarzschild_metric();
  const Vec3 xi(0, 0, 2);
  std::vector<std::array<double, 3>> rows;
  for (double lambda : {1e2, 1e3, 1e4}) {
    const double h = lambda > 5e3 ? 1e-2 : 1e-3;
    auto f = [&](const Vec3& x) { return 2.0 * kPi * f_lambda(m, x, lambda, 8); };
    const double f0 = f(xi);
    const double fp = f(xi + h * Vec3::UnitZ());
    const double fm = f(xi - h * Vec3::UnitZ());
    const double fx = f(xi + h * Vec3::UnitX());
    const double dz = (fp - fm) / (2.0 * h);
    const double dzz = (fp - 2.0 * f0 + fm) / (h * h);
    const double dxx = 2.0 * (fx - f0) / (h * h);
    rows.push_back({dz, dzz, dxx});
  }
  for (int k = 0; k < 3; ++k) {
    double lo = rows[0][k];
    double hi = rows[0][k];
    for (const auto& r : rows) {
      lo = std::min(lo, r[k]);
      hi = std::max(hi, r[k]);
    }
    EXPECT_LE(std::max(std::abs(lo), std::abs(hi)), 1.0) << k;
    EXPECT_LE(hi - lo, 0.5 * std::max(std::abs(lo), std::abs(hi)) + 0.1) << k;
  }
}

TEST(Solve, PreconditionsAreChecked) {
  const MetricSpec m = schwarzschild_metric();
  EXPECT_EQ(kind_of([&] { lyapunov_schmidt_solve(m, Vec3(0, 0, 1.04), 1e3, 8); }),
            ErrorKind::kInvalidArgument);
  EXPECT_EQ(kind_of([&] { lyapunov_schmidt_solve(m, Vec3(0, 0, 2), 50.0, 8); }),
            ErrorKind::kInvalidArgument);
  EXPECT_EQ(kind_of([&] { lyapunov_schmidt_solve(m, Vec3(0, 0, 2), 1e3, 3); }),
            ErrorKind::kInvalidArgument);
}

TEST(Solve, IterationBudgetExhaustionIsSolverFailure) {
  CmcOptions options;
  options.max_iterations = 1;
  try {
    lyapunov_schmidt_solve(schwarzschild_metric(), Vec3(0, 0, 2), 1e3, 8, options);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.kind(), ErrorKind::kSolverFailure);
    EXPECT_NE(std::string(e.what()).find("residual"), std::string::npos);
  }
}

TEST(Solve, ConditionLimitIsEnforced) {
  CmcOptions options;
  options.max_condition = 1.0;
  EXPECT_EQ(kind_of([&] {
              lyapunov_schmidt_solve(schwarzschild_metric(), Vec3(0, 0, 2), 1e3, 8, options);
            }),
            ErrorKind::kIllConditioned);
}

TEST(Solve, ManyMatchesSequential) {
  const MetricSpec m = schwarzschild_metric();
  const std::vector<Vec3> centers{Vec3(0, 0, 2), Vec3(0, 3, 0), Vec3(1, 1, 1)};
  const auto reports = solve_many(m, centers, 300.0, 6, {}, 3);
  ASSERT_EQ(reports.size(), centers.size());
  for (std::size_t i = 0; i < centers.size(); ++i) {
    const auto ref = lyapunov_schmidt_solve(m, centers[i], 300.0, 6).report;
    EXPECT_EQ(reports[i].f_lambda, ref.f_lambda);
    EXPECT_EQ(reports[i].xi, centers[i]);
  }
}

TEST(Report, JsonLayout) {
  const auto j = solve_report_json(schwarzschild_solve(1e3).report);
  std::vector<std::string> keys;
  for (const auto& item : j.items()) keys.push_back(item.key());
  EXPECT_EQ(keys, (std::vector<std::string>{"area", "degree", "f_lambda", "h", "iterations",
                                            "lambda", "mean_H", "outlying_a", "residual",
                                            "rho_sigma", "volume", "xi"}));
  EXPECT_EQ(j["h"].size(), 4u);
  EXPECT_EQ(j["xi"][2].get<double>(), 2.0);
}

}  // namespace
}  // namespace ocmc
