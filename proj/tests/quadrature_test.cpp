#include "ocmc/quadrature.hpp"

#include <cmath>
#include <numbers>
#include <random>

#include <boost/math/quadrature/gauss_kronrod.hpp>
#include <boost/math/tools/minima.hpp>
#include <boost/math/tools/toms748_solve.hpp>
#include <gtest/gtest.h>

#include "ocmc/errors.hpp"
#include "ocmc/special_functions.hpp"

namespace ocmc {
namespace {

constexpr double kPi = std::numbers::pi;

double inv_sq(const Vec3& x) { return 1.0 / x.squaredNorm(); }

double sphere_inv_sq_closed(double r) {
  return 2.0 * kPi / r * std::log((r + 1.0) / (r - 1.0));
}

double ball_inv_sq_closed(double r) {
  return 2.0 * kPi *
         (1.0 - (r * r - 1.0) / (2.0 * r) * std::log((r + 1.0) / (r - 1.0)));
}

// Adaptive 1-D oracle: on-axis center at height r, integrate over z = cos.
double sphere_inv_sq_adaptive(double r) {
  auto g = [r](double z) { return 2.0 * kPi / (r * r + 1.0 + 2.0 * r * z); };
  return boost::math::quadrature::gauss_kronrod<double, 61>::integrate(
      g, -1.0, 1.0, 15, 1e-14);
}

double ball_inv_sq_adaptive(double r) {
  using boost::math::quadrature::gauss_kronrod;
  auto shell = [r](double rho) {
    auto g = [r, rho](double z) {
      return 2.0 * kPi * rho * rho / (r * r + rho * rho + 2.0 * r * rho * z);
    };
    return gauss_kronrod<double, 61>::integrate(g, -1.0, 1.0, 15, 1e-14);
  };
  return gauss_kronrod<double, 61>::integrate(shell, 0.0, 1.0, 15, 1e-14);
}

TEST(GaussLegendre, IntegratesPolynomialsExactly) {
  for (int n : {1, 2, 5, 16, 33}) {
    const auto nodes = gauss_legendre(n, 0.0, 1.0);
    for (int p = 0; p <= 2 * n - 1; ++p) {
      double sum = 0.0;
      for (const auto& node : nodes) sum += node.w * std::pow(node.x, p);
      EXPECT_NEAR(sum, 1.0 / (p + 1.0), 1e-13 / (p + 1.0)) << n << " " << p;
    }
  }
}

TEST(SphereGrid, RejectsTooFewNodes) {
  EXPECT_THROW(build_sphere_grid(1), Error);
  try {
    build_sphere_grid(1);
  } catch (const Error& e) {
    EXPECT_EQ(e.kind(), ErrorKind::kInvalidArgument);
  }
}

TEST(SphereGrid, WeightsPositiveAndSumToArea) {
  for (int n : {2, 8, 16, 32, 64}) {
    const auto grid = build_sphere_grid(n);
    EXPECT_EQ(grid.azimuthal_count(), 2 * n);
    EXPECT_EQ(grid.exactness_degree(), 2 * n - 1);
    double sum = 0.0;
    for (double w : grid.weights()) {
      EXPECT_GT(w, 0.0);
      sum += w;
    }
    EXPECT_NEAR(sum / (4.0 * kPi), 1.0, 1e-13);
  }
}

TEST(SphereGrid, ConstantAndOddIntegrands) {
  const auto grid = build_sphere_grid(16);
  const Vec3 xi(0.3, -1.2, 2.5);
  EXPECT_NEAR(integrate_sphere([](const Vec3&) { return 1.0; }, xi, grid),
              4.0 * kPi, 1e-13);
  EXPECT_NEAR(integrate_sphere([](const Vec3& x) { return x.z(); },
                               Vec3::Zero(), grid),
              0.0, 1e-14);
  EXPECT_NEAR(integrate_sphere([&](const Vec3& x) { return x.z() - xi.z(); },
                               xi, grid),
              0.0, 1e-13);
}

TEST(SphereGrid, LegendreOrthogonality) {
  const auto grid = build_sphere_grid(16);
  for (int l = 0; l <= 15; ++l) {
    for (int m = 0; m <= 15; ++m) {
      if (l == m) continue;
      const double v = integrate_sphere(
          [&](const Vec3& y) { return legendre(l, y.z()) * legendre(m, y.z()); },
          Vec3::Zero(), grid);
      EXPECT_NEAR(v, 0.0, 1e-12) << l << " " << m;
    }
  }
}

TEST(SphereGrid, LegendreNormInArbitraryDirection) {
  std::mt19937_64 rng(7);
  std::normal_distribution<double> normal;
  for (int n : {4, 9, 16}) {
    const auto grid = build_sphere_grid(n);
    for (int trial = 0; trial < 5; ++trial) {
      const Vec3 e = Vec3(normal(rng), normal(rng), normal(rng)).normalized();
      for (int l = 0; l <= grid.exactness_degree() / 2; ++l) {
        const double v = integrate_sphere(
            [&](const Vec3& y) {
              const double p = legendre(l, std::clamp(y.dot(e), -1.0, 1.0));
              return p * p;
            },
            Vec3::Zero(), grid);
        const double expected = 4.0 * kPi / (2.0 * l + 1.0);
        EXPECT_NEAR(v / expected, 1.0, 1e-11) << n << " " << l;
      }
    }
  }
}

TEST(SphereGrid, InverseSquareMatchesClosedForm) {
  const auto grid = build_sphere_grid(kDefaultPolarNodes);
  EXPECT_NEAR(sphere_inv_sq_closed(2.0), kPi * std::log(3.0), 1e-14);
  EXPECT_NEAR(integrate_sphere(inv_sq, Vec3(0, 0, 2), grid),
              kPi * std::log(3.0), 1e-10);
  for (double r : {1.5, 2.0, 5.0}) {
    const double oracle = sphere_inv_sq_adaptive(r);
    EXPECT_NEAR(sphere_inv_sq_closed(r), oracle, 1e-13);
    const Vec3 xi = r * Vec3(1, 2, -2).normalized();
    EXPECT_NEAR(integrate_sphere(inv_sq, xi, grid), oracle, 1e-10 * oracle);
  }
}

TEST(BallGrid, InverseSquareMatchesClosedForm) {
  const auto grid = build_sphere_grid(kDefaultPolarNodes);
  const auto radial = build_radial_rule(kDefaultRadialNodes);
  for (double r : {1.5, 2.0, 5.0}) {
    const double oracle = ball_inv_sq_adaptive(r);
    EXPECT_NEAR(ball_inv_sq_closed(r), oracle, 1e-12);
    const Vec3 xi = r * Vec3(-1, 0.5, 0.2).normalized();
    EXPECT_NEAR(integrate_ball(inv_sq, xi, grid, radial, OriginSingular::kYes),
                oracle, 1e-9 * oracle);
  }
  EXPECT_NEAR(integrate_ball(inv_sq, Vec3(0, 0, 2), grid, radial),
              2.0 * kPi * (1.0 - 0.75 * std::log(3.0)), 1e-8);
}

TEST(BallGrid, TrivialIntegrands) {
  const auto grid = build_sphere_grid(16);
  const auto radial = build_radial_rule(8);
  const Vec3 xi(3.0, -1.0, 0.5);
  EXPECT_NEAR(integrate_ball([](const Vec3&) { return 1.0; }, xi, grid, radial),
              4.0 * kPi / 3.0, 1e-13);
  EXPECT_NEAR(integrate_ball([&](const Vec3& x) { return x.x() - xi.x(); }, xi,
                             grid, radial),
              0.0, 1e-13);
}

TEST(BallGrid, OriginSingularNeedsOutsideCenter) {
  const auto grid = build_sphere_grid(8);
  const auto radial = build_radial_rule(8);
  try {
    integrate_ball(inv_sq, Vec3(0, 0, 0.9), grid, radial, OriginSingular::kYes);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.kind(), ErrorKind::kDomain);
  }
}

TEST(RadialRule, ExactForPolynomials) {
  for (int n : {1, 4, 12, 48}) {
    const auto rule = build_radial_rule(n);
    for (int p = 0; p <= 2 * n - 1; ++p) {
      double sum = 0.0;
      for (int i = 0; i < n; ++i) sum += rule.weights[i] * std::pow(rule.nodes[i], p);
      EXPECT_NEAR(sum * (p + 1.0), 1.0, 1e-13);
    }
  }
}

TEST(Integrate, NonFiniteRaisesEvaluationError) {
  const auto grid = build_sphere_grid(4);
  try {
    integrate_sphere([](const Vec3&) { return std::nan(""); }, Vec3(0, 0, 2),
                     grid);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.kind(), ErrorKind::kEvaluation);
    EXPECT_NE(std::string(e.what()).find("node"), std::string::npos);
  }
}

TEST(Integrate, TranslationCovariance) {
  const auto grid = build_sphere_grid(24);
  const Vec3 xi(0.4, 1.7, 1.1);
  const Vec3 delta(0.3, -0.2, 0.5);
  const double a = integrate_sphere(inv_sq, xi, grid);
  const double b = integrate_sphere(
      [&](const Vec3& x) { return inv_sq(x + delta); }, xi - delta, grid);
  EXPECT_NEAR(a, b, 1e-12 * std::abs(a));
}

TEST(Integrate, RefinementConverges) {
  for (double r : {1.5, 2.0, 4.0}) {
    const Vec3 xi = r * Vec3(0.2, 0.4, 1.0).normalized();
    const auto radial = build_radial_rule(kDefaultRadialNodes);
    const double s1 = integrate_sphere(inv_sq, xi, build_sphere_grid(32));
    const double s2 = integrate_sphere(inv_sq, xi, build_sphere_grid(64));
    EXPECT_LT(std::abs(s1 - s2), 1e-10);
    const double b1 = integrate_ball(inv_sq, xi, build_sphere_grid(32), radial);
    const double b2 = integrate_ball(inv_sq, xi, build_sphere_grid(64), radial);
    EXPECT_LT(std::abs(b1 - b2), 1e-10);
  }
}

TEST(Integrate, NearSingularShellDoublesResolution) {
  const auto grid = build_sphere_grid(32);
  EXPECT_EQ(grid_for_center(grid, Vec3(0, 0, 1.05)).polar_count(), 64);
  EXPECT_EQ(grid_for_center(grid, Vec3(0, 0, 1.5)).polar_count(), 32);
}

TEST(PanelGrid, ExactOnPolynomialsInZ) {
  const auto grid = build_panel_sphere_grid({-0.3, 0.5, 0.7}, 8, 16);
  const double v = integrate_sphere(
      [](const Vec3& y) { return std::pow(y.z(), 10); }, Vec3::Zero(), grid);
  EXPECT_NEAR(v, 4.0 * kPi / 11.0, 1e-13);
}

TEST(ConicalRule, MatchesClosedFormsForSmoothIntegrands) {
  for (double r : {1.2, 2.0, 5.0}) {
    const Vec3 xi = r * Vec3(1.0, 0.0, 1.0).normalized();
    EXPECT_NEAR(integrate_sphere_conical(inv_sq, xi, {}),
                sphere_inv_sq_closed(r), 1e-12 * sphere_inv_sq_closed(r));
    EXPECT_NEAR(integrate_ball_conical(inv_sq, xi, {}), ball_inv_sq_closed(r),
                1e-12 * ball_inv_sq_closed(r));
    EXPECT_NEAR(integrate_ball_conical([](const Vec3&) { return 1.0; }, xi, {}),
                4.0 * kPi / 3.0, 1e-12);
  }
}

TEST(ConicalRule, ResolvesAngularKink) {
  // Integrand depending on t = x3/|x| through max(t - t0, 0): the product
  // grid converges slowly, the conical rule with the kink is exact-ish.
  const double t0 = std::sqrt(0.75);
  auto f = [t0](const Vec3& x) {
    const double t = x.z() / x.norm();
    return std::max(t - t0, 0.0) / x.squaredNorm();
  };
  const double kinks[] = {t0};
  const Vec3 xi(0.0, 0.0, 2.0);
  // On-axis oracle: adaptive 1-D in the polar angle about the center.
  auto g = [&](double z) {
    const Vec3 x(std::sqrt(1.0 - z * z), 0.0, 2.0 + z);
    return 2.0 * kPi * f(x);
  };
  const double oracle =
      boost::math::quadrature::gauss_kronrod<double, 61>::integrate(
          g, -1.0, 1.0, 25, 1e-15);
  EXPECT_NEAR(integrate_sphere_conical(f, xi, kinks), oracle, 1e-12);
  const Vec3 tilted = 2.0 * Vec3(1.0, 0.0, 1.0).normalized();
  // Off-axis oracle: sphere-centred coordinates, kinks located per meridian
  // by bracketing plus root refinement, adaptive in the azimuth.
  using boost::math::quadrature::gauss_kronrod;
  auto point = [&](double z, double phi) {
    const double s = std::sqrt(std::max(0.0, 1.0 - z * z));
    return Vec3(tilted + Vec3(s * std::cos(phi), s * std::sin(phi), z));
  };
  const auto panel_rule = gauss_legendre(40);
  auto inner = [&](double phi) {
    auto gap = [&](double z) {
      const Vec3 x = point(z, phi);
      return x.z() / x.norm() - t0;
    };
    // Along a meridian t has a single interior maximum; roots lie on
    // either side of it.
    const auto peak = boost::math::tools::brent_find_minima(
        [&](double z) { return -gap(z); }, -1.0, 1.0, 60);
    std::vector<double> edges{-1.0};
    for (auto [lo, hi] : {std::pair{-1.0, peak.first}, std::pair{peak.first, 1.0}}) {
      if ((gap(lo) < 0.0) == (gap(hi) < 0.0)) continue;
      boost::uintmax_t iters = 200;
      const auto root = boost::math::tools::toms748_solve(
          gap, lo, hi, boost::math::tools::eps_tolerance<double>(52), iters);
      edges.push_back(0.5 * (root.first + root.second));
    }
    edges.push_back(1.0);
    // Panels in the polar angle, where the integrand is smooth at the poles.
    double sum = 0.0;
    for (std::size_t p = 0; p + 1 < edges.size(); ++p) {
      const double a = std::acos(edges[p + 1]);
      const double b = std::acos(edges[p]);
      const double half = 0.5 * (b - a);
      const double mid = 0.5 * (b + a);
      for (const auto& node : panel_rule) {
        const double theta = mid + half * node.x;
        sum += half * node.w * std::sin(theta) * f(point(std::cos(theta), phi));
      }
    }
    return sum;
  };
  const double tilted_oracle =
      gauss_kronrod<double, 31>::integrate(inner, 0.0, 2.0 * kPi, 25, 1e-14);
  const double coarse = integrate_sphere_conical(f, tilted, kinks);
  EXPECT_NEAR(coarse, tilted_oracle, 1e-10);
  ConicalRuleOptions fine;
  fine.nodes_per_panel = 20;
  fine.grading_levels = 16;
  EXPECT_NEAR(integrate_sphere_conical(f, tilted, kinks, fine), coarse, 1e-13);
}

}  // namespace
}  // namespace ocmc
