#include <algorithm>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>
#include <thread>

#include <gtest/gtest.h>
#include <nlohmann/json.hpp>

#include "ocmc/cli.hpp"
#include "ocmc/cmc_solver.hpp"
#include "ocmc/counterexample.hpp"
#include "ocmc/errors.hpp"
#include "ocmc/reduced_functional.hpp"

namespace ocmc {
namespace {

int workers() { return static_cast<int>(std::max(1u, std::thread::hardware_concurrency())); }

// F_lambda - F over a 5 x 5 x 5 box of side 0.2 about s0 e3. The gap is
// O(1/lambda) with a constant that varies with xi; it has to be small next
// to the variation of F itself and shrink uniformly when lambda doubles.
TEST(CounterexampleBox, FLambdaTracksFUniformly) {
  const BumpParams p = with_a(make_bump_params(200, 2.0, 64.0));
  const TensorPtr tensor = make_counterexample_tensor(p);
  const MetricSpec metric = perturbed_metric(tensor);
  const FunctionalContext ctx = make_context(tensor);
  std::vector<Vec3> box;
  for (int i = 0; i < 5; ++i) {
    for (int j = 0; j < 5; ++j) {
      for (int k = 0; k < 5; ++k) {
        box.emplace_back(-0.1 + 0.05 * i, -0.1 + 0.05 * j, p.s0 - 0.1 + 0.05 * k);
      }
    }
  }
  const auto reports = solve_many(metric, box, 1e3, 8, {}, workers());
  double f_lo = std::numeric_limits<double>::infinity();
  double f_hi = -f_lo;
  double worst = 0.0;
  std::vector<double> gap(box.size());
  for (std::size_t i = 0; i < box.size(); ++i) {
    const double f = eval_F(ctx, box[i]);
    f_lo = std::min(f_lo, f);
    f_hi = std::max(f_hi, f);
    gap[i] = reports[i].f_lambda - f;
    worst = std::max(worst, std::abs(gap[i]));
    EXPECT_LE(std::abs(reports[i].volume_error), 1e-10);
  }
  std::cout << "max |F_lambda - F| over box at lambda=1000: " << worst
            << " (F varies by " << f_hi - f_lo << ")\n";
  RecordProperty("max_deviation", std::to_string(worst));
  EXPECT_LE(worst, 0.05 * (f_hi - f_lo));

  std::vector<Vec3> corners;
  std::vector<double> corner_gap;
  for (std::size_t i = 0; i < box.size(); ++i) {
    const Vec3 d = box[i] - p.s0 * Vec3::UnitZ();
    if (std::abs(std::abs(d.x()) - 0.1) < 1e-12 && std::abs(std::abs(d.y()) - 0.1) < 1e-12 &&
        std::abs(std::abs(d.z()) - 0.1) < 1e-12) {
      corners.push_back(box[i]);
      corner_gap.push_back(gap[i]);
    }
  }
  ASSERT_EQ(corners.size(), 8u);
  const auto doubled = solve_many(metric, corners, 2e3, 8, {}, workers());
  double sup1 = 0.0;
  double sup2 = 0.0;
  for (std::size_t i = 0; i < corners.size(); ++i) {
    sup1 = std::max(sup1, std::abs(corner_gap[i]));
    sup2 = std::max(sup2, std::abs(doubled[i].f_lambda - eval_F(ctx, corners[i])));
  }
  EXPECT_LE(sup2, 0.55 * sup1);
}

TEST(SchwarzschildSearch, NoInteriorMinimum) {
  try {
    find_cmc(schwarzschild_metric(), Vec3(0, 0, 2), 1e3, 8);
    ADD_FAILURE() << "expected a boundary error";
  } catch (const Error& e) {
    EXPECT_EQ(e.kind(), ErrorKind::kBoundary) << e.what();
  }
}

TEST(CliEndToEnd, ProfileThenFindInteriorMinimum) {
  namespace fs = std::filesystem;
  const fs::path dir = fs::temp_directory_path() / "ocmc_cli_find";
  fs::create_directories(dir);
  const std::string prof = (dir / "prof.json").string();
  std::ostringstream out;
  std::ostringstream err;
  ASSERT_EQ(run_cli({"counterexample", "--k", "200", "--s0", "2", "--out", prof}, out, err),
            kExitOk)
      << err.str();
  std::ostringstream found;
  ASSERT_EQ(run_cli({"cmc", "find", "--metric", prof, "--xi0", "0,0,2", "--lambda", "1000"},
                    found, err),
            kExitOk)
      << err.str();
  fs::remove_all(dir);
  const auto doc = nlohmann::json::parse(found.str());
  const auto& xi = doc["solution"]["xi"];
  const double r = std::hypot(xi[0].get<double>(), xi[1].get<double>(), xi[2].get<double>());
  EXPECT_GT(r, 1.0);
  EXPECT_TRUE(doc["critical"]["converged"].get<bool>());
  EXPECT_EQ(doc["critical"]["classification"], "strict-min");
  for (const auto& ev : doc["critical"]["hessian_eigenvalues"]) EXPECT_GT(ev.get<double>(), 0.0);
  EXPECT_GE(doc["first_harmonic_norm_start"].get<double>(),
            10.0 * doc["first_harmonic_norm"].get<double>());
}

}  // namespace
}  // namespace ocmc
