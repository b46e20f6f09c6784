#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "ocmc/perturbation_tensor.hpp"

namespace ocmc {

enum class Relation { kAtMost, kAtLeast, kBelow, kAbove };

struct Check {
  std::string name;
  double value = 0.0;
  double bound = 0.0;
  Relation relation = Relation::kAtMost;
  bool passed = false;
};

struct SuiteReport {
  std::string suite;
  std::vector<Check> checks;
  double seconds = 0.0;
  double time_limit = 0.0;  // seconds; 0 for none

  bool checks_passed() const;
  bool within_time_limit() const;
  void add(std::string name, double value, Relation relation, double bound);
  void add_flag(std::string name, bool ok);
};

struct SuiteOptions {
  std::uint64_t seed = 20240601;
  // Replaces every numeric tolerance of the identity suite when positive.
  double tolerance_override = 0.0;
  int threads = 1;
};

// Series closed forms, |x|^-2 sphere and ball integrals, generating-function
// decay.
SuiteReport verify_identities(const SuiteOptions& options = {});
// Positivity of phi_lower_bound and decay of r^4 phi.
SuiteReport verify_positivity(const SuiteOptions& options = {});
// Flux identity and the two routes to K for the counterexample tensor.
SuiteReport verify_flux(const SuiteOptions& options = {});
// Construction and certification of the counterexample metric.
SuiteReport verify_certification(const SuiteOptions& options = {});
// Convergence of the graph solver for Schwarzschild.
SuiteReport verify_cmc_scaling(const SuiteOptions& options = {});
// Outlying CMC sphere for the counterexample metric at lambda = 1000.
SuiteReport verify_outlying_sphere(const SuiteOptions& options = {});
// Radial monotonicity and absence of critical points under nonnegative
// scalar-curvature density.
SuiteReport verify_no_critical_point(const SuiteOptions& options = {});

// Isotropic plus constant-profile axisymmetric term; its scalar-curvature
// density is positive everywhere.
TensorPtr nonnegative_density_tensor();

// Timing fields are optional so that reports can be byte-reproducible.
nlohmann::json suite_json(const SuiteReport& report, bool timing = false);
const char* to_string(Relation relation);

}  // namespace ocmc
