#pragma once

#include <array>
#include <functional>
#include <span>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "ocmc/metric.hpp"
#include "ocmc/perturbation_tensor.hpp"
#include "ocmc/reduced_functional.hpp"

namespace ocmc {

struct BumpParams {
  int k = 200;
  double s0 = 2.0;
  double t0 = 0.0;          // sqrt(1 - s0^-2)
  double amplitude = 1.0;
  double a_k = 0.0;         // filled by compute_a
  bool has_a = false;
};

// Validates k >= 1, s0 >= 2, amplitude > 0 and fills t0.
BumpParams make_bump_params(int k, double s0, double amplitude = 1.0);

// exp(-4 / (k (t0 - t) + 1)) for t < t0 + 1/k, zero beyond.
double bump(double t, const BumpParams& p);
ProfileJet bump_jet(double t, const BumpParams& p);
inline double bump_cutoff(const BumpParams& p) { return p.t0 + 1.0 / p.k; }

// amplitude * (bump - a_k).
class CounterexampleProfile final : public AxisymmetricProfile {
 public:
  explicit CounterexampleProfile(BumpParams p);
  ProfileJet eval(double t) const override;
  std::vector<double> kinks() const override { return {bump_cutoff(p_)}; }
  std::string describe() const override;
  const BumpParams& params() const { return p_; }

 private:
  BumpParams p_;
};

// One-dimensional rule for axisymmetric integrands over the sphere of
// radius one about s e3: 2 pi times a graded composite Gauss-Legendre rule
// in the height z, broken where t = x3/|x| crosses the kinks.
struct AxialRuleOptions {
  int nodes_per_panel = 20;
  int grading_levels = 14;
};

// Integrand is given as f(z) with x = (sqrt(1 - z^2), 0, s + z).
double integrate_axial_sphere(const std::function<double(double)>& f, double s,
                              std::span<const double> kinks,
                              const AxialRuleOptions& options = {});

// Moment functions along the axis (no amplitude).
double eval_I(double s, const AxialRuleOptions& options = {});
double eval_J(const BumpParams& p, double s, const AxialRuleOptions& options = {});
double eval_J_with(const std::function<double(double)>& profile, double s,
                   std::span<const double> kinks,
                   const AxialRuleOptions& options = {});

// J'(s0) / I'(s0) by Richardson-extrapolated central differences.
double compute_a(const BumpParams& p, double step = 1e-5,
                 const AxialRuleOptions& options = {});
// Returns p with a_k filled in.
BumpParams with_a(BumpParams p, double step = 1e-5);

// Sphere integral of |x|^-2 psi(t) (1 - 3 (x3 - xi3)^2), psi = amplitude
// (bump - a_k), by the cone-aligned rule.
double eval_Q(const BumpParams& p, const Vec3& xi,
              const ConicalRuleOptions& options = {});

struct MinimumCertificate {
  Vec3 xi = Vec3::Zero();
  double gradient_norm = 0.0;
  std::array<double, 3> hessian_eigenvalues{};
  Mat3 hessian = Mat3::Zero();
  int k_used = 0;
  double a_k = 0.0;
  double axis_eigenvalue_pair_gap = 0.0;  // relative gap of transverse pair
  bool valid = false;
};

struct CertifyOptions {
  double step = 1e-4;
  double gradient_tol = 1e-5;
  double eigenvalue_floor = 1e-6;
  int max_doublings = 4;
};

// Hessian of Q at s0 e3; doubles k on failure. Throws kConstructionFailure
// when no k up to 16 k0 succeeds. `params_out` receives the accepted
// parameters (with a_k).
MinimumCertificate certify_minimum(const BumpParams& p,
                                   const CertifyOptions& options = {},
                                   BumpParams* params_out = nullptr);

TensorPtr make_counterexample_tensor(const BumpParams& p);

struct MetricConstruction {
  BumpParams params;
  MinimumCertificate certificate;
  CriticalPointReport f_minimum;
  TensorPtr tensor;
  MetricSpec metric;
  std::vector<double> amplitudes_tried;
};

struct BuildOptions {
  double initial_amplitude = 64.0;
  double max_amplitude = 1048576.0;  // 2^20
  CertifyOptions certify;
  CriticalPointOptions search;
};

// Doubles the amplitude from 64 until find_critical_point on F (with the
// amplitude-scaled tensor) reports a strict minimum started from s0 e3.
MetricConstruction build_metric(const BumpParams& p, const BuildOptions& options = {});

// {"k","s0","t0","a_k","amplitude","samples":[[t, psi(t)] x 2048]}.
nlohmann::ordered_json export_profile(const BumpParams& p, int samples = 2048);

}  // namespace ocmc
