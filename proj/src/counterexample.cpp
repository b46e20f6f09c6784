#include "ocmc/counterexample.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <sstream>

#include <Eigen/Eigenvalues>

#include "ocmc/errors.hpp"

namespace ocmc {

namespace {

constexpr double kPi = std::numbers::pi;

std::string fmt(double v) {
  std::ostringstream os;
  os.precision(17);
  os << v;
  return os.str();
}

// Same grading scheme as the conical rule, in one variable.
void graded_panels(std::vector<Node1D>& out, double a, double b, bool kink_a,
                   bool kink_b, int n, int levels) {
  if (!(b > a)) return;
  if (kink_a && kink_b) {
    const double mid = 0.5 * (a + b);
    graded_panels(out, a, mid, true, false, n, levels);
    graded_panels(out, mid, b, false, true, n, levels);
    return;
  }
  auto panel = [&](double l, double r) {
    for (const Node1D& node : gauss_legendre(n, l, r)) out.push_back(node);
  };
  if (!kink_a && !kink_b) {
    panel(a, b);
    return;
  }
  const double len = b - a;
  double scale = 0.5;
  if (kink_b) {
    double left = a;
    for (int j = 0; j < levels; ++j, scale *= 0.5) {
      const double right = b - len * scale;
      panel(left, right);
      left = right;
    }
    panel(left, b);
  } else {
    double right = b;
    for (int j = 0; j < levels; ++j, scale *= 0.5) {
      const double left = a + len * scale;
      panel(left, right);
      right = left;
    }
    panel(a, right);
  }
}

}  // namespace

BumpParams make_bump_params(int k, double s0, double amplitude) {
  if (k < 1) throw Error(ErrorKind::kInvalidArgument, "bump: k must be >= 1");
  if (!(s0 >= 2.0)) throw Error(ErrorKind::kInvalidArgument, "bump: s0 must be >= 2");
  if (!(amplitude > 0.0) || !std::isfinite(amplitude)) {
    throw Error(ErrorKind::kInvalidArgument, "bump: amplitude must be > 0");
  }
  BumpParams p;
  p.k = k;
  p.s0 = s0;
  p.t0 = std::sqrt(1.0 - 1.0 / (s0 * s0));
  p.amplitude = amplitude;
  return p;
}

double bump(double t, const BumpParams& p) {
  const double w = p.k * (p.t0 - t) + 1.0;
  if (!(w > 0.0)) return 0.0;
  return std::exp(-4.0 / w);
}

ProfileJet bump_jet(double t, const BumpParams& p) {
  const double w = p.k * (p.t0 - t) + 1.0;
  if (!(w > 0.0)) return {};
  const double f = std::exp(-4.0 / w);
  const double w2 = w * w;
  const double d1 = -4.0 * p.k * f / w2;
  const double d2 = -4.0 * p.k * (d1 / w2 + 2.0 * p.k * f / (w2 * w));
  return {f, d1, d2};
}

CounterexampleProfile::CounterexampleProfile(BumpParams p) : p_(p) {
  if (!p_.has_a) {
    throw Error(ErrorKind::kInvalidArgument,
                "counterexample profile needs a computed a_k");
  }
}

ProfileJet CounterexampleProfile::eval(double t) const {
  ProfileJet j = bump_jet(t, p_);
  j.value = p_.amplitude * (j.value - p_.a_k);
  j.d1 *= p_.amplitude;
  j.d2 *= p_.amplitude;
  return j;
}

std::string CounterexampleProfile::describe() const {
  return "counterexample(k=" + std::to_string(p_.k) + ", s0=" + fmt(p_.s0) +
         ", a_k=" + fmt(p_.a_k) + ", amplitude=" + fmt(p_.amplitude) + ")";
}

double integrate_axial_sphere(const std::function<double(double)>& f, double s,
                              std::span<const double> kinks,
                              const AxialRuleOptions& options) {
  if (!(s > 1.0)) {
    throw Error(ErrorKind::kDomain, "axial sphere integral needs s > 1");
  }
  // t(z) = tc  <=>  z^2 + 2 s (1 - tc^2) z + s^2 - tc^2 (s^2 + 1) = 0.
  std::vector<double> breaks;
  for (double tc : kinks) {
    if (!(tc > 0.0)) continue;
    const double disc = tc * tc * (1.0 - s * s * (1.0 - tc * tc));
    if (disc < 0.0) continue;
    const double root = std::sqrt(disc);
    for (double z : {-s * (1.0 - tc * tc) - root, -s * (1.0 - tc * tc) + root}) {
      if (z > -1.0 + 1e-14 && z < 1.0 - 1e-14) breaks.push_back(z);
    }
  }
  std::sort(breaks.begin(), breaks.end());
  std::vector<Node1D> nodes;
  // z = -1 is the point nearest the origin; grade toward it as well.
  double left = -1.0;
  bool left_kink = true;
  for (double b : breaks) {
    graded_panels(nodes, left, b, left_kink, true, options.nodes_per_panel,
                  options.grading_levels);
    left = b;
    left_kink = true;
  }
  graded_panels(nodes, left, 1.0, left_kink, false, options.nodes_per_panel,
                options.grading_levels);
  double sum = 0.0;
  for (const Node1D& node : nodes) {
    const double v = f(node.x);
    if (!std::isfinite(v)) {
      throw Error(ErrorKind::kEvaluation,
                  "axial integrand not finite at z = " + fmt(node.x));
    }
    sum += node.w * v;
  }
  return 2.0 * kPi * sum;
}

double eval_J_with(const std::function<double(double)>& profile, double s,
                   std::span<const double> kinks,
                   const AxialRuleOptions& options) {
  if (!(s > 1.0)) throw Error(ErrorKind::kDomain, "moment needs s > 1");
  return integrate_axial_sphere(
      [&](double z) {
        const double r2 = s * s + 1.0 + 2.0 * s * z;
        const double t = (s + z) / std::sqrt(r2);
        return profile(t) * (1.0 - 3.0 * z * z) / r2;
      },
      s, kinks, options);
}

double eval_I(double s, const AxialRuleOptions& options) {
  return eval_J_with([](double) { return 1.0; }, s, {}, options);
}

double eval_J(const BumpParams& p, double s, const AxialRuleOptions& options) {
  const double kinks[] = {bump_cutoff(p)};
  return eval_J_with([&](double t) { return bump(t, p); }, s, kinks, options);
}

double compute_a(const BumpParams& p, double step,
                 const AxialRuleOptions& options) {
  const double di = richardson_derivative(
      [&](double s) { return eval_I(s, options); }, p.s0, step);
  if (!(std::abs(di) > 1e-6)) {
    throw Error(ErrorKind::kDegenerateS0,
                "I'(s0) = " + fmt(di) + " is too small; choose another s0");
  }
  const double dj = richardson_derivative(
      [&](double s) { return eval_J(p, s, options); }, p.s0, step);
  return dj / di;
}

BumpParams with_a(BumpParams p, double step) {
  p.a_k = compute_a(p, step);
  p.has_a = true;
  return p;
}

double eval_Q(const BumpParams& p, const Vec3& xi,
              const ConicalRuleOptions& options) {
  if (!(xi.norm() > 1.0)) throw Error(ErrorKind::kDomain, "Q needs |xi| > 1");
  const BumpParams q = p.has_a ? p : with_a(p);
  const double kinks[] = {bump_cutoff(q)};
  return integrate_sphere_conical(
      [&](const Vec3& x) {
        const double r2 = x.squaredNorm();
        const double t = std::clamp(x.z() / std::sqrt(r2), -1.0, 1.0);
        const double dz = x.z() - xi.z();
        return q.amplitude * (bump(t, q) - q.a_k) * (1.0 - 3.0 * dz * dz) / r2;
      },
      xi, kinks, options);
}

MinimumCertificate certify_minimum(const BumpParams& p0,
                                   const CertifyOptions& options,
                                   BumpParams* params_out) {
  BumpParams p = p0;
  std::ostringstream log;
  log.precision(6);
  for (int attempt = 0; attempt <= options.max_doublings; ++attempt) {
    if (attempt > 0) p.k *= 2;
    p = with_a(p);
    const Vec3 center = p.s0 * Vec3::UnitZ();
    const Objective q = [&](const Vec3& x) { return eval_Q(p, x); };
    MinimumCertificate c;
    c.xi = center;
    c.k_used = p.k;
    c.a_k = p.a_k;
    c.gradient_norm = fd_gradient(q, center, options.step).norm();
    c.hessian = fd_hessian(q, center, options.step);
    Eigen::SelfAdjointEigenSolver<Mat3> es(c.hessian);
    for (int i = 0; i < 3; ++i) c.hessian_eigenvalues[i] = es.eigenvalues()[i];
    // Transverse pair: the two eigenvectors least aligned with the axis.
    std::array<int, 3> order{0, 1, 2};
    std::sort(order.begin(), order.end(), [&](int a, int b) {
      return std::abs(es.eigenvectors()(2, a)) < std::abs(es.eigenvectors()(2, b));
    });
    const double la = es.eigenvalues()[order[0]];
    const double lb = es.eigenvalues()[order[1]];
    c.axis_eigenvalue_pair_gap =
        std::abs(la - lb) / std::max({std::abs(la), std::abs(lb), 1e-300});
    const bool positive =
        std::all_of(c.hessian_eigenvalues.begin(), c.hessian_eigenvalues.end(),
                    [&](double e) { return e >= options.eigenvalue_floor; });
    c.valid = c.gradient_norm <= options.gradient_tol && positive;
    log << " k=" << p.k << ": |grad|=" << c.gradient_norm << " eig=("
        << c.hessian_eigenvalues[0] << ", " << c.hessian_eigenvalues[1] << ", "
        << c.hessian_eigenvalues[2] << ");";
    if (c.valid) {
      if (params_out) *params_out = p;
      return c;
    }
  }
  throw Error(ErrorKind::kConstructionFailure,
              "no strict local minimum of Q certified:" + log.str());
}

TensorPtr make_counterexample_tensor(const BumpParams& p) {
  const BumpParams q = p.has_a ? p : with_a(p);
  return std::make_shared<AxisymmetricTensor>(
      std::make_shared<CounterexampleProfile>(q));
}

MetricConstruction build_metric(const BumpParams& p0, const BuildOptions& options) {
  MetricConstruction out;
  BumpParams unit = p0;
  unit.amplitude = 1.0;
  out.certificate = certify_minimum(unit, options.certify, &unit);
  std::ostringstream log;
  log.precision(6);
  for (double amp = options.initial_amplitude; amp <= options.max_amplitude;
       amp *= 2.0) {
    out.amplitudes_tried.push_back(amp);
    BumpParams p = unit;
    p.amplitude = amp;
    TensorPtr tensor = make_counterexample_tensor(p);
    const FunctionalContext ctx = make_context(tensor);
    try {
      const CriticalPointReport rep =
          find_critical_point(ctx, p.s0 * Vec3::UnitZ(), options.search);
      log << " A=" << amp << ": " << to_string(rep.classification)
          << " |grad|=" << rep.gradient_norm << ";";
      if (rep.converged && rep.classification == Classification::kStrictMin) {
        out.params = p;
        out.f_minimum = rep;
        out.tensor = tensor;
        out.metric = perturbed_metric(tensor);
        return out;
      }
    } catch (const Error& e) {
      if (e.kind() != ErrorKind::kBoundary) throw;
      log << " A=" << amp << ": boundary;";
    }
  }
  throw Error(ErrorKind::kConstructionFailure,
              "amplitude search found no strict minimum of F:" + log.str());
}

nlohmann::ordered_json export_profile(const BumpParams& p0, int samples) {
  if (samples < 2) throw Error(ErrorKind::kInvalidArgument, "need >= 2 samples");
  const BumpParams p = p0.has_a ? p0 : with_a(p0);
  const CounterexampleProfile profile(p);
  nlohmann::ordered_json j;
  j["k"] = p.k;
  j["s0"] = p.s0;
  j["t0"] = p.t0;
  j["a_k"] = p.a_k;
  j["amplitude"] = p.amplitude;
  nlohmann::ordered_json rows = nlohmann::ordered_json::array();
  for (int i = 0; i < samples; ++i) {
    const double t = -1.0 + 2.0 * i / (samples - 1);
    rows.push_back({t, profile.eval(t).value});
  }
  j["samples"] = std::move(rows);
  return j;
}

}  // namespace ocmc
