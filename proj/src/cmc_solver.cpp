#include "ocmc/cmc_solver.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <sstream>
#include <thread>

#include "ocmc/errors.hpp"
#include "ocmc/spherical_harmonics.hpp"

namespace ocmc {

namespace {

constexpr double kPi = std::numbers::pi;
constexpr double kUnitVolume = 4.0 * kPi / 3.0;
constexpr double kMaxHeight = 0.1;

std::string point_text(const Vec3& x) {
  std::ostringstream os;
  os.precision(17);
  os << "(" << x.x() << ", " << x.y() << ", " << x.z() << ")";
  return os.str();
}

std::vector<double> tensor_kinks(const MetricSpec& m) {
  return m.tensor ? m.tensor->angular_kinks() : std::vector<double>{};
}

double volume_density(const MetricSpec& m, double lambda, const Vec3& p) {
  return std::sqrt(metric_eval(m, lambda * p).g.determinant());
}

struct NodeGeometry {
  double curvature = 0.0;     // lambda H
  double area_element = 0.0;  // relative to the round unit sphere
  Vec3 point = Vec3::Zero();  // x / lambda
};

// Surface p(s) = xi + (1 + u(s)) y(s) in the gnomonic chart about y.
NodeGeometry node_geometry(const MetricSpec& m, double lambda, const Vec3& xi,
                           const Vec3& y, const Vec3& a1, const Vec3& a2,
                           const ChartJet& u) {
  const double rho = 1.0 + u.value;
  NodeGeometry out;
  out.point = xi + rho * y;
  const Vec3 x1 = u.d1 * y + rho * a1;
  const Vec3 x2 = u.d2 * y + rho * a2;
  const Vec3 x11 = u.d11 * y + 2.0 * u.d1 * a1 - rho * y;
  const Vec3 x12 = u.d12 * y + u.d1 * a2 + u.d2 * a1;
  const Vec3 x22 = u.d22 * y + 2.0 * u.d2 * a2 - rho * y;

  const MetricSample s = metric_eval(m, lambda * out.point);
  const Mat3& g = s.g;
  const double i11 = x1.dot(g * x1);
  const double i12 = x1.dot(g * x2);
  const double i22 = x2.dot(g * x2);
  const double det = i11 * i22 - i12 * i12;
  if (!(det > 0.0)) {
    throw Error(ErrorKind::kGeometry,
                "degenerate area element at " + point_text(lambda * out.point));
  }
  const Vec3 n = x1.cross(x2);
  const Vec3 gn = g.ldlt().solve(n);
  const double n_len = std::sqrt(n.dot(gn));
  auto directional = [&](const Vec3& v) -> Mat3 {
    return lambda * (v.x() * s.dg[0] + v.y() * s.dg[1] + v.z() * s.dg[2]);
  };
  const Mat3 d1 = directional(x1);
  const Mat3 d2 = directional(x2);
  const Mat3 dn = directional(gn);
  // n_b Gamma^b_cd X^c_i X^d_j
  auto christoffel = [&](const Vec3& xi_, const Mat3& di, const Vec3& xj,
                         const Mat3& dj) {
    return 0.5 * (xj.dot(di * gn) + xi_.dot(dj * gn) - xi_.dot(dn * xj));
  };
  const double ii11 = (n.dot(x11) + christoffel(x1, d1, x1, d1)) / n_len;
  const double ii12 = (n.dot(x12) + christoffel(x1, d1, x2, d2)) / n_len;
  const double ii22 = (n.dot(x22) + christoffel(x2, d2, x2, d2)) / n_len;
  out.curvature = -(i22 * ii11 - 2.0 * i12 * ii12 + i11 * ii22) / det;
  out.area_element = std::sqrt(det);
  return out;
}

double& jet_component(ChartJet& j, int c) {
  switch (c) {
    case 0: return j.value;
    case 1: return j.d1;
    case 2: return j.d2;
    case 3: return j.d11;
    case 4: return j.d12;
    default: return j.d22;
  }
}

double jet_component(const ChartJet& j, int c) {
  return jet_component(const_cast<ChartJet&>(j), c);
}

constexpr std::array<double, 6> kJetSteps{1e-6, 1e-6, 1e-6, 1e-4, 1e-4, 1e-4};

struct Evaluation {
  Eigen::VectorXd projections;  // lambda H - 2 - h0 - h.y against every Y_lm
  double volume_excess = 0.0;   // rescaled volume - 4 pi / 3
  double area_excess = 0.0;     // rescaled area - 4 pi
  double curvature_area = 0.0;  // integral of lambda H dA
  double min_radius = 0.0;      // min |p|
  Eigen::MatrixXd jacobian;
  SphereRule rule;
  std::vector<double> curvature;

  double residual() const { return projections.norm(); }
  double volume_error() const { return volume_excess / kUnitVolume; }
};

class GraphProblem {
 public:
  GraphProblem(const MetricSpec& m, const Vec3& xi, double lambda, int degree,
               const CmcOptions& options)
      : m_(m),
        xi_(xi),
        lambda_(lambda),
        degree_(degree),
        options_(options),
        harmonics_(degree),
        modes_(graph_modes(degree)),
        kinks_(tensor_kinks(m)),
        shell_(gauss_legendre(options.shell_nodes, 0.0, 1.0)) {
    ball_excess_ = ball_volume_excess();
  }

  int mode_count() const { return static_cast<int>(modes_.size()); }
  int unknowns() const { return mode_count() + 4; }
  int equations() const { return harmonics_.size() + 1; }

  double mean_height(const Eigen::VectorXd& c) const {
    // Y_00 = 1 / sqrt(4 pi) is the first mode.
    return c[0] / std::sqrt(4.0 * kPi);
  }

  // Residual (and optionally Jacobian) at coefficients c and multipliers h
  // (both rescaled).
  Evaluation evaluate(const Eigen::VectorXd& c, const Eigen::Vector4d& h,
                      bool want_jacobian, bool want_samples) const {
    Evaluation ev;
    const int nh = harmonics_.size();
    const int nm = mode_count();
    ev.projections = Eigen::VectorXd::Zero(nh);
    if (want_jacobian) ev.jacobian = Eigen::MatrixXd::Zero(equations(), unknowns());
    ev.rule = make_sphere_rule(m_, xi_, 1.0 + mean_height(c), degree_, options_);
    ev.min_radius = std::numeric_limits<double>::infinity();
    if (want_samples) ev.curvature.reserve(ev.rule.directions.size());

    std::vector<PolyJet> jets;
    Eigen::VectorXd y_values(nh);
    Eigen::VectorXd dcurv(nm);
    Eigen::VectorXd mode_values(nm);
    std::array<Eigen::VectorXd, 6> mode_jets;
    for (auto& v : mode_jets) v.resize(nm);
    double area_excess = 0.0;
    double shell_volume = 0.0;
    double curvature_area = 0.0;
    for (std::size_t i = 0; i < ev.rule.directions.size(); ++i) {
      const Vec3& y = ev.rule.directions[i];
      const double w = ev.rule.weights[i];
      Vec3 a1;
      Vec3 a2;
      tangent_frame(y, a1, a2);
      harmonics_.evaluate(y, jets);
      ChartJet u;
      for (int b = 0; b < nh; ++b) y_values[b] = jets[static_cast<std::size_t>(b)].value;
      for (int b = 0; b < nm; ++b) {
        const int idx = modes_[static_cast<std::size_t>(b)];
        const ChartJet jb = chart_jet(jets[static_cast<std::size_t>(idx)],
                                      RealHarmonics::degree_of(idx), a1, a2);
        for (int cpt = 0; cpt < 6; ++cpt) {
          const double v = jet_component(jb, cpt);
          mode_jets[static_cast<std::size_t>(cpt)][b] = v;
          jet_component(u, cpt) += c[b] * v;
        }
        mode_values[b] = jb.value;
      }
      if (std::abs(u.value) > kMaxHeight) {
        throw Error(ErrorKind::kGeometry,
                    "height leaves the graph regime |u| <= 0.1");
      }
      const NodeGeometry geo = node_geometry(m_, lambda_, xi_, y, a1, a2, u);
      const double source = geo.curvature - 2.0 - h[0] - h[1] * y.x() -
                            h[2] * y.y() - h[3] * y.z();
      ev.projections.noalias() += (w * source) * y_values;
      area_excess += w * (geo.area_element - 1.0);
      curvature_area += w * geo.curvature * geo.area_element;
      ev.min_radius = std::min(ev.min_radius, geo.point.norm());
      if (want_samples) ev.curvature.push_back(geo.curvature);

      // Shell between the unit sphere and the graph along the center ray.
      const double top = 1.0 + u.value;
      double shell = 0.0;
      for (const Node1D& q : shell_) {
        const double r = 1.0 + u.value * q.x;
        shell += q.w * (volume_density(m_, lambda_, xi_ + r * y) - 1.0) * r * r;
      }
      shell = u.value * shell + (top * top * top - 1.0) / 3.0;
      shell_volume += w * shell;

      if (want_jacobian) {
        dcurv.setZero();
        for (int cpt = 0; cpt < 6; ++cpt) {
          const double step = kJetSteps[static_cast<std::size_t>(cpt)];
          ChartJet up = u;
          ChartJet down = u;
          jet_component(up, cpt) += step;
          jet_component(down, cpt) -= step;
          const double slope =
              (node_geometry(m_, lambda_, xi_, y, a1, a2, up).curvature -
               node_geometry(m_, lambda_, xi_, y, a1, a2, down).curvature) /
              (2.0 * step);
          dcurv.noalias() += slope * mode_jets[static_cast<std::size_t>(cpt)];
        }
        ev.jacobian.topLeftCorner(nh, nm).noalias() += (w * y_values) * dcurv.transpose();
        ev.jacobian.block(0, nm, nh, 1) -= w * y_values;
        for (int k = 0; k < 3; ++k) {
          ev.jacobian.block(0, nm + 1 + k, nh, 1) -= (w * y[k]) * y_values;
        }
        const double dvol = w * volume_density(m_, lambda_, geo.point) * top * top;
        ev.jacobian.block(nh, 0, 1, nm) += dvol * mode_values.transpose();
      }
    }
    ev.area_excess = area_excess;
    ev.volume_excess = ball_excess_ + shell_volume;
    ev.curvature_area = curvature_area;
    // Point of the surface nearest the origin lies close to y = -xi/|xi|.
    const Vec3 toward = -xi_.normalized();
    std::vector<double> values;
    harmonics_.values(toward, values);
    double u_near = 0.0;
    for (int b = 0; b < nm; ++b) {
      u_near += c[b] * values[static_cast<std::size_t>(modes_[static_cast<std::size_t>(b)])];
    }
    ev.min_radius = std::min(ev.min_radius, (xi_ + (1.0 + u_near) * toward).norm());
    return ev;
  }

  const std::vector<int>& modes() const { return modes_; }

 private:
  double ball_volume_excess() const {
    auto excess = [&](const Vec3& p) { return volume_density(m_, lambda_, p) - 1.0; };
    if (!kinks_.empty()) {
      ConicalRuleOptions opts = options_.conical;
      return integrate_ball_conical(excess, xi_, kinks_, opts);
    }
    const SphereRule rule = make_sphere_rule(m_, xi_, 1.0, degree_, options_);
    const std::vector<Node1D> radial =
        gauss_legendre(options_.ball_radial_nodes, 0.0, 1.0);
    double sum = 0.0;
    for (std::size_t i = 0; i < rule.directions.size(); ++i) {
      double line = 0.0;
      for (const Node1D& q : radial) {
        line += q.w * q.x * q.x * excess(xi_ + q.x * rule.directions[i]);
      }
      sum += rule.weights[i] * line;
    }
    return sum;
  }

  const MetricSpec& m_;
  Vec3 xi_;
  double lambda_;
  int degree_;
  CmcOptions options_;
  RealHarmonics harmonics_;
  std::vector<int> modes_;
  std::vector<double> kinks_;
  std::vector<Node1D> shell_;
  double ball_excess_ = 0.0;
};

void check_solve_preconditions(const Vec3& xi, double lambda, int degree) {
  if (!(xi.norm() > 1.05)) {
    throw Error(ErrorKind::kInvalidArgument, "CMC solve needs |xi| > 1.05");
  }
  if (!(lambda >= 100.0) || !std::isfinite(lambda)) {
    throw Error(ErrorKind::kInvalidArgument, "CMC solve needs lambda >= 100");
  }
  if (degree < 4 || degree > 40) {
    throw Error(ErrorKind::kInvalidArgument, "CMC solve needs 4 <= L <= 40");
  }
}

bool converged(const Evaluation& ev, double tol) {
  return ev.residual() <= tol && std::abs(ev.volume_error()) <= 1e-3 * tol;
}

// Merit combining both equation groups.
double merit(const Evaluation& ev) {
  return std::hypot(ev.residual(), ev.volume_excess);
}

std::string trace_text(const std::vector<double>& history) {
  std::ostringstream os;
  os.precision(3);
  os << "residual trace:";
  for (double r : history) os << " " << r;
  return os.str();
}

}  // namespace

std::vector<int> graph_modes(int degree) {
  std::vector<int> modes{0};
  for (int l = 2; l <= degree; ++l) {
    for (int m = -l; m <= l; ++m) modes.push_back(RealHarmonics::index(l, m));
  }
  return modes;
}

SphericalGraph SphericalGraph::round(const Vec3& xi, double lambda, int degree) {
  SphericalGraph g;
  g.xi = xi;
  g.lambda = lambda;
  g.degree = degree;
  g.coefficients = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(graph_modes(degree).size()));
  return g;
}

double SphericalGraph::height(const Vec3& y) const {
  const std::vector<int> modes = graph_modes(degree);
  if (static_cast<std::size_t>(coefficients.size()) != modes.size()) {
    throw Error(ErrorKind::kInvalidArgument, "coefficient count does not match degree");
  }
  std::vector<double> values;
  RealHarmonics(degree).values(y.normalized(), values);
  double u = 0.0;
  for (std::size_t b = 0; b < modes.size(); ++b) {
    u += coefficients[static_cast<Eigen::Index>(b)] *
         values[static_cast<std::size_t>(modes[b])];
  }
  return u;
}

double SphericalGraph::scaled_height(const Vec3& y) const { return lambda * height(y); }

double SphericalGraph::scaled_mean() const {
  return lambda * coefficients[0] / std::sqrt(4.0 * kPi);
}

SphereRule make_sphere_rule(const MetricSpec& m, const Vec3& xi,
                            double base_radius, int degree,
                            const CmcOptions& options) {
  SphereRule rule;
  const double r = xi.norm();
  const std::vector<double> kinks = tensor_kinks(m);
  if (!kinks.empty()) {
    const Vec3 center = xi / base_radius;
    for (const SurfaceNode& node : sphere_nodes_conical(center, kinks, options.conical)) {
      rule.directions.push_back((node.point - center).normalized());
      rule.weights.push_back(node.weight);
    }
    return rule;
  }
  // Polar variable z = <y, b>, b pointing at the origin; the fields are
  // singular at z = (r^2 + 1) / (2 r), just beyond z = 1.
  const Vec3 b = r > 0.0 ? Vec3(-xi / r) : Vec3(Vec3::UnitZ());
  Vec3 e1;
  Vec3 e2;
  tangent_frame(b, e1, e2);
  const double gap = std::max((r - 1.0) * (r - 1.0) / (2.0 * r), 1e-6);
  std::vector<double> edges{1.0};
  for (double d = gap; 1.0 - d > -1.0 + 0.25 * d; d *= 2.0) edges.push_back(1.0 - d);
  edges.push_back(-1.0);
  std::reverse(edges.begin(), edges.end());
  const int n_az = options.azimuthal_count > 0 ? options.azimuthal_count
                                               : std::max(48, 6 * degree);
  const double w_az = 2.0 * kPi / n_az;
  for (std::size_t p = 0; p + 1 < edges.size(); ++p) {
    for (const Node1D& q :
         gauss_legendre(options.polar_nodes_per_panel, edges[p], edges[p + 1])) {
      const double s = std::sqrt(std::max(0.0, 1.0 - q.x * q.x));
      for (int j = 0; j < n_az; ++j) {
        const double phi = (j + 0.5) * w_az;
        rule.directions.push_back(q.x * b + s * (std::cos(phi) * e1 + std::sin(phi) * e2));
        rule.weights.push_back(q.w * w_az);
      }
    }
  }
  return rule;
}

GraphGeometry graph_geometry(const MetricSpec& m, const SphericalGraph& graph,
                             const CmcOptions& options) {
  if (!(graph.xi.norm() > 1.0) || !(graph.lambda > 0.0)) {
    throw Error(ErrorKind::kInvalidArgument, "graph needs |xi| > 1 and lambda > 0");
  }
  const GraphProblem problem(m, graph.xi, graph.lambda, graph.degree, options);
  if (graph.coefficients.size() != problem.mode_count()) {
    throw Error(ErrorKind::kInvalidArgument, "coefficient count does not match degree");
  }
  Evaluation ev = problem.evaluate(graph.coefficients, Eigen::Vector4d::Zero(),
                                   false, true);
  const double lam = graph.lambda;
  GraphGeometry out;
  out.area_excess = lam * lam * ev.area_excess;
  out.area = 4.0 * kPi * lam * lam + out.area_excess;
  out.volume_excess = lam * lam * lam * ev.volume_excess;
  out.volume = kUnitVolume * lam * lam * lam + out.volume_excess;
  out.rule = std::move(ev.rule);
  out.mean_curvature = std::move(ev.curvature);
  for (double& h : out.mean_curvature) h /= lam;
  out.rho_sigma = lam * ev.min_radius;
  out.mean_H = ev.curvature_area / (4.0 * kPi + ev.area_excess) / lam;
  return out;
}

double SolveReport::first_harmonic_norm() const {
  return std::abs(h[1]) + std::abs(h[2]) + std::abs(h[3]);
}

CmcSolution lyapunov_schmidt_solve(const MetricSpec& m, const Vec3& xi,
                                   double lambda, int degree,
                                   const CmcOptions& options) {
  check_solve_preconditions(xi, lambda, degree);
  const GraphProblem problem(m, xi, lambda, degree, options);
  const int nm = problem.mode_count();
  Eigen::VectorXd z = Eigen::VectorXd::Zero(problem.unknowns());
  auto split_eval = [&](const Eigen::VectorXd& v, bool jac, bool samples) {
    return problem.evaluate(v.head(nm), v.tail<4>(), jac, samples);
  };
  auto residual_vector = [&](const Evaluation& ev) {
    Eigen::VectorXd r(problem.equations());
    r << ev.projections, ev.volume_excess;
    return r;
  };

  SolveReport rep;
  Evaluation ev = split_eval(z, true, false);
  rep.residual_history.push_back(ev.residual());
  Eigen::MatrixXd jac = ev.jacobian;
  auto factor = [&](const Eigen::MatrixXd& j) {
    Eigen::JacobiSVD<Eigen::MatrixXd> svd(j);
    const auto& sv = svd.singularValues();
    const double cond = sv[sv.size() - 1] > 0.0
                            ? sv[0] / sv[sv.size() - 1]
                            : std::numeric_limits<double>::infinity();
    rep.jacobian_condition = std::max(rep.jacobian_condition, cond);
    if (!(cond <= options.max_condition)) {
      std::ostringstream os;
      os.precision(3);
      os << "Jacobian condition number " << cond << " exceeds "
         << options.max_condition;
      throw Error(ErrorKind::kIllConditioned, os.str());
    }
    return Eigen::PartialPivLU<Eigen::MatrixXd>(j);
  };
  Eigen::PartialPivLU<Eigen::MatrixXd> lu = factor(jac);

  int it = 0;
  while (!converged(ev, options.tolerance)) {
    if (it >= options.max_iterations) {
      throw Error(ErrorKind::kSolverFailure,
                  "Newton iteration budget exhausted; " +
                      trace_text(rep.residual_history));
    }
    ++it;
    const Eigen::VectorXd step = -lu.solve(residual_vector(ev));
    const double current = merit(ev);
    double t = 1.0;
    Evaluation trial = split_eval(z + step, false, false);
    for (int k = 0; k < options.max_halvings && !(merit(trial) < current); ++k) {
      t *= 0.5;
      trial = split_eval(z + t * step, false, false);
    }
    z += t * step;
    const double contraction = merit(trial) / current;
    ev = std::move(trial);
    rep.residual_history.push_back(ev.residual());
    const auto n = rep.residual_history.size();
    const auto window = static_cast<std::size_t>(options.divergence_window);
    if (n > window && rep.residual_history[n - 1] > rep.residual_history[n - 1 - window]) {
      throw Error(ErrorKind::kSolverFailure,
                  "Newton residual increased over " +
                      std::to_string(options.divergence_window) + " steps; " +
                      trace_text(rep.residual_history));
    }
    if (!converged(ev, options.tolerance) && contraction > options.reuse_contraction) {
      jac = split_eval(z, true, false).jacobian;
      lu = factor(jac);
    }
  }

  // Final pass with samples for the report.
  ev = split_eval(z, false, true);
  CmcSolution sol;
  sol.graph = SphericalGraph::round(xi, lambda, degree);
  sol.graph.coefficients = z.head(nm);
  rep.xi = xi;
  rep.lambda = lambda;
  rep.degree = degree;
  for (int k = 0; k < 4; ++k) rep.h[static_cast<std::size_t>(k)] = z[nm + k] / lambda;
  rep.residual_norm = ev.residual() / lambda;
  rep.volume_error = ev.volume_error();
  const double lam2 = lambda * lambda;
  rep.area = 4.0 * kPi * lam2 + lam2 * ev.area_excess;
  rep.volume = kUnitVolume * lam2 * lambda + lam2 * lambda * ev.volume_excess;
  rep.rho_sigma = lambda * ev.min_radius;
  rep.mean_H = ev.curvature_area / (4.0 * kPi + ev.area_excess) / lambda;
  rep.outlying_a = 0.5 * rep.mean_H * rep.rho_sigma;
  // Area corrected to the exact volume to first order (dA/dV = 2/lambda).
  rep.f_lambda = lam2 * (ev.area_excess - 2.0 * ev.volume_excess) / (2.0 * kPi);
  rep.newton_iterations = it;
  sol.report = std::move(rep);
  return sol;
}

double f_lambda(const MetricSpec& m, const Vec3& xi, double lambda, int degree,
                const CmcOptions& options) {
  return lyapunov_schmidt_solve(m, xi, lambda, degree, options).report.f_lambda;
}

std::vector<SolveReport> solve_many(const MetricSpec& m,
                                    const std::vector<Vec3>& centers,
                                    double lambda, int degree,
                                    const CmcOptions& options, int threads) {
  std::vector<SolveReport> out(centers.size());
  const int n = std::max(1, std::min<int>(threads, static_cast<int>(centers.size())));
  std::vector<std::exception_ptr> errors(static_cast<std::size_t>(n));
  auto work = [&](int w) {
    try {
      for (std::size_t i = static_cast<std::size_t>(w); i < centers.size();
           i += static_cast<std::size_t>(n)) {
        out[i] = lyapunov_schmidt_solve(m, centers[i], lambda, degree, options).report;
      }
    } catch (...) {
      errors[static_cast<std::size_t>(w)] = std::current_exception();
    }
  };
  if (n == 1) {
    work(0);
  } else {
    std::vector<std::thread> pool;
    for (int w = 0; w < n; ++w) pool.emplace_back(work, w);
    for (auto& t : pool) t.join();
  }
  for (auto& e : errors) {
    if (e) std::rethrow_exception(e);
  }
  return out;
}

double calibrate_multipliers(int degree, const std::vector<double>& lambdas,
                             const CmcOptions& options) {
  double c = 0.0;
  for (double lam : lambdas) {
    const SolveReport r =
        lyapunov_schmidt_solve(schwarzschild_metric(), Vec3(0.0, 0.0, 2.0), lam,
                               degree, options)
            .report;
    c = std::max(c, lam * lam * lam * r.first_harmonic_norm());
  }
  return c;
}

CmcFindResult find_cmc(const MetricSpec& m, const Vec3& xi0, double lambda,
                       int degree, const FindCmcOptions& options) {
  check_solve_preconditions(xi0, lambda, degree);
  CmcFindResult out;
  out.calibration_constant =
      options.calibration_constant > 0.0
          ? options.calibration_constant
          : calibrate_multipliers(degree, {lambda, 2.0 * lambda}, options.solve);
  out.multiplier_bound = 10.0 * out.calibration_constant / (lambda * lambda * lambda);
  out.start = lyapunov_schmidt_solve(m, xi0, lambda, degree, options.solve);

  auto objective = [&](const Vec3& xi) {
    if ((xi - xi0).cwiseAbs().maxCoeff() > options.box_half_width) {
      throw Error(ErrorKind::kBoundary, "search left the box about the start at " +
                                            point_text(xi));
    }
    if (!(xi.norm() > options.search.min_radius)) {
      throw Error(ErrorKind::kBoundary, "search reached |xi| = " +
                                            std::to_string(xi.norm()));
    }
    return f_lambda(m, xi, lambda, degree, options.solve);
  };
  out.critical = find_critical_point(objective, xi0, options.search);
  if (!out.critical.converged ||
      out.critical.classification != Classification::kStrictMin) {
    throw Error(ErrorKind::kBoundary,
                std::string("no interior strict minimum of F_lambda found (last "
                            "iterate ") +
                    point_text(out.critical.xi) + ", " +
                    to_string(out.critical.classification) + ")");
  }
  out.solution = lyapunov_schmidt_solve(m, out.critical.xi, lambda, degree, options.solve);
  return out;
}

nlohmann::json solve_report_json(const SolveReport& r) {
  nlohmann::json j;
  j["xi"] = {r.xi.x(), r.xi.y(), r.xi.z()};
  j["lambda"] = r.lambda;
  j["degree"] = r.degree;
  j["area"] = r.area;
  j["volume"] = r.volume;
  j["h"] = {r.h[0], r.h[1], r.h[2], r.h[3]};
  j["residual"] = r.residual_norm;
  j["rho_sigma"] = r.rho_sigma;
  j["mean_H"] = r.mean_H;
  j["outlying_a"] = r.outlying_a;
  j["f_lambda"] = r.f_lambda;
  j["iterations"] = r.newton_iterations;
  return j;
}

}  // namespace ocmc
