#include "ocmc/quadrature.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <sstream>

#include "ocmc/errors.hpp"

namespace ocmc {

namespace {

constexpr double kPi = std::numbers::pi;

[[noreturn]] void throw_non_finite(const Vec3& x, double value) {
  std::ostringstream os;
  os.precision(17);
  os << "integrand is " << value << " at node (" << x.x() << ", " << x.y()
     << ", " << x.z() << ")";
  throw Error(ErrorKind::kEvaluation, os.str());
}

double checked(const ScalarField& f, const Vec3& x) {
  const double v = f(x);
  if (!std::isfinite(v)) throw_non_finite(x, v);
  return v;
}

void append_panel(std::vector<Node1D>& out, double a, double b, int n) {
  if (b <= a) return;
  for (const Node1D& node : gauss_legendre(n, a, b)) out.push_back(node);
}

// Panels on [a, b] refined geometrically toward each end, with the given
// number of halvings at that end (0 = no refinement).
void append_graded(std::vector<Node1D>& out, double a, double b, int levels_a,
                   int levels_b, int n) {
  if (b <= a) return;
  if (levels_a > 0 && levels_b > 0) {
    const double mid = 0.5 * (a + b);
    append_graded(out, a, mid, levels_a, 0, n);
    append_graded(out, mid, b, 0, levels_b, n);
    return;
  }
  if (levels_a == 0 && levels_b == 0) {
    append_panel(out, a, b, n);
    return;
  }
  const double length = b - a;
  double scale = 0.5;
  if (levels_b > 0) {
    double left = a;
    for (int j = 0; j < levels_b; ++j, scale *= 0.5) {
      const double right = b - length * scale;
      append_panel(out, left, right, n);
      left = right;
    }
    append_panel(out, left, b, n);
  } else {
    double right = b;
    for (int j = 0; j < levels_a; ++j, scale *= 0.5) {
      const double left = a + length * scale;
      append_panel(out, left, right, n);
      right = left;
    }
    append_panel(out, a, right, n);
  }
}

// Halvings needed so the last panel of a side of length `length` is no
// longer than the distance to a singular point just outside it.
int levels_for_distance(double distance, double length, int max_levels) {
  if (!(distance < length)) return 0;
  if (distance <= 0.0) return max_levels;
  const int levels = static_cast<int>(std::ceil(std::log2(length / distance)));
  return std::clamp(levels, 0, max_levels);
}

struct CapFrame {
  double radius;   // |center|
  Vec3 axis;       // center / |center|
  Vec3 e1;
  Vec3 e2;
  double q_rim;    // cosine of the half-opening angle of the cap
};

CapFrame make_cap_frame(const Vec3& center) {
  CapFrame frame;
  frame.radius = center.norm();
  if (!(frame.radius > 1.0)) {
    throw Error(ErrorKind::kDomain,
                "conical rule needs |center| > 1 (sphere must avoid origin)");
  }
  frame.axis = center / frame.radius;
  // Unit projection of e3 orthogonal to the axis, written without the
  // cancellation in 1 - axis_z^2.
  const Vec3& u = frame.axis;
  const double rho = std::hypot(u.x(), u.y());
  if (rho < 1e-14) {
    frame.e1 = Vec3::UnitX();
  } else {
    frame.e1 = Vec3(-u.z() * u.x() / rho, -u.z() * u.y() / rho, rho);
  }
  frame.e2 = frame.axis.cross(frame.e1);
  frame.q_rim = std::sqrt(1.0 - 1.0 / (frame.radius * frame.radius));
  return frame;
}

// Azimuthal angles (about the cap axis) at which a kink cone becomes
// tangent to a meridian or crosses the rim. The meridian integrals are only
// piecewise smooth in the azimuth, with breaks there.
std::vector<double> azimuth_breaks(const CapFrame& frame,
                                   std::span<const double> kinks) {
  std::vector<double> breaks;
  const double a = frame.axis.z();
  const double e1z = frame.e1.z();
  if (std::abs(e1z) < 1e-14) return breaks;
  const double sin_rim = 1.0 / frame.radius;
  auto add_pair = [&](double c) {
    if (std::abs(c) > 1.0) return;
    const double phi = std::acos(c);
    breaks.push_back(phi);
    breaks.push_back(2.0 * kPi - phi);
  };
  for (double tc : kinks) {
    if (tc * tc > a * a) {
      const double c = std::sqrt(tc * tc - a * a) / std::abs(e1z);
      add_pair(c);
      add_pair(-c);
    }
    add_pair((tc - a * frame.q_rim) / (e1z * sin_rim));
  }
  std::sort(breaks.begin(), breaks.end());
  breaks.erase(std::unique(breaks.begin(), breaks.end(),
                           [](double x, double y) { return y - x < 1e-13; }),
               breaks.end());
  return breaks;
}

std::vector<Node1D> azimuth_nodes(const CapFrame& frame,
                                  std::span<const double> kinks,
                                  const ConicalRuleOptions& options) {
  std::vector<Node1D> nodes;
  const std::vector<double> breaks = azimuth_breaks(frame, kinks);
  if (breaks.empty()) {
    const int n = options.azimuthal_count;
    for (int j = 0; j < n; ++j) nodes.push_back({2.0 * kPi * j / n, 2.0 * kPi / n});
    return nodes;
  }
  for (std::size_t i = 0; i < breaks.size(); ++i) {
    const double left = breaks[i];
    const double right =
        i + 1 < breaks.size() ? breaks[i + 1] : breaks[0] + 2.0 * kPi;
    append_graded(nodes, left, right, options.grading_levels,
                  options.grading_levels, options.nodes_per_panel);
  }
  return nodes;
}

// Visits every direction node of the cap. Meridians are parametrized by
// theta = alpha (1 - tau^2), alpha the half-opening angle, so the integrand is
// smooth at the cap center and the rim factor sqrt(q^2 - q_rim^2) ~ tau.
// The callback receives the unit direction w, root = sqrt(q^2 - q_rim^2),
// and the solid-angle weight.
template <typename Visit>
void for_each_cap_node(const CapFrame& frame, std::span<const double> kinks,
                       const ConicalRuleOptions& options, Visit&& visit) {
  const double alpha = std::asin(1.0 / frame.radius);
  std::vector<double> features;
  std::vector<double> tau_kinks;
  std::vector<Node1D> tau_nodes;
  for (const Node1D& az : azimuth_nodes(frame, kinks, options)) {
    const Vec3 radial = std::cos(az.x) * frame.e1 + std::sin(az.x) * frame.e2;
    // t(theta) = a cos(theta) + b sin(theta) along this meridian of the cap.
    const double a = frame.axis.z();
    const double b = radial.z();
    const double amp = std::hypot(a, b);
    const double delta = std::atan2(b, a);
    // Points where t hits a kink value or is extremal. Those inside the
    // meridian become panel breaks; those on its continuation past the cap
    // center (theta < 0) or the rim (theta > alpha) grade the nearby end.
    features.clear();
    for (double tc : kinks) {
      if (std::abs(tc) >= amp) continue;
      const double spread = std::acos(tc / amp);
      features.push_back(delta - spread);
      features.push_back(delta + spread);
    }
    if (!kinks.empty()) features.push_back(delta);
    tau_kinks.clear();
    double center_distance = 2.0;
    double rim_distance = 2.0;
    for (double f : features) {
      for (double theta : {f - 2.0 * kPi, f, f + 2.0 * kPi}) {
        if (theta > 0.0 && theta < alpha) {
          const double tau = std::sqrt(1.0 - theta / alpha);
          if (tau > 1e-12 && tau < 1.0 - 1e-12) tau_kinks.push_back(tau);
        } else if (theta <= 0.0 && theta > -alpha) {
          center_distance =
              std::min(center_distance, std::sqrt(1.0 - theta / alpha) - 1.0);
        } else if (theta >= alpha && theta < 2.0 * alpha) {
          rim_distance = std::min(rim_distance, std::sqrt(theta / alpha - 1.0));
        }
      }
    }
    std::sort(tau_kinks.begin(), tau_kinks.end());
    tau_kinks.erase(std::unique(tau_kinks.begin(), tau_kinks.end(),
                                [](double x, double y) { return y - x < 1e-14; }),
                    tau_kinks.end());
    tau_nodes.clear();
    const int levels = options.grading_levels;
    const int npp = options.nodes_per_panel;
    if (tau_kinks.empty()) {
      append_graded(tau_nodes, 0.0, 1.0,
                    levels_for_distance(rim_distance, 0.5, levels),
                    levels_for_distance(center_distance, 0.5, levels), npp);
    } else {
      append_graded(tau_nodes, 0.0, tau_kinks.front(),
                    levels_for_distance(rim_distance, 0.5 * tau_kinks.front(), levels),
                    levels, npp);
      for (std::size_t i = 0; i + 1 < tau_kinks.size(); ++i) {
        append_graded(tau_nodes, tau_kinks[i], tau_kinks[i + 1], levels, levels, npp);
      }
      const double last = tau_kinks.back();
      append_graded(tau_nodes, last, 1.0, levels,
                    levels_for_distance(center_distance, 0.5 * (1.0 - last), levels),
                    npp);
    }

    for (const Node1D& node : tau_nodes) {
      const double tau = node.x;
      const double gap = alpha * tau * tau;  // alpha - theta
      const double theta = alpha - gap;
      const double dtheta = 2.0 * alpha * tau * node.w;
      const double sin_t = std::sin(theta);
      const double root = std::sqrt(std::sin(gap) * std::sin(alpha + theta));
      const Vec3 w = std::cos(theta) * frame.axis + sin_t * radial;
      visit(w, root, sin_t * dtheta * az.w);
    }
  }
}

}  // namespace

std::vector<Node1D> gauss_legendre(int n, double a, double b) {
  if (n < 1) throw Error(ErrorKind::kInvalidArgument, "gauss_legendre: n < 1");
  std::vector<Node1D> nodes(static_cast<std::size_t>(n));
  if (n == 1) {
    nodes[0] = {0.5 * (a + b), b - a};
    return nodes;
  }
  const int half = (n + 1) / 2;
  for (int i = 0; i < half; ++i) {
    double x = std::cos(kPi * (i + 0.75) / (n + 0.5));
    double dp = 0.0;
    for (int iter = 0; iter < 100; ++iter) {
      double p0 = 1.0;
      double p1 = x;
      for (int l = 2; l <= n; ++l) {
        const double p2 = ((2.0 * l - 1.0) * x * p1 - (l - 1.0) * p0) / l;
        p0 = p1;
        p1 = p2;
      }
      dp = n * (x * p1 - p0) / (x * x - 1.0);
      const double dx = p1 / dp;
      x -= dx;
      if (std::abs(dx) < 1e-16) break;
    }
    // Recompute derivative at the converged node for the weight.
    double p0 = 1.0;
    double p1 = x;
    for (int l = 2; l <= n; ++l) {
      const double p2 = ((2.0 * l - 1.0) * x * p1 - (l - 1.0) * p0) / l;
      p0 = p1;
      p1 = p2;
    }
    dp = n * (x * p1 - p0) / (x * x - 1.0);
    const double w = 2.0 / ((1.0 - x * x) * dp * dp);
    nodes[static_cast<std::size_t>(i)] = {-x, w};
    nodes[static_cast<std::size_t>(n - 1 - i)] = {x, w};
  }
  if (n % 2 == 1) nodes[static_cast<std::size_t>(n / 2)].x = 0.0;
  const double half_len = 0.5 * (b - a);
  const double mid = 0.5 * (a + b);
  for (Node1D& node : nodes) {
    node.x = mid + half_len * node.x;
    node.w *= half_len;
  }
  return nodes;
}

QuadratureGrid::QuadratureGrid(std::vector<PolarNode> polar_nodes,
                               int azimuthal_count, int exactness_degree)
    : polar_(std::move(polar_nodes)),
      azimuthal_count_(azimuthal_count),
      exactness_degree_(exactness_degree) {
  if (polar_.empty() || azimuthal_count_ < 1) {
    throw Error(ErrorKind::kInvalidArgument, "empty quadrature grid");
  }
  directions_.reserve(polar_.size() * static_cast<std::size_t>(azimuthal_count_));
  weights_.reserve(directions_.capacity());
  const double w_phi = 2.0 * kPi / azimuthal_count_;
  for (const PolarNode& p : polar_) {
    if (!(p.weight > 0.0) || std::abs(p.z) >= 1.0) {
      throw Error(ErrorKind::kInvalidArgument, "bad polar node");
    }
    const double sin_t = std::sqrt(1.0 - p.z * p.z);
    for (int j = 0; j < azimuthal_count_; ++j) {
      const double phi = azimuth(j);
      directions_.emplace_back(sin_t * std::cos(phi), sin_t * std::sin(phi), p.z);
      weights_.push_back(p.weight * w_phi);
    }
  }
}

double QuadratureGrid::azimuth(int j) const {
  return 2.0 * kPi * j / azimuthal_count_;
}

QuadratureGrid build_sphere_grid(int n_polar) {
  if (n_polar < 2) {
    throw Error(ErrorKind::kInvalidArgument, "build_sphere_grid: n_polar < 2");
  }
  std::vector<PolarNode> polar;
  for (const Node1D& node : gauss_legendre(n_polar)) {
    polar.push_back({node.x, node.w});
  }
  return QuadratureGrid(std::move(polar), 2 * n_polar, 2 * n_polar - 1);
}

QuadratureGrid build_panel_sphere_grid(std::vector<double> breakpoints,
                                       int nodes_per_panel,
                                       int azimuthal_count) {
  if (nodes_per_panel < 2 || azimuthal_count < 4) {
    throw Error(ErrorKind::kInvalidArgument, "panel grid resolution too small");
  }
  std::sort(breakpoints.begin(), breakpoints.end());
  std::vector<double> edges{-1.0};
  for (double b : breakpoints) {
    if (b > edges.back() + 1e-14 && b < 1.0 - 1e-14) edges.push_back(b);
  }
  edges.push_back(1.0);
  std::vector<PolarNode> polar;
  for (std::size_t p = 0; p + 1 < edges.size(); ++p) {
    for (const Node1D& node :
         gauss_legendre(nodes_per_panel, edges[p], edges[p + 1])) {
      polar.push_back({node.x, node.w});
    }
  }
  const int exact = std::min(2 * nodes_per_panel - 1, azimuthal_count - 1);
  return QuadratureGrid(std::move(polar), azimuthal_count, exact);
}

QuadratureGrid grid_for_center(const QuadratureGrid& grid, const Vec3& center) {
  const double r = center.norm();
  if (r > 1.0 && r <= 1.1) {
    return build_sphere_grid(2 * grid.polar_count());
  }
  return grid;
}

RadialRule build_radial_rule(int node_count) {
  if (node_count < 1) {
    throw Error(ErrorKind::kInvalidArgument, "radial rule needs >= 1 node");
  }
  RadialRule rule;
  rule.node_count = node_count;
  for (const Node1D& node : gauss_legendre(node_count, 0.0, 1.0)) {
    rule.nodes.push_back(node.x);
    rule.weights.push_back(node.w);
  }
  return rule;
}

double integrate_sphere(const ScalarField& f, const Vec3& center,
                        const QuadratureGrid& grid) {
  const auto dirs = grid.directions();
  const auto w = grid.weights();
  double sum = 0.0;
  for (std::size_t i = 0; i < dirs.size(); ++i) {
    sum += w[i] * checked(f, center + dirs[i]);
  }
  return sum;
}

double integrate_ball(const ScalarField& f, const Vec3& center,
                      const QuadratureGrid& grid, const RadialRule& radial,
                      OriginSingular singular) {
  if (singular == OriginSingular::kYes && !(center.norm() > 1.0)) {
    throw Error(ErrorKind::kDomain,
                "ball integral of an origin-singular field needs |center| > 1");
  }
  const auto dirs = grid.directions();
  const auto w = grid.weights();
  double sum = 0.0;
  for (int k = 0; k < radial.node_count; ++k) {
    const double rho = radial.nodes[static_cast<std::size_t>(k)];
    double shell = 0.0;
    for (std::size_t i = 0; i < dirs.size(); ++i) {
      shell += w[i] * checked(f, center + rho * dirs[i]);
    }
    sum += radial.weights[static_cast<std::size_t>(k)] * rho * rho * shell;
  }
  return sum;
}

double integrate_sphere_conical(const ScalarField& f, const Vec3& center,
                                std::span<const double> kinks,
                                const ConicalRuleOptions& options) {
  const CapFrame frame = make_cap_frame(center);
  const double radius = frame.radius;
  double sum = 0.0;
  for_each_cap_node(frame, kinks, options,
                    [&](const Vec3& w, double root, double weight) {
    const double d = radius * root;
    if (!(d > 0.0)) return;
    const double mid = radius * w.dot(frame.axis);
    const double r_far = mid + d;
    const double r_near = mid - d;
    const double value = checked(f, r_far * w) * r_far * r_far +
                         checked(f, r_near * w) * r_near * r_near;
    sum += weight * value / d;
  });
  return sum;
}

std::vector<SurfaceNode> sphere_nodes_conical(const Vec3& center,
                                              std::span<const double> kinks,
                                              const ConicalRuleOptions& options) {
  const CapFrame frame = make_cap_frame(center);
  const double radius = frame.radius;
  std::vector<SurfaceNode> nodes;
  for_each_cap_node(frame, kinks, options,
                    [&](const Vec3& w, double root, double weight) {
    const double d = radius * root;
    if (!(d > 0.0)) return;
    const double mid = radius * w.dot(frame.axis);
    for (const double r : {mid + d, mid - d}) {
      nodes.push_back({r * w, weight * r * r / d});
    }
  });
  return nodes;
}

double integrate_ball_conical(const ScalarField& f, const Vec3& center,
                              std::span<const double> kinks,
                              const ConicalRuleOptions& options) {
  const CapFrame frame = make_cap_frame(center);
  const double radius = frame.radius;
  const std::vector<Node1D> chord = gauss_legendre(options.radial_nodes);
  double sum = 0.0;
  for_each_cap_node(frame, kinks, options,
                    [&](const Vec3& w, double root, double weight) {
    const double d = radius * root;
    const double mid = radius * w.dot(frame.axis);
    double line = 0.0;
    for (const Node1D& node : chord) {
      const double r = mid + d * node.x;
      line += node.w * checked(f, r * w) * r * r;
    }
    sum += weight * d * line;
  });
  return sum;
}

}  // namespace ocmc
