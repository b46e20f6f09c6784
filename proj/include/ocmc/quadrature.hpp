#pragma once

#include <functional>
#include <span>
#include <vector>

#include <Eigen/Dense>

namespace ocmc {

using Vec3 = Eigen::Vector3d;
using Mat3 = Eigen::Matrix3d;
using ScalarField = std::function<double(const Vec3&)>;

struct Node1D {
  double x;
  double w;
};

// Gauss-Legendre rule with n nodes on [a, b], nodes ascending.
std::vector<Node1D> gauss_legendre(int n, double a = -1.0, double b = 1.0);

struct PolarNode {
  double z;       // cosine of the colatitude
  double weight;  // weight for dz
};

// Product rule on the unit sphere: polar nodes in z = cos(theta) times a
// uniform azimuthal rule. Immutable after construction.
class QuadratureGrid {
 public:
  QuadratureGrid(std::vector<PolarNode> polar_nodes, int azimuthal_count,
                 int exactness_degree);

  const std::vector<PolarNode>& polar_nodes() const { return polar_; }
  int polar_count() const { return static_cast<int>(polar_.size()); }
  int azimuthal_count() const { return azimuthal_count_; }
  int exactness_degree() const { return exactness_degree_; }
  std::size_t size() const { return directions_.size(); }

  // Flattened node list, index = i_polar * azimuthal_count + j_azimuth.
  std::span<const Vec3> directions() const { return directions_; }
  std::span<const double> weights() const { return weights_; }
  double azimuth(int j) const;

 private:
  std::vector<PolarNode> polar_;
  int azimuthal_count_;
  int exactness_degree_;
  std::vector<Vec3> directions_;
  std::vector<double> weights_;
};

// Gauss-Legendre polar nodes times 2 * n_polar azimuthal nodes.
QuadratureGrid build_sphere_grid(int n_polar);

// Composite polar rule: Gauss-Legendre panels between consecutive entries
// of `breakpoints` (which must lie in (-1, 1); the ends -1 and 1 are added).
QuadratureGrid build_panel_sphere_grid(std::vector<double> breakpoints,
                                       int nodes_per_panel,
                                       int azimuthal_count);

// Doubles the polar resolution of a Gauss-Legendre product grid when the
// sphere center sits in the near-singular shell 1 < |center| <= 1.1.
QuadratureGrid grid_for_center(const QuadratureGrid& grid, const Vec3& center);

struct RadialRule {
  int node_count = 0;
  std::vector<double> nodes;    // on [0, 1]
  std::vector<double> weights;  // for dr, without the r^2 factor
};

RadialRule build_radial_rule(int node_count);

inline constexpr int kDefaultPolarNodes = 32;
inline constexpr int kDefaultRadialNodes = 48;

enum class OriginSingular { kNo, kYes };

// Sum of w_i f(center + y_i) over the grid. Throws kEvaluation when f is
// not finite at a node.
double integrate_sphere(const ScalarField& f, const Vec3& center,
                        const QuadratureGrid& grid);

double integrate_ball(const ScalarField& f, const Vec3& center,
                      const QuadratureGrid& grid, const RadialRule& radial,
                      OriginSingular singular = OriginSingular::kNo);

// Cone-aligned rule for spheres and balls of radius one that avoid the
// origin. Points are parametrized by their direction w from the origin
// (two intersection points per direction for the sphere, a chord for the
// ball), so integrands that depend on t = x3/|x| through a function with
// isolated non-analytic values `kinks` get panel boundaries exactly there,
// graded geometrically toward each kink.
struct ConicalRuleOptions {
  int azimuthal_count = 64;
  int nodes_per_panel = 14;
  int grading_levels = 8;
  int radial_nodes = 16;
};

double integrate_sphere_conical(const ScalarField& f, const Vec3& center,
                                std::span<const double> kinks,
                                const ConicalRuleOptions& options = {});

struct SurfaceNode {
  Vec3 point;
  double weight;  // area weight
};

// Node list of the cone-aligned sphere rule, two points per direction.
std::vector<SurfaceNode> sphere_nodes_conical(const Vec3& center,
                                              std::span<const double> kinks,
                                              const ConicalRuleOptions& options = {});

double integrate_ball_conical(const ScalarField& f, const Vec3& center,
                              std::span<const double> kinks,
                              const ConicalRuleOptions& options = {});

}  // namespace ocmc
