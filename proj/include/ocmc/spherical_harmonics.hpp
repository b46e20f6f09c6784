#pragma once

#include <vector>

#include "ocmc/quadrature.hpp"

namespace ocmc {

// Value, gradient and Hessian in R^3 of a homogeneous polynomial.
struct PolyJet {
  double value = 0.0;
  Vec3 grad = Vec3::Zero();
  Mat3 hess = Mat3::Zero();
};

// Real orthonormal spherical harmonics up to degree lmax, written as
// harmonic homogeneous polynomials (solid harmonics) so that derivatives
// are exact. Index of (l, m), -l <= m <= l, is l^2 + l + m; m < 0 holds the
// sine family.
class RealHarmonics {
 public:
  explicit RealHarmonics(int lmax);

  int lmax() const { return lmax_; }
  int size() const { return (lmax_ + 1) * (lmax_ + 1); }
  static int index(int l, int m) { return l * l + l + m; }
  static int degree_of(int index);

  // Jets of every basis polynomial at x (any point of R^3).
  void evaluate(const Vec3& x, std::vector<PolyJet>& out) const;
  // Values only.
  void values(const Vec3& x, std::vector<double>& out) const;

 private:
  int lmax_;
  std::vector<double> norm_;  // per index
};

// Height jet of a function on the unit sphere at y in the gnomonic chart
// s -> (y + s1 a1 + s2 a2) / |...|, with (a1, a2, y) a right-handed
// orthonormal frame: value, first derivatives and second derivatives.
struct ChartJet {
  double value = 0.0;
  double d1 = 0.0;
  double d2 = 0.0;
  double d11 = 0.0;
  double d12 = 0.0;
  double d22 = 0.0;
};

// Orthonormal tangent pair with a1 x a2 = y.
void tangent_frame(const Vec3& y, Vec3& a1, Vec3& a2);

// Chart jet of the restriction of a degree-l homogeneous polynomial.
ChartJet chart_jet(const PolyJet& p, int degree, const Vec3& a1, const Vec3& a2);

}  // namespace ocmc
