#pragma once

#include <array>
#include <functional>
#include <memory>
#include <string>
#include <vector>

#include "ocmc/quadrature.hpp"

namespace ocmc {

// T_ij and its derivatives at one point: d1[k] = D_k T, d2[k][m] = D_k D_m T.
struct TensorJet {
  TensorJet() {
    value.setZero();
    for (auto& m : d1) m.setZero();
    for (auto& row : d2) {
      for (auto& m : row) m.setZero();
    }
  }
  Mat3 value;
  std::array<Mat3, 3> d1;
  std::array<std::array<Mat3, 3>, 3> d2;
};

// Symmetric 2-tensor field on R^3 \ {0}, homogeneous of degree -2.
class PerturbationTensor {
 public:
  virtual ~PerturbationTensor() = default;

  virtual Mat3 value(const Vec3& x) const = 0;
  // order 0, 1 or 2; entries beyond `order` are left zero.
  virtual TensorJet jet(const Vec3& x, int order) const = 0;

  // Values of t = x3/|x| where the field is not analytic. Integrators align
  // panel boundaries with these cones.
  virtual std::vector<double> angular_kinks() const { return {}; }
  virtual bool is_zero() const { return false; }
  // True when derivatives come from finite differences.
  virtual bool reduced_precision() const { return false; }
  virtual std::string describe() const = 0;
};

using TensorPtr = std::shared_ptr<const PerturbationTensor>;

struct ProfileJet {
  double value = 0.0;
  double d1 = 0.0;
  double d2 = 0.0;
};

// Scalar profile psi on [-1, 1].
class AxisymmetricProfile {
 public:
  virtual ~AxisymmetricProfile() = default;
  virtual ProfileJet eval(double t) const = 0;
  virtual std::vector<double> kinks() const { return {}; }
  virtual std::string describe() const = 0;
};

using ProfilePtr = std::shared_ptr<const AxisymmetricProfile>;

class ConstantProfile final : public AxisymmetricProfile {
 public:
  explicit ConstantProfile(double c) : c_(c) {}
  ProfileJet eval(double) const override { return {c_, 0.0, 0.0}; }
  std::string describe() const override;

 private:
  double c_;
};

// Natural cubic spline through (t, psi) samples covering [-1, 1].
class SplineProfile final : public AxisymmetricProfile {
 public:
  SplineProfile(std::vector<double> t, std::vector<double> psi);
  ProfileJet eval(double t) const override;
  std::string describe() const override;
  std::size_t size() const { return t_.size(); }

 private:
  std::vector<double> t_;
  std::vector<double> y_;
  std::vector<double> m_;  // second derivatives at the knots
};

class ZeroTensor final : public PerturbationTensor {
 public:
  Mat3 value(const Vec3& x) const override;
  TensorJet jet(const Vec3& x, int order) const override;
  bool is_zero() const override { return true; }
  std::string describe() const override { return "zero"; }
};

// c |x|^-2 delta_ij.
class IsotropicTensor final : public PerturbationTensor {
 public:
  explicit IsotropicTensor(double coefficient) : c_(coefficient) {}
  Mat3 value(const Vec3& x) const override;
  TensorJet jet(const Vec3& x, int order) const override;
  std::string describe() const override;
  double coefficient() const { return c_; }

 private:
  double c_;
};

// -2 |x|^-2 psi(x3/|x|) diag(1, 1, -2).
class AxisymmetricTensor final : public PerturbationTensor {
 public:
  explicit AxisymmetricTensor(ProfilePtr profile);
  Mat3 value(const Vec3& x) const override;
  TensorJet jet(const Vec3& x, int order) const override;
  std::vector<double> angular_kinks() const override { return profile_->kinks(); }
  std::string describe() const override;
  const AxisymmetricProfile& profile() const { return *profile_; }
  ProfilePtr profile_ptr() const { return profile_; }

 private:
  ProfilePtr profile_;
};

class SumTensor final : public PerturbationTensor {
 public:
  explicit SumTensor(std::vector<TensorPtr> terms);
  Mat3 value(const Vec3& x) const override;
  TensorJet jet(const Vec3& x, int order) const override;
  std::vector<double> angular_kinks() const override;
  bool reduced_precision() const override;
  std::string describe() const override;

 private:
  std::vector<TensorPtr> terms_;
};

// Arbitrary user field; derivatives by fourth-order central differences.
class FunctionTensor final : public PerturbationTensor {
 public:
  using Field = std::function<Mat3(const Vec3&)>;
  FunctionTensor(Field field, std::string name);
  Mat3 value(const Vec3& x) const override;
  TensorJet jet(const Vec3& x, int order) const override;
  bool reduced_precision() const override { return true; }
  std::string describe() const override { return name_; }

 private:
  Field field_;
  std::string name_;
};

double trace_ambient(const PerturbationTensor& t, const Vec3& x);
// tr of T restricted to the tangent plane of the unit sphere about `center`.
double trace_sphere(const PerturbationTensor& t, const Vec3& center,
                    const Vec3& x);
// Tangential trace of D_nu T, nu = x - center.
double normal_derivative_trace(const PerturbationTensor& t, const Vec3& center,
                               const Vec3& x);
// sum_ij D_i D_j T_ij - D_i D_i T_jj; homogeneous of degree -4.
double scalar_density(const PerturbationTensor& t, const Vec3& x);
// max_ij | sum_k x_k D_k T_ij + 2 T_ij |.
double euler_residual(const PerturbationTensor& t, const Vec3& x);

// Pieces reused by integrands that already hold a jet.
double scalar_density(const TensorJet& jet);

}  // namespace ocmc
