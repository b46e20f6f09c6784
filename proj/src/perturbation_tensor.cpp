#include "ocmc/perturbation_tensor.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "ocmc/errors.hpp"

namespace ocmc {

namespace {

void require_nonzero(const Vec3& x) {
  if (!(x.squaredNorm() > 0.0)) {
    throw Error(ErrorKind::kDomain, "tensor evaluated at the origin");
  }
}

Vec3 unit_normal(const Vec3& center, const Vec3& x) {
  const Vec3 nu = x - center;
  if (std::abs(nu.norm() - 1.0) > 1e-10 * (1.0 + center.norm())) {
    std::ostringstream os;
    os.precision(17);
    os << "point is off the unit sphere about the center: |x - center| = "
       << nu.norm();
    throw Error(ErrorKind::kInvalidArgument, os.str());
  }
  return nu / nu.norm();
}

std::string fmt(double v) {
  std::ostringstream os;
  os.precision(17);
  os << v;
  return os.str();
}

const Mat3& axis_pattern() {
  static const Mat3 m = Vec3(1.0, 1.0, -2.0).asDiagonal();
  return m;
}

}  // namespace

std::string ConstantProfile::describe() const { return "constant(" + fmt(c_) + ")"; }

SplineProfile::SplineProfile(std::vector<double> t, std::vector<double> psi)
    : t_(std::move(t)), y_(std::move(psi)) {
  const std::size_t n = t_.size();
  if (n < 3 || y_.size() != n) {
    throw Error(ErrorKind::kInvalidArgument,
                "spline profile needs >= 3 matching (t, psi) samples");
  }
  for (std::size_t i = 0; i < n; ++i) {
    if (!std::isfinite(t_[i]) || !std::isfinite(y_[i])) {
      throw Error(ErrorKind::kInvalidArgument, "spline sample is not finite");
    }
    if (i > 0 && !(t_[i] > t_[i - 1])) {
      throw Error(ErrorKind::kInvalidArgument,
                  "spline abscissae must be strictly increasing");
    }
  }
  if (t_.front() > -1.0 + 1e-12 || t_.back() < 1.0 - 1e-12) {
    throw Error(ErrorKind::kInvalidArgument, "spline samples must cover [-1, 1]");
  }
  // Natural end conditions: m_0 = m_{n-1} = 0; Thomas sweep for the rest.
  m_.assign(n, 0.0);
  std::vector<double> c(n, 0.0);
  std::vector<double> d(n, 0.0);
  for (std::size_t i = 1; i + 1 < n; ++i) {
    const double h0 = t_[i] - t_[i - 1];
    const double h1 = t_[i + 1] - t_[i];
    const double rhs = 6.0 * ((y_[i + 1] - y_[i]) / h1 - (y_[i] - y_[i - 1]) / h0);
    const double diag = 2.0 * (h0 + h1) - h0 * c[i - 1];
    c[i] = h1 / diag;
    d[i] = (rhs - h0 * d[i - 1]) / diag;
  }
  for (std::size_t i = n - 2; i >= 1; --i) {
    m_[i] = d[i] - c[i] * m_[i + 1];
  }
}

ProfileJet SplineProfile::eval(double t) const {
  const auto it = std::upper_bound(t_.begin(), t_.end(), t);
  std::size_t i = it == t_.begin() ? 0 : static_cast<std::size_t>(it - t_.begin()) - 1;
  i = std::min(i, t_.size() - 2);
  const double h = t_[i + 1] - t_[i];
  const double a = (t_[i + 1] - t) / h;
  const double b = (t - t_[i]) / h;
  ProfileJet j;
  j.value = a * y_[i] + b * y_[i + 1] +
            ((a * a * a - a) * m_[i] + (b * b * b - b) * m_[i + 1]) * h * h / 6.0;
  j.d1 = (y_[i + 1] - y_[i]) / h +
         (-(3.0 * a * a - 1.0) * m_[i] + (3.0 * b * b - 1.0) * m_[i + 1]) * h / 6.0;
  j.d2 = a * m_[i] + b * m_[i + 1];
  return j;
}

std::string SplineProfile::describe() const {
  return "table(" + std::to_string(t_.size()) + " samples)";
}

Mat3 ZeroTensor::value(const Vec3& x) const {
  require_nonzero(x);
  return Mat3::Zero();
}

TensorJet ZeroTensor::jet(const Vec3& x, int) const {
  require_nonzero(x);
  return {};
}

Mat3 IsotropicTensor::value(const Vec3& x) const {
  require_nonzero(x);
  return (c_ / x.squaredNorm()) * Mat3::Identity();
}

TensorJet IsotropicTensor::jet(const Vec3& x, int order) const {
  require_nonzero(x);
  const double r2 = x.squaredNorm();
  TensorJet j;
  j.value = (c_ / r2) * Mat3::Identity();
  if (order >= 1) {
    for (int k = 0; k < 3; ++k) {
      j.d1[k] = (-2.0 * c_ * x[k] / (r2 * r2)) * Mat3::Identity();
    }
  }
  if (order >= 2) {
    for (int k = 0; k < 3; ++k) {
      for (int m = 0; m < 3; ++m) {
        const double h = c_ * (8.0 * x[k] * x[m] / (r2 * r2 * r2) -
                               (k == m ? 2.0 / (r2 * r2) : 0.0));
        j.d2[k][m] = h * Mat3::Identity();
      }
    }
  }
  return j;
}

std::string IsotropicTensor::describe() const {
  return "isotropic(" + fmt(c_) + ")";
}

AxisymmetricTensor::AxisymmetricTensor(ProfilePtr profile)
    : profile_(std::move(profile)) {
  if (!profile_) throw Error(ErrorKind::kInvalidArgument, "null profile");
}

Mat3 AxisymmetricTensor::value(const Vec3& x) const {
  require_nonzero(x);
  const double r2 = x.squaredNorm();
  const double t = std::clamp(x.z() / std::sqrt(r2), -1.0, 1.0);
  return (-2.0 * profile_->eval(t).value / r2) * axis_pattern();
}

TensorJet AxisymmetricTensor::jet(const Vec3& x, int order) const {
  require_nonzero(x);
  // T = h(x) M with h = -2 u psi(t), u = |x|^-2, t = x3 / |x|.
  const double r2 = x.squaredNorm();
  const double r = std::sqrt(r2);
  const double u = 1.0 / r2;
  const double t = std::clamp(x.z() / r, -1.0, 1.0);
  const ProfileJet p = profile_->eval(t);
  TensorJet j;
  j.value = (-2.0 * u * p.value) * axis_pattern();
  if (order < 1) return j;

  const double r3 = r2 * r;
  Vec3 du = (-2.0 * u * u) * x;
  Vec3 dt = (-x.z() / r3) * x;
  dt.z() += 1.0 / r;
  const Vec3 dg = p.d1 * dt;
  const Vec3 dh = -2.0 * (p.value * du + u * dg);
  for (int k = 0; k < 3; ++k) j.d1[k] = dh[k] * axis_pattern();
  if (order < 2) return j;

  const double r5 = r3 * r2;
  Mat3 ddu = (8.0 * u * u * u) * (x * x.transpose());
  ddu.diagonal().array() -= 2.0 * u * u;
  Mat3 ddt = (3.0 * x.z() / r5) * (x * x.transpose());
  ddt.diagonal().array() -= x.z() / r3;
  for (int k = 0; k < 3; ++k) {
    ddt(k, 2) -= x[k] / r3;
    ddt(2, k) -= x[k] / r3;
  }
  const Mat3 ddg = p.d2 * (dt * dt.transpose()) + p.d1 * ddt;
  const Mat3 ddh = -2.0 * (p.value * ddu + du * dg.transpose() +
                           dg * du.transpose() + u * ddg);
  for (int k = 0; k < 3; ++k) {
    for (int m = 0; m < 3; ++m) j.d2[k][m] = ddh(k, m) * axis_pattern();
  }
  return j;
}

std::string AxisymmetricTensor::describe() const {
  return "axisymmetric(" + profile_->describe() + ")";
}

SumTensor::SumTensor(std::vector<TensorPtr> terms) : terms_(std::move(terms)) {
  for (const auto& t : terms_) {
    if (!t) throw Error(ErrorKind::kInvalidArgument, "null tensor term");
  }
}

Mat3 SumTensor::value(const Vec3& x) const {
  require_nonzero(x);
  Mat3 v = Mat3::Zero();
  for (const auto& t : terms_) v += t->value(x);
  return v;
}

TensorJet SumTensor::jet(const Vec3& x, int order) const {
  require_nonzero(x);
  TensorJet sum;
  for (const auto& t : terms_) {
    const TensorJet j = t->jet(x, order);
    sum.value += j.value;
    for (int k = 0; k < 3; ++k) {
      sum.d1[k] += j.d1[k];
      for (int m = 0; m < 3; ++m) sum.d2[k][m] += j.d2[k][m];
    }
  }
  return sum;
}

std::vector<double> SumTensor::angular_kinks() const {
  std::vector<double> all;
  for (const auto& t : terms_) {
    const auto k = t->angular_kinks();
    all.insert(all.end(), k.begin(), k.end());
  }
  std::sort(all.begin(), all.end());
  all.erase(std::unique(all.begin(), all.end()), all.end());
  return all;
}

bool SumTensor::reduced_precision() const {
  return std::any_of(terms_.begin(), terms_.end(),
                     [](const TensorPtr& t) { return t->reduced_precision(); });
}

std::string SumTensor::describe() const {
  std::string s = "sum(";
  for (std::size_t i = 0; i < terms_.size(); ++i) {
    if (i) s += ", ";
    s += terms_[i]->describe();
  }
  return s + ")";
}

FunctionTensor::FunctionTensor(Field field, std::string name)
    : field_(std::move(field)), name_(std::move(name)) {
  if (!field_) throw Error(ErrorKind::kInvalidArgument, "empty tensor field");
}

Mat3 FunctionTensor::value(const Vec3& x) const {
  require_nonzero(x);
  const Mat3 v = field_(x);
  return 0.5 * (v + v.transpose());
}

TensorJet FunctionTensor::jet(const Vec3& x, int order) const {
  require_nonzero(x);
  TensorJet j;
  j.value = value(x);
  if (order < 1) return j;
  const double r = x.norm();
  const double h1 = 1e-3 * r;
  auto at = [&](int k, double a, int m, double b) {
    Vec3 y = x;
    y[k] += a;
    y[m] += b;
    return value(y);
  };
  for (int k = 0; k < 3; ++k) {
    j.d1[k] = (8.0 * (at(k, h1, k, 0.0) - at(k, -h1, k, 0.0)) -
               (at(k, 2 * h1, k, 0.0) - at(k, -2 * h1, k, 0.0))) /
              (12.0 * h1);
  }
  if (order < 2) return j;
  const double h = 2e-3 * r;
  for (int k = 0; k < 3; ++k) {
    j.d2[k][k] = (-at(k, 2 * h, k, 0.0) + 16.0 * at(k, h, k, 0.0) -
                  30.0 * j.value + 16.0 * at(k, -h, k, 0.0) -
                  at(k, -2 * h, k, 0.0)) /
                 (12.0 * h * h);
    for (int m = k + 1; m < 3; ++m) {
      auto mixed = [&](double s) -> Mat3 {
        return (at(k, s, m, s) - at(k, s, m, -s) - at(k, -s, m, s) +
                at(k, -s, m, -s)) /
               (4.0 * s * s);
      };
      j.d2[k][m] = (4.0 * mixed(h) - mixed(2 * h)) / 3.0;
      j.d2[m][k] = j.d2[k][m];
    }
  }
  return j;
}

double trace_ambient(const PerturbationTensor& t, const Vec3& x) {
  return t.value(x).trace();
}

double trace_sphere(const PerturbationTensor& t, const Vec3& center,
                    const Vec3& x) {
  const Vec3 nu = unit_normal(center, x);
  const Mat3 v = t.value(x);
  return v.trace() - nu.dot(v * nu);
}

double normal_derivative_trace(const PerturbationTensor& t, const Vec3& center,
                               const Vec3& x) {
  const Vec3 nu = unit_normal(center, x);
  const TensorJet j = t.jet(x, 1);
  const Mat3 dnu = nu[0] * j.d1[0] + nu[1] * j.d1[1] + nu[2] * j.d1[2];
  return dnu.trace() - nu.dot(dnu * nu);
}

double scalar_density(const TensorJet& j) {
  double s = 0.0;
  for (int i = 0; i < 3; ++i) {
    for (int k = 0; k < 3; ++k) {
      s += j.d2[i][k](i, k);
      s -= j.d2[i][i](k, k);
    }
  }
  return s;
}

double scalar_density(const PerturbationTensor& t, const Vec3& x) {
  return scalar_density(t.jet(x, 2));
}

double euler_residual(const PerturbationTensor& t, const Vec3& x) {
  const TensorJet j = t.jet(x, 1);
  const Mat3 r = x[0] * j.d1[0] + x[1] * j.d1[1] + x[2] * j.d1[2] + 2.0 * j.value;
  return r.cwiseAbs().maxCoeff();
}

}  // namespace ocmc
