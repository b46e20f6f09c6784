#include "ocmc/spherical_harmonics.hpp"

#include <cmath>
#include <numbers>

#include "ocmc/errors.hpp"

namespace ocmc {

namespace {

// x_k * p
PolyJet times_coordinate(const PolyJet& p, const Vec3& x, int k) {
  PolyJet out;
  out.value = x[k] * p.value;
  out.grad = x[k] * p.grad;
  out.grad[k] += p.value;
  out.hess = x[k] * p.hess;
  out.hess.row(k) += p.grad.transpose();
  out.hess.col(k) += p.grad;
  return out;
}

// |x|^2 * p
PolyJet times_square(const PolyJet& p, const Vec3& x) {
  PolyJet out;
  const double r2 = x.squaredNorm();
  out.value = r2 * p.value;
  out.grad = r2 * p.grad + 2.0 * p.value * x;
  out.hess = r2 * p.hess + 2.0 * (x * p.grad.transpose() + p.grad * x.transpose()) +
             2.0 * p.value * Mat3::Identity();
  return out;
}

PolyJet combine(double a, const PolyJet& p, double b, const PolyJet& q) {
  PolyJet out;
  out.value = a * p.value + b * q.value;
  out.grad = a * p.grad + b * q.grad;
  out.hess = a * p.hess + b * q.hess;
  return out;
}

}  // namespace

RealHarmonics::RealHarmonics(int lmax) : lmax_(lmax) {
  if (lmax < 0 || lmax > 60) {
    throw Error(ErrorKind::kInvalidArgument, "harmonic degree out of range");
  }
  norm_.assign(static_cast<std::size_t>(size()), 0.0);
  for (int l = 0; l <= lmax; ++l) {
    for (int m = 0; m <= l; ++m) {
      // (l - m)! / (l + m)!
      double ratio = 1.0;
      for (int j = l - m + 1; j <= l + m; ++j) ratio /= j;
      double n = std::sqrt((2.0 * l + 1.0) / (4.0 * std::numbers::pi) * ratio);
      if (m > 0) n *= std::numbers::sqrt2;
      norm_[static_cast<std::size_t>(index(l, m))] = n;
      norm_[static_cast<std::size_t>(index(l, -m))] = n;
    }
  }
}

int RealHarmonics::degree_of(int index) {
  return static_cast<int>(std::sqrt(static_cast<double>(index) + 0.5));
}

void RealHarmonics::evaluate(const Vec3& x, std::vector<PolyJet>& out) const {
  out.assign(static_cast<std::size_t>(size()), PolyJet{});
  // Unnormalized r^l P_l^m(cos) cos(m phi) and sin(m phi), no Condon-Shortley
  // phase.
  PolyJet c_mm;
  c_mm.value = 1.0;
  PolyJet s_mm;
  for (int m = 0; m <= lmax_; ++m) {
    if (m > 0) {
      const double f = 2.0 * m - 1.0;
      const PolyJet c_next = combine(f, times_coordinate(c_mm, x, 0), -f,
                                     times_coordinate(s_mm, x, 1));
      const PolyJet s_next = combine(f, times_coordinate(c_mm, x, 1), f,
                                     times_coordinate(s_mm, x, 0));
      c_mm = c_next;
      s_mm = s_next;
    }
    for (int family = 0; family < (m == 0 ? 1 : 2); ++family) {
      const int sign = family == 0 ? 1 : -1;
      PolyJet prev;  // degree l - 1
      PolyJet cur = family == 0 ? c_mm : s_mm;
      for (int l = m; l <= lmax_; ++l) {
        const auto idx = static_cast<std::size_t>(index(l, sign * m));
        PolyJet& dst = out[idx];
        dst.value = norm_[idx] * cur.value;
        dst.grad = norm_[idx] * cur.grad;
        dst.hess = norm_[idx] * cur.hess;
        if (l == lmax_) break;
        // (l - m + 1) R_{l+1} = (2l + 1) z R_l - (l + m) r^2 R_{l-1}
        PolyJet next = combine((2.0 * l + 1.0) / (l - m + 1.0),
                               times_coordinate(cur, x, 2),
                               -(l + m) / (l - m + 1.0), times_square(prev, x));
        prev = cur;
        cur = next;
      }
    }
  }
}

void RealHarmonics::values(const Vec3& x, std::vector<double>& out) const {
  out.assign(static_cast<std::size_t>(size()), 0.0);
  const double r2 = x.squaredNorm();
  double c_mm = 1.0;
  double s_mm = 0.0;
  for (int m = 0; m <= lmax_; ++m) {
    if (m > 0) {
      const double f = 2.0 * m - 1.0;
      const double c_next = f * (x.x() * c_mm - x.y() * s_mm);
      const double s_next = f * (x.y() * c_mm + x.x() * s_mm);
      c_mm = c_next;
      s_mm = s_next;
    }
    for (int family = 0; family < (m == 0 ? 1 : 2); ++family) {
      const int sign = family == 0 ? 1 : -1;
      double prev = 0.0;
      double cur = family == 0 ? c_mm : s_mm;
      for (int l = m; l <= lmax_; ++l) {
        const auto idx = static_cast<std::size_t>(index(l, sign * m));
        out[idx] = norm_[idx] * cur;
        const double next =
            ((2.0 * l + 1.0) * x.z() * cur - (l + m) * r2 * prev) / (l - m + 1.0);
        prev = cur;
        cur = next;
      }
    }
  }
}

void tangent_frame(const Vec3& y, Vec3& a1, Vec3& a2) {
  const Vec3 helper = std::abs(y.x()) < 0.6 ? Vec3::UnitX() : Vec3::UnitY();
  a1 = (helper - helper.dot(y) * y).normalized();
  a2 = y.cross(a1);
}

ChartJet chart_jet(const PolyJet& p, int degree, const Vec3& a1, const Vec3& a2) {
  ChartJet j;
  j.value = p.value;
  j.d1 = p.grad.dot(a1);
  j.d2 = p.grad.dot(a2);
  j.d11 = a1.dot(p.hess * a1) - degree * p.value;
  j.d12 = a1.dot(p.hess * a2);
  j.d22 = a2.dot(p.hess * a2) - degree * p.value;
  return j;
}

}  // namespace ocmc
