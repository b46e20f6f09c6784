#include "ocmc/special_functions.hpp"

#include <cmath>

#include "ocmc/errors.hpp"

namespace ocmc {

double legendre(int l, double z) {
  if (l < 0) throw Error(ErrorKind::kInvalidArgument, "legendre: l < 0");
  if (!(std::abs(z) <= 1.0)) {
    throw Error(ErrorKind::kInvalidArgument, "legendre: |z| > 1");
  }
  if (l == 0) return 1.0;
  double p0 = 1.0;
  double p1 = z;
  for (int k = 1; k < l; ++k) {
    const double p2 = ((2.0 * k + 1.0) * z * p1 - k * p0) / (k + 1.0);
    p0 = p1;
    p1 = p2;
  }
  return p1;
}

std::vector<double> legendre_all(int lmax, double z) {
  if (lmax < 0) throw Error(ErrorKind::kInvalidArgument, "legendre: lmax < 0");
  if (!(std::abs(z) <= 1.0)) {
    throw Error(ErrorKind::kInvalidArgument, "legendre: |z| > 1");
  }
  std::vector<double> p(static_cast<std::size_t>(lmax) + 1);
  p[0] = 1.0;
  if (lmax >= 1) p[1] = z;
  for (int k = 1; k < lmax; ++k) {
    p[k + 1] = ((2.0 * k + 1.0) * z * p[k] - k * p[k - 1]) / (k + 1.0);
  }
  return p;
}

double series_coefficient(SeriesKind kind, int l) {
  switch (kind) {
    case SeriesKind::kA: return 1.0 / (l + 2.0);
    case SeriesKind::kB: return 1.0 / (2.0 * l + 1.0);
    case SeriesKind::kC: return (l - 1.0) / ((l + 2.0) * (2.0 * l + 1.0));
  }
  return 0.0;
}

double series_closed_form(SeriesKind kind, double r) {
  if (!(r > 1.0)) throw Error(ErrorKind::kDomain, "series: r <= 1");
  const double a = -1.0 - r * r * std::log1p(-1.0 / (r * r));
  const double b = std::log1p(2.0 / (r - 1.0)) / (2.0 * r);
  switch (kind) {
    case SeriesKind::kA: return a;
    case SeriesKind::kB: return b;
    case SeriesKind::kC: return a - b;
  }
  return 0.0;
}

double series_truncated(SeriesKind kind, double r, int terms) {
  if (!(r > 1.0)) throw Error(ErrorKind::kDomain, "series: r <= 1");
  if (terms < 1) throw Error(ErrorKind::kInvalidArgument, "series: terms < 1");
  const double q = 1.0 / (r * r);
  // Sum smallest terms first.
  double sum = 0.0;
  for (int l = terms - 1; l >= 0; --l) {
    sum += series_coefficient(kind, l) * std::pow(q, l + 1);
  }
  return sum;
}

int default_series_terms(double r) {
  if (!(r > 1.0)) throw Error(ErrorKind::kDomain, "series: r <= 1");
  const double n = std::ceil(std::log(1e14) / (2.0 * std::log(r)));
  if (!(n < 1e4)) return 10000;
  return std::max(1, static_cast<int>(n));
}

GeneratingResidual generating_residual(const Vec3& xi, const Vec3& y, int L) {
  const double r = xi.norm();
  if (!(r > 1.0)) {
    throw Error(ErrorKind::kDomain, "generating series diverges for |xi| <= 1");
  }
  if (L < 0) throw Error(ErrorKind::kInvalidArgument, "generating: L < 0");
  const double z = std::clamp(-y.dot(xi) / (y.norm() * r), -1.0, 1.0);
  const std::vector<double> p = legendre_all(L, z);
  double s0 = 0.0;
  double s1 = 0.0;
  double rp = 1.0 / r;
  for (int l = 0; l <= L; ++l) {
    s0 += rp * p[l];
    s1 += (l + 1.0) * rp * p[l];
    rp /= r;
  }
  const Vec3 x = y + xi;
  const double d = x.norm();
  return {std::abs(1.0 / d - s0), std::abs(xi.dot(x) / (d * d * d) - s1)};
}

}  // namespace ocmc
