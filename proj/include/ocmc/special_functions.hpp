#pragma once

#include <utility>
#include <vector>

#include "ocmc/quadrature.hpp"

namespace ocmc {

// P_l(z) by the three-term recurrence. Throws kInvalidArgument for |z| > 1.
double legendre(int l, double z);

// P_0(z) ... P_lmax(z).
std::vector<double> legendre_all(int lmax, double z);

// The three power series in r^-2 that appear in the area expansion:
//   A = sum_l r^(-2l-2) / (l+2)
//   B = sum_l r^(-2l-2) / (2l+1)
//   C = sum_l (l-1) / ((l+2)(2l+1)) r^(-2l-2)   (= A - B termwise)
enum class SeriesKind { kA, kB, kC };

double series_coefficient(SeriesKind kind, int l);
double series_closed_form(SeriesKind kind, double r);
double series_truncated(SeriesKind kind, double r, int terms);

// Smallest term count with r^(-2 terms) < 1e-14, capped at 10^4.
int default_series_terms(double r);

struct GeneratingResidual {
  double inverse_distance;  // | |y+xi|^-1 - partial sum |
  double radial_derivative; // | |y+xi|^-3 <xi, y+xi> - partial sum |
};

// Residuals of the Legendre generating-function expansion of |y + xi|^-1
// and of its radial derivative in xi, truncated after degree L.
GeneratingResidual generating_residual(const Vec3& xi, const Vec3& y, int L);

}  // namespace ocmc
