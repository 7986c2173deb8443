#pragma once

#include <complex>

namespace dampwave::specfun {

/// Largest |order| accepted by the Bessel routines.
inline constexpr double kMaxOrder = 10.0;

struct BesselJY {
  double j = 0.0;
  double y = 0.0;
};

/// Values of H+_nu(tau) = J + iY and H-_nu(tau) = J - iY.
struct HankelPair {
  std::complex<double> h_plus;
  std::complex<double> h_minus;
};

/// J_nu(tau) and Y_nu(tau) together, for real |nu| <= 10 and tau > 0.
///
/// tau >= max(25, nu^2) uses Hankel's asymptotic expansion; below that the order is
/// reduced to |mu| <= 1/2 and evaluated with Temme's series (tau < 2) or Steed's
/// continued fraction (tau >= 2), then carried back to nu by recurrence. Negative
/// orders go through the reflection formulas. Integer and near-integer orders need no
/// special casing on either path.
///
/// Throws DomainError for tau <= 0 or non-finite input, UnsupportedOrder for |nu| > 10.
BesselJY bessel_jy(double nu, double tau);

double bessel_j(double nu, double tau);
double bessel_y(double nu, double tau);
HankelPair hankel_pair(double nu, double tau);

/// sin(pi x) and cos(pi x), exact at multiples of 1/2.
double sin_pi(double x);
double cos_pi(double x);

}  // namespace dampwave::specfun
