#include "dampwave/specfun.hpp"

#include <cmath>
#include <limits>
#include <numbers>
#include <string>

#include "dampwave/error.hpp"

namespace dampwave::specfun {

namespace {

constexpr double kPi = std::numbers::pi;
constexpr double kEps = std::numeric_limits<double>::epsilon();
constexpr double kTiny = 1e-300;
constexpr int kMaxIter = 100000;

void check_arguments(double nu, double tau) {
  if (!std::isfinite(nu) || !std::isfinite(tau)) throw DomainError("Bessel: non-finite argument");
  if (tau <= 0.0) throw DomainError("Bessel: argument must be positive, got " + std::to_string(tau));
  if (std::abs(nu) > kMaxOrder) {
    throw UnsupportedOrder("Bessel: order " + std::to_string(nu) + " outside |nu| <= 10");
  }
}

bool use_asymptotic(double nu, double x) { return x >= std::max(25.0, nu * nu); }

// Hankel's expansion, valid for any real order once x is large against nu^2.
BesselJY asymptotic(double nu, double x) {
  const double mu4 = 4.0 * nu * nu;
  double p = 1.0;
  double q = 0.0;
  double term = 1.0;
  double prev = std::numeric_limits<double>::infinity();
  for (int k = 1; k < 200; ++k) {
    const double odd = 2.0 * k - 1.0;
    term *= (mu4 - odd * odd) / (8.0 * k * x);
    const double mag = std::abs(term);
    if (mag == 0.0) break;
    if (mag > prev) break;  // past the smallest term of a divergent series
    prev = mag;
    // k = 1,3,5,... feed Q with signs +,-,+; k = 2,4,... feed P with signs -,+,...
    if (k % 2 == 1) {
      q += ((k / 2) % 2 == 0 ? term : -term);
    } else {
      p += ((k / 2) % 2 == 1 ? -term : term);
    }
    if (mag < 1e-17 * (std::abs(p) + std::abs(q))) break;
  }
  // chi = x - (nu/2 + 1/4) pi, expanded so that x is reduced exactly by the libm.
  const double shift = 0.5 * nu + 0.25;
  const double cs = cos_pi(shift);
  const double ss = sin_pi(shift);
  const double cx = std::cos(x);
  const double sx = std::sin(x);
  const double cchi = cx * cs + sx * ss;
  const double schi = sx * cs - cx * ss;
  const double amp = std::sqrt(2.0 / (kPi * x));
  return {amp * (p * cchi - q * schi), amp * (p * schi + q * cchi)};
}

// (1/Gamma(1-m) - 1/Gamma(1+m)) / (2m) and the companions needed by Temme's series.
struct GammaTerms {
  double gam1, gam2, gampl, gammi;
};

GammaTerms gamma_terms(double m) {
  GammaTerms g{};
  g.gampl = 1.0 / std::tgamma(1.0 + m);
  g.gammi = 1.0 / std::tgamma(1.0 - m);
  g.gam2 = 0.5 * (g.gammi + g.gampl);
  if (std::abs(m) < 1e-3) {
    // Taylor coefficients of 1/Gamma(z): c2 = Euler gamma, c4, c6.
    constexpr double c2 = 0.5772156649015328606;
    constexpr double c4 = -0.0420026350340952355;
    constexpr double c6 = -0.0421977345555443367;
    const double m2 = m * m;
    g.gam1 = -(c2 + m2 * (c4 + m2 * c6));
  } else {
    g.gam1 = (g.gammi - g.gampl) / (2.0 * m);
  }
  return g;
}

// J_a, Y_a for a >= 0 by Temme (x < 2) / Steed (x >= 2) on the reduced order.
BesselJY temme_steed(double a, double x) {
  constexpr double kSwitch = 2.0;
  const int nl = x < kSwitch ? static_cast<int>(a + 0.5)
                             : std::max(0, static_cast<int>(a - x + 1.5));
  const double m = a - nl;
  const double m2 = m * m;
  const double xi = 1.0 / x;
  const double xi2 = 2.0 * xi;
  const double w = xi2 / kPi;

  // CF1: f = J'_a / J_a by modified Lentz.
  int isign = 1;
  double h = a * xi;
  if (h < kTiny) h = kTiny;
  double b = xi2 * a;
  double d = 0.0;
  double c = h;
  int i = 0;
  for (; i < kMaxIter; ++i) {
    b += xi2;
    d = b - d;
    if (std::abs(d) < kTiny) d = kTiny;
    c = b - 1.0 / c;
    if (std::abs(c) < kTiny) c = kTiny;
    d = 1.0 / d;
    const double del = c * d;
    h *= del;
    if (d < 0.0) isign = -isign;
    if (std::abs(del - 1.0) <= kEps) break;
  }
  if (i >= kMaxIter) throw DomainError("Bessel: continued fraction CF1 did not converge");

  // Downward recurrence from a to m, unnormalized.
  double rjl = isign * 1e-30;
  double rjpl = h * rjl;
  const double rjl1 = rjl;
  double fact = a * xi;
  for (int l = nl - 1; l >= 0; --l) {
    const double rjtemp = fact * rjl + rjpl;
    fact -= xi;
    rjpl = fact * rjtemp - rjl;
    rjl = rjtemp;
  }
  // Landing exactly on a zero of J_m: any value tiny against J'_m works, the scale cancels.
  if (rjl == 0.0) rjl = kEps * kEps * std::abs(rjpl);
  const double f = rjpl / rjl;

  double rjmu = 0.0;
  double rymu = 0.0;
  double ry1 = 0.0;
  if (x < kSwitch) {
    const double x2 = 0.5 * x;
    const double pimu = kPi * m;
    const double fct = std::abs(pimu) < kEps ? 1.0 : pimu / std::sin(pimu);
    d = -std::log(x2);
    double e = m * d;
    const double fct2 = std::abs(e) < kEps ? 1.0 : std::sinh(e) / e;
    const GammaTerms g = gamma_terms(m);
    double ff = 2.0 / kPi * fct * (g.gam1 * std::cosh(e) + g.gam2 * fct2 * d);
    e = std::exp(e);
    double p = e / (g.gampl * kPi);
    double q = 1.0 / (e * kPi * g.gammi);
    const double pimu2 = 0.5 * pimu;
    const double fct3 = std::abs(pimu2) < kEps ? 1.0 : std::sin(pimu2) / pimu2;
    const double r = kPi * pimu2 * fct3 * fct3;
    c = 1.0;
    d = -x2 * x2;
    double sum = ff + r * q;
    double sum1 = p;
    for (i = 1; i < kMaxIter; ++i) {
      ff = (i * ff + p + q) / (i * i - m2);
      c *= d / i;
      p /= i - m;
      q /= i + m;
      const double del = c * (ff + r * q);
      sum += del;
      const double del1 = c * p - i * del;
      sum1 += del1;
      if (std::abs(del) < (1.0 + std::abs(sum)) * kEps) break;
    }
    if (i >= kMaxIter) throw DomainError("Bessel: Temme series did not converge");
    rymu = -sum;
    ry1 = -sum1 * xi2;
    const double rymup = m * xi * rymu - ry1;
    rjmu = w / (rymup - f * rymu);
  } else {
    // CF2: p + iq = (J' + iY') / (J + iY) by Steed's algorithm.
    double aa = 0.25 - m2;
    double p = -0.5 * xi;
    double q = 1.0;
    const double br = 2.0 * x;
    double bi = 2.0;
    double fct = aa * xi / (p * p + q * q);
    double cr = br + q * fct;
    double ci = bi + p * fct;
    double den = br * br + bi * bi;
    double dr = br / den;
    double di = -bi / den;
    double dlr = cr * dr - ci * di;
    double dli = cr * di + ci * dr;
    double temp = p * dlr - q * dli;
    q = p * dli + q * dlr;
    p = temp;
    for (i = 1; i < kMaxIter; ++i) {
      aa += 2 * i;
      bi += 2.0;
      dr = aa * dr + br;
      di = aa * di + bi;
      if (std::abs(dr) + std::abs(di) < kTiny) dr = kTiny;
      fct = aa / (cr * cr + ci * ci);
      cr = br + cr * fct;
      ci = bi - ci * fct;
      if (std::abs(cr) + std::abs(ci) < kTiny) cr = kTiny;
      den = dr * dr + di * di;
      dr /= den;
      di /= -den;
      dlr = cr * dr - ci * di;
      dli = cr * di + ci * dr;
      temp = p * dlr - q * dli;
      q = p * dli + q * dlr;
      p = temp;
      if (std::abs(dlr - 1.0) + std::abs(dli) <= kEps) break;
    }
    if (i >= kMaxIter) throw DomainError("Bessel: continued fraction CF2 did not converge");
    const double gam = (p - f) / q;
    rjmu = std::sqrt(w / ((p - f) * gam + q));
    rjmu = std::copysign(rjmu, rjl);
    rymu = rjmu * gam;
    const double rymup = rymu * (p + q / gam);
    ry1 = m * xi * rymu - rymup;
  }

  const double scale = rjmu / rjl;
  const double ja = rjl1 * scale;
  // Upward recurrence for Y is stable.
  for (int k = 1; k <= nl; ++k) {
    const double rytemp = (m + k) * xi2 * ry1 - rymu;
    rymu = ry1;
    ry1 = rytemp;
  }
  return {ja, rymu};
}

}  // namespace

double sin_pi(double x) {
  const double r = std::fmod(x, 2.0);  // (-2, 2)
  const double twice = 2.0 * r;
  if (twice == std::nearbyint(twice)) {
    switch ((static_cast<int>(twice) % 4 + 4) % 4) {
      case 0: return 0.0;
      case 1: return 1.0;
      case 2: return 0.0;
      default: return -1.0;
    }
  }
  return std::sin(kPi * r);
}

double cos_pi(double x) {
  const double r = std::fmod(x, 2.0);
  const double twice = 2.0 * r;
  if (twice == std::nearbyint(twice)) {
    switch ((static_cast<int>(twice) % 4 + 4) % 4) {
      case 0: return 1.0;
      case 1: return 0.0;
      case 2: return -1.0;
      default: return 0.0;
    }
  }
  return std::cos(kPi * r);
}

BesselJY bessel_jy(double nu, double tau) {
  check_arguments(nu, tau);
  if (use_asymptotic(nu, tau)) return asymptotic(nu, tau);
  if (nu >= 0.0) return temme_steed(nu, tau);
  const double a = -nu;
  const BesselJY pos = temme_steed(a, tau);
  const double ca = cos_pi(a);
  const double sa = sin_pi(a);
  return {ca * pos.j - sa * pos.y, sa * pos.j + ca * pos.y};
}

double bessel_j(double nu, double tau) { return bessel_jy(nu, tau).j; }

double bessel_y(double nu, double tau) { return bessel_jy(nu, tau).y; }

HankelPair hankel_pair(double nu, double tau) {
  const BesselJY v = bessel_jy(nu, tau);
  return {{v.j, v.y}, {v.j, -v.y}};
}

}  // namespace dampwave::specfun
