#include "doctest.h"

#include <cmath>
#include <numbers>

#include "dampwave/error.hpp"
#include "dampwave/specfun.hpp"

using namespace dampwave;
using namespace dampwave::specfun;
constexpr double kPi = std::numbers::pi;

TEST_CASE("bessel_j examples") {
  CHECK(std::abs(bessel_j(0.5, kPi)) < 1e-15);
  CHECK(std::abs(bessel_j(0.0, 2.404825557695773)) < 1e-10);
  CHECK(bessel_j(0.5, 1.0) == doctest::Approx(0.6713967071418031).epsilon(1e-14));
}

TEST_CASE("bessel_y examples") {
  CHECK(std::abs(bessel_y(0.5, kPi / 2)) < 1e-15);
  CHECK(bessel_y(0.5, 1.0) == doctest::Approx(-0.4310988680183761).epsilon(1e-14));
  const double tau = 1e-6;
  const double lead = 2.0 / kPi * (std::log(tau / 2.0) + std::numbers::egamma);
  CHECK(bessel_y(0.0, tau) == doctest::Approx(lead).epsilon(1e-10));
}

TEST_CASE("hankel examples") {
  const auto h = hankel_pair(0.5, 1.0);
  CHECK(h.h_plus.real() == doctest::Approx(std::sqrt(2 / kPi) * std::sin(1.0)).epsilon(1e-14));
  CHECK(h.h_plus.imag() == doctest::Approx(-std::sqrt(2 / kPi) * std::cos(1.0)).epsilon(1e-14));
  CHECK(std::abs(std::abs(hankel_pair(0.3, 50.0).h_plus) / std::sqrt(2.0 / (kPi * 50.0)) - 1.0) < 0.02);
  const auto m = hankel_pair(-0.5, 2.0);
  CHECK(m.h_plus.real() == doctest::Approx(std::sqrt(1 / kPi) * std::cos(2.0)).epsilon(1e-14));
  CHECK(m.h_plus.imag() == doctest::Approx(std::sqrt(1 / kPi) * std::sin(2.0)).epsilon(1e-14));
}

TEST_CASE("recurrence landing on a zero of the reduced order") {
  // At tau = k pi (and (k + 1/2) pi) the downward recurrence for half-integer orders
  // hits an exact zero of J_{+-1/2}; the values must stay finite and correct.
  auto closed = [](double nu, double x) {
    const double c = std::sqrt(2.0 / (kPi * x)), s = std::sin(x), co = std::cos(x);
    if (nu == 1.5) return BesselJY{c * (s / x - co), c * (-co / x - s)};
    if (nu == -1.5) return BesselJY{c * (-co / x - s), -c * (s / x - co)};
    if (nu == 2.5) return BesselJY{c * ((3 / (x * x) - 1) * s - 3 * co / x), -c * (3 * s / x + (3 / (x * x) - 1) * co)};
    return BesselJY{c * (3 * s / x + (3 / (x * x) - 1) * co), c * ((3 / (x * x) - 1) * s - 3 * co / x)};
  };
  for (double nu : {1.5, -1.5, 2.5, -2.5}) {
    for (int k = 1; k <= 8; ++k) {
      for (double tau : {k * kPi, (k + 0.5) * kPi}) {
        const auto v = bessel_jy(nu, tau);
        const auto r = closed(nu, tau);
        CAPTURE(nu);
        CAPTURE(tau);
        CHECK(std::abs(v.j - r.j) < 1e-13);
        CHECK(std::abs(v.y - r.y) < 1e-13);
      }
    }
  }
}

TEST_CASE("errors") {
  CHECK_THROWS_AS(bessel_j(0.0, 0.0), DomainError);
  CHECK_THROWS_AS(bessel_j(0.0, -1.0), DomainError);
  CHECK_THROWS_AS(bessel_j(10.5, 1.0), UnsupportedOrder);
  CHECK_NOTHROW(bessel_j(-10.0, 1.0));
}

TEST_CASE("sin_pi exact at half integers") {
  CHECK(sin_pi(1.0) == 0.0);
  CHECK(cos_pi(0.5) == 0.0);
  CHECK(sin_pi(-2.5) == -1.0);
}
