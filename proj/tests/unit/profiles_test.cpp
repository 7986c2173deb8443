#include "doctest.h"

#include <cmath>

#include "dampwave/error.hpp"
#include "dampwave/profiles.hpp"

using namespace dampwave;

TEST_CASE("speed values") {
  CHECK(lambda_at(SpeedProfile::constant(), 7.0) == 1.0);
  CHECK(lambda_at(SpeedProfile::polynomial(2.0), 1.0) == doctest::Approx(2.0).epsilon(1e-15));
  CHECK(lambda_at(SpeedProfile::exponential(0.5), 2.0) == doctest::Approx(std::exp(1.0)).epsilon(1e-15));
  CHECK_THROWS_AS(lambda_at(SpeedProfile::constant(), NAN), DomainError);
}

TEST_CASE("primitive values") {
  CHECK(Lambda_at(SpeedProfile::constant(), 3.0) == 4.0);
  CHECK(Lambda_at(SpeedProfile::polynomial(2.0), 1.0) == doctest::Approx(2.0).epsilon(1e-15));
  CHECK(Lambda_at(SpeedProfile::exponential(1.0), 0.0) == doctest::Approx(1.0).epsilon(1e-15));
}

TEST_CASE("damping values") {
  CHECK(damping_at(SpeedProfile::constant(), DampingSpec::from_mu(2.0), 0.0) == doctest::Approx(2.0));
  const auto ex = SpeedProfile::exponential(1.0);
  const auto spec = DampingSpec::from_nu(ex, 3.0);
  CHECK(spec.mu == doctest::Approx(4.0));
  for (double t : {0.0, 1.0, 5.0}) CHECK(damping_at(ex, spec, t) == doctest::Approx(3.0).epsilon(1e-12));
  CHECK(damping_at(SpeedProfile::polynomial(2.0), DampingSpec::from_mu(1.0), 0.0) == doctest::Approx(1.0));
}

TEST_CASE("structural exponent") {
  CHECK(SpeedProfile::constant().alpha() == 0.0);
  CHECK(SpeedProfile::polynomial(2.0).alpha() == doctest::Approx(0.5));
  CHECK(SpeedProfile::exponential(0.3).alpha() == 1.0);
  CHECK(std::isnan(SpeedProfile::polynomial(2.0, 3.0).alpha()));
}

TEST_CASE("dissipativity") {
  for (const auto& p : {SpeedProfile::constant(), SpeedProfile::polynomial(1.5), SpeedProfile::exponential(0.2)}) {
    CHECK(dissipativity_check(p, DampingSpec::from_mu(2.0)));
    CHECK(dissipativity_check(p, DampingSpec::from_mu(0.0)));
  }
  CHECK_FALSE(dissipativity_check(SpeedProfile::constant(), DampingSpec::from_mu(-1.0)));
}

TEST_CASE("tabulated profile interpolates and extends") {
  const auto p = SpeedProfile::tabulated({0.0, 1.0, 2.0, 3.0}, {1.0, 2.0, 3.0, 3.0});
  CHECK(p.speed(1.0) == doctest::Approx(2.0));
  CHECK(p.speed(10.0) == doctest::Approx(3.0));
  CHECK(p.speed(2.5) >= 3.0 - 1e-12);
  CHECK(p.primitive(0.0) == doctest::Approx(1.0));
  CHECK(p.primitive(12.0) == doctest::Approx(p.primitive(3.0) + 27.0));
}
