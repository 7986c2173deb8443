#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <iostream>

#include "properties.hpp"

namespace {

void check_property(const char* name) {
  const auto r = dampwave::props::run_property(dampwave::props::find_property(name));
  std::cout << r.module << ": " << r.name << "  " << r.cases << " cases, " << r.failures << " failed, " << r.seconds
            << " s\n";
  INFO(r.first_failure);
  CHECK(r.cases >= 200);
  CHECK(r.failures == 0);
}

}  // namespace

TEST_CASE("profiles: Lambda strictly increasing") { check_property("Lambda strictly increasing"); }
TEST_CASE("profiles: central difference of Lambda gives lambda") { check_property("central difference of Lambda gives lambda"); }
TEST_CASE("profiles: b + lambda'/lambda = mu lambda/Lambda") { check_property("b + lambda'/lambda = mu lambda/Lambda"); }
TEST_CASE("specfun: Wronskian J Y' - J' Y = 2/(pi tau)") { check_property("Wronskian J Y' - J' Y = 2/(pi tau)"); }
TEST_CASE("specfun: Bessel ODE residual of J") { check_property("Bessel ODE residual of J"); }
TEST_CASE("specfun: H- is the conjugate of H+") { check_property("H- is the conjugate of H+"); }
TEST_CASE("specfun: half-integer orders match closed forms") { check_property("half-integer orders match closed forms"); }
TEST_CASE("multipliers: agreement with the mode ODE oracle") { check_property("agreement with the mode ODE oracle"); }
TEST_CASE("multipliers: identity at t = s") { check_property("identity at t = s"); }
TEST_CASE("multipliers: multipliers are real") { check_property("multipliers are real"); }
TEST_CASE("multipliers: dphi matches the t central difference") { check_property("dphi matches the t central difference"); }
TEST_CASE("multipliers: semigroup composition") { check_property("semigroup composition"); }
TEST_CASE("spectral_solver: transform round trip and Parseval") { check_property("transform round trip and Parseval"); }
TEST_CASE("spectral_solver: Hermitian symmetry through steps") { check_property("Hermitian symmetry through steps"); }
TEST_CASE("spectral_solver: constant-speed energy non-increasing") { check_property("constant-speed energy non-increasing"); }
TEST_CASE("spectral_solver: finite propagation inside the cone") { check_property("finite propagation inside the cone"); }
TEST_CASE("spectral_solver: mu = 2 free-wave reduction") { check_property("mu = 2 free-wave reduction"); }
TEST_CASE("spectral_solver: Duhamel midpoint is second order") { check_property("Duhamel midpoint is second order"); }
TEST_CASE("analysis: fit invariant under track scaling") { check_property("fit invariant under track scaling"); }
TEST_CASE("analysis: exponent catalog is pure and matches formulas") { check_property("exponent catalog is pure and matches formulas"); }
TEST_CASE("analysis: GN ratio invariant under amplitude") { check_property("GN ratio invariant under amplitude"); }
TEST_CASE("cli: config canonical round trip") { check_property("config canonical round trip"); }
TEST_CASE("cli: simulation output is deterministic") { check_property("simulation output is deterministic"); }
#ifdef DAMPWAVE_CLI_PATH
TEST_CASE("cli: exit codes") { check_property("exit codes"); }
#endif
