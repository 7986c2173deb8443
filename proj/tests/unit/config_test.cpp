#include "doctest.h"

#include <string>

#include "dampwave/config.hpp"
#include "dampwave/error.hpp"

using namespace dampwave;

namespace {

bool any_contains(const std::vector<std::string>& v, const std::string& needle) {
  for (const auto& s : v) {
    if (s.find(needle) != std::string::npos) return true;
  }
  return false;
}

std::vector<std::string> violations(const std::string& json) {
  try {
    validate_config(json);
  } catch (const ValidationError& e) {
    return e.violations();
  }
  return {};
}

}  // namespace

TEST_CASE("minimal config gets defaults") {
  const auto c = validate_config(R"({"profile": {"kind": "constant"}, "mu": 3, "grid": {"n": 1, "N": 256}, "T": 10})");
  CHECK(c.K == 0.5);
  CHECK(c.profile.lambda0() == 1.0);
  CHECK(c.window == 0.5);
  CHECK(c.damping.mu == 3.0);
  // Domain rule: R0 + (Lambda(T) - lambda0) + 2 = 8 + 10 + 2.
  CHECK(c.grid.L >= 20.0);
}

TEST_CASE("nu is converted per profile") {
  const auto c =
      validate_config(R"({"profile": {"kind": "exponential", "r": 1}, "nu": 3, "grid": {"n": 1, "N": 64}, "T": 1})");
  CHECK(c.damping.mu == doctest::Approx(4.0));
  REQUIRE(c.damping.nu);
  CHECK(*c.damping.nu == 3.0);
}

TEST_CASE("admissibility warning for n = 3, p = 4") {
  const auto c = validate_config(R"({"profile": {"kind": "constant"}, "mu": 5, "grid": {"n": 3, "N": 16}, "T": 1,
      "nonlinearity": {"form": "signed_power", "p": 4}})");
  CHECK(any_contains(c.warnings, "p"));
  CHECK_FALSE(c.warnings.empty());
}

TEST_CASE("violations") {
  CHECK(any_contains(violations(R"({"profile": {"kind": "constant"}, "mu": 3, "nu": 2, "grid": {"n": 1, "N": 64}, "T": 1})"),
                     "mu"));
  CHECK(any_contains(violations(R"({"profile": {"kind": "constant", "mu": 2}, "mu": 3, "grid": {"n": 1, "N": 64}, "T": 1})"),
                     "both"));
  // Every violation is listed, not only the first.
  const auto v = violations(R"({"profile": {"kind": "spiral"}, "grid": {"n": 5, "N": 64}})");
  CHECK(v.size() >= 3);
  CHECK(!violations(R"({"profile": {"kind": "constant"}, "mu": 3, "grid": {"n": 1, "N": 64, "L": 1}, "T": 1})").empty());
  CHECK(!violations(R"({"profile": {"kind": "constant"}, "mu": 3, "grid": {"n": 1, "N": 64}, "T": 1, "colour": 1})")
             .empty());
  CHECK_THROWS_AS(validate_config("{not json"), ValidationError);
}

TEST_CASE("damping inside the profile object") {
  const auto c =
      validate_config(R"({"profile": {"kind": "polynomial", "q": 2, "mu": 3}, "grid": {"n": 1, "N": 64}, "T": 1})");
  CHECK(c.damping.mu == 3.0);
}

TEST_CASE("canonical form and run id") {
  const auto a = validate_config(R"({"T": 2, "mu": 3, "grid": {"N": 64, "n": 1}, "profile": {"kind": "constant"}})");
  const auto b = validate_config(R"({"profile": {"kind": "constant"}, "grid": {"n": 1, "N": 64}, "mu": 3.0, "T": 2.0})");
  CHECK(canonical_json(a) == canonical_json(b));
  CHECK(run_id(a) == run_id(b));
  CHECK(run_id(a).size() == 16);
  CHECK(canonical_json(validate_config(canonical_json(a))) == canonical_json(a));
  CHECK(fnv1a_hex("") == "cbf29ce484222325");
}

TEST_CASE("scan config") {
  const auto s = validate_scan_config(R"({"n": 1, "N": 256, "profile": {"kind": "constant"}, "mu": 4,
      "p": [2.2, 4], "eps": [0.1], "T": 5})");
  CHECK(s.p_values.size() == 2);
  CHECK(s.eps_values.size() == 1);
  CHECK_THROWS_AS(validate_scan_config(R"({"n": 1, "N": 256, "profile": {"kind": "constant"}, "mu": 4, "T": 5})"),
                  ValidationError);
}
