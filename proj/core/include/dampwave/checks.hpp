#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "dampwave/multipliers.hpp"
#include "dampwave/profiles.hpp"

namespace dampwave {

/// Bessel routines against an independent reference (Boost.Math) and the Wronskian
/// J_{nu+1} Y_nu - J_nu Y_{nu+1} = 2/(pi tau) on random (nu, tau).
struct SpecfunSelftest {
  int samples = 0;
  double max_rel_error_j = 0.0;  // against |J_ref|, or hypot(J_ref, Y_ref) when tau > |nu|
  double max_abs_error_j = 0.0;
  double max_rel_error_y = 0.0;
  double max_wronskian_residual = 0.0;  // relative to 2/(pi tau)
  double worst_nu = 0.0;
  double worst_tau = 0.0;
  bool passed = false;
};

/// nu uniform in [-10, 10], tau log-uniform in [1e-3, 1e3]; pass when values agree to
/// 1e-10 relative (1e-12 absolute near zeros) and the Wronskian to 1e-10.
SpecfunSelftest specfun_selftest(int samples, std::uint64_t seed);

struct MultiplierCheckCase {
  double mu = 0.0;
  std::string profile;
  double s = 0.0;
  double t = 0.0;
  double xi = 0.0;
  double error = 0.0;  // worst entry error over its tolerance
};

struct MultiplierCheckRow {
  double mu = 0.0;
  std::string profile;
  double s = 0.0;
  double t = 0.0;
  double xi = 0.0;
  Zone zone = Zone::I1;
  MultiplierValues got;
  MultiplierValues oracle;
  double rel_err = 0.0;  // max over the four entries of |got - ref| / max(|ref|, abs_floor / rel_tol)
};

struct MultiplierCheck {
  int samples = 0;
  int failures = 0;
  double max_rel_error = 0.0;  // worst |got - ref| / max(|ref|, abs_floor / rel_tol)
  double rel_tol = 1e-6;
  double abs_floor = 1e-9;
  MultiplierCheckCase worst;
  std::vector<MultiplierCheckRow> rows;
  double seconds = 0.0;
  bool passed = false;
};

/// Built-in profiles used by the random multiplier check: constant, polynomial q = 1.5
/// and 0.5, exponential r = 0.05.
std::vector<SpeedProfile> multiplier_check_profiles();

/// phi_values against mode_ode_oracle on random (mu in [1,5], profile, s in [0,2],
/// t - s in [0,50], xi log-uniform in [1e-3, 50]); an entry passes when
/// |got - ref| <= max(rel_tol |ref|, abs_floor). Parallel over samples.
/// Zones in the rows use K = 0.5.
MultiplierCheck multiplier_check(int samples, std::uint64_t seed, double rel_tol = 1e-6, double abs_floor = 1e-9);

}  // namespace dampwave
