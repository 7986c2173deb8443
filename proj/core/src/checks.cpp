#include "dampwave/checks.hpp"

#include <boost/math/special_functions/bessel.hpp>

#include <chrono>
#include <cmath>
#include <numbers>
#include <random>

#include "dampwave/multipliers.hpp"
#include "dampwave/parallel.hpp"
#include "dampwave/specfun.hpp"

namespace dampwave {

namespace {

double uniform(std::mt19937_64& rng, double a, double b) {
  return a + (b - a) * (static_cast<double>(rng() >> 11) * 0x1.0p-53);
}

// Y for any real order via reflection from Boost's J and Y.
double reference_y(double nu, double x) {
  if (nu >= 0.0 || nu == std::floor(nu)) {
    if (nu < 0.0) return (static_cast<long>(-nu) % 2 ? -1.0 : 1.0) * boost::math::cyl_neumann(-nu, x);
    return boost::math::cyl_neumann(nu, x);
  }
  const double a = -nu;
  return specfun::cos_pi(a) * boost::math::cyl_neumann(a, x) + specfun::sin_pi(a) * boost::math::cyl_bessel_j(a, x);
}

double reference_j(double nu, double x) {
  if (nu >= 0.0) return boost::math::cyl_bessel_j(nu, x);
  const double a = -nu;
  if (a == std::floor(a)) return (static_cast<long>(a) % 2 ? -1.0 : 1.0) * boost::math::cyl_bessel_j(a, x);
  return specfun::cos_pi(a) * boost::math::cyl_bessel_j(a, x) - specfun::sin_pi(a) * boost::math::cyl_neumann(a, x);
}

}  // namespace

SpecfunSelftest specfun_selftest(int samples, std::uint64_t seed) {
  SpecfunSelftest rep;
  rep.samples = samples;
  std::mt19937_64 rng(seed);
  for (int i = 0; i < samples; ++i) {
    const double nu = uniform(rng, -10.0, 10.0);
    const double tau = std::pow(10.0, uniform(rng, -3.0, 3.0));
    const auto v = specfun::bessel_jy(nu, tau);
    const double jr = reference_j(nu, tau);
    const double yr = reference_y(nu, tau);
    // In the oscillatory range compare against the envelope so zeros of J do not count.
    const double env = std::max(tau > std::abs(nu) ? std::hypot(jr, yr) : std::abs(jr), 1e-300);
    const double ej = std::abs(v.j - jr) / env;
    const double ey = std::abs(v.y - yr) / std::max(tau > std::abs(nu) ? std::hypot(jr, yr) : std::abs(yr), 1e-300);
    rep.max_abs_error_j = std::max(rep.max_abs_error_j, std::abs(v.j - jr));
    if (ej > rep.max_rel_error_j) {
      rep.max_rel_error_j = ej;
      rep.worst_nu = nu;
      rep.worst_tau = tau;
    }
    rep.max_rel_error_y = std::max(rep.max_rel_error_y, ey);
    if (nu <= 9.0) {
      const auto w = specfun::bessel_jy(nu + 1.0, tau);
      const double target = 2.0 / (std::numbers::pi * tau);
      const double scale = std::max(target, std::abs(w.j * v.y) + std::abs(v.j * w.y));
      const double res = std::abs(w.j * v.y - v.j * w.y - target) / scale;
      rep.max_wronskian_residual = std::max(rep.max_wronskian_residual, res);
    }
  }
  const bool ok = rep.max_rel_error_j <= 1e-10 && rep.max_rel_error_y <= 1e-10 && rep.max_wronskian_residual <= 1e-10;
  rep.passed = ok;
  return rep;
}

std::vector<SpeedProfile> multiplier_check_profiles() {
  return {SpeedProfile::constant(), SpeedProfile::polynomial(1.5), SpeedProfile::polynomial(0.5),
          SpeedProfile::exponential(0.05)};
}

MultiplierCheck multiplier_check(int samples, std::uint64_t seed, double rel_tol, double abs_floor) {
  const auto t0 = std::chrono::steady_clock::now();
  MultiplierCheck rep;
  rep.samples = samples;
  rep.rel_tol = rel_tol;
  rep.abs_floor = abs_floor;
  const auto profiles = multiplier_check_profiles();
  struct Tuple {
    double mu, s, t, xi;
    std::size_t profile;
  };
  std::vector<Tuple> tuples(static_cast<std::size_t>(std::max(samples, 0)));
  std::mt19937_64 rng(seed);
  for (std::size_t i = 0; i < tuples.size(); ++i) {
    auto& tp = tuples[i];
    tp.mu = uniform(rng, 1.0, 5.0);
    tp.profile = i % profiles.size();
    tp.s = uniform(rng, 0.0, 2.0);
    tp.t = tp.s + uniform(rng, 0.0, 50.0);
    tp.xi = std::pow(10.0, uniform(rng, -3.0, std::log10(50.0)));
  }
  std::vector<double> err(tuples.size(), 0.0);
  rep.rows.resize(tuples.size());
  parallel_for(tuples.size(), [&](std::size_t i) {
    const auto& tp = tuples[i];
    const auto& p = profiles[tp.profile];
    const MultiplierValues got = phi_values(tp.mu, p, tp.s, tp.t, tp.xi);
    const ModeState a = mode_ode_oracle(tp.mu, p, tp.s, tp.t, tp.xi, 1.0, 0.0);
    const ModeState b = mode_ode_oracle(tp.mu, p, tp.s, tp.t, tp.xi, 0.0, 1.0);
    const cplx g[4] = {got.phi0, got.phi1, got.dphi0, got.dphi1};
    const cplx r[4] = {a.v, b.v, a.dv, b.dv};
    double worst = 0.0;
    for (int k = 0; k < 4; ++k) {
      const double tol = std::max(rel_tol * std::abs(r[k]), abs_floor);
      worst = std::max(worst, std::abs(g[k] - r[k]) / tol);
    }
    err[i] = worst;
    auto& row = rep.rows[i];
    row.mu = tp.mu;
    row.profile = p.describe();
    row.s = tp.s;
    row.t = tp.t;
    row.xi = tp.xi;
    row.zone = classify_zone(0.5, p, tp.s, tp.t, tp.xi);
    row.got = got;
    row.oracle = {a.v, b.v, a.dv, b.dv};
    row.rel_err = worst * rel_tol;
  });
  for (std::size_t i = 0; i < tuples.size(); ++i) {
    if (!(err[i] <= 1.0)) ++rep.failures;
    if (i == 0 || !(err[i] <= rep.worst.error)) {
      const auto& tp = tuples[i];
      rep.worst = {tp.mu, profiles[tp.profile].describe(), tp.s, tp.t, tp.xi, err[i]};
    }
  }
  rep.max_rel_error = rep.worst.error * rel_tol;
  rep.passed = rep.failures == 0 && samples > 0;
  rep.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  return rep;
}

}  // namespace dampwave
