#pragma once

#include <array>
#include <complex>
#include <string>

#include "dampwave/profiles.hpp"
#include "dampwave/specfun.hpp"

namespace dampwave {

using cplx = std::complex<double>;

/// Frequency evaluation point of the propagator from time s to time t.
/// sigma = Lambda(s)|xi|, tau = Lambda(t)|xi|.
struct ModePoint {
  double s = 0.0;
  double t = 0.0;
  double xi = 0.0;
  double sigma = 0.0;
  double tau = 0.0;

  static ModePoint make(const SpeedProfile& profile, double s, double t, double xi);
};

/// Entries of the 2x2 propagator (v, v_t)(s) -> (v, v_t)(t) for one frequency.
struct MultiplierValues {
  cplx phi0{1.0, 0.0};
  cplx phi1{0.0, 0.0};
  cplx dphi0{0.0, 0.0};
  cplx dphi1{1.0, 0.0};
};

enum class Zone { I1, I2, I3 };
std::string to_string(Zone zone);

/// Hankel pairs of orders rho - 1 and rho at one time: everything the
/// propagator needs from that end of the interval.
struct ModeBasis {
  double lambda = 1.0;   // lambda(time)
  double Lambda = 1.0;   // Lambda(time)
  double arg = 0.0;      // Lambda(time) |xi|
  specfun::HankelPair order_rho;
  specfun::HankelPair order_rho_minus_1;
};

/// Below this Lambda(s)|xi| the Hankel cross products cancel badly; phi_values
/// continues the solution by Taylor series up to this argument first.
inline constexpr double kSmallArgument = 2.0;

/// Transfer matrix of v'' + (mu/tau) v' + v = 0 from (v, v') at sigma to tau,
/// 0 < sigma <= tau, by Taylor steps of at most half the distance to the origin.
/// Row-major: {dv/dv0, dv/dv0', dv'/dv0, dv'/dv0'}.
std::array<double, 4> taylor_transfer(double mu, double sigma, double tau);

double rho_of(double mu);

/// (i pi / 4) |xi|^k [H-_r(sigma) H+_{r+delta}(tau) - H+_r(sigma) H-_{r+delta}(tau)].
cplx psi_det(double k, double r, double delta, const ModePoint& point);
cplx psi_det(double k, double xi, const specfun::HankelPair& at_sigma,
             const specfun::HankelPair& at_tau);

ModeBasis mode_basis(double mu, const SpeedProfile& profile, double time, double xi);

/// Propagator from precomputed bases at s (from) and t (to); xi > 0.
MultiplierValues phi_from_bases(double mu, double xi, const ModeBasis& from, const ModeBasis& to);

/// Closed form for the xi = 0 mode: v'' + b v' = 0.
MultiplierValues phi_zero_mode(double mu, const SpeedProfile& profile, double s, double t);

/// Exact multipliers Phi0, Phi1, d/dt Phi0, d/dt Phi1 at (s, t, |xi|).
/// Hankel cross products at every large argument, taylor_transfer below kSmallArgument.
MultiplierValues phi_values(double mu, const SpeedProfile& profile, double s, double t, double xi);

struct ModeState {
  cplx v;
  cplx dv;
};

struct OdeOptions {
  double abs_tol = 1e-13;
  double rel_tol = 1e-13;
  long max_steps = 50'000'000;
};

/// Integrates v'' + lambda(t)^2 xi^2 v + b(t) v' = 0 from (w0, w1) at s to time t with
/// an adaptive 7(8) Runge-Kutta-Fehlberg scheme. Independent of the Bessel route.
ModeState mode_ode_oracle(double mu, const SpeedProfile& profile, double s, double t, double xi,
                          cplx w0, cplx w1, const OdeOptions& options = {});

/// I1: |xi| >= K/Lambda(s); I3: |xi| <= K/Lambda(t); I2 otherwise. Boundaries go to the
/// lower index.
Zone classify_zone(double K, const SpeedProfile& profile, double s, double t, double xi);

}  // namespace dampwave
