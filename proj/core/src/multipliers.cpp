#include "dampwave/multipliers.hpp"

#include <boost/numeric/odeint.hpp>

#include <array>
#include <cmath>
#include <numbers>

#include "dampwave/error.hpp"

namespace dampwave {

namespace {

void check_interval(double s, double t) {
  if (!std::isfinite(s) || !std::isfinite(t)) throw DomainError("propagator times must be finite");
  if (s < 0.0) throw DomainError("initial time s must be non-negative");
  if (t < s) throw DomainError("propagator requires t >= s");
}

// Basis in the tau variable itself: lambda = 1, Lambda = tau, xi = 1.
ModeBasis tau_basis(double mu, double tau) {
  const double rho = 0.5 * (1.0 - mu);
  ModeBasis b;
  b.lambda = 1.0;
  b.Lambda = tau;
  b.arg = tau;
  b.order_rho = specfun::hankel_pair(rho, tau);
  b.order_rho_minus_1 = specfun::hankel_pair(rho - 1.0, tau);
  return b;
}

}  // namespace

std::string to_string(Zone zone) {
  switch (zone) {
    case Zone::I1: return "I1";
    case Zone::I2: return "I2";
    case Zone::I3: return "I3";
  }
  return "?";
}

ModePoint ModePoint::make(const SpeedProfile& profile, double s, double t, double xi) {
  check_interval(s, t);
  if (!(xi > 0.0) || !std::isfinite(xi)) throw DomainError("ModePoint requires xi > 0");
  ModePoint p;
  p.s = s;
  p.t = t;
  p.xi = xi;
  p.sigma = profile.primitive(s) * xi;
  p.tau = profile.primitive(t) * xi;
  return p;
}

double rho_of(double mu) { return 0.5 * (1.0 - mu); }

cplx psi_det(double k, double xi, const specfun::HankelPair& at_sigma,
             const specfun::HankelPair& at_tau) {
  const cplx det = at_sigma.h_minus * at_tau.h_plus - at_sigma.h_plus * at_tau.h_minus;
  const double scale = k == 0.0 ? 1.0 : std::pow(xi, k);
  return cplx(0.0, std::numbers::pi / 4.0) * scale * det;
}

cplx psi_det(double k, double r, double delta, const ModePoint& point) {
  if (k < 0.0) throw DomainError("psi_det: k must be non-negative");
  const auto hs = specfun::hankel_pair(r, point.sigma);
  const auto ht = specfun::hankel_pair(r + delta, point.tau);
  return psi_det(k, point.xi, hs, ht);
}

ModeBasis mode_basis(double mu, const SpeedProfile& profile, double time, double xi) {
  const double rho = rho_of(mu);
  ModeBasis b;
  b.lambda = profile.speed(time);
  b.Lambda = profile.primitive(time);
  b.arg = b.Lambda * xi;
  b.order_rho = specfun::hankel_pair(rho, b.arg);
  b.order_rho_minus_1 = specfun::hankel_pair(rho - 1.0, b.arg);
  return b;
}

MultiplierValues phi_from_bases(double mu, double xi, const ModeBasis& from, const ModeBasis& to) {
  const double rho = rho_of(mu);
  const double pref = std::pow(to.Lambda, rho) / std::pow(from.Lambda, rho - 1.0);
  MultiplierValues m;
  m.phi0 = pref * psi_det(1.0, xi, from.order_rho_minus_1, to.order_rho);
  m.phi1 = -(pref / from.lambda) * psi_det(0.0, xi, from.order_rho, to.order_rho);
  m.dphi0 = to.lambda * pref * psi_det(2.0, xi, from.order_rho_minus_1, to.order_rho_minus_1);
  m.dphi1 = -(to.lambda / from.lambda) * pref * psi_det(1.0, xi, from.order_rho, to.order_rho_minus_1);
  return m;
}

MultiplierValues phi_zero_mode(double mu, const SpeedProfile& profile, double s, double t) {
  check_interval(s, t);
  const double ls = profile.primitive(s);
  const double lt = profile.primitive(t);
  const double speed_s = profile.speed(s);
  const double speed_t = profile.speed(t);
  // v' = v1 (Lambda_s/Lambda)^mu lambda/lambda_s;  int_{Ls}^{Lt} y^-mu dy computed stably near mu = 1.
  const double log_ratio = std::log(lt / ls);
  const double e = (1.0 - mu) * log_ratio;
  const double integral = std::pow(ls, 1.0 - mu) * log_ratio * (e == 0.0 ? 1.0 : std::expm1(e) / e);
  MultiplierValues m;
  m.phi0 = 1.0;
  m.phi1 = std::pow(ls, mu) / speed_s * integral;
  m.dphi0 = 0.0;
  m.dphi1 = std::pow(ls / lt, mu) * speed_t / speed_s;
  return m;
}

std::array<double, 4> taylor_transfer(double mu, double sigma, double tau) {
  if (!(sigma > 0.0) || !(tau >= sigma)) throw DomainError("taylor_transfer requires 0 < sigma <= tau");
  // Columns: the two solutions started from (1, 0) and (0, 1).
  double v[2] = {1.0, 0.0};
  double d[2] = {0.0, 1.0};
  double x = sigma;
  while (x < tau) {
    const double h = std::min(0.5 * x, tau - x);
    for (int c = 0; c < 2; ++c) {
      // a_k = c_k h^k for v = sum c_k (tau - x)^k; tau v'' + mu v' + tau v = 0 about x.
      double am1 = 0.0, a0 = v[c], a1 = d[c] * h;
      double sv = a0 + a1, sd = a1;
      const double scale = std::abs(a0) + std::abs(a1);
      for (int n = 0; n < 400; ++n) {
        const double a2 = -((n + 1.0) * (n + mu) * a1 * h + x * a0 * h * h + am1 * h * h * h) /
                          (x * (n + 1.0) * (n + 2.0));
        sv += a2;
        sd += (n + 2.0) * a2;
        am1 = a0;
        a0 = a1;
        a1 = a2;
        if (n > 4 && std::abs(a0) + std::abs(a1) + std::abs(am1) <= 1e-18 * scale) break;
      }
      v[c] = sv;
      d[c] = sd / h;
    }
    x += h;
  }
  return {v[0], v[1], d[0], d[1]};
}

MultiplierValues phi_values(double mu, const SpeedProfile& profile, double s, double t, double xi) {
  check_interval(s, t);
  if (!std::isfinite(xi) || xi < 0.0) throw DomainError("phi_values: |xi| must be finite and >= 0");
  if (xi == 0.0) return phi_zero_mode(mu, profile, s, t);
  const double rho = rho_of(mu);
  if (std::abs(rho) > specfun::kMaxOrder || std::abs(rho - 1.0) > specfun::kMaxOrder) {
    throw UnsupportedOrder("phi_values: orders rho, rho-1 exceed the supported range for mu = " +
                           std::to_string(mu));
  }
  if (s == t) return MultiplierValues{};
  const double sigma = profile.primitive(s) * xi;
  if (sigma >= kSmallArgument) {
    return phi_from_bases(mu, xi, mode_basis(mu, profile, s, xi), mode_basis(mu, profile, t, xi));
  }
  // In tau = Lambda xi the mode equation is profile free: v_tt = lambda^2 xi^2 (v'' + mu v'/tau + v).
  const double tau = profile.primitive(t) * xi;
  const double mid = std::min(tau, kSmallArgument);
  std::array<double, 4> M = taylor_transfer(mu, sigma, mid);
  cplx m00 = M[0], m01 = M[1], m10 = M[2], m11 = M[3];
  if (tau > mid) {
    const MultiplierValues h = phi_from_bases(mu, 1.0, tau_basis(mu, mid), tau_basis(mu, tau));
    const cplx n00 = h.phi0 * m00 + h.phi1 * m10, n01 = h.phi0 * m01 + h.phi1 * m11;
    const cplx n10 = h.dphi0 * m00 + h.dphi1 * m10, n11 = h.dphi0 * m01 + h.dphi1 * m11;
    m00 = n00;
    m01 = n01;
    m10 = n10;
    m11 = n11;
  }
  const double ls = profile.speed(s) * xi;
  const double lt = profile.speed(t) * xi;
  return {m00, m01 / ls, lt * m10, lt / ls * m11};
}

ModeState mode_ode_oracle(double mu, const SpeedProfile& profile, double s, double t, double xi,
                          cplx w0, cplx w1, const OdeOptions& options) {
  namespace odeint = boost::numeric::odeint;
  using State = std::array<double, 4>;  // Re v, Im v, Re v', Im v'
  check_interval(s, t);
  if (!std::isfinite(xi) || xi < 0.0) throw DomainError("mode_ode_oracle: |xi| must be >= 0");

  const DampingSpec damping = DampingSpec::from_mu(mu);
  const double xi2 = xi * xi;
  auto rhs = [&](const State& x, State& dxdt, double time) {
    const double lam = profile.speed(time);
    const double k2 = lam * lam * xi2;
    const double b = damping_at(profile, damping, time);
    dxdt[0] = x[2];
    dxdt[1] = x[3];
    dxdt[2] = -k2 * x[0] - b * x[2];
    dxdt[3] = -k2 * x[1] - b * x[3];
  };

  State x{w0.real(), w0.imag(), w1.real(), w1.imag()};
  if (t == s) return {w0, w1};

  auto stepper = odeint::make_controlled(options.abs_tol, options.rel_tol,
                                         odeint::runge_kutta_fehlberg78<State>());
  const double rate = profile.speed(s) * xi + std::abs(damping_at(profile, damping, s)) + 1.0;
  double dt = std::min(t - s, 0.05 / rate);
  double now = s;
  long steps = 0;
  while (now < t) {
    const bool last = now + dt >= t;
    if (last) dt = t - now;
    const auto result = stepper.try_step(rhs, x, now, dt);
    if (result == odeint::fail) {
      if (dt < 1e-14 * std::max(1.0, std::abs(now))) {
        throw IntegrationFailure("mode_ode_oracle: step size underflow at t = " + std::to_string(now));
      }
    } else if (last) {
      break;
    }
    if (++steps > options.max_steps) {
      throw IntegrationFailure("mode_ode_oracle: step budget exhausted at t = " + std::to_string(now));
    }
    if (!std::isfinite(x[0]) || !std::isfinite(x[2])) {
      throw IntegrationFailure("mode_ode_oracle: non-finite state at t = " + std::to_string(now));
    }
  }
  return {cplx(x[0], x[1]), cplx(x[2], x[3])};
}

Zone classify_zone(double K, const SpeedProfile& profile, double s, double t, double xi) {
  if (!(K > 0.0 && K < 1.0)) throw DomainError("zone constant K must lie in (0, 1)");
  check_interval(s, t);
  if (xi >= K / profile.primitive(s)) return Zone::I1;
  if (xi <= K / profile.primitive(t)) return Zone::I3;
  return Zone::I2;
}

}  // namespace dampwave
