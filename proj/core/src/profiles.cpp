#include "dampwave/profiles.hpp"

#include <math.h>  // boost 1.74 pchip calls unqualified isnan

#include <boost/math/interpolators/pchip.hpp>

#include <algorithm>
#include <cmath>
#include <sstream>

#include "dampwave/error.hpp"

namespace dampwave {

namespace {

void require_positive(double v, const char* what) {
  if (!std::isfinite(v) || v <= 0.0) {
    throw DomainError(std::string(what) + " must be positive and finite");
  }
}

// Three-point Gauss-Legendre on [a, b]; exact for the cubic pieces of the interpolant.
template <class F>
double gauss3(const F& f, double a, double b) {
  static constexpr double kNode = 0.7745966692414833770;
  const double c = 0.5 * (a + b);
  const double h = 0.5 * (b - a);
  return h * (5.0 / 9.0 * f(c - kNode * h) + 8.0 / 9.0 * f(c) + 5.0 / 9.0 * f(c + kNode * h));
}

}  // namespace

struct SpeedProfile::Table {
  boost::math::interpolators::pchip<std::vector<double>> spline;
  std::vector<double> t;
  std::vector<double> cumulative;  // int_0^{t_k} lambda

  Table(std::vector<double> ts, std::vector<double> ls)
      : spline(std::vector<double>(ts), std::vector<double>(ls)), t(std::move(ts)) {
    cumulative.assign(t.size(), 0.0);
    for (std::size_t k = 1; k < t.size(); ++k) {
      cumulative[k] = cumulative[k - 1] + gauss3(spline, t[k - 1], t[k]);
    }
  }

  double value(double x) const {
    if (x >= t.back()) return spline(t.back());
    return spline(x);
  }

  double integral(double x) const {
    if (x >= t.back()) return cumulative.back() + (x - t.back()) * spline(t.back());
    const auto it = std::upper_bound(t.begin(), t.end(), x);
    const std::size_t k = static_cast<std::size_t>(std::distance(t.begin(), it)) - 1;
    return cumulative[k] + gauss3(spline, t[k], x);
  }
};

std::string to_string(SpeedKind kind) {
  switch (kind) {
    case SpeedKind::constant: return "constant";
    case SpeedKind::polynomial: return "polynomial";
    case SpeedKind::exponential: return "exponential";
    case SpeedKind::tabulated: return "tabulated";
  }
  return "unknown";
}

SpeedKind speed_kind_from_string(const std::string& name) {
  if (name == "constant") return SpeedKind::constant;
  if (name == "polynomial") return SpeedKind::polynomial;
  if (name == "exponential") return SpeedKind::exponential;
  if (name == "tabulated" || name == "custom") return SpeedKind::tabulated;
  throw DomainError("unknown profile kind '" + name + "'");
}

SpeedProfile SpeedProfile::constant(std::optional<double> lambda0) {
  SpeedProfile p;
  p.kind_ = SpeedKind::constant;
  p.lambda0_ = lambda0.value_or(1.0);
  require_positive(p.lambda0_, "lambda0");
  p.default_lambda0_ = true;  // alpha = 0 holds for every lambda0
  return p;
}

SpeedProfile SpeedProfile::polynomial(double q, std::optional<double> lambda0) {
  require_positive(q, "polynomial exponent q");
  SpeedProfile p;
  p.kind_ = SpeedKind::polynomial;
  p.q_ = q;
  p.lambda0_ = lambda0.value_or(1.0 / q);
  require_positive(p.lambda0_, "lambda0");
  p.default_lambda0_ = !lambda0 || *lambda0 == 1.0 / q;
  return p;
}

SpeedProfile SpeedProfile::exponential(double r, std::optional<double> lambda0) {
  require_positive(r, "exponential rate r");
  SpeedProfile p;
  p.kind_ = SpeedKind::exponential;
  p.r_ = r;
  p.lambda0_ = lambda0.value_or(1.0 / r);
  require_positive(p.lambda0_, "lambda0");
  p.default_lambda0_ = !lambda0 || *lambda0 == 1.0 / r;
  return p;
}

SpeedProfile SpeedProfile::tabulated(std::vector<double> t, std::vector<double> lambda,
                                     double lambda0) {
  if (t.size() != lambda.size()) throw DomainError("tabulated profile: t and lambda differ in length");
  if (t.size() < 4) throw DomainError("tabulated profile: need at least 4 samples");
  if (t.front() != 0.0) throw DomainError("tabulated profile: first sample must be at t = 0");
  for (std::size_t k = 0; k < t.size(); ++k) {
    if (!std::isfinite(t[k]) || !std::isfinite(lambda[k])) {
      throw DomainError("tabulated profile: non-finite sample");
    }
    if (lambda[k] <= 0.0) throw DomainError("tabulated profile: lambda must be positive");
    if (k > 0 && t[k] <= t[k - 1]) throw DomainError("tabulated profile: t must be increasing");
  }
  require_positive(lambda0, "lambda0");
  SpeedProfile p;
  p.kind_ = SpeedKind::tabulated;
  p.lambda0_ = lambda0;
  p.default_lambda0_ = false;
  p.table_t_ = t;
  p.table_lambda_ = lambda;
  p.table_ = std::make_shared<const Table>(std::move(t), std::move(lambda));
  return p;
}

double SpeedProfile::alpha() const noexcept {
  if (!has_structural_alpha()) return std::nan("");
  switch (kind_) {
    case SpeedKind::constant: return 0.0;
    case SpeedKind::polynomial: return (q_ - 1.0) / q_;
    case SpeedKind::exponential: return 1.0;
    case SpeedKind::tabulated: break;
  }
  return std::nan("");
}

bool SpeedProfile::has_structural_alpha() const noexcept {
  return kind_ != SpeedKind::tabulated && default_lambda0_;
}

void SpeedProfile::check_time(double t) const {
  if (!std::isfinite(t)) throw DomainError("time must be finite");
  if (t < 0.0) throw DomainError("time must be non-negative");
}

double SpeedProfile::speed(double t) const {
  check_time(t);
  switch (kind_) {
    case SpeedKind::constant: return 1.0;
    case SpeedKind::polynomial: return std::pow(1.0 + t, q_ - 1.0);
    case SpeedKind::exponential: return std::exp(r_ * t);
    case SpeedKind::tabulated: return table_->value(t);
  }
  return 1.0;
}

double SpeedProfile::primitive(double t) const {
  check_time(t);
  switch (kind_) {
    case SpeedKind::constant: return lambda0_ + t;
    case SpeedKind::polynomial:
      if (default_lambda0_) return std::pow(1.0 + t, q_) / q_;
      return lambda0_ + (std::pow(1.0 + t, q_) - 1.0) / q_;
    case SpeedKind::exponential:
      if (default_lambda0_) return std::exp(r_ * t) / r_;
      return lambda0_ + std::expm1(r_ * t) / r_;
    case SpeedKind::tabulated: return lambda0_ + table_->integral(t);
  }
  return lambda0_ + t;
}

double SpeedProfile::speed_derivative(double t) const {
  check_time(t);
  switch (kind_) {
    case SpeedKind::constant: return 0.0;
    case SpeedKind::polynomial: return (q_ - 1.0) * std::pow(1.0 + t, q_ - 2.0);
    case SpeedKind::exponential: return r_ * std::exp(r_ * t);
    case SpeedKind::tabulated: {
      const double h = std::max(1e-6, 1e-8 * t);
      const double lo = std::max(0.0, t - h);
      return (table_->value(t + h) - table_->value(lo)) / (t + h - lo);
    }
  }
  return 0.0;
}

std::string SpeedProfile::describe() const {
  std::ostringstream os;
  os.precision(17);
  os << to_string(kind_);
  switch (kind_) {
    case SpeedKind::polynomial: os << "(q=" << q_ << ")"; break;
    case SpeedKind::exponential: os << "(r=" << r_ << ")"; break;
    case SpeedKind::tabulated: os << "(" << table_t_.size() << " samples)"; break;
    case SpeedKind::constant: break;
  }
  return os.str();
}

DampingSpec DampingSpec::from_nu(const SpeedProfile& profile, double nu) {
  DampingSpec spec;
  spec.nu = nu;
  switch (profile.kind()) {
    case SpeedKind::constant: spec.mu = nu; break;
    case SpeedKind::polynomial: spec.mu = (nu - 1.0) / profile.q() + 1.0; break;
    case SpeedKind::exponential: spec.mu = nu + 1.0; break;
    case SpeedKind::tabulated:
      throw DomainError("nu is only defined for the built-in constant/polynomial/exponential families");
  }
  return spec;
}

double lambda_at(const SpeedProfile& profile, double t) { return profile.speed(t); }

double Lambda_at(const SpeedProfile& profile, double t) { return profile.primitive(t); }

double damping_at(const SpeedProfile& profile, const DampingSpec& spec, double t) {
  const double lam = profile.speed(t);
  const double big = profile.primitive(t);
  if (profile.has_structural_alpha()) return (spec.mu - profile.alpha()) * lam / big;
  return spec.mu * lam / big - profile.speed_derivative(t) / lam;
}

bool dissipativity_check(const SpeedProfile& profile, const DampingSpec& spec) {
  if (profile.kind() != SpeedKind::tabulated) return spec.mu >= 0.0;
  // lambda'/lambda + b over a log grid reaching past the table.
  const double t_end = 10.0 * std::max(1.0, profile.table_t().back());
  constexpr int kPerDecade = 20;
  std::vector<double> ts{0.0};
  for (double e = -6.0; std::pow(10.0, e) <= t_end; e += 1.0 / kPerDecade) ts.push_back(std::pow(10.0, e));
  for (double t : ts) {
    const double lam = profile.speed(t);
    const double sum = profile.speed_derivative(t) / lam + damping_at(profile, spec, t);
    if (sum < -1e-12 * std::abs(spec.mu * lam / profile.primitive(t))) return false;
  }
  return true;
}

}  // namespace dampwave
