#pragma once

#include <memory>
#include <optional>
#include <string>
#include <vector>

namespace dampwave {

enum class SpeedKind { constant, polynomial, exponential, tabulated };

std::string to_string(SpeedKind kind);
SpeedKind speed_kind_from_string(const std::string& name);

/// Time-dependent propagation speed lambda(t) together with its primitive
/// Lambda(t) = lambda0 + int_0^t lambda.
///
/// Built-in families:
///   constant     lambda = 1,             Lambda = lambda0 + t          (lambda0 = 1)
///   polynomial   lambda = (1+t)^(q-1),   Lambda = (1+t)^q / q          (lambda0 = 1/q)
///   exponential  lambda = e^(r t),       Lambda = e^(r t) / r          (lambda0 = 1/r)
///
/// With the default lambda0 every built-in satisfies lambda'/lambda = alpha lambda/Lambda
/// with alpha = 0, (q-1)/q and 1 respectively. Overriding lambda0 is allowed; the
/// identity then no longer holds and damping falls back to the general formula.
///
/// Tabulated profiles interpolate (t, lambda) samples with a monotone cubic and
/// extend the last value as a constant past the table.
class SpeedProfile {
 public:
  static SpeedProfile constant(std::optional<double> lambda0 = {});
  static SpeedProfile polynomial(double q, std::optional<double> lambda0 = {});
  static SpeedProfile exponential(double r, std::optional<double> lambda0 = {});
  static SpeedProfile tabulated(std::vector<double> t, std::vector<double> lambda,
                                double lambda0 = 1.0);

  SpeedKind kind() const noexcept { return kind_; }
  double q() const noexcept { return q_; }
  double r() const noexcept { return r_; }
  double lambda0() const noexcept { return lambda0_; }

  /// Exponent in lambda = C Lambda^alpha. NaN for tabulated profiles or when lambda0
  /// was overridden away from the closed-form normalization.
  double alpha() const noexcept;
  bool has_structural_alpha() const noexcept;

  double speed(double t) const;
  double primitive(double t) const;
  /// lambda'(t); analytic for built-ins, central differences for tabulated.
  double speed_derivative(double t) const;

  const std::vector<double>& table_t() const noexcept { return table_t_; }
  const std::vector<double>& table_lambda() const noexcept { return table_lambda_; }

  std::string describe() const;

 private:
  struct Table;

  SpeedProfile() = default;
  void check_time(double t) const;

  SpeedKind kind_ = SpeedKind::constant;
  double q_ = 1.0;
  double r_ = 1.0;
  double lambda0_ = 1.0;
  bool default_lambda0_ = true;
  std::vector<double> table_t_;
  std::vector<double> table_lambda_;
  std::shared_ptr<const Table> table_;
};

/// Structural damping parameter mu, optionally recorded together with the raw
/// coefficient nu it was derived from.
struct DampingSpec {
  double mu = 0.0;
  std::optional<double> nu;

  static DampingSpec from_mu(double mu) { return DampingSpec{mu, std::nullopt}; }
  /// polynomial: mu = (nu-1)/q + 1; exponential: mu = nu + 1; constant: mu = nu.
  static DampingSpec from_nu(const SpeedProfile& profile, double nu);
};

double lambda_at(const SpeedProfile& profile, double t);
double Lambda_at(const SpeedProfile& profile, double t);

/// b(t) = mu lambda/Lambda - lambda'/lambda.
double damping_at(const SpeedProfile& profile, const DampingSpec& spec, double t);

/// True iff lambda'/lambda + b >= 0 for all t >= 0. Symbolic (mu >= 0) for built-ins,
/// sampled on a log grid for tabulated profiles.
bool dissipativity_check(const SpeedProfile& profile, const DampingSpec& spec);

}  // namespace dampwave
