#pragma once

#include <cstdint>
#include <limits>
#include <optional>
#include <string>
#include <vector>

#include "dampwave/profiles.hpp"
#include "dampwave/series.hpp"
#include "dampwave/spectral.hpp"

namespace dampwave {

// ------------------------------------------------------------------ decay fits

enum class DecayModel { pure_power, power_log };
std::string to_string(DecayModel model);

/// norm ~ C Lambda^-alpha                          (pure_power)
/// norm ~ C Lambda^-alpha (log(e + Lambda))^c_log   (power_log)
struct DecayFit {
  double alpha = 0.0;
  double c_log = 0.0;  // 0 for pure_power
  DecayModel model = DecayModel::pure_power;
  double residual = 0.0;  // RMS in log space of the selected model
  double t_lo = 0.0;
  double t_hi = 0.0;

  double alpha_pure = 0.0;
  double residual_pure = 0.0;
  double alpha_log = 0.0;
  double c_log_free = 0.0;
  double residual_log = 0.0;
  std::size_t samples = 0;
  double lambda_ratio = 0.0;  // Lambda(t_hi) / Lambda(t_lo)
};

/// power_log must beat pure_power by this factor on the residual.
inline constexpr double kLogImprovement = 0.9;
/// A selected log factor must have |c_log| at least this large; smaller values are
/// lower-order corrections to the power law, not a logarithm.
inline constexpr double kMinLogExponent = 0.25;
/// Below this pure-power residual the data is an exact power law and no log is reported.
inline constexpr double kExactFitResidual = 1e-12;

/// Least squares of log(norm) against log Lambda on the trailing `window_fraction` of
/// samples (by count). power_log is selected when its residual is below kLogImprovement
/// times the pure residual and |c_log| >= kMinLogExponent. Needs >= 10 samples and Lambda(t_hi)/Lambda(t_lo) >= 10 in the
/// window. Throws DomainError for a missing track or bad window, DegenerateFit when a
/// window value is zero, negative or non-finite.
DecayFit fit_decay(const NormSeries& series, const std::string& track, double window_fraction = 0.5);

/// Same fit on raw arrays.
DecayFit fit_decay(const std::vector<double>& times, const std::vector<double>& lambda_big,
                   const std::vector<double>& values, double window_fraction = 0.5);

/// L2 and energy of the linear solution from radial data at the given times, computed
/// by linear_norm_radial (parallel over times). Tracks "L2" and "energy".
NormSeries linear_decay_series(double mu, const SpeedProfile& profile, int n, const RadialSpectrum& data,
                               const std::vector<double>& times, const QuadratureOptions& options = {});

/// 0, then `per_decade` log-spaced times from t_first to t_last inclusive.
std::vector<double> log_times(double t_first, double t_last, int per_decade, bool include_zero = true);

// ------------------------------------------------------------------ exponents

enum class BoundKind { lower_strict, lower_inclusive, upper_inclusive, value };
std::string to_string(BoundKind kind);

struct Threshold {
  std::string id;
  std::string formula;
  BoundKind kind = BoundKind::value;
  double value = std::numeric_limits<double>::quiet_NaN();
  bool applicable = false;
  std::string condition;  // validity condition of the formula
  std::string reason;     // why it is not applicable (empty when applicable)
};

struct AdmissibleRange {
  double lower = 1.0;
  bool lower_inclusive = false;
  double upper = std::numeric_limits<double>::infinity();
  bool upper_inclusive = false;
  bool empty = false;
  bool single_point = false;
  std::string description;
};

struct DecayRates {
  double solution = 0.0;  // L2 rate n(1/m - 1/2)
  double energy = 0.0;    // energy rate
  bool energy_log = false;
  bool applicable = false;
  std::string note;
};

struct ExponentReport {
  int n = 1;
  double gamma = 0.0;
  double m = 1.0;
  double mu = 0.0;
  std::vector<Threshold> thresholds;
  /// Global existence range for data small in D_m (m = 2: H^1 x L^2), intersected with
  /// the energy bound for n >= 3.
  AdmissibleRange admissible;
  DecayRates rates;

  const Threshold& get(const std::string& id) const;
};

/// 1 + m(2+gamma)/n.
double critical_exponent(int n, double gamma, double m);
/// 2n/(n+mu-2).
double ell_exponent(int n, double mu);
/// Every closed-form threshold with its validity condition; never throws for finite input.
ExponentReport exponent_catalog(int n, double gamma, double m, double mu);

// ------------------------------------------------------------------ Gagliardo-Nirenberg

/// n(1/2 - 1/q); q in [2, 2n/(n-2)] for n >= 3, q in [2, inf) otherwise (RangeError).
double theta_gn(double q, int n);

struct GnSampleSpec {
  int samples = 100;
  std::uint64_t seed = 7;
  int N = 0;             // 0: 256 / 128 / 32 for n = 1 / 2 / 3
  double L = 0.0;        // 0: 16 / 16 / 8
  double width = 1.5;
  double scale = 5.0;    // amplitude factor for the homogeneity check
  double C_cap = 100.0;
};

struct GnReport {
  int n = 1;
  double q = 4.0;
  double theta = 0.0;
  std::vector<double> ratios;
  int skipped = 0;
  double max_R = 0.0;
  double min_R = 0.0;
  double max_scale_deviation = 0.0;     // max |R(c u) - R(u)| / R(u)
  double max_dilation_deviation = 0.0;  // max |R(u(./2) on 2N, 2L) - R(u)| / R(u)
  double C_cap = 100.0;
  bool within_cap = false;
};

/// R = ||u||_q / (||u||_2^(1-theta) ||grad u||_2^theta) over seeded mode-mix fields.
GnReport gn_verify(const GnSampleSpec& spec, double q, int n);
/// R for one field on a grid (gradient spectral). Returns NaN for the zero field.
double gn_ratio(const Grid& grid, const std::vector<double>& u, double q);

// ------------------------------------------------------------------ scans

enum class Outcome { global_decay, blowup, undecided };
std::string to_string(Outcome outcome);

struct ScanConfig {
  int n = 1;
  int N = 1024;
  double L = 0.0;  // 0: domain rule per cell
  SpeedProfile profile = SpeedProfile::constant();
  double mu = 4.0;
  double m = 1.0;  // data class, used for the critical exponent marker
  NonlinearForm form = NonlinearForm::absolute_power;
  NonlinearScaling scaling = NonlinearScaling::plain;
  DataKind data = DataKind::gaussian;
  double width = 1.0;
  double velocity_factor = 0.0;
  std::uint64_t seed = 0;
  double T = 50.0;
  double dt_max = 0.05;
  double cfl = 0.25;
  int outputs_per_decade = 20;
  double first_output = 0.1;
  double blowup_factor = 1e6;
  double window = 0.5;
  double residual_threshold = 0.05;
  double memory_cap_bytes = 4e9;

  std::vector<double> p_values;
  std::vector<double> eps_values;
  std::vector<double> mu_values;     // empty: {mu}
  std::vector<double> gamma_values;  // empty: {0}

  void validate() const;
};

struct ScanCell {
  std::size_t index = 0;
  double p = 0.0;
  double eps = 0.0;
  double mu = 0.0;
  double gamma = 0.0;
  double L = 0.0;
  Outcome outcome = Outcome::undecided;
  double t_star = std::numeric_limits<double>::quiet_NaN();
  double alpha = std::numeric_limits<double>::quiet_NaN();
  double residual = std::numeric_limits<double>::quiet_NaN();
  double last_decade_slope = std::numeric_limits<double>::quiet_NaN();
  bool at_threshold = false;
  double p_crit = 0.0;
  std::string reason;
  long steps = 0;
  NormSeries series;
};

struct ScanResult {
  std::vector<double> p_axis;
  std::vector<double> eps_axis;
  std::vector<double> mu_axis;
  std::vector<double> gamma_axis;
  std::vector<ScanCell> cells;  // index = ((mu * G + gamma) * E + eps) * P + p
  /// Monotonicity probe: cells that fall back from global_decay after two consecutive
  /// global_decay cells along increasing p. Reported only.
  std::vector<std::string> monotonicity_violations;
};

/// Bytes a single simulation on this grid is expected to hold.
double memory_estimate(int n, int N);

/// Runs every cell on a worker pool; per-cell failures become undecided with a reason.
ScanResult run_scan(const ScanConfig& config, unsigned workers = 0);

/// outcomes.csv, cell_<index>.csv per cell and manifest.json under `directory`.
void write_scan(const std::string& directory, const ScanConfig& config, const ScanResult& result,
                const std::string& config_json = "{}");

}  // namespace dampwave
