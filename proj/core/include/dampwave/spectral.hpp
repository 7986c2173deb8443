#pragma once

#include <array>
#include <complex>
#include <cstdint>
#include <functional>
#include <map>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "dampwave/multipliers.hpp"
#include "dampwave/profiles.hpp"
#include "dampwave/quadrature.hpp"
#include "dampwave/series.hpp"

namespace dampwave {

/// Periodic box [-L, L)^n with N points per axis.
struct Grid {
  int n = 1;
  int N = 256;
  double L = 16.0;

  double h() const noexcept { return 2.0 * L / N; }
  double cell_volume() const noexcept;
  std::size_t size() const noexcept;           // N^n
  std::size_t spectral_size() const noexcept;  // N^(n-1) (N/2 + 1)
  /// Coordinate of index i along one axis.
  double x(int i) const noexcept { return -L + i * h(); }
  /// Largest |xi| on the grid, sqrt(n) pi/h.
  double max_wavenumber() const noexcept;
  /// Throws DomainError unless n in {1,2,3}, N >= 16 is a power of two and L > 0.
  void validate() const;
};

/// Real-to-complex transforms on one grid. Plan creation is serialized internally,
/// execution is thread-safe for distinct objects.
class Fft {
 public:
  explicit Fft(const Grid& grid);
  ~Fft();
  Fft(const Fft&) = delete;
  Fft& operator=(const Fft&) = delete;

  void forward(const std::vector<double>& in, std::vector<cplx>& out);
  /// Normalized inverse: inverse(forward(u)) == u.
  void inverse(const std::vector<cplx>& in, std::vector<double>& out);

 private:
  struct Impl;
  std::unique_ptr<Impl> impl_;
};

/// Wavenumber tables for the r2c layout of a grid.
struct SpectralLayout {
  explicit SpectralLayout(const Grid& grid);

  Grid grid;
  std::vector<std::array<double, 3>> k;  // signed wavenumber per spectral index
  std::vector<double> xi;                 // |k|
  std::vector<int> group;                 // index into distinct_xi
  std::vector<double> distinct_xi;        // sorted distinct |k|, distinct_xi[0] == 0
  std::vector<bool> keep;                 // 2/3-rule dealiasing mask
  std::vector<double> weight;             // Parseval multiplicity (1 or 2)
};

/// (u, u_t) at time t on a grid, with both representations kept in sync.
struct FieldState {
  Grid grid;
  double t = 0.0;
  std::vector<double> u;
  std::vector<double> ut;
  std::vector<cplx> u_hat;
  std::vector<cplx> ut_hat;

  static FieldState from_physical(const Grid& grid, double t, std::vector<double> u,
                                  std::vector<double> ut, Fft& fft);
  void sync_physical(Fft& fft);
  void sync_spectral(Fft& fft);
};

enum class NonlinearForm { signed_power, absolute_power, zero };
enum class NonlinearScaling { plain, structural };

std::string to_string(NonlinearForm form);
std::string to_string(NonlinearScaling scaling);
NonlinearForm nonlinear_form_from_string(const std::string& s);
NonlinearScaling nonlinear_scaling_from_string(const std::string& s);

/// f(t, u) = g(t) |u|^(p-1) u  or  g(t) |u|^p, with g = (1+t)^gamma (plain) or
/// lambda(t)^2 Lambda(t)^gamma (structural).
struct NonlinearitySpec {
  NonlinearForm form = NonlinearForm::zero;
  double p = 2.0;
  double gamma = 0.0;
  NonlinearScaling scaling = NonlinearScaling::plain;

  /// Hard errors (p <= 1, gamma < -2); admissibility is reported by warnings().
  void validate() const;
  /// p > 1 + 2/(n-2) for n >= 3.
  std::vector<std::string> warnings(int n) const;
};

/// Source term evaluated pointwise: out[i] = f(t, u[i]).
using SourceFn = std::function<void(double t, const std::vector<double>& u, std::vector<double>& out)>;

SourceFn make_source(const NonlinearitySpec& spec, const SpeedProfile& profile);

struct WeightedNormSpec {
  bool enabled = false;
  double mu = 0.0;
};

enum class DataKind { gaussian, bump, mode_mix };
std::string to_string(DataKind kind);
DataKind data_kind_from_string(const std::string& s);

struct InitialData {
  std::vector<double> u0;
  std::vector<double> u1;
  /// Radius outside which the data is negligible (<= 1e-14 of its peak).
  double R0 = 0.0;
};

/// Radius of negligible support for a data kind: 8w for gaussian and mode_mix, w for bump.
double data_radius(DataKind kind, double width);

/// gaussian: eps exp(-|x|^2/(2w^2));  bump: eps exp(1 - 1/(1 - |x|^2/w^2)) inside |x| < w;
/// mode_mix: a gaussian envelope times a seeded random mix of cosines.
/// u1 = velocity_factor * u0 (0 by default). Throws DomainError if w >= L/4.
InitialData make_initial_data(const Grid& grid, DataKind kind, double amplitude, double width,
                              std::uint64_t seed, double velocity_factor = 0.0);

/// Multipliers at one mode group between two precomputed time levels.
struct TimeLevel {
  double t = 0.0;
  double lambda = 1.0;
  double Lambda = 1.0;
  std::vector<ModeBasis> basis;  // per distinct |xi|; entry 0 unused (xi = 0)
};

TimeLevel make_time_level(double mu, const SpeedProfile& profile, const SpectralLayout& layout, double t);

/// Exact propagator between two levels for every distinct |xi|.
std::vector<MultiplierValues> propagators(double mu, const SpeedProfile& profile,
                                          const SpectralLayout& layout, const TimeLevel& from,
                                          const TimeLevel& to);

/// Advances every mode exactly by the linear propagator. dt = 0 leaves the state unchanged.
void linear_step(FieldState& state, const SpeedProfile& profile, double mu, double dt, Fft& fft,
                 const SpectralLayout& layout);

/// Exact linear propagation plus the midpoint Duhamel term
///   dt * Phi1(t+dt, t+dt/2) F(t+dt/2, u_pred)
/// where u_pred is the linearly propagated field at t+dt/2. F is dealiased by the
/// 2/3 rule. Levels at t, t+dt/2, t+dt may be passed in to reuse Bessel work.
struct DuhamelLevels {
  const TimeLevel* start = nullptr;
  const TimeLevel* mid = nullptr;
  const TimeLevel* end = nullptr;
};
void duhamel_step(FieldState& state, const SpeedProfile& profile, double mu, const SourceFn& source,
                  double dt, Fft& fft, const SpectralLayout& layout, DuhamelLevels levels = {});

struct NormSample {
  std::map<double, double> Lm;  // m -> ||u||_{L^m}
  double L2 = 0.0;
  double H1_seminorm = 0.0;  // ||grad u||_{L^2}
  double H1 = 0.0;           // (||u||^2 + ||grad u||^2)^(1/2)
  double energy = 0.0;       // ||(lambda grad u, u_t)||_{L^2}
  double Linf = 0.0;
  double ut_L2 = 0.0;
  bool weighted = false;
  double weighted_L2 = 0.0;  // (int |u|^2 omega^2)^(1/2)
  double weighted_H1 = 0.0;
  bool weighted_saturated = false;
};

/// Grid quadrature of every tracked norm; gradients are spectral. Weighted norms use
/// omega = exp((mu/2)|x|^2/Lambda(t)^2) and are flagged saturated (values +inf) when
/// omega^2 at the box corner would exceed 1e300.
NormSample norms(const FieldState& state, const SpeedProfile& profile, const std::vector<double>& m_list,
                 const WeightedNormSpec& weighted, Fft& fft, const SpectralLayout& layout);

/// ||u||_{L^m} + ||u||_{H^1} + ||v||_{L^m} + ||v||_{L^2}.
double data_norm_Dm(const FieldState& state, double m, Fft& fft, const SpectralLayout& layout);

struct SimulationConfig {
  Grid grid;
  SpeedProfile profile = SpeedProfile::constant();
  double mu = 2.0;
  NonlinearitySpec nonlinearity;
  double T = 10.0;
  double dt_max = 0.05;
  double cfl = 0.25;
  int outputs_per_decade = 20;
  double first_output = 0.1;
  std::vector<double> m_list{1.0};
  WeightedNormSpec weighted;
  double blowup_factor = 1e6;
  /// Radius of the data support used for the light-cone check (<= 0 disables it).
  double R0 = 0.0;
  double light_cone_tolerance = 1e-8;
};

struct BlowupRecord {
  double t_star = 0.0;
  long step = 0;
  double Linf = 0.0;
  std::string reason;
};

struct SimulationResult {
  NormSeries series;
  FieldState final_state;
  std::optional<BlowupRecord> blowup;
  long steps = 0;
  /// Largest |u| outside the cone over the peak, across output times.
  double light_cone_ratio = 0.0;
  bool light_cone_ok = true;
};

/// Series track name of the L^m norm: "L1", "L1.5", ...
std::string lm_track_name(double m);

/// Output times: 0, then log-spaced from first_output to T (outputs_per_decade per decade).
std::vector<double> output_times(double first_output, double T, int per_decade);

/// L >= R0 + (Lambda(T) - lambda0) + 2.
double required_half_width(const SpeedProfile& profile, double R0, double T);

using SnapshotHook = std::function<void(const FieldState&, std::size_t output_index)>;

/// Runs to T or blow-up. Blow-up (||u||_inf > blowup_factor * initial peak, or a
/// non-finite value) is checked after every step and is a result, not an error.
SimulationResult simulate(const SimulationConfig& config, const InitialData& data,
                          const SnapshotHook& snapshot = {});

/// Radial data spectra for the linear problem on R^n.
struct RadialSpectrum {
  std::function<double(double)> v0;
  std::function<double(double)> v1;
  double xi_max = 10.0;
};

/// Gaussian spectra of u0 = a0 exp(-|x|^2/(2w^2)), u1 = a1 exp(-|x|^2/(2w^2)) in n dims;
/// xi_max where the spectrum falls below 1e-17 of its peak.
RadialSpectrum gaussian_spectrum(int n, double width, double a0, double a1);

struct RadialNorms {
  double L2 = 0.0;
  double energy = 0.0;
};

/// ||v(t)||_{L^2} and ||(lambda grad v, v_t)(t)||_{L^2} of the linear solution from data
/// at time s, by radial quadrature of |Phi v^|^2 over (0, xi_max] with the surface
/// factor |S^(n-1)| xi^(n-1) and Parseval's (2 pi)^-n.
RadialNorms linear_norm_radial(double mu, const SpeedProfile& profile, int n,
                               const RadialSpectrum& data, double t, double s = 0.0,
                               const QuadratureOptions& options = {});

struct WeightIdentity {
  /// max |mu (lambda/Lambda) psi_t + |lambda grad psi|^2| / (1 + |mu (lambda/Lambda) psi_t|)
  double residual = 0.0;
  double raw_residual = 0.0;
  double max_psi_t = 0.0;
};

/// Pointwise check of mu (lambda/Lambda) psi_t = -|lambda grad psi|^2 for
/// psi = (mu/2)|x|^2/Lambda(t)^2 over the grid points.
WeightIdentity weight_identity_residual(const SpeedProfile& profile, double mu, const Grid& grid, double t);

/// Flat little/big-endian float64 dumps of u and u_t plus a JSON sidecar.
void write_snapshot(const std::string& directory, const FieldState& state, std::size_t index);

}  // namespace dampwave
