#include "dampwave/spectral.hpp"

#include <fftw3.h>

#include <algorithm>
#include <bit>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <map>
#include <mutex>
#include <numbers>
#include <random>
#include <sstream>

#include "dampwave/error.hpp"
#include "json.hpp"

namespace dampwave {

namespace {

constexpr double kPi = std::numbers::pi;

std::mutex& fftw_planner_mutex() {
  static std::mutex m;
  return m;
}

double ipow(double base, int e) {
  double r = 1.0;
  for (int i = 0; i < e; ++i) r *= base;
  return r;
}

// Radius |x| of physical point `idx` in the box.
double radius2(const Grid& g, std::size_t idx) {
  double r2 = 0.0;
  for (int d = g.n - 1; d >= 0; --d) {
    const int i = static_cast<int>(idx % static_cast<std::size_t>(g.N));
    idx /= static_cast<std::size_t>(g.N);
    const double x = g.x(i);
    r2 += x * x;
  }
  return r2;
}

std::array<double, 3> coords(const Grid& g, std::size_t idx) {
  std::array<double, 3> x{0.0, 0.0, 0.0};
  for (int d = g.n - 1; d >= 0; --d) {
    const int i = static_cast<int>(idx % static_cast<std::size_t>(g.N));
    idx /= static_cast<std::size_t>(g.N);
    x[static_cast<std::size_t>(d)] = g.x(i);
  }
  return x;
}

// Portable uniform [0, 1) from a 64-bit engine.
double uniform01(std::mt19937_64& rng) { return static_cast<double>(rng() >> 11) * 0x1.0p-53; }

}  // namespace

// ---------------------------------------------------------------- Grid

double Grid::cell_volume() const noexcept { return ipow(h(), n); }

std::size_t Grid::size() const noexcept {
  std::size_t s = 1;
  for (int d = 0; d < n; ++d) s *= static_cast<std::size_t>(N);
  return s;
}

std::size_t Grid::spectral_size() const noexcept {
  std::size_t s = static_cast<std::size_t>(N / 2 + 1);
  for (int d = 1; d < n; ++d) s *= static_cast<std::size_t>(N);
  return s;
}

double Grid::max_wavenumber() const noexcept { return std::sqrt(static_cast<double>(n)) * kPi / h(); }

void Grid::validate() const {
  if (n < 1 || n > 3) throw DomainError("grid dimension n must be 1, 2 or 3");
  if (N < 16 || (N & (N - 1)) != 0) throw DomainError("grid N must be a power of two >= 16");
  if (!(L > 0.0) || !std::isfinite(L)) throw DomainError("grid half-width L must be positive");
}

// ---------------------------------------------------------------- Fft

struct Fft::Impl {
  Grid grid;
  double* real = nullptr;
  fftw_complex* spec = nullptr;
  fftw_plan fwd = nullptr;
  fftw_plan bwd = nullptr;
};

Fft::Fft(const Grid& grid) : impl_(std::make_unique<Impl>()) {
  grid.validate();
  impl_->grid = grid;
  impl_->real = fftw_alloc_real(grid.size());
  impl_->spec = fftw_alloc_complex(grid.spectral_size());
  int dims[3] = {grid.N, grid.N, grid.N};
  std::lock_guard<std::mutex> lock(fftw_planner_mutex());
  impl_->fwd = fftw_plan_dft_r2c(grid.n, dims, impl_->real, impl_->spec, FFTW_ESTIMATE);
  impl_->bwd = fftw_plan_dft_c2r(grid.n, dims, impl_->spec, impl_->real, FFTW_ESTIMATE);
}

Fft::~Fft() {
  std::lock_guard<std::mutex> lock(fftw_planner_mutex());
  fftw_destroy_plan(impl_->fwd);
  fftw_destroy_plan(impl_->bwd);
  fftw_free(impl_->real);
  fftw_free(impl_->spec);
}

void Fft::forward(const std::vector<double>& in, std::vector<cplx>& out) {
  const std::size_t n = impl_->grid.size();
  const std::size_t m = impl_->grid.spectral_size();
  std::copy(in.begin(), in.begin() + static_cast<std::ptrdiff_t>(n), impl_->real);
  fftw_execute(impl_->fwd);
  out.resize(m);
  for (std::size_t i = 0; i < m; ++i) out[i] = cplx(impl_->spec[i][0], impl_->spec[i][1]);
}

void Fft::inverse(const std::vector<cplx>& in, std::vector<double>& out) {
  const std::size_t n = impl_->grid.size();
  const std::size_t m = impl_->grid.spectral_size();
  for (std::size_t i = 0; i < m; ++i) {
    impl_->spec[i][0] = in[i].real();
    impl_->spec[i][1] = in[i].imag();
  }
  fftw_execute(impl_->bwd);  // c2r overwrites its input, which is our private buffer
  out.resize(n);
  const double scale = 1.0 / static_cast<double>(n);
  for (std::size_t i = 0; i < n; ++i) out[i] = impl_->real[i] * scale;
}

// ---------------------------------------------------------------- SpectralLayout

SpectralLayout::SpectralLayout(const Grid& g) : grid(g) {
  g.validate();
  const std::size_t m = g.spectral_size();
  const int N = g.N;
  const int half = N / 2 + 1;
  const double dk = kPi / g.L;
  k.resize(m);
  xi.resize(m);
  group.resize(m);
  keep.resize(m);
  weight.resize(m);
  std::vector<long> norm2(m);
  for (std::size_t idx = 0; idx < m; ++idx) {
    std::size_t rest = idx;
    std::array<int, 3> j{0, 0, 0};
    j[static_cast<std::size_t>(g.n - 1)] = static_cast<int>(rest % static_cast<std::size_t>(half));
    rest /= static_cast<std::size_t>(half);
    for (int d = g.n - 2; d >= 0; --d) {
      const int i = static_cast<int>(rest % static_cast<std::size_t>(N));
      rest /= static_cast<std::size_t>(N);
      j[static_cast<std::size_t>(d)] = i <= N / 2 ? i : i - N;
    }
    long s2 = 0;
    bool kept = true;
    for (int d = 0; d < g.n; ++d) {
      const int jd = j[static_cast<std::size_t>(d)];
      k[idx][static_cast<std::size_t>(d)] = dk * jd;
      s2 += static_cast<long>(jd) * jd;
      kept = kept && 3 * std::abs(jd) <= N;
    }
    norm2[idx] = s2;
    xi[idx] = dk * std::sqrt(static_cast<double>(s2));
    keep[idx] = kept;
    const int jl = j[static_cast<std::size_t>(g.n - 1)];
    weight[idx] = (jl == 0 || jl == N / 2) ? 1.0 : 2.0;
  }
  std::vector<long> distinct(norm2);
  std::sort(distinct.begin(), distinct.end());
  distinct.erase(std::unique(distinct.begin(), distinct.end()), distinct.end());
  distinct_xi.resize(distinct.size());
  for (std::size_t i = 0; i < distinct.size(); ++i) distinct_xi[i] = dk * std::sqrt(static_cast<double>(distinct[i]));
  for (std::size_t idx = 0; idx < m; ++idx) {
    group[idx] = static_cast<int>(std::lower_bound(distinct.begin(), distinct.end(), norm2[idx]) - distinct.begin());
  }
}

// ---------------------------------------------------------------- FieldState

FieldState FieldState::from_physical(const Grid& grid, double t, std::vector<double> u,
                                     std::vector<double> ut, Fft& fft) {
  if (u.size() != grid.size() || ut.size() != grid.size()) throw DomainError("field size does not match grid");
  FieldState s;
  s.grid = grid;
  s.t = t;
  s.u = std::move(u);
  s.ut = std::move(ut);
  s.sync_spectral(fft);
  return s;
}

void FieldState::sync_physical(Fft& fft) {
  fft.inverse(u_hat, u);
  fft.inverse(ut_hat, ut);
}

void FieldState::sync_spectral(Fft& fft) {
  fft.forward(u, u_hat);
  fft.forward(ut, ut_hat);
}

// ---------------------------------------------------------------- nonlinearity

std::string to_string(NonlinearForm form) {
  switch (form) {
    case NonlinearForm::signed_power: return "signed_power";
    case NonlinearForm::absolute_power: return "absolute_power";
    case NonlinearForm::zero: return "zero";
  }
  return "zero";
}

std::string to_string(NonlinearScaling scaling) {
  return scaling == NonlinearScaling::plain ? "plain" : "structural";
}

NonlinearForm nonlinear_form_from_string(const std::string& s) {
  if (s == "signed_power") return NonlinearForm::signed_power;
  if (s == "absolute_power") return NonlinearForm::absolute_power;
  if (s == "zero" || s == "none") return NonlinearForm::zero;
  throw DomainError("unknown nonlinearity form '" + s + "'");
}

NonlinearScaling nonlinear_scaling_from_string(const std::string& s) {
  if (s == "plain") return NonlinearScaling::plain;
  if (s == "structural") return NonlinearScaling::structural;
  throw DomainError("unknown nonlinearity scaling '" + s + "'");
}

void NonlinearitySpec::validate() const {
  if (form == NonlinearForm::zero) return;
  if (!(p > 1.0) || !std::isfinite(p)) throw DomainError("nonlinearity exponent p must exceed 1");
  if (!(gamma >= -2.0) || !std::isfinite(gamma)) throw DomainError("nonlinearity gamma must be >= -2");
}

std::vector<std::string> NonlinearitySpec::warnings(int n) const {
  std::vector<std::string> w;
  if (form != NonlinearForm::zero && n >= 3 && p > 1.0 + 2.0 / (n - 2)) {
    std::ostringstream os;
    os << "p = " << p << " exceeds the energy-admissible bound p <= 1 + 2/(n-2) = " << 1.0 + 2.0 / (n - 2)
       << " for n = " << n;
    w.push_back(os.str());
  }
  return w;
}

SourceFn make_source(const NonlinearitySpec& spec, const SpeedProfile& profile) {
  spec.validate();
  if (spec.form == NonlinearForm::zero) return {};
  const double p = spec.p;
  const double gamma = spec.gamma;
  const bool structural = spec.scaling == NonlinearScaling::structural;
  const bool signed_form = spec.form == NonlinearForm::signed_power;
  return [=](double t, const std::vector<double>& u, std::vector<double>& out) {
    double g = 1.0;
    if (structural) {
      const double lam = profile.speed(t);
      g = lam * lam * std::pow(profile.primitive(t), gamma);
    } else if (gamma != 0.0) {
      g = std::pow(1.0 + t, gamma);
    }
    out.resize(u.size());
    for (std::size_t i = 0; i < u.size(); ++i) {
      const double a = std::abs(u[i]);
      const double v = std::pow(a, p);
      out[i] = g * (signed_form ? std::copysign(v, u[i]) : v);
    }
  };
}

// ---------------------------------------------------------------- initial data

std::string to_string(DataKind kind) {
  switch (kind) {
    case DataKind::gaussian: return "gaussian";
    case DataKind::bump: return "bump";
    case DataKind::mode_mix: return "mode_mix";
  }
  return "gaussian";
}

DataKind data_kind_from_string(const std::string& s) {
  if (s == "gaussian") return DataKind::gaussian;
  if (s == "bump") return DataKind::bump;
  if (s == "mode_mix") return DataKind::mode_mix;
  throw DomainError("unknown initial data kind '" + s + "'");
}

double data_radius(DataKind kind, double width) { return kind == DataKind::bump ? width : 8.0 * width; }

InitialData make_initial_data(const Grid& grid, DataKind kind, double amplitude, double width,
                              std::uint64_t seed, double velocity_factor) {
  grid.validate();
  if (!(width > 0.0)) throw DomainError("initial data width must be positive");
  if (!(width < grid.L / 4.0)) throw DomainError("initial data width must be below L/4");
  InitialData d;
  d.R0 = data_radius(kind, width);
  const std::size_t n = grid.size();
  d.u0.assign(n, 0.0);
  d.u1.assign(n, 0.0);

  struct Wave {
    std::array<double, 3> dir;
    double kappa, phase, amp;
  };
  std::vector<Wave> waves;
  if (kind == DataKind::mode_mix) {
    std::mt19937_64 rng(seed);
    for (int j = 0; j < 4; ++j) {
      Wave w{};
      double norm = 0.0;
      for (int dd = 0; dd < grid.n; ++dd) {
        w.dir[static_cast<std::size_t>(dd)] = 2.0 * uniform01(rng) - 1.0;
        norm += w.dir[static_cast<std::size_t>(dd)] * w.dir[static_cast<std::size_t>(dd)];
      }
      norm = std::sqrt(std::max(norm, 1e-12));
      for (auto& c : w.dir) c /= norm;
      w.kappa = 3.0 * uniform01(rng) / width;
      w.phase = 2.0 * kPi * uniform01(rng);
      w.amp = 2.0 * uniform01(rng) - 1.0;
      waves.push_back(w);
    }
  }
  for (std::size_t i = 0; i < n; ++i) {
    const double r2 = radius2(grid, i);
    double v = 0.0;
    switch (kind) {
      case DataKind::gaussian: v = std::exp(-r2 / (2.0 * width * width)); break;
      case DataKind::bump: {
        const double z = r2 / (width * width);
        v = z < 1.0 ? std::exp(1.0 - 1.0 / (1.0 - z)) : 0.0;
        break;
      }
      case DataKind::mode_mix: {
        const auto x = coords(grid, i);
        double mix = 0.0;
        for (const auto& w : waves) {
          const double proj = w.dir[0] * x[0] + w.dir[1] * x[1] + w.dir[2] * x[2];
          mix += w.amp * std::cos(w.kappa * proj + w.phase);
        }
        v = std::exp(-r2 / (2.0 * width * width)) * mix / 4.0;
        break;
      }
    }
    d.u0[i] = amplitude * v;
    d.u1[i] = velocity_factor * d.u0[i];
  }
  return d;
}

// ---------------------------------------------------------------- propagation

TimeLevel make_time_level(double mu, const SpeedProfile& profile, const SpectralLayout& layout, double t) {
  TimeLevel lvl;
  lvl.t = t;
  lvl.lambda = profile.speed(t);
  lvl.Lambda = profile.primitive(t);
  lvl.basis.resize(layout.distinct_xi.size());
  for (std::size_t g = 1; g < layout.distinct_xi.size(); ++g) {
    lvl.basis[g] = mode_basis(mu, profile, t, layout.distinct_xi[g]);
  }
  return lvl;
}

std::vector<MultiplierValues> propagators(double mu, const SpeedProfile& profile,
                                          const SpectralLayout& layout, const TimeLevel& from,
                                          const TimeLevel& to) {
  const std::size_t G = layout.distinct_xi.size();
  std::vector<MultiplierValues> out(G);
  if (to.t == from.t) return out;
  out[0] = phi_zero_mode(mu, profile, from.t, to.t);
  for (std::size_t g = 1; g < G; ++g) {
    const double xi = layout.distinct_xi[g];
    if (from.basis[g].arg < kSmallArgument) {
      out[g] = phi_values(mu, profile, from.t, to.t, xi);
    } else {
      out[g] = phi_from_bases(mu, xi, from.basis[g], to.basis[g]);
    }
  }
  return out;
}

namespace {

void apply_linear(FieldState& state, const std::vector<MultiplierValues>& P, const SpectralLayout& layout) {
  for (std::size_t i = 0; i < state.u_hat.size(); ++i) {
    const auto& m = P[static_cast<std::size_t>(layout.group[i])];
    const cplx a = state.u_hat[i];
    const cplx b = state.ut_hat[i];
    // Multipliers are real up to rounding; using the real parts keeps real data real.
    state.u_hat[i] = m.phi0.real() * a + m.phi1.real() * b;
    state.ut_hat[i] = m.dphi0.real() * a + m.dphi1.real() * b;
  }
}

}  // namespace

void linear_step(FieldState& state, const SpeedProfile& profile, double mu, double dt, Fft& fft,
                 const SpectralLayout& layout) {
  duhamel_step(state, profile, mu, SourceFn{}, dt, fft, layout);
}

void duhamel_step(FieldState& state, const SpeedProfile& profile, double mu, const SourceFn& source,
                  double dt, Fft& fft, const SpectralLayout& layout, DuhamelLevels levels) {
  if (!(dt >= 0.0) || !std::isfinite(dt)) throw DomainError("time step must be finite and >= 0");
  if (dt == 0.0) return;
  const double t0 = state.t;
  const double th = t0 + 0.5 * dt;
  const double t1 = t0 + dt;
  TimeLevel own_start, own_mid, own_end;
  const TimeLevel* start = levels.start;
  const TimeLevel* mid = levels.mid;
  const TimeLevel* end = levels.end;
  if (!start) start = &(own_start = make_time_level(mu, profile, layout, t0));
  if (!end) end = &(own_end = make_time_level(mu, profile, layout, t1));

  const auto P10 = propagators(mu, profile, layout, *start, *end);
  if (!source) {
    apply_linear(state, P10, layout);
    state.t = t1;
    state.sync_physical(fft);
    return;
  }
  if (!mid) mid = &(own_mid = make_time_level(mu, profile, layout, th));
  const auto Ph0 = propagators(mu, profile, layout, *start, *mid);
  const auto P1h = propagators(mu, profile, layout, *mid, *end);

  const std::size_t m = state.u_hat.size();
  std::vector<cplx> pred(m);
  for (std::size_t i = 0; i < m; ++i) {
    const auto& g = Ph0[static_cast<std::size_t>(layout.group[i])];
    pred[i] = g.phi0.real() * state.u_hat[i] + g.phi1.real() * state.ut_hat[i];
  }
  std::vector<double> u_mid;
  fft.inverse(pred, u_mid);
  std::vector<double> f_mid;
  source(th, u_mid, f_mid);
  std::vector<cplx> f_hat;
  fft.forward(f_mid, f_hat);

  apply_linear(state, P10, layout);
  for (std::size_t i = 0; i < m; ++i) {
    if (!layout.keep[i]) continue;
    const auto& g = P1h[static_cast<std::size_t>(layout.group[i])];
    state.u_hat[i] += dt * g.phi1.real() * f_hat[i];
    state.ut_hat[i] += dt * g.dphi1.real() * f_hat[i];
  }
  state.t = t1;
  state.sync_physical(fft);
}

// ---------------------------------------------------------------- norms

namespace {

double parseval_gradient2(const FieldState& s, const SpectralLayout& layout) {
  const Grid& g = s.grid;
  const double n_total = static_cast<double>(g.size());
  double acc = 0.0;
  for (std::size_t i = 0; i < s.u_hat.size(); ++i) acc += layout.weight[i] * layout.xi[i] * layout.xi[i] * std::norm(s.u_hat[i]);
  return acc * g.cell_volume() / n_total;
}

double lm_norm(const std::vector<double>& v, double m, double vol) {
  double acc = 0.0;
  for (double x : v) acc += std::pow(std::abs(x), m);
  return std::pow(acc * vol, 1.0 / m);
}

}  // namespace

NormSample norms(const FieldState& state, const SpeedProfile& profile, const std::vector<double>& m_list,
                 const WeightedNormSpec& weighted, Fft& fft, const SpectralLayout& layout) {
  const Grid& g = state.grid;
  const double vol = g.cell_volume();
  NormSample out;
  double l2 = 0.0, ut2 = 0.0, linf = 0.0;
  for (std::size_t i = 0; i < state.u.size(); ++i) {
    l2 += state.u[i] * state.u[i];
    ut2 += state.ut[i] * state.ut[i];
    const double a = std::abs(state.u[i]);
    if (!(a <= linf)) linf = a;  // propagates NaN
  }
  out.L2 = std::sqrt(l2 * vol);
  out.ut_L2 = std::sqrt(ut2 * vol);
  out.Linf = linf;
  for (double m : m_list) {
    if (!(m >= 1.0)) throw DomainError("L^m norms need m >= 1");
    out.Lm[m] = m == 2.0 ? out.L2 : lm_norm(state.u, m, vol);
  }
  const double grad2 = parseval_gradient2(state, layout);
  out.H1_seminorm = std::sqrt(grad2);
  out.H1 = std::sqrt(l2 * vol + grad2);
  const double lam = profile.speed(state.t);
  out.energy = std::sqrt(lam * lam * grad2 + ut2 * vol);

  if (weighted.enabled) {
    out.weighted = true;
    const double Lam = profile.primitive(state.t);
    const double coef = weighted.mu / (Lam * Lam);  // log omega^2 = coef |x|^2
    const double corner = coef * g.n * g.L * g.L;
    if (corner > std::log(1e300)) {
      out.weighted_saturated = true;
      out.weighted_L2 = std::numeric_limits<double>::infinity();
      out.weighted_H1 = std::numeric_limits<double>::infinity();
    } else {
      std::vector<std::vector<double>> grad(static_cast<std::size_t>(g.n));
      for (int d = 0; d < g.n; ++d) {
        std::vector<cplx> dh(state.u_hat.size());
        for (std::size_t i = 0; i < dh.size(); ++i) {
          const double kd = layout.k[i][static_cast<std::size_t>(d)];
          // Nyquist entries carry no odd derivative.
          const bool nyquist = std::abs(std::abs(kd) - kPi / g.h()) < 1e-9 * kPi / g.h();
          dh[i] = nyquist ? cplx(0.0) : cplx(0.0, kd) * state.u_hat[i];
        }
        fft.inverse(dh, grad[static_cast<std::size_t>(d)]);
      }
      double wl2 = 0.0, wg2 = 0.0;
      for (std::size_t i = 0; i < state.u.size(); ++i) {
        const double w2 = std::exp(coef * radius2(g, i));
        wl2 += state.u[i] * state.u[i] * w2;
        double gsq = 0.0;
        for (int d = 0; d < g.n; ++d) gsq += grad[static_cast<std::size_t>(d)][i] * grad[static_cast<std::size_t>(d)][i];
        wg2 += gsq * w2;
      }
      out.weighted_L2 = std::sqrt(wl2 * vol);
      out.weighted_H1 = std::sqrt((wl2 + wg2) * vol);
    }
  }
  return out;
}

double data_norm_Dm(const FieldState& state, double m, Fft& fft, const SpectralLayout& layout) {
  (void)fft;
  const double vol = state.grid.cell_volume();
  double l2u = 0.0, l2v = 0.0;
  for (std::size_t i = 0; i < state.u.size(); ++i) {
    l2u += state.u[i] * state.u[i];
    l2v += state.ut[i] * state.ut[i];
  }
  const double grad2 = parseval_gradient2(state, layout);
  return lm_norm(state.u, m, vol) + std::sqrt(l2u * vol + grad2) + lm_norm(state.ut, m, vol) + std::sqrt(l2v * vol);
}

// ---------------------------------------------------------------- simulate

std::vector<double> output_times(double first_output, double T, int per_decade) {
  if (!(T > 0.0)) throw DomainError("final time T must be positive");
  if (per_decade < 1) throw DomainError("outputs per decade must be >= 1");
  std::vector<double> out;
  if (!(first_output > 0.0) || first_output >= T) {
    out.push_back(T);
    return out;
  }
  const double a = std::log10(first_output);
  const double b = std::log10(T);
  const int count = std::max(1, static_cast<int>(std::ceil((b - a) * per_decade - 1e-9)));
  for (int k = 0; k <= count; ++k) out.push_back(k == count ? T : std::pow(10.0, a + (b - a) * k / count));
  return out;
}

double required_half_width(const SpeedProfile& profile, double R0, double T) {
  return R0 + (profile.primitive(T) - profile.lambda0()) + 2.0;
}

std::string lm_track_name(double m) {
  std::ostringstream os;
  os.precision(6);
  os << 'L' << m;
  return os.str();
}

SimulationResult simulate(const SimulationConfig& cfg, const InitialData& data, const SnapshotHook& snapshot) {
  cfg.grid.validate();
  cfg.nonlinearity.validate();
  if (!(cfg.T > 0.0)) throw DomainError("final time T must be positive");
  if (!(cfg.dt_max > 0.0)) throw DomainError("dt_max must be positive");
  if (!(cfg.cfl > 0.0)) throw DomainError("cfl factor must be positive");
  Fft fft(cfg.grid);
  const SpectralLayout layout(cfg.grid);
  const SourceFn source = make_source(cfg.nonlinearity, cfg.profile);
  const double mu = cfg.mu;

  SimulationResult res;
  FieldState state = FieldState::from_physical(cfg.grid, 0.0, data.u0, data.u1, fft);
  double peak0 = 0.0;
  for (double v : state.u) peak0 = std::max(peak0, std::abs(v));
  if (peak0 == 0.0) {
    for (double v : state.ut) peak0 = std::max(peak0, std::abs(v));
  }

  const double Lambda0 = cfg.profile.primitive(0.0);
  auto record = [&](const FieldState& s, bool blown) {
    const NormSample ns = norms(s, cfg.profile, cfg.m_list, cfg.weighted, fft, layout);
    std::map<std::string, double> row;
    for (const auto& [m, v] : ns.Lm) row[lm_track_name(m)] = v;
    row["L2"] = ns.L2;
    row["H1_seminorm"] = ns.H1_seminorm;
    row["energy"] = ns.energy;
    row["Linf"] = ns.Linf;
    if (ns.weighted) {
      row["weighted_L2"] = ns.weighted_L2;
      row["weighted_H1"] = ns.weighted_H1;
      row["weighted_saturated"] = ns.weighted_saturated ? 1.0 : 0.0;
    }
    row["blowup_flag"] = blown ? 1.0 : 0.0;
    double cone = 0.0;
    if (cfg.R0 > 0.0 && !blown && ns.Linf > 0.0) {
      const double R = cfg.R0 + cfg.profile.primitive(s.t) - Lambda0;
      double outside = 0.0;
      for (std::size_t i = 0; i < s.u.size(); ++i) {
        if (radius2(s.grid, i) > R * R) outside = std::max(outside, std::abs(s.u[i]));
      }
      cone = outside / ns.Linf;
      res.light_cone_ratio = std::max(res.light_cone_ratio, cone);
      if (cone > cfg.light_cone_tolerance) res.light_cone_ok = false;
    }
    row["light_cone_ratio"] = cone;
    res.series.append(s.t, cfg.profile.primitive(s.t), row);
  };

  record(state, false);
  if (snapshot) snapshot(state, 0);
  const auto outs = output_times(cfg.first_output, cfg.T, cfg.outputs_per_decade);
  const double h = cfg.grid.h();
  TimeLevel cur = make_time_level(mu, cfg.profile, layout, 0.0);
  std::size_t oi = 0;
  long step = 0;
  while (oi < outs.size()) {
    const double target = outs[oi];
    double dt = std::min(cfg.dt_max, cfg.cfl * h / cfg.profile.speed(state.t));
    bool hit = false;
    if (state.t + dt >= target - 1e-12 * std::max(1.0, target)) {
      dt = target - state.t;
      hit = true;
    }
    if (dt > 0.0) {
      const TimeLevel end = make_time_level(mu, cfg.profile, layout, state.t + dt);
      TimeLevel mid;
      if (source) mid = make_time_level(mu, cfg.profile, layout, state.t + 0.5 * dt);
      duhamel_step(state, cfg.profile, mu, source, dt, fft, layout, {&cur, source ? &mid : nullptr, &end});
      cur = end;
      ++step;
    }
    if (hit) state.t = target;

    double linf = 0.0;
    bool finite = true;
    for (double v : state.u) {
      if (!std::isfinite(v)) {
        finite = false;
        break;
      }
      linf = std::max(linf, std::abs(v));
    }
    if (!finite || (peak0 > 0.0 && linf > cfg.blowup_factor * peak0)) {
      BlowupRecord b;
      b.t_star = state.t;
      b.step = step;
      b.Linf = finite ? linf : std::numeric_limits<double>::infinity();
      b.reason = finite ? "sup norm exceeded blow-up factor times the initial peak" : "non-finite value";
      res.blowup = b;
      record(state, true);
      break;
    }
    if (hit) {
      record(state, false);
      if (snapshot) snapshot(state, oi + 1);
      ++oi;
    }
  }
  res.steps = step;
  res.final_state = std::move(state);
  return res;
}

// ---------------------------------------------------------------- radial linear norms

RadialSpectrum gaussian_spectrum(int n, double width, double a0, double a1) {
  if (n < 1 || n > 3) throw DomainError("dimension must be 1, 2 or 3");
  if (!(width > 0.0)) throw DomainError("width must be positive");
  const double c = std::pow(2.0 * kPi, 0.5 * n) * ipow(width, n);
  RadialSpectrum s;
  s.v0 = [=](double xi) { return a0 * c * std::exp(-0.5 * width * width * xi * xi); };
  s.v1 = [=](double xi) { return a1 * c * std::exp(-0.5 * width * width * xi * xi); };
  s.xi_max = std::sqrt(2.0 * std::log(1e17)) / width;
  return s;
}

RadialNorms linear_norm_radial(double mu, const SpeedProfile& profile, int n, const RadialSpectrum& data,
                               double t, double s, const QuadratureOptions& options) {
  if (n < 1 || n > 3) throw DomainError("dimension must be 1, 2 or 3");
  if (t < s) throw DomainError("linear_norm_radial requires t >= s");
  const double area = n == 1 ? 2.0 : (n == 2 ? 2.0 * kPi : 4.0 * kPi);
  const double c = area / std::pow(2.0 * kPi, n);
  const double lam_t = profile.speed(t);
  const double Lam_t = profile.primitive(t);
  const double Lam_s = profile.primitive(s);
  auto integrand = [&](double xi, double* out) {
    if (xi <= 0.0) {
      out[0] = out[1] = 0.0;
      return;
    }
    const MultiplierValues m = phi_values(mu, profile, s, t, xi);
    const double a = data.v0(xi);
    const double b = data.v1(xi);
    const double v = m.phi0.real() * a + m.phi1.real() * b;
    const double vt = m.dphi0.real() * a + m.dphi1.real() * b;
    const double jac = c * std::pow(xi, n - 1);
    out[0] = jac * v * v;
    out[1] = jac * (lam_t * lam_t * xi * xi * v * v + vt * vt);
  };
  QuadratureOptions opt = options;
  if (opt.rel_tol == QuadratureOptions{}.rel_tol) opt.rel_tol = 1e-8;
  const double freq = 2.0 * (Lam_t - Lam_s);
  const auto r = integrate_panels_n(integrand, 2, 0.0, data.xi_max, freq, true, opt);
  return {std::sqrt(std::max(0.0, r.value[0])), std::sqrt(std::max(0.0, r.value[1]))};
}

// ---------------------------------------------------------------- weight identity

WeightIdentity weight_identity_residual(const SpeedProfile& profile, double mu, const Grid& grid, double t) {
  grid.validate();
  const double lam = profile.speed(t);
  const double Lam = profile.primitive(t);
  WeightIdentity out;
  out.max_psi_t = -std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i < grid.size(); ++i) {
    const auto x = coords(grid, i);
    double r2 = 0.0;
    double grad2 = 0.0;
    for (int d = 0; d < grid.n; ++d) {
      const double xd = x[static_cast<std::size_t>(d)];
      r2 += xd * xd;
      const double gd = lam * mu * xd / (Lam * Lam);  // lambda d/dx_d psi
      grad2 += gd * gd;
    }
    const double psi_t = -mu * r2 * lam / (Lam * Lam * Lam);
    const double lhs = mu * (lam / Lam) * psi_t;
    const double raw = std::abs(lhs + grad2);
    out.raw_residual = std::max(out.raw_residual, raw);
    out.residual = std::max(out.residual, raw / (1.0 + std::abs(lhs)));
    out.max_psi_t = std::max(out.max_psi_t, psi_t);
  }
  return out;
}

// ---------------------------------------------------------------- snapshots

void write_snapshot(const std::string& directory, const FieldState& state, std::size_t index) {
  namespace fs = std::filesystem;
  fs::create_directories(directory);
  std::ostringstream stem;
  stem << "snapshot_" << std::setw(5) << std::setfill('0') << index;
  const fs::path base = fs::path(directory) / stem.str();
  auto dump = [](const fs::path& p, const std::vector<double>& v) {
    std::ofstream os(p, std::ios::binary);
    if (!os) throw Error("cannot write snapshot file " + p.string());
    os.write(reinterpret_cast<const char*>(v.data()), static_cast<std::streamsize>(v.size() * sizeof(double)));
  };
  dump(base.string() + "_u.bin", state.u);
  dump(base.string() + "_ut.bin", state.ut);
  nlohmann::ordered_json meta;
  meta["t"] = state.t;
  meta["n"] = state.grid.n;
  meta["N"] = state.grid.N;
  meta["L"] = state.grid.L;
  meta["h"] = state.grid.h();
  meta["x0"] = -state.grid.L;
  meta["dtype"] = "float64";
  meta["endianness"] = std::endian::native == std::endian::little ? "little" : "big";
  meta["layout"] = "row-major, last axis fastest";
  meta["files"] = {stem.str() + "_u.bin", stem.str() + "_ut.bin"};
  std::ofstream js(base.string() + ".json");
  js << std::setprecision(17) << meta.dump(2) << '\n';
}

}  // namespace dampwave
