#include "dampwave/analysis.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <numbers>
#include <sstream>

#include "dampwave/error.hpp"
#include "dampwave/parallel.hpp"
#include "json.hpp"

namespace dampwave {

namespace {

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();
constexpr double kInf = std::numeric_limits<double>::infinity();

std::string fmt(double v) {
  std::ostringstream os;
  os.precision(17);
  os << v;
  return os.str();
}

// Least squares y ~ X beta by modified Gram-Schmidt on the (few) columns.
struct LsqResult {
  std::vector<double> beta;
  double rms = 0.0;
};

LsqResult least_squares(const std::vector<std::vector<double>>& cols, const std::vector<double>& y) {
  const std::size_t k = cols.size();
  const std::size_t n = y.size();
  std::vector<std::vector<double>> q = cols;
  std::vector<std::vector<double>> r(k, std::vector<double>(k, 0.0));
  for (std::size_t j = 0; j < k; ++j) {
    for (std::size_t i = 0; i < j; ++i) {
      double dot = 0.0;
      for (std::size_t s = 0; s < n; ++s) dot += q[i][s] * q[j][s];
      r[i][j] = dot;
      for (std::size_t s = 0; s < n; ++s) q[j][s] -= dot * q[i][s];
    }
    double norm = 0.0;
    for (double v : q[j]) norm += v * v;
    norm = std::sqrt(norm);
    if (!(norm > 1e-13 * std::sqrt(static_cast<double>(n)))) throw DegenerateFit("fit design matrix is rank deficient");
    r[j][j] = norm;
    for (double& v : q[j]) v /= norm;
  }
  std::vector<double> qty(k, 0.0);
  for (std::size_t j = 0; j < k; ++j) {
    for (std::size_t s = 0; s < n; ++s) qty[j] += q[j][s] * y[s];
  }
  LsqResult out;
  out.beta.assign(k, 0.0);
  for (std::size_t jj = k; jj-- > 0;) {
    double v = qty[jj];
    for (std::size_t i = jj + 1; i < k; ++i) v -= r[jj][i] * out.beta[i];
    out.beta[jj] = v / r[jj][jj];
  }
  double ss = 0.0;
  for (std::size_t s = 0; s < n; ++s) {
    double fit = 0.0;
    for (std::size_t j = 0; j < k; ++j) fit += cols[j][s] * out.beta[j];
    ss += (y[s] - fit) * (y[s] - fit);
  }
  out.rms = std::sqrt(ss / static_cast<double>(n));
  return out;
}

double slope_loglog(const std::vector<double>& x, const std::vector<double>& y) {
  const std::vector<double> ones(x.size(), 1.0);
  return least_squares({ones, x}, y).beta[1];
}

}  // namespace

// ================================================================== decay fits

std::string to_string(DecayModel model) { return model == DecayModel::pure_power ? "pure_power" : "power_log"; }

DecayFit fit_decay(const std::vector<double>& times, const std::vector<double>& lambda_big,
                   const std::vector<double>& values, double window_fraction) {
  if (!(window_fraction > 0.0 && window_fraction <= 1.0)) throw DomainError("fit window fraction must lie in (0, 1]");
  if (times.size() != lambda_big.size() || times.size() != values.size()) {
    throw DomainError("fit arrays have different lengths");
  }
  const std::size_t total = times.size();
  const auto count = static_cast<std::size_t>(std::ceil(window_fraction * static_cast<double>(total) - 1e-9));
  if (count < 10) throw DomainError("decay fit needs at least 10 samples in the window, got " + std::to_string(count));
  const std::size_t first = total - count;

  bool all_zero = true;
  for (std::size_t i = first; i < total; ++i) all_zero = all_zero && values[i] == 0.0;
  if (all_zero) throw DegenerateFit("track is identically zero in the fit window");

  std::vector<double> x, y, z;
  for (std::size_t i = first; i < total; ++i) {
    const double v = values[i];
    if (!(v > 0.0) || !std::isfinite(v)) throw DegenerateFit("track has a non-positive or non-finite value at t = " + fmt(times[i]));
    if (!(lambda_big[i] > 0.0)) throw DegenerateFit("Lambda must be positive in the fit window");
    x.push_back(std::log(lambda_big[i]));
    y.push_back(std::log(v));
    z.push_back(std::log(std::log(std::numbers::e + lambda_big[i])));
  }
  DecayFit fit;
  fit.samples = count;
  fit.t_lo = times[first];
  fit.t_hi = times[total - 1];
  fit.lambda_ratio = lambda_big[total - 1] / lambda_big[first];
  if (!(fit.lambda_ratio >= 10.0)) {
    throw DomainError("fit window spans Lambda ratio " + fmt(fit.lambda_ratio) + " < 10");
  }
  const std::vector<double> ones(x.size(), 1.0);
  const LsqResult pure = least_squares({ones, x}, y);
  fit.alpha_pure = -pure.beta[1];
  fit.residual_pure = pure.rms;
  const LsqResult withlog = least_squares({ones, x, z}, y);
  fit.alpha_log = -withlog.beta[1];
  fit.c_log_free = withlog.beta[2];
  fit.residual_log = withlog.rms;

  const bool use_log = fit.residual_pure > kExactFitResidual && fit.residual_log < kLogImprovement * fit.residual_pure &&
                       std::abs(fit.c_log_free) >= kMinLogExponent;
  if (use_log) {
    fit.model = DecayModel::power_log;
    fit.alpha = fit.alpha_log;
    fit.c_log = fit.c_log_free;
    fit.residual = fit.residual_log;
  } else {
    fit.model = DecayModel::pure_power;
    fit.alpha = fit.alpha_pure;
    fit.c_log = 0.0;
    fit.residual = fit.residual_pure;
  }
  return fit;
}

DecayFit fit_decay(const NormSeries& series, const std::string& track, double window_fraction) {
  return fit_decay(series.times, series.lambda_big, series.track(track), window_fraction);
}

std::vector<double> log_times(double t_first, double t_last, int per_decade, bool include_zero) {
  if (!(t_first > 0.0) || !(t_last > t_first)) throw DomainError("log_times needs 0 < t_first < t_last");
  if (per_decade < 1) throw DomainError("log_times needs per_decade >= 1");
  std::vector<double> out;
  if (include_zero) out.push_back(0.0);
  const double a = std::log10(t_first);
  const double b = std::log10(t_last);
  const int count = std::max(1, static_cast<int>(std::lround((b - a) * per_decade)));
  for (int k = 0; k <= count; ++k) out.push_back(k == count ? t_last : std::pow(10.0, a + (b - a) * k / count));
  return out;
}

NormSeries linear_decay_series(double mu, const SpeedProfile& profile, int n, const RadialSpectrum& data,
                               const std::vector<double>& times, const QuadratureOptions& options) {
  std::vector<RadialNorms> vals(times.size());
  parallel_for(times.size(), [&](std::size_t i) { vals[i] = linear_norm_radial(mu, profile, n, data, times[i], 0.0, options); });
  NormSeries s;
  for (std::size_t i = 0; i < times.size(); ++i) {
    s.append(times[i], profile.primitive(times[i]), {{"L2", vals[i].L2}, {"energy", vals[i].energy}});
  }
  return s;
}

// ================================================================== exponents

std::string to_string(BoundKind kind) {
  switch (kind) {
    case BoundKind::lower_strict: return "p >";
    case BoundKind::lower_inclusive: return "p >=";
    case BoundKind::upper_inclusive: return "p <=";
    case BoundKind::value: return "value";
  }
  return "value";
}

double critical_exponent(int n, double gamma, double m) { return 1.0 + m * (2.0 + gamma) / n; }

double ell_exponent(int n, double mu) { return 2.0 * n / (n + mu - 2.0); }

const Threshold& ExponentReport::get(const std::string& id) const {
  for (const auto& t : thresholds) {
    if (t.id == id) return t;
  }
  throw DomainError("exponent report has no entry '" + id + "'");
}

ExponentReport exponent_catalog(int n, double gamma, double m, double mu) {
  ExponentReport rep;
  rep.n = n;
  rep.gamma = gamma;
  rep.m = m;
  rep.mu = mu;
  const double g2 = 2.0 + gamma;
  auto add = [&](std::string id, std::string formula, BoundKind kind, double value, bool ok,
                 std::string condition, std::string reason) {
    Threshold t;
    t.id = std::move(id);
    t.formula = std::move(formula);
    t.kind = kind;
    t.value = value;
    t.applicable = ok;
    t.condition = std::move(condition);
    t.reason = ok ? std::string{} : std::move(reason);
    rep.thresholds.push_back(std::move(t));
  };
  const bool n_ok = n >= 1;
  const bool gamma_ok = gamma >= -2.0;
  const std::string base_reason = !n_ok ? "n must be >= 1" : (!gamma_ok ? "gamma must be >= -2" : "");

  // Global existence for data small in D_m (m in [1,2)) or H^1 x L^2 (m = 2).
  {
    const bool m_ok = m >= 1.0 && m <= 2.0;
    double value = m_ok && n_ok ? critical_exponent(n, gamma, m) : kNaN;
    std::string cond;
    std::string reason = base_reason;
    bool ok = n_ok && gamma_ok && m_ok;
    if (!m_ok) reason = "m must lie in [1, 2]";
    if (m == 2.0) {
      cond = "mu >= 2";
      if (ok && !(mu >= 2.0)) { ok = false; reason = "needs mu >= 2"; }
    } else if (m_ok) {
      cond = "n <= 4/(2-m) and mu >= 2 + n(2/m - 1)";
      if (ok && !(n <= 4.0 / (2.0 - m))) { ok = false; reason = "needs n <= 4/(2-m)"; }
      else if (ok && !(mu >= 2.0 + n * (2.0 / m - 1.0))) { ok = false; reason = "needs mu >= 2 + n(2/m - 1)"; }
    }
    add("critical_Lm", "1 + m(2+gamma)/n", BoundKind::lower_strict, value, ok, cond, reason);

    const bool alt = m_ok && m < 2.0 && n_ok && g2 < n * (2.0 - m) / (m * m);
    add("lower_alt_Lm", "2/m", BoundKind::lower_inclusive, m_ok && m < 2.0 ? 2.0 / m : kNaN,
        ok && alt, "replaces the strict bound when gamma + 2 < n(2-m)/m^2",
        !ok ? reason : "gamma + 2 >= n(2-m)/m^2, the strict bound applies");
  }
  add("critical_L1", "1 + (2+gamma)/n", BoundKind::lower_strict, n_ok ? critical_exponent(n, gamma, 1.0) : kNaN,
      n_ok && gamma_ok && n <= 4 && mu >= n + 2.0, "n <= 4 and mu >= n + 2; p >= 2 instead when gamma < n - 2",
      !base_reason.empty() ? base_reason : (n > 4 ? "needs n <= 4" : "needs mu >= n + 2"));
  add("critical_L2", "1 + 2(2+gamma)/n", BoundKind::lower_strict, n_ok ? critical_exponent(n, gamma, 2.0) : kNaN,
      n_ok && gamma_ok && mu >= 2.0, "mu >= 2", !base_reason.empty() ? base_reason : "needs mu >= 2");

  const bool mid = n_ok && mu > 2.0 && mu < 2.0 + n;
  const std::string mid_reason = !base_reason.empty() ? base_reason : "needs 2 < mu < 2 + n";
  add("ell", "2n/(n+mu-2)", BoundKind::value, mid ? ell_exponent(n, mu) : kNaN, mid, "2 < mu < 2 + n", mid_reason);
  {
    const double gcut = n_ok ? (mu - 2.0) * (n + mu - 2.0) / (2.0 * n) - 2.0 : kNaN;
    const bool strict = mid && gamma >= gcut;
    add("critical_ell", "1 + 2(2+gamma)/(n+mu-2)", BoundKind::lower_strict,
        mid ? 1.0 + 2.0 * g2 / (n + mu - 2.0) : kNaN, strict && gamma_ok,
        "2 < mu < 2 + n and gamma >= (mu-2)(n+mu-2)/(2n) - 2",
        !mid ? mid_reason : "gamma below (mu-2)(n+mu-2)/(2n) - 2, the inclusive bound applies");
    add("lower_alt_ell", "1 + (mu-2)/n", BoundKind::lower_inclusive, mid ? 1.0 + (mu - 2.0) / n : kNaN,
        mid && gamma_ok && !strict, "2 < mu < 2 + n and gamma < (mu-2)(n+mu-2)/(2n) - 2",
        !mid ? mid_reason : "gamma >= (mu-2)(n+mu-2)/(2n) - 2, the strict bound applies");
  }
  {
    const bool ok = n_ok && gamma_ok && mu >= 1.0 && mu < 2.0;
    add("critical_small_mu", "1 + 4(2+gamma)/(mu n)", BoundKind::lower_strict,
        n_ok && mu > 0.0 ? 1.0 + 4.0 * g2 / (mu * n) : kNaN, ok, "1 <= mu < 2, data small in H^1 x L^2",
        !base_reason.empty() ? base_reason : "needs 1 <= mu < 2");
  }
  {
    const bool ok = n == 1 && gamma_ok && mu >= 1.0 && mu < 3.0;
    add("critical_n1_mixed", "1 + 4(2+gamma)/(mu+1)", BoundKind::lower_strict,
        mu > -1.0 ? 1.0 + 4.0 * g2 / (mu + 1.0) : kNaN, ok, "n = 1, 1 <= mu < 3, together with p >= 2",
        n != 1 ? "only for n = 1" : (!gamma_ok ? "gamma must be >= -2" : "needs 1 <= mu < 3"));
  }
  {
    const bool ok = n == 1 && gamma_ok && mu > 0.0 && mu <= 1.0;
    add("critical_n1_kappa", "1 + 2(2+gamma)/mu", BoundKind::lower_strict, mu > 0.0 ? 1.0 + 2.0 * g2 / mu : kNaN, ok,
        "n = 1, 0 < mu <= 1, data small in D_kappa with kappa = 2/(3-mu), together with p >= 4/(3-mu)",
        n != 1 ? "only for n = 1" : (!gamma_ok ? "gamma must be >= -2" : "needs 0 < mu <= 1"));
    add("kappa", "2/(3-mu)", BoundKind::value, mu < 3.0 ? 2.0 / (3.0 - mu) : kNaN, ok, "n = 1, 0 < mu <= 1",
        n != 1 ? "only for n = 1" : "needs 0 < mu <= 1");
  }
  {
    const double den = n - (1.0 - mu);
    const bool ok = n_ok && mu > 0.0 && mu < 1.0;
    const std::string reason = !n_ok ? "n must be >= 1" : "needs 0 < mu < 1";
    add("nonexistence_upper", "1 + 2/(n-(1-mu))", BoundKind::upper_inclusive, den > 0.0 ? 1.0 + 2.0 / den : kNaN, ok,
        "0 < mu < 1, f = |u|^p, u1 in L^1 with positive integral; no global solution for 1 < p <= value", reason);
    add("nonexistence_upper_gamma", "1 + (2+gamma)/(n-(1-mu))", BoundKind::upper_inclusive,
        den > 0.0 ? 1.0 + g2 / den : kNaN, ok && gamma_ok,
        "0 < mu < 1, f >= (1+t)^gamma |u|^p, u1 in L^1 with positive integral", reason);
  }
  add("energy_bound", "1 + 2/(n-2)", BoundKind::upper_inclusive, n >= 3 ? 1.0 + 2.0 / (n - 2) : kInf, n >= 3,
      "n >= 3", "no upper bound on p for n <= 2");

  // Admissible range for data small in D_m.
  AdmissibleRange& ar = rep.admissible;
  std::ostringstream desc;
  if (!n_ok || !gamma_ok || !(m >= 1.0 && m <= 2.0)) {
    ar.empty = true;
    ar.lower = kNaN;
    ar.upper = kNaN;
    desc << "no range: " << (!n_ok ? "n must be >= 1" : (!gamma_ok ? "gamma must be >= -2" : "m must lie in [1, 2]"));
  } else if (m < 2.0 && !(n <= 4.0 / (2.0 - m))) {
    ar.empty = true;
    ar.lower = kNaN;
    ar.upper = kNaN;
    desc << "no range: the D_m result needs n <= 4/(2-m)";
  } else {
    ar.lower = critical_exponent(n, gamma, m);
    ar.lower_inclusive = false;
    if (m < 2.0 && g2 < n * (2.0 - m) / (m * m)) {
      ar.lower = 2.0 / m;
      ar.lower_inclusive = true;
    }
    if (n >= 3) {
      ar.upper = 1.0 + 2.0 / (n - 2);
      ar.upper_inclusive = true;
    }
    if (ar.lower > ar.upper) {
      ar.empty = true;
    } else if (ar.lower == ar.upper) {
      ar.empty = !(ar.lower_inclusive && ar.upper_inclusive);
      ar.single_point = !ar.empty;
    }
    if (ar.empty) {
      desc << "empty";
    } else if (ar.single_point) {
      desc << "{" << fmt(ar.lower) << "}";
    } else {
      desc << (ar.lower_inclusive ? "[" : "(") << fmt(ar.lower) << ", ";
      if (std::isinf(ar.upper)) desc << "inf)";
      else desc << fmt(ar.upper) << (ar.upper_inclusive ? "]" : ")");
    }
  }
  ar.description = desc.str();

  // Linear decay rates in Lambda(t) for the data class m.
  DecayRates& r = rep.rates;
  if (n_ok && m >= 1.0 && m < 2.0) {
    const double border = 2.0 + n * (2.0 / m - 1.0);
    r.solution = n * (1.0 / m - 0.5);
    if (mu > border) {
      r.applicable = true;
      r.energy = r.solution + 1.0;
      r.note = "effective";
    } else if (mu == border) {
      r.applicable = true;
      r.energy = mu / 2.0;
      r.energy_log = true;
      r.note = "borderline, logarithmic correction";
    } else if (n == 1 && m == 1.0 && mu >= 1.0 && mu < 3.0) {
      r.applicable = true;
      r.energy = mu / 2.0;
      r.energy_log = mu > 2.0;
      r.note = "n = 1 below the effective threshold";
    } else {
      r.note = "mu below 2 + n(2/m - 1)";
    }
  } else if (n_ok && m == 2.0) {
    r.solution = 0.0;
    if (mu >= 2.0) {
      r.applicable = true;
      r.energy = 1.0;
      r.note = "effective";
    } else if (mu >= 1.0) {
      r.applicable = true;
      r.energy = mu / 2.0;
      r.note = "noneffective, with the factor lambda(t)";
    } else {
      r.note = "mu below 1";
    }
  } else {
    r.note = "m must lie in [1, 2]";
  }
  return rep;
}

// ================================================================== Gagliardo-Nirenberg

double theta_gn(double q, int n) {
  if (n < 1) throw RangeError("theta(q) needs n >= 1");
  if (!(q >= 2.0)) throw RangeError("theta(q) needs q >= 2, got " + fmt(q));
  if (n >= 3 && !(q <= 2.0 * n / (n - 2.0))) {
    throw RangeError("theta(q) needs q <= 2n/(n-2) = " + fmt(2.0 * n / (n - 2.0)) + " for n = " + std::to_string(n));
  }
  if (std::isinf(q)) throw RangeError("theta(q) needs finite q");
  return n * (0.5 - 1.0 / q);
}

double gn_ratio(const Grid& grid, const std::vector<double>& u, double q) {
  const double theta = theta_gn(q, grid.n);
  Fft fft(grid);
  const SpectralLayout layout(grid);
  std::vector<cplx> uh;
  fft.forward(u, uh);
  const double vol = grid.cell_volume();
  double l2 = 0.0, lq = 0.0;
  for (double v : u) {
    l2 += v * v;
    lq += std::pow(std::abs(v), q);
  }
  if (l2 == 0.0) return kNaN;
  double grad = 0.0;
  for (std::size_t i = 0; i < uh.size(); ++i) grad += layout.weight[i] * layout.xi[i] * layout.xi[i] * std::norm(uh[i]);
  grad *= vol / static_cast<double>(grid.size());
  const double nl2 = std::sqrt(l2 * vol);
  const double ng = std::sqrt(grad);
  const double nq = std::pow(lq * vol, 1.0 / q);
  return nq / (std::pow(nl2, 1.0 - theta) * std::pow(ng, theta));
}

GnReport gn_verify(const GnSampleSpec& spec, double q, int n) {
  GnReport rep;
  rep.n = n;
  rep.q = q;
  rep.theta = theta_gn(q, n);
  rep.C_cap = spec.C_cap;
  if (spec.samples < 1) throw DomainError("gn_verify needs at least one sample");
  const int N = spec.N > 0 ? spec.N : (n == 1 ? 256 : (n == 2 ? 128 : 32));
  const double L = spec.L > 0.0 ? spec.L : (n == 3 ? 8.0 : 16.0);
  const Grid grid{n, N, L};
  const Grid fine{n, 2 * N, 2.0 * L};
  grid.validate();
  std::vector<double> ratio(static_cast<std::size_t>(spec.samples), kNaN);
  std::vector<double> scale_dev(ratio.size(), 0.0), dil_dev(ratio.size(), 0.0);
  parallel_for(ratio.size(), [&](std::size_t i) {
    const std::uint64_t seed = spec.seed + i;
    const auto d = make_initial_data(grid, DataKind::mode_mix, 1.0, spec.width, seed);
    const double R = gn_ratio(grid, d.u0, q);
    if (!std::isfinite(R)) return;
    ratio[i] = R;
    std::vector<double> scaled(d.u0);
    for (double& v : scaled) v *= spec.scale;
    scale_dev[i] = std::abs(gn_ratio(grid, scaled, q) - R) / R;
    // u(x/2): the same seeded mix with doubled width, on a box twice as large.
    const auto dd = make_initial_data(fine, DataKind::mode_mix, 1.0, 2.0 * spec.width, seed);
    dil_dev[i] = std::abs(gn_ratio(fine, dd.u0, q) - R) / R;
  });
  rep.max_R = 0.0;
  rep.min_R = kInf;
  for (std::size_t i = 0; i < ratio.size(); ++i) {
    if (!std::isfinite(ratio[i])) {
      ++rep.skipped;
      continue;
    }
    rep.ratios.push_back(ratio[i]);
    rep.max_R = std::max(rep.max_R, ratio[i]);
    rep.min_R = std::min(rep.min_R, ratio[i]);
    rep.max_scale_deviation = std::max(rep.max_scale_deviation, scale_dev[i]);
    rep.max_dilation_deviation = std::max(rep.max_dilation_deviation, dil_dev[i]);
  }
  if (rep.ratios.empty()) rep.min_R = kNaN;
  rep.within_cap = !rep.ratios.empty() && rep.max_R <= rep.C_cap;
  return rep;
}

// ================================================================== scans

std::string to_string(Outcome outcome) {
  switch (outcome) {
    case Outcome::global_decay: return "global_decay";
    case Outcome::blowup: return "blowup";
    case Outcome::undecided: return "undecided";
  }
  return "undecided";
}

void ScanConfig::validate() const {
  std::vector<std::string> v;
  if (n < 1 || n > 3) v.push_back("scan n must be 1, 2 or 3");
  if (N < 16 || (N & (N - 1)) != 0) v.push_back("scan N must be a power of two >= 16");
  if (p_values.empty()) v.push_back("scan needs at least one p value");
  if (eps_values.empty()) v.push_back("scan needs at least one eps value");
  for (double p : p_values) {
    if (!(p > 1.0)) v.push_back("scan p values must exceed 1");
  }
  for (double e : eps_values) {
    if (!(e >= 0.0)) v.push_back("scan eps values must be >= 0");
  }
  for (double g : gamma_values) {
    if (!(g >= -2.0)) v.push_back("scan gamma values must be >= -2");
  }
  if (!(T > 0.0)) v.push_back("scan T must be positive");
  if (!(width > 0.0)) v.push_back("scan data width must be positive");
  if (!(window > 0.0 && window <= 1.0)) v.push_back("scan fit window must lie in (0, 1]");
  if (form == NonlinearForm::zero) v.push_back("scan needs a nonzero nonlinearity");
  if (!v.empty()) throw ValidationError(v);
}

double memory_estimate(int n, int N) {
  double points = 1.0;
  for (int d = 0; d < n; ++d) points *= N;
  const double spectral = points / N * (N / 2 + 1);
  // u, ut, work arrays and source: ~8 real fields; u_hat, ut_hat, pred, f_hat, layout: ~6 complex.
  const double fields = points * 8.0 * 8.0 + spectral * 16.0 * 6.0 + spectral * 48.0;
  // Three time levels of Bessel bases per distinct |xi|; bounded by the spectral count.
  const double groups = std::min(spectral, 3.0 * N * N);
  return fields + 3.0 * groups * static_cast<double>(sizeof(ModeBasis));
}

namespace {

void run_cell(const ScanConfig& cfg, ScanCell& cell) {
  cell.p_crit = critical_exponent(cfg.n, cell.gamma, cfg.m);
  cell.at_threshold = std::abs(cell.p - cell.p_crit) <= 1e-12 * std::max(1.0, cell.p_crit);
  const double R0 = data_radius(cfg.data, cfg.width);
  const double rule = required_half_width(cfg.profile, R0, cfg.T);
  cell.L = std::max({cfg.L, rule, 4.0 * cfg.width * (1.0 + 1e-12)});
  const double mem = memory_estimate(cfg.n, cfg.N);
  if (mem > cfg.memory_cap_bytes) {
    cell.outcome = Outcome::undecided;
    cell.reason = "resource: memory estimate " + fmt(mem) + " bytes exceeds cap " + fmt(cfg.memory_cap_bytes);
    return;
  }
  if (cell.eps == 0.0) {
    cell.outcome = Outcome::global_decay;
    cell.reason = "zero data, zero solution";
    return;
  }
  SimulationConfig sc;
  sc.grid = Grid{cfg.n, cfg.N, cell.L};
  sc.profile = cfg.profile;
  sc.mu = cell.mu;
  sc.nonlinearity = NonlinearitySpec{cfg.form, cell.p, cell.gamma, cfg.scaling};
  sc.T = cfg.T;
  sc.dt_max = cfg.dt_max;
  sc.cfl = cfg.cfl;
  sc.outputs_per_decade = cfg.outputs_per_decade;
  sc.first_output = cfg.first_output;
  sc.m_list = {cfg.m};
  sc.blowup_factor = cfg.blowup_factor;
  sc.R0 = R0;
  const auto data = make_initial_data(sc.grid, cfg.data, cell.eps, cfg.width, cfg.seed, cfg.velocity_factor);
  SimulationResult res = simulate(sc, data);
  cell.steps = res.steps;
  cell.series = std::move(res.series);
  if (res.blowup) {
    cell.outcome = Outcome::blowup;
    cell.t_star = res.blowup->t_star;
    cell.reason = res.blowup->reason;
    return;
  }
  const auto& l2 = cell.series.track("L2");
  bool zero = true;
  for (double v : l2) zero = zero && v == 0.0;
  if (zero) {
    cell.outcome = Outcome::global_decay;
    cell.reason = "zero solution";
    return;
  }
  try {
    const DecayFit fit = fit_decay(cell.series, "L2", cfg.window);
    cell.alpha = fit.alpha;
    cell.residual = fit.residual;
    std::vector<double> x, y;
    for (std::size_t i = 0; i < cell.series.size(); ++i) {
      if (cell.series.times[i] >= cfg.T / 10.0 && l2[i] > 0.0) {
        x.push_back(std::log(cell.series.lambda_big[i]));
        y.push_back(std::log(l2[i]));
      }
    }
    if (x.size() >= 2) cell.last_decade_slope = slope_loglog(x, y);
    const bool decaying = fit.alpha > 0.0;
    const bool smooth = fit.residual < cfg.residual_threshold;
    const bool no_growth = x.size() >= 2 && cell.last_decade_slope <= 0.0;
    if (decaying && smooth && no_growth) {
      cell.outcome = Outcome::global_decay;
      cell.reason = "L2 decays with fitted alpha " + fmt(fit.alpha);
    } else {
      cell.outcome = Outcome::undecided;
      cell.reason = !decaying ? "fitted L2 slope is not negative"
                    : (!smooth ? "fit residual above threshold" : "L2 grows over the last decade");
    }
  } catch (const Error& e) {
    cell.outcome = Outcome::undecided;
    cell.reason = std::string("fit failed: ") + e.what();
  }
}

}  // namespace

ScanResult run_scan(const ScanConfig& config, unsigned workers) {
  config.validate();
  ScanResult out;
  out.p_axis = config.p_values;
  out.eps_axis = config.eps_values;
  out.mu_axis = config.mu_values.empty() ? std::vector<double>{config.mu} : config.mu_values;
  out.gamma_axis = config.gamma_values.empty() ? std::vector<double>{0.0} : config.gamma_values;
  const std::size_t P = out.p_axis.size(), E = out.eps_axis.size(), G = out.gamma_axis.size(), M = out.mu_axis.size();
  out.cells.resize(P * E * G * M);
  for (std::size_t a = 0; a < M; ++a)
    for (std::size_t g = 0; g < G; ++g)
      for (std::size_t e = 0; e < E; ++e)
        for (std::size_t p = 0; p < P; ++p) {
          const std::size_t idx = ((a * G + g) * E + e) * P + p;
          ScanCell& c = out.cells[idx];
          c.index = idx;
          c.p = out.p_axis[p];
          c.eps = out.eps_axis[e];
          c.mu = out.mu_axis[a];
          c.gamma = out.gamma_axis[g];
        }
  parallel_for(out.cells.size(), [&](std::size_t i) {
    ScanCell& c = out.cells[i];
    try {
      run_cell(config, c);
    } catch (const std::exception& e) {
      c.outcome = Outcome::undecided;
      c.reason = std::string("cell failed: ") + e.what();
    }
  }, workers);

  // Monotonicity probe along increasing p.
  std::vector<std::size_t> order(P);
  for (std::size_t i = 0; i < P; ++i) order[i] = i;
  std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return out.p_axis[a] < out.p_axis[b]; });
  for (std::size_t a = 0; a < M; ++a)
    for (std::size_t g = 0; g < G; ++g)
      for (std::size_t e = 0; e < E; ++e) {
        const std::size_t base = ((a * G + g) * E + e) * P;
        int run = 0;
        bool armed = false;
        for (std::size_t k : order) {
          const ScanCell& c = out.cells[base + k];
          if (c.outcome == Outcome::global_decay) {
            armed = armed || ++run >= 2;
          } else {
            run = 0;
            if (armed) {
              out.monotonicity_violations.push_back("cell " + std::to_string(c.index) + " (p = " + fmt(c.p) +
                                                    ", eps = " + fmt(c.eps) + ") is " + to_string(c.outcome) +
                                                    " after two consecutive global_decay cells");
            }
          }
        }
      }
  return out;
}

void write_scan(const std::string& directory, const ScanConfig& config, const ScanResult& result,
                const std::string& config_json) {
  namespace fs = std::filesystem;
  fs::create_directories(directory);
  const fs::path dir(directory);
  std::ostringstream csv;
  csv.precision(17);
  csv << "index,p,eps,mu,gamma,outcome,t_star,alpha,residual,last_decade_slope,at_threshold,p_crit,L,steps,reason\n";
  for (const auto& c : result.cells) {
    std::string reason = c.reason;
    std::replace(reason.begin(), reason.end(), ',', ';');
    std::replace(reason.begin(), reason.end(), '\n', ' ');
    csv << c.index << ',' << c.p << ',' << c.eps << ',' << c.mu << ',' << c.gamma << ',' << to_string(c.outcome) << ','
        << c.t_star << ',' << c.alpha << ',' << c.residual << ',' << c.last_decade_slope << ','
        << (c.at_threshold ? 1 : 0) << ',' << c.p_crit << ',' << c.L << ',' << c.steps << ',' << reason << '\n';
  }
  {
    std::ofstream os(dir / "outcomes.csv");
    if (!os) throw Error("cannot write " + (dir / "outcomes.csv").string());
    os << csv.str();
  }
  for (const auto& c : result.cells) {
    if (c.series.size() == 0) continue;
    std::ofstream os(dir / ("cell_" + std::to_string(c.index) + ".csv"));
    os << to_csv(c.series, {"L1", "L2", "H1_seminorm", "energy", "Linf", "blowup_flag"});
  }
  nlohmann::ordered_json m;
  m["kind"] = "dampwave-scan";
  m["config"] = nlohmann::ordered_json::parse(config_json);
  m["axes"] = {{"p", result.p_axis}, {"eps", result.eps_axis}, {"mu", result.mu_axis}, {"gamma", result.gamma_axis}};
  m["index_order"] = "((mu * n_gamma + gamma) * n_eps + eps) * n_p + p";
  m["T"] = config.T;
  m["critical_exponent_m"] = config.m;
  nlohmann::ordered_json cells = nlohmann::ordered_json::array();
  for (const auto& c : result.cells) {
    nlohmann::ordered_json j;
    j["index"] = c.index;
    j["p"] = c.p;
    j["eps"] = c.eps;
    j["mu"] = c.mu;
    j["gamma"] = c.gamma;
    j["outcome"] = to_string(c.outcome);
    j["t_star"] = std::isfinite(c.t_star) ? nlohmann::ordered_json(c.t_star) : nlohmann::ordered_json(nullptr);
    j["alpha"] = std::isfinite(c.alpha) ? nlohmann::ordered_json(c.alpha) : nlohmann::ordered_json(nullptr);
    j["at_threshold"] = c.at_threshold;
    j["reason"] = c.reason;
    j["series"] = c.series.size() ? "cell_" + std::to_string(c.index) + ".csv" : "";
    cells.push_back(j);
  }
  m["cells"] = cells;
  m["monotonicity_violations"] = result.monotonicity_violations;
  m["note"] = "global_decay is an empirical label from a finite-time simulation, not a proof of global existence";
  std::ofstream os(dir / "manifest.json");
  os << m.dump(2) << '\n';
}

}  // namespace dampwave
