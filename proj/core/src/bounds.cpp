#include "dampwave/bounds.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>
#include <numbers>

#include "dampwave/error.hpp"
#include "dampwave/multipliers.hpp"
#include "dampwave/parallel.hpp"
#include "dampwave/quadrature.hpp"

namespace dampwave {

namespace {

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

double sphere_area(int n) {
  switch (n) {
    case 1: return 2.0;
    case 2: return 2.0 * std::numbers::pi;
    case 3: return 4.0 * std::numbers::pi;
  }
  throw DomainError("dimension must be 1, 2 or 3");
}

std::vector<double> log_grid(double lo, double hi, int per_decade) {
  std::vector<double> out;
  const double a = std::log10(lo);
  const double b = std::log10(hi);
  const auto count = std::max(1, static_cast<int>(std::ceil((b - a) * per_decade)));
  for (int k = 0; k <= count; ++k) out.push_back(std::pow(10.0, a + (b - a) * k / count));
  return out;
}

bool close(double a, double b) { return std::abs(a - b) <= 1e-9 * std::max(1.0, std::abs(b)); }

// Everything evaluated at one (s, t): endpoint data plus the four multipliers.
struct Sample {
  double lam_s, Lam_s, lam_t, Lam_t;
};

// Quantities compared against the templates. Solution multipliers carry the
// normalization of the data norms in the estimates (v1 enters with Lambda_s/lambda_s).
double solution_mult(const MultiplierValues& v, const Sample& p) {
  return std::max(std::abs(v.phi0), p.lam_s / p.Lam_s * std::abs(v.phi1));
}

double energy_mult_h1(const MultiplierValues& v, const Sample& p, double xi) {
  const double e0 = std::hypot(p.lam_t * xi * std::abs(v.phi0), std::abs(v.dphi0)) / std::sqrt(1.0 + xi * xi);
  const double e1 = p.lam_s * std::hypot(p.lam_t * xi * std::abs(v.phi1), std::abs(v.dphi1));
  return std::max(e0, e1);
}

double energy_mult_lm(const MultiplierValues& v, const Sample& p, double xi, int j) {
  if (j == 0) return std::hypot(p.lam_t * xi * std::abs(v.phi0), std::abs(v.dphi0));
  return p.lam_s / p.Lam_s * std::hypot(p.lam_t * xi * std::abs(v.phi1), std::abs(v.dphi1));
}

using Rate = std::function<double(const Sample&)>;

struct SupTemplate {
  std::string name;
  std::string rate_text;
  bool expected;
  bool only_I1;
  bool energy;
  Rate rate;
};

struct LqTemplate {
  std::string name;
  std::string rate_text;
  bool energy;
  Rate rate;
};

struct Cell {
  double ratio = 0.0;
  double s = kNaN;
  double xi = kNaN;
};

void finish(TemplateReport& rep, const std::vector<double>& Lam_t, double t_max) {
  std::vector<double> last;
  for (std::size_t k = 0; k < rep.t.size(); ++k) {
    if (rep.t[k] >= t_max / 10.0 * (1.0 - 1e-12)) last.push_back(rep.ratio[k]);
  }
  if (!last.empty()) {
    rep.max_last_decade = *std::max_element(last.begin(), last.end());
    std::vector<double> sorted = last;
    std::nth_element(sorted.begin(), sorted.begin() + sorted.size() / 2, sorted.end());
    double med = sorted[sorted.size() / 2];
    if (sorted.size() % 2 == 0) {
      const double lower = *std::max_element(sorted.begin(), sorted.begin() + sorted.size() / 2);
      med = 0.5 * (med + lower);
    }
    rep.median_last_decade = med;
  }
  // Slope of log ratio vs log Lambda_t over the largest decade.
  double sx = 0, sy = 0, sxx = 0, sxy = 0;
  int cnt = 0;
  for (std::size_t k = 0; k < rep.t.size(); ++k) {
    if (rep.t[k] < t_max / 10.0 * (1.0 - 1e-12) || !(rep.ratio[k] > 0.0)) continue;
    const double x = std::log(Lam_t[k]);
    const double y = std::log(rep.ratio[k]);
    sx += x;
    sy += y;
    sxx += x * x;
    sxy += x * y;
    ++cnt;
  }
  const double den = cnt * sxx - sx * sx;
  rep.growth_slope = cnt > 1 && den > 0.0 ? (cnt * sxy - sx * sy) / den : 0.0;
  const bool finite_vals = std::all_of(rep.ratio.begin(), rep.ratio.end(),
                                       [](double r) { return std::isfinite(r); });
  rep.bounded = finite_vals && rep.max_last_decade <= 10.0 * rep.median_last_decade &&
                rep.growth_slope <= kGrowthSlopeLimit;
}

}  // namespace

const TemplateReport* BoundReport::find(const std::string& name) const {
  for (const auto& t : templates) {
    if (t.name == name) return &t;
  }
  return nullptr;
}

BoundReport certify_zone_bounds(double mu, const SpeedProfile& profile, double m,
                                const BoundSampleSpec& spec) {
  if (!(m >= 1.0 && m <= 2.0)) throw DomainError("certify_zone_bounds: m must lie in [1, 2]");
  if (!(spec.K > 0.0 && spec.K < 1.0)) throw DomainError("certify_zone_bounds: K must lie in (0, 1)");
  if (!(spec.t_min > 0.0 && spec.t_max > spec.t_min)) throw DomainError("certify_zone_bounds: bad t range");
  if (spec.s_values.empty()) throw DomainError("certify_zone_bounds: no s samples");
  const int n = spec.n;
  const double area = sphere_area(n);

  BoundReport report;
  report.mu = mu;
  report.m = m;
  report.n = n;
  const double inv_q = 1.0 / m - 0.5;
  report.q = inv_q > 0.0 ? 1.0 / inv_q : std::numeric_limits<double>::infinity();
  const double nq = n * inv_q;  // n/q
  const double half_mu = 0.5 * mu;
  const double crit_sol = n * (2.0 / m - 1.0);
  const double crit_en = 2.0 + crit_sol;

  std::vector<SupTemplate> sups;
  std::vector<LqTemplate> lqs;
  if (inv_q == 0.0) {
    sups.push_back({"solution_sup", "1", mu >= 1.0, false, false, [](const Sample&) { return 1.0; }});
    sups.push_back({"energy_effective_sup", "lambda_t Lambda_s / Lambda_t", mu >= 2.0, false, true,
                    [](const Sample& p) { return p.lam_t * p.Lam_s / p.Lam_t; }});
    sups.push_back({"energy_noneffective_sup", "lambda_t (Lambda_s/Lambda_t)^(mu/2)", mu <= 2.0, false,
                    true, [half_mu](const Sample& p) { return p.lam_t * std::pow(p.Lam_s / p.Lam_t, half_mu); }});
    if (mu < 1.0) report.notes.push_back("mu < 1: the L2-L2 solution estimate is not claimed");
  } else {
    if (mu >= crit_sol) {
      sups.push_back({"solution_sup_I1", "(Lambda_s/Lambda_t)^(n/q)", true, true, false,
                      [nq](const Sample& p) { return std::pow(p.Lam_s / p.Lam_t, nq); }});
    }
    if (mu >= crit_en) {
      sups.push_back({"energy_sup_I1", "lambda_t (Lambda_s/Lambda_t)^(n/q+1)", true, true, true,
                      [nq](const Sample& p) { return p.lam_t * std::pow(p.Lam_s / p.Lam_t, nq + 1.0); }});
    }
    if (close(mu, crit_sol) && mu >= 1.0) {
      lqs.push_back({"solution_Lq_log", "Lambda_t^(-mu/2) log(1 + Lambda_t/Lambda_s)", false,
                     [half_mu](const Sample& p) {
                       return std::pow(p.Lam_t, -half_mu) * std::log1p(p.Lam_t / p.Lam_s);
                     }});
    } else if (mu > crit_sol && mu >= 1.0) {
      lqs.push_back({"solution_Lq", "Lambda_t^(-n/q)", false,
                     [nq](const Sample& p) { return std::pow(p.Lam_t, -nq); }});
    } else {
      report.notes.push_back("mu below n(2/m-1): no L^q solution template");
    }
    if (close(mu, crit_en)) {
      lqs.push_back({"energy_Lq_log", "lambda_t Lambda_t^(-mu/2) log(1 + Lambda_t/Lambda_s)", true,
                     [half_mu](const Sample& p) {
                       return p.lam_t * std::pow(p.Lam_t, -half_mu) * std::log1p(p.Lam_t / p.Lam_s);
                     }});
    } else if (mu > crit_en) {
      lqs.push_back({"energy_Lq", "lambda_t Lambda_t^(-n/q-1)", true,
                     [nq](const Sample& p) { return p.lam_t * std::pow(p.Lam_t, -nq - 1.0); }});
    } else {
      report.notes.push_back("mu below 2 + n(2/m-1): no L^q energy template");
    }
  }

  const std::vector<double> ts = log_grid(spec.t_min, spec.t_max, spec.t_per_decade);
  std::vector<double> Lam_t(ts.size());
  for (std::size_t k = 0; k < ts.size(); ++k) Lam_t[k] = profile.primitive(ts[k]);

  const std::size_t nt = ts.size();
  const std::size_t nsup = sups.size();
  const std::size_t nlq = lqs.size();
  std::vector<Cell> cells(nt * (nsup + nlq));

  parallel_for(nt, [&](std::size_t k) {
    const double t = ts[k];
    for (double s : spec.s_values) {
      if (s >= t) continue;
      Sample p{profile.speed(s), profile.primitive(s), profile.speed(t), profile.primitive(t)};
      const double xi_I1 = spec.K / p.Lam_s;
      const double xi_I3 = spec.K / p.Lam_t;

      if (nsup > 0) {
        // Sampled sup: whole line down into I3, or I1 only.
        const auto grid_all = log_grid(xi_I3 * 1e-3, spec.xi_max, spec.xi_per_decade);
        const auto grid_I1 = xi_I1 < spec.xi_max ? log_grid(xi_I1, spec.xi_max, spec.xi_per_decade)
                                                 : std::vector<double>{};
        std::vector<MultiplierValues> vals_all;
        vals_all.reserve(grid_all.size());
        for (double xi : grid_all) vals_all.push_back(phi_values(mu, profile, s, t, xi));
        std::vector<MultiplierValues> vals_I1;
        vals_I1.reserve(grid_I1.size());
        for (double xi : grid_I1) vals_I1.push_back(phi_values(mu, profile, s, t, xi));
        for (std::size_t j = 0; j < nsup; ++j) {
          const auto& tpl = sups[j];
          const auto& grid = tpl.only_I1 ? grid_I1 : grid_all;
          const auto& vals = tpl.only_I1 ? vals_I1 : vals_all;
          const double rate = tpl.rate(p);
          Cell& c = cells[k * (nsup + nlq) + j];
          for (std::size_t i = 0; i < grid.size(); ++i) {
            const double val = tpl.energy ? energy_mult_h1(vals[i], p, grid[i]) : solution_mult(vals[i], p);
            const double r = val / rate;
            if (r > c.ratio || !std::isfinite(r)) {
              c.ratio = r;
              c.s = s;
              c.xi = grid[i];
            }
          }
        }
      }

      if (nlq > 0) {
        const double q = report.q;
        // Oscillation in xi of |Phi|^q comes from phases (Lambda_t - Lambda_s) xi.
        const double freq = std::max(1.0, q) * (p.Lam_t - p.Lam_s);
        for (std::size_t j = 0; j < nlq; ++j) {
          const auto& tpl = lqs[j];
          double worst = 0.0;
          for (int data = 0; data <= 1; ++data) {
            auto integrand = [&](double xi) {
              if (xi <= 0.0) return 0.0;
              const MultiplierValues v = phi_values(mu, profile, s, t, xi);
              const double val = tpl.energy
                                     ? energy_mult_lm(v, p, xi, data)
                                     : (data == 0 ? std::abs(v.phi0) : p.lam_s / p.Lam_s * std::abs(v.phi1));
              return area * std::pow(xi, n - 1) * std::pow(val, q);
            };
            QuadratureOptions opt;
            opt.rel_tol = 1e-6;
            const auto res = integrate_panels(integrand, 0.0, xi_I1, freq, true, opt);
            worst = std::max(worst, std::pow(std::max(0.0, res.value), 1.0 / q));
          }
          Cell& c = cells[k * (nsup + nlq) + nsup + j];
          const double r = worst / tpl.rate(p);
          if (r > c.ratio) {
            c.ratio = r;
            c.s = s;
          }
        }
      }
    }
  });

  auto assemble = [&](const std::string& name, const std::string& zone, const std::string& rate,
                      bool expected, std::size_t col) {
    TemplateReport rep;
    rep.name = name;
    rep.zone = zone;
    rep.rate = rate;
    rep.expected_bounded = expected;
    rep.max_xi = kNaN;
    for (std::size_t k = 0; k < nt; ++k) {
      const Cell& c = cells[k * (nsup + nlq) + col];
      if (std::isnan(c.s)) continue;  // every s >= t
      rep.t.push_back(ts[k]);
      rep.ratio.push_back(c.ratio);
      if (c.ratio > rep.max_ratio || !std::isfinite(c.ratio)) {
        rep.max_ratio = c.ratio;
        rep.max_s = c.s;
        rep.max_t = ts[k];
        rep.max_xi = c.xi;
      }
    }
    std::vector<double> lam;
    for (double t : rep.t) lam.push_back(profile.primitive(t));
    finish(rep, lam, spec.t_max);
    report.templates.push_back(std::move(rep));
  };
  for (std::size_t j = 0; j < nsup; ++j) {
    assemble(sups[j].name, sups[j].only_I1 ? "I1" : "all", sups[j].rate_text, sups[j].expected, j);
  }
  for (std::size_t j = 0; j < nlq; ++j) assemble(lqs[j].name, "I2+I3", lqs[j].rate_text, true, nsup + j);
  return report;
}

}  // namespace dampwave
