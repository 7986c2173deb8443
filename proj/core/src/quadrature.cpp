#include "dampwave/quadrature.hpp"

#include <boost/math/quadrature/gauss.hpp>
#include <boost/math/quadrature/gauss_kronrod.hpp>

#include <algorithm>
#include <cmath>
#include <queue>
#include <sstream>

#include "dampwave/error.hpp"

namespace dampwave {

namespace {

std::vector<double> panel_edges(double a, double b, double frequency, bool geometric,
                                const QuadratureOptions& opt) {
  std::vector<double> cells{a};
  if (geometric && a >= 0.0) {
    const double ratio = std::pow(10.0, 1.0 / opt.log_panels_per_decade);
    std::vector<double> down;
    for (double e = b / ratio; e > std::max(a, b * opt.geometric_floor); e /= ratio) down.push_back(e);
    cells.insert(cells.end(), down.rbegin(), down.rend());
  }
  cells.push_back(b);
  std::vector<double> edges{a};
  const double width = frequency > 0.0 ? opt.max_phase_per_panel / frequency : 0.0;
  for (std::size_t k = 1; k < cells.size(); ++k) {
    const double lo = cells[k - 1];
    const double hi = cells[k];
    const long count = width > 0.0 ? std::max(1L, static_cast<long>(std::ceil((hi - lo) / width))) : 1L;
    for (long j = 1; j < count; ++j) edges.push_back(lo + (hi - lo) * static_cast<double>(j) / static_cast<double>(count));
    edges.push_back(hi);
  }
  return edges;
}

struct Panel {
  double lo = 0.0;
  double hi = 0.0;
  unsigned depth = 0;
  double priority = 0.0;
  std::vector<double> value, error, l1;
  bool operator<(const Panel& o) const { return priority < o.priority; }
};

// 15-point Kronrod rule with the embedded 7-point Gauss rule for the error estimate.
void kronrod_panel(const std::function<void(double, double*)>& f, std::size_t dim, Panel& p) {
  using GK = boost::math::quadrature::gauss_kronrod<double, 15>;
  using G = boost::math::quadrature::gauss<double, 7>;
  static const auto& xk = GK::abscissa();
  static const auto& wk = GK::weights();
  static const auto& wg = G::weights();
  const double c = 0.5 * (p.lo + p.hi);
  const double h = 0.5 * (p.hi - p.lo);
  std::vector<double> kr(dim, 0.0), ga(dim, 0.0), ab(dim, 0.0);
  std::vector<double> f1(dim), f2(dim);
  f(c, f1.data());
  for (std::size_t d = 0; d < dim; ++d) {
    kr[d] = wk[0] * f1[d];
    ga[d] = wg[0] * f1[d];
    ab[d] = wk[0] * std::abs(f1[d]);
  }
  for (std::size_t i = 1; i < xk.size(); ++i) {
    f(c - h * xk[i], f1.data());
    f(c + h * xk[i], f2.data());
    for (std::size_t d = 0; d < dim; ++d) {
      kr[d] += wk[i] * (f1[d] + f2[d]);
      ab[d] += wk[i] * (std::abs(f1[d]) + std::abs(f2[d]));
      if (i % 2 == 0) ga[d] += wg[i / 2] * (f1[d] + f2[d]);
    }
  }
  p.value.resize(dim);
  p.error.resize(dim);
  p.l1.resize(dim);
  for (std::size_t d = 0; d < dim; ++d) {
    p.value[d] = h * kr[d];
    p.error[d] = h * std::abs(kr[d] - ga[d]);
    p.l1[d] = h * ab[d];
    if (!std::isfinite(p.value[d])) {
      std::ostringstream os;
      os << "integrate_panels: non-finite panel value on [" << p.lo << ", " << p.hi << "]";
      throw QuadratureError(os.str());
    }
  }
}

}  // namespace

QuadratureResultN integrate_panels_n(const std::function<void(double, double*)>& f, std::size_t dim,
                                     double a, double b, double frequency, bool geometric,
                                     const QuadratureOptions& options) {
  if (!std::isfinite(a) || !std::isfinite(b) || b < a) {
    throw QuadratureError("integrate_panels: invalid interval");
  }
  if (dim == 0) throw QuadratureError("integrate_panels: dimension must be positive");
  QuadratureResultN out;
  out.value.assign(dim, 0.0);
  out.error_estimate.assign(dim, 0.0);
  if (a == b) return out;

  std::vector<double> value(dim, 0.0), error(dim, 0.0), l1(dim, 0.0);
  std::priority_queue<Panel> heap;
  auto add = [&](const Panel& p, double sign) {
    for (std::size_t d = 0; d < dim; ++d) {
      value[d] += sign * p.value[d];
      error[d] += sign * p.error[d];
      l1[d] += sign * p.l1[d];
    }
  };
  auto tolerance = [&](std::size_t d) { return std::max(options.abs_tol, options.rel_tol * l1[d]); };
  auto priority = [&](const Panel& p) {
    double pr = 0.0;
    for (std::size_t d = 0; d < dim; ++d) pr = std::max(pr, p.error[d] / std::max(tolerance(d), 1e-300));
    return pr;
  };
  auto converged = [&] {
    for (std::size_t d = 0; d < dim; ++d) {
      if (error[d] > tolerance(d)) return false;
    }
    return true;
  };

  const auto edges = panel_edges(a, b, frequency, geometric, options);
  std::vector<Panel> initial(edges.size() - 1);
  for (std::size_t k = 1; k < edges.size(); ++k) {
    Panel& p = initial[k - 1];
    p.lo = edges[k - 1];
    p.hi = edges[k];
    kronrod_panel(f, dim, p);
    add(p, 1.0);
  }
  for (auto& p : initial) {
    p.priority = priority(p);
    heap.push(std::move(p));
  }
  // Global adaptivity: bisect the panel contributing most to the error. Priorities are
  // relative to the tolerance at push time, which only matters for the order of work.
  const std::size_t budget = (edges.size() - 1) * 64 + 4096;
  while (!converged() && !heap.empty() && heap.size() < budget) {
    Panel worst = heap.top();
    if (worst.depth >= options.max_depth) break;
    heap.pop();
    const double mid = 0.5 * (worst.lo + worst.hi);
    Panel left, right;
    left.lo = worst.lo;
    left.hi = mid;
    right.lo = mid;
    right.hi = worst.hi;
    left.depth = right.depth = worst.depth + 1;
    kronrod_panel(f, dim, left);
    kronrod_panel(f, dim, right);
    add(worst, -1.0);
    add(left, 1.0);
    add(right, 1.0);
    left.priority = priority(left);
    right.priority = priority(right);
    heap.push(std::move(left));
    heap.push(std::move(right));
  }
  out.value = value;
  out.error_estimate = error;
  out.panels = static_cast<long>(heap.size());
  for (std::size_t d = 0; d < dim; ++d) {
    if (error[d] > tolerance(d)) {
      std::ostringstream os;
      os.precision(6);
      os << "integrate_panels: component " << d << " error estimate " << error[d] << " exceeds tolerance "
         << tolerance(d) << " on [" << a << ", " << b << "] after " << out.panels << " panels (value "
         << value[d] << ")";
      throw QuadratureError(os.str());
    }
  }
  return out;
}

QuadratureResult integrate_panels(const std::function<double(double)>& f, double a, double b,
                                  double frequency, bool geometric,
                                  const QuadratureOptions& options) {
  const auto r = integrate_panels_n([&](double x, double* out) { out[0] = f(x); }, 1, a, b, frequency,
                                    geometric, options);
  return {r.value[0], r.error_estimate[0], r.panels};
}

}  // namespace dampwave
