#pragma once

#include <functional>
#include <string>
#include <vector>

namespace dampwave {

struct QuadratureOptions {
  double rel_tol = 1e-10;
  double abs_tol = 1e-300;
  /// Bisection depth allowed for any initial panel.
  unsigned max_depth = 12;
  /// Panels are at most this many radians of the declared oscillation phase wide.
  double max_phase_per_panel = 3.141592653589793;
  /// Geometric cells per decade when `geometric` is requested.
  int log_panels_per_decade = 4;
  /// Smallest geometric cell edge relative to b; [a, b * floor] is one panel.
  double geometric_floor = 1e-12;
};

struct QuadratureResult {
  double value = 0.0;
  double error_estimate = 0.0;
  long panels = 0;
};

/// int_a^b f by composite Gauss-Kronrod (15 point) panels with global adaptive bisection.
///
/// `frequency` bounds the oscillation rate of f in radians per unit length; panels are
/// cut so none spans more than options.max_phase_per_panel of phase. With `geometric`
/// the interval is first cut into log-spaced cells (a >= 0), which resolves power-law
/// behaviour near 0.
/// Throws QuadratureError when the summed error estimate misses the tolerance.
QuadratureResult integrate_panels(const std::function<double(double)>& f, double a, double b,
                                  double frequency, bool geometric = false,
                                  const QuadratureOptions& options = {});

struct QuadratureResultN {
  std::vector<double> value;
  std::vector<double> error_estimate;
  long panels = 0;
};

/// Vector-valued variant: f(x, out) fills out[0..dim). Every component must meet the
/// tolerance relative to its own L1 mass.
QuadratureResultN integrate_panels_n(const std::function<void(double, double*)>& f, std::size_t dim,
                                     double a, double b, double frequency, bool geometric = false,
                                     const QuadratureOptions& options = {});

}  // namespace dampwave
