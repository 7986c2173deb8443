#pragma once

#include <string>
#include <vector>

#include "dampwave/profiles.hpp"

namespace dampwave {

/// Log grids used by certify_zone_bounds.
struct BoundSampleSpec {
  std::vector<double> s_values{0.0, 0.5, 2.0, 8.0};
  double t_min = 1.0;
  double t_max = 1e3;
  int t_per_decade = 40;
  int xi_per_decade = 40;
  double xi_max = 50.0;
  double K = 0.5;
  int n = 1;
};

/// Ratio of a sampled multiplier quantity to one rate template, tracked over t.
struct TemplateReport {
  std::string name;
  std::string zone;  // "all", "I1" (sampled sup) or "I2+I3" (L^q integral)
  std::string rate;  // human-readable rate formula
  bool expected_bounded = true;

  std::vector<double> t;
  std::vector<double> ratio;  // max over s at each t

  double max_ratio = 0.0;
  double max_s = 0.0;
  double max_t = 0.0;
  double max_xi = 0.0;  // NaN for integral templates

  double max_last_decade = 0.0;
  double median_last_decade = 0.0;
  /// Least-squares slope of log ratio against log Lambda(t) over the largest t decade.
  double growth_slope = 0.0;
  /// max_last_decade <= 10 median_last_decade and growth_slope <= kGrowthSlopeLimit.
  bool bounded = false;
};

inline constexpr double kGrowthSlopeLimit = 0.1;

struct BoundReport {
  double mu = 0.0;
  double m = 2.0;
  int n = 1;
  double q = 0.0;  // (1/m - 1/2)^-1; infinity for m = 2
  std::vector<TemplateReport> templates;
  std::vector<std::string> notes;

  const TemplateReport* find(const std::string& name) const;
};

/// Samples |Phi_j| and their energy combinations on log grids and compares them with
/// the linear decay templates:
///   m = 2:  sup over all xi of the solution multipliers vs 1, of the energy
///           multipliers vs (lambda_t/Lambda_t) Lambda_s and vs
///           lambda_t (Lambda_s/Lambda_t)^(mu/2);
///   m < 2:  sup over I1 vs (Lambda_s/Lambda_t)^(n/q) (resp. lambda_t (..)^(n/q+1)) and
///           the L^q(I2 u I3) norms, q = (1/m - 1/2)^-1, vs Lambda_t^(-n/q)
///           (resp. lambda_t Lambda_t^(-n/q-1)), with the log-corrected template
///           Lambda_t^(-mu/2) log(1 + Lambda_t/Lambda_s) at the borderline values of mu.
/// Parallel over t samples; the report does not depend on the thread count.
BoundReport certify_zone_bounds(double mu, const SpeedProfile& profile, double m,
                                const BoundSampleSpec& spec = {});

}  // namespace dampwave
