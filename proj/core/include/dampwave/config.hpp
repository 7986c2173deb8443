#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "dampwave/analysis.hpp"
#include "dampwave/profiles.hpp"
#include "dampwave/spectral.hpp"

namespace dampwave {

struct DataSpec {
  DataKind kind = DataKind::gaussian;
  double amplitude = 1.0;
  double width = 1.0;
  double velocity_factor = 0.0;
};

struct OutputSpec {
  double dt_max = 0.05;
  double cfl = 0.25;
  int outputs_per_decade = 20;
  double first_output = 0.1;
  std::vector<double> m_list{1.0};
  double blowup_factor = 1e6;
  double light_cone_tolerance = 1e-8;
};

/// A fully defaulted, validated simulation request.
struct RunConfig {
  SpeedProfile profile = SpeedProfile::constant();
  DampingSpec damping;
  Grid grid;
  NonlinearitySpec nonlinearity;
  DataSpec data;
  double T = 10.0;
  OutputSpec output;
  WeightedNormSpec weighted;
  double K = 0.5;
  double window = 0.5;
  std::uint64_t seed = 0;
  double memory_cap_bytes = 4e9;
  /// Non-fatal notes: admissibility of p, mu outside a result's range, dissipativity.
  std::vector<std::string> warnings;

  SimulationConfig simulation() const;
  InitialData initial_data() const;
};

/// Parses and validates a run configuration. Required: profile.kind, exactly one of
/// mu / nu, grid.n, grid.N, T. grid.L defaults to the domain rule
/// R0 + (Lambda(T) - lambda0) + 2. Throws ValidationError listing every violation.
RunConfig validate_config(const std::string& json_text);

/// Canonical serialization: every field present, fixed key order, compact.
/// validate_config(canonical_json(c)) reproduces the same canonical form.
std::string canonical_json(const RunConfig& config);

/// 64-bit FNV-1a of the canonical form, as 16 hex digits.
std::string run_id(const RunConfig& config);
std::string fnv1a_hex(const std::string& bytes);

/// Scan configuration from JSON; base keys as in a run configuration plus
/// "p", "eps" (required) and optional "mu_values", "gamma".
ScanConfig validate_scan_config(const std::string& json_text);
std::string canonical_json(const ScanConfig& config);

}  // namespace dampwave
