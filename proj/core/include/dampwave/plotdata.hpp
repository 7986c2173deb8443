#pragma once

#include <string>
#include <vector>

#include "dampwave/analysis.hpp"
#include "dampwave/series.hpp"

namespace dampwave {

enum class PlotStyle { loglog_decay, phase_map };
std::string to_string(PlotStyle style);
PlotStyle plot_style_from_string(const std::string& s);

struct PlotFiles {
  std::string data;
  std::string script;
};

/// Reference slope drawn on a log-log decay plot: norm ~ Lambda^-slope (times log if set).
struct ReferenceSlope {
  std::string track;
  double slope = 0.0;
  bool log_factor = false;
};

/// Reference lines for the L2 and energy tracks from the catalog's decay rates.
std::vector<ReferenceSlope> reference_slopes(const ExponentReport& report);

/// <stem>.dat (columns Lambda_t, t, tracks) and <stem>.gp. Each reference line is
/// anchored at the last sample of its track. Throws DomainError before writing
/// anything when the series is empty or a track is missing.
PlotFiles emit_loglog_decay(const NormSeries& series, const std::vector<std::string>& tracks,
                            const std::vector<ReferenceSlope>& references, const std::string& directory,
                            const std::string& stem = "decay");

/// One row per scan cell: p eps outcome_code t_star alpha (outcome codes 0 global_decay,
/// 1 blowup, 2 undecided), plus a script with a vertical line at p_crit.
PlotFiles emit_phase_map(const std::string& outcomes_csv, const std::string& directory,
                         const std::string& stem = "phase_map");

}  // namespace dampwave
