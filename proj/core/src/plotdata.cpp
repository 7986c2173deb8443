#include "dampwave/plotdata.hpp"

#include <cmath>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "dampwave/error.hpp"

namespace dampwave {

namespace {

std::vector<std::string> split(const std::string& line, char sep) {
  std::vector<std::string> out;
  std::string cur;
  for (char c : line) {
    if (c == sep) {
      out.push_back(cur);
      cur.clear();
    } else if (c != '\r') {
      cur.push_back(c);
    }
  }
  out.push_back(cur);
  return out;
}

void write_file(const std::filesystem::path& p, const std::string& text) {
  std::ofstream os(p);
  if (!os) throw Error("cannot write " + p.string());
  os << text;
}

}  // namespace

std::string to_string(PlotStyle style) { return style == PlotStyle::loglog_decay ? "loglog_decay" : "phase_map"; }

PlotStyle plot_style_from_string(const std::string& s) {
  if (s == "loglog_decay") return PlotStyle::loglog_decay;
  if (s == "phase_map") return PlotStyle::phase_map;
  throw DomainError("unknown plot style '" + s + "' (expected loglog_decay or phase_map)");
}

std::vector<ReferenceSlope> reference_slopes(const ExponentReport& report) {
  std::vector<ReferenceSlope> out;
  if (!report.rates.applicable) return out;
  out.push_back({"L2", report.rates.solution, false});
  out.push_back({"energy", report.rates.energy, report.rates.energy_log});
  return out;
}

PlotFiles emit_loglog_decay(const NormSeries& series, const std::vector<std::string>& tracks,
                            const std::vector<ReferenceSlope>& references, const std::string& directory,
                            const std::string& stem) {
  if (series.size() == 0) throw DomainError("cannot plot an empty series");
  if (tracks.empty()) throw DomainError("no tracks selected for plotting");
  for (const auto& t : tracks) {
    if (!series.has(t)) throw DomainError("series has no track '" + t + "'");
  }
  std::ostringstream dat;
  dat.precision(17);
  dat << "# Lambda_t t";
  for (const auto& t : tracks) dat << ' ' << t;
  dat << '\n';
  for (std::size_t i = 0; i < series.size(); ++i) {
    dat << series.lambda_big[i] << ' ' << series.times[i];
    for (const auto& t : tracks) dat << ' ' << series.tracks.at(t)[i];
    dat << '\n';
  }

  std::ostringstream gp;
  gp.precision(17);
  gp << "set logscale xy\nset xlabel 'Lambda(t)'\nset ylabel 'norm'\nset key bottom left\n";
  std::vector<std::string> plots;
  for (std::size_t c = 0; c < tracks.size(); ++c) {
    plots.push_back("'" + stem + ".dat' using 1:" + std::to_string(c + 3) + " with linespoints title '" + tracks[c] + "'");
  }
  int k = 0;
  for (const auto& ref : references) {
    bool listed = false;
    for (const auto& t : tracks) listed = listed || t == ref.track;
    if (!listed) continue;
    const auto& v = series.tracks.at(ref.track);
    const double x1 = series.lambda_big.back();
    const double y1 = v.back();
    if (!(y1 > 0.0) || !std::isfinite(y1)) continue;
    const std::string f = "ref" + std::to_string(k++);
    gp << f << "(x) = " << y1 << " * (x / " << x1 << ")**(" << -ref.slope << ")";
    if (ref.log_factor) gp << " * log(exp(1) + x) / log(exp(1) + " << x1 << ")";
    gp << '\n';
    std::ostringstream title;
    title << "slope -" << ref.slope << (ref.log_factor ? " with log" : "");
    plots.push_back(f + "(x) with lines dashtype 2 title '" + ref.track + " " + title.str() + "'");
  }
  gp << "plot ";
  for (std::size_t i = 0; i < plots.size(); ++i) gp << (i ? ", \\\n     " : "") << plots[i];
  gp << '\n';

  namespace fs = std::filesystem;
  fs::create_directories(directory);
  PlotFiles files{(fs::path(directory) / (stem + ".dat")).string(), (fs::path(directory) / (stem + ".gp")).string()};
  write_file(files.data, dat.str());
  write_file(files.script, gp.str());
  return files;
}

PlotFiles emit_phase_map(const std::string& outcomes_csv, const std::string& directory, const std::string& stem) {
  std::istringstream is(outcomes_csv);
  std::string line;
  if (!std::getline(is, line)) throw DomainError("scan outcomes are empty");
  const auto header = split(line, ',');
  auto col = [&](const std::string& name) -> std::size_t {
    for (std::size_t i = 0; i < header.size(); ++i) {
      if (header[i] == name) return i;
    }
    throw DomainError("scan outcomes have no column '" + name + "'");
  };
  const std::size_t cp = col("p"), ce = col("eps"), co = col("outcome"), ct = col("t_star"), ca = col("alpha"),
                    cc = col("p_crit");
  std::ostringstream dat;
  dat << "# p eps outcome_code t_star alpha   (0 global_decay, 1 blowup, 2 undecided)\n";
  std::size_t rows = 0;
  std::string p_crit;
  while (std::getline(is, line)) {
    if (line.empty()) continue;
    const auto f = split(line, ',');
    if (f.size() < header.size()) throw DomainError("scan outcomes row has too few fields");
    const std::string& o = f[co];
    const int code = o == "global_decay" ? 0 : (o == "blowup" ? 1 : 2);
    dat << f[cp] << ' ' << f[ce] << ' ' << code << ' ' << f[ct] << ' ' << f[ca] << '\n';
    p_crit = f[cc];
    ++rows;
  }
  if (rows == 0) throw DomainError("scan outcomes have no cells");
  std::ostringstream gp;
  gp << "set logscale y\nset xlabel 'p'\nset ylabel 'eps'\nset cbrange [0:2]\n"
     << "set palette defined (0 'forest-green', 1 'red', 2 'gray')\n";
  if (!p_crit.empty()) gp << "set arrow from " << p_crit << ", graph 0 to " << p_crit << ", graph 1 nohead dashtype 2\n";
  gp << "plot '" << stem << ".dat' using 1:2:3 with points pointtype 5 pointsize 2 palette notitle\n";

  namespace fs = std::filesystem;
  fs::create_directories(directory);
  PlotFiles files{(fs::path(directory) / (stem + ".dat")).string(), (fs::path(directory) / (stem + ".gp")).string()};
  write_file(files.data, dat.str());
  write_file(files.script, gp.str());
  return files;
}

}  // namespace dampwave
