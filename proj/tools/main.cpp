#include <cmath>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "dampwave/analysis.hpp"
#include "dampwave/checks.hpp"
#include "dampwave/config.hpp"
#include "dampwave/error.hpp"
#include "dampwave/plotdata.hpp"
#include "dampwave/spectral.hpp"
#include "json.hpp"

namespace fs = std::filesystem;
using json = nlohmann::ordered_json;
using namespace dampwave;

namespace {

enum Exit { kOk = 0, kCheckFailed = 1, kValidation = 2, kRuntime = 3, kResource = 4 };

std::string read_text(const std::string& path) {
  std::ifstream is(path, std::ios::binary);
  if (!is) throw DomainError("cannot read " + path);
  std::ostringstream os;
  os << is.rdbuf();
  return os.str();
}

void write_text(const std::string& path, const std::string& text) {
  const fs::path p(path);
  if (p.has_parent_path()) fs::create_directories(p.parent_path());
  std::ofstream os(p, std::ios::binary);
  if (!os) throw Error("cannot write " + path);
  os << text;
}

// JSON cannot hold inf/nan; those become strings.
json num(double v) {
  if (std::isfinite(v)) return v;
  if (std::isnan(v)) return "nan";
  return v > 0 ? "inf" : "-inf";
}

void print(const json& j) { std::cout << j.dump(2) << '\n'; }

std::string fmt17(double v) {
  std::ostringstream os;
  os.precision(17);
  os << v;
  return os.str();
}

json fit_json(const DecayFit& f) {
  return {{"model", to_string(f.model)},
          {"alpha", num(f.alpha)},
          {"c_log", num(f.c_log)},
          {"residual", num(f.residual)},
          {"t_lo", num(f.t_lo)},
          {"t_hi", num(f.t_hi)},
          {"samples", f.samples},
          {"lambda_ratio", num(f.lambda_ratio)},
          {"pure_power", {{"alpha", num(f.alpha_pure)}, {"residual", num(f.residual_pure)}}},
          {"power_log", {{"alpha", num(f.alpha_log)}, {"c_log", num(f.c_log_free)}, {"residual", num(f.residual_log)}}}};
}

json exponents_json(const ExponentReport& r) {
  json th = json::array();
  for (const auto& t : r.thresholds) {
    th.push_back({{"id", t.id},
                  {"formula", t.formula},
                  {"kind", to_string(t.kind)},
                  {"value", num(t.value)},
                  {"applicable", t.applicable},
                  {"condition", t.condition},
                  {"reason", t.reason}});
  }
  const auto& a = r.admissible;
  return {{"n", r.n},
          {"gamma", r.gamma},
          {"m", r.m},
          {"mu", r.mu},
          {"thresholds", th},
          {"admissible",
           {{"lower", num(a.lower)},
            {"lower_inclusive", a.lower_inclusive},
            {"upper", num(a.upper)},
            {"upper_inclusive", a.upper_inclusive},
            {"empty", a.empty},
            {"single_point", a.single_point},
            {"description", a.description}}},
          {"decay_rates",
           {{"solution", num(r.rates.solution)},
            {"energy", num(r.rates.energy)},
            {"energy_log", r.rates.energy_log},
            {"applicable", r.rates.applicable},
            {"note", r.rates.note}}}};
}

// ------------------------------------------------------------------ subcommands

int cmd_simulate(const std::string& config_path, const std::string& out, const std::string& snapshots) {
  const std::string text = read_text(config_path);
  const RunConfig cfg = validate_config(text);
  for (const auto& w : cfg.warnings) std::cerr << "warning: " << w << '\n';
  const double mem = memory_estimate(cfg.grid.n, cfg.grid.N);
  if (mem > cfg.memory_cap_bytes) {
    throw ResourceCap("memory estimate " + fmt17(mem) + " bytes exceeds memory_cap_bytes " +
                      fmt17(cfg.memory_cap_bytes));
  }
  SnapshotHook hook;
  if (!snapshots.empty()) {
    fs::create_directories(snapshots);
    hook = [&](const FieldState& s, std::size_t i) { write_snapshot(snapshots, s, i); };
  }
  const SimulationResult res = simulate(cfg.simulation(), cfg.initial_data(), hook);

  std::vector<std::string> order;
  for (double m : cfg.output.m_list) order.push_back(lm_track_name(m));
  for (const char* c : {"L2", "H1_seminorm", "energy", "Linf", "weighted_L2", "blowup_flag"}) order.push_back(c);
  write_text(out, to_csv(res.series, order));

  json j = {{"run_id", run_id(cfg)},
            {"series", out},
            {"steps", res.steps},
            {"t_final", num(res.final_state.t)},
            {"blowup", res.blowup.has_value()},
            {"light_cone_ratio", num(res.light_cone_ratio)},
            {"light_cone_ok", res.light_cone_ok},
            {"warnings", cfg.warnings}};
  if (res.blowup) {
    j["t_star"] = num(res.blowup->t_star);
    j["blowup_reason"] = res.blowup->reason;
  }
  print(j);
  return kOk;
}

int cmd_multiplier_check(const std::string& config_path, int samples, std::uint64_t seed, double rel_tol,
                         double abs_floor, const std::string& out) {
  if (!config_path.empty()) {
    const json c = json::parse(read_text(config_path));
    std::vector<std::string> bad;
    for (const auto& [k, v] : c.items()) {
      (void)v;
      if (k != "samples" && k != "seed" && k != "rel_tol" && k != "abs_floor") bad.push_back("unknown key '" + k + "'");
    }
    if (!bad.empty()) throw ValidationError(bad);
    samples = c.value("samples", samples);
    seed = c.value("seed", seed);
    rel_tol = c.value("rel_tol", rel_tol);
    abs_floor = c.value("abs_floor", abs_floor);
  }
  if (samples < 1) throw DomainError("samples must be >= 1");
  const MultiplierCheck rep = multiplier_check(samples, seed, rel_tol, abs_floor);
  if (!out.empty()) {
    std::ostringstream os;
    os.precision(17);
    os << "mu,profile,s,t,xi,zone";
    for (const char* pre : {"", "oracle_"}) {
      for (const char* e : {"phi0", "phi1", "dphi0", "dphi1"}) os << ',' << pre << e << "_re," << pre << e << "_im";
    }
    os << ",rel_err\n";
    for (const auto& r : rep.rows) {
      os << r.mu << ",\"" << r.profile << "\"," << r.s << ',' << r.t << ',' << r.xi << ',' << to_string(r.zone);
      for (const auto* m : {&r.got, &r.oracle}) {
        for (const cplx& v : {m->phi0, m->phi1, m->dphi0, m->dphi1}) os << ',' << v.real() << ',' << v.imag();
      }
      os << ',' << r.rel_err << '\n';
    }
    write_text(out, os.str());
  }
  print({{"samples", rep.samples},
         {"failures", rep.failures},
         {"rel_tol", rep.rel_tol},
         {"abs_floor", rep.abs_floor},
         {"max_rel_error", num(rep.max_rel_error)},
         {"worst",
          {{"mu", rep.worst.mu},
           {"profile", rep.worst.profile},
           {"s", rep.worst.s},
           {"t", rep.worst.t},
           {"xi", rep.worst.xi}}},
         {"seconds", rep.seconds},
         {"passed", rep.passed}});
  return rep.passed ? kOk : kCheckFailed;
}

int cmd_specfun_selftest(int samples, std::uint64_t seed) {
  if (samples < 1) throw DomainError("samples must be >= 1");
  const SpecfunSelftest r = specfun_selftest(samples, seed);
  std::cout.precision(17);
  std::cout << "identity,max_residual,threshold,pass\n";
  auto row = [](const char* name, double v) {
    std::cout << name << ',' << v << ",1e-10," << (v <= 1e-10 ? "true" : "false") << '\n';
  };
  row("J_vs_reference", r.max_rel_error_j);
  row("Y_vs_reference", r.max_rel_error_y);
  row("wronskian", r.max_wronskian_residual);
  return r.passed ? kOk : kCheckFailed;
}

int cmd_decay(const std::string& in, const std::string& track, double window) {
  const NormSeries series = series_from_csv(read_text(in));
  const DecayFit f = fit_decay(series, track, window);
  json j = fit_json(f);
  j["track"] = track;
  j["window"] = window;
  print(j);
  return kOk;
}

int cmd_scan(const std::string& config_path, const std::string& out) {
  const ScanConfig cfg = validate_scan_config(read_text(config_path));
  const ScanResult res = run_scan(cfg);
  write_scan(out, cfg, res, canonical_json(cfg));
  int counts[3] = {0, 0, 0};
  for (const auto& c : res.cells) ++counts[static_cast<int>(c.outcome)];
  print({{"directory", out},
         {"cells", res.cells.size()},
         {"global_decay", counts[0]},
         {"blowup", counts[1]},
         {"undecided", counts[2]},
         {"monotonicity_violations", res.monotonicity_violations}});
  return kOk;
}

int cmd_exponents(int n, double gamma, double m, double mu) {
  print(exponents_json(exponent_catalog(n, gamma, m, mu)));
  return kOk;
}

int cmd_gn(int n, double q, int samples, std::uint64_t seed) {
  GnSampleSpec spec;
  spec.samples = samples;
  spec.seed = seed;
  const GnReport r = gn_verify(spec, q, n);
  json ratios = json::array();
  for (double v : r.ratios) ratios.push_back(num(v));
  print({{"n", r.n},
         {"q", r.q},
         {"theta", r.theta},
         {"samples", samples},
         {"seed", seed},
         {"skipped", r.skipped},
         {"max_R", num(r.max_R)},
         {"min_R", num(r.min_R)},
         {"max_scale_deviation", num(r.max_scale_deviation)},
         {"max_dilation_deviation", num(r.max_dilation_deviation)},
         {"C_cap", r.C_cap},
         {"within_cap", r.within_cap},
         {"ratios", ratios}});
  return kOk;
}

struct PlotArgs {
  std::string in;
  std::string style;
  std::string out;
  std::vector<std::string> tracks;
  int n = 1;
  double gamma = 0.0;
  double m = 2.0;
  double mu = -1.0;  // < 0: no reference lines
};

int cmd_plotdata(const PlotArgs& a) {
  const PlotStyle style = plot_style_from_string(a.style);
  PlotFiles files;
  if (style == PlotStyle::loglog_decay) {
    const NormSeries series = series_from_csv(read_text(a.in));
    std::vector<std::string> tracks = a.tracks;
    if (tracks.empty()) {
      for (const char* t : {"L2", "energy"}) {
        if (series.has(t)) tracks.push_back(t);
      }
    }
    std::vector<ReferenceSlope> refs;
    if (a.mu >= 0.0) refs = reference_slopes(exponent_catalog(a.n, a.gamma, a.m, a.mu));
    files = emit_loglog_decay(series, tracks, refs, a.out);
  } else {
    std::string path = a.in;
    if (fs::is_directory(path)) path = (fs::path(path) / "outcomes.csv").string();
    files = emit_phase_map(read_text(path), a.out);
  }
  print({{"data", files.data}, {"script", files.script}});
  return kOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Damped wave equations with time-dependent speed: multipliers, simulation and analysis"};
  app.require_subcommand(1);

  std::string config, out, snapshots, in, track = "L2";
  double window = 0.5;
  auto* sim = app.add_subcommand("simulate", "Run one pseudospectral simulation and write its norm series");
  sim->add_option("--config", config, "run configuration (JSON)")->required();
  sim->add_option("--out", out, "series CSV")->required();
  sim->add_option("--snapshots", snapshots, "directory for field snapshots at output times");

  int mc_samples = 500;
  std::uint64_t mc_seed = 1;
  double rel_tol = 1e-6, abs_floor = 1e-9;
  std::string mc_config, mc_out;
  auto* mc = app.add_subcommand("multiplier-check", "Closed-form multipliers against the per-mode ODE oracle");
  mc->add_option("--config", mc_config, "JSON with samples, seed, rel_tol, abs_floor");
  mc->add_option("--samples", mc_samples, "random tuples");
  mc->add_option("--seed", mc_seed, "RNG seed");
  mc->add_option("--rel-tol", rel_tol);
  mc->add_option("--abs-floor", abs_floor);
  mc->add_option("--out", mc_out, "per-tuple CSV");

  int sf_samples = 2000;
  std::uint64_t sf_seed = 1;
  auto* sf = app.add_subcommand("specfun-selftest", "Bessel identity residuals as CSV");
  sf->add_option("--samples", sf_samples);
  sf->add_option("--seed", sf_seed);

  auto* dec = app.add_subcommand("decay", "Fit a decay law to one track of a series CSV");
  dec->add_option("--in", in, "series CSV")->required();
  dec->add_option("--track", track, "track name");
  dec->add_option("--window", window, "trailing fraction of samples");

  std::string scan_config, scan_out;
  auto* scan = app.add_subcommand("scan", "Outcome scan over (p, eps[, mu, gamma])");
  scan->add_option("--config", scan_config, "scan configuration (JSON)")->required();
  scan->add_option("--out", scan_out, "output directory")->required();

  int ex_n = 1;
  double ex_gamma = 0.0, ex_m = 1.0, ex_mu = 4.0;
  auto* ex = app.add_subcommand("exponents", "Critical exponents and decay rates as JSON");
  ex->add_option("--n", ex_n)->required();
  ex->add_option("--gamma", ex_gamma);
  ex->add_option("--m", ex_m);
  ex->add_option("--mu", ex_mu)->required();

  int gn_n = 1, gn_samples = 100;
  double gn_q = 4.0;
  std::uint64_t gn_seed = 7;
  auto* gn = app.add_subcommand("gn", "Gagliardo-Nirenberg ratio survey");
  gn->add_option("--n", gn_n)->required();
  gn->add_option("--q", gn_q)->required();
  gn->add_option("--samples", gn_samples);
  gn->add_option("--seed", gn_seed);

  PlotArgs pa;
  auto* pd = app.add_subcommand("plotdata", "gnuplot data and script for a series or a scan");
  pd->add_option("--in", pa.in, "series CSV, scan outcomes.csv or scan directory")->required();
  pd->add_option("--style", pa.style, "loglog_decay or phase_map")->required();
  pd->add_option("--out", pa.out, "output directory")->required();
  pd->add_option("--tracks", pa.tracks, "tracks to plot (loglog_decay)")->delimiter(',');
  pd->add_option("--n", pa.n);
  pd->add_option("--gamma", pa.gamma);
  pd->add_option("--m", pa.m);
  pd->add_option("--mu", pa.mu, "draw reference slopes for this mu");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kOk : kValidation;
  }

  try {
    if (*sim) return cmd_simulate(config, out, snapshots);
    if (*mc) return cmd_multiplier_check(mc_config, mc_samples, mc_seed, rel_tol, abs_floor, mc_out);
    if (*sf) return cmd_specfun_selftest(sf_samples, sf_seed);
    if (*dec) return cmd_decay(in, track, window);
    if (*scan) return cmd_scan(scan_config, scan_out);
    if (*ex) return cmd_exponents(ex_n, ex_gamma, ex_m, ex_mu);
    if (*gn) return cmd_gn(gn_n, gn_q, gn_samples, gn_seed);
    if (*pd) return cmd_plotdata(pa);
  } catch (const ValidationError& e) {
    std::cerr << "invalid configuration:\n";
    for (const auto& v : e.violations()) std::cerr << "  - " << v << '\n';
    return kValidation;
  } catch (const json::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kValidation;
  } catch (const ResourceCap& e) {
    std::cerr << "resource cap: " << e.what() << '\n';
    return kResource;
  } catch (const DomainError& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kValidation;
  } catch (const UnsupportedOrder& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kValidation;
  } catch (const DegenerateFit& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kValidation;
  } catch (const std::exception& e) {
    std::cerr << "failure: " << e.what() << '\n';
    return kRuntime;
  }
  return kRuntime;
}
