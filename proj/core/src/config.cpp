#include "dampwave/config.hpp"

#include <cmath>
#include <cstdio>
#include <optional>
#include <set>
#include <sstream>

#include "dampwave/error.hpp"
#include "json.hpp"

namespace dampwave {

namespace {

using json = nlohmann::ordered_json;

std::string fmt(double v) {
  std::ostringstream os;
  os.precision(17);
  os << v;
  return os.str();
}

// Collects violations while reading a JSON object.
class Reader {
 public:
  explicit Reader(std::vector<std::string>& errors) : errors_(errors) {}

  void unknown_keys(const json& obj, const std::string& where, std::initializer_list<const char*> allowed) {
    if (!obj.is_object()) return;
    std::set<std::string> ok(allowed.begin(), allowed.end());
    for (const auto& [k, v] : obj.items()) {
      (void)v;
      if (!ok.count(k)) errors_.push_back("unknown key '" + where + k + "'");
    }
  }

  std::optional<double> number(const json& obj, const char* key, const std::string& where) {
    if (!obj.is_object() || !obj.contains(key)) return std::nullopt;
    const auto& v = obj.at(key);
    if (!v.is_number()) {
      errors_.push_back("'" + where + key + "' must be a number");
      return std::nullopt;
    }
    return v.get<double>();
  }

  std::optional<long long> integer(const json& obj, const char* key, const std::string& where) {
    if (!obj.is_object() || !obj.contains(key)) return std::nullopt;
    const auto& v = obj.at(key);
    if (v.is_number_integer()) return v.get<long long>();
    if (v.is_number_float()) {
      const double d = v.get<double>();
      if (d == std::floor(d) && std::abs(d) < 9e15) return static_cast<long long>(d);
    }
    errors_.push_back("'" + where + key + "' must be an integer");
    return std::nullopt;
  }

  std::optional<std::string> string(const json& obj, const char* key, const std::string& where) {
    if (!obj.is_object() || !obj.contains(key)) return std::nullopt;
    const auto& v = obj.at(key);
    if (!v.is_string()) {
      errors_.push_back("'" + where + key + "' must be a string");
      return std::nullopt;
    }
    return v.get<std::string>();
  }

  std::optional<bool> boolean(const json& obj, const char* key, const std::string& where) {
    if (!obj.is_object() || !obj.contains(key)) return std::nullopt;
    const auto& v = obj.at(key);
    if (!v.is_boolean()) {
      errors_.push_back("'" + where + key + "' must be true or false");
      return std::nullopt;
    }
    return v.get<bool>();
  }

  std::optional<std::vector<double>> numbers(const json& obj, const char* key, const std::string& where) {
    if (!obj.is_object() || !obj.contains(key)) return std::nullopt;
    const auto& v = obj.at(key);
    if (!v.is_array()) {
      errors_.push_back("'" + where + key + "' must be an array of numbers");
      return std::nullopt;
    }
    std::vector<double> out;
    for (const auto& e : v) {
      if (!e.is_number()) {
        errors_.push_back("'" + where + key + "' must be an array of numbers");
        return std::nullopt;
      }
      out.push_back(e.get<double>());
    }
    return out;
  }

  const json& object(const json& obj, const char* key, const std::string& where, bool required) {
    static const json empty = json::object();
    if (!obj.is_object() || !obj.contains(key)) {
      if (required) errors_.push_back("missing required key '" + where + key + "'");
      return empty;
    }
    const auto& v = obj.at(key);
    if (!v.is_object()) {
      errors_.push_back("'" + where + key + "' must be an object");
      return empty;
    }
    return v;
  }

  void error(std::string msg) { errors_.push_back(std::move(msg)); }

 private:
  std::vector<std::string>& errors_;
};

json parse_or_throw(const std::string& text) {
  try {
    json j = json::parse(text);
    if (!j.is_object()) throw ValidationError({"configuration must be a JSON object"});
    return j;
  } catch (const json::parse_error& e) {
    throw ValidationError({std::string("configuration is not valid JSON: ") + e.what()});
  }
}

std::optional<SpeedProfile> read_profile(Reader& rd, const json& root) {
  const json& pj = rd.object(root, "profile", "", true);
  rd.unknown_keys(pj, "profile.", {"kind", "q", "r", "lambda0", "t", "lambda", "mu", "nu"});
  const auto kind = rd.string(pj, "kind", "profile.");
  if (!kind) {
    if (pj.is_object() && !pj.empty()) rd.error("missing required key 'profile.kind'");
    return std::nullopt;
  }
  const auto lambda0 = rd.number(pj, "lambda0", "profile.");
  try {
    switch (speed_kind_from_string(*kind)) {
      case SpeedKind::constant: return SpeedProfile::constant(lambda0);
      case SpeedKind::polynomial: {
        const auto q = rd.number(pj, "q", "profile.");
        if (!q) {
          rd.error("polynomial profile needs 'profile.q'");
          return std::nullopt;
        }
        return SpeedProfile::polynomial(*q, lambda0);
      }
      case SpeedKind::exponential: {
        const auto r = rd.number(pj, "r", "profile.");
        if (!r) {
          rd.error("exponential profile needs 'profile.r'");
          return std::nullopt;
        }
        return SpeedProfile::exponential(*r, lambda0);
      }
      case SpeedKind::tabulated: {
        const auto t = rd.numbers(pj, "t", "profile.");
        const auto l = rd.numbers(pj, "lambda", "profile.");
        if (!t || !l) {
          rd.error("tabulated profile needs 'profile.t' and 'profile.lambda'");
          return std::nullopt;
        }
        return SpeedProfile::tabulated(*t, *l, lambda0.value_or(1.0));
      }
    }
  } catch (const Error& e) {
    rd.error(std::string("profile: ") + e.what());
  }
  return std::nullopt;
}

json profile_json(const SpeedProfile& p) {
  json j;
  j["kind"] = to_string(p.kind());
  if (p.kind() == SpeedKind::polynomial) j["q"] = p.q();
  if (p.kind() == SpeedKind::exponential) j["r"] = p.r();
  j["lambda0"] = p.lambda0();
  if (p.kind() == SpeedKind::tabulated) {
    j["t"] = p.table_t();
    j["lambda"] = p.table_lambda();
  }
  return j;
}

}  // namespace

SimulationConfig RunConfig::simulation() const {
  SimulationConfig s;
  s.grid = grid;
  s.profile = profile;
  s.mu = damping.mu;
  s.nonlinearity = nonlinearity;
  s.T = T;
  s.dt_max = output.dt_max;
  s.cfl = output.cfl;
  s.outputs_per_decade = output.outputs_per_decade;
  s.first_output = output.first_output;
  s.m_list = output.m_list;
  s.weighted = weighted;
  s.blowup_factor = output.blowup_factor;
  s.R0 = data_radius(data.kind, data.width);
  s.light_cone_tolerance = output.light_cone_tolerance;
  return s;
}

InitialData RunConfig::initial_data() const {
  return make_initial_data(grid, data.kind, data.amplitude, data.width, seed, data.velocity_factor);
}

RunConfig validate_config(const std::string& json_text) {
  const json root = parse_or_throw(json_text);
  std::vector<std::string> errors;
  Reader rd(errors);
  rd.unknown_keys(root, "", {"profile", "mu", "nu", "grid", "nonlinearity", "data", "T", "output", "weighted",
                             "analysis", "seed", "memory_cap_bytes"});
  RunConfig c;

  const auto profile = read_profile(rd, root);
  if (profile) c.profile = *profile;

  // mu / nu may sit at the top level or inside "profile"; one of them, in one place.
  auto mu = rd.number(root, "mu", "");
  auto nu = rd.number(root, "nu", "");
  if (root.contains("profile") && root.at("profile").is_object()) {
    const json& pj = root.at("profile");
    const auto pmu = rd.number(pj, "mu", "profile.");
    const auto pnu = rd.number(pj, "nu", "profile.");
    if ((pmu && mu) || (pnu && nu)) rd.error("damping given both at the top level and inside 'profile'");
    if (pmu) mu = pmu;
    if (pnu) nu = pnu;
  }
  if (mu && nu) {
    rd.error("'mu' and 'nu' are mutually exclusive; give exactly one");
  } else if (!mu && !nu) {
    rd.error("missing required key 'mu' (or 'nu')");
  } else if (mu) {
    c.damping = DampingSpec::from_mu(*mu);
    if (!(*mu >= 0.0)) rd.error("mu must be >= 0");
  } else if (profile) {
    try {
      c.damping = DampingSpec::from_nu(c.profile, *nu);
    } catch (const Error& e) {
      rd.error(std::string("nu: ") + e.what());
    }
  }

  const json& gj = rd.object(root, "grid", "", true);
  rd.unknown_keys(gj, "grid.", {"n", "N", "L"});
  const auto n = rd.integer(gj, "n", "grid.");
  const auto N = rd.integer(gj, "N", "grid.");
  const auto L = rd.number(gj, "L", "grid.");
  if (!gj.empty() || root.contains("grid")) {
    if (!n) rd.error("missing required key 'grid.n'");
    if (!N) rd.error("missing required key 'grid.N'");
  }
  if (n) c.grid.n = static_cast<int>(*n);
  if (N) c.grid.N = static_cast<int>(*N);
  if (n && (*n < 1 || *n > 3)) rd.error("grid.n must be 1, 2 or 3");
  if (N && (*N < 16 || (*N & (*N - 1)) != 0)) rd.error("grid.N must be a power of two >= 16");

  const auto T = rd.number(root, "T", "");
  if (!T) rd.error("missing required key 'T'");
  else if (!(*T > 0.0) || !std::isfinite(*T)) rd.error("T must be positive and finite");
  else c.T = *T;

  const json& nj = rd.object(root, "nonlinearity", "", false);
  rd.unknown_keys(nj, "nonlinearity.", {"form", "p", "gamma", "scaling"});
  try {
    if (auto f = rd.string(nj, "form", "nonlinearity.")) c.nonlinearity.form = nonlinear_form_from_string(*f);
    if (auto s = rd.string(nj, "scaling", "nonlinearity.")) c.nonlinearity.scaling = nonlinear_scaling_from_string(*s);
  } catch (const Error& e) {
    rd.error(e.what());
  }
  if (auto p = rd.number(nj, "p", "nonlinearity.")) c.nonlinearity.p = *p;
  if (auto g = rd.number(nj, "gamma", "nonlinearity.")) c.nonlinearity.gamma = *g;
  try {
    c.nonlinearity.validate();
  } catch (const Error& e) {
    rd.error(e.what());
  }

  const json& dj = rd.object(root, "data", "", false);
  rd.unknown_keys(dj, "data.", {"kind", "amplitude", "width", "velocity_factor"});
  try {
    if (auto k = rd.string(dj, "kind", "data.")) c.data.kind = data_kind_from_string(*k);
  } catch (const Error& e) {
    rd.error(e.what());
  }
  if (auto a = rd.number(dj, "amplitude", "data.")) c.data.amplitude = *a;
  if (auto w = rd.number(dj, "width", "data.")) c.data.width = *w;
  if (auto v = rd.number(dj, "velocity_factor", "data.")) c.data.velocity_factor = *v;
  if (!(c.data.width > 0.0)) rd.error("data.width must be positive");
  if (!std::isfinite(c.data.amplitude)) rd.error("data.amplitude must be finite");

  const json& oj = rd.object(root, "output", "", false);
  rd.unknown_keys(oj, "output.", {"dt_max", "cfl", "outputs_per_decade", "first_output", "m_list", "blowup_factor",
                                  "light_cone_tolerance"});
  if (auto v = rd.number(oj, "dt_max", "output.")) c.output.dt_max = *v;
  if (auto v = rd.number(oj, "cfl", "output.")) c.output.cfl = *v;
  if (auto v = rd.integer(oj, "outputs_per_decade", "output.")) c.output.outputs_per_decade = static_cast<int>(*v);
  if (auto v = rd.number(oj, "first_output", "output.")) c.output.first_output = *v;
  if (auto v = rd.numbers(oj, "m_list", "output.")) c.output.m_list = *v;
  if (auto v = rd.number(oj, "blowup_factor", "output.")) c.output.blowup_factor = *v;
  if (auto v = rd.number(oj, "light_cone_tolerance", "output.")) c.output.light_cone_tolerance = *v;
  if (!(c.output.dt_max > 0.0)) rd.error("output.dt_max must be positive");
  if (!(c.output.cfl > 0.0)) rd.error("output.cfl must be positive");
  if (c.output.outputs_per_decade < 1) rd.error("output.outputs_per_decade must be >= 1");
  if (!(c.output.first_output > 0.0)) rd.error("output.first_output must be positive");
  if (!(c.output.blowup_factor > 1.0)) rd.error("output.blowup_factor must exceed 1");
  for (double m : c.output.m_list) {
    if (!(m >= 1.0)) rd.error("output.m_list entries must be >= 1");
  }

  const json& wj = rd.object(root, "weighted", "", false);
  rd.unknown_keys(wj, "weighted.", {"enabled"});
  if (auto e = rd.boolean(wj, "enabled", "weighted.")) c.weighted.enabled = *e;
  c.weighted.mu = c.damping.mu;

  const json& aj = rd.object(root, "analysis", "", false);
  rd.unknown_keys(aj, "analysis.", {"K", "window"});
  if (auto v = rd.number(aj, "K", "analysis.")) c.K = *v;
  if (auto v = rd.number(aj, "window", "analysis.")) c.window = *v;
  if (!(c.K > 0.0)) rd.error("analysis.K must be positive");
  if (!(c.window > 0.0 && c.window <= 1.0)) rd.error("analysis.window must lie in (0, 1]");

  if (auto s = rd.integer(root, "seed", "")) {
    if (*s < 0) rd.error("seed must be >= 0");
    else c.seed = static_cast<std::uint64_t>(*s);
  }
  if (auto m = rd.number(root, "memory_cap_bytes", "")) c.memory_cap_bytes = *m;

  // Domain sizing rule.
  if (profile && T && *T > 0.0) {
    const double R0 = data_radius(c.data.kind, c.data.width);
    const double rule = required_half_width(c.profile, R0, c.T);
    if (L) {
      if (!(*L >= rule)) {
        rd.error("grid.L = " + fmt(*L) + " is below the domain rule R0 + (Lambda(T) - lambda0) + 2 = " + fmt(rule));
      }
      c.grid.L = *L;
    } else {
      c.grid.L = rule;
    }
    if (c.data.width > 0.0 && !(c.data.width < c.grid.L / 4.0)) rd.error("data.width must be below grid.L/4");
  }
  if (!errors.empty()) throw ValidationError(errors);

  // Warnings.
  const int nn = c.grid.n;
  for (const auto& w : c.nonlinearity.warnings(nn)) c.warnings.push_back(w);
  const double m = c.damping.mu;
  if (m < 2.0) c.warnings.push_back("mu = " + fmt(m) + " < 2: outside the H^1 x L^2 global existence range (mu >= 2)");
  if (m < nn + 2.0) {
    c.warnings.push_back("mu = " + fmt(m) + " < n + 2: outside the L^1 decay estimate range (mu >= n + 2)");
  }
  if (m < 1.0) c.warnings.push_back("mu = " + fmt(m) + " < 1: outside every linear estimate used here");
  if (!dissipativity_check(c.profile, c.damping)) {
    c.warnings.push_back("lambda'/lambda + b changes sign: the problem is not dissipative");
  }
  const double mem = memory_estimate(c.grid.n, c.grid.N);
  if (mem > c.memory_cap_bytes) {
    c.warnings.push_back("memory estimate " + fmt(mem) + " bytes exceeds memory_cap_bytes");
  }
  return c;
}

std::string canonical_json(const RunConfig& c) {
  json j;
  j["profile"] = profile_json(c.profile);
  if (c.damping.nu) j["nu"] = *c.damping.nu;
  else j["mu"] = c.damping.mu;
  j["grid"] = {{"n", c.grid.n}, {"N", c.grid.N}, {"L", c.grid.L}};
  j["nonlinearity"] = {{"form", to_string(c.nonlinearity.form)},
                       {"p", c.nonlinearity.p},
                       {"gamma", c.nonlinearity.gamma},
                       {"scaling", to_string(c.nonlinearity.scaling)}};
  j["data"] = {{"kind", to_string(c.data.kind)},
               {"amplitude", c.data.amplitude},
               {"width", c.data.width},
               {"velocity_factor", c.data.velocity_factor}};
  j["T"] = c.T;
  j["output"] = {{"dt_max", c.output.dt_max},
                 {"cfl", c.output.cfl},
                 {"outputs_per_decade", c.output.outputs_per_decade},
                 {"first_output", c.output.first_output},
                 {"m_list", c.output.m_list},
                 {"blowup_factor", c.output.blowup_factor},
                 {"light_cone_tolerance", c.output.light_cone_tolerance}};
  j["weighted"] = {{"enabled", c.weighted.enabled}};
  j["analysis"] = {{"K", c.K}, {"window", c.window}};
  j["seed"] = c.seed;
  j["memory_cap_bytes"] = c.memory_cap_bytes;
  return j.dump();
}

std::string fnv1a_hex(const std::string& bytes) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char ch : bytes) {
    h ^= ch;
    h *= 0x100000001b3ULL;
  }
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
  return buf;
}

std::string run_id(const RunConfig& config) { return fnv1a_hex(canonical_json(config)); }

ScanConfig validate_scan_config(const std::string& json_text) {
  const json root = parse_or_throw(json_text);
  std::vector<std::string> errors;
  Reader rd(errors);
  rd.unknown_keys(root, "", {"n", "N", "L", "profile", "mu", "m", "form", "scaling", "data", "seed", "T", "dt_max",
                             "cfl", "outputs_per_decade", "first_output", "blowup_factor", "window",
                             "residual_threshold", "memory_cap_bytes", "p", "eps", "mu_values", "gamma"});
  ScanConfig c;
  if (root.contains("profile")) {
    if (auto p = read_profile(rd, root)) c.profile = *p;
  }
  if (auto v = rd.integer(root, "n", "")) c.n = static_cast<int>(*v);
  if (auto v = rd.integer(root, "N", "")) c.N = static_cast<int>(*v);
  if (auto v = rd.number(root, "L", "")) c.L = *v;
  if (auto v = rd.number(root, "mu", "")) c.mu = *v;
  if (auto v = rd.number(root, "m", "")) c.m = *v;
  try {
    if (auto f = rd.string(root, "form", "")) c.form = nonlinear_form_from_string(*f);
    if (auto s = rd.string(root, "scaling", "")) c.scaling = nonlinear_scaling_from_string(*s);
  } catch (const Error& e) {
    rd.error(e.what());
  }
  const json& dj = rd.object(root, "data", "", false);
  rd.unknown_keys(dj, "data.", {"kind", "width", "velocity_factor"});
  try {
    if (auto k = rd.string(dj, "kind", "data.")) c.data = data_kind_from_string(*k);
  } catch (const Error& e) {
    rd.error(e.what());
  }
  if (auto v = rd.number(dj, "width", "data.")) c.width = *v;
  if (auto v = rd.number(dj, "velocity_factor", "data.")) c.velocity_factor = *v;
  if (auto s = rd.integer(root, "seed", "")) c.seed = static_cast<std::uint64_t>(std::max(0LL, *s));
  if (auto v = rd.number(root, "T", "")) c.T = *v;
  if (auto v = rd.number(root, "dt_max", "")) c.dt_max = *v;
  if (auto v = rd.number(root, "cfl", "")) c.cfl = *v;
  if (auto v = rd.integer(root, "outputs_per_decade", "")) c.outputs_per_decade = static_cast<int>(*v);
  if (auto v = rd.number(root, "first_output", "")) c.first_output = *v;
  if (auto v = rd.number(root, "blowup_factor", "")) c.blowup_factor = *v;
  if (auto v = rd.number(root, "window", "")) c.window = *v;
  if (auto v = rd.number(root, "residual_threshold", "")) c.residual_threshold = *v;
  if (auto v = rd.number(root, "memory_cap_bytes", "")) c.memory_cap_bytes = *v;
  const auto p = rd.numbers(root, "p", "");
  const auto e = rd.numbers(root, "eps", "");
  if (!p) rd.error("missing required key 'p'");
  else c.p_values = *p;
  if (!e) rd.error("missing required key 'eps'");
  else c.eps_values = *e;
  if (auto v = rd.numbers(root, "mu_values", "")) c.mu_values = *v;
  if (auto v = rd.numbers(root, "gamma", "")) c.gamma_values = *v;
  if (!errors.empty()) throw ValidationError(errors);
  c.validate();
  return c;
}

std::string canonical_json(const ScanConfig& c) {
  json j;
  j["n"] = c.n;
  j["N"] = c.N;
  j["L"] = c.L;
  j["profile"] = profile_json(c.profile);
  j["mu"] = c.mu;
  j["m"] = c.m;
  j["form"] = to_string(c.form);
  j["scaling"] = to_string(c.scaling);
  j["data"] = {{"kind", to_string(c.data)}, {"width", c.width}, {"velocity_factor", c.velocity_factor}};
  j["seed"] = c.seed;
  j["T"] = c.T;
  j["dt_max"] = c.dt_max;
  j["cfl"] = c.cfl;
  j["outputs_per_decade"] = c.outputs_per_decade;
  j["first_output"] = c.first_output;
  j["blowup_factor"] = c.blowup_factor;
  j["window"] = c.window;
  j["residual_threshold"] = c.residual_threshold;
  j["memory_cap_bytes"] = c.memory_cap_bytes;
  j["p"] = c.p_values;
  j["eps"] = c.eps_values;
  j["mu_values"] = c.mu_values;
  j["gamma"] = c.gamma_values;
  return j.dump();
}

}  // namespace dampwave
