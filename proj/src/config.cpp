#include "rdlab/config.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <set>
#include <sstream>

#include "json.hpp"
#include "rdlab/errors.hpp"

namespace rdlab {

using nlohmann::json;

McConfig ExperimentConfig::mc() const {
  McConfig m;
  m.seed = seed;
  m.threads = threads;
  m.dt = dt;
  m.blowup_ceiling = blowup_ceiling;
  return m;
}

namespace {

void reject_unknown(const json& j, const std::set<std::string>& allowed, const std::string& where) {
  if (!j.is_object()) throw ConfigError(where + ": expected an object");
  for (auto it = j.begin(); it != j.end(); ++it)
    if (!allowed.count(it.key())) throw ConfigError(where + ": unknown key '" + it.key() + "'");
}

template <class T>
void read(const json& j, const char* key, T& out, const std::string& where) {
  if (!j.contains(key)) return;
  try {
    out = j.at(key).get<T>();
  } catch (const json::exception& e) {
    throw ConfigError(where + "." + key + ": " + e.what());
  }
}

// null means infinity
void read_level(const json& j, const char* key, double& out, const std::string& where) {
  if (!j.contains(key)) return;
  if (j.at(key).is_null()) {
    out = infinity;
    return;
  }
  read(j, key, out, where);
}

json level_json(double v) { return std::isinf(v) ? json(nullptr) : json(v); }

void positive(double v, const std::string& what) {
  if (!(v > 0.0)) throw ConfigError(what + " must be positive");
}

}  // namespace

ExperimentConfig parse_config(const std::string& text) {
  json root;
  try {
    root = json::parse(text);
  } catch (const json::parse_error& e) {
    throw ConfigError(std::string("config is not valid JSON: ") + e.what());
  }
  ExperimentConfig c;
  reject_unknown(root,
                 {"model", "scheme", "monte_carlo", "estimators", "carre", "ito", "ergodic", "ladder",
                  "output"},
                 "config");
  if (root.contains("model")) {
    const json& m = root["model"];
    reject_unknown(m,
                   {"preset", "a", "sigma", "reaction_polynomial", "diffusion", "N", "noise_modes",
                    "truncation_n", "yosida_k"},
                   "model");
    read(m, "preset", c.preset, "model");
    read(m, "a", c.ou_a, "model");
    read(m, "sigma", c.ou_sigma, "model");
    read(m, "reaction_polynomial", c.reaction_polynomial, "model");
    if (m.contains("diffusion")) {
      const json& d = m["diffusion"];
      reject_unknown(d, {"base", "amplitude", "slope"}, "model.diffusion");
      read(d, "base", c.diffusion_base, "model.diffusion");
      read(d, "amplitude", c.diffusion_amplitude, "model.diffusion");
      read(d, "slope", c.diffusion_slope, "model.diffusion");
    }
    read(m, "N", c.grid_n, "model");
    read(m, "noise_modes", c.noise_modes, "model");
    read_level(m, "truncation_n", c.truncation_n, "model");
    read_level(m, "yosida_k", c.yosida_k, "model");
  }
  if (root.contains("scheme")) {
    const json& s = root["scheme"];
    reject_unknown(s, {"dt", "horizon", "snapshot_times", "blowup_ceiling"}, "scheme");
    read(s, "dt", c.dt, "scheme");
    read(s, "horizon", c.horizon, "scheme");
    read(s, "snapshot_times", c.snapshot_times, "scheme");
    read(s, "blowup_ceiling", c.blowup_ceiling, "scheme");
  }
  if (root.contains("monte_carlo")) {
    const json& s = root["monte_carlo"];
    reject_unknown(s, {"seed", "threads", "trajectories"}, "monte_carlo");
    read(s, "seed", c.seed, "monte_carlo");
    read(s, "threads", c.threads, "monte_carlo");
    read(s, "trajectories", c.trajectories, "monte_carlo");
  }
  if (root.contains("estimators")) {
    const json& s = root["estimators"];
    reject_unknown(s,
                   {"states", "observables", "times", "fd_eps", "direction_mode", "lambda",
                    "quadrature_nodes", "series_length"},
                   "estimators");
    if (s.contains("states")) {
      if (!s["states"].is_array()) throw ConfigError("estimators.states: expected an array");
      c.states.clear();
      for (const auto& e : s["states"]) {
        reject_unknown(e, {"mode", "amplitude"}, "estimators.states[]");
        StateSpec st;
        read(e, "mode", st.mode, "estimators.states[]");
        read(e, "amplitude", st.amplitude, "estimators.states[]");
        c.states.push_back(st);
      }
    }
    read(s, "observables", c.observables, "estimators");
    read(s, "times", c.times, "estimators");
    read(s, "fd_eps", c.fd_eps, "estimators");
    read(s, "direction_mode", c.direction_mode, "estimators");
    read(s, "lambda", c.lambda, "estimators");
    read(s, "quadrature_nodes", c.quadrature_nodes, "estimators");
    read(s, "series_length", c.series_length, "estimators");
  }
  if (root.contains("carre")) {
    const json& s = root["carre"];
    reject_unknown(s,
                   {"oracle", "oracle_half_width", "oracle_cells", "value_trajectories",
                    "gamma_samples", "regularize_times"},
                   "carre");
    read(s, "oracle", c.carre_oracle, "carre");
    read(s, "oracle_half_width", c.oracle_half_width, "carre");
    read(s, "oracle_cells", c.oracle_cells, "carre");
    read(s, "value_trajectories", c.carre_value_trajectories, "carre");
    read(s, "gamma_samples", c.carre_gamma_samples, "carre");
    read(s, "regularize_times", c.regularize_times, "carre");
  }
  if (root.contains("ito")) {
    const json& s = root["ito"];
    reject_unknown(s, {"t"}, "ito");
    read(s, "t", c.ito_t, "ito");
  }
  if (root.contains("ergodic")) {
    const json& s = root["ergodic"];
    reject_unknown(s,
                   {"samples", "chains", "burn_in", "thin", "inner_trajectories", "gap_times",
                    "energy_t", "measure_file"},
                   "ergodic");
    read(s, "samples", c.measure_samples, "ergodic");
    read(s, "chains", c.chains, "ergodic");
    read(s, "burn_in", c.burn_in, "ergodic");
    read(s, "thin", c.thin, "ergodic");
    read(s, "inner_trajectories", c.inner_trajectories, "ergodic");
    read(s, "gap_times", c.gap_times, "ergodic");
    read(s, "energy_t", c.energy_t, "ergodic");
    read(s, "measure_file", c.measure_file, "ergodic");
  }
  if (root.contains("ladder")) {
    const json& s = root["ladder"];
    reject_unknown(s, {"truncation", "modes", "yosida"}, "ladder");
    read(s, "truncation", c.ladder_truncation, "ladder");
    read(s, "modes", c.ladder_modes, "ladder");
    read(s, "yosida", c.ladder_yosida, "ladder");
  }
  if (root.contains("output")) {
    const json& s = root["output"];
    reject_unknown(s, {"dir"}, "output");
    read(s, "dir", c.output_dir, "output");
  }

  static const std::set<std::string> presets{"cubic-default", "ou-linear", "heat", "custom"};
  if (!presets.count(c.preset)) throw ConfigError("model.preset: unknown preset '" + c.preset + "'");
  if (c.grid_n < 2) throw ConfigError("model.N must be at least 2");
  if (c.noise_modes > c.grid_n) throw ConfigError("model.noise_modes must not exceed N");
  if (!(c.truncation_n >= 1.0)) throw ConfigError("model.truncation_n must be >= 1 or null");
  positive(c.yosida_k, "model.yosida_k");
  positive(c.dt, "scheme.dt");
  if (!(c.horizon >= 0.0)) throw ConfigError("scheme.horizon must be non-negative");
  for (double t : c.snapshot_times)
    if (!(t >= 0.0 && t <= c.horizon + 1e-12))
      throw ConfigError("scheme.snapshot_times must lie in [0, horizon]");
  positive(c.blowup_ceiling, "scheme.blowup_ceiling");
  if (c.trajectories < 2) throw ConfigError("monte_carlo.trajectories must be at least 2");
  positive(c.lambda, "estimators.lambda");
  positive(c.fd_eps, "estimators.fd_eps");
  for (const auto& s : c.states)
    if (s.mode > c.grid_n) throw ConfigError("estimators.states: mode exceeds N");
  if (c.direction_mode < 1 || c.direction_mode > c.grid_n)
    throw ConfigError("estimators.direction_mode outside 1..N");
  if (c.series_length > c.grid_n) throw ConfigError("estimators.series_length must not exceed N");
  if (c.chains < 1 || c.measure_samples < 2) throw ConfigError("ergodic: empty sampling budget");
  if (c.inner_trajectories < 2) throw ConfigError("ergodic.inner_trajectories must be at least 2");
  for (auto m : c.ladder_modes)
    if (m < 1) throw ConfigError("ladder.modes must be positive");
  return c;
}

ExperimentConfig load_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot read config file " + path);
  std::stringstream ss;
  ss << in.rdbuf();
  return parse_config(ss.str());
}

std::string canonical_json(const ExperimentConfig& c) {
  json states = json::array();
  for (const auto& s : c.states) states.push_back({{"mode", s.mode}, {"amplitude", s.amplitude}});
  json j = {
      {"model",
       {{"preset", c.preset},
        {"a", c.ou_a},
        {"sigma", c.ou_sigma},
        {"reaction_polynomial", c.reaction_polynomial},
        {"diffusion",
         {{"base", c.diffusion_base},
          {"amplitude", c.diffusion_amplitude},
          {"slope", c.diffusion_slope}}},
        {"N", c.grid_n},
        {"noise_modes", c.modes()},
        {"truncation_n", level_json(c.truncation_n)},
        {"yosida_k", level_json(c.yosida_k)}}},
      {"scheme",
       {{"dt", c.dt},
        {"horizon", c.horizon},
        {"snapshot_times", c.snapshot_times},
        {"blowup_ceiling", c.blowup_ceiling}}},
      {"monte_carlo", {{"seed", c.seed}, {"trajectories", c.trajectories}}},
      {"estimators",
       {{"states", states},
        {"observables", c.observables},
        {"times", c.times},
        {"fd_eps", c.fd_eps},
        {"direction_mode", c.direction_mode},
        {"lambda", c.lambda},
        {"quadrature_nodes", c.quadrature_nodes},
        {"series_length", c.series_length}}},
      {"carre",
       {{"oracle", c.carre_oracle},
        {"oracle_half_width", c.oracle_half_width},
        {"oracle_cells", c.oracle_cells},
        {"value_trajectories", c.carre_value_trajectories},
        {"gamma_samples", c.carre_gamma_samples},
        {"regularize_times", c.regularize_times}}},
      {"ito", {{"t", c.ito_t}}},
      {"ergodic",
       {{"samples", c.measure_samples},
        {"chains", c.chains},
        {"burn_in", c.burn_in},
        {"thin", c.thin},
        {"inner_trajectories", c.inner_trajectories},
        {"gap_times", c.gap_times},
        {"energy_t", c.energy_t}}},
      {"ladder",
       {{"truncation", c.ladder_truncation},
        {"modes", c.ladder_modes},
        {"yosida", c.ladder_yosida}}}};
  return j.dump();
}

std::uint64_t fnv1a(const std::string& text) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char ch : text) {
    h ^= ch;
    h *= 0x100000001b3ULL;
  }
  return h;
}

std::uint64_t config_hash(const ExperimentConfig& cfg) { return fnv1a(canonical_json(cfg)); }

ModelSpec build_model(const ExperimentConfig& c) {
  const GridPtr grid = make_grid(c.grid_n);
  const std::size_t m = c.modes();
  if (c.preset == "cubic-default")
    return presets::cubic_default(grid, m, c.truncation_n, c.yosida_k);
  if (c.preset == "ou-linear")
    return make_model("ou-linear", presets::linear_reaction(c.ou_a),
                      presets::constant_diffusion(c.ou_sigma), grid, m, c.truncation_n, c.yosida_k);
  if (c.preset == "heat")
    return make_model("heat", presets::linear_reaction(0.0), presets::constant_diffusion(0.0), grid,
                      m, c.truncation_n, c.yosida_k);
  return make_model("custom", presets::polynomial_reaction(c.reaction_polynomial),
                    presets::affine_sine_diffusion(c.diffusion_base, c.diffusion_amplitude,
                                                   c.diffusion_slope),
                    grid, m, c.truncation_n, c.yosida_k);
}

Field build_state(const GridPtr& grid, const StateSpec& s) {
  if (s.mode == 0) return Field(grid);
  return s.amplitude * eigenpair(grid, s.mode).first;
}

std::string state_label(const StateSpec& s) {
  if (s.mode == 0 || s.amplitude == 0.0) return "0";
  std::ostringstream o;
  o << s.amplitude << "e" << s.mode;
  return o.str();
}

namespace {

Field parse_direction(const std::string& text, const GridPtr& grid) {
  Field w(grid);
  std::stringstream ss(text);
  std::string part;
  while (std::getline(ss, part, '+')) {
    if (part.size() < 2 || part[0] != 'e') throw ConfigError("observable direction '" + text + "'");
    const auto k = static_cast<std::size_t>(std::stoul(part.substr(1)));
    if (k < 1 || k > grid->size()) throw ConfigError("observable mode outside 1..N: " + part);
    w += eigenpair(grid, k).first;
  }
  return w;
}

}  // namespace

Observable parse_observable(const std::string& spec, const GridPtr& grid) {
  const auto colon = spec.find(':');
  if (colon == std::string::npos) throw ConfigError("observable '" + spec + "' lacks ':'");
  const std::string head = spec.substr(0, colon), arg = spec.substr(colon + 1);
  try {
    if (head == "const") return Observable::constant(std::stod(arg));
    if (head == "product") {
      const auto comma = arg.find(',');
      if (comma == std::string::npos) throw ConfigError("product observable needs two modes");
      const auto a = static_cast<std::size_t>(std::stoul(arg.substr(1, comma - 1)));
      const auto b = static_cast<std::size_t>(std::stoul(arg.substr(comma + 2)));
      if (a < 1 || b < 1 || a > grid->size() || b > grid->size())
        throw ConfigError("product observable modes outside 1..N");
      return mode_product(grid, a, b);
    }
    const ScalarMap chi = ScalarMap::by_name(head);
    if (arg.rfind("x@", 0) == 0) {
      const double xi = std::stod(arg.substr(2));
      if (!(xi > 0.0 && xi < 1.0)) throw ConfigError("evaluation point must lie in (0,1)");
      const double pos = xi * static_cast<double>(grid->size() + 1) - 1.0;
      const auto idx = static_cast<std::size_t>(std::clamp(std::llround(pos), 0LL,
                                                           static_cast<long long>(grid->size()) - 1));
      return Observable::evaluation(chi, grid, idx);
    }
    return Observable::cylindrical(chi, parse_direction(arg, grid));
  } catch (const std::invalid_argument& e) {
    if (dynamic_cast<const ConfigError*>(&e)) throw;
    throw ConfigError("observable '" + spec + "': " + e.what());
  } catch (const std::out_of_range& e) {
    throw ConfigError("observable '" + spec + "': " + e.what());
  }
}

}  // namespace rdlab
