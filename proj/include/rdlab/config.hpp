#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "rdlab/coefficients.hpp"
#include "rdlab/montecarlo.hpp"
#include "rdlab/observable.hpp"

namespace rdlab {

/// Initial state: amplitude * e_mode, or zero when mode == 0.
struct StateSpec {
  std::size_t mode = 0;
  double amplitude = 0.0;
};

struct ExperimentConfig {
  // model
  std::string preset = "cubic-default";  ///< cubic-default | ou-linear | heat | custom
  double ou_a = 1.0;
  double ou_sigma = 1.0;
  std::vector<double> reaction_polynomial{0.0, 1.0, 0.0, -1.0};  ///< custom: coefficients of rho^i
  double diffusion_base = 1.0, diffusion_amplitude = 0.1, diffusion_slope = 0.0;  ///< custom
  std::size_t grid_n = 32;
  std::size_t noise_modes = 0;  ///< 0: N
  double truncation_n = infinity;
  double yosida_k = infinity;

  // scheme
  double dt = 1e-3;
  double horizon = 1.0;
  std::vector<double> snapshot_times;
  double blowup_ceiling = 1e3;

  // monte carlo
  std::uint64_t seed = 20240601;
  unsigned threads = 1;
  std::size_t trajectories = 1000;

  // estimators
  std::vector<StateSpec> states{{0, 0.0}, {1, 1.0}};
  std::vector<std::string> observables{"tanh:e1"};
  std::vector<double> times{0.1, 0.5, 1.0};
  double fd_eps = 1e-2;
  std::size_t direction_mode = 1;  ///< h = e_k for gradient comparisons
  double lambda = 1.0;
  std::size_t quadrature_nodes = 80;
  std::size_t series_length = 0;  ///< 0: M

  // carre
  bool carre_oracle = false;
  double oracle_half_width = 4.0;
  std::size_t oracle_cells = 4000;
  std::size_t carre_value_trajectories = 2000;
  std::size_t carre_gamma_samples = 500;
  std::vector<double> regularize_times;

  // ito
  double ito_t = 0.25;

  // ergodic
  std::size_t measure_samples = 512;
  std::size_t chains = 64;
  double burn_in = 0.0;
  double thin = 0.0;
  std::size_t inner_trajectories = 64;
  std::vector<double> gap_times{0.0, 0.05, 0.1, 0.15, 0.2};
  double energy_t = 0.0;  ///< > 0 adds the energy identity to `ergodic`
  std::string measure_file;  ///< reuse a persisted measure

  // ladder
  std::vector<double> ladder_truncation{1.0, 2.0, 4.0, 8.0};
  std::vector<std::size_t> ladder_modes{4, 8, 16};
  std::vector<double> ladder_yosida{1e2, 1e3, 1e4};

  std::string output_dir = "rdlab_out";

  std::size_t modes() const { return noise_modes == 0 ? grid_n : noise_modes; }
  McConfig mc() const;
};

/// Parses JSON text; unknown keys, wrong types and invalid values raise ConfigError.
ExperimentConfig parse_config(const std::string& json_text);
ExperimentConfig load_config(const std::string& path);
/// Canonical JSON of every field that can change results (not threads or output paths).
std::string canonical_json(const ExperimentConfig& cfg);
std::uint64_t config_hash(const ExperimentConfig& cfg);
std::uint64_t fnv1a(const std::string& text);

ModelSpec build_model(const ExperimentConfig& cfg);
Field build_state(const GridPtr& grid, const StateSpec& s);
std::string state_label(const StateSpec& s);

/// "tanh:e1", "cos:e2", "sin:e1+e2", "identity:e1", "sign:e1", "tanh:x@0.5", "product:e1,e2",
/// "const:0.5".
Observable parse_observable(const std::string& spec, const GridPtr& grid);

}  // namespace rdlab
