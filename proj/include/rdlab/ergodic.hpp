#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "rdlab/identity_checks.hpp"
#include "rdlab/montecarlo.hpp"
#include "rdlab/observable.hpp"

namespace rdlab {

struct MixingDiagnostic {
  std::string functional;
  double mean_from_zero = 0.0, mean_from_2e1 = 0.0;
  double joint_std_error = 0.0;
  bool pass = false;  ///< discrepancy below 3 joint SE
};

struct EmpiricalMeasure {
  std::vector<Field> samples;
  std::vector<std::size_t> chain;  ///< chain index of each sample
  double burn_in = 0.0;
  double thin = 0.0;
  std::size_t chains = 0;
  std::uint64_t seed = 0;
  double dt = 0.0;
  std::size_t aborted_chains = 0;
  std::uint64_t config_hash = 0;
  std::vector<MixingDiagnostic> mixing;

  std::size_t size() const noexcept { return samples.size(); }
  /// Samples of the first `chains` chains (used for sample-doubling checks).
  EmpiricalMeasure chain_prefix(std::size_t chains) const;
};

struct SamplerConfig {
  double burn_in = 0.0;  ///< 0: 5 / alpha
  double thin = 0.0;     ///< 0: 1 / alpha
  std::size_t n_samples = 512;
  std::size_t chains = 64;
};

/// pi^2 - sup f': the dissipativity margin behind the invariant measure.
double dissipativity_margin(const ModelSpec& model);

/// Even chains start at 0, odd chains at 2 e_1; each contributes n_samples / chains snapshots.
EmpiricalMeasure sample_invariant(const ModelSpec& model, const SamplerConfig& cfg,
                                  const McConfig& mc);

MCEstimate moment(const EmpiricalMeasure& measure, double p);
MCEstimate measure_mean(const EmpiricalMeasure& measure, const Observable& phi);

/// int P_t phi dmu against int phi dmu, one trajectory per sample, paired.
IdentityReport invariance_check(const ModelSpec& model, const EmpiricalMeasure& measure,
                                const Observable& phi, double t, const McConfig& mc);

struct PoincareRow {
  std::string name;
  MCEstimate variance;
  MCEstimate energy;  ///< int |D phi|_{E*}^2 dmu
  double ratio = 0.0;
  bool excluded = false;  ///< zero energy
};

struct PoincareReport {
  std::vector<PoincareRow> rows;
  double rho_hat = 0.0;
  double rho_se = 0.0;  ///< chain bootstrap
  bool finite() const;
};

PoincareReport poincare_report(const EmpiricalMeasure& measure,
                               const std::vector<Observable>& family,
                               std::size_t bootstrap = 200, std::uint64_t seed = 1);

struct GapFit {
  std::vector<double> t;
  std::vector<MCEstimate> d;  ///< int (P_t phi - phibar)^2 dmu
  double phi_bar = 0.0;
  double phi_bar_se = 0.0;
  double delta_hat = 0.0;
  double delta_se = 0.0;
  double r2 = 0.0;
  bool equilibrated = false;
};

/// Nested Monte Carlo: for each measure sample, n_inner trajectories observed at every t.
GapFit gap_fit(const ModelSpec& model, const EmpiricalMeasure& measure, const Observable& phi,
               const std::vector<double>& t_grid, std::size_t n_inner, const McConfig& mc);

struct DecayFit {
  std::vector<double> t;
  std::vector<MCEstimate> sup_norm;  ///< sup over x of |D P_t phi(x)|_{E*}
  double theta_hat = 0.0;
  double theta_se = 0.0;
  double r2 = 0.0;
  bool monotone = true;
};

DecayFit uniform_gradient_decay(const ModelSpec& model, const Observable& phi,
                                const std::vector<double>& t_grid, const std::vector<Field>& x_set,
                                std::size_t n_traj, const McConfig& mc);

/// CSV with a manifest header; loading checks the config hash and grid size.
void save_measure(const std::string& path, const EmpiricalMeasure& measure);
EmpiricalMeasure load_measure(const std::string& path, const GridPtr& grid,
                              std::uint64_t expected_hash);

}  // namespace rdlab
