#pragma once

#include <iosfwd>
#include <string>
#include <vector>

#include "rdlab/config.hpp"
#include "rdlab/montecarlo.hpp"

namespace rdlab {

enum ExitCode : int { exit_ok = 0, exit_failed = 1, exit_config = 2, exit_hypothesis = 3 };

const std::vector<std::string>& subcommands();

/// Runs one subcommand, writes its CSVs and manifest under cfg.output_dir and returns the exit
/// code. Configuration and hypothesis errors propagate as exceptions.
int run_subcommand(const std::string& name, const ExperimentConfig& cfg, std::ostream& log);

struct LadderPoint {
  std::string axis;  ///< truncation | modes | yosida
  double level = 0.0;
  MCEstimate path_distance;        ///< sup_t |u_level - u_ref|_E
  MCEstimate resolvent_distance;   ///< |Phi_level - Phi_ref| for the coupled resolvent functional
  std::size_t identity_eligible = 0;  ///< paths with sup|u_ref| < n (truncation axis)
  std::size_t identity_exact = 0;     ///< of those, paths equal bit for bit
};

/// Coupled sweeps along the truncation level, the noise mode count and the Yosida index, each
/// against the reference (no truncation, M = max, exact A) on shared noise.
std::vector<LadderPoint> ladder_sweep(const ExperimentConfig& cfg, std::size_t n_paths);
/// Distances non-increasing along `axis` (ties allowed).
bool ladder_monotone(const std::vector<LadderPoint>& points, const std::string& axis);

}  // namespace rdlab
