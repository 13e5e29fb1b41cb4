#pragma once

#include <string>
#include <utility>
#include <vector>

#include "rdlab/montecarlo.hpp"
#include "rdlab/observable.hpp"
#include "rdlab/semigroup.hpp"

namespace rdlab {

struct IdentityReport {
  std::string id;
  MCEstimate lhs, rhs;
  double discrepancy = 0.0;             ///< lhs - rhs
  double joint_std_error = 0.0;
  double deterministic_tolerance = 0.0;
  bool pass = false;
  bool inconclusive = false;
  std::vector<std::pair<std::string, double>> metadata;

  /// pass <=> |discrepancy| <= 3 joint_std_error + deterministic_tolerance.
  void decide();
  double z_score() const;
};

struct CarreBudget {
  std::size_t n_value = 4000;   ///< trajectories for the resolvent functional and its square
  std::size_t n_gamma = 1000;   ///< outer samples for the Gamma integral
  double tail_tolerance = 1e-3;
};

/// phi^2 = (2 lambda - K)^{-1}(2 phi psi - Gamma(phi)), phi = (lambda - K)^{-1} psi, at x.
/// Both sides use the same lattice resolvent functional Phi = sum_k dt e^{-lambda t_k} psi(u_k):
/// lhs = phi(x)^2 (unbiased square of the mean), rhs = E[Phi^2] - sum_j dt e^{-2 lambda t_{j+1}}
/// E[Gamma_S(phi)(u_j)], where the 2 phi psi term enters through E[Phi^2] by the tower property and
/// Gamma_S uses the per-step noise directions S_dt G(u_j) e_i. The Gamma sum is sampled at a random
/// step J ~ e^{-2 lambda t_{J+1}}, with two independent branches from u_{J+1} whose adjoint
/// gradients are multiplied so that the square is unbiased.
IdentityReport check_carre_resolvent(const ModelSpec& model, const Observable& psi, double lambda,
                                     const Field& x, const CarreBudget& budget, const McConfig& mc);

/// E phi(X_t) = phi(x) + E int_0^t L phi(X_s) ds for a finite system, left-point quadrature along the
/// simulated paths, Richardson-extrapolated between dt and dt/2 on bridged noise.
IdentityReport check_ito_E(const FiniteSystem& sys, const Observable& phi, const Field& x, double t,
                           std::size_t n_traj, const McConfig& mc);

struct EnergyReport {
  IdentityReport identity;
  std::vector<double> times;
  std::vector<MCEstimate> energy;  ///< int (P_t phi)^2 dmu at `times`
  bool monotone = true;            ///< non-increasing within 3 joint SE
};

/// int (P_t phi)^2 dmu + int_0^t int Gamma(P_s phi) dmu ds = int phi^2 dmu over measure samples.
/// Per sample x: K inner trajectories, each carrying M tangents started after the first step along
/// S_dt G(x) e_i; unbiased Gamma terms come from cross products across the inner trajectories.
EnergyReport check_energy_identity(const ModelSpec& model, const Observable& phi, double t,
                                   const std::vector<Field>& measure, std::size_t n_inner,
                                   const McConfig& mc, std::vector<double> monotone_times = {});

/// cos(<x, e_k>) regularized by the Ornstein-Uhlenbeck kernel at time t, in closed form:
/// R_t psi(x) = cos(e^{-k^2 pi^2 t} <x, e_k>) e^{-q_k(t)/2} (q_k = 0 when k > M).
Observable ou_regularized_mode_cosine(const GridPtr& grid, std::size_t k, double t,
                                      std::size_t noise_modes);

}  // namespace rdlab
