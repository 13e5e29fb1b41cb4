#pragma once

#include <functional>
#include <vector>

#include "rdlab/coefficients.hpp"
#include "rdlab/flows.hpp"
#include "rdlab/montecarlo.hpp"
#include "rdlab/observable.hpp"

namespace rdlab {

/// Stream of trajectory i of an estimator: id = stream_offset + i.
NoiseStream trajectory_stream(const ModelSpec& model, const McConfig& mc, std::uint64_t i);

MCEstimate estimate_Pt(const ModelSpec& model, const Observable& phi, const Field& x, double t,
                       std::size_t n_traj, const McConfig& mc);
/// P_t phi(x) at several times from one trajectory population.
std::vector<MCEstimate> estimate_Pt_curve(const ModelSpec& model, const Observable& phi,
                                          const Field& x, const std::vector<double>& times,
                                          std::size_t n_traj, const McConfig& mc);

/// (1/t) E[(phi(u_t) - c) I_t^h] with I the BEL integral; c = phi(x) when `baseline` (same mean,
/// smaller variance), c = 0 otherwise.
MCEstimate gradient_bel(const ModelSpec& model, const Observable& phi, const Field& x, double t,
                        const Field& h, std::size_t n_traj, const McConfig& mc,
                        bool baseline = true);
MCEstimate gradient_tangent(const ModelSpec& model, const Observable& phi, const Field& x,
                            double t, const Field& h, std::size_t n_traj, const McConfig& mc);
/// Central difference of P_t phi along h with common noise.
MCEstimate gradient_fd(const ModelSpec& model, const Observable& phi, const Field& x, double t,
                       const Field& h, double eps, std::size_t n_traj, const McConfig& mc);

struct GradientComparisonRow {
  double t = 0.0;
  MCEstimate bel, tangent, fd;
  double se_bel_tangent = 0.0, se_fd_tangent = 0.0, se_bel_fd = 0.0;
  double fd_bias_budget = 0.0;  ///< (4/3)|D_eps - D_eps/2|
  bool bel_tangent_agree = false, fd_tangent_agree = false, bel_fd_agree = false;
  bool all_agree() const { return bel_tangent_agree && fd_tangent_agree && bel_fd_agree; }
};

/// BEL, tangent and finite-difference gradients on one shared trajectory population.
std::vector<GradientComparisonRow> compare_gradients(const ModelSpec& model, const Observable& phi,
                                                     const Field& x, const Field& h,
                                                     const std::vector<double>& times,
                                                     std::size_t n_traj, double eps,
                                                     const McConfig& mc);

enum class GradientRoute { tangent, bel };

struct GradientNormEstimate {
  double t = 0.0;
  MCEstimate norm;   ///< <h*, D P_t phi(x)> with h* fitted on an independent half sample
  Field direction;   ///< h*, |h*|_E = 1
  Field mean_gradient;  ///< full-sample mean gradient density
};

/// sup_{|h|_E <= 1} <h, D P_t phi(x)> by sample splitting: the direction sgn(mean gradient) is
/// fitted on the first half of the trajectories and evaluated on the second half.
std::vector<GradientNormEstimate> gradient_dual_norm(const ModelSpec& model, const Observable& phi,
                                                     const Field& x,
                                                     const std::vector<double>& times,
                                                     std::size_t n_traj, const McConfig& mc,
                                                     GradientRoute route);

struct QuadratureConfig {
  enum class Rule { geometric, lattice };
  Rule rule = Rule::geometric;
  double t_first = 5e-3;       ///< first positive node of the geometric grid
  std::size_t nodes = 80;
  double T_max = 0.0;          ///< 0: chosen from tail_tolerance
  double tail_tolerance = 1e-3;
};

/// Nodes on the step lattice with weights that already contain e^{-lambda t}.
struct QuadratureGrid {
  std::vector<std::size_t> steps;
  std::vector<double> times;
  std::vector<double> weights;
  double T_max = 0.0;
};

QuadratureGrid make_quadrature(double lambda, double sup_psi, const QuadratureConfig& q,
                               double dt);

struct ResolventEstimate {
  MCEstimate value;
  double lambda = 0.0;
  QuadratureGrid quadrature;
  double truncation_error_bound = 0.0;
};

ResolventEstimate resolvent(const ModelSpec& model, const Observable& psi, const Field& x,
                            double lambda, const QuadratureConfig& q, std::size_t n_traj,
                            const McConfig& mc);
/// K phi = lambda phi - psi for phi = (lambda - K)^{-1} psi.
double kolmogorov_from_resolvent(double phi_x, double lambda, double psi_x);

/// Per-trajectory gradient densities of the discrete resolvent functional at x.
struct ResolventGradientSamples {
  std::vector<Field> gradients;
  std::vector<double> values;
  QuadratureGrid quadrature;
  std::size_t aborted = 0;
};

ResolventGradientSamples resolvent_gradient_samples(const ModelSpec& model, const Observable& psi,
                                                    const Field& x, double lambda,
                                                    const QuadratureConfig& q, std::size_t n_traj,
                                                    const McConfig& mc, GradientRoute route);

struct GammaSeries {
  std::vector<double> terms;
  std::vector<double> term_se;
  std::vector<double> partial_sums;
  std::vector<double> tail;  ///< last few terms
  double value = 0.0;
  double std_error = 0.0;
  bool cauchy = true;
};

/// sum_{i <= M} <G(x) e_i, D phi(x)>_E^2; `provider(y)` returns <y, D phi(x)>_E.
GammaSeries gamma_operator(const ModelSpec& model, const std::function<double(const Field&)>& provider,
                           const Field& x, std::size_t m_series);
GammaSeries gamma_closed_form(const ModelSpec& model, const Observable& phi, const Field& x,
                              std::size_t m_series);
/// Unbiased terms from iid gradient samples (squares of means via U-statistics).
GammaSeries gamma_from_samples(const ModelSpec& model, const Field& x,
                               const std::vector<Field>& gradients, std::size_t m_series);
/// chi'(<x,w>)^2 |g(x) w|_H^2 for cylindrical phi.
double gamma_parseval(const ModelSpec& model, const Observable& phi, const Field& x);

/// Variance of mode k of the Ornstein-Uhlenbeck convolution at time t.
double ou_mode_variance(std::size_t k, double t);
MCEstimate ou_regularize(const ModelSpec& model, const Observable& psi, double t, const Field& x,
                         std::size_t n_mc, const McConfig& mc);

/// Finite system with drift b(x) = A_k x + F_n(x) and drivers sigma_i(x) = G(x) e_i, i <= M.
class FiniteSystem {
 public:
  /// Needs globally Lipschitz coefficients: finite truncation or a linear-growth reaction.
  static FiniteSystem from_model(const ModelSpec& model);

  const ModelSpec& model() const noexcept { return model_; }
  std::size_t drivers() const noexcept { return model_.noise_modes; }
  Field drift(const Field& x) const;
  Field diffusion(std::size_t i, const Field& x) const;

 private:
  ModelSpec model_;
  ReactionSpec reaction_;
  std::vector<Field> basis_;
};

/// L phi(x) = 1/2 sum_i D^2phi(x)(sigma_i, sigma_i) + <b(x), D phi(x)>.
double finite_generator_apply(const FiniteSystem& sys, const Observable& phi, const Field& x);
/// L(phi^2) - 2 phi L phi - sum_i <sigma_i, D phi>^2, zero up to round-off.
double square_identity_defect(const FiniteSystem& sys, const Observable& phi, const Field& x);

}  // namespace rdlab
