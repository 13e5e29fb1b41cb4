#pragma once

#include <functional>
#include <span>
#include <utility>
#include <vector>

#include "rdlab/coefficients.hpp"
#include "rdlab/noise.hpp"
#include "rdlab/spectral.hpp"

namespace rdlab {

struct SchemeConfig {
  double dt = 1e-3;
  double horizon = 1.0;
  std::vector<double> snapshot_times;  ///< snapped to the nearest step; empty means {horizon}
  double blowup_ceiling = 1e3;
};

std::size_t snap_to_step(double t, double dt);

/// Immutable per-(model, dt) data of the exponential Euler scheme, shareable between threads.
class Stepper {
 public:
  Stepper(const ModelSpec& model, double dt, double blowup_ceiling = 1e3);

  const ModelSpec& model() const noexcept { return model_; }
  const GridPtr& grid() const noexcept { return model_.grid; }
  std::size_t size() const noexcept { return n_; }
  std::size_t noise_modes() const noexcept { return model_.noise_modes; }
  double dt() const noexcept { return dt_; }
  double blowup_ceiling() const noexcept { return ceiling_; }
  const ReactionSpec& reaction() const noexcept { return reaction_; }
  const DiffusionSpec& diffusion() const noexcept { return model_.diffusion; }
  bool reaction_vanishes() const noexcept { return zero_reaction_; }

  /// In place: v <- S_dt v (heat or Yosida multiplier per mode). `scratch` has size N.
  /// Uses a precomputed dense matrix: for the grid sizes used here a matvec beats two DSTs.
  void propagate(std::span<double> v, std::span<double> scratch) const;
  /// In place: v <- S_{m dt} v.
  void propagate_steps(std::span<double> v, std::span<double> scratch, std::size_t m) const;
  /// Grid noise field sum_{i<=M} e_i dbeta_i.
  void noise_field(std::span<const double> dbeta, std::span<double> w, std::span<double> scratch) const;

 private:
  ModelSpec model_;
  ReactionSpec reaction_;
  std::size_t n_;
  double dt_;
  double ceiling_;
  bool zero_reaction_ = false;
  std::vector<double> multiplier_;
  std::vector<double> mode_rate_;
  std::vector<double> propagator_;  // dense S_dt, symmetric, N x N
  std::vector<double> synthesis_;   // e_i(xi_j), column i contiguous, N x M
};

/// Per-step quantities needed to transpose the scheme's Jacobian.
struct AdjointTape {
  std::size_t n = 0;
  std::vector<double> jac_diag;  ///< 1 + dt f'(u_j) + g'(u_j) W_j, row j
  std::vector<double> bel_force; ///< W_j / g(u_j), row j (only when BEL recording is on)
  std::vector<double> states;    ///< u_j, row j
  std::size_t steps() const { return n == 0 ? 0 : jac_diag.size() / n; }
  std::span<const double> row(const std::vector<double>& v, std::size_t j) const {
    return {v.data() + j * n, n};
  }
};

/// One trajectory of u with optional tangent/second flows and BEL accumulators.
class Integrator {
 public:
  Integrator(const Stepper& stepper, const Field& x, NoiseStream stream);

  /// Tangent flow started at the current step with initial value h.
  std::size_t add_tangent(const Field& h);
  std::size_t add_second(std::size_t a, std::size_t b);
  void enable_bel();
  void enable_tape(bool with_bel_forcing = false);
  void drop_tangents();

  void step();
  void advance(std::size_t steps);

  std::size_t steps_taken() const noexcept { return step_; }
  double time() const noexcept { return static_cast<double>(step_) * stepper_->dt(); }
  const Field& u() const noexcept { return u_; }
  const Field& eta(std::size_t a) const { return eta_.at(a); }
  const Field& zeta(std::size_t p) const { return zeta_.at(p).field; }
  double bel(std::size_t a) const { return bel_.at(a); }
  std::size_t tangent_count() const noexcept { return eta_.size(); }
  std::size_t second_count() const noexcept { return zeta_.size(); }
  /// Noise field used in the most recent step.
  const std::vector<double>& last_noise_field() const noexcept { return w_; }
  const std::vector<double>& last_increments() const noexcept { return dbeta_; }
  const AdjointTape& tape() const noexcept { return tape_; }
  const NoiseStream& stream() const noexcept { return stream_; }

 private:
  struct Second {
    std::size_t a, b;
    Field field;
  };
  const Stepper* stepper_;
  NoiseStream stream_;
  Field u_;
  std::vector<Field> eta_;
  std::vector<Second> zeta_;
  std::vector<double> bel_;
  bool bel_on_ = false;
  bool tape_on_ = false;
  bool tape_bel_ = false;
  AdjointTape tape_;
  std::size_t step_ = 0;
  std::vector<double> dbeta_, w_, scratch_, fv_, gv_, d1f_, d1g_, d2f_, d2g_, buf_;
};

/// sum_{k<=end} J_{0->k}^T r_k computed backwards over a recorded tape. `forcing(k, acc)` adds
/// r_k into acc; it is called for k = end, end-1, ..., 0.
Field adjoint_sweep(const Stepper& stepper, const AdjointTape& tape, std::size_t end,
                    const std::function<void(std::size_t, std::span<double>)>& forcing);

struct FlowRequest {
  std::vector<Field> directions;
  std::vector<std::pair<std::size_t, std::size_t>> second;
  bool bel = false;
};

struct PathBundle {
  std::vector<double> times;
  std::vector<Field> u;
  std::vector<std::vector<Field>> eta;   ///< [direction][snapshot]
  std::vector<std::vector<Field>> zeta;  ///< [pair][snapshot]
  std::vector<std::vector<double>> bel;  ///< [direction][snapshot]
  double u_sup = 0.0;                    ///< sup over all steps of |u|_E
  std::vector<double> eta_sup;
  std::vector<double> zeta_sup;
  NoiseStream stream;
};

PathBundle evolve(const Stepper& stepper, const Field& x, const SchemeConfig& cfg,
                  const NoiseStream& stream, const FlowRequest& request = {});
PathBundle evolve_primary(const ModelSpec& model, const Field& x, const SchemeConfig& cfg,
                          const NoiseStream& stream);
PathBundle evolve_tangent(const ModelSpec& model, const Field& x, const SchemeConfig& cfg,
                          const NoiseStream& stream, const Field& h, bool with_bel = false);
PathBundle evolve_second(const ModelSpec& model, const Field& x, const SchemeConfig& cfg,
                         const NoiseStream& stream, const Field& h, const Field& k);
/// BEL integrals at the snapshots of a bundle built with FlowRequest::bel (direction a).
const std::vector<double>& bel_accumulate(const PathBundle& bundle, std::size_t a = 0);

PathBundle evolve_from_H(const ModelSpec& model, const Field& x_h, std::size_t n,
                         const SchemeConfig& cfg, const NoiseStream& stream);
/// sup over steps of |u^{x_n} - u^{x_{2n}}|_H on a shared noise path.
double mollifier_pair_distance(const ModelSpec& model, const Field& x_h, std::size_t n,
                               const SchemeConfig& cfg, const NoiseStream& stream);

}  // namespace rdlab
