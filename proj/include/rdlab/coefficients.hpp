#pragma once

#include <functional>
#include <limits>
#include <optional>
#include <string>
#include <vector>

#include "rdlab/spectral.hpp"

namespace rdlab {

inline constexpr double infinity = std::numeric_limits<double>::infinity();

/// Coefficient closure (xi, rho) -> value. Must be safe to call concurrently.
using Coefficient = std::function<double(double, double)>;

struct ReactionSpec {
  std::string name;
  Coefficient f, df, d2f;
  double degree_m = 1.0;
  double lambda_dissip = 0.0;  ///< declared bound on sup f'
  std::optional<double> alpha_h14, beta_h14;
};

struct DiffusionSpec {
  std::string name;
  Coefficient g, dg, d2g;
  double lip_const = 0.0;
  double beta_g = 0.0;            ///< declared lower bound of |g|
  double upper_bound = infinity;  ///< declared upper bound of |g|
};

struct SamplingBox {
  double rho_max = 10.0;
  std::size_t rho_samples = 4001;
  std::size_t xi_samples = 9;
  double tolerance = 1e-9;
};

struct HypothesisItem {
  std::string id;
  bool pass = false;
  double measured = 0.0;
  double declared = 0.0;
  double witness_rho = 0.0;
  double witness_xi = 0.0;
  std::string message;
};

struct HypothesisReport {
  std::vector<HypothesisItem> items;

  const HypothesisItem* find(const std::string& id) const;
  /// All items whose id starts with the given prefix pass ("H1", "H2", "H3").
  bool passes(const std::string& prefix) const;
  bool all_pass() const;
};

struct ModelSpec {
  std::string preset;
  ReactionSpec reaction;
  DiffusionSpec diffusion;
  double truncation_n = infinity;
  GridPtr grid;
  std::size_t noise_modes = 1;
  double yosida_k = infinity;
  HypothesisReport hypotheses;

  /// f_n when truncation is finite, f otherwise.
  ReactionSpec effective_reaction() const;
};

/// Odd C^2 cutoff: identity on [-1,1], +-2 beyond |r| >= 2, quintic blend between.
double gamma_cutoff(double r);
double gamma_cutoff_d1(double r);
double gamma_cutoff_d2(double r);

ReactionSpec truncate_reaction(const ReactionSpec& f, double n, const SamplingBox& box = {});

HypothesisReport validate_hypotheses(const ReactionSpec& f, const DiffusionSpec& g,
                                     const SamplingBox& box = {});
HypothesisReport validate_hypotheses(const ModelSpec& model, const SamplingBox& box = {});

/// Smallest beta with (f(rho+s)-f(rho)) sgn s <= -alpha|s|^m + beta(1+|rho|^m) on a sampled box.
double fit_strong_dissipativity_beta(const ReactionSpec& f, double alpha, double rho_max = 10.0,
                                     std::size_t samples = 801);

/// Builds a model and attaches its hypothesis report.
ModelSpec make_model(std::string preset, ReactionSpec f, DiffusionSpec g, GridPtr grid,
                     std::size_t noise_modes, double truncation_n = infinity,
                     double yosida_k = infinity, const SamplingBox& box = {});

Field apply_F(const ModelSpec& model, const Field& x);
Field apply_DF(const ModelSpec& model, const Field& x, const Field& y);
Field apply_D2F(const ModelSpec& model, const Field& x, const Field& y1, const Field& y2);
Field apply_G(const ModelSpec& model, const Field& x, const Field& y);
Field apply_G_inverse(const ModelSpec& model, const Field& x, const Field& y);

namespace presets {

/// f = rho - rho^3
ReactionSpec cubic_reaction();
/// f = -a rho
ReactionSpec linear_reaction(double a);
/// f = sum_i c_i rho^i; lambda and degree are read off by scanning.
ReactionSpec polynomial_reaction(std::vector<double> coeffs, const SamplingBox& box = {});
/// g = 1 + 0.1 sin rho
DiffusionSpec sine_diffusion(double base = 1.0, double amplitude = 0.1);
DiffusionSpec constant_diffusion(double sigma);
/// g = base + amplitude sin rho + slope rho
DiffusionSpec affine_sine_diffusion(double base, double amplitude, double slope);

ModelSpec cubic_default(GridPtr grid, std::size_t noise_modes, double truncation_n = infinity,
                        double yosida_k = infinity);
ModelSpec ou_linear(GridPtr grid, std::size_t noise_modes, double a, double sigma);
ModelSpec heat(GridPtr grid, std::size_t noise_modes);

}  // namespace presets

}  // namespace rdlab
