#pragma once

#include <functional>
#include <vector>

#include "rdlab/coefficients.hpp"

namespace rdlab {

/// dY = b(Y) dt + s(Y) dB on the real line.
struct ScalarDiffusion {
  std::function<double(double)> drift;
  std::function<double(double)> sigma;
};

/// Galerkin reduction of a model onto e_1 with one noise mode: Y = <u, e_1>,
/// b(y) = -pi^2 y + <F(y e_1), e_1>_H and s(y) = <G(y e_1) e_1, e_1>_H, quadratures on the model grid.
ScalarDiffusion one_mode_reduction(const ModelSpec& model);

/// Grid function on [-L, L] with linear interpolation.
struct ScalarGridFunction {
  std::vector<double> y;
  std::vector<double> values;
  double operator()(double at) const;
  double derivative(std::size_t i) const;
};

/// (lambda - L)u = rhs with L u = b u' + s^2 u'' / 2, central differences on `cells` intervals of
/// [-L, L] and zero-flux ends.
ScalarGridFunction solve_scalar_resolvent(const ScalarDiffusion& sd, double lambda,
                                          const std::function<double(double)>& rhs, double half_width,
                                          std::size_t cells);
ScalarGridFunction solve_scalar_resolvent(const ScalarDiffusion& sd, double lambda,
                                          const std::vector<double>& rhs, double half_width);

struct ScalarCarreCheck {
  ScalarGridFunction phi;         ///< (lambda - L)^{-1} psi
  ScalarGridFunction phi_sq;      ///< phi^2
  ScalarGridFunction composite;   ///< (2 lambda - L)^{-1}(2 phi psi - s^2 phi'^2)
  double max_abs_error = 0.0;     ///< over |y| <= check_width
};

ScalarCarreCheck scalar_carre_check(const ScalarDiffusion& sd, double lambda,
                                    const std::function<double(double)>& psi, double half_width,
                                    std::size_t cells, double check_width);

}  // namespace rdlab
