#include "rdlab/scalar_oracle.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <stdexcept>

#include "rdlab/errors.hpp"

namespace rdlab {

ScalarDiffusion one_mode_reduction(const ModelSpec& model) {
  const GridPtr grid = model.grid;
  const Field e1 = eigenpair(grid, 1).first;
  const ReactionSpec f = model.effective_reaction();
  const DiffusionSpec g = model.diffusion;
  const double pi2 = std::numbers::pi * std::numbers::pi;
  ScalarDiffusion sd;
  sd.drift = [=](double y) {
    double s = 0.0;
    const auto& xi = grid->points();
    for (std::size_t j = 0; j < xi.size(); ++j) s += f.f(xi[j], y * e1[j]) * e1[j];
    return -pi2 * y + grid->spacing() * s;
  };
  sd.sigma = [=](double y) {
    double s = 0.0;
    const auto& xi = grid->points();
    for (std::size_t j = 0; j < xi.size(); ++j) s += g.g(xi[j], y * e1[j]) * e1[j] * e1[j];
    return grid->spacing() * s;
  };
  return sd;
}

double ScalarGridFunction::operator()(double at) const {
  if (at <= y.front()) return values.front();
  if (at >= y.back()) return values.back();
  const auto it = std::upper_bound(y.begin(), y.end(), at);
  const std::size_t i = static_cast<std::size_t>(it - y.begin());
  const double w = (at - y[i - 1]) / (y[i] - y[i - 1]);
  return (1.0 - w) * values[i - 1] + w * values[i];
}

double ScalarGridFunction::derivative(std::size_t i) const {
  const std::size_t n = y.size();
  if (i == 0) return (values[1] - values[0]) / (y[1] - y[0]);
  if (i + 1 == n) return (values[n - 1] - values[n - 2]) / (y[n - 1] - y[n - 2]);
  return (values[i + 1] - values[i - 1]) / (y[i + 1] - y[i - 1]);
}

ScalarGridFunction solve_scalar_resolvent(const ScalarDiffusion& sd, double lambda,
                                          const std::vector<double>& rhs, double half_width) {
  if (!(lambda > 0.0)) throw DomainError("scalar resolvent: lambda must be positive");
  const std::size_t n = rhs.size();
  if (n < 3) throw std::invalid_argument("scalar resolvent: need at least 3 nodes");
  const double dy = 2.0 * half_width / static_cast<double>(n - 1);
  ScalarGridFunction out;
  out.y.resize(n);
  for (std::size_t i = 0; i < n; ++i) out.y[i] = -half_width + static_cast<double>(i) * dy;

  // tridiagonal rows: lo u_{i-1} + di u_i + up u_{i+1} = rhs_i; ghost nodes mirror the neighbour
  std::vector<double> lo(n), di(n), up(n), r(rhs);
  for (std::size_t i = 0; i < n; ++i) {
    const double b = sd.drift(out.y[i]);
    const double s = sd.sigma(out.y[i]);
    const double a = 0.5 * s * s / (dy * dy);
    const double c = 0.5 * b / dy;
    lo[i] = -(a - c);
    up[i] = -(a + c);
    di[i] = lambda + 2.0 * a;
  }
  up[0] += lo[0];
  lo[0] = 0.0;
  lo[n - 1] += up[n - 1];
  up[n - 1] = 0.0;
  // Thomas elimination
  for (std::size_t i = 1; i < n; ++i) {
    const double m = lo[i] / di[i - 1];
    di[i] -= m * up[i - 1];
    r[i] -= m * r[i - 1];
  }
  out.values.assign(n, 0.0);
  out.values[n - 1] = r[n - 1] / di[n - 1];
  for (std::size_t i = n - 1; i-- > 0;) out.values[i] = (r[i] - up[i] * out.values[i + 1]) / di[i];
  return out;
}

ScalarGridFunction solve_scalar_resolvent(const ScalarDiffusion& sd, double lambda,
                                          const std::function<double(double)>& rhs, double half_width,
                                          std::size_t cells) {
  std::vector<double> r(cells + 1);
  const double dy = 2.0 * half_width / static_cast<double>(cells);
  for (std::size_t i = 0; i <= cells; ++i) r[i] = rhs(-half_width + static_cast<double>(i) * dy);
  return solve_scalar_resolvent(sd, lambda, r, half_width);
}

ScalarCarreCheck scalar_carre_check(const ScalarDiffusion& sd, double lambda,
                                    const std::function<double(double)>& psi, double half_width,
                                    std::size_t cells, double check_width) {
  ScalarCarreCheck c;
  c.phi = solve_scalar_resolvent(sd, lambda, psi, half_width, cells);
  const std::size_t n = c.phi.y.size();
  std::vector<double> composite_rhs(n);
  c.phi_sq = c.phi;
  for (std::size_t i = 0; i < n; ++i) {
    const double y = c.phi.y[i], p = c.phi.values[i], s = sd.sigma(y), d = c.phi.derivative(i);
    c.phi_sq.values[i] = p * p;
    composite_rhs[i] = 2.0 * p * psi(y) - s * s * d * d;
  }
  c.composite = solve_scalar_resolvent(sd, 2.0 * lambda, composite_rhs, half_width);
  for (std::size_t i = 0; i < n; ++i)
    if (std::abs(c.phi.y[i]) <= check_width)
      c.max_abs_error =
          std::max(c.max_abs_error, std::abs(c.phi_sq.values[i] - c.composite.values[i]));
  return c;
}

}  // namespace rdlab
