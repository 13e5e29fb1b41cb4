#include <cmath>
#include <numbers>

#include "doctest.h"
#include "rdlab/errors.hpp"
#include "rdlab/semigroup.hpp"
#include "support.hpp"

using namespace rdlab;
using rdlab::testing::mode;
constexpr double pi = std::numbers::pi;

namespace {

McConfig mc_with(double dt, std::uint64_t offset = 0) {
  McConfig mc;
  mc.seed = 99;
  mc.dt = dt;
  mc.stream_offset = offset;
  return mc;
}

// per-step multiplier of mode k for the linear model
double ou_mult(std::size_t k, double a, double dt) {
  return std::exp(-double(k * k) * pi * pi * dt) * (1.0 - a * dt);
}

}  // namespace

TEST_CASE("transition semigroup of a linear observable under the linear model") {
  const auto g = make_grid(16);
  const double a = 0.5, dt = 2e-3;
  const ModelSpec m = presets::ou_linear(g, 16, a, 1.0);
  const Observable phi = Observable::cylindrical(ScalarMap::identity(), mode(g, 1));
  const Field x = mode(g, 1, 2.0);
  const auto est = estimate_Pt_curve(m, phi, x, {0.0, 0.1, 0.3}, 3000, mc_with(dt));
  CHECK(est[0].mean == doctest::Approx(2.0));
  CHECK(est[0].std_error == 0.0);
  CHECK(std::abs(est[1].mean - 2.0 * std::pow(ou_mult(1, a, dt), 50)) < 5 * est[1].std_error);
  CHECK(std::abs(est[2].mean - 2.0 * std::pow(ou_mult(1, a, dt), 150)) < 5 * est[2].std_error);
  // second moment of a centred observable: variance of mode 1 of the discrete convolution
  const Observable sq = Observable::cylindrical(ScalarMap::square(), mode(g, 1));
  const MCEstimate m2 = estimate_Pt(m, sq, Field(g), 0.1, 3000, mc_with(dt));
  double var = 0.0;
  for (std::size_t j = 1; j <= 50; ++j) var += dt * std::pow(ou_mult(1, a, dt), 2.0 * double(j)) /
                                                (1.0 - a * dt) / (1.0 - a * dt);
  CHECK(std::abs(m2.mean - var) < 5 * m2.std_error);
}

TEST_CASE("three gradient estimators agree with the exact linear-model gradient") {
  const auto g = make_grid(16);
  const double a = 0.5, dt = 2e-3, t = 0.1;
  const ModelSpec m = presets::ou_linear(g, 16, a, 1.0);
  const Observable phi = Observable::cylindrical(ScalarMap::identity(), mode(g, 1));
  const Field x = mode(g, 1, 0.5), h = mode(g, 1);
  const double exact = std::pow(ou_mult(1, a, dt), 50);
  const MCEstimate tan = gradient_tangent(m, phi, x, t, h, 200, mc_with(dt));
  CHECK(tan.mean == doctest::Approx(exact).epsilon(1e-10));
  const MCEstimate fd = gradient_fd(m, phi, x, t, h, 1e-2, 200, mc_with(dt));
  CHECK(fd.mean == doctest::Approx(exact).epsilon(1e-8));
  const MCEstimate bel = gradient_bel(m, phi, x, t, h, 4000, mc_with(dt));
  CHECK(std::abs(bel.mean - exact) < 5 * bel.std_error);
  const MCEstimate raw = gradient_bel(m, phi, x, t, h, 4000, mc_with(dt), false);
  CHECK(std::abs(raw.mean - exact) < 5 * raw.std_error);
  CHECK(gradient_tangent(m, phi, x, 0.0, h, 10, mc_with(dt)).mean == doctest::Approx(1.0));
}

TEST_CASE("gradient comparison on the cubic model is internally consistent") {
  const auto g = make_grid(16);
  const ModelSpec m = presets::cubic_default(g, 16);
  const Observable phi = Observable::cylindrical(ScalarMap::tanh(), mode(g, 1));
  const auto rows = compare_gradients(m, phi, mode(g, 1), mode(g, 1), {0.1, 0.3}, 600, 1e-2,
                                      mc_with(1e-3));
  REQUIRE(rows.size() == 2);
  for (const auto& r : rows) {
    CHECK(std::abs(r.bel.mean - r.tangent.mean) < 4.5 * r.se_bel_tangent);
    CHECK(std::abs(r.fd.mean - r.tangent.mean) < 4.5 * r.se_fd_tangent + r.fd_bias_budget);
    CHECK(r.fd_bias_budget >= 0.0);
  }
}

TEST_CASE("dual norm of the gradient for a linear observable is exact along the tangent route") {
  const auto g = make_grid(16);
  const double a = 0.5, dt = 2e-3;
  const ModelSpec m = presets::ou_linear(g, 16, a, 1.0);
  const Observable phi = Observable::cylindrical(ScalarMap::identity(), mode(g, 1));
  const auto r = gradient_dual_norm(m, phi, Field(g), {0.1}, 40, mc_with(dt), GradientRoute::tangent);
  REQUIRE(r.size() == 1);
  CHECK(r[0].norm.mean ==
        doctest::Approx(std::pow(ou_mult(1, a, dt), 50) * mode(g, 1).l1_norm()).epsilon(1e-9));
  CHECK(r[0].direction.sup_norm() == doctest::Approx(1.0));
}

TEST_CASE("quadrature weights integrate the exponential exactly") {
  const double lambda = 1.3, dt = 1e-3;
  QuadratureConfig q;
  q.rule = QuadratureConfig::Rule::lattice;
  q.T_max = 4.0;
  const QuadratureGrid lat = make_quadrature(lambda, 1.0, q, dt);
  double s = 0.0;
  for (double w : lat.weights) s += w;
  const double K = double(lat.steps.size());
  CHECK(s == doctest::Approx(dt * (1 - std::exp(-lambda * K * dt)) / (1 - std::exp(-lambda * dt))));
  q.rule = QuadratureConfig::Rule::geometric;
  const QuadratureGrid geo = make_quadrature(lambda, 1.0, q, dt);
  s = 0.0;
  for (double w : geo.weights) s += w;
  CHECK(s == doctest::Approx((1 - std::exp(-lambda * geo.T_max)) / lambda).epsilon(1e-12));
  for (std::size_t i = 0; i + 1 < geo.steps.size(); ++i) CHECK(geo.steps[i] < geo.steps[i + 1]);
  CHECK(geo.steps.front() == 0);
  // automatic horizon from the tail tolerance
  QuadratureConfig qa;
  const QuadratureGrid aut = make_quadrature(lambda, 2.0, qa, dt);
  CHECK(2.0 * std::exp(-lambda * aut.T_max) / lambda <= qa.tail_tolerance * 1.01);
}

TEST_CASE("resolvent of a constant and the Kolmogorov relation") {
  const auto g = make_grid(8);
  const ModelSpec m = presets::cubic_default(g, 8);
  QuadratureConfig q;
  q.T_max = 3.0;
  const ResolventEstimate r =
      resolvent(m, Observable::constant(2.0), Field(g), 1.0, q, 20, mc_with(1e-3));
  double s = 0.0;
  for (double w : r.quadrature.weights) s += w;
  CHECK(r.value.mean == doctest::Approx(2.0 * s));
  CHECK(kolmogorov_from_resolvent(3.0, 2.0, 1.0) == doctest::Approx(5.0));
}

TEST_CASE("Gamma series: closed form, Parseval and unbiased sample form agree") {
  const auto g = make_grid(24);
  const ModelSpec full = presets::cubic_default(g, 24);
  const Observable phi = Observable::cylindrical(ScalarMap::tanh(), mode(g, 1) + mode(g, 2, 0.5));
  const Field x = mode(g, 1, 0.7);
  const GammaSeries c = gamma_closed_form(full, phi, x, 24);
  CHECK(c.value == doctest::Approx(gamma_parseval(full, phi, x)).epsilon(1e-10));
  for (std::size_t i = 0; i + 1 < c.partial_sums.size(); ++i)
    CHECK(c.partial_sums[i] <= c.partial_sums[i + 1] + 1e-15);
  const ModelSpec part = presets::cubic_default(g, 6);
  CHECK(gamma_closed_form(part, phi, x, 6).value <= c.value);
  // identical samples: the U-statistic collapses to the closed form
  const Field d = phi.gradient(x).as_density();
  const GammaSeries u = gamma_from_samples(full, x, {d, d, d}, 24);
  CHECK(u.value == doctest::Approx(c.value).epsilon(1e-10));
  const Observable ev = Observable::evaluation(ScalarMap::tanh(), g, 5);
  CHECK_THROWS_AS(gamma_parseval(full, ev, x), PreconditionError);
}

TEST_CASE("Ornstein-Uhlenbeck mode variance") {
  for (std::size_t k : {1u, 3u})
    for (double t : {0.01, 0.2}) {
      const double l = double(k * k) * pi * pi;
      CHECK(ou_mode_variance(k, t) == doctest::Approx((1 - std::exp(-2 * l * t)) / (2 * l)));
    }
  CHECK(ou_mode_variance(1, 0.0) == 0.0);
}

TEST_CASE("finite system generator against hand-computed values") {
  const auto g = make_grid(6);
  const double a = 0.4, sigma = 1.3;
  const ModelSpec m = presets::ou_linear(g, 6, a, sigma);
  const FiniteSystem sys = FiniteSystem::from_model(m);
  const Field x = mode(g, 1, 0.9) + mode(g, 2, -0.3);
  const double y = 0.9;
  const Observable lin = Observable::cylindrical(ScalarMap::identity(), mode(g, 1));
  CHECK(finite_generator_apply(sys, lin, x) == doctest::Approx(-(pi * pi + a) * y));
  const Observable cs = Observable::cylindrical(ScalarMap::cos(), mode(g, 1));
  CHECK(finite_generator_apply(sys, cs, x) ==
        doctest::Approx(-0.5 * sigma * sigma * std::cos(y) + (pi * pi + a) * y * std::sin(y)));
  CHECK(std::abs(square_identity_defect(sys, cs, x)) < 1e-10);
  CHECK_THROWS_AS(FiniteSystem::from_model(presets::cubic_default(g, 6)), PreconditionError);
  const FiniteSystem tr = FiniteSystem::from_model(presets::cubic_default(g, 6, 2.0));
  const Observable prod = mode_product(g, 1, 2);
  CHECK(std::abs(square_identity_defect(tr, prod, x)) < 1e-9);
}
