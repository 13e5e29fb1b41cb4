#include <cmath>
#include <numbers>

#include "doctest.h"
#include "rdlab/errors.hpp"
#include "rdlab/flows.hpp"
#include "support.hpp"

using namespace rdlab;
using rdlab::testing::coefficient;
using rdlab::testing::max_abs_diff;
using rdlab::testing::mode;
constexpr double pi = std::numbers::pi;

namespace {

Field run(const Stepper& st, const Field& x, const NoiseStream& s, std::size_t n) {
  Integrator it(st, x, s);
  it.advance(n);
  return it.u();
}

}  // namespace

TEST_CASE("step snapping") {
  CHECK(snap_to_step(0.1, 1e-3) == 100);
  CHECK(snap_to_step(0.0, 1e-3) == 0);
  CHECK(snap_to_step(0.10004, 1e-3) == 100);
}

TEST_CASE("linear model: difference of coupled paths follows the exact per-mode recursion") {
  const auto g = make_grid(16);
  const double a = 0.7, dt = 2e-3;
  const ModelSpec m = presets::ou_linear(g, 16, a, 1.0);
  const Stepper st(m, dt);
  const NoiseStream s(3, 0, 16, dt);
  const Field x = mode(g, 1, 1.0) + mode(g, 3, 0.5);
  const std::size_t n = 137;
  const Field d = run(st, x, s, n) - run(st, Field(g), s, n);
  for (std::size_t k : {1u, 3u}) {
    const double mult = std::exp(-double(k * k) * pi * pi * dt) * (1.0 - a * dt);
    const double c0 = k == 1 ? 1.0 : 0.5;
    CHECK(coefficient(d, k) == doctest::Approx(c0 * std::pow(mult, double(n))).epsilon(1e-10));
  }
  CHECK(std::abs(coefficient(d, 2)) < 1e-12);
}

TEST_CASE("heat preset is the exact deterministic heat flow") {
  const auto g = make_grid(8);
  const Field x = mode(g, 1) + mode(g, 2, -0.5);
  const Field u = run(Stepper(presets::heat(g, 8), 1e-2), x, NoiseStream(1, 1, 8, 1e-2), 7);
  CHECK(max_abs_diff(u, heat_semigroup(x, 0.07)) < 1e-12);
}

TEST_CASE("additive noise with zero data is the discrete stochastic convolution") {
  const auto g = make_grid(8);
  const double dt = 1e-2;
  const ModelSpec m = presets::ou_linear(g, 4, 0.0, 1.0);
  const Stepper st(m, dt);
  const NoiseStream s(11, 2, 4, dt);
  const Field u = run(st, Field(g), s, 5);
  // mode k: sum_j e^{-k^2 pi^2 dt (5 - j)} dW_j^k
  for (std::size_t k = 1; k <= 8; ++k) {
    double c = 0.0;
    if (k <= 4)
      for (std::size_t j = 0; j < 5; ++j)
        c += std::exp(-double(k * k) * pi * pi * dt * double(5 - j)) * s.increments(j)[k - 1];
    CHECK(coefficient(u, k) == doctest::Approx(c).epsilon(1e-10).scale(1.0));
  }
}

TEST_CASE("tangent flow matches central differences of the solution map") {
  const auto g = make_grid(16);
  const double dt = 1e-3;
  const ModelSpec m = presets::cubic_default(g, 16);
  const Stepper st(m, dt);
  const NoiseStream s(5, 1, 16, dt);
  const Field x = mode(g, 1, 1.0), h = mode(g, 2, 1.0) + mode(g, 1, 0.3);
  Integrator it(st, x, s);
  it.add_tangent(h);
  it.advance(200);
  double prev = infinity;
  for (double e : {1e-2, 5e-3, 2.5e-3}) {
    const Field fd = (1.0 / (2 * e)) * (run(st, x + e * h, s, 200) - run(st, x - e * h, s, 200));
    const double err = max_abs_diff(fd, it.eta(0));
    CHECK(err < prev);
    prev = err;
  }
  CHECK(prev < 1e-4);
}

TEST_CASE("second-order flow matches differences of tangents") {
  const auto g = make_grid(12);
  const double dt = 1e-3;
  const ModelSpec m = presets::cubic_default(g, 12);
  const Stepper st(m, dt);
  const NoiseStream s(5, 4, 12, dt);
  const Field x = mode(g, 1, 0.8), h = mode(g, 1), k = mode(g, 2);
  Integrator it(st, x, s);
  const auto a = it.add_tangent(h);
  const auto b = it.add_tangent(k);
  const auto p = it.add_second(a, b);
  it.advance(150);
  const double e = 1e-4;
  auto eta_at = [&](const Field& y) {
    Integrator j(st, y, s);
    j.add_tangent(h);
    j.advance(150);
    return j.eta(0);
  };
  const Field fd = (1.0 / (2 * e)) * (eta_at(x + e * k) - eta_at(x - e * k));
  CHECK(max_abs_diff(fd, it.zeta(p)) < 1e-6 * (1.0 + it.zeta(p).sup_norm()));
}

TEST_CASE("adjoint sweep is the transpose of the tangent flow") {
  const auto g = make_grid(10);
  const double dt = 1e-3;
  const ModelSpec m = presets::cubic_default(g, 10);
  const Stepper st(m, dt);
  const NoiseStream s(8, 8, 10, dt);
  const Field x = mode(g, 1, 1.2), h = mode(g, 3) + mode(g, 1, -0.4);
  const Field r = mode(g, 2) + mode(g, 1, 0.7);
  Integrator it(st, x, s);
  it.enable_tape();
  it.add_tangent(h);
  std::vector<Field> eta{it.eta(0)};
  for (int k = 0; k < 60; ++k) {
    it.step();
    eta.push_back(it.eta(0));
  }
  // forcing r at steps 20 and 60
  const Field adj = adjoint_sweep(st, it.tape(), 60, [&](std::size_t k, std::span<double> acc) {
    if (k == 20 || k == 60)
      for (std::size_t j = 0; j < acc.size(); ++j) acc[j] += r[j];
  });
  CHECK(adj.inner(h) == doctest::Approx(r.inner(eta[20]) + r.inner(eta[60])).epsilon(1e-10));
}

TEST_CASE("evolve records snapshots deterministically") {
  const auto g = make_grid(8);
  const ModelSpec m = presets::cubic_default(g, 8);
  SchemeConfig sc;
  sc.dt = 1e-3;
  sc.horizon = 0.05;
  sc.snapshot_times = {0.0, 0.02, 0.05};
  const NoiseStream s(1, 1, 8, sc.dt);
  const PathBundle a = evolve_tangent(m, mode(g, 1), sc, s, mode(g, 1), true);
  const PathBundle b = evolve_tangent(m, mode(g, 1), sc, s, mode(g, 1), true);
  REQUIRE(a.times.size() == 3);
  CHECK(a.times[1] == doctest::Approx(0.02));
  CHECK(max_abs_diff(a.u[0], mode(g, 1)) == 0.0);
  CHECK(max_abs_diff(a.eta[0][0], mode(g, 1)) == 0.0);
  CHECK(a.bel[0][0] == 0.0);
  for (std::size_t i = 0; i < 3; ++i) {
    CHECK(a.u[i].values() == b.u[i].values());
    CHECK(a.bel[0][i] == b.bel[0][i]);
  }
  CHECK(a.u_sup >= a.u[2].sup_norm());
}

TEST_CASE("Bismut-Elworthy-Li integral has mean zero and the right second moment for constant noise") {
  // for g = sigma and h = e_1: I_t = sum_j <eta_j, dW_j>/sigma, E I^2 = sum_j dt |P_M eta_j|^2/sigma^2
  const auto g = make_grid(8);
  const double dt = 2e-3, sigma = 1.5;
  const ModelSpec m = presets::ou_linear(g, 8, 0.0, sigma);
  SchemeConfig sc;
  sc.dt = dt;
  sc.horizon = 0.1;
  const std::size_t n = 4000, steps = 50;
  double s1 = 0.0, s2 = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    const PathBundle pb = evolve_tangent(m, Field(g), sc, NoiseStream(2, i, 8, dt), mode(g, 1), true);
    s1 += pb.bel[0].back();
    s2 += pb.bel[0].back() * pb.bel[0].back();
  }
  double expect = 0.0;
  for (std::size_t j = 0; j < steps; ++j)
    expect += dt * std::exp(-2 * pi * pi * dt * double(j)) / (sigma * sigma);
  const double mean = s1 / n, var = s2 / n;
  CHECK(std::abs(mean) < 5 * std::sqrt(expect / n));
  CHECK(var == doctest::Approx(expect).epsilon(5 * std::sqrt(2.0 / n)));
}

TEST_CASE("blow-up beyond the ceiling raises") {
  const auto g = make_grid(8);
  const ModelSpec m = presets::heat(g, 8);
  const Stepper st(m, 1e-3, 5.0);
  CHECK_THROWS_AS(run(st, mode(g, 1, 10.0), NoiseStream(1, 1, 8, 1e-3), 5), BlowUpError);
}

TEST_CASE("mollified starting points give Cauchy paths") {
  const auto g = make_grid(63);
  const ModelSpec m = presets::cubic_default(g, 16);
  SchemeConfig sc;
  sc.dt = 1e-3;
  sc.horizon = 0.05;
  Field x(g);
  for (std::size_t j = 0; j < g->size(); ++j) x[j] = g->point(j) < 0.5 ? 1.0 : -1.0;
  const NoiseStream s(4, 4, 16, sc.dt);
  const double d4 = mollifier_pair_distance(m, x, 4, sc, s);
  const double d16 = mollifier_pair_distance(m, x, 16, sc, s);
  CHECK(d16 < d4);
}
