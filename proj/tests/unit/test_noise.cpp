#include <cmath>
#include <random>

#include "doctest.h"
#include "rdlab/noise.hpp"

using namespace rdlab;

TEST_CASE("SplitMix64 matches the reference sequence") {
  SplitMix64 g(0);
  CHECK(g() == 0xe220a8397b1dcdafULL);
  CHECK(g() == 0x6e789e6aa1b965f4ULL);
  CHECK(g() == 0x06c45d188009454fULL);
}

TEST_CASE("increments are a pure function of (seed, id, step)") {
  const NoiseStream a(42, 7, 5, 1e-3), b(42, 7, 5, 1e-3);
  for (std::size_t s : {0u, 1u, 999u, 12345u}) CHECK(a.increments(s) == b.increments(s));
  // order of consumption does not matter
  const auto late = a.increments(500);
  for (std::size_t s = 0; s < 500; ++s) (void)a.increments(s);
  CHECK(a.increments(500) == late);
  CHECK(NoiseStream(42, 8, 5, 1e-3).increments(0) != a.increments(0));
  CHECK(NoiseStream(43, 7, 5, 1e-3).increments(0) != a.increments(0));
}

TEST_CASE("increments have mean zero and variance dt per mode") {
  const double dt = 0.01;
  const NoiseStream s(1, 2, 4, dt);
  const std::size_t n = 40000;
  std::vector<double> sum(4, 0.0), sq(4, 0.0);
  double cross = 0.0;
  for (std::size_t k = 0; k < n; ++k) {
    const auto w = s.increments(k);
    for (std::size_t i = 0; i < 4; ++i) {
      sum[i] += w[i];
      sq[i] += w[i] * w[i];
    }
    cross += w[0] * w[1];
  }
  for (std::size_t i = 0; i < 4; ++i) {
    CHECK(std::abs(sum[i] / n) < 5.0 * std::sqrt(dt / n));
    CHECK(std::abs(sq[i] / n - dt) < 5.0 * dt * std::sqrt(2.0 / n));
  }
  CHECK(std::abs(cross / n) < 5.0 * dt / std::sqrt(double(n)));
}

TEST_CASE("refined stream bridges the coarse path") {
  const NoiseStream c(9, 3, 6, 0.02);
  const NoiseStream f = c.refine();
  CHECK(f.dt() == doctest::Approx(0.01));
  CHECK(f.level() == 1);
  const NoiseStream ff = f.refine();
  for (std::size_t s = 0; s < 50; ++s) {
    const auto wc = c.increments(s), w0 = f.increments(2 * s), w1 = f.increments(2 * s + 1);
    for (std::size_t i = 0; i < 6; ++i) CHECK(w0[i] + w1[i] == doctest::Approx(wc[i]).epsilon(1e-12));
    const auto a = ff.increments(4 * s), b = ff.increments(4 * s + 1);
    for (std::size_t i = 0; i < 6; ++i) CHECK(a[i] + b[i] == doctest::Approx(w0[i]).epsilon(1e-12));
  }
}

TEST_CASE("fine halves of a bridge have the right conditional spread") {
  // W_fine0 - W_coarse/2 has variance dt/4 and is independent of the coarse increment
  const double dt = 0.04;
  const NoiseStream c(5, 5, 1, dt);
  const NoiseStream f = c.refine();
  const std::size_t n = 20000;
  double sq = 0.0, cov = 0.0;
  for (std::size_t s = 0; s < n; ++s) {
    const double wc = c.increments(s)[0], d = f.increments(2 * s)[0] - 0.5 * wc;
    sq += d * d;
    cov += d * wc;
  }
  CHECK(std::abs(sq / n - dt / 4) < 5.0 * (dt / 4) * std::sqrt(2.0 / n));
  CHECK(std::abs(cov / n) < 5.0 * dt / 2 / std::sqrt(double(n)));
}

TEST_CASE("with_modes keeps the leading components") {
  const NoiseStream s(1, 1, 16, 1e-3);
  const NoiseStream r = s.with_modes(4);
  CHECK(r.modes() == 4);
  for (std::size_t k = 0; k < 20; ++k) {
    const auto a = s.increments(k), b = r.increments(k);
    for (std::size_t i = 0; i < 4; ++i) CHECK(a[i] == b[i]);
  }
}

TEST_CASE("derived streams and tagged normals are independent of the parent") {
  const NoiseStream s(1, 1, 3, 1e-3);
  const NoiseStream d = s.derive(17);
  CHECK(d.increments(0) != s.increments(0));
  CHECK(s.derive(17).increments(4) == d.increments(4));
  CHECK(s.derive(18).increments(4) != d.increments(4));
  const auto z = s.standard_normals(5, 10000);
  double m = 0.0, v = 0.0;
  for (double x : z) {
    m += x;
    v += x * x;
  }
  CHECK(std::abs(m / 1e4) < 0.05);
  CHECK(std::abs(v / 1e4 - 1.0) < 0.07);
  CHECK(s.standard_normals(5, 3) == s.standard_normals(5, 3));
  CHECK(s.standard_normals(6, 3) != s.standard_normals(5, 3));
}
