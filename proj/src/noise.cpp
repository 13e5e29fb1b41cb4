#include "rdlab/noise.hpp"

#include <cmath>
#include <random>
#include <stdexcept>

namespace rdlab {

std::uint64_t mix64(std::uint64_t x) noexcept {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

std::uint64_t hash_combine(std::uint64_t seed, std::uint64_t value) noexcept {
  return mix64(seed ^ mix64(value + 0x632be59bd9b4e019ULL));
}

SplitMix64::result_type SplitMix64::operator()() noexcept {
  state_ += 0x9e3779b97f4a7c15ULL;
  std::uint64_t z = state_;
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

NoiseStream::NoiseStream(std::uint64_t master_seed, std::uint64_t trajectory_id,
                         std::size_t modes, double dt)
    : seed_(master_seed), id_(trajectory_id), modes_(modes), dt_(dt), dt_base_(dt) {
  if (modes == 0) throw std::invalid_argument("NoiseStream: need at least one mode");
  if (!(dt > 0.0)) throw std::invalid_argument("NoiseStream: dt must be positive");
}

std::uint64_t NoiseStream::key(unsigned level, std::size_t counter) const noexcept {
  std::uint64_t k = hash_combine(seed_, id_);
  k = hash_combine(k, level);
  return hash_combine(k, counter);
}

void NoiseStream::level_increments(unsigned level, std::size_t step, std::span<double> out) const {
  const double dt_level = std::ldexp(dt_base_, -static_cast<int>(level));
  // normals are always drawn for the full mode set so that with_modes() keeps the path
  SplitMix64 eng(key(level, step >> (level ? 1 : 0)));
  std::normal_distribution<double> normal;
  if (level == 0) {
    const double s = std::sqrt(dt_level);
    for (double& v : out) v = s * normal(eng);
    return;
  }
  // Brownian bridge: halves of a coarse increment S are S/2 +- (sqrt(dt_coarse)/2) Z
  level_increments(level - 1, step >> 1, out);
  const double s = 0.5 * std::sqrt(2.0 * dt_level);
  const bool second = (step & 1U) != 0;
  for (double& v : out) {
    const double z = normal(eng);
    const double first = 0.5 * v + s * z;
    v = second ? v - first : first;
  }
}

void NoiseStream::increments(std::size_t step, std::span<double> out) const {
  if (out.size() != modes_) throw std::invalid_argument("NoiseStream: output size != modes");
  level_increments(level_, step, out);
}

std::vector<double> NoiseStream::increments(std::size_t step) const {
  std::vector<double> v(modes_);
  increments(step, v);
  return v;
}

NoiseStream NoiseStream::refine() const {
  NoiseStream r = *this;
  r.level_ = level_ + 1;
  r.dt_ = 0.5 * dt_;
  return r;
}

NoiseStream NoiseStream::derive(std::uint64_t tag) const {
  NoiseStream r = *this;
  r.id_ = hash_combine(hash_combine(id_, 0xb5ad4eceda1ce2a9ULL), tag);
  return r;
}

NoiseStream NoiseStream::with_modes(std::size_t modes) const {
  if (modes == 0) throw std::invalid_argument("NoiseStream: need at least one mode");
  NoiseStream r = *this;
  r.modes_ = modes;
  return r;
}

std::vector<double> NoiseStream::standard_normals(std::uint64_t tag, std::size_t n) const {
  SplitMix64 eng(hash_combine(key(0xffffffffU, 0), tag));
  std::normal_distribution<double> normal;
  std::vector<double> v(n);
  for (double& x : v) x = normal(eng);
  return v;
}

}  // namespace rdlab
