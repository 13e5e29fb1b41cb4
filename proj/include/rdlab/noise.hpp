#pragma once

#include <cstdint>
#include <span>
#include <vector>

namespace rdlab {

/// SplitMix64 finalizer; the building block of every substream key.
std::uint64_t mix64(std::uint64_t x) noexcept;
std::uint64_t hash_combine(std::uint64_t seed, std::uint64_t value) noexcept;

/// SplitMix64 engine, usable with <random> distributions.
class SplitMix64 {
 public:
  using result_type = std::uint64_t;
  explicit SplitMix64(std::uint64_t state) noexcept : state_(state) {}
  static constexpr result_type min() { return 0; }
  static constexpr result_type max() { return ~result_type{0}; }
  result_type operator()() noexcept;

 private:
  std::uint64_t state_;
};

/// Mode-wise Brownian increments for one trajectory. Every increment is a pure function of
/// (master_seed, trajectory_id, step), so consumption order and threading do not matter.
class NoiseStream {
 public:
  NoiseStream(std::uint64_t master_seed, std::uint64_t trajectory_id, std::size_t modes, double dt);

  std::uint64_t master_seed() const noexcept { return seed_; }
  std::uint64_t trajectory_id() const noexcept { return id_; }
  std::size_t modes() const noexcept { return modes_; }
  double dt() const noexcept { return dt_; }
  unsigned level() const noexcept { return level_; }

  void increments(std::size_t step, std::span<double> out) const;
  std::vector<double> increments(std::size_t step) const;

  /// Same Brownian path at half the step: fine increments sum pairwise to the coarse ones.
  NoiseStream refine() const;
  /// Independent stream keyed by this one and a tag (used for nested/branch trajectories).
  NoiseStream derive(std::uint64_t tag) const;
  /// Same path restricted to fewer modes (the first `modes` components are unchanged).
  NoiseStream with_modes(std::size_t modes) const;

  /// Draws n standard normals from the substream (seed, id, tag); independent of the increments.
  std::vector<double> standard_normals(std::uint64_t tag, std::size_t n) const;

 private:
  void level_increments(unsigned level, std::size_t step, std::span<double> out) const;
  std::uint64_t key(unsigned level, std::size_t counter) const noexcept;

  std::uint64_t seed_;
  std::uint64_t id_;
  std::size_t modes_;
  double dt_;       // step at the current level
  double dt_base_;  // step at level 0
  unsigned level_ = 0;
};

}  // namespace rdlab
