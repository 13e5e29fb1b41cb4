#pragma once

#include <cmath>
#include <numbers>
#include <vector>

#include "rdlab/spectral.hpp"

namespace rdlab::testing {

/// e_k sampled directly from its formula, independent of the transform code.
inline Field mode(const GridPtr& grid, std::size_t k, double amplitude = 1.0) {
  Field f(grid);
  for (std::size_t j = 0; j < grid->size(); ++j)
    f[j] = amplitude * std::sqrt(2.0) *
           std::sin(static_cast<double>(k) * std::numbers::pi * grid->point(j));
  return f;
}

inline double coefficient(const Field& x, std::size_t k) { return x.inner(mode(x.grid(), k)); }

inline double max_abs_diff(const Field& a, const Field& b) {
  double m = 0.0;
  for (std::size_t j = 0; j < a.size(); ++j) m = std::max(m, std::abs(a[j] - b[j]));
  return m;
}

}  // namespace rdlab::testing
