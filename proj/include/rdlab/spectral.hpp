#pragma once

#include <cstddef>
#include <memory>
#include <span>
#include <utility>
#include <vector>

namespace rdlab {

/// Uniform interior grid on (0,1): xi_j = j/(N+1), j = 1..N, zero Dirichlet data implied.
class Grid {
 public:
  explicit Grid(std::size_t n);

  std::size_t size() const noexcept { return n_; }
  double spacing() const noexcept { return h_; }
  /// Location of the sample with zero-based index j.
  double point(std::size_t j) const { return points_.at(j); }
  const std::vector<double>& points() const noexcept { return points_; }

 private:
  std::size_t n_;
  double h_;
  std::vector<double> points_;
};

using GridPtr = std::shared_ptr<const Grid>;

GridPtr make_grid(std::size_t n);

/// Grid samples of a continuous function on [0,1] vanishing at the endpoints.
class Field {
 public:
  Field() = default;
  explicit Field(GridPtr grid);
  Field(GridPtr grid, std::vector<double> values);

  const GridPtr& grid() const noexcept { return grid_; }
  std::size_t size() const noexcept { return values_.size(); }
  double& operator[](std::size_t j) { return values_[j]; }
  double operator[](std::size_t j) const { return values_[j]; }
  std::vector<double>& values() noexcept { return values_; }
  const std::vector<double>& values() const noexcept { return values_; }

  double sup_norm() const;
  double l2_norm() const;
  /// Discrete L1 norm h*sum|x_j|.
  double l1_norm() const;
  double inner(const Field& other) const;
  bool finite() const;

  Field& operator+=(const Field& other);
  Field& operator-=(const Field& other);
  Field& operator*=(double a);

 private:
  GridPtr grid_;
  std::vector<double> values_;
};

Field operator+(Field a, const Field& b);
Field operator-(Field a, const Field& b);
Field operator*(double a, Field x);

/// Throws std::invalid_argument if the two fields live on grids of different size.
void require_same_grid(const Field& a, const Field& b);

/// Coefficients against e_k = sqrt(2) sin(k pi xi), k = 1..K_max.
struct SpectralVector {
  std::vector<double> coeffs;
  std::size_t k_max() const noexcept { return coeffs.size(); }
};

/// Orthonormal DST-I on N points. Plans are cached per size and shared between threads.
class SineTransform {
 public:
  explicit SineTransform(std::size_t n);
  ~SineTransform();
  SineTransform(const SineTransform&) = delete;
  SineTransform& operator=(const SineTransform&) = delete;

  std::size_t size() const noexcept { return n_; }
  /// values -> coefficients c_k = h * sum_j x_j e_k(xi_j)
  void forward(std::span<const double> values, std::span<double> coeffs) const;
  /// coefficients -> values x_j = sum_k c_k e_k(xi_j)
  void inverse(std::span<const double> coeffs, std::span<double> values) const;

 private:
  std::size_t n_;
  void* plan_;
};

const SineTransform& sine_transform(std::size_t n);

SpectralVector to_spectral(const Field& x, std::size_t k_max);
SpectralVector to_spectral(const Field& x);
Field to_field(const GridPtr& grid, const SpectralVector& c);

/// Sampled e_k and its eigenvalue -k^2 pi^2.
std::pair<Field, double> eigenpair(const GridPtr& grid, std::size_t k);
double dirichlet_eigenvalue(std::size_t k);

/// e^{tA} x, applied mode by mode.
Field heat_semigroup(const Field& x, double t);
/// A_k x = kA(k-A)^{-1} x.
Field yosida_apply(const Field& x, double k);
double yosida_multiplier(std::size_t mode, double k);
Field project_modes(const Field& x, std::size_t m);

/// Local average over (xi - 1/n, xi + 1/n) of the odd extension of the piecewise-linear interpolant.
Field mollify(const Field& x, std::size_t n);

/// Element of E* restricted to grid fields: a signed point mass or an L1 density.
class DualFunctional {
 public:
  enum class Kind { point_mass, density };

  static DualFunctional point_mass(GridPtr grid, std::size_t index, double weight);
  static DualFunctional density(Field w);

  Kind kind() const noexcept { return kind_; }
  std::size_t index() const noexcept { return index_; }
  double weight() const noexcept { return weight_; }
  double location() const { return grid_->point(index_); }
  const GridPtr& grid() const noexcept { return grid_; }
  const Field& density_field() const noexcept { return density_; }

  double pair(const Field& y) const;
  double norm() const;
  /// Grid density w with h*sum w_j y_j equal to pair(y).
  Field as_density() const;

  DualFunctional& operator*=(double a);

 private:
  Kind kind_ = Kind::density;
  GridPtr grid_;
  std::size_t index_ = 0;
  double weight_ = 0.0;
  Field density_;
};

/// Point mass at argmax|x| (smallest index on ties) carrying sgn x there; midpoint default for x = 0.
DualFunctional subdifferential(const Field& x);

}  // namespace rdlab
