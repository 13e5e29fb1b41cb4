#include "rdlab/spectral.hpp"

#include <fftw3.h>

#include <algorithm>
#include <cmath>
#include <map>
#include <mutex>
#include <numbers>
#include <stdexcept>
#include <string>

#include "rdlab/errors.hpp"

namespace rdlab {

namespace {
constexpr double pi = std::numbers::pi;
std::mutex fftw_planner_mutex;
}  // namespace

Grid::Grid(std::size_t n) : n_(n), h_(0.0) {
  if (n < 2) throw std::invalid_argument("Grid: need at least 2 interior points");
  h_ = 1.0 / static_cast<double>(n + 1);
  points_.resize(n);
  for (std::size_t j = 0; j < n; ++j) points_[j] = static_cast<double>(j + 1) * h_;
}

GridPtr make_grid(std::size_t n) { return std::make_shared<const Grid>(n); }

Field::Field(GridPtr grid) : grid_(std::move(grid)) {
  if (!grid_) throw std::invalid_argument("Field: null grid");
  values_.assign(grid_->size(), 0.0);
}

Field::Field(GridPtr grid, std::vector<double> values)
    : grid_(std::move(grid)), values_(std::move(values)) {
  if (!grid_) throw std::invalid_argument("Field: null grid");
  if (values_.size() != grid_->size())
    throw std::invalid_argument("Field: value count does not match grid");
}

double Field::sup_norm() const {
  double m = 0.0;
  for (double v : values_) m = std::max(m, std::abs(v));
  return m;
}

double Field::l2_norm() const { return std::sqrt(inner(*this)); }

double Field::l1_norm() const {
  double s = 0.0;
  for (double v : values_) s += std::abs(v);
  return s * grid_->spacing();
}

double Field::inner(const Field& other) const {
  require_same_grid(*this, other);
  double s = 0.0;
  for (std::size_t j = 0; j < values_.size(); ++j) s += values_[j] * other.values_[j];
  return s * grid_->spacing();
}

bool Field::finite() const {
  return std::all_of(values_.begin(), values_.end(), [](double v) { return std::isfinite(v); });
}

Field& Field::operator+=(const Field& other) {
  require_same_grid(*this, other);
  for (std::size_t j = 0; j < values_.size(); ++j) values_[j] += other.values_[j];
  return *this;
}

Field& Field::operator-=(const Field& other) {
  require_same_grid(*this, other);
  for (std::size_t j = 0; j < values_.size(); ++j) values_[j] -= other.values_[j];
  return *this;
}

Field& Field::operator*=(double a) {
  for (double& v : values_) v *= a;
  return *this;
}

Field operator+(Field a, const Field& b) { return a += b; }
Field operator-(Field a, const Field& b) { return a -= b; }
Field operator*(double a, Field x) { return x *= a; }

void require_same_grid(const Field& a, const Field& b) {
  if (!a.grid() || !b.grid() || a.size() != b.size())
    throw std::invalid_argument("fields live on different grids");
}

SineTransform::SineTransform(std::size_t n) : n_(n), plan_(nullptr) {
  std::lock_guard lock(fftw_planner_mutex);
  std::vector<double> in(n), out(n);
  plan_ = fftw_plan_r2r_1d(static_cast<int>(n), in.data(), out.data(), FFTW_RODFT00,
                           FFTW_ESTIMATE | FFTW_UNALIGNED);
  if (!plan_) throw std::runtime_error("SineTransform: FFTW planning failed");
}

SineTransform::~SineTransform() {
  std::lock_guard lock(fftw_planner_mutex);
  fftw_destroy_plan(static_cast<fftw_plan>(plan_));
}

// RODFT00: Y_k = 2 sum_j X_j sin(pi (j+1)(k+1)/(N+1)).
void SineTransform::forward(std::span<const double> values, std::span<double> coeffs) const {
  if (values.size() != n_ || coeffs.size() != n_)
    throw std::invalid_argument("SineTransform::forward: size mismatch");
  fftw_execute_r2r(static_cast<fftw_plan>(plan_), const_cast<double*>(values.data()),
                   coeffs.data());
  const double scale = 1.0 / (std::numbers::sqrt2 * static_cast<double>(n_ + 1));
  for (double& c : coeffs) c *= scale;
}

void SineTransform::inverse(std::span<const double> coeffs, std::span<double> values) const {
  if (values.size() != n_ || coeffs.size() != n_)
    throw std::invalid_argument("SineTransform::inverse: size mismatch");
  fftw_execute_r2r(static_cast<fftw_plan>(plan_), const_cast<double*>(coeffs.data()),
                   values.data());
  const double scale = 1.0 / std::numbers::sqrt2;
  for (double& v : values) v *= scale;
}

const SineTransform& sine_transform(std::size_t n) {
  static std::mutex cache_mutex;
  static std::map<std::size_t, std::unique_ptr<SineTransform>> cache;
  std::lock_guard lock(cache_mutex);
  auto& slot = cache[n];
  if (!slot) slot = std::make_unique<SineTransform>(n);
  return *slot;
}

SpectralVector to_spectral(const Field& x, std::size_t k_max) {
  const std::size_t n = x.size();
  if (k_max < 1 || k_max > n) throw ModeIndexError("to_spectral: K_max out of range");
  std::vector<double> c(n);
  sine_transform(n).forward(x.values(), c);
  c.resize(k_max);
  return SpectralVector{std::move(c)};
}

SpectralVector to_spectral(const Field& x) { return to_spectral(x, x.size()); }

Field to_field(const GridPtr& grid, const SpectralVector& c) {
  const std::size_t n = grid->size();
  if (c.k_max() > n) throw ModeIndexError("to_field: more coefficients than grid modes");
  std::vector<double> full(n, 0.0), out(n);
  std::copy(c.coeffs.begin(), c.coeffs.end(), full.begin());
  sine_transform(n).inverse(full, out);
  return Field(grid, std::move(out));
}

double dirichlet_eigenvalue(std::size_t k) {
  const double kk = static_cast<double>(k);
  return -kk * kk * pi * pi;
}

std::pair<Field, double> eigenpair(const GridPtr& grid, std::size_t k) {
  if (k < 1 || k > grid->size())
    throw ModeIndexError("eigenpair: mode " + std::to_string(k) + " outside 1.." +
                         std::to_string(grid->size()));
  Field e(grid);
  for (std::size_t j = 0; j < grid->size(); ++j)
    e[j] = std::numbers::sqrt2 * std::sin(static_cast<double>(k) * pi * grid->point(j));
  return {std::move(e), dirichlet_eigenvalue(k)};
}

namespace {

template <class Multiplier>
Field apply_diagonal(const Field& x, Multiplier mult) {
  const std::size_t n = x.size();
  const auto& tr = sine_transform(n);
  std::vector<double> c(n), out(n);
  tr.forward(x.values(), c);
  for (std::size_t k = 0; k < n; ++k) c[k] *= mult(k + 1);
  tr.inverse(c, out);
  return Field(x.grid(), std::move(out));
}

}  // namespace

Field heat_semigroup(const Field& x, double t) {
  if (!(t >= 0.0)) throw DomainError("heat_semigroup: negative time");
  return apply_diagonal(x, [t](std::size_t k) { return std::exp(dirichlet_eigenvalue(k) * t); });
}

double yosida_multiplier(std::size_t mode, double k) {
  if (!(k > 0.0)) throw DomainError("yosida: k must be positive");
  const double lam = -dirichlet_eigenvalue(mode);
  if (std::isinf(k)) return -lam;
  return -k * lam / (k + lam);
}

Field yosida_apply(const Field& x, double k) {
  if (!(k > 0.0)) throw DomainError("yosida_apply: k must be positive");
  return apply_diagonal(x, [k](std::size_t j) { return yosida_multiplier(j, k); });
}

Field project_modes(const Field& x, std::size_t m) {
  if (m < 1 || m > x.size()) throw ModeIndexError("project_modes: M out of range");
  return apply_diagonal(x, [m](std::size_t k) { return k <= m ? 1.0 : 0.0; });
}

Field mollify(const Field& x, std::size_t n) {
  if (n < 1) throw DomainError("mollify: n must be >= 1");
  const GridPtr& grid = x.grid();
  const std::size_t N = grid->size();
  const std::size_t P = N + 1;  // intervals on [0,1]
  const double h = grid->spacing();
  // nodal values of the odd extension on [-1,2], index i <-> eta = (i - P) h
  const std::size_t total = 3 * P + 1;
  std::vector<double> node(total, 0.0);
  auto base = [&](long m) -> double {  // value at eta = m h for m in [0, P]
    if (m <= 0 || m >= static_cast<long>(P)) return 0.0;
    return x[static_cast<std::size_t>(m - 1)];
  };
  for (std::size_t i = 0; i < total; ++i) {
    const long m = static_cast<long>(i) - static_cast<long>(P);
    if (m < 0)
      node[i] = -base(-m);
    else if (m <= static_cast<long>(P))
      node[i] = base(m);
    else
      node[i] = -base(2 * static_cast<long>(P) - m);
  }
  // cumulative integral at nodes
  std::vector<double> cum(total, 0.0);
  for (std::size_t i = 1; i < total; ++i) cum[i] = cum[i - 1] + 0.5 * h * (node[i - 1] + node[i]);
  auto antiderivative = [&](double eta) {
    double s = (eta + 1.0) / h;
    s = std::clamp(s, 0.0, static_cast<double>(total - 1));
    std::size_t i = std::min(static_cast<std::size_t>(s), total - 2);
    const double r = (s - static_cast<double>(i)) * h;
    const double slope = (node[i + 1] - node[i]) / h;
    return cum[i] + node[i] * r + 0.5 * slope * r * r;
  };
  const double half = 1.0 / static_cast<double>(n);
  Field out(grid);
  for (std::size_t j = 0; j < N; ++j) {
    const double xi = grid->point(j);
    out[j] = 0.5 * static_cast<double>(n) * (antiderivative(xi + half) - antiderivative(xi - half));
  }
  return out;
}

DualFunctional DualFunctional::point_mass(GridPtr grid, std::size_t index, double weight) {
  if (!grid || index >= grid->size()) throw std::invalid_argument("point_mass: bad index");
  DualFunctional d;
  d.kind_ = Kind::point_mass;
  d.grid_ = std::move(grid);
  d.index_ = index;
  d.weight_ = weight;
  return d;
}

DualFunctional DualFunctional::density(Field w) {
  DualFunctional d;
  d.kind_ = Kind::density;
  d.grid_ = w.grid();
  d.density_ = std::move(w);
  return d;
}

double DualFunctional::pair(const Field& y) const {
  if (kind_ == Kind::point_mass) {
    if (y.size() != grid_->size()) throw std::invalid_argument("pair: grid mismatch");
    return weight_ * y[index_];
  }
  return density_.inner(y);
}

double DualFunctional::norm() const {
  return kind_ == Kind::point_mass ? std::abs(weight_) : density_.l1_norm();
}

Field DualFunctional::as_density() const {
  if (kind_ == Kind::density) return density_;
  Field w(grid_);
  w[index_] = weight_ / grid_->spacing();
  return w;
}

DualFunctional& DualFunctional::operator*=(double a) {
  weight_ *= a;
  if (kind_ == Kind::density) density_ *= a;
  return *this;
}

DualFunctional subdifferential(const Field& x) {
  const GridPtr& grid = x.grid();
  double best = 0.0;
  std::size_t idx = 0;
  for (std::size_t j = 0; j < x.size(); ++j) {
    if (std::abs(x[j]) > best) {
      best = std::abs(x[j]);
      idx = j;
    }
  }
  if (best == 0.0) {
    // grid point nearest 1/2, smaller index on a tie
    std::size_t mid = 0;
    double dist = 2.0;
    for (std::size_t j = 0; j < x.size(); ++j) {
      const double d = std::abs(grid->point(j) - 0.5);
      if (d < dist - 1e-15) {
        dist = d;
        mid = j;
      }
    }
    return DualFunctional::point_mass(grid, mid, 1.0);
  }
  return DualFunctional::point_mass(grid, idx, x[idx] > 0 ? 1.0 : -1.0);
}

}  // namespace rdlab
