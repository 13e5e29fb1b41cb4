#pragma once

#include <functional>
#include <limits>
#include <optional>
#include <string>

#include "rdlab/spectral.hpp"

namespace rdlab {

/// Scalar profile chi with derivatives and known bounds (infinity when unbounded).
struct ScalarMap {
  std::string name;
  std::function<double(double)> f, df, d2f;
  double sup_abs = std::numeric_limits<double>::infinity();
  double sup_abs_d1 = std::numeric_limits<double>::infinity();
  bool differentiable = true;

  static ScalarMap identity();
  static ScalarMap tanh();
  static ScalarMap sin();
  static ScalarMap cos();
  static ScalarMap square();
  /// sgn(r) with sgn(0) = 0; bounded, not differentiable.
  static ScalarMap sign();
  static ScalarMap by_name(const std::string& name);
};

/// Functional on E, optionally carrying first and second derivatives.
class Observable {
 public:
  enum class Kind { cylindrical, evaluation, custom };
  using ValueFn = std::function<double(const Field&)>;
  using GradientFn = std::function<DualFunctional(const Field&)>;
  using HessianFn = std::function<double(const Field&, const Field&, const Field&)>;

  /// chi(<x, w>_H)
  static Observable cylindrical(ScalarMap chi, Field w);
  /// chi(x(xi_index))
  static Observable evaluation(ScalarMap chi, GridPtr grid, std::size_t index);
  static Observable custom(std::string name, ValueFn value, GradientFn gradient = {},
                           HessianFn hessian = {},
                           double sup_abs = std::numeric_limits<double>::infinity(),
                           double sup_gradient = std::numeric_limits<double>::infinity());
  static Observable constant(double c);

  Kind kind() const noexcept { return kind_; }
  const std::string& name() const noexcept { return name_; }

  double operator()(const Field& x) const { return value_(x); }
  bool has_gradient() const noexcept { return static_cast<bool>(gradient_); }
  bool has_hessian() const noexcept { return static_cast<bool>(hessian_); }
  DualFunctional gradient(const Field& x) const;
  /// D^2 phi(x)(y, z)
  double hessian(const Field& x, const Field& y, const Field& z) const;
  double sup_abs() const noexcept { return sup_abs_; }
  double sup_gradient() const noexcept { return sup_gradient_; }

  /// phi^2 with D(phi^2) = 2 phi Dphi and D^2(phi^2)(y,z) = 2 phi D^2phi(y,z) + 2 Dphi(y) Dphi(z).
  Observable squared() const;
  Observable shifted(double c) const;
  Observable scaled(double a) const;

  /// Cylindrical profile data (empty for other kinds).
  const std::optional<Field>& direction() const noexcept { return w_; }

 private:
  Kind kind_ = Kind::custom;
  std::string name_;
  ValueFn value_;
  GradientFn gradient_;
  HessianFn hessian_;
  double sup_abs_ = std::numeric_limits<double>::infinity();
  double sup_gradient_ = std::numeric_limits<double>::infinity();
  std::optional<Field> w_;
};

/// <x, e_a>_H <x, e_b>_H with closed-form derivatives.
Observable mode_product(const GridPtr& grid, std::size_t a, std::size_t b);

}  // namespace rdlab
