#include "rdlab/observable.hpp"

#include <cmath>
#include <limits>
#include <stdexcept>
#include <utility>

#include "rdlab/errors.hpp"

namespace rdlab {

namespace {
constexpr double inf = std::numeric_limits<double>::infinity();
}

ScalarMap ScalarMap::identity() {
  return {"id", [](double r) { return r; }, [](double) { return 1.0; },
          [](double) { return 0.0; }, inf, 1.0, true};
}

ScalarMap ScalarMap::tanh() {
  return {"tanh", [](double r) { return std::tanh(r); },
          [](double r) {
            const double c = 1.0 / std::cosh(r);
            return c * c;
          },
          [](double r) {
            const double c = 1.0 / std::cosh(r);
            return -2.0 * std::tanh(r) * c * c;
          },
          1.0, 1.0, true};
}

ScalarMap ScalarMap::sin() {
  return {"sin", [](double r) { return std::sin(r); }, [](double r) { return std::cos(r); },
          [](double r) { return -std::sin(r); }, 1.0, 1.0, true};
}

ScalarMap ScalarMap::cos() {
  return {"cos", [](double r) { return std::cos(r); }, [](double r) { return -std::sin(r); },
          [](double r) { return -std::cos(r); }, 1.0, 1.0, true};
}

ScalarMap ScalarMap::square() {
  return {"square", [](double r) { return r * r; }, [](double r) { return 2.0 * r; },
          [](double) { return 2.0; }, inf, inf, true};
}

ScalarMap ScalarMap::sign() {
  return {"sign", [](double r) { return r > 0 ? 1.0 : (r < 0 ? -1.0 : 0.0); }, {}, {}, 1.0, inf,
          false};
}

ScalarMap ScalarMap::by_name(const std::string& name) {
  if (name == "id" || name == "identity") return identity();
  if (name == "tanh") return tanh();
  if (name == "sin") return sin();
  if (name == "cos") return cos();
  if (name == "square") return square();
  if (name == "sign") return sign();
  throw std::invalid_argument("unknown scalar profile '" + name + "'");
}

Observable Observable::cylindrical(ScalarMap chi, Field w) {
  Observable o;
  o.kind_ = Kind::cylindrical;
  o.name_ = chi.name + "(<x,w>)";
  o.value_ = [chi, w](const Field& x) { return chi.f(x.inner(w)); };
  if (chi.differentiable) {
    o.gradient_ = [chi, w](const Field& x) {
      Field d = w;
      d *= chi.df(x.inner(w));
      return DualFunctional::density(std::move(d));
    };
    o.hessian_ = [chi, w](const Field& x, const Field& y, const Field& z) {
      return chi.d2f(x.inner(w)) * y.inner(w) * z.inner(w);
    };
  }
  o.sup_abs_ = chi.sup_abs;
  o.sup_gradient_ = chi.sup_abs_d1 * w.l1_norm();
  o.w_ = std::move(w);
  return o;
}

Observable Observable::evaluation(ScalarMap chi, GridPtr grid, std::size_t index) {
  if (index >= grid->size()) throw std::invalid_argument("evaluation: index outside grid");
  Observable o;
  o.kind_ = Kind::evaluation;
  o.name_ = chi.name + "(x(xi0))";
  o.value_ = [chi, index](const Field& x) { return chi.f(x[index]); };
  if (chi.differentiable) {
    o.gradient_ = [chi, grid, index](const Field& x) {
      return DualFunctional::point_mass(grid, index, chi.df(x[index]));
    };
    o.hessian_ = [chi, index](const Field& x, const Field& y, const Field& z) {
      return chi.d2f(x[index]) * y[index] * z[index];
    };
  }
  o.sup_abs_ = chi.sup_abs;
  o.sup_gradient_ = chi.sup_abs_d1;
  return o;
}

Observable Observable::custom(std::string name, ValueFn value, GradientFn gradient,
                              HessianFn hessian, double sup_abs, double sup_gradient) {
  if (!value) throw std::invalid_argument("custom observable needs an evaluator");
  Observable o;
  o.kind_ = Kind::custom;
  o.name_ = std::move(name);
  o.value_ = std::move(value);
  o.gradient_ = std::move(gradient);
  o.hessian_ = std::move(hessian);
  o.sup_abs_ = sup_abs;
  o.sup_gradient_ = sup_gradient;
  return o;
}

Observable Observable::constant(double c) {
  return custom(
      "const", [c](const Field&) { return c; },
      [](const Field& x) { return DualFunctional::density(Field(x.grid())); },
      [](const Field&, const Field&, const Field&) { return 0.0; }, std::abs(c), 0.0);
}

DualFunctional Observable::gradient(const Field& x) const {
  if (!gradient_) throw PreconditionError("observable '" + name_ + "' has no gradient metadata");
  return gradient_(x);
}

double Observable::hessian(const Field& x, const Field& y, const Field& z) const {
  if (!hessian_) throw PreconditionError("observable '" + name_ + "' has no second derivative");
  return hessian_(x, y, z);
}

Observable Observable::squared() const {
  Observable base = *this;
  GradientFn grad;
  HessianFn hess;
  if (base.has_gradient()) {
    grad = [base](const Field& x) {
      DualFunctional d = base.gradient(x);
      d *= 2.0 * base(x);
      return d;
    };
  }
  if (base.has_gradient() && base.has_hessian()) {
    hess = [base](const Field& x, const Field& y, const Field& z) {
      const DualFunctional d = base.gradient(x);
      return 2.0 * base(x) * base.hessian(x, y, z) + 2.0 * d.pair(y) * d.pair(z);
    };
  }
  const double sup = base.sup_abs_ * base.sup_abs_;
  const double sup_d = 2.0 * base.sup_abs_ * base.sup_gradient_;
  return custom("(" + name_ + ")^2", [base](const Field& x) { const double v = base(x); return v * v; },
                grad, hess, sup, sup_d);
}

Observable Observable::shifted(double c) const {
  Observable o = *this;
  auto v = value_;
  o.value_ = [v, c](const Field& x) { return v(x) + c; };
  o.name_ = name_ + "+c";
  o.sup_abs_ = sup_abs_ + std::abs(c);
  return o;
}

Observable Observable::scaled(double a) const {
  Observable base = *this;
  GradientFn grad;
  HessianFn hess;
  if (base.has_gradient())
    grad = [base, a](const Field& x) {
      DualFunctional d = base.gradient(x);
      d *= a;
      return d;
    };
  if (base.has_hessian())
    hess = [base, a](const Field& x, const Field& y, const Field& z) {
      return a * base.hessian(x, y, z);
    };
  return custom(name_, [base, a](const Field& x) { return a * base(x); }, grad, hess,
                std::abs(a) * sup_abs_, std::abs(a) * sup_gradient_);
}

Observable mode_product(const GridPtr& grid, std::size_t a, std::size_t b) {
  Field ea = eigenpair(grid, a).first;
  Field eb = eigenpair(grid, b).first;
  auto value = [ea, eb](const Field& x) { return x.inner(ea) * x.inner(eb); };
  auto grad = [ea, eb](const Field& x) {
    Field d = x.inner(eb) * ea;
    d += x.inner(ea) * eb;
    return DualFunctional::density(std::move(d));
  };
  auto hess = [ea, eb](const Field&, const Field& y, const Field& z) {
    return y.inner(ea) * z.inner(eb) + y.inner(eb) * z.inner(ea);
  };
  return Observable::custom("mode" + std::to_string(a) + "*mode" + std::to_string(b), value, grad,
                            hess);
}

}  // namespace rdlab
