#include "rdlab/coefficients.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <sstream>
#include <stdexcept>

#include "rdlab/errors.hpp"

namespace rdlab {

namespace {

constexpr double pi2 = std::numbers::pi * std::numbers::pi;

// p(s) on s in [0,1]: p(0)=1, p'(0)=1, p''(0)=0, p(1)=2, p'(1)=p''(1)=0
double blend(double s) { return 1.0 + s + s * s * s * (4.0 + s * (-7.0 + 3.0 * s)); }
double blend_d1(double s) { return 1.0 + s * s * (12.0 + s * (-28.0 + 15.0 * s)); }
double blend_d2(double s) { return s * (24.0 + s * (-84.0 + 60.0 * s)); }

std::vector<double> rho_samples(const SamplingBox& box) {
  const std::size_t n = std::max<std::size_t>(box.rho_samples, 3);
  std::vector<double> r(n);
  for (std::size_t i = 0; i < n; ++i)
    r[i] = -box.rho_max + 2.0 * box.rho_max * static_cast<double>(i) / static_cast<double>(n - 1);
  return r;
}

std::vector<double> xi_samples(const SamplingBox& box) {
  const std::size_t n = std::max<std::size_t>(box.xi_samples, 1);
  std::vector<double> x(n);
  for (std::size_t i = 0; i < n; ++i) x[i] = (static_cast<double>(i) + 0.5) / static_cast<double>(n);
  return x;
}

struct Extremum {
  double value;
  double rho;
  double xi;
};

// Growth of |c(xi,rho)| relative to 1+|rho|^e: fitted constant on the inner half of the box and
// a check that the outer shell does not outgrow it.
HypothesisItem growth_item(const std::string& id, const Coefficient& c, double e,
                           const SamplingBox& box) {
  const auto rhos = rho_samples(box);
  const auto xis = xi_samples(box);
  Extremum inner{0.0, 0.0, 0.0}, outer{0.0, 0.0, 0.0};
  bool finite = true;
  for (double xi : xis)
    for (double rho : rhos) {
      const double v = c(xi, rho);
      if (!std::isfinite(v)) finite = false;
      const double ratio = std::abs(v) / (1.0 + std::pow(std::abs(rho), e));
      Extremum& slot = std::abs(rho) <= 0.5 * box.rho_max ? inner : outer;
      if (ratio > slot.value) slot = {ratio, rho, xi};
    }
  HypothesisItem item;
  item.id = id;
  item.measured = std::max(inner.value, outer.value);
  item.declared = e;
  item.pass = finite && outer.value <= 1.5 * inner.value + box.tolerance;
  item.witness_rho = outer.rho;
  item.witness_xi = outer.xi;
  std::ostringstream msg;
  msg << "fitted c=" << item.measured << " for exponent " << e;
  if (!item.pass) msg << "; growth faster than declared near rho=" << outer.rho;
  item.message = msg.str();
  return item;
}

}  // namespace

double gamma_cutoff(double r) {
  const double a = std::abs(r);
  if (a <= 1.0) return r;
  const double v = a >= 2.0 ? 2.0 : blend(a - 1.0);
  return r < 0 ? -v : v;
}

double gamma_cutoff_d1(double r) {
  const double a = std::abs(r);
  if (a <= 1.0) return 1.0;
  if (a >= 2.0) return 0.0;
  return blend_d1(a - 1.0);
}

double gamma_cutoff_d2(double r) {
  const double a = std::abs(r);
  if (a <= 1.0 || a >= 2.0) return 0.0;
  const double v = blend_d2(a - 1.0);
  return r < 0 ? -v : v;
}

ReactionSpec truncate_reaction(const ReactionSpec& f, double n, const SamplingBox& box) {
  if (!(n >= 1.0)) throw DomainError("truncate_reaction: level must be >= 1");
  if (std::isinf(n)) return f;
  ReactionSpec out = f;
  out.name = f.name + "|n=" + std::to_string(n);
  auto fv = f.f, d1 = f.df, d2 = f.d2f;
  // the identity region is handled by a branch so that f_n == f bit for bit there
  out.f = [fv, n](double xi, double rho) {
    if (std::abs(rho) <= n) return fv(xi, rho);
    return fv(xi, n * gamma_cutoff(rho / n));
  };
  out.df = [d1, n](double xi, double rho) {
    if (std::abs(rho) <= n) return d1(xi, rho);
    const double s = rho / n;
    return d1(xi, n * gamma_cutoff(s)) * gamma_cutoff_d1(s);
  };
  out.d2f = [d1, d2, n](double xi, double rho) {
    if (std::abs(rho) <= n) return d2(xi, rho);
    const double s = rho / n;
    const double g1 = gamma_cutoff_d1(s);
    const double r = n * gamma_cutoff(s);
    return d2(xi, r) * g1 * g1 + d1(xi, r) * gamma_cutoff_d2(s) / n;
  };
  // sup f_n' can exceed lambda when f' is negative away from the identity region
  // (e.g. linear f), since f_n' -> 0 there; report the larger of the two.
  double sup_d1 = -infinity;
  SamplingBox wide = box;
  wide.rho_max = std::max(box.rho_max, 2.5 * n);
  for (double xi : xi_samples(wide))
    for (double rho : rho_samples(wide)) sup_d1 = std::max(sup_d1, out.df(xi, rho));
  out.lambda_dissip = std::max(f.lambda_dissip, sup_d1);
  return out;
}

const HypothesisItem* HypothesisReport::find(const std::string& id) const {
  for (const auto& it : items)
    if (it.id == id) return &it;
  return nullptr;
}

bool HypothesisReport::passes(const std::string& prefix) const {
  bool any = false;
  for (const auto& it : items)
    if (it.id.rfind(prefix, 0) == 0) {
      any = true;
      if (!it.pass) return false;
    }
  return any;
}

bool HypothesisReport::all_pass() const {
  return std::all_of(items.begin(), items.end(), [](const auto& it) { return it.pass; });
}

HypothesisReport validate_hypotheses(const ReactionSpec& f, const DiffusionSpec& g,
                                     const SamplingBox& box) {
  HypothesisReport rep;
  const double m = f.degree_m;
  if (!(m >= 1.0)) throw std::invalid_argument("validate_hypotheses: degree m must be >= 1");
  const auto rhos = rho_samples(box);
  const auto xis = xi_samples(box);

  rep.items.push_back(growth_item("H1.growth0", f.f, m, box));
  rep.items.push_back(growth_item("H1.growth1", f.df, std::max(m - 1.0, 0.0), box));
  rep.items.push_back(growth_item("H1.growth2", f.d2f, std::max(m - 2.0, 0.0), box));

  {  // (h12): sup f' <= lambda, and f' not trending upward toward the box edge
    Extremum inner{-infinity, 0, 0}, outer{-infinity, 0, 0};
    for (double xi : xis)
      for (double rho : rhos) {
        const double v = f.df(xi, rho);
        Extremum& slot = std::abs(rho) <= 0.5 * box.rho_max ? inner : outer;
        if (v > slot.value) slot = {v, rho, xi};
      }
    const Extremum& top = outer.value > inner.value ? outer : inner;
    HypothesisItem it;
    it.id = "H1.h12";
    it.measured = top.value;
    it.declared = f.lambda_dissip;
    it.witness_rho = top.rho;
    it.witness_xi = top.xi;
    const bool bounded = outer.value <= inner.value + box.tolerance;
    it.pass = bounded && top.value <= f.lambda_dissip + box.tolerance;
    std::ostringstream msg;
    msg << "sup f' = " << top.value << " at rho=" << top.rho;
    if (!bounded) msg << "; f' grows toward the box edge (unbounded above)";
    else if (!it.pass) msg << " exceeds declared lambda " << f.lambda_dissip;
    it.message = msg.str();
    rep.items.push_back(it);
  }

  const bool h14 = f.alpha_h14.has_value() && f.beta_h14.has_value();
  if (!h14) {
    auto item = growth_item("H1.h13", g.g, 1.0 / m, box);
    rep.items.push_back(item);
  } else {
    HypothesisItem it;
    it.id = "H1.h14";
    const double alpha = *f.alpha_h14, beta = *f.beta_h14;
    double worst = -infinity;
    const std::size_t n = std::min<std::size_t>(rhos.size(), 401);
    for (double xi : xis)
      for (std::size_t i = 0; i < n; ++i)
        for (std::size_t k = 0; k < n; ++k) {
          const double rho = rhos[i * (rhos.size() - 1) / (n - 1)];
          const double s = rhos[k * (rhos.size() - 1) / (n - 1)];
          const double lhs = (f.f(xi, rho + s) - f.f(xi, rho)) * s;
          const double rhs = -alpha * std::pow(std::abs(s), m + 1) +
                             beta * (1.0 + std::pow(std::abs(rho), m + 1));
          if (lhs - rhs > worst) {
            worst = lhs - rhs;
            it.witness_rho = rho;
            it.witness_xi = xi;
          }
        }
    it.measured = worst;
    it.declared = alpha;
    it.pass = worst <= box.tolerance;
    it.message = it.pass ? "strong dissipativity holds on the box"
                         : "strong dissipativity violated";
    rep.items.push_back(it);
  }

  {  // Lipschitz continuity of g in rho
    HypothesisItem it;
    it.id = "H1.lipschitz_g";
    double worst = 0.0;
    for (double xi : xis)
      for (std::size_t i = 0; i < rhos.size(); ++i) {
        double q = std::abs(g.dg(xi, rhos[i]));
        if (i + 1 < rhos.size())
          q = std::max(q, std::abs(g.g(xi, rhos[i + 1]) - g.g(xi, rhos[i])) /
                              (rhos[i + 1] - rhos[i]));
        if (q > worst) {
          worst = q;
          it.witness_rho = rhos[i];
          it.witness_xi = xi;
        }
      }
    it.measured = worst;
    it.declared = g.lip_const;
    it.pass = worst <= g.lip_const + 1e-6;
    it.message = "sampled Lipschitz constant " + std::to_string(worst);
    rep.items.push_back(it);
  }

  double inf_g = infinity, sup_g = 0.0, sup_df = -infinity;
  Extremum at_inf{0, 0, 0}, at_sup{0, 0, 0};
  for (double xi : xis)
    for (double rho : rhos) {
      const double a = std::abs(g.g(xi, rho));
      if (a < inf_g) {
        inf_g = a;
        at_inf = {a, rho, xi};
      }
      if (a > sup_g) {
        sup_g = a;
        at_sup = {a, rho, xi};
      }
      sup_df = std::max(sup_df, f.df(xi, rho));
    }

  {
    HypothesisItem it;
    it.id = "H2";
    it.measured = inf_g;
    it.declared = g.beta_g;
    it.witness_rho = at_inf.rho;
    it.witness_xi = at_inf.xi;
    it.pass = g.beta_g > 0.0 && inf_g > 0.0 && inf_g >= g.beta_g - 1e-9;
    it.message = "inf |g| = " + std::to_string(inf_g);
    rep.items.push_back(it);
  }
  {
    HypothesisItem it;
    it.id = "H3";
    it.measured = pi2 - sup_df;
    it.declared = g.upper_bound;
    it.witness_rho = at_sup.rho;
    it.witness_xi = at_sup.xi;
    const bool bounded = std::isfinite(g.upper_bound) && sup_g <= g.upper_bound + 1e-9;
    it.pass = it.measured > 0.0 && bounded;
    std::ostringstream msg;
    msg << "alpha = pi^2 - sup f' = " << it.measured << ", sup |g| = " << sup_g;
    if (!bounded) msg << " (g not declared bounded)";
    it.message = msg.str();
    rep.items.push_back(it);
  }
  return rep;
}

HypothesisReport validate_hypotheses(const ModelSpec& model, const SamplingBox& box) {
  return validate_hypotheses(model.reaction, model.diffusion, box);
}

double fit_strong_dissipativity_beta(const ReactionSpec& f, double alpha, double rho_max,
                                     std::size_t samples) {
  const double m = f.degree_m;
  double beta = 0.0;
  for (std::size_t i = 0; i < samples; ++i) {
    const double rho = -rho_max + 2.0 * rho_max * static_cast<double>(i) / (samples - 1.0);
    for (std::size_t k = 0; k < samples; ++k) {
      const double s = -rho_max + 2.0 * rho_max * static_cast<double>(k) / (samples - 1.0);
      if (s == 0.0) continue;
      const double lhs = (f.f(0.5, rho + s) - f.f(0.5, rho)) * (s > 0 ? 1.0 : -1.0);
      const double need = (lhs + alpha * std::pow(std::abs(s), m)) / (1.0 + std::pow(std::abs(rho), m));
      beta = std::max(beta, need);
    }
  }
  return beta;
}

ReactionSpec ModelSpec::effective_reaction() const {
  return std::isinf(truncation_n) ? reaction : truncate_reaction(reaction, truncation_n);
}

ModelSpec make_model(std::string preset, ReactionSpec f, DiffusionSpec g, GridPtr grid,
                     std::size_t noise_modes, double truncation_n, double yosida_k,
                     const SamplingBox& box) {
  if (!grid) throw std::invalid_argument("make_model: null grid");
  if (noise_modes < 1 || noise_modes > grid->size())
    throw ModeIndexError("make_model: noise modes must lie in 1..N");
  if (!(truncation_n >= 1.0)) throw DomainError("make_model: truncation level must be >= 1");
  if (!(yosida_k > 0.0)) throw DomainError("make_model: yosida_k must be positive");
  ModelSpec m;
  m.preset = std::move(preset);
  m.reaction = std::move(f);
  m.diffusion = std::move(g);
  m.grid = std::move(grid);
  m.noise_modes = noise_modes;
  m.truncation_n = truncation_n;
  m.yosida_k = yosida_k;
  m.hypotheses = validate_hypotheses(m.reaction, m.diffusion, box);
  return m;
}

namespace {

template <class Op>
Field pointwise(const ModelSpec& model, const Field& x, Op op) {
  if (x.size() != model.grid->size()) throw std::invalid_argument("field not on model grid");
  Field out(x.grid());
  const auto& xi = model.grid->points();
  for (std::size_t j = 0; j < x.size(); ++j) out[j] = op(j, xi[j], x[j]);
  return out;
}

}  // namespace

Field apply_F(const ModelSpec& model, const Field& x) {
  const auto r = model.effective_reaction();
  return pointwise(model, x, [&](std::size_t, double xi, double rho) { return r.f(xi, rho); });
}

Field apply_DF(const ModelSpec& model, const Field& x, const Field& y) {
  require_same_grid(x, y);
  const auto r = model.effective_reaction();
  return pointwise(model, x,
                   [&](std::size_t j, double xi, double rho) { return r.df(xi, rho) * y[j]; });
}

Field apply_D2F(const ModelSpec& model, const Field& x, const Field& y1, const Field& y2) {
  require_same_grid(x, y1);
  require_same_grid(x, y2);
  const auto r = model.effective_reaction();
  return pointwise(model, x, [&](std::size_t j, double xi, double rho) {
    return r.d2f(xi, rho) * y1[j] * y2[j];
  });
}

Field apply_G(const ModelSpec& model, const Field& x, const Field& y) {
  require_same_grid(x, y);
  const auto& g = model.diffusion.g;
  return pointwise(model, x, [&](std::size_t j, double xi, double rho) { return g(xi, rho) * y[j]; });
}

Field apply_G_inverse(const ModelSpec& model, const Field& x, const Field& y) {
  require_same_grid(x, y);
  if (!(model.diffusion.beta_g > 0.0))
    throw HypothesisViolation("G^{-1} requires a diffusion bounded away from zero");
  const auto& g = model.diffusion.g;
  return pointwise(model, x, [&](std::size_t j, double xi, double rho) { return y[j] / g(xi, rho); });
}

namespace presets {

ReactionSpec cubic_reaction() {
  ReactionSpec r;
  r.name = "cubic";
  r.f = [](double, double p) { return p - p * p * p; };
  r.df = [](double, double p) { return 1.0 - 3.0 * p * p; };
  r.d2f = [](double, double p) { return -6.0 * p; };
  r.degree_m = 3.0;
  r.lambda_dissip = 1.0;
  return r;
}

ReactionSpec linear_reaction(double a) {
  ReactionSpec r;
  r.name = "linear";
  r.f = [a](double, double p) { return -a * p; };
  r.df = [a](double, double) { return -a; };
  r.d2f = [](double, double) { return 0.0; };
  r.degree_m = 1.0;
  r.lambda_dissip = -a;
  return r;
}

ReactionSpec polynomial_reaction(std::vector<double> coeffs, const SamplingBox& box) {
  while (coeffs.size() > 1 && coeffs.back() == 0.0) coeffs.pop_back();
  if (coeffs.empty()) coeffs.push_back(0.0);
  ReactionSpec r;
  r.name = "polynomial";
  auto eval = [](const std::vector<double>& c, double p) {
    double s = 0.0;
    for (std::size_t i = c.size(); i-- > 0;) s = s * p + c[i];
    return s;
  };
  std::vector<double> d1, d2;
  for (std::size_t i = 1; i < coeffs.size(); ++i) d1.push_back(static_cast<double>(i) * coeffs[i]);
  for (std::size_t i = 1; i < d1.size(); ++i) d2.push_back(static_cast<double>(i) * d1[i]);
  r.f = [coeffs, eval](double, double p) { return eval(coeffs, p); };
  r.df = [d1, eval](double, double p) { return d1.empty() ? 0.0 : eval(d1, p); };
  r.d2f = [d2, eval](double, double p) { return d2.empty() ? 0.0 : eval(d2, p); };
  r.degree_m = std::max<double>(1.0, static_cast<double>(coeffs.size() - 1));
  double sup = -infinity;
  for (double rho : rho_samples(box)) sup = std::max(sup, r.df(0.5, rho));
  r.lambda_dissip = sup;
  return r;
}

DiffusionSpec sine_diffusion(double base, double amplitude) {
  return affine_sine_diffusion(base, amplitude, 0.0);
}

DiffusionSpec constant_diffusion(double sigma) { return affine_sine_diffusion(sigma, 0.0, 0.0); }

DiffusionSpec affine_sine_diffusion(double base, double amplitude, double slope) {
  DiffusionSpec d;
  d.name = "affine-sine";
  d.g = [=](double, double p) { return base + amplitude * std::sin(p) + slope * p; };
  d.dg = [=](double, double p) { return amplitude * std::cos(p) + slope; };
  d.d2g = [=](double, double p) { return -amplitude * std::sin(p); };
  d.lip_const = std::abs(amplitude) + std::abs(slope);
  if (slope == 0.0) {
    d.beta_g = std::max(0.0, std::abs(base) - std::abs(amplitude));
    d.upper_bound = std::abs(base) + std::abs(amplitude);
  } else {
    d.beta_g = 0.0;
    d.upper_bound = infinity;
  }
  return d;
}

ModelSpec cubic_default(GridPtr grid, std::size_t noise_modes, double truncation_n,
                        double yosida_k) {
  return make_model("cubic-default", cubic_reaction(), sine_diffusion(), std::move(grid),
                    noise_modes, truncation_n, yosida_k);
}

ModelSpec ou_linear(GridPtr grid, std::size_t noise_modes, double a, double sigma) {
  return make_model("ou-linear", linear_reaction(a), constant_diffusion(sigma), std::move(grid),
                    noise_modes);
}

ModelSpec heat(GridPtr grid, std::size_t noise_modes) {
  return make_model("heat", linear_reaction(0.0), constant_diffusion(0.0), std::move(grid),
                    noise_modes);
}

}  // namespace presets

}  // namespace rdlab
