#include "rdlab/semigroup.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <map>
#include <numbers>
#include <optional>
#include <stdexcept>

#include "rdlab/errors.hpp"

namespace rdlab {

namespace {

constexpr double pi2 = std::numbers::pi * std::numbers::pi;

template <class T>
std::pair<std::vector<T>, std::size_t> collect(std::vector<std::optional<T>>&& slots) {
  std::vector<T> out;
  out.reserve(slots.size());
  std::size_t aborted = 0;
  for (auto& s : slots) {
    if (s)
      out.push_back(std::move(*s));
    else
      ++aborted;
  }
  return {std::move(out), aborted};
}

std::vector<std::size_t> time_steps(const std::vector<double>& times, double dt) {
  std::vector<std::size_t> s;
  for (double t : times) s.push_back(snap_to_step(t, dt));
  return s;
}

std::size_t max_step(const std::vector<std::size_t>& steps) {
  return steps.empty() ? 0 : *std::max_element(steps.begin(), steps.end());
}

}  // namespace

NoiseStream trajectory_stream(const ModelSpec& model, const McConfig& mc, std::uint64_t i) {
  return NoiseStream(mc.seed, mc.stream_offset + i, model.noise_modes, mc.dt);
}

std::vector<MCEstimate> estimate_Pt_curve(const ModelSpec& model, const Observable& phi,
                                          const Field& x, const std::vector<double>& times,
                                          std::size_t n_traj, const McConfig& mc) {
  for (double t : times)
    if (!(t >= 0.0)) throw DomainError("estimate_Pt: negative time");
  const Stepper st(model, mc.dt, mc.blowup_ceiling);
  const auto steps = time_steps(times, mc.dt);
  const std::size_t last = max_step(steps);
  auto slots = map_trajectories<std::vector<double>>(n_traj, mc.threads, [&](std::size_t i) {
    Integrator it(st, x, trajectory_stream(model, mc, i));
    std::vector<double> v(steps.size());
    for (std::size_t s = 0;; ++s) {
      for (std::size_t k = 0; k < steps.size(); ++k)
        if (steps[k] == s) v[k] = phi(it.u());
      if (s == last) break;
      it.step();
    }
    return v;
  });
  auto [rows, aborted] = collect(std::move(slots));
  std::vector<MCEstimate> out;
  for (std::size_t k = 0; k < steps.size(); ++k) {
    if (steps[k] == 0) {
      out.push_back({phi(x), 0.0, n_traj, 0});
      continue;
    }
    std::vector<double> col;
    col.reserve(rows.size());
    for (const auto& r : rows) col.push_back(r[k]);
    out.push_back(summarize(col, aborted));
  }
  return out;
}

MCEstimate estimate_Pt(const ModelSpec& model, const Observable& phi, const Field& x, double t,
                       std::size_t n_traj, const McConfig& mc) {
  return estimate_Pt_curve(model, phi, x, {t}, n_traj, mc).front();
}

MCEstimate gradient_bel(const ModelSpec& model, const Observable& phi, const Field& x, double t,
                        const Field& h, std::size_t n_traj, const McConfig& mc, bool baseline) {
  if (!(t > 0.0)) throw DomainError("gradient_bel: t must be positive");
  if (!(model.diffusion.beta_g > 0.0))
    throw HypothesisViolation("gradient_bel: diffusion must be bounded away from zero");
  const Stepper st(model, mc.dt, mc.blowup_ceiling);
  const std::size_t n = snap_to_step(t, mc.dt);
  const double tn = static_cast<double>(n) * mc.dt;
  const double c = baseline ? phi(x) : 0.0;
  auto slots = map_trajectories<double>(n_traj, mc.threads, [&](std::size_t i) {
    Integrator it(st, x, trajectory_stream(model, mc, i));
    it.add_tangent(h);
    it.enable_bel();
    it.advance(n);
    return (phi(it.u()) - c) * it.bel(0) / tn;
  });
  auto [v, aborted] = collect(std::move(slots));
  return summarize(v, aborted);
}

MCEstimate gradient_tangent(const ModelSpec& model, const Observable& phi, const Field& x,
                            double t, const Field& h, std::size_t n_traj, const McConfig& mc) {
  if (!phi.has_gradient())
    throw PreconditionError("gradient_tangent: observable has no gradient metadata");
  if (!(t >= 0.0)) throw DomainError("gradient_tangent: negative time");
  const std::size_t n = snap_to_step(t, mc.dt);
  if (n == 0) return {phi.gradient(x).pair(h), 0.0, n_traj, 0};
  const Stepper st(model, mc.dt, mc.blowup_ceiling);
  auto slots = map_trajectories<double>(n_traj, mc.threads, [&](std::size_t i) {
    Integrator it(st, x, trajectory_stream(model, mc, i));
    it.add_tangent(h);
    it.advance(n);
    return phi.gradient(it.u()).pair(it.eta(0));
  });
  auto [v, aborted] = collect(std::move(slots));
  return summarize(v, aborted);
}

MCEstimate gradient_fd(const ModelSpec& model, const Observable& phi, const Field& x, double t,
                       const Field& h, double eps, std::size_t n_traj, const McConfig& mc) {
  if (!(eps > 0.0)) throw DomainError("gradient_fd: eps must be positive");
  const Stepper st(model, mc.dt, mc.blowup_ceiling);
  const std::size_t n = snap_to_step(t, mc.dt);
  const Field xp = x + eps * h, xm = x - eps * h;
  auto slots = map_trajectories<double>(n_traj, mc.threads, [&](std::size_t i) {
    const NoiseStream s = trajectory_stream(model, mc, i);
    Integrator a(st, xp, s), b(st, xm, s);
    a.advance(n);
    b.advance(n);
    return (phi(a.u()) - phi(b.u())) / (2.0 * eps);
  });
  auto [v, aborted] = collect(std::move(slots));
  return summarize(v, aborted);
}

std::vector<GradientComparisonRow> compare_gradients(const ModelSpec& model, const Observable& phi,
                                                     const Field& x, const Field& h,
                                                     const std::vector<double>& times,
                                                     std::size_t n_traj, double eps,
                                                     const McConfig& mc) {
  if (!phi.has_gradient()) throw PreconditionError("compare_gradients: observable needs a gradient");
  const Stepper st(model, mc.dt, mc.blowup_ceiling);
  const auto steps = time_steps(times, mc.dt);
  for (auto s : steps)
    if (s == 0) throw DomainError("compare_gradients: times must be positive");
  const std::size_t last = max_step(steps);
  const double phi_x = phi(x);
  const std::array<Field, 4> starts{x + eps * h, x - eps * h, x + (0.5 * eps) * h,
                                    x - (0.5 * eps) * h};
  // per time: bel, tangent, fd(eps), fd(eps/2)
  auto slots = map_trajectories<std::vector<double>>(n_traj, mc.threads, [&](std::size_t i) {
    const NoiseStream s = trajectory_stream(model, mc, i);
    Integrator it(st, x, s);
    it.add_tangent(h);
    it.enable_bel();
    std::vector<Integrator> fd;
    for (const auto& x0 : starts) fd.emplace_back(st, x0, s);
    std::vector<double> out(4 * steps.size());
    for (std::size_t n = 1; n <= last; ++n) {
      it.step();
      for (auto& f : fd) f.step();
      for (std::size_t k = 0; k < steps.size(); ++k) {
        if (steps[k] != n) continue;
        const double tn = static_cast<double>(n) * mc.dt;
        out[4 * k + 0] = (phi(it.u()) - phi_x) * it.bel(0) / tn;
        out[4 * k + 1] = phi.gradient(it.u()).pair(it.eta(0));
        out[4 * k + 2] = (phi(fd[0].u()) - phi(fd[1].u())) / (2.0 * eps);
        out[4 * k + 3] = (phi(fd[2].u()) - phi(fd[3].u())) / eps;
      }
    }
    return out;
  });
  auto [rows, aborted] = collect(std::move(slots));
  std::vector<GradientComparisonRow> result;
  for (std::size_t k = 0; k < steps.size(); ++k) {
    std::vector<double> bel, tan, fd, bt, ft, bf, half_diff;
    for (const auto& r : rows) {
      bel.push_back(r[4 * k]);
      tan.push_back(r[4 * k + 1]);
      fd.push_back(r[4 * k + 2]);
      bt.push_back(r[4 * k] - r[4 * k + 1]);
      ft.push_back(r[4 * k + 2] - r[4 * k + 1]);
      bf.push_back(r[4 * k] - r[4 * k + 2]);
      half_diff.push_back(r[4 * k + 2] - r[4 * k + 3]);
    }
    GradientComparisonRow row;
    row.t = static_cast<double>(steps[k]) * mc.dt;
    row.bel = summarize(bel, aborted);
    row.tangent = summarize(tan, aborted);
    row.fd = summarize(fd, aborted);
    const auto ebt = summarize(bt), eft = summarize(ft), ebf = summarize(bf);
    const auto ehd = summarize(half_diff);
    row.se_bel_tangent = ebt.std_error;
    row.se_fd_tangent = eft.std_error;
    row.se_bel_fd = ebf.std_error;
    row.fd_bias_budget = 4.0 / 3.0 * (std::abs(ehd.mean) + 3.0 * ehd.std_error);
    row.bel_tangent_agree = std::abs(ebt.mean) <= 3.0 * ebt.std_error;
    row.fd_tangent_agree = std::abs(eft.mean) <= 3.0 * eft.std_error + row.fd_bias_budget;
    row.bel_fd_agree = std::abs(ebf.mean) <= 3.0 * ebf.std_error + row.fd_bias_budget;
    result.push_back(row);
  }
  return result;
}

std::vector<GradientNormEstimate> gradient_dual_norm(const ModelSpec& model, const Observable& phi,
                                                     const Field& x,
                                                     const std::vector<double>& times,
                                                     std::size_t n_traj, const McConfig& mc,
                                                     GradientRoute route) {
  if (n_traj < 4) throw std::invalid_argument("gradient_dual_norm: need at least 4 trajectories");
  if (route == GradientRoute::tangent && !phi.has_gradient())
    throw PreconditionError("gradient_dual_norm: tangent route needs gradient metadata");
  const Stepper st(model, mc.dt, mc.blowup_ceiling);
  const auto steps = time_steps(times, mc.dt);
  if (route == GradientRoute::bel)
    for (auto s : steps)
      if (s == 0) throw DomainError("gradient_dual_norm: BEL route needs t > 0");
  const std::size_t last = max_step(steps);
  const std::size_t n = st.size();
  const double phi_x = phi(x);

  auto slots = map_trajectories<std::vector<Field>>(n_traj, mc.threads, [&](std::size_t i) {
    Integrator it(st, x, trajectory_stream(model, mc, i));
    it.enable_tape(route == GradientRoute::bel);
    std::vector<Field> at_node(steps.size());
    for (std::size_t s = 0;; ++s) {
      for (std::size_t k = 0; k < steps.size(); ++k)
        if (steps[k] == s) at_node[k] = it.u();
      if (s == last) break;
      it.step();
    }
    std::vector<Field> grads;
    for (std::size_t k = 0; k < steps.size(); ++k) {
      const std::size_t nk = steps[k];
      if (route == GradientRoute::tangent) {
        const Field d = phi.gradient(at_node[k]).as_density();
        grads.push_back(adjoint_sweep(st, it.tape(), nk, [&](std::size_t j, std::span<double> acc) {
          if (j == nk)
            for (std::size_t q = 0; q < n; ++q) acc[q] += d[q];
        }));
      } else {
        const double c = (phi(at_node[k]) - phi_x) / (static_cast<double>(nk) * mc.dt);
        const auto& tape = it.tape();
        grads.push_back(adjoint_sweep(st, tape, nk, [&](std::size_t j, std::span<double> acc) {
          if (j >= nk) return;
          const auto r = tape.row(tape.bel_force, j);
          for (std::size_t q = 0; q < n; ++q) acc[q] += c * r[q];
        }));
      }
    }
    return grads;
  });

  std::vector<GradientNormEstimate> out;
  const std::size_t half = n_traj / 2;
  for (std::size_t k = 0; k < steps.size(); ++k) {
    Field m1(st.grid()), mean(st.grid());
    std::size_t c1 = 0, call = 0;
    for (std::size_t i = 0; i < n_traj; ++i) {
      if (!slots[i]) continue;
      mean += (*slots[i])[k];
      ++call;
      if (i < half) {
        m1 += (*slots[i])[k];
        ++c1;
      }
    }
    if (c1 == 0 || call == 0) throw BlowUpError("gradient_dual_norm: all trajectories aborted", 0, 0);
    mean *= 1.0 / static_cast<double>(call);
    Field dir(st.grid());
    for (std::size_t q = 0; q < n; ++q) dir[q] = m1[q] > 0 ? 1.0 : (m1[q] < 0 ? -1.0 : 0.0);
    std::vector<double> vals;
    std::size_t aborted = 0;
    for (std::size_t i = half; i < n_traj; ++i) {
      if (!slots[i]) {
        ++aborted;
        continue;
      }
      vals.push_back((*slots[i])[k].inner(dir));
    }
    GradientNormEstimate g;
    g.t = static_cast<double>(steps[k]) * mc.dt;
    g.norm = summarize(vals, aborted);
    g.direction = dir;
    g.mean_gradient = mean;
    out.push_back(std::move(g));
  }
  return out;
}

QuadratureGrid make_quadrature(double lambda, double sup_psi, const QuadratureConfig& q,
                               double dt) {
  if (!(lambda > 0.0)) throw DomainError("resolvent: lambda must be positive");
  double T = q.T_max;
  if (!(T > 0.0)) {
    T = std::isfinite(sup_psi) && sup_psi > 0.0
            ? std::log(sup_psi / (lambda * q.tail_tolerance)) / lambda
            : 20.0 / lambda;
    T = std::max(T, 10.0 * dt);
  }
  QuadratureGrid g;
  if (q.rule == QuadratureConfig::Rule::lattice) {
    const auto n = static_cast<std::size_t>(std::ceil(T / dt - 1e-9));
    for (std::size_t k = 0; k < n; ++k) {
      g.steps.push_back(k);
      g.times.push_back(static_cast<double>(k) * dt);
      g.weights.push_back(dt * std::exp(-lambda * static_cast<double>(k) * dt));
    }
    g.T_max = static_cast<double>(n) * dt;
    return g;
  }
  std::vector<std::size_t> steps{0};
  const double t0 = std::max(q.t_first, dt);
  const std::size_t m = std::max<std::size_t>(q.nodes, 2);
  for (std::size_t k = 0; k < m; ++k) {
    const double t = t0 * std::pow(T / t0, static_cast<double>(k) / static_cast<double>(m - 1));
    steps.push_back(snap_to_step(t, dt));
  }
  std::sort(steps.begin(), steps.end());
  steps.erase(std::unique(steps.begin(), steps.end()), steps.end());
  g.steps = steps;
  for (auto s : steps) g.times.push_back(static_cast<double>(s) * dt);
  g.weights.assign(steps.size(), 0.0);
  // exact integral of e^{-lambda t} times the piecewise-linear interpolant of P_t psi
  for (std::size_t k = 0; k + 1 < steps.size(); ++k) {
    const double a = g.times[k], b = g.times[k + 1], L = b - a, y = lambda * L;
    const double ea = std::exp(-lambda * a);
    const double i0 = -ea * std::expm1(-y) / lambda;
    const double i1 = ea * (-std::expm1(-y) - y * std::exp(-y)) / (lambda * lambda);
    g.weights[k] += i0 - i1 / L;
    g.weights[k + 1] += i1 / L;
  }
  g.T_max = g.times.back();
  return g;
}

ResolventEstimate resolvent(const ModelSpec& model, const Observable& psi, const Field& x,
                            double lambda, const QuadratureConfig& q, std::size_t n_traj,
                            const McConfig& mc) {
  ResolventEstimate r;
  r.lambda = lambda;
  r.quadrature = make_quadrature(lambda, psi.sup_abs(), q, mc.dt);
  r.truncation_error_bound = std::exp(-lambda * r.quadrature.T_max) * psi.sup_abs() / lambda;
  const Stepper st(model, mc.dt, mc.blowup_ceiling);
  const auto& quad = r.quadrature;
  auto slots = map_trajectories<double>(n_traj, mc.threads, [&](std::size_t i) {
    Integrator it(st, x, trajectory_stream(model, mc, i));
    double acc = 0.0;
    std::size_t k = 0;
    for (std::size_t s = 0;; ++s) {
      if (k < quad.steps.size() && quad.steps[k] == s) acc += quad.weights[k++] * psi(it.u());
      if (k == quad.steps.size()) break;
      it.step();
    }
    return acc;
  });
  auto [v, aborted] = collect(std::move(slots));
  r.value = summarize(v, aborted);
  return r;
}

double kolmogorov_from_resolvent(double phi_x, double lambda, double psi_x) {
  return lambda * phi_x - psi_x;
}

ResolventGradientSamples resolvent_gradient_samples(const ModelSpec& model, const Observable& psi,
                                                    const Field& x, double lambda,
                                                    const QuadratureConfig& q, std::size_t n_traj,
                                                    const McConfig& mc, GradientRoute route) {
  if (route == GradientRoute::tangent && !psi.has_gradient())
    throw PreconditionError("resolvent gradient: tangent route needs gradient metadata");
  if (route == GradientRoute::bel && !(model.diffusion.beta_g > 0.0))
    throw HypothesisViolation("resolvent gradient: BEL route needs a nondegenerate diffusion");
  ResolventGradientSamples out;
  out.quadrature = make_quadrature(lambda, psi.sup_abs(), q, mc.dt);
  const auto& quad = out.quadrature;
  const Stepper st(model, mc.dt, mc.blowup_ceiling);
  const std::size_t n = st.size();
  const std::size_t last = quad.steps.back();
  const double psi_x = psi(x);

  struct Sample {
    Field grad;
    double value;
  };
  auto slots = map_trajectories<Sample>(n_traj, mc.threads, [&](std::size_t i) {
    Integrator it(st, x, trajectory_stream(model, mc, i));
    it.enable_tape(route == GradientRoute::bel);
    std::vector<double> psi_node(quad.steps.size());
    std::vector<Field> dpsi_node;
    if (route == GradientRoute::tangent) dpsi_node.resize(quad.steps.size());
    std::size_t k = 0;
    for (std::size_t s = 0;; ++s) {
      while (k < quad.steps.size() && quad.steps[k] == s) {
        psi_node[k] = psi(it.u());
        if (route == GradientRoute::tangent) dpsi_node[k] = psi.gradient(it.u()).as_density();
        ++k;
      }
      if (s == last) break;
      it.step();
    }
    double value = 0.0;
    for (std::size_t j = 0; j < quad.steps.size(); ++j) value += quad.weights[j] * psi_node[j];
    Field grad;
    if (route == GradientRoute::tangent) {
      std::size_t node = quad.steps.size();
      grad = adjoint_sweep(st, it.tape(), last, [&](std::size_t j, std::span<double> acc) {
        while (node > 0 && quad.steps[node - 1] == j) {
          --node;
          const double w = quad.weights[node];
          for (std::size_t p = 0; p < n; ++p) acc[p] += w * dpsi_node[node][p];
        }
      });
    } else {
      // C_j = sum over nodes after step j of w_k (psi(u_k) - psi(x)) / t_k
      std::vector<double> c(last + 1, 0.0);
      for (std::size_t j = 0; j < quad.steps.size(); ++j) {
        if (quad.steps[j] == 0) continue;
        const double coef = quad.weights[j] * (psi_node[j] - psi_x) / quad.times[j];
        c[quad.steps[j] - 1] += coef;
      }
      for (std::size_t j = last; j-- > 0;) c[j] += c[j + 1];
      const auto& tape = it.tape();
      const Field d0 = psi.has_gradient() ? psi.gradient(x).as_density() : Field(st.grid());
      const double w0 = quad.steps.front() == 0 ? quad.weights.front() : 0.0;
      grad = adjoint_sweep(st, tape, last, [&](std::size_t j, std::span<double> acc) {
        if (j < last) {
          const auto r = tape.row(tape.bel_force, j);
          for (std::size_t p = 0; p < n; ++p) acc[p] += c[j] * r[p];
        }
        if (j == 0)
          for (std::size_t p = 0; p < n; ++p) acc[p] += w0 * d0[p];
      });
    }
    return Sample{std::move(grad), value};
  });
  for (auto& s : slots) {
    if (!s) {
      ++out.aborted;
      continue;
    }
    out.gradients.push_back(std::move(s->grad));
    out.values.push_back(s->value);
  }
  return out;
}

namespace {

std::vector<Field> gamma_directions(const ModelSpec& model, const Field& x, std::size_t m) {
  if (m < 1 || m > x.size()) throw ModeIndexError("gamma series length outside 1..N");
  std::vector<Field> dirs;
  for (std::size_t i = 1; i <= m; ++i) dirs.push_back(apply_G(model, x, eigenpair(x.grid(), i).first));
  return dirs;
}

void finish_series(GammaSeries& g) {
  const std::size_t m = g.terms.size();
  double s = 0.0;
  for (double t : g.terms) {
    s += t;
    g.partial_sums.push_back(s);
  }
  g.value = s;
  const std::size_t tail_len = std::min<std::size_t>(4, m);
  g.tail.assign(g.terms.end() - static_cast<long>(tail_len), g.terms.end());
  const std::size_t from = (3 * m) / 4;
  double tail_sum = 0.0, tail_var = 0.0;
  for (std::size_t i = from; i < m; ++i) {
    tail_sum += g.terms[i];
    tail_var += g.term_se[i] * g.term_se[i];
  }
  g.cauchy = m < 4 || tail_sum <= 0.01 * std::abs(s) + 3.0 * std::sqrt(tail_var) + 1e-12;
}

}  // namespace

GammaSeries gamma_operator(const ModelSpec& model, const std::function<double(const Field&)>& provider,
                           const Field& x, std::size_t m_series) {
  GammaSeries g;
  for (const auto& d : gamma_directions(model, x, m_series)) {
    const double v = provider(d);
    g.terms.push_back(v * v);
    g.term_se.push_back(0.0);
  }
  finish_series(g);
  return g;
}

GammaSeries gamma_closed_form(const ModelSpec& model, const Observable& phi, const Field& x,
                              std::size_t m_series) {
  const DualFunctional d = phi.gradient(x);
  return gamma_operator(model, [&](const Field& y) { return d.pair(y); }, x, m_series);
}

GammaSeries gamma_from_samples(const ModelSpec& model, const Field& x,
                               const std::vector<Field>& gradients, std::size_t m_series) {
  const std::size_t ns = gradients.size();
  if (ns < 2) throw std::invalid_argument("gamma_from_samples: need at least 2 samples");
  const auto dirs = gamma_directions(model, x, m_series);
  GammaSeries g;
  std::vector<double> z(ns, 0.0);
  for (const auto& d : dirs) {
    double s = 0.0, ss = 0.0;
    std::vector<double> v(ns);
    for (std::size_t k = 0; k < ns; ++k) {
      v[k] = gradients[k].inner(d);
      s += v[k];
      ss += v[k] * v[k];
    }
    const double mean = s / static_cast<double>(ns);
    const double var = (ss - s * mean) / static_cast<double>(ns - 1);
    g.terms.push_back(unbiased_square_of_mean(s, ss, ns));
    const double se = std::sqrt(std::max(var, 0.0) / static_cast<double>(ns));
    g.term_se.push_back(2.0 * std::abs(mean) * se + se * se);
    for (std::size_t k = 0; k < ns; ++k) z[k] += 2.0 * mean * v[k];
  }
  finish_series(g);
  g.std_error = summarize(z).std_error;
  return g;
}

double gamma_parseval(const ModelSpec& model, const Observable& phi, const Field& x) {
  const DualFunctional d = phi.gradient(x);
  if (d.kind() != DualFunctional::Kind::density)
    throw PreconditionError("gamma_parseval: gradient must be an L1 density");
  const Field gd = apply_G(model, x, d.density_field());
  return gd.inner(gd);
}

double ou_mode_variance(std::size_t k, double t) {
  const double lam = static_cast<double>(k * k) * pi2;
  return -std::expm1(-2.0 * lam * t) / (2.0 * lam);
}

MCEstimate ou_regularize(const ModelSpec& model, const Observable& psi, double t, const Field& x,
                         std::size_t n_mc, const McConfig& mc) {
  if (!(t > 0.0)) throw DomainError("ou_regularize: t must be positive");
  const Field mean = heat_semigroup(x, t);
  const std::size_t m = model.noise_modes;
  std::vector<Field> scaled;
  for (std::size_t k = 1; k <= m; ++k)
    scaled.push_back(std::sqrt(ou_mode_variance(k, t)) * eigenpair(x.grid(), k).first);
  auto v = parallel_map<double>(n_mc, mc.threads, [&](std::size_t i) {
    const NoiseStream s(mc.seed, mc.stream_offset + i, m, 1.0);
    const auto xi = s.increments(0);
    Field y = mean;
    for (std::size_t k = 0; k < m; ++k)
      for (std::size_t j = 0; j < y.size(); ++j) y[j] += xi[k] * scaled[k][j];
    return psi(y);
  });
  return summarize(v);
}

FiniteSystem FiniteSystem::from_model(const ModelSpec& model) {
  if (std::isinf(model.truncation_n) && model.reaction.degree_m > 1.0)
    throw PreconditionError(
        "finite system needs Lipschitz coefficients: set a finite truncation level");
  FiniteSystem s;
  s.model_ = model;
  s.reaction_ = model.effective_reaction();
  for (std::size_t i = 1; i <= model.noise_modes; ++i)
    s.basis_.push_back(eigenpair(model.grid, i).first);
  return s;
}

Field FiniteSystem::drift(const Field& x) const {
  SpectralVector c = to_spectral(x);
  for (std::size_t k = 0; k < c.coeffs.size(); ++k) c.coeffs[k] *= yosida_multiplier(k + 1, model_.yosida_k);
  Field b = to_field(x.grid(), c);
  const auto& xi = model_.grid->points();
  for (std::size_t j = 0; j < x.size(); ++j) b[j] += reaction_.f(xi[j], x[j]);
  return b;
}

Field FiniteSystem::diffusion(std::size_t i, const Field& x) const {
  return apply_G(model_, x, basis_.at(i));
}

double finite_generator_apply(const FiniteSystem& sys, const Observable& phi, const Field& x) {
  if (!phi.has_gradient() || !phi.has_hessian())
    throw PreconditionError("finite_generator_apply: observable needs first and second derivatives");
  double second = 0.0;
  for (std::size_t i = 0; i < sys.drivers(); ++i) {
    const Field s = sys.diffusion(i, x);
    second += phi.hessian(x, s, s);
  }
  return 0.5 * second + phi.gradient(x).pair(sys.drift(x));
}

double square_identity_defect(const FiniteSystem& sys, const Observable& phi, const Field& x) {
  const Observable sq = phi.squared();
  const DualFunctional d = phi.gradient(x);
  double gamma = 0.0;
  for (std::size_t i = 0; i < sys.drivers(); ++i) {
    const double v = d.pair(sys.diffusion(i, x));
    gamma += v * v;
  }
  return finite_generator_apply(sys, sq, x) - 2.0 * phi(x) * finite_generator_apply(sys, phi, x) -
         gamma;
}

}  // namespace rdlab
