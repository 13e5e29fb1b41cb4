#include "rdlab/identity_checks.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <numbers>
#include <stdexcept>

#include "rdlab/errors.hpp"

namespace rdlab {

void IdentityReport::decide() {
  discrepancy = lhs.mean - rhs.mean;
  pass = !inconclusive && std::isfinite(discrepancy) &&
         std::abs(discrepancy) <= 3.0 * joint_std_error + deterministic_tolerance;
}

double IdentityReport::z_score() const {
  const double d = std::max(0.0, std::abs(discrepancy) - deterministic_tolerance);
  return joint_std_error > 0.0 ? d / joint_std_error : (d == 0.0 ? 0.0 : infinity);
}

namespace {

double uniform_from_normal(double z) { return 0.5 * std::erfc(-z / std::numbers::sqrt2); }

struct SampleVariance {
  double mean = 0.0, variance = 0.0, variance_se = 0.0, second_moment = 0.0, second_moment_se = 0.0;
};

SampleVariance sample_variance(const std::vector<double>& v) {
  SampleVariance s;
  const double n = static_cast<double>(v.size());
  for (double a : v) s.mean += a;
  s.mean /= n;
  std::vector<double> dev2, sq;
  for (double a : v) {
    dev2.push_back((a - s.mean) * (a - s.mean));
    sq.push_back(a * a);
  }
  const MCEstimate d = summarize(dev2), q = summarize(sq);
  s.variance = d.mean * n / (n - 1.0);
  s.variance_se = d.std_error * n / (n - 1.0);
  s.second_moment = q.mean;
  s.second_moment_se = q.std_error;
  return s;
}

}  // namespace

IdentityReport check_carre_resolvent(const ModelSpec& model, const Observable& psi, double lambda,
                                     const Field& x, const CarreBudget& budget, const McConfig& mc) {
  if (!(lambda > 0.0)) throw DomainError("carre: lambda must be positive");
  if (!psi.has_gradient()) throw PreconditionError("carre: psi needs gradient metadata");
  if (budget.n_value < 2 || budget.n_gamma < 2)
    throw std::invalid_argument("carre: budgets must be at least 2");

  QuadratureConfig q;
  q.rule = QuadratureConfig::Rule::lattice;
  q.tail_tolerance = budget.tail_tolerance;
  const QuadratureGrid quad = make_quadrature(lambda, psi.sup_abs(), q, mc.dt);
  const std::size_t n_tot = quad.steps.size();
  if (n_tot < 2) throw DomainError("carre: quadrature horizon shorter than two steps");
  const Stepper st(model, mc.dt, mc.blowup_ceiling);
  const std::size_t n = st.size();
  const double dt = mc.dt;

  // resolvent functional of the remaining horizon, nodes 0..nodes-1 from y
  auto functional = [&](Integrator& it, std::size_t nodes) {
    double acc = 0.0;
    for (std::size_t k = 0;; ++k) {
      acc += dt * std::exp(-lambda * static_cast<double>(k) * dt) * psi(it.u());
      if (k + 1 == nodes) return acc;
      it.step();
    }
  };

  auto values = map_trajectories<double>(budget.n_value, mc.threads, [&](std::size_t i) {
    Integrator it(st, x, trajectory_stream(model, mc, i));
    return functional(it, n_tot);
  });
  std::vector<double> phis;
  std::size_t aborted = 0;
  for (auto& v : values) {
    if (v)
      phis.push_back(*v);
    else
      ++aborted;
  }
  if (phis.size() < 2) throw BlowUpError("carre: all trajectories aborted", 0, 0.0);
  const SampleVariance sv = sample_variance(phis);

  // random node J with P(J = j) proportional to e^{-2 lambda t_{j+1}}, j = 0..n_tot-2
  const double r = std::exp(-2.0 * lambda * dt);
  const std::size_t n_j = n_tot - 1;
  const double z_norm = dt * r * (1.0 - std::pow(r, static_cast<double>(n_j))) / (1.0 - r);

  McConfig outer = mc;
  outer.stream_offset = mc.stream_offset + budget.n_value;
  auto gammas = map_trajectories<double>(budget.n_gamma, mc.threads, [&](std::size_t o) {
    const NoiseStream base = trajectory_stream(model, outer, o);
    const double u = uniform_from_normal(base.standard_normals(0x6a, 1)[0]);
    const double tail = 1.0 - u * (1.0 - std::pow(r, static_cast<double>(n_j)));
    std::size_t j = static_cast<std::size_t>(std::floor(std::log(tail) / std::log(r)));
    j = std::min(j, n_j - 1);

    Integrator it(st, x, base);
    it.advance(j);
    std::vector<Field> dirs;
    std::vector<double> scratch(n);
    for (std::size_t i = 1; i <= st.noise_modes(); ++i) {
      Field d = apply_G(model, it.u(), eigenpair(st.grid(), i).first);
      st.propagate(d.values(), scratch);
      dirs.push_back(std::move(d));
    }
    it.step();
    const Field start = it.u();
    const std::size_t nodes = n_tot - (j + 1);
    std::vector<Field> grads;
    for (std::uint64_t b = 1; b <= 2; ++b) {
      Integrator br(st, start, base.derive(b));
      br.enable_tape();
      std::vector<Field> dpsi;
      for (std::size_t k = 0;; ++k) {
        Field d = psi.gradient(br.u()).as_density();
        d *= dt * std::exp(-lambda * static_cast<double>(k) * dt);
        dpsi.push_back(std::move(d));
        if (k + 1 == nodes) break;
        br.step();
      }
      grads.push_back(adjoint_sweep(st, br.tape(), nodes - 1,
                                    [&](std::size_t k, std::span<double> acc) {
                                      for (std::size_t p = 0; p < n; ++p) acc[p] += dpsi[k][p];
                                    }));
    }
    double g = 0.0;
    for (const auto& d : dirs) g += d.inner(grads[0]) * d.inner(grads[1]);
    return z_norm * g;
  });
  std::vector<double> gs;
  std::size_t g_aborted = 0;
  for (auto& v : gammas) {
    if (v)
      gs.push_back(*v);
    else
      ++g_aborted;
  }
  if (gs.size() < 2) throw BlowUpError("carre: all outer samples aborted", 0, 0.0);
  const MCEstimate gamma_int = summarize(gs, g_aborted);

  IdentityReport rep;
  rep.id = "carre_resolvent";
  const double nn = static_cast<double>(phis.size());
  const double phi_sq = sv.mean * sv.mean - sv.variance / nn;
  rep.lhs = {phi_sq, 2.0 * std::abs(sv.mean) * std::sqrt(sv.variance / nn), phis.size(), aborted};
  rep.rhs = {sv.second_moment - gamma_int.mean,
             std::hypot(sv.second_moment_se, gamma_int.std_error), phis.size(), aborted + g_aborted};
  // lhs - rhs = gamma_int - unbiased variance of Phi
  rep.joint_std_error = std::hypot(sv.variance_se, gamma_int.std_error);
  rep.metadata = {{"lambda", lambda},
                  {"phi", sv.mean},
                  {"var_phi", sv.variance},
                  {"var_phi_se", sv.variance_se},
                  {"gamma_integral", gamma_int.mean},
                  {"gamma_integral_se", gamma_int.std_error},
                  {"T_max", quad.T_max},
                  {"dt", dt},
                  {"N", static_cast<double>(n)},
                  {"M", static_cast<double>(model.noise_modes)}};
  rep.inconclusive = static_cast<double>(aborted + g_aborted) >
                     0.01 * static_cast<double>(budget.n_value + budget.n_gamma);
  rep.decide();
  return rep;
}

IdentityReport check_ito_E(const FiniteSystem& sys, const Observable& phi, const Field& x, double t,
                           std::size_t n_traj, const McConfig& mc) {
  if (!(t >= 0.0)) throw DomainError("ito: negative time");
  if (!phi.has_gradient() || !phi.has_hessian())
    throw PreconditionError("ito: observable needs first and second derivatives");
  IdentityReport rep;
  rep.id = "ito_E";
  const std::size_t steps = snap_to_step(t, mc.dt);
  rep.metadata = {{"t", static_cast<double>(steps) * mc.dt}, {"dt", mc.dt}};
  if (steps == 0) {
    rep.lhs = rep.rhs = {phi(x), 0.0, n_traj, 0};
    rep.decide();
    return rep;
  }
  const ModelSpec& model = sys.model();
  const Stepper coarse(model, mc.dt, mc.blowup_ceiling);
  const Stepper fine(model, 0.5 * mc.dt, mc.blowup_ceiling);
  const double phi_x = phi(x);

  // per path: Richardson-combined phi(X_t) and phi(x) + int L phi
  auto run = [&](const Stepper& st, const NoiseStream& s, std::size_t n) {
    Integrator it(st, x, s);
    double integral = 0.0;
    for (std::size_t j = 0; j < n; ++j) {
      integral += st.dt() * finite_generator_apply(sys, phi, it.u());
      it.step();
    }
    return std::pair{phi(it.u()), phi_x + integral};
  };
  auto slots =
      map_trajectories<std::array<double, 2>>(n_traj, mc.threads, [&](std::size_t i) {
        const NoiseStream s = trajectory_stream(model, mc, i);
        const auto [lc, rc] = run(coarse, s, steps);
        const auto [lf, rf] = run(fine, s.refine(), 2 * steps);
        return std::array<double, 2>{2.0 * lf - lc, 2.0 * rf - rc};
      });
  std::vector<double> l, r, d;
  std::size_t aborted = 0;
  for (auto& s : slots) {
    if (!s) {
      ++aborted;
      continue;
    }
    l.push_back((*s)[0]);
    r.push_back((*s)[1]);
    d.push_back((*s)[0] - (*s)[1]);
  }
  rep.lhs = summarize(l, aborted);
  rep.rhs = summarize(r, aborted);
  rep.joint_std_error = summarize(d).std_error;
  rep.inconclusive = static_cast<double>(aborted) > 0.01 * static_cast<double>(n_traj);
  rep.decide();
  return rep;
}

EnergyReport check_energy_identity(const ModelSpec& model, const Observable& phi, double t,
                                   const std::vector<Field>& measure, std::size_t n_inner,
                                   const McConfig& mc, std::vector<double> monotone_times) {
  if (!phi.has_gradient()) throw PreconditionError("energy identity: observable needs a gradient");
  if (!(t >= 0.0)) throw DomainError("energy identity: negative time");
  if (n_inner < 2) throw std::invalid_argument("energy identity: need at least 2 inner trajectories");
  if (measure.empty()) throw std::invalid_argument("energy identity: empty measure sample");
  const Stepper st(model, mc.dt, mc.blowup_ceiling);
  const std::size_t n = snap_to_step(t, mc.dt);
  const std::size_t m_modes = st.noise_modes();
  const std::size_t N = st.size();

  std::vector<std::size_t> snaps{n};
  for (double s : monotone_times) snaps.push_back(snap_to_step(s, mc.dt));
  const std::size_t last = *std::max_element(snaps.begin(), snaps.end());

  struct PerSample {
    double phi_sq, gamma_int;
    std::vector<double> energy;  // per snapshot
    std::size_t aborted;
  };
  const auto per = parallel_map<PerSample>(measure.size(), mc.threads, [&](std::size_t s) {
    const Field& x = measure[s];
    std::vector<Field> dirs;
    std::vector<double> scratch(N);
    for (std::size_t i = 1; i <= m_modes; ++i) {
      Field d = apply_G(model, x, eigenpair(st.grid(), i).first);
      st.propagate(d.values(), scratch);
      dirs.push_back(std::move(d));
    }
    std::vector<double> gsum(m_modes * n, 0.0), gsq(m_modes * n, 0.0);
    std::vector<double> vsum(snaps.size(), 0.0), vsq(snaps.size(), 0.0);
    std::size_t used = 0, aborted = 0;
    for (std::size_t k = 0; k < n_inner; ++k) {
      try {
        Integrator it(st, x, trajectory_stream(model, mc, s * n_inner + k));
        std::vector<double> g(m_modes * n), v(snaps.size());
        auto snapshot = [&](std::size_t step) {
          for (std::size_t q = 0; q < snaps.size(); ++q)
            if (snaps[q] == step) v[q] = phi(it.u());
        };
        snapshot(0);
        if (last > 0) {
          it.step();
          for (const auto& d : dirs) it.add_tangent(d);
          for (std::size_t step = 1;; ++step) {
            snapshot(step);
            if (step <= n) {
              const DualFunctional dphi = phi.gradient(it.u());
              for (std::size_t i = 0; i < m_modes; ++i) g[i * n + step - 1] = dphi.pair(it.eta(i));
            }
            if (step == last) break;
            if (step == n) it.drop_tangents();
            it.step();
          }
        }
        for (std::size_t p = 0; p < g.size(); ++p) {
          gsum[p] += g[p];
          gsq[p] += g[p] * g[p];
        }
        for (std::size_t q = 0; q < v.size(); ++q) {
          vsum[q] += v[q];
          vsq[q] += v[q] * v[q];
        }
        ++used;
      } catch (const BlowUpError&) {
        ++aborted;
      }
    }
    PerSample out{phi(x) * phi(x), 0.0, std::vector<double>(snaps.size()), aborted};
    if (used < 2) throw BlowUpError("energy identity: inner trajectories aborted", 0, 0.0);
    for (std::size_t p = 0; p < gsum.size(); ++p)
      out.gamma_int += mc.dt * unbiased_square_of_mean(gsum[p], gsq[p], used);
    for (std::size_t q = 0; q < snaps.size(); ++q)
      out.energy[q] = snaps[q] == 0 ? out.phi_sq : unbiased_square_of_mean(vsum[q], vsq[q], used);
    return out;
  });

  EnergyReport er;
  IdentityReport& rep = er.identity;
  rep.id = "energy_identity";
  std::vector<double> lhs, rhs, diff;
  std::size_t aborted = 0;
  for (const auto& p : per) {
    lhs.push_back(p.energy[0] + p.gamma_int);
    rhs.push_back(p.phi_sq);
    diff.push_back(lhs.back() - rhs.back());
    aborted += p.aborted;
  }
  rep.lhs = summarize(lhs, aborted);
  rep.rhs = summarize(rhs);
  rep.joint_std_error = summarize(diff).std_error;
  std::vector<double> gi, e0;
  for (const auto& p : per) {
    gi.push_back(p.gamma_int);
    e0.push_back(p.energy[0]);
  }
  const MCEstimate gamma_est = summarize(gi), energy_est = summarize(e0);
  rep.metadata = {{"t", static_cast<double>(n) * mc.dt},
                  {"energy_t", energy_est.mean},
                  {"gamma_integral", gamma_est.mean},
                  {"gamma_integral_se", gamma_est.std_error},
                  {"measure_samples", static_cast<double>(measure.size())},
                  {"inner", static_cast<double>(n_inner)}};
  rep.inconclusive = static_cast<double>(aborted) >
                     0.01 * static_cast<double>(measure.size() * n_inner);
  rep.decide();

  for (std::size_t q = 1; q < snaps.size(); ++q) {
    er.times.push_back(static_cast<double>(snaps[q]) * mc.dt);
    std::vector<double> col;
    for (const auto& p : per) col.push_back(p.energy[q]);
    er.energy.push_back(summarize(col));
  }
  // pairwise comparisons share the measure sample, so use paired differences
  std::vector<std::size_t> order(er.times.size());
  for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
  std::sort(order.begin(), order.end(), [&](auto a, auto b) { return er.times[a] < er.times[b]; });
  for (std::size_t a = 0; a + 1 < order.size(); ++a) {
    std::vector<double> d;
    for (const auto& p : per) d.push_back(p.energy[order[a + 1] + 1] - p.energy[order[a] + 1]);
    const MCEstimate e = summarize(d);
    if (e.mean > 3.0 * e.std_error + 1e-15) er.monotone = false;
  }
  return er;
}

Observable ou_regularized_mode_cosine(const GridPtr& grid, std::size_t k, double t,
                                      std::size_t noise_modes) {
  if (!(t > 0.0)) throw DomainError("ou regularization: t must be positive");
  const double c = std::exp(dirichlet_eigenvalue(k) * t);
  const double damp = k <= noise_modes ? std::exp(-0.5 * ou_mode_variance(k, t)) : 1.0;
  ScalarMap chi;
  chi.name = "ou_cos";
  chi.f = [=](double r) { return damp * std::cos(c * r); };
  chi.df = [=](double r) { return -damp * c * std::sin(c * r); };
  chi.d2f = [=](double r) { return -damp * c * c * std::cos(c * r); };
  chi.sup_abs = damp;
  chi.sup_abs_d1 = damp * c;
  return Observable::cylindrical(chi, eigenpair(grid, k).first);
}

}  // namespace rdlab
