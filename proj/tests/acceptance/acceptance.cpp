// Acceptance suite: one PASS/FAIL line per criterion.
#include <CLI11.hpp>

#include <chrono>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iostream>
#include <map>
#include <numbers>
#include <random>
#include <sstream>
#include <string>

#include "rdlab/config.hpp"
#include "rdlab/ergodic.hpp"
#include "rdlab/errors.hpp"
#include "rdlab/experiments.hpp"
#include "rdlab/flows.hpp"
#include "rdlab/identity_checks.hpp"
#include "rdlab/output.hpp"
#include "rdlab/scalar_oracle.hpp"
#include "rdlab/semigroup.hpp"

using namespace rdlab;
namespace fs = std::filesystem;

namespace {

constexpr double pi = std::numbers::pi;

// pinned tolerances
constexpr double tol_spectral_rel = 1e-10;
constexpr double tol_heat_abs = 1e-12;
constexpr double fast_budget_seconds = 1.0;
constexpr double z_band = 3.0;
constexpr double fit_rel_tol = 0.15;
constexpr double slope_lo = -0.65, slope_hi = -0.35;
constexpr double tol_parseval_rel = 1e-8;
constexpr double tol_oracle_abs = 1e-3;
constexpr double tol_square_identity_rel = 1e-10;
constexpr double moment_drift_max = 0.05;
constexpr double rho_seed_drift_max = 0.20;
constexpr double ou_anchor_rel_tol = 0.10;
constexpr double gap_min_r2 = 0.9;
constexpr double gap_min_z = 2.0;

constexpr std::uint64_t master_seed = 20240601;

struct Outcome {
  bool pass = false;
  std::string detail;
};

std::string fmt(double v, int digits = 4) {
  std::ostringstream s;
  s.precision(digits);
  s << v;
  return s.str();
}

McConfig mc_for(double dt, std::uint64_t offset = 0) {
  McConfig mc;
  mc.seed = master_seed;
  mc.dt = dt;
  mc.stream_offset = offset;
  return mc;
}

Field e(const GridPtr& g, std::size_t k, double amp = 1.0) { return amp * eigenpair(g, k).first; }

double z_of(double est, double exact, double se) {
  if (se > 0.0) return (est - exact) / se;
  return est == exact ? 0.0 : infinity;
}

// ---------------------------------------------------------------------------------------------
Outcome criterion1() {
  const auto t0 = std::chrono::steady_clock::now();
  const auto g = make_grid(256);
  double worst = 0.0;
  std::mt19937_64 rng(master_seed);
  std::normal_distribution<double> z;
  for (std::size_t k = 1; k <= 16; ++k) {
    const auto [ek, lam] = eigenpair(g, k);
    // eigenrelation through the spectral representation of A and of e^{tA}; errors relative to |e_k|
    const SpectralVector c = to_spectral(ek);
    for (std::size_t l = 1; l <= 256; ++l)
      worst = std::max(worst, std::abs(c.coeffs[l - 1] - (l == k ? 1.0 : 0.0)));
    for (double t : {1e-4, 1e-3, 1e-2}) {
      const Field s = heat_semigroup(ek, t);
      const double expected = std::exp(lam * t);
      for (std::size_t j = 0; j < g->size(); ++j)
        worst = std::max(worst, std::abs(s[j] - expected * ek[j]) / ek.sup_norm());
    }
    const double K = 1e5;
    const Field y = yosida_apply(ek, K);
    const double ym = K * lam / (K - lam);
    for (std::size_t j = 0; j < g->size(); ++j)
      worst = std::max(worst, std::abs(y[j] - ym * ek[j]) / (std::abs(ym) * ek.sup_norm()));
  }
  // semigroup property on random data in the first 16 modes
  for (int rep = 0; rep < 8; ++rep) {
    SpectralVector c{std::vector<double>(16)};
    for (auto& v : c.coeffs) v = z(rng);
    const Field x = to_field(g, c);
    for (auto [s, t] : {std::pair{1e-3, 2e-3}, std::pair{5e-3, 1e-2}, std::pair{0.0, 3e-3}}) {
      const Field a = heat_semigroup(heat_semigroup(x, s), t), b = heat_semigroup(x, s + t);
      worst = std::max(worst, (a - b).sup_norm() / x.sup_norm());
    }
  }
  const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  return {worst <= tol_spectral_rel && secs < fast_budget_seconds,
          "max relative error " + fmt(worst) + " (tol " + fmt(tol_spectral_rel) + "), " + fmt(secs, 3) +
              " s"};
}

// ---------------------------------------------------------------------------------------------
Outcome criterion2() {
  const auto t0 = std::chrono::steady_clock::now();
  double worst = 0.0;
  for (std::size_t n : {16u, 64u, 128u}) {
    const auto g = make_grid(n);
    const ModelSpec heat = presets::heat(g, n);
    // smooth data and rough data (independent grid values)
    std::mt19937_64 rng(master_seed + n);
    std::uniform_real_distribution<double> u(-1.0, 1.0);
    Field rough(g);
    for (std::size_t j = 0; j < n; ++j) rough[j] = u(rng);
    for (const Field& x : {e(g, 1) + e(g, 3, 0.25), rough}) {
      SchemeConfig sc;
      sc.dt = 1e-3;
      sc.horizon = 0.5;
      sc.snapshot_times = {0.0, 0.001, 0.01, 0.1, 0.25, 0.5};
      const PathBundle pb = evolve_primary(heat, x, sc, NoiseStream(master_seed, 0, n, sc.dt));
      for (std::size_t s = 0; s < pb.times.size(); ++s)
        worst = std::max(worst, (pb.u[s] - heat_semigroup(x, pb.times[s])).sup_norm());
    }
  }
  const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  return {worst <= tol_heat_abs && secs < fast_budget_seconds,
          "max |u - e^{tA}x|_E = " + fmt(worst) + " (tol " + fmt(tol_heat_abs) + "), " + fmt(secs, 3) +
              " s"};
}

// ---------------------------------------------------------------------------------------------
// Linear drift -a rho, constant noise sigma: mode k of the scheme is an exact AR(1) chain.
struct LinearChain {
  double a, sigma, dt;
  double mult(std::size_t k) const {
    return std::exp(-double(k * k) * pi * pi * dt) * (1.0 - a * dt);
  }
  double mean(std::size_t k, double c0, std::size_t n) const { return c0 * std::pow(mult(k), double(n)); }
  double variance(std::size_t k, std::size_t n) const {
    const double q = mult(k) * mult(k);
    const double s = sigma * sigma * dt / ((1.0 - a * dt) * (1.0 - a * dt));
    return s * q * (1.0 - std::pow(q, double(n))) / (1.0 - q);
  }
  double stationary(std::size_t k) const {
    const double q = mult(k) * mult(k);
    return sigma * sigma * dt / ((1.0 - a * dt) * (1.0 - a * dt)) * q / (1.0 - q);
  }
};

Outcome criterion3() {
  const std::size_t N = 32, n_traj = 10000;
  const double a = 1.0, sigma = 1.0, dt = 1e-3, t = 0.5;
  const auto g = make_grid(N);
  const ModelSpec m = presets::ou_linear(g, N, a, sigma);
  const LinearChain lc{a, sigma, dt};
  const std::size_t n = snap_to_step(t, dt);
  const Field x = e(g, 1, 2.0) + e(g, 2, 1.0);
  const double c0[5] = {0.0, 2.0, 1.0, 0.0, 0.0};
  std::vector<double> zs;
  std::ostringstream det;

  // mode means and variances of u_t
  SchemeConfig sc;
  sc.dt = dt;
  sc.horizon = t;
  auto coeffs = map_trajectories<std::vector<double>>(n_traj, 1, [&](std::size_t i) {
    const PathBundle pb = evolve_primary(m, x, sc, NoiseStream(master_seed, i, N, dt));
    auto c = to_spectral(pb.u.back(), 4).coeffs;
    return c;
  });
  double worst_mean = 0.0, worst_var = 0.0;
  for (std::size_t k = 1; k <= 4; ++k) {
    std::vector<double> v, sq;
    const double mu = lc.mean(k, c0[k], n);
    for (const auto& c : coeffs) {
      v.push_back((*c)[k - 1]);
      sq.push_back(((*c)[k - 1] - mu) * ((*c)[k - 1] - mu));
    }
    const MCEstimate em = summarize(v), ev = summarize(sq);
    const double zm = z_of(em.mean, mu, em.std_error), zv = z_of(ev.mean, lc.variance(k, n), ev.std_error);
    zs.insert(zs.end(), {zm, zv});
    worst_mean = std::max(worst_mean, std::abs(zm));
    worst_var = std::max(worst_var, std::abs(zv));
  }
  det << "mode mean |z|max " << fmt(worst_mean, 3) << ", mode var |z|max " << fmt(worst_var, 3);

  // P_t phi and its BEL gradient for phi = cos <x, e_1>
  const Observable phi = Observable::cylindrical(ScalarMap::cos(), e(g, 1));
  const double m1 = lc.mean(1, 2.0, n), v1 = lc.variance(1, n);
  const double pt_exact = std::cos(m1) * std::exp(-0.5 * v1);
  const double grad_exact = -std::sin(m1) * std::exp(-0.5 * v1) * std::pow(lc.mult(1), double(n));
  const MCEstimate pt = estimate_Pt(m, phi, x, t, n_traj, mc_for(dt, 1'000'000));
  const MCEstimate bel = gradient_bel(m, phi, x, t, e(g, 1), n_traj, mc_for(dt, 2'000'000));
  zs.push_back(z_of(pt.mean, pt_exact, pt.std_error));
  zs.push_back(z_of(bel.mean, grad_exact, bel.std_error));
  det << ", P_t z " << fmt(zs[zs.size() - 2], 3) << ", BEL z " << fmt(zs.back(), 3);

  // stationary variance: per-chain means as independent units
  SamplerConfig sam;
  sam.n_samples = 4096;
  sam.chains = 64;
  const EmpiricalMeasure mu = sample_invariant(m, sam, mc_for(dt, 3'000'000));
  std::vector<double> chain_sum(sam.chains, 0.0), chain_n(sam.chains, 0.0);
  const Field e1 = e(g, 1);
  for (std::size_t i = 0; i < mu.size(); ++i) {
    const double c = mu.samples[i].inner(e1);
    chain_sum[mu.chain[i]] += c * c;
    chain_n[mu.chain[i]] += 1.0;
  }
  std::vector<double> per_chain;
  for (std::size_t c = 0; c < sam.chains; ++c)
    if (chain_n[c] > 0) per_chain.push_back(chain_sum[c] / chain_n[c]);
  const MCEstimate stat = summarize(per_chain);
  zs.push_back(z_of(stat.mean, lc.stationary(1), stat.std_error));
  det << ", stationary z " << fmt(zs.back(), 3);

  // gap rate of the first mode
  const GapFit gf = gap_fit(m, mu.chain_prefix(16), Observable::cylindrical(ScalarMap::identity(), e1),
                            {0.0, 0.02, 0.05, 0.08, 0.12}, 16, mc_for(dt, 4'000'000));
  const double rate = 2.0 * (pi * pi + a);
  const double rel = std::abs(gf.delta_hat - rate) / rate;
  det << ", gap " << fmt(gf.delta_hat) << " vs " << fmt(rate) << " (rel " << fmt(rel, 3) << ")";

  double zmax = 0.0;
  std::size_t over = 0;
  for (double z : zs) {
    zmax = std::max(zmax, std::abs(z));
    if (std::abs(z) > z_band) ++over;
  }
  det << "; " << zs.size() << " comparisons, " << over << " beyond 3 SE (allowed "
      << allowed_exceedances(zs.size()) << ")";
  return {battery_pass(zs) && rel <= fit_rel_tol, det.str()};
}

// ---------------------------------------------------------------------------------------------
Outcome criterion4() {
  const std::size_t N = 32, n_traj = 2000;
  const auto g = make_grid(N);
  const ModelSpec m = presets::cubic_default(g, N);
  const std::vector<std::string> obs{"tanh:e1", "sin:e1", "cos:e1+e2", "tanh:e1+e2", "sin:e2"};
  const std::vector<Field> states{Field(g), e(g, 1), e(g, 1, 2.0)};
  const std::vector<double> times{0.1, 0.5, 1.0};
  std::vector<double> zs;
  std::size_t block = 0;
  for (const auto& spec : obs) {
    const Observable phi = parse_observable(spec, g);
    for (const auto& x : states) {
      const auto rows =
          compare_gradients(m, phi, x, e(g, 1), times, n_traj, 1e-2, mc_for(1e-3, block++ * n_traj));
      for (const auto& r : rows) {
        auto z = [](double d, double se, double budget) {
          const double ex = std::max(0.0, std::abs(d) - budget);
          return se > 0.0 ? ex / se : (ex == 0.0 ? 0.0 : infinity);
        };
        zs.push_back(z(r.bel.mean - r.tangent.mean, r.se_bel_tangent, 0.0));
        zs.push_back(z(r.fd.mean - r.tangent.mean, r.se_fd_tangent, r.fd_bias_budget));
        zs.push_back(z(r.bel.mean - r.fd.mean, r.se_bel_fd, r.fd_bias_budget));
      }
    }
  }
  double zmax = 0.0;
  std::size_t over = 0;
  for (double z : zs) {
    zmax = std::max(zmax, z);
    if (z > z_band) ++over;
  }
  return {battery_pass(zs), std::to_string(zs.size()) + " pairwise comparisons, max |z| " + fmt(zmax, 3) +
                                ", " + std::to_string(over) + " beyond 3 SE (allowed " +
                                std::to_string(allowed_exceedances(zs.size())) + ")"};
}

// ---------------------------------------------------------------------------------------------
Outcome criterion5() {
  const std::size_t N = 32, n_traj = 8000;
  const double a = 0.1 - pi * pi, dt = 1e-3;
  const auto g = make_grid(N);
  const ModelSpec m = presets::ou_linear(g, N, a, 1.0);
  const Observable phi = Observable::cylindrical(ScalarMap::sign(), e(g, 1));
  const std::vector<double> times{0.01, 0.02, 0.05, 0.1, 0.2, 0.5, 1.0};
  const auto est = gradient_dual_norm(m, phi, Field(g), times, n_traj, mc_for(dt), GradientRoute::bel);
  std::vector<double> lx, ly, w;
  const LinearChain lc{a, 1.0, dt};
  double worst_ratio = 0.0;
  for (const auto& r : est) {
    lx.push_back(std::log(r.t));
    ly.push_back(std::log(r.norm.mean));
    const double rel_se = r.norm.std_error / r.norm.mean;
    w.push_back(1.0 / (rel_se * rel_se));
    // closed form: |D P_t phi(0)|_{E*} = m_t sqrt(2 / (pi v_t)) |e_1|_{L1}
    const std::size_t n = snap_to_step(r.t, dt);
    const double exact = std::pow(lc.mult(1), double(n)) * std::sqrt(2.0 / (pi * lc.variance(1, n))) *
                         e(g, 1).l1_norm();
    worst_ratio = std::max(worst_ratio, std::abs(r.norm.mean / exact - 1.0));
  }
  const LinearFit fit = weighted_linear_fit(lx, ly, w);
  return {fit.slope >= slope_lo && fit.slope <= slope_hi,
          "log-log slope " + fmt(fit.slope) + " +- " + fmt(fit.slope_se, 2) + " (band [" + fmt(slope_lo) +
              ", " + fmt(slope_hi) + "]), worst relative deviation from the closed form " +
              fmt(worst_ratio, 3)};
}

// ---------------------------------------------------------------------------------------------
Outcome criterion6() {
  const std::size_t N = 64;
  const auto g = make_grid(N);
  const ModelSpec m = presets::cubic_default(g, N);
  double worst = 0.0;
  for (const char* spec : {"tanh:e1", "sin:e1+e2", "cos:e3", "identity:e1", "tanh:e2"})
    for (const Field& x : {Field(g), e(g, 1), e(g, 1, 2.0) + e(g, 3, 0.5)}) {
      const Observable phi = parse_observable(spec, g);
      const double p = gamma_parseval(m, phi, x), c = gamma_closed_form(m, phi, x, N).value;
      worst = std::max(worst, std::abs(c - p) / std::max(std::abs(p), 1e-300));
    }
  const bool parseval_ok = worst <= tol_parseval_rel;

  // resolvent-defined observable: unbiased series from sampled gradients
  QuadratureConfig q;
  const Field x = e(g, 1);
  const auto samples = resolvent_gradient_samples(m, parse_observable("tanh:e1", g), x, 1.0, q, 120,
                                                  mc_for(2e-3), GradientRoute::tangent);
  const GammaSeries rs = gamma_from_samples(m, x, samples.gradients, N);

  // evaluation functional: terms do not decay
  const Observable ev = parse_observable("tanh:x@0.5", g);
  const GammaSeries es = gamma_closed_form(m, ev, x, N);
  const double growth = es.partial_sums.back() / es.partial_sums[N / 2 - 1];

  return {parseval_ok && rs.cauchy && !es.cauchy,
          "Parseval max rel error " + fmt(worst) + "; resolvent series " + (rs.cauchy ? "Cauchy" : "NOT Cauchy") +
              " (value " + fmt(rs.value) + " +- " + fmt(rs.std_error, 2) + "); evaluation series " +
              (es.cauchy ? "NOT flagged" : "flagged divergent") + " (S_M / S_{M/2} = " + fmt(growth, 3) + ")"};
}

// ---------------------------------------------------------------------------------------------
Outcome criterion7() {
  const std::size_t N = 64;
  const auto g = make_grid(N);
  const ScalarDiffusion sd = one_mode_reduction(presets::cubic_default(g, 1));
  const ScalarCarreCheck oc =
      scalar_carre_check(sd, 1.0, [](double y) { return std::tanh(y); }, 4.0, 4000, 2.0);
  const bool oracle_ok = oc.max_abs_error <= tol_oracle_abs;

  const ModelSpec m = presets::cubic_default(g, 16);
  const Observable psi = parse_observable("tanh:e1", g);
  CarreBudget b;
  b.n_value = 6000;
  b.n_gamma = 1500;
  std::ostringstream det;
  det << "one-mode oracle max error " << fmt(oc.max_abs_error) << " (tol " << fmt(tol_oracle_abs) << ")";
  bool full_ok = true;
  std::uint64_t offset = 0;
  for (double amp : {0.0, 1.0, 2.0}) {
    const IdentityReport r =
        check_carre_resolvent(m, psi, 1.0, e(g, 1, amp), b, mc_for(2e-3, offset));
    offset += b.n_value + b.n_gamma;
    full_ok = full_ok && r.pass;
    det << "; x=" << fmt(amp) << "e1: " << fmt(r.lhs.mean) << " vs " << fmt(r.rhs.mean) << " (z "
        << fmt(r.z_score(), 3) << ")";
  }
  return {oracle_ok && full_ok, det.str()};
}

// ---------------------------------------------------------------------------------------------
Outcome criterion8() {
  const auto g = make_grid(2);
  const ModelSpec m = presets::cubic_default(g, 2, 2.0);
  const FiniteSystem sys = FiniteSystem::from_model(m);
  std::mt19937_64 rng(master_seed);
  std::normal_distribution<double> z(0.0, 2.0);
  double worst = 0.0;
  for (const char* spec : {"product:e1,e2", "tanh:e1", "cos:e1+e2", "sin:e2"}) {
    const Observable phi = parse_observable(spec, g);
    for (int rep = 0; rep < 64; ++rep) {
      const Field x(g, {z(rng), z(rng)});
      const double scale = 1.0 + std::abs(finite_generator_apply(sys, phi.squared(), x));
      worst = std::max(worst, std::abs(square_identity_defect(sys, phi, x)) / scale);
    }
  }
  const IdentityReport r = check_ito_E(sys, mode_product(g, 1, 2), e(g, 1, 0.5) + e(g, 2, 0.5), 0.25,
                                       100000, mc_for(1e-3));
  return {worst <= tol_square_identity_rel && r.pass,
          "square identity max relative defect " + fmt(worst) + "; Ito identity " + fmt(r.lhs.mean) +
              " vs " + fmt(r.rhs.mean) + " (se " + fmt(r.joint_std_error, 2) + ", z " +
              fmt(r.z_score(), 3) + ")"};
}

// ---------------------------------------------------------------------------------------------
Outcome criterion9() {
  const std::size_t N = 32;
  const auto g = make_grid(N);
  const ModelSpec m = presets::cubic_default(g, 8);
  SamplerConfig sc;
  sc.n_samples = 512;
  sc.chains = 64;
  const EmpiricalMeasure mu = sample_invariant(m, sc, mc_for(1e-3));
  const EnergyReport r = check_energy_identity(m, parse_observable("tanh:e1", g), 0.5, mu.samples, 128,
                                               mc_for(1e-3, 1'000'000), {0.1, 0.25, 0.5});
  std::ostringstream det;
  det << "lhs " << fmt(r.identity.lhs.mean) << " vs rhs " << fmt(r.identity.rhs.mean) << " (z "
      << fmt(r.identity.z_score(), 3) << "); energy";
  for (std::size_t k = 0; k < r.times.size(); ++k) det << " t=" << fmt(r.times[k]) << ":" << fmt(r.energy[k].mean);
  det << (r.monotone ? " monotone" : " NOT monotone");
  return {r.identity.pass && r.monotone, det.str()};
}

// ---------------------------------------------------------------------------------------------
Outcome criterion10() {
  const std::size_t N = 32;
  const double dt = 1e-3;
  const auto g = make_grid(N);
  const ModelSpec m = presets::cubic_default(g, N);
  SamplerConfig sc;
  sc.n_samples = 8192;
  sc.chains = 64;
  McConfig mca = mc_for(dt, 0), mcb = mc_for(dt, 0);
  mcb.seed = master_seed + 1;
  const EmpiricalMeasure A = sample_invariant(m, sc, mca), B = sample_invariant(m, sc, mcb);
  std::ostringstream det;
  bool ok = true;

  const Observable phi = parse_observable("tanh:e1", g);
  for (double t : {0.1, 0.5}) {
    const IdentityReport r = invariance_check(m, A.chain_prefix(8), phi, t, mc_for(dt, 5'000'000));
    ok = ok && r.pass;
    det << "invariance t=" << fmt(t) << " z " << fmt(r.z_score(), 3) << "; ";
  }
  const EmpiricalMeasure half = A.chain_prefix(32);
  for (double p : {2.0, 4.0}) {
    const double full = moment(A, p).mean, h = moment(half, p).mean;
    const double drift = std::abs(full - h) / full;
    ok = ok && drift < moment_drift_max;
    det << "moment p=" << fmt(p) << " drift " << fmt(drift, 3) << "; ";
  }
  std::vector<Observable> fam;
  for (const char* s : {"tanh:e1", "sin:e1", "identity:e1", "tanh:e1+e2", "sin:e2", "cos:e1"})
    fam.push_back(parse_observable(s, g));
  const PoincareReport pa = poincare_report(A, fam, 200, master_seed);
  const PoincareReport pb = poincare_report(B, fam, 200, master_seed + 1);
  const double rho_drift = std::abs(pa.rho_hat - pb.rho_hat) / (0.5 * (pa.rho_hat + pb.rho_hat));
  ok = ok && pa.finite() && pb.finite() && rho_drift < rho_seed_drift_max;
  det << "rho_hat " << fmt(pa.rho_hat) << " / " << fmt(pb.rho_hat) << " (drift " << fmt(rho_drift, 3)
      << "); ";

  // linear-model anchor: for linear observables Var<x,w> / |w|_{L1}^2 is known exactly
  const double a = 1.0;
  const ModelSpec ou = presets::ou_linear(g, N, a, 1.0);
  SamplerConfig so;
  so.n_samples = 8192;
  so.chains = 64;
  const EmpiricalMeasure mo = sample_invariant(ou, so, mc_for(dt, 7'000'000));
  const LinearChain lc{a, 1.0, dt};
  std::vector<Observable> lin;
  double rho_exact = 0.0;
  for (const auto& w : {e(g, 1), e(g, 2), e(g, 1) + e(g, 2), e(g, 1) + e(g, 3, 0.5)}) {
    lin.push_back(Observable::cylindrical(ScalarMap::identity(), w));
    double var = 0.0;
    for (std::size_t k = 1; k <= N; ++k) {
      const double c = w.inner(e(g, k));
      var += c * c * lc.stationary(k);
    }
    rho_exact = std::max(rho_exact, var / std::pow(w.l1_norm(), 2));
  }
  const PoincareReport po = poincare_report(mo, lin, 200, master_seed);
  const double anchor = std::abs(po.rho_hat - rho_exact) / rho_exact;
  ok = ok && anchor <= ou_anchor_rel_tol;
  det << "linear anchor " << fmt(po.rho_hat) << " vs " << fmt(rho_exact) << " (rel " << fmt(anchor, 3)
      << "); ";

  const GapFit gf = gap_fit(m, A.chain_prefix(8), phi, {0.0, 0.05, 0.1, 0.15, 0.2}, 32,
                            mc_for(dt, 9'000'000));
  const bool gap_ok = !gf.equilibrated && gf.delta_hat > gap_min_z * gf.delta_se && gf.r2 >= gap_min_r2;
  ok = ok && gap_ok;
  det << "delta_hat " << fmt(gf.delta_hat) << " +- " << fmt(gf.delta_se, 3) << " (R^2 " << fmt(gf.r2, 3)
      << ")";
  return {ok, det.str()};
}

// ---------------------------------------------------------------------------------------------
Outcome criterion11() {
  ExperimentConfig cfg;
  cfg.grid_n = 32;
  cfg.noise_modes = 32;
  cfg.dt = 1e-3;
  cfg.horizon = 1.0;
  cfg.seed = master_seed;
  cfg.states = {{1, 1.0}};
  cfg.observables = {"tanh:e1"};
  const auto pts = ladder_sweep(cfg, 64);
  std::ostringstream det;
  bool ok = true;
  for (const char* axis : {"truncation", "modes", "yosida"}) {
    const bool mono = ladder_monotone(pts, axis);
    ok = ok && mono;
    det << axis << (mono ? " monotone [" : " NOT monotone [");
    for (const auto& p : pts)
      if (p.axis == axis) det << fmt(p.path_distance.mean, 3) << "/" << fmt(p.resolvent_distance.mean, 3) << " ";
    det << "]; ";
  }
  std::size_t eligible = 0, exact = 0;
  for (const auto& p : pts)
    if (p.axis == "truncation") {
      eligible += p.identity_eligible;
      exact += p.identity_exact;
    }
  ok = ok && eligible > 0 && eligible == exact;
  det << "truncation identity exact on " << exact << " of " << eligible << " eligible paths";
  return {ok, det.str()};
}

// ---------------------------------------------------------------------------------------------
std::map<std::string, std::string> csv_contents(const fs::path& dir) {
  std::map<std::string, std::string> out;
  for (const auto& entry : fs::recursive_directory_iterator(dir)) {
    if (!entry.is_regular_file() || entry.path().extension() != ".csv") continue;
    std::ifstream in(entry.path(), std::ios::binary);
    std::stringstream ss;
    ss << in.rdbuf();
    out[fs::relative(entry.path(), dir).string()] = ss.str();
  }
  return out;
}

Outcome criterion12() {
  ExperimentConfig base;
  base.grid_n = 16;
  base.noise_modes = 8;
  base.dt = 2e-3;
  base.horizon = 0.2;
  base.snapshot_times = {0.0, 0.1, 0.2};
  base.trajectories = 128;
  base.times = {0.05, 0.2};
  base.observables = {"tanh:e1", "sin:e1"};
  base.carre_value_trajectories = 200;
  base.carre_gamma_samples = 60;
  base.measure_samples = 128;
  base.chains = 16;
  base.inner_trajectories = 16;
  base.energy_t = 0.1;
  base.ito_t = 0.05;
  base.ladder_modes = {4, 8};
  const fs::path root = fs::path("acceptance_out") / "reproducibility";
  fs::remove_all(root);
  std::ostringstream sink;
  std::size_t files = 0;
  std::vector<std::string> mismatched;
  for (const auto& sub : subcommands()) {
    ExperimentConfig cfg = base;
    if (sub == "ito") {
      cfg.grid_n = 2;
      cfg.noise_modes = 2;
      cfg.truncation_n = 2.0;
      cfg.observables = {"product:e1,e2"};
      cfg.states = {{1, 0.5}};
      cfg.trajectories = 256;
    }
    std::map<std::string, std::string> runs[2];
    for (int k = 0; k < 2; ++k) {
      cfg.threads = k == 0 ? 1 : 8;
      cfg.output_dir = (root / ("threads" + std::to_string(cfg.threads)) / sub).string();
      run_subcommand(sub, cfg, sink);
      runs[k] = csv_contents(cfg.output_dir);
    }
    files += runs[0].size();
    if (runs[0] != runs[1] || runs[0].empty()) mismatched.push_back(sub);
  }
  std::string det = std::to_string(subcommands().size()) + " subcommands, " + std::to_string(files) +
                    " CSV files compared byte for byte at 1 and 8 threads";
  if (!mismatched.empty()) {
    det += "; differing:";
    for (const auto& s : mismatched) det += " " + s;
  }
  return {mismatched.empty(), det};
}

const std::map<int, std::pair<std::string, std::function<Outcome()>>>& criteria() {
  static const std::map<int, std::pair<std::string, std::function<Outcome()>>> c{
      {1, {"spectral exactness", criterion1}},
      {2, {"scheme exactness on the heat equation", criterion2}},
      {3, {"linear-model closed forms", criterion3}},
      {4, {"gradient estimator cross-validation", criterion4}},
      {5, {"gradient decay exponent", criterion5}},
      {6, {"Gamma series", criterion6}},
      {7, {"square-field identity for the resolvent", criterion7}},
      {8, {"Ito formula and square identity", criterion8}},
      {9, {"energy identity", criterion9}},
      {10, {"ergodic diagnostics", criterion10}},
      {11, {"approximation ladder", criterion11}},
      {12, {"reproducibility across thread counts", criterion12}}};
  return c;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"rdlab acceptance suite"};
  std::vector<int> which;
  app.add_option("--criterion,-c", which, "criteria to run (default: all)")->check(CLI::Range(1, 12));
  CLI11_PARSE(app, argc, argv);
  if (which.empty())
    for (const auto& [k, v] : criteria()) which.push_back(k);
  bool all = true;
  for (int k : which) {
    const auto& [name, fn] = criteria().at(k);
    const auto t0 = std::chrono::steady_clock::now();
    Outcome o;
    try {
      o = fn();
    } catch (const std::exception& ex) {
      o = {false, std::string("exception: ") + ex.what()};
    }
    const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    std::cout << "criterion " << k << " " << (o.pass ? "PASS" : "FAIL") << " " << name << ": " << o.detail
              << " [" << fmt(secs, 3) << " s]" << std::endl;
    all = all && o.pass;
  }
  return all ? 0 : 1;
}
