#include "rdlab/ergodic.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <numbers>
#include <random>
#include <sstream>
#include <stdexcept>

#include "rdlab/errors.hpp"

namespace rdlab {

EmpiricalMeasure EmpiricalMeasure::chain_prefix(std::size_t c) const {
  EmpiricalMeasure m = *this;
  m.samples.clear();
  m.chain.clear();
  m.chains = std::min(c, chains);
  for (std::size_t i = 0; i < samples.size(); ++i)
    if (chain[i] < c) {
      m.samples.push_back(samples[i]);
      m.chain.push_back(chain[i]);
    }
  return m;
}

double dissipativity_margin(const ModelSpec& model) {
  return std::numbers::pi * std::numbers::pi - model.effective_reaction().lambda_dissip;
}

namespace {

// per-chain means as independent units
MixingDiagnostic mixing_for(const std::string& name, const EmpiricalMeasure& m,
                            double (*fn)(const Field&)) {
  std::vector<double> sum(m.chains, 0.0), cnt(m.chains, 0.0);
  for (std::size_t i = 0; i < m.samples.size(); ++i) {
    sum[m.chain[i]] += fn(m.samples[i]);
    cnt[m.chain[i]] += 1.0;
  }
  std::vector<double> a, b;
  for (std::size_t c = 0; c < m.chains; ++c) {
    if (cnt[c] == 0.0) continue;
    (c % 2 == 0 ? a : b).push_back(sum[c] / cnt[c]);
  }
  MixingDiagnostic d;
  d.functional = name;
  if (a.size() < 2 || b.size() < 2) {
    d.pass = true;
    return d;
  }
  const MCEstimate ea = summarize(a), eb = summarize(b);
  d.mean_from_zero = ea.mean;
  d.mean_from_2e1 = eb.mean;
  d.joint_std_error = std::hypot(ea.std_error, eb.std_error);
  d.pass = std::abs(ea.mean - eb.mean) <= 3.0 * d.joint_std_error + 1e-15;
  return d;
}

double first_mode(const Field& x) { return x.inner(eigenpair(x.grid(), 1).first); }
double h_norm_sq(const Field& x) { return x.inner(x); }

}  // namespace

EmpiricalMeasure sample_invariant(const ModelSpec& model, const SamplerConfig& cfg,
                                  const McConfig& mc) {
  const double alpha = dissipativity_margin(model);
  if (!(alpha > 0.0))
    throw HypothesisViolation("invariant sampling needs pi^2 - sup f' > 0");
  if (cfg.chains < 1 || cfg.n_samples < 1) throw std::invalid_argument("sampler: empty budget");
  EmpiricalMeasure m;
  m.burn_in = cfg.burn_in > 0.0 ? cfg.burn_in : 5.0 / alpha;
  m.thin = cfg.thin > 0.0 ? cfg.thin : 1.0 / alpha;
  m.chains = cfg.chains;
  m.seed = mc.seed;
  m.dt = mc.dt;
  const std::size_t per_chain = (cfg.n_samples + cfg.chains - 1) / cfg.chains;
  const std::size_t burn = snap_to_step(m.burn_in, mc.dt);
  const std::size_t stride = std::max<std::size_t>(1, snap_to_step(m.thin, mc.dt));
  const Stepper st(model, mc.dt, mc.blowup_ceiling);
  const Field start1 = 2.0 * eigenpair(model.grid, 1).first;
  auto runs = map_trajectories<std::vector<Field>>(cfg.chains, mc.threads, [&](std::size_t c) {
    Integrator it(st, c % 2 == 0 ? Field(model.grid) : start1, trajectory_stream(model, mc, c));
    it.advance(burn);
    std::vector<Field> out;
    for (std::size_t k = 0; k < per_chain; ++k) {
      if (k > 0) it.advance(stride);
      out.push_back(it.u());
    }
    return out;
  });
  for (std::size_t c = 0; c < runs.size(); ++c) {
    if (!runs[c]) {
      ++m.aborted_chains;
      continue;
    }
    for (auto& f : *runs[c]) {
      if (m.samples.size() == cfg.n_samples) break;
      m.samples.push_back(std::move(f));
      m.chain.push_back(c);
    }
  }
  if (static_cast<double>(m.aborted_chains) > 0.01 * static_cast<double>(cfg.chains))
    throw BlowUpError("invariant sampling: more than 1% of chains blew up", 0, 0.0);
  m.mixing.push_back(mixing_for("mode1", m, first_mode));
  m.mixing.push_back(mixing_for("h_norm_sq", m, h_norm_sq));
  return m;
}

MCEstimate moment(const EmpiricalMeasure& measure, double p) {
  if (!(p >= 1.0)) throw DomainError("moment: p must be at least 1");
  std::vector<double> v;
  for (const auto& x : measure.samples) v.push_back(std::pow(x.sup_norm(), p));
  return summarize(v);
}

MCEstimate measure_mean(const EmpiricalMeasure& measure, const Observable& phi) {
  std::vector<double> v;
  for (const auto& x : measure.samples) v.push_back(phi(x));
  return summarize(v);
}

IdentityReport invariance_check(const ModelSpec& model, const EmpiricalMeasure& measure,
                                const Observable& phi, double t, const McConfig& mc) {
  const Stepper st(model, mc.dt, mc.blowup_ceiling);
  const std::size_t n = snap_to_step(t, mc.dt);
  auto slots = map_trajectories<double>(measure.size(), mc.threads, [&](std::size_t s) {
    Integrator it(st, measure.samples[s], trajectory_stream(model, mc, s));
    it.advance(n);
    return phi(it.u());
  });
  std::vector<double> a, b, d;
  std::size_t aborted = 0;
  for (std::size_t s = 0; s < slots.size(); ++s) {
    if (!slots[s]) {
      ++aborted;
      continue;
    }
    a.push_back(*slots[s]);
    b.push_back(phi(measure.samples[s]));
    d.push_back(a.back() - b.back());
  }
  IdentityReport rep;
  rep.id = "invariance";
  rep.lhs = summarize(a, aborted);
  rep.rhs = summarize(b);
  rep.joint_std_error = summarize(d).std_error;
  rep.metadata = {{"t", static_cast<double>(n) * mc.dt}};
  rep.decide();
  return rep;
}

bool PoincareReport::finite() const {
  return std::isfinite(rho_hat) && std::isfinite(rho_se);
}

namespace {

double max_ratio(const std::vector<std::vector<double>>& vals,
                 const std::vector<std::vector<double>>& energies,
                 const std::vector<std::size_t>& idx, const std::vector<bool>& excluded) {
  double best = 0.0;
  const double n = static_cast<double>(idx.size());
  for (std::size_t f = 0; f < vals.size(); ++f) {
    if (excluded[f]) continue;
    double s = 0.0, ss = 0.0, e = 0.0;
    for (auto i : idx) {
      s += vals[f][i];
      ss += vals[f][i] * vals[f][i];
      e += energies[f][i];
    }
    const double var = (ss - s * s / n) / (n - 1.0);
    if (e > 0.0) best = std::max(best, var / (e / n));
  }
  return best;
}

}  // namespace

PoincareReport poincare_report(const EmpiricalMeasure& measure,
                               const std::vector<Observable>& family, std::size_t bootstrap,
                               std::uint64_t seed) {
  if (measure.size() < 2) throw std::invalid_argument("poincare: need at least 2 samples");
  PoincareReport rep;
  std::vector<std::vector<double>> vals, energies;
  std::vector<bool> excluded;
  for (const auto& phi : family) {
    if (!phi.has_gradient()) throw PreconditionError("poincare: observable needs a gradient");
    std::vector<double> v, e, dev;
    for (const auto& x : measure.samples) {
      v.push_back(phi(x));
      const double g = phi.gradient(x).norm();
      e.push_back(g * g);
    }
    const MCEstimate mean = summarize(v);
    for (double a : v) dev.push_back((a - mean.mean) * (a - mean.mean));
    PoincareRow row;
    row.name = phi.name();
    row.variance = summarize(dev);
    const double nn = static_cast<double>(v.size());
    row.variance.mean *= nn / (nn - 1.0);
    row.energy = summarize(e);
    row.excluded = row.energy.mean <= 1e-14;
    row.ratio = row.excluded ? 0.0 : row.variance.mean / row.energy.mean;
    if (!row.excluded) rep.rho_hat = std::max(rep.rho_hat, row.ratio);
    rep.rows.push_back(row);
    vals.push_back(std::move(v));
    energies.push_back(std::move(e));
    excluded.push_back(row.excluded);
  }
  // resample whole chains
  std::vector<std::vector<std::size_t>> by_chain(measure.chains);
  for (std::size_t i = 0; i < measure.size(); ++i) by_chain[measure.chain[i]].push_back(i);
  std::erase_if(by_chain, [](const auto& c) { return c.empty(); });
  if (by_chain.size() >= 2 && bootstrap >= 2) {
    std::mt19937_64 rng(seed);
    std::uniform_int_distribution<std::size_t> pick(0, by_chain.size() - 1);
    std::vector<double> boot;
    for (std::size_t b = 0; b < bootstrap; ++b) {
      std::vector<std::size_t> idx;
      for (std::size_t c = 0; c < by_chain.size(); ++c) {
        const auto& ch = by_chain[pick(rng)];
        idx.insert(idx.end(), ch.begin(), ch.end());
      }
      if (idx.size() >= 2) boot.push_back(max_ratio(vals, energies, idx, excluded));
    }
    double m = 0.0;
    for (double v : boot) m += v;
    m /= static_cast<double>(boot.size());
    double s = 0.0;
    for (double v : boot) s += (v - m) * (v - m);
    rep.rho_se = std::sqrt(s / static_cast<double>(boot.size() - 1));
  }
  return rep;
}

namespace {

struct ExpFit {
  double rate = 0.0, rate_se = 0.0, r2 = 0.0;
  bool ok = false;
};

// log y = a - rate t, weights from relative errors
ExpFit fit_exponential(const std::vector<double>& t, const std::vector<MCEstimate>& y) {
  std::vector<double> xs, ys, ws;
  for (std::size_t i = 0; i < t.size(); ++i) {
    if (!(y[i].mean > 2.0 * y[i].std_error) || !(y[i].mean > 0.0)) continue;
    xs.push_back(t[i]);
    ys.push_back(std::log(y[i].mean));
    const double rel = y[i].std_error / y[i].mean;
    ws.push_back(rel > 0.0 ? 1.0 / (rel * rel) : 1e12);
  }
  ExpFit f;
  if (xs.size() < 2) return f;
  const LinearFit lf = weighted_linear_fit(xs, ys, ws);
  f.rate = -lf.slope;
  f.rate_se = lf.slope_se;
  f.r2 = lf.r2;
  f.ok = true;
  return f;
}

}  // namespace

GapFit gap_fit(const ModelSpec& model, const EmpiricalMeasure& measure, const Observable& phi,
               const std::vector<double>& t_grid, std::size_t n_inner, const McConfig& mc) {
  if (n_inner < 2) throw std::invalid_argument("gap_fit: need at least 2 inner trajectories");
  GapFit g;
  const MCEstimate bar = measure_mean(measure, phi);
  g.phi_bar = bar.mean;
  g.phi_bar_se = bar.std_error;
  const Stepper st(model, mc.dt, mc.blowup_ceiling);
  std::vector<std::size_t> steps;
  for (double t : t_grid) steps.push_back(snap_to_step(t, mc.dt));
  const std::size_t last = steps.empty() ? 0 : *std::max_element(steps.begin(), steps.end());

  const auto per = parallel_map<std::vector<double>>(measure.size(), mc.threads, [&](std::size_t s) {
    const Field& x = measure.samples[s];
    std::vector<double> sum(steps.size(), 0.0), sq(steps.size(), 0.0);
    std::size_t used = 0;
    for (std::size_t k = 0; k < n_inner; ++k) {
      try {
        Integrator it(st, x, trajectory_stream(model, mc, s * n_inner + k));
        std::vector<double> v(steps.size());
        for (std::size_t step = 0;; ++step) {
          for (std::size_t q = 0; q < steps.size(); ++q)
            if (steps[q] == step) v[q] = phi(it.u()) - g.phi_bar;
          if (step == last) break;
          it.step();
        }
        for (std::size_t q = 0; q < v.size(); ++q) {
          sum[q] += v[q];
          sq[q] += v[q] * v[q];
        }
        ++used;
      } catch (const BlowUpError&) {
      }
    }
    if (used < 2) throw BlowUpError("gap_fit: inner trajectories aborted", 0, 0.0);
    std::vector<double> out(steps.size());
    for (std::size_t q = 0; q < steps.size(); ++q) {
      const double c = phi(x) - g.phi_bar;
      out[q] = steps[q] == 0 ? c * c : unbiased_square_of_mean(sum[q], sq[q], used);
    }
    return out;
  });
  for (std::size_t q = 0; q < steps.size(); ++q) {
    std::vector<double> col;
    for (const auto& p : per) col.push_back(p[q]);
    MCEstimate e = summarize(col);
    e.std_error += g.phi_bar_se * g.phi_bar_se;
    g.t.push_back(static_cast<double>(steps[q]) * mc.dt);
    g.d.push_back(e);
  }
  const ExpFit f = fit_exponential(g.t, g.d);
  g.equilibrated = !f.ok;
  g.delta_hat = f.rate;
  g.delta_se = f.rate_se;
  g.r2 = f.r2;
  return g;
}

DecayFit uniform_gradient_decay(const ModelSpec& model, const Observable& phi,
                                const std::vector<double>& t_grid, const std::vector<Field>& x_set,
                                std::size_t n_traj, const McConfig& mc) {
  if (x_set.empty()) throw std::invalid_argument("gradient decay: empty state set");
  DecayFit d;
  std::vector<std::vector<GradientNormEstimate>> per_x;
  for (const auto& x : x_set)
    per_x.push_back(gradient_dual_norm(model, phi, x, t_grid, n_traj, mc, GradientRoute::tangent));
  for (std::size_t k = 0; k < t_grid.size(); ++k) {
    MCEstimate best = per_x[0][k].norm;
    for (const auto& px : per_x)
      if (px[k].norm.mean > best.mean) best = px[k].norm;
    d.t.push_back(per_x[0][k].t);
    d.sup_norm.push_back(best);
  }
  for (std::size_t k = 0; k + 1 < d.t.size(); ++k) {
    const auto& a = d.sup_norm[k];
    const auto& b = d.sup_norm[k + 1];
    if (d.t[k + 1] > d.t[k] &&
        b.mean - a.mean > 3.0 * std::hypot(a.std_error, b.std_error) + 1e-15)
      d.monotone = false;
  }
  const ExpFit f = fit_exponential(d.t, d.sup_norm);
  d.theta_hat = f.rate;
  d.theta_se = f.rate_se;
  d.r2 = f.r2;
  return d;
}

void save_measure(const std::string& path, const EmpiricalMeasure& m) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write " + path);
  out << "# config_hash=" << m.config_hash << "\n";
  out << "# seed=" << m.seed << "\n";
  out << "# burn_in=" << m.burn_in << " thin=" << m.thin << " chains=" << m.chains
      << " dt=" << m.dt << "\n";
  const std::size_t n = m.samples.empty() ? 0 : m.samples.front().size();
  out << "sample,chain";
  for (std::size_t j = 0; j < n; ++j) out << ",u" << j;
  out << "\n";
  char buf[32];
  for (std::size_t i = 0; i < m.samples.size(); ++i) {
    out << i << "," << m.chain[i];
    for (std::size_t j = 0; j < n; ++j) {
      std::snprintf(buf, sizeof buf, "%.17g", m.samples[i][j]);
      out << "," << buf;
    }
    out << "\n";
  }
}

EmpiricalMeasure load_measure(const std::string& path, const GridPtr& grid,
                              std::uint64_t expected_hash) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot read measure file " + path);
  EmpiricalMeasure m;
  std::string line;
  bool hash_seen = false;
  while (std::getline(in, line)) {
    if (line.rfind("# config_hash=", 0) == 0) {
      m.config_hash = std::stoull(line.substr(14));
      hash_seen = true;
      if (m.config_hash != expected_hash)
        throw ConfigError("measure file " + path + " was sampled under a different configuration");
      continue;
    }
    if (line.rfind("# seed=", 0) == 0) {
      m.seed = std::stoull(line.substr(7));
      continue;
    }
    if (line.rfind("# burn_in=", 0) == 0) {
      std::istringstream ss(line.substr(2));
      std::string tok;
      while (ss >> tok) {
        const auto eq = tok.find('=');
        const std::string key = tok.substr(0, eq);
        const double val = std::stod(tok.substr(eq + 1));
        if (key == "burn_in") m.burn_in = val;
        if (key == "thin") m.thin = val;
        if (key == "chains") m.chains = static_cast<std::size_t>(val);
        if (key == "dt") m.dt = val;
      }
      continue;
    }
    if (line.empty() || line[0] == '#' || line.rfind("sample", 0) == 0) continue;
    std::istringstream ss(line);
    std::string cell;
    std::getline(ss, cell, ',');
    std::getline(ss, cell, ',');
    const std::size_t chain = std::stoul(cell);
    std::vector<double> v;
    while (std::getline(ss, cell, ',')) v.push_back(std::stod(cell));
    if (v.size() != grid->size()) throw ConfigError("measure file grid size mismatch");
    m.samples.emplace_back(grid, std::move(v));
    m.chain.push_back(chain);
  }
  if (!hash_seen) throw ConfigError("measure file " + path + " has no config hash");
  return m;
}

}  // namespace rdlab
