#include "rdlab/flows.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>
#include <stdexcept>

#include "rdlab/errors.hpp"

namespace rdlab {

std::size_t snap_to_step(double t, double dt) {
  if (!(t >= 0.0)) throw DomainError("snapshot time must be non-negative");
  return static_cast<std::size_t>(std::llround(t / dt));
}

Stepper::Stepper(const ModelSpec& model, double dt, double blowup_ceiling)
    : model_(model), n_(model.grid->size()), dt_(dt), ceiling_(blowup_ceiling) {
  if (!(dt > 0.0)) throw DomainError("Stepper: dt must be positive");
  reaction_ = model.effective_reaction();
  multiplier_.resize(n_);
  mode_rate_.resize(n_);
  for (std::size_t k = 0; k < n_; ++k) {
    mode_rate_[k] = yosida_multiplier(k + 1, model.yosida_k);
    multiplier_[k] = std::exp(dt * mode_rate_[k]);
  }
  const auto& tr = sine_transform(n_);
  std::vector<double> unit(n_), col(n_);
  propagator_.assign(n_ * n_, 0.0);
  for (std::size_t i = 0; i < n_; ++i) {
    std::fill(unit.begin(), unit.end(), 0.0);
    unit[i] = 1.0;
    tr.forward(unit, col);
    for (std::size_t k = 0; k < n_; ++k) col[k] *= multiplier_[k];
    tr.inverse(col, unit);
    std::copy(unit.begin(), unit.end(), propagator_.begin() + static_cast<long>(i * n_));
  }
  for (std::size_t i = 0; i < n_; ++i)  // symmetrize round-off
    for (std::size_t j = i + 1; j < n_; ++j) {
      const double a = 0.5 * (propagator_[i * n_ + j] + propagator_[j * n_ + i]);
      propagator_[i * n_ + j] = propagator_[j * n_ + i] = a;
    }
  const std::size_t m = model.noise_modes;
  synthesis_.assign(n_ * m, 0.0);
  for (std::size_t i = 0; i < m; ++i) {
    const Field e = eigenpair(model.grid, i + 1).first;
    std::copy(e.values().begin(), e.values().end(), synthesis_.begin() + static_cast<long>(i * n_));
  }
}

void Stepper::propagate(std::span<double> v, std::span<double> scratch) const {
  double* __restrict out = scratch.data();
  std::fill(out, out + n_, 0.0);
  for (std::size_t j = 0; j < n_; ++j) {
    const double a = v[j];
    const double* __restrict col = propagator_.data() + j * n_;
    for (std::size_t i = 0; i < n_; ++i) out[i] += a * col[i];
  }
  std::copy(out, out + n_, v.begin());
}

void Stepper::propagate_steps(std::span<double> v, std::span<double> scratch,
                              std::size_t m) const {
  const auto& tr = sine_transform(n_);
  tr.forward(v, scratch);
  const double t = dt_ * static_cast<double>(m);
  for (std::size_t k = 0; k < n_; ++k) scratch[k] *= std::exp(t * mode_rate_[k]);
  tr.inverse(scratch, v);
}

void Stepper::noise_field(std::span<const double> dbeta, std::span<double> w,
                          std::span<double> scratch) const {
  (void)scratch;
  double* __restrict out = w.data();
  std::fill(out, out + n_, 0.0);
  for (std::size_t i = 0; i < dbeta.size(); ++i) {
    const double a = dbeta[i];
    const double* __restrict col = synthesis_.data() + i * n_;
    for (std::size_t j = 0; j < n_; ++j) out[j] += a * col[j];
  }
}

Integrator::Integrator(const Stepper& stepper, const Field& x, NoiseStream stream)
    : stepper_(&stepper), stream_(std::move(stream)), u_(x) {
  const std::size_t n = stepper.size();
  if (x.size() != n) throw std::invalid_argument("Integrator: initial field not on model grid");
  if (stream_.modes() != stepper.noise_modes())
    throw std::invalid_argument("Integrator: noise stream mode count differs from model");
  if (std::abs(stream_.dt() - stepper.dt()) > 1e-12 * stepper.dt())
    throw std::invalid_argument("Integrator: noise stream dt differs from scheme dt");
  dbeta_.resize(stream_.modes());
  for (auto* v : {&w_, &scratch_, &fv_, &gv_, &d1f_, &d1g_, &d2f_, &d2g_, &buf_}) v->assign(n, 0.0);
}

std::size_t Integrator::add_tangent(const Field& h) {
  // a tangent added after k steps starts at time k dt
  require_same_grid(u_, h);
  eta_.push_back(h);
  bel_.push_back(0.0);
  return eta_.size() - 1;
}

std::size_t Integrator::add_second(std::size_t a, std::size_t b) {
  if (step_ != 0) throw std::logic_error("add_second after stepping");
  if (a >= eta_.size() || b >= eta_.size())
    throw std::invalid_argument("add_second: tangent flow missing");
  zeta_.push_back({a, b, Field(u_.grid())});
  return zeta_.size() - 1;
}

void Integrator::enable_bel() {
  if (!(stepper_->diffusion().beta_g > 0.0))
    throw HypothesisViolation("BEL integral needs a diffusion bounded away from zero");
  bel_on_ = true;
}

void Integrator::enable_tape(bool with_bel_forcing) {
  if (with_bel_forcing && !(stepper_->diffusion().beta_g > 0.0))
    throw HypothesisViolation("BEL forcing needs a diffusion bounded away from zero");
  tape_on_ = true;
  tape_bel_ = with_bel_forcing;
  tape_.n = stepper_->size();
}

void Integrator::drop_tangents() {
  eta_.clear();
  zeta_.clear();
  bel_.clear();
  bel_on_ = false;
}

void Integrator::step() {
  const Stepper& st = *stepper_;
  const std::size_t n = st.size();
  const double dt = st.dt();
  const auto& xi = st.grid()->points();
  const auto& f = st.reaction();
  const auto& g = st.diffusion();

  stream_.increments(step_, dbeta_);
  st.noise_field(dbeta_, w_, scratch_);

  const bool d1 = !eta_.empty() || tape_on_;
  const bool d2 = !zeta_.empty();
  for (std::size_t j = 0; j < n; ++j) {
    const double rho = u_[j];
    fv_[j] = f.f(xi[j], rho);
    gv_[j] = g.g(xi[j], rho);
    if (d1) {
      d1f_[j] = f.df(xi[j], rho);
      d1g_[j] = g.dg(xi[j], rho);
    }
    if (d2) {
      d2f_[j] = f.d2f(xi[j], rho);
      d2g_[j] = g.d2g(xi[j], rho);
    }
  }

  if (bel_on_) {
    const double h = st.grid()->spacing();
    for (std::size_t a = 0; a < eta_.size(); ++a) {
      double s = 0.0;
      for (std::size_t j = 0; j < n; ++j) s += eta_[a][j] * w_[j] / gv_[j];
      bel_[a] += h * s;
    }
  }

  if (tape_on_) {
    for (std::size_t j = 0; j < n; ++j) {
      tape_.jac_diag.push_back(1.0 + dt * d1f_[j] + d1g_[j] * w_[j]);
      tape_.states.push_back(u_[j]);
      if (tape_bel_) tape_.bel_force.push_back(w_[j] / gv_[j]);
    }
  }

  for (auto& z : zeta_) {
    const Field& ea = eta_[z.a];
    const Field& eb = eta_[z.b];
    for (std::size_t j = 0; j < n; ++j)
      z.field[j] = z.field[j] * (1.0 + dt * d1f_[j] + d1g_[j] * w_[j]) +
                   (dt * d2f_[j] + d2g_[j] * w_[j]) * ea[j] * eb[j];
    st.propagate(z.field.values(), scratch_);
  }

  for (auto& e : eta_) {
    for (std::size_t j = 0; j < n; ++j) e[j] *= 1.0 + dt * d1f_[j] + d1g_[j] * w_[j];
    st.propagate(e.values(), scratch_);
  }

  for (std::size_t j = 0; j < n; ++j) u_[j] += dt * fv_[j] + gv_[j] * w_[j];
  st.propagate(u_.values(), scratch_);
  ++step_;

  const double sup = u_.sup_norm();
  if (!(sup <= st.blowup_ceiling())) {
    std::ostringstream msg;
    msg << "blow-up guard: |u|_E = " << sup << " at step " << step_ << " (ceiling "
        << st.blowup_ceiling() << ")";
    throw BlowUpError(msg.str(), step_, sup);
  }
}

void Integrator::advance(std::size_t steps) {
  for (std::size_t i = 0; i < steps; ++i) step();
}

Field adjoint_sweep(const Stepper& stepper, const AdjointTape& tape, std::size_t end,
                    const std::function<void(std::size_t, std::span<double>)>& forcing) {
  if (end > tape.steps()) throw std::invalid_argument("adjoint_sweep: tape too short");
  const std::size_t n = stepper.size();
  Field acc(stepper.grid());
  std::vector<double> scratch(n);
  forcing(end, acc.values());
  for (std::size_t k = end; k-- > 0;) {
    stepper.propagate(acc.values(), scratch);
    const auto d = tape.row(tape.jac_diag, k);
    for (std::size_t j = 0; j < n; ++j) acc[j] *= d[j];
    forcing(k, acc.values());
  }
  return acc;
}

PathBundle evolve(const Stepper& stepper, const Field& x, const SchemeConfig& cfg,
                  const NoiseStream& stream, const FlowRequest& request) {
  if (!(cfg.horizon >= 0.0)) throw DomainError("evolve: negative horizon");
  const double dt = stepper.dt();
  const std::size_t total = snap_to_step(cfg.horizon, dt);
  std::vector<std::size_t> snaps;
  if (cfg.snapshot_times.empty()) {
    snaps.push_back(total);
  } else {
    for (double t : cfg.snapshot_times) {
      if (t > cfg.horizon + 0.5 * dt) throw DomainError("snapshot time beyond horizon");
      snaps.push_back(snap_to_step(t, dt));
    }
  }
  std::sort(snaps.begin(), snaps.end());
  snaps.erase(std::unique(snaps.begin(), snaps.end()), snaps.end());

  Integrator it(stepper, x, stream);
  for (const auto& h : request.directions) it.add_tangent(h);
  for (auto [a, b] : request.second) it.add_second(a, b);
  if (request.bel) it.enable_bel();

  PathBundle pb{{}, {}, {}, {}, {}, 0.0, {}, {}, stream};
  pb.eta.resize(it.tangent_count());
  pb.zeta.resize(it.second_count());
  pb.bel.resize(request.bel ? it.tangent_count() : 0);
  pb.eta_sup.assign(it.tangent_count(), 0.0);
  pb.zeta_sup.assign(it.second_count(), 0.0);

  auto monitor = [&] {
    pb.u_sup = std::max(pb.u_sup, it.u().sup_norm());
    for (std::size_t a = 0; a < it.tangent_count(); ++a)
      pb.eta_sup[a] = std::max(pb.eta_sup[a], it.eta(a).sup_norm());
    for (std::size_t p = 0; p < it.second_count(); ++p)
      pb.zeta_sup[p] = std::max(pb.zeta_sup[p], it.zeta(p).sup_norm());
  };
  auto record = [&] {
    pb.times.push_back(it.time());
    pb.u.push_back(it.u());
    for (std::size_t a = 0; a < it.tangent_count(); ++a) pb.eta[a].push_back(it.eta(a));
    for (std::size_t p = 0; p < it.second_count(); ++p) pb.zeta[p].push_back(it.zeta(p));
    for (std::size_t a = 0; a < pb.bel.size(); ++a) pb.bel[a].push_back(it.bel(a));
  };

  std::size_t next = 0;
  const std::size_t last = std::max(total, snaps.back());
  for (std::size_t s = 0;; ++s) {
    monitor();
    while (next < snaps.size() && snaps[next] == s) {
      record();
      ++next;
    }
    if (s == last) break;
    it.step();
  }
  return pb;
}

PathBundle evolve_primary(const ModelSpec& model, const Field& x, const SchemeConfig& cfg,
                          const NoiseStream& stream) {
  Stepper st(model, cfg.dt, cfg.blowup_ceiling);
  return evolve(st, x, cfg, stream);
}

PathBundle evolve_tangent(const ModelSpec& model, const Field& x, const SchemeConfig& cfg,
                          const NoiseStream& stream, const Field& h, bool with_bel) {
  Stepper st(model, cfg.dt, cfg.blowup_ceiling);
  FlowRequest req;
  req.directions.push_back(h);
  req.bel = with_bel;
  return evolve(st, x, cfg, stream, req);
}

PathBundle evolve_second(const ModelSpec& model, const Field& x, const SchemeConfig& cfg,
                         const NoiseStream& stream, const Field& h, const Field& k) {
  Stepper st(model, cfg.dt, cfg.blowup_ceiling);
  FlowRequest req;
  req.directions = {h, k};
  req.second = {{0, 1}};
  return evolve(st, x, cfg, stream, req);
}

const std::vector<double>& bel_accumulate(const PathBundle& bundle, std::size_t a) {
  if (a >= bundle.bel.size())
    throw PreconditionError("bel_accumulate: bundle carries no BEL integral for this direction");
  return bundle.bel[a];
}

PathBundle evolve_from_H(const ModelSpec& model, const Field& x_h, std::size_t n,
                         const SchemeConfig& cfg, const NoiseStream& stream) {
  return evolve_primary(model, mollify(x_h, n), cfg, stream);
}

double mollifier_pair_distance(const ModelSpec& model, const Field& x_h, std::size_t n,
                               const SchemeConfig& cfg, const NoiseStream& stream) {
  Stepper st(model, cfg.dt, cfg.blowup_ceiling);
  Integrator a(st, mollify(x_h, n), stream);
  Integrator b(st, mollify(x_h, 2 * n), stream);
  const std::size_t total = snap_to_step(cfg.horizon, cfg.dt);
  double dist = (a.u() - b.u()).l2_norm();
  for (std::size_t s = 0; s < total; ++s) {
    a.step();
    b.step();
    dist = std::max(dist, (a.u() - b.u()).l2_norm());
  }
  return dist;
}

}  // namespace rdlab
