#include "rdlab/experiments.hpp"

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <ostream>
#include <stdexcept>

#include "rdlab/ergodic.hpp"
#include "rdlab/errors.hpp"
#include "rdlab/flows.hpp"
#include "rdlab/identity_checks.hpp"
#include "rdlab/output.hpp"
#include "rdlab/scalar_oracle.hpp"
#include "rdlab/semigroup.hpp"

namespace rdlab {

namespace fs = std::filesystem;

const std::vector<std::string>& subcommands() {
  static const std::vector<std::string> names{"validate", "simulate", "gradient", "carre", "ito",
                                              "ergodic",  "poincare", "gap",      "ladder"};
  return names;
}

namespace {

struct Run {
  const ExperimentConfig& cfg;
  std::ostream& log;
  fs::path dir;
  std::vector<std::string> files;

  CsvWriter csv(const std::string& name, const std::vector<std::string>& columns) {
    files.push_back(name);
    return CsvWriter(dir / name, cfg, columns);
  }
};

std::string profile_name(const std::string& spec) { return spec.substr(0, spec.find(':')); }

double fd_z(double diff_mean, double se, double budget) {
  const double d = std::max(0.0, std::abs(diff_mean) - budget);
  return se > 0.0 ? d / se : (d == 0.0 ? 0.0 : infinity);
}

int cmd_validate(Run& r) {
  const ModelSpec model = build_model(r.cfg);
  auto out = r.csv("hypotheses.csv",
                   {"item", "pass", "measured", "declared", "witness_rho", "witness_xi", "message"});
  for (const auto& it : model.hypotheses.items) {
    out.cell(it.id).cell(it.pass).cell(it.measured).cell(it.declared).cell(it.witness_rho)
        .cell(it.witness_xi).cell("\"" + it.message + "\"");
    out.end_row();
    r.log << (it.pass ? "pass  " : "FAIL  ") << it.id << "  " << it.message << "\n";
  }
  const bool h1 = model.hypotheses.passes("H1");
  r.log << "H1 " << (h1 ? "pass" : "fail") << ", H2 "
        << (model.hypotheses.passes("H2") ? "pass" : "fail") << ", H3 "
        << (model.hypotheses.passes("H3") ? "pass" : "fail") << "\n";
  return h1 ? exit_ok : exit_hypothesis;
}

int cmd_simulate(Run& r) {
  const ModelSpec model = build_model(r.cfg);
  if (!model.hypotheses.passes("H1"))
    throw HypothesisViolation("simulate: reaction growth conditions (H1) fail for this model");
  const Field x = build_state(model.grid, r.cfg.states.front());
  SchemeConfig sc;
  sc.dt = r.cfg.dt;
  sc.horizon = r.cfg.horizon;
  sc.snapshot_times = r.cfg.snapshot_times;
  sc.blowup_ceiling = r.cfg.blowup_ceiling;
  FlowRequest req;
  req.directions.push_back(eigenpair(model.grid, r.cfg.direction_mode).first);
  const NoiseStream stream(r.cfg.seed, 0, model.noise_modes, r.cfg.dt);
  auto out = r.csv("paths.csv", {"t", "xi_index", "value", "series"});
  try {
    const PathBundle pb = evolve(Stepper(model, sc.dt, sc.blowup_ceiling), x, sc, stream, req);
    for (std::size_t s = 0; s < pb.times.size(); ++s) {
      for (std::size_t j = 0; j < pb.u[s].size(); ++j) {
        out.cell(pb.times[s]).cell(j).cell(pb.u[s][j]).cell("u");
        out.end_row();
      }
      for (std::size_t j = 0; j < pb.eta[0][s].size(); ++j) {
        out.cell(pb.times[s]).cell(j).cell(pb.eta[0][s][j]).cell("eta");
        out.end_row();
      }
    }
    auto mon = r.csv("monitors.csv", {"quantity", "value"});
    mon.cell("u_sup").cell(pb.u_sup);
    mon.end_row();
    mon.cell("eta_sup").cell(pb.eta_sup[0]);
    mon.end_row();
    r.log << "simulated " << pb.times.size() << " snapshots, sup|u|_E = " << pb.u_sup << "\n";
  } catch (const BlowUpError& e) {
    r.log << "blow-up: " << e.what() << "\n";
    return exit_failed;
  }
  return exit_ok;
}

int cmd_gradient(Run& r) {
  const ModelSpec model = build_model(r.cfg);
  const Field h = eigenpair(model.grid, r.cfg.direction_mode).first;
  auto out = r.csv("gradient.csv",
                   {"observable", "state", "t", "bel", "bel_se", "tangent", "tangent_se", "fd", "fd_se",
                    "fd_bias_budget", "z_bel_tangent", "z_fd_tangent", "z_bel_fd", "agree"});
  std::vector<double> zs;
  for (const auto& spec : r.cfg.observables) {
    const Observable phi = parse_observable(spec, model.grid);
    for (const auto& st : r.cfg.states) {
      const auto rows = compare_gradients(model, phi, build_state(model.grid, st), h, r.cfg.times,
                                          r.cfg.trajectories, r.cfg.fd_eps, r.cfg.mc());
      for (const auto& row : rows) {
        const double z1 = fd_z(row.bel.mean - row.tangent.mean, row.se_bel_tangent, 0.0);
        const double z2 = fd_z(row.fd.mean - row.tangent.mean, row.se_fd_tangent, row.fd_bias_budget);
        const double z3 = fd_z(row.bel.mean - row.fd.mean, row.se_bel_fd, row.fd_bias_budget);
        zs.insert(zs.end(), {z1, z2, z3});
        out.cell(spec).cell(state_label(st)).cell(row.t).cell(row.bel.mean).cell(row.bel.std_error)
            .cell(row.tangent.mean).cell(row.tangent.std_error).cell(row.fd.mean)
            .cell(row.fd.std_error).cell(row.fd_bias_budget).cell(z1).cell(z2).cell(z3)
            .cell(row.all_agree());
        out.end_row();
      }
    }
  }
  const bool ok = battery_pass(zs);
  r.log << "gradient comparisons: " << zs.size() << ", battery " << (ok ? "pass" : "FAIL") << "\n";
  return ok ? exit_ok : exit_failed;
}

int cmd_carre(Run& r) {
  const ModelSpec model = build_model(r.cfg);
  if (r.cfg.carre_oracle) {
    const ScalarDiffusion sd = one_mode_reduction(model);
    const ScalarMap chi = ScalarMap::by_name(profile_name(r.cfg.observables.front()));
    const double check = 0.5 * r.cfg.oracle_half_width;
    const ScalarCarreCheck c = scalar_carre_check(sd, r.cfg.lambda, chi.f, r.cfg.oracle_half_width,
                                                  r.cfg.oracle_cells, check);
    auto out = r.csv("carre_oracle.csv", {"y", "phi", "phi_sq", "composite", "abs_error"});
    const std::size_t stride = std::max<std::size_t>(1, c.phi.y.size() / 200);
    for (std::size_t i = 0; i < c.phi.y.size(); i += stride) {
      if (std::abs(c.phi.y[i]) > check) continue;
      out.cell(c.phi.y[i]).cell(c.phi.values[i]).cell(c.phi_sq.values[i])
          .cell(c.composite.values[i]).cell(std::abs(c.phi_sq.values[i] - c.composite.values[i]));
      out.end_row();
    }
    const bool ok = c.max_abs_error <= 1e-3;
    auto sum = r.csv("carre.csv", {"identity", "x", "lhs", "rhs", "se", "pass"});
    sum.cell("carre_one_mode_oracle").cell("max|y|<=" + format_number(check)).cell(c.max_abs_error)
        .cell(0.0).cell(0.0).cell(ok);
    sum.end_row();
    r.log << "one-mode oracle: max |phi^2 - composite| = " << c.max_abs_error << " ("
          << (ok ? "pass" : "FAIL") << ")\n";
    return ok ? exit_ok : exit_failed;
  }
  if (!model.hypotheses.passes("H2"))
    throw HypothesisViolation("carre: the diffusion must be bounded away from zero");
  const Observable psi = parse_observable(r.cfg.observables.front(), model.grid);
  CarreBudget b;
  b.n_value = r.cfg.carre_value_trajectories;
  b.n_gamma = r.cfg.carre_gamma_samples;
  auto out = r.csv("carre.csv", {"identity", "x", "lhs", "rhs", "se", "pass", "lhs_se", "rhs_se", "z"});
  bool ok = true;
  McConfig mc = r.cfg.mc();
  auto emit = [&](const std::string& id, const std::string& xl, const IdentityReport& rep) {
    out.cell(id).cell(xl).cell(rep.lhs.mean).cell(rep.rhs.mean).cell(rep.joint_std_error)
        .cell(rep.pass).cell(rep.lhs.std_error).cell(rep.rhs.std_error).cell(rep.z_score());
    out.end_row();
    r.log << id << " x=" << xl << ": lhs " << rep.lhs.mean << " rhs " << rep.rhs.mean << " se "
          << rep.joint_std_error << (rep.pass ? " pass" : " FAIL") << "\n";
    ok = ok && rep.pass;
  };
  std::uint64_t offset = 0;
  for (const auto& st : r.cfg.states) {
    mc.stream_offset = offset;
    offset += b.n_value + b.n_gamma;
    emit("carre_resolvent", state_label(st),
         check_carre_resolvent(model, psi, r.cfg.lambda, build_state(model.grid, st), b, mc));
  }
  for (double t : r.cfg.regularize_times) {
    mc.stream_offset = offset;
    offset += b.n_value + b.n_gamma;
    const Observable reg = ou_regularized_mode_cosine(model.grid, 1, t, model.noise_modes);
    emit("carre_regularized_t=" + format_number(t), state_label(r.cfg.states.front()),
         check_carre_resolvent(model, reg, r.cfg.lambda,
                               build_state(model.grid, r.cfg.states.front()), b, mc));
  }
  return ok ? exit_ok : exit_failed;
}

int cmd_ito(Run& r) {
  const ModelSpec model = build_model(r.cfg);
  const FiniteSystem sys = FiniteSystem::from_model(model);
  const Observable phi = parse_observable(r.cfg.observables.front(), model.grid);
  if (!phi.has_hessian()) throw PreconditionError("ito: observable needs second derivatives");
  // deterministic gate: square identity at seeded random states
  const NoiseStream gate(r.cfg.seed, 0, model.noise_modes, 1.0);
  double worst = 0.0;
  for (std::uint64_t k = 0; k < 16; ++k) {
    const auto z = gate.standard_normals(0x5157 + k, model.grid->size());
    const Field x(model.grid, z);
    const double scale = 1.0 + std::abs(finite_generator_apply(sys, phi.squared(), x));
    worst = std::max(worst, std::abs(square_identity_defect(sys, phi, x)) / scale);
  }
  auto out = r.csv("ito.csv", {"identity", "x", "lhs", "rhs", "se", "pass"});
  const bool gate_ok = worst <= 1e-10;
  out.cell("square_identity").cell("random16").cell(worst).cell(0.0).cell(0.0).cell(gate_ok);
  out.end_row();
  r.log << "square identity: max relative defect " << worst << (gate_ok ? " pass" : " FAIL") << "\n";
  if (!gate_ok) return exit_failed;
  bool ok = true;
  for (const auto& st : r.cfg.states) {
    const IdentityReport rep =
        check_ito_E(sys, phi, build_state(model.grid, st), r.cfg.ito_t, r.cfg.trajectories, r.cfg.mc());
    out.cell("ito_E").cell(state_label(st)).cell(rep.lhs.mean).cell(rep.rhs.mean)
        .cell(rep.joint_std_error).cell(rep.pass);
    out.end_row();
    r.log << "ito x=" << state_label(st) << ": lhs " << rep.lhs.mean << " rhs " << rep.rhs.mean
          << " se " << rep.joint_std_error << (rep.pass ? " pass" : " FAIL") << "\n";
    ok = ok && rep.pass;
  }
  return ok ? exit_ok : exit_failed;
}

EmpiricalMeasure obtain_measure(Run& r, const ModelSpec& model) {
  if (!r.cfg.measure_file.empty()) {
    EmpiricalMeasure m = load_measure(r.cfg.measure_file, model.grid, config_hash(r.cfg));
    r.log << "loaded " << m.size() << " measure samples from " << r.cfg.measure_file << "\n";
    return m;
  }
  if (!model.hypotheses.passes("H3"))
    throw HypothesisViolation("invariant measure sampling needs a bounded diffusion coefficient (H3)");
  SamplerConfig sc;
  sc.burn_in = r.cfg.burn_in;
  sc.thin = r.cfg.thin;
  sc.n_samples = r.cfg.measure_samples;
  sc.chains = r.cfg.chains;
  EmpiricalMeasure m = sample_invariant(model, sc, r.cfg.mc());
  m.config_hash = config_hash(r.cfg);
  save_measure((r.dir / "measure.csv").string(), m);
  r.files.push_back("measure.csv");
  return m;
}

std::vector<Observable> family(const ExperimentConfig& cfg, const GridPtr& grid) {
  std::vector<Observable> f;
  for (const auto& s : cfg.observables) f.push_back(parse_observable(s, grid));
  return f;
}

int cmd_ergodic(Run& r) {
  const ModelSpec model = build_model(r.cfg);
  const EmpiricalMeasure m = obtain_measure(r, model);
  bool ok = true;
  auto mix = r.csv("mixing.csv", {"functional", "mean_from_zero", "mean_from_2e1", "se", "pass"});
  for (const auto& d : m.mixing) {
    mix.cell(d.functional).cell(d.mean_from_zero).cell(d.mean_from_2e1).cell(d.joint_std_error)
        .cell(d.pass);
    mix.end_row();
    ok = ok && d.pass;
  }
  auto mom = r.csv("moments.csv", {"p", "mean", "se", "half_sample_mean", "relative_change"});
  const EmpiricalMeasure half = m.chain_prefix((m.chains + 1) / 2);
  for (double p : {2.0, 4.0}) {
    const MCEstimate full = moment(m, p), h = moment(half, p);
    mom.cell(p).cell(full.mean).cell(full.std_error).cell(h.mean)
        .cell(std::abs(full.mean - h.mean) / full.mean);
    mom.end_row();
  }
  const Observable phi = parse_observable(r.cfg.observables.front(), model.grid);
  auto inv = r.csv("invariance.csv", {"t", "measure_mean_Pt", "measure_mean", "se", "pass"});
  McConfig mc = r.cfg.mc();
  mc.stream_offset = 1000003;
  for (double t : {0.1, 0.5}) {
    const IdentityReport rep = invariance_check(model, m, phi, t, mc);
    inv.cell(t).cell(rep.lhs.mean).cell(rep.rhs.mean).cell(rep.joint_std_error).cell(rep.pass);
    inv.end_row();
    ok = ok && rep.pass;
    r.log << "invariance t=" << t << ": " << rep.lhs.mean << " vs " << rep.rhs.mean
          << (rep.pass ? " pass" : " FAIL") << "\n";
  }
  if (r.cfg.energy_t > 0.0) {
    mc.stream_offset = 2000003;
    const EnergyReport er = check_energy_identity(model, phi, r.cfg.energy_t, m.samples,
                                                  r.cfg.inner_trajectories, mc, {0.25, 0.5, 1.0});
    auto en = r.csv("energy.csv", {"quantity", "t", "value", "se", "pass"});
    en.cell("energy_identity_lhs").cell(r.cfg.energy_t).cell(er.identity.lhs.mean)
        .cell(er.identity.joint_std_error).cell(er.identity.pass);
    en.end_row();
    en.cell("energy_identity_rhs").cell(r.cfg.energy_t).cell(er.identity.rhs.mean)
        .cell(er.identity.rhs.std_error).cell(er.identity.pass);
    en.end_row();
    for (std::size_t k = 0; k < er.times.size(); ++k) {
      en.cell("energy").cell(er.times[k]).cell(er.energy[k].mean).cell(er.energy[k].std_error)
          .cell(er.monotone);
      en.end_row();
    }
    ok = ok && er.identity.pass && er.monotone;
    r.log << "energy identity: " << er.identity.lhs.mean << " vs " << er.identity.rhs.mean
          << (er.identity.pass ? " pass" : " FAIL") << ", monotone " << er.monotone << "\n";
  }
  return ok ? exit_ok : exit_failed;
}

int cmd_poincare(Run& r) {
  const ModelSpec model = build_model(r.cfg);
  const EmpiricalMeasure m = obtain_measure(r, model);
  const PoincareReport rep = poincare_report(m, family(r.cfg, model.grid), 200, r.cfg.seed);
  auto out = r.csv("poincare.csv",
                   {"observable", "variance", "variance_se", "energy", "energy_se", "ratio", "excluded"});
  for (const auto& row : rep.rows) {
    out.cell(row.name).cell(row.variance.mean).cell(row.variance.std_error).cell(row.energy.mean)
        .cell(row.energy.std_error).cell(row.ratio).cell(row.excluded);
    out.end_row();
  }
  out.cell("rho_hat").cell(rep.rho_hat).cell(rep.rho_se).cell(0.0).cell(0.0).cell(rep.rho_hat)
      .cell(false);
  out.end_row();
  r.log << "rho_hat = " << rep.rho_hat << " +- " << rep.rho_se << "\n";
  return rep.finite() ? exit_ok : exit_failed;
}

int cmd_gap(Run& r) {
  const ModelSpec model = build_model(r.cfg);
  const EmpiricalMeasure m = obtain_measure(r, model);
  const Observable phi = parse_observable(r.cfg.observables.front(), model.grid);
  McConfig mc = r.cfg.mc();
  mc.stream_offset = 3000017;
  const GapFit g = gap_fit(model, m, phi, r.cfg.gap_times, r.cfg.inner_trajectories, mc);
  auto out = r.csv("gap.csv", {"t", "d", "se"});
  for (std::size_t k = 0; k < g.t.size(); ++k) {
    out.cell(g.t[k]).cell(g.d[k].mean).cell(g.d[k].std_error);
    out.end_row();
  }
  std::vector<Observable> fam;
  for (const auto& o : family(r.cfg, model.grid))
    if (o.has_gradient()) fam.push_back(o);
  const PoincareReport pr = poincare_report(m, fam, 200, r.cfg.seed);
  const double beta = model.diffusion.beta_g;
  auto sum = r.csv("gap_summary.csv", {"quantity", "value"});
  const std::vector<std::pair<std::string, double>> rows{
      {"delta_hat", g.delta_hat},
      {"delta_se", g.delta_se},
      {"r2", g.r2},
      {"equilibrated", g.equilibrated ? 1.0 : 0.0},
      {"phi_bar", g.phi_bar},
      {"beta_g", beta},
      {"rho_hat", pr.rho_hat},
      {"beta2_over_rho", pr.rho_hat > 0 ? beta * beta / pr.rho_hat : infinity},
      {"beta2_over_2rho", pr.rho_hat > 0 ? beta * beta / (2.0 * pr.rho_hat) : infinity}};
  for (const auto& [k, v] : rows) {
    sum.cell(k).cell(v);
    sum.end_row();
  }
  r.log << "delta_hat = " << g.delta_hat << " +- " << g.delta_se << " (R^2 " << g.r2 << ")"
        << (g.equilibrated ? ", already equilibrated" : "") << "\n";
  if (g.equilibrated) return exit_ok;
  return g.delta_hat > 2.0 * g.delta_se ? exit_ok : exit_failed;
}

int cmd_ladder(Run& r) {
  const auto pts = ladder_sweep(r.cfg, std::min<std::size_t>(r.cfg.trajectories, 64));
  auto out = r.csv("ladder.csv", {"axis", "level", "path_distance", "path_distance_se",
                                  "resolvent_distance", "resolvent_distance_se",
                                  "identity_eligible", "identity_exact"});
  for (const auto& p : pts) {
    out.cell(p.axis).cell(p.level).cell(p.path_distance.mean).cell(p.path_distance.std_error)
        .cell(p.resolvent_distance.mean).cell(p.resolvent_distance.std_error)
        .cell(p.identity_eligible).cell(p.identity_exact);
    out.end_row();
  }
  bool ok = true;
  for (const char* axis : {"truncation", "modes", "yosida"}) {
    const bool mono = ladder_monotone(pts, axis);
    r.log << axis << ": " << (mono ? "monotone" : "NOT monotone") << "\n";
    ok = ok && mono;
  }
  for (const auto& p : pts)
    if (p.identity_exact != p.identity_eligible) ok = false;
  return ok ? exit_ok : exit_failed;
}

}  // namespace

int run_subcommand(const std::string& name, const ExperimentConfig& cfg, std::ostream& log) {
  Run r{cfg, log, fs::path(cfg.output_dir), {}};
  fs::create_directories(r.dir);
  int code;
  if (name == "validate")
    code = cmd_validate(r);
  else if (name == "simulate")
    code = cmd_simulate(r);
  else if (name == "gradient")
    code = cmd_gradient(r);
  else if (name == "carre")
    code = cmd_carre(r);
  else if (name == "ito")
    code = cmd_ito(r);
  else if (name == "ergodic")
    code = cmd_ergodic(r);
  else if (name == "poincare")
    code = cmd_poincare(r);
  else if (name == "gap")
    code = cmd_gap(r);
  else if (name == "ladder")
    code = cmd_ladder(r);
  else
    throw ConfigError("unknown subcommand '" + name + "'");
  write_manifest(r.dir, cfg, name, r.files);
  return code;
}

std::vector<LadderPoint> ladder_sweep(const ExperimentConfig& cfg, std::size_t n_paths) {
  std::size_t m_ref = cfg.modes();
  for (auto m : cfg.ladder_modes) {
    if (m > cfg.grid_n) throw ConfigError("ladder.modes must not exceed model.N");
    m_ref = std::max(m_ref, m);
  }
  ExperimentConfig ref_cfg = cfg;
  ref_cfg.truncation_n = infinity;
  ref_cfg.yosida_k = infinity;
  ref_cfg.noise_modes = m_ref;
  const ModelSpec ref = build_model(ref_cfg);
  const Field x = build_state(ref.grid, cfg.states.front());
  const Observable psi = parse_observable(cfg.observables.front(), ref.grid);
  QuadratureConfig q;
  q.T_max = cfg.horizon;
  q.nodes = cfg.quadrature_nodes;
  const QuadratureGrid quad = make_quadrature(cfg.lambda, psi.sup_abs(), q, cfg.dt);
  const std::size_t steps = quad.steps.back();

  struct Path {
    std::vector<Field> u;
    double phi = 0.0;
  };
  auto run = [&](const Stepper& st, const NoiseStream& s) {
    Path p;
    Integrator it(st, x, s);
    std::size_t node = 0;
    for (std::size_t k = 0;; ++k) {
      p.u.push_back(it.u());
      while (node < quad.steps.size() && quad.steps[node] == k)
        p.phi += quad.weights[node++] * psi(it.u());
      if (k == steps) break;
      it.step();
    }
    return p;
  };

  const Stepper ref_st(ref, cfg.dt, cfg.blowup_ceiling);
  const McConfig mc = cfg.mc();
  std::vector<std::optional<Path>> refs = map_trajectories<Path>(n_paths, mc.threads, [&](std::size_t i) {
    return run(ref_st, NoiseStream(cfg.seed, i, m_ref, cfg.dt));
  });

  std::vector<LadderPoint> out;
  auto sweep = [&](const std::string& axis, double level, ExperimentConfig lc) {
    const ModelSpec model = build_model(lc);
    const Stepper st(model, cfg.dt, cfg.blowup_ceiling);
    struct Cmp {
      double path, res;
      bool eligible, exact;
    };
    auto rows = map_trajectories<Cmp>(n_paths, mc.threads, [&](std::size_t i) -> Cmp {
      if (!refs[i]) throw BlowUpError("reference path blew up", 0, 0.0);
      const NoiseStream s = NoiseStream(cfg.seed, i, m_ref, cfg.dt).with_modes(model.noise_modes);
      const Path p = run(st, s);
      const Path& rp = *refs[i];
      Cmp c{0.0, std::abs(p.phi - rp.phi), false, true};
      double ref_sup = 0.0;
      for (std::size_t k = 0; k < p.u.size(); ++k) {
        c.path = std::max(c.path, (p.u[k] - rp.u[k]).sup_norm());
        ref_sup = std::max(ref_sup, rp.u[k].sup_norm());
        c.exact = c.exact && p.u[k].values() == rp.u[k].values();
      }
      c.eligible = axis == "truncation" && ref_sup < level;
      return c;
    });
    LadderPoint lp;
    lp.axis = axis;
    lp.level = level;
    std::vector<double> pd, rd;
    std::size_t aborted = 0;
    for (const auto& c : rows) {
      if (!c) {
        ++aborted;
        continue;
      }
      pd.push_back(c->path);
      rd.push_back(c->res);
      if (c->eligible) {
        ++lp.identity_eligible;
        if (c->exact) ++lp.identity_exact;
      }
    }
    lp.path_distance = summarize(pd, aborted);
    lp.resolvent_distance = summarize(rd, aborted);
    out.push_back(lp);
  };
  for (double n : cfg.ladder_truncation) {
    ExperimentConfig lc = ref_cfg;
    lc.truncation_n = n;
    sweep("truncation", n, lc);
  }
  for (auto m : cfg.ladder_modes) {
    ExperimentConfig lc = ref_cfg;
    lc.noise_modes = m;
    sweep("modes", static_cast<double>(m), lc);
  }
  for (double k : cfg.ladder_yosida) {
    ExperimentConfig lc = ref_cfg;
    lc.yosida_k = k;
    sweep("yosida", k, lc);
  }
  return out;
}

bool ladder_monotone(const std::vector<LadderPoint>& points, const std::string& axis) {
  std::vector<LadderPoint> a;
  for (const auto& p : points)
    if (p.axis == axis) a.push_back(p);
  std::sort(a.begin(), a.end(), [](const auto& l, const auto& r) { return l.level < r.level; });
  for (std::size_t i = 0; i + 1 < a.size(); ++i) {
    if (a[i + 1].path_distance.mean > a[i].path_distance.mean) return false;
    if (a[i + 1].resolvent_distance.mean > a[i].resolvent_distance.mean) return false;
  }
  return true;
}

}  // namespace rdlab
