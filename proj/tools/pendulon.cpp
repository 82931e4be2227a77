// pendulon: experiment driver for the double-pendulum chain.
//
//   pendulon <command> --config <path> [--out <dir>] [--jobs N] [--dry-run]
//
// Exit status: 0 ok, 1 invalid input or configuration, 2 numerical failure.

#include <CLI11.hpp>
#include <json.hpp>

#include <atomic>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iostream>
#include <map>
#include <string>
#include <thread>
#include <vector>

#include <pendulon/pendulon.hpp>

namespace fs = std::filesystem;
using json = nlohmann::ordered_json;
using namespace pendulon;

namespace {

json config_json(const ExperimentConfig& c) {
  const ChainParams& p = c.chain;
  const ConfiningPotential& h = p.h;
  const ExpansionParams& q = c.expansion;
  json j;
  j["source"] = c.source;
  j["potential"] = {{"family", h.family_name()}, {"phi0", h.phi0}, {"c2", h.c2}, {"b", h.b}};
  j["chain"] = {{"M", p.M},         {"m", p.m},         {"R", p.R},
                {"r", p.r},         {"kappa_t", p.kappa_t}, {"kappa_s", p.kappa_s},
                {"K_t", p.Kt()},    {"K_s", p.Ks()},    {"g", p.g},
                {"delta", p.delta}, {"sites", c.sites},
                {"topology", p.topology == Topology::open ? "open" : "periodic"}};
  j["expansion"] = {{"A", q.A},   {"Mhat", q.Mhat}, {"Khat", q.Khat}, {"g", q.g},
                    {"eps", q.eps}, {"r1", q.r1},   {"r2", q.r2},     {"m1", q.m1},
                    {"m2", q.m2}, {"k1", q.k1},     {"k2", q.k2},     {"v0", q.v0},
                    {"v1", q.v1}, {"v2", q.v2},     {"delta", q.delta}};
  j["grid"] = {{"half_width_kink", c.grid.half_width_kink}, {"points", c.grid.points}};
  j["integrator"] = {{"dt", c.integrator.dt},
                     {"t_end", c.integrator.t_end},
                     {"snapshot_every", c.integrator.snapshot_every}};
  j["initial"] = {{"kind", c.initial.kind}, {"v", c.initial.v}, {"x0", c.initial.x0}};
  j["tw"] = {{"v", c.tw.v}, {"max_iter", c.tw.max_iter}, {"tol", c.tw.tol}};
  j["scaling"] = {{"eps_list", c.scaling.eps_list}, {"e0", c.scaling.e0}};
  j["stiff"] = {{"ladder", c.stiff.ladder},
                {"probes", c.stiff.probes},
                {"points", c.stiff.points},
                {"widths", c.stiff.widths}};
  j["lagexp"] = {{"samples", c.lagexp.samples}, {"seed", c.lagexp.seed}};
  return j;
}

void write_json(const fs::path& path, const json& j) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw DomainError("cannot write " + path.string());
  out << j.dump(2) << '\n';
}

/// Run f(i) for i in [0, n) on `jobs` threads; results are stored by index so
/// the output order does not depend on scheduling.
void parallel_for(std::size_t n, unsigned jobs, const std::function<void(std::size_t)>& f) {
  if (jobs <= 1 || n <= 1) {
    for (std::size_t i = 0; i < n; ++i) f(i);
    return;
  }
  std::atomic<std::size_t> next{0};
  std::vector<std::thread> pool;
  for (unsigned t = 0; t < std::min<std::size_t>(jobs, n); ++t)
    pool.emplace_back([&] {
      for (std::size_t i = next++; i < n; i = next++) f(i);
    });
  for (auto& th : pool) th.join();
}

struct Context {
  ExperimentConfig cfg;
  fs::path out;
  unsigned jobs = 1;
  bool stiff = false;
  json results;
};

LatticeState initial_lattice(const ExperimentConfig& c) {
  const ChainParams& p = c.chain;
  if (c.initial.kind == "rest") return LatticeState(c.sites);
  const FrozenKink fk = frozen_kink(p, c.initial.v);
  const double base = fk.inverted ? 3.14159265358979323846 : 0.0;
  return travelling_initial_state(c.sites, p.delta, c.initial.x0, c.initial.v, [&](double z) {
    ProfileSample s;
    s.theta = base + 4.0 * std::atan(std::exp(fk.k * z));
    s.theta_z = 2.0 * fk.k / std::cosh(fk.k * z);
    return s;
  });
}

void cmd_simulate_lattice(Context& ctx) {
  const ExperimentConfig& c = ctx.cfg;
  const LatticeState s0 = initial_lattice(c);
  const SimulationReport rep =
      simulate(s0, c.integrator.t_end, c.integrator.dt, c.chain, c.integrator.snapshot_every);
  CsvWriter traj((ctx.out / "lattice.csv").string(), "lattice",
                 {"t", "site", "theta", "phi", "theta_dot", "phi_dot"});
  for (const LatticeState& s : rep.trajectory)
    for (std::size_t i = 0; i < s.size(); ++i)
      traj.row({s.t, static_cast<double>(i), s.theta[i], s.phi[i], s.theta_dot[i], s.phi_dot[i]});
  CsvWriter en((ctx.out / "lattice_energy.csv").string(), "lattice_energy", {"t", "E", "drift"});
  const double e0 = rep.energy_series.front().second;
  for (const auto& [t, e] : rep.energy_series) en.row({t, e, std::abs(e - e0) / (std::abs(e0) + 1.0)});
  const LatticeState& last = rep.trajectory.back();
  ctx.results = {{"steps", rep.steps},
                 {"dt", rep.dt},
                 {"max_energy_drift", rep.max_energy_drift},
                 {"charge_initial", winding_number(s0.theta.front(), s0.theta.back())},
                 {"charge_final", winding_number(last.theta.front(), last.theta.back())}};
}

FieldGrid initial_field(const ExperimentConfig& c) {
  const ChainParams& p = c.chain;
  const FrozenKink fk = frozen_kink(p, c.initial.v);
  const double L = c.grid.half_width_kink / fk.k;
  FieldGrid g(c.grid.points, -L, L);
  if (c.initial.kind == "rest") return g;
  const double base = fk.inverted ? 3.14159265358979323846 : 0.0;
  for (std::size_t j = 0; j < g.size(); ++j) {
    const double z = fk.k * (g.x[j] - c.initial.x0);
    g.Theta[j] = base + 4.0 * std::atan(std::exp(z));
    g.Theta_t[j] = -c.initial.v * 2.0 * fk.k / std::cosh(z);
  }
  return g;
}

void cmd_simulate_pde(Context& ctx) {
  const ExperimentConfig& c = ctx.cfg;
  const FieldGrid g0 = initial_field(c);
  const auto snaps = evolve(g0, c.integrator.t_end, c.integrator.dt, c.chain, c.integrator.snapshot_every);
  CsvWriter f((ctx.out / "pde.csv").string(), "pde", {"t", "x", "Theta", "Phi", "Theta_t", "Phi_t"});
  CsvWriter en((ctx.out / "pde_energy.csv").string(), "pde_energy", {"t", "E", "N"});
  const double e0 = energy_total(g0, c.chain);
  double drift = 0.0;
  for (const FieldGrid& g : snaps) {
    for (std::size_t j = 0; j < g.size(); ++j)
      f.row({g.t, g.x[j], g.Theta[j], g.Phi[j], g.Theta_t[j], g.Phi_t[j]});
    const double e = energy_total(g, c.chain);
    drift = std::max(drift, std::abs(e - e0) / (std::abs(e0) + 1.0));
    en.row({g.t, e, static_cast<double>(topological_charge(g))});
  }
  ctx.results = {{"snapshots", snaps.size()},
                 {"max_energy_drift", drift},
                 {"max_wave_speed", max_wave_speed(c.chain)},
                 {"charge_initial", topological_charge(snaps.front())},
                 {"charge_final", topological_charge(snaps.back())}};
}

void cmd_solve_tw(Context& ctx) {
  const ExperimentConfig& c = ctx.cfg;
  const ChainParams& p = c.chain;
  const FrozenKink fk = frozen_kink(p, c.tw.v);
  const auto z = make_z_grid(c.grid.points, c.grid.half_width_kink / fk.k);
  const TWProfile guess = frozen_kink_profile(z, p, c.tw.v);
  TWSolveOptions opt;
  opt.max_iter = c.tw.max_iter;
  opt.tol = c.tw.tol;
  TWSolveInfo info;
  const TWProfile sol = solve_tw_bvp(guess, p, guess.tw, opt, &info);
  const TWResidual r = tw_residual(sol, p);
  const auto E = tw_first_integral(sol, p);
  CsvWriter w((ctx.out / "tw.csv").string(), "tw",
              {"z", "theta", "phi", "theta_z", "phi_z", "res1", "res2", "E_tw"});
  double phimax = 0.0;
  for (std::size_t j = 0; j < sol.size(); ++j) {
    w.row({sol.z[j], sol.theta[j], sol.phi[j], sol.theta_z[j], sol.phi_z[j], r.res1[j], r.res2[j], E[j]});
    phimax = std::max(phimax, std::abs(sol.phi[j]));
  }
  ctx.results = {{"v", c.tw.v},
                 {"mu", sol.tw.mu},
                 {"inverted", fk.inverted},
                 {"iterations", info.iterations},
                 {"residual", info.residual},
                 {"sigma", info.sigma},
                 {"first_integral_variance", info.first_integral_variance},
                 {"max_abs_phi", phimax},
                 {"charge", sol.N}};
}

void cmd_build_perturbative(Context& ctx) {
  const ExperimentConfig& c = ctx.cfg;
  const ExpansionParams& q = c.expansion;
  const auto z = kink_z_grid(q, c.grid.points, c.grid.half_width_kink);
  const PerturbativeSolution sol = build_perturbative(q, z);
  const ComposedSeries cs = compose_series(sol, q.eps, 2);
  CsvWriter w((ctx.out / "perturbative.csv").string(), "perturbative",
              {"z", "theta0", "theta0_z", "theta1", "theta1_z", "phi1", "phi1_z", "phi2", "phi2_z",
               "theta", "phi", "theta_z", "phi_z"});
  for (std::size_t j = 0; j < z.size(); ++j)
    w.row({z[j], sol.theta0[j], sol.theta0_z[j], sol.theta1[j], sol.theta1_z[j], sol.phi1[j],
           sol.phi1_z[j], sol.phi2[j], sol.phi2_z[j], cs.profile.theta[j], cs.profile.phi[j],
           cs.profile.theta_z[j], cs.profile.phi_z[j]});
  ctx.results = {{"eps", q.eps},
                 {"k", sol.k},
                 {"B", sol.B},
                 {"sigma", sol.sigma},
                 {"composed_residual", tw_residual(cs.profile, cs.chain).max_abs()}};
}

double rel_l2(const std::vector<double>& a, const std::vector<double>& b, double dz) {
  std::vector<double> d(a.size());
  for (std::size_t j = 0; j < a.size(); ++j) d[j] = a[j] - b[j];
  return l2_norm(d, dz) / l2_norm(b, dz);
}

void cmd_verify_expansion(Context& ctx) {
  const ExperimentConfig& c = ctx.cfg;
  const ExpansionParams& q = c.expansion;
  const auto z = kink_z_grid(q, c.grid.points, c.grid.half_width_kink);
  const double dz = z[1] - z[0];
  std::vector<ScalingReport> reps(3);
  parallel_for(3, ctx.jobs, [&](std::size_t o) {
    reps[o] = residual_scaling(q, c.scaling.eps_list, static_cast<int>(o), z);
  });
  CsvWriter w((ctx.out / "scaling.csv").string(), "scaling", {"order", "eps", "res1_l2", "res2_l2"});
  json orders = json::array();
  for (const ScalingReport& r : reps) {
    for (const ScalingRow& row : r.rows) w.row({static_cast<double>(r.order), row.eps, row.res1_l2, row.res2_l2});
    orders.push_back({{"order", r.order}, {"slope1", r.slope1}, {"slope2", r.slope2}});
  }
  const PerturbativeSolution sol = build_perturbative(q, z);
  const TaylorExtraction ex = taylor_extract_all(q, z, c.scaling.e0);
  std::vector<double> t1 = ex.theta[1];
  {
    double num = 0.0, den = 0.0;
    for (std::size_t j = 0; j < z.size(); ++j) {
      num += t1[j] * sol.theta0_z[j];
      den += sol.theta0_z[j] * sol.theta0_z[j];
    }
    for (std::size_t j = 0; j < z.size(); ++j) t1[j] -= num / den * sol.theta0_z[j];
  }
  json taylor = {{"e0", c.scaling.e0},
                 {"condition", ex.condition},
                 {"phi1_rel_l2", rel_l2(sol.phi1, ex.phi[1], dz)},
                 {"phi2_rel_l2", rel_l2(sol.phi2, ex.phi[2], dz)},
                 {"theta1_rel_l2", rel_l2(sol.theta1, t1, dz)},
                 {"warning", ex.warning}};
  json report = {{"orders", orders}, {"taylor", taylor}};
  write_json(ctx.out / "scaling.json", report);
  ctx.results = report;
}

void cmd_speed_select(Context& ctx) {
  const ExperimentConfig& c = ctx.cfg;
  const ChainParams& p = c.chain;
  const SpeedSelection sel = selected_speed(p);
  std::printf("v_star = \xC2\xB1%.10g\n", sel.v_star);
  std::printf("mu_star = %.10g\n", sel.mu_star);
  ctx.results = {{"v_star", sel.v_star}, {"mu_star", sel.mu_star}};
  if (!ctx.stiff) return;

  const double unit_h = (p.M + p.m) * p.g;
  std::vector<double> ladder, probes;
  for (double x : c.stiff.ladder) ladder.push_back(x * unit_h);
  for (double x : c.stiff.probes) probes.push_back(x * sel.v_star);
  const auto z = stiff_z_grid(p, c.stiff.points, c.stiff.widths);
  std::vector<StiffCell> cells(ladder.size() * probes.size());
  parallel_for(cells.size(), ctx.jobs, [&](std::size_t i) {
    cells[i] = stiff_cell(p, ladder[i / probes.size()], probes[i % probes.size()], z);
  });
  const auto windows = stiff_windows(cells, ladder.size(), p.h.phi0);

  CsvWriter w((ctx.out / "stiff.csv").string(), "stiff",
              {"h2", "v", "converged", "max_abs_phi", "residual", "frozen_residual"});
  json jc = json::array();
  for (const StiffCell& s : cells) {
    w.row({s.h2, s.v, s.converged ? 1.0 : 0.0, s.max_abs_phi, s.residual, s.frozen_residual});
    json e = {{"h2", s.h2}, {"v", s.v}, {"converged", s.converged}};
    if (!s.message.empty()) e["message"] = s.message;
    jc.push_back(e);
  }
  ctx.results["stiff"] = {{"h2_unit", unit_h}, {"windows", windows}, {"cells", jc}};
  std::size_t ok = 0;
  for (const StiffCell& s : cells) ok += s.converged;
  std::printf("stiff sweep: %zu of %zu cells converged\n", ok, cells.size());
}

void cmd_verify_lagrangian(Context& ctx) {
  const ExperimentConfig& c = ctx.cfg;
  const ExpansionParams& q = c.expansion;
  const ExpandedLagrangianSample s = random_sample(q, c.lagexp.samples, c.lagexp.seed);
  const ExpansionCheck chk = check_expansion(s);
  const auto z = kink_z_grid(q, c.grid.points, c.grid.half_width_kink);
  const SlavingReport sl = slaving_consistency(q, z);
  json report = {{"samples", c.lagexp.samples},
                 {"seed", c.lagexp.seed},
                 {"L_rel", chk.L_rel},
                 {"auxiliary", chk.aux},
                 {"auxiliary_control_dL2_dphi0z", chk.aux_control},
                 {"E10_minus_E21", chk.E10_E21},
                 {"E10_rel", chk.E10_rel},
                 {"E20_rel", chk.E20_rel},
                 {"slaving",
                  {{"A_k", sl.A_k}, {"phi1_rel", sl.phi1_rel}, {"phi2_rel", sl.phi2_rel}}}};
  write_json(ctx.out / "lagexp.json", report);
  ctx.results = report;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Double-pendulum chain experiments"};
  std::string config_path, out_dir;
  unsigned jobs = 1;
  bool dry_run = false, stiff = false;
  app.add_option("--config", config_path, "configuration file")->required();
  app.add_option("--out", out_dir, "output directory (default $PENDULON_OUT or ./out)");
  app.add_option("--jobs", jobs, "worker threads for parameter sweeps")->check(CLI::Range(1u, 256u));
  app.add_flag("--dry-run", dry_run, "validate the configuration and exit");

  struct Command {
    void (*fn)(Context&);
    const char* help;
  };
  const std::map<std::string, Command> commands = {
      {"simulate-lattice", {cmd_simulate_lattice, "RK4 run of the discrete chain"}},
      {"simulate-pde", {cmd_simulate_pde, "method-of-lines run of the continuum fields"}},
      {"solve-tw", {cmd_solve_tw, "travelling-wave boundary value problem"}},
      {"build-perturbative", {cmd_build_perturbative, "small-parameter series and its composition"}},
      {"verify-expansion", {cmd_verify_expansion, "residual scaling and eps-Taylor extraction"}},
      {"speed-select", {cmd_speed_select, "selected speed; --stiff adds the confinement sweep"}},
      {"verify-lagrangian", {cmd_verify_lagrangian, "expanded Lagrangian and auxiliary-field checks"}},
  };
  std::map<std::string, CLI::App*> subs;
  for (const auto& [name, cmd] : commands) {
    CLI::App* sub = app.add_subcommand(name, cmd.help);
    sub->fallthrough();
    subs[name] = sub;
  }
  subs["speed-select"]->add_flag("--stiff", stiff, "also run the stiff-confinement sweep");
  app.require_subcommand(1);

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return 1;
  }

  std::string command;
  for (const auto& [name, sub] : subs)
    if (sub->parsed()) command = name;

  Context ctx;
  try {
    ctx.cfg = load_config(config_path);
    if (dry_run) {
      std::cout << "configuration ok: " << config_path << '\n';
      return 0;
    }
    if (out_dir.empty()) {
      const char* env = std::getenv("PENDULON_OUT");
      out_dir = env && *env ? env : "out";
    }
    ctx.out = out_dir;
    ctx.jobs = jobs;
    ctx.stiff = stiff;
    fs::create_directories(ctx.out);
    commands.at(command).fn(ctx);
    json summary;
    summary["command"] = command;
    summary["config"] = config_json(ctx.cfg);
    summary["results"] = ctx.results;
    write_json(ctx.out / "summary.json", summary);
  } catch (const NumericalError& e) {
    std::cerr << "pendulon: numerical failure: " << e.what() << '\n';
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "pendulon: " << e.what() << '\n';
    return 1;
  }
  return 0;
}
