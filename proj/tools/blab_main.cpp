// blab: numerical laboratory for bubble concentration in the anisotropic
// almost-critical problem. Subcommands: verify-identities, fit-expansion,
// reduce, continuation. See README for the config schema.
#include <CLI11.hpp>

#include <cmath>
#include <cstdlib>
#include <future>
#include <iostream>

#include "blab/bubble.hpp"
#include "blab/config.hpp"
#include "blab/energy.hpp"
#include "blab/geometry.hpp"
#include "blab/report.hpp"
#include "blab/solver.hpp"

namespace {

int log_level() {
  const char* env = std::getenv("BLAB_LOG");
  return env ? std::atoi(env) : 0;
}

void log_info(const std::string& msg) {
  if (log_level() >= 1) std::cerr << "[blab] " << msg << "\n";
}

struct Check {
  std::string name;
  double measured, reference, tol;
  bool pass;
};

blab::Json checks_to_json(const std::vector<Check>& checks) {
  blab::Json arr = blab::Json::array();
  for (const auto& c : checks) {
    arr.push_back({{"name", c.name},
                   {"measured", c.measured},
                   {"reference", c.reference},
                   {"tol", c.tol},
                   {"pass", c.pass}});
  }
  return arr;
}

Check rel_check(const std::string& name, double measured, double reference,
                double tol) {
  const double err = std::abs(measured - reference) /
                     std::max(std::abs(reference), 1e-300);
  return {name, measured, reference, tol, err <= tol};
}

Check abs_check(const std::string& name, double measured, double scale,
                double tol) {
  return {name, measured, 0.0, tol, std::abs(measured) <= tol * scale};
}

int run_verify_identities(const blab::RunConfig& cfg) {
  using namespace blab;
  std::vector<Check> checks;
  const int m = cfg.model.m;
  Dimension dim(m);
  const double tol_id = cfg.tolerances.count("identity")
                            ? cfg.tolerances.at("identity")
                            : 1e-9;
  const double tol_mom =
      cfg.tolerances.count("moment") ? cfg.tolerances.at("moment") : 1e-10;

  checks.push_back(abs_check("bubble_pde_residual",
                             bubble_residual(dim, 200, 50.0), 1.0, 1e-10));
  for (int i : {0, 1})
    checks.push_back(abs_check("kernel_residual_" + std::to_string(i),
                               kernel_residual(dim, i, 200, 50.0), 1.0, 1e-9));

  // moment grid: closed form vs quadrature + recurrences
  double worst_mom = 0.0;
  bool rec_ok = true;
  for (int i = 0; i < 20; ++i) {
    const double q = 0.3 + 0.45 * i;
    const double p = q + 1.5 + 0.35 * i;
    const auto mi = moment_integral(p, q);
    worst_mom = std::max(worst_mom,
                         std::abs(mi.value - mi.value_quadrature) /
                             std::abs(mi.value));
    rec_ok = rec_ok && mi.recurrences_ok;
  }
  checks.push_back(abs_check("moment_dual_route", worst_mom, 1.0, tol_mom));
  checks.push_back({"moment_recurrences", rec_ok ? 0.0 : 1.0, 0.0, 1e-12, rec_ok});

  // anchor: I_m^{m/2} = 2 K_m^{-m} / (alpha^2 (m-2)^2 omega_{m-1})
  {
    const auto sc = sphere_constants(dim);
    const double alpha2 = std::pow(m * (m - 2.0), 0.5 * (m - 2.0));
    const double anchor = 2.0 * sc.K_pow_minus_m /
                          (alpha2 * (m - 2.0) * (m - 2.0) * sc.omega_m_minus_1);
    checks.push_back(rel_check("anchor_identity",
                               moment_integral(m, 0.5 * m).value_quadrature,
                               anchor, tol_mom));
  }

  // expansion identity locks: dual-route and closed-form references
  {
    const auto sc = sphere_constants(dim);
    const double K = sc.K_pow_minus_m;
    checks.push_back(
        abs_check("vanishing_eta_bracket", vanishing_eta_bracket(m) / K, 1.0, tol_id));
    checks.push_back(rel_check("hessian_moment_bracket", hessian_moment_bracket(m),
                               K / (2.0 * m), tol_id));
    if (m >= 5)
      checks.push_back(rel_check("laplacian_moment_bracket",
                                 laplacian_moment_bracket(m),
                                 1.5 * K / (m * (m - 4.0)), tol_id));
    const auto mo = bubble_moments(dim);
    const auto mq = bubble_moments_quadrature(dim);
    checks.push_back(rel_check("grad2_dual_route", mq.grad2, mo.grad2, tol_id));
    checks.push_back(rel_check("pow2s_vs_K", mq.pow2s, K, tol_id));
  }
  if (m >= 5) {
    const auto rep = fourth_moment_checks(dim);
    checks.push_back(rel_check("fourth_moment_ratio", rep.quartic_ratio, 3.0, tol_id));
    checks.push_back(abs_check("fourth_moment_decomposition",
                               rep.decomposition_err, 1.0, tol_id));
    checks.push_back(abs_check("fourth_moment_trace", rep.trace_identity_err,
                               1.0, tol_id));
  }
  // geometry: sphere scalar curvature
  {
    const auto sph = round_sphere_model(m);
    checks.push_back(rel_check("sphere_scalar_curvature",
                               sph.scalar_curvature(), m * (m - 1.0), 1e-12));
  }

  bool all = true;
  for (const auto& c : checks) {
    if (!c.pass)
      std::cerr << "violated invariant [bubble_calculus/" << c.name
                << "]: measured " << c.measured << " vs " << c.reference
                << "\n";
    all = all && c.pass;
  }
  ensure_dir(cfg.output_dir);
  Json summary = {{"schema_version", 1},
                  {"command", "verify-identities"},
                  {"m", m},
                  {"checks", checks_to_json(checks)},
                  {"all_pass", all}};
  write_json(cfg.output_dir + "/identities.json", summary);
  log_info("verify-identities: " + std::string(all ? "pass" : "FAIL"));
  return all ? 0 : 1;
}

int run_fit(const blab::RunConfig& cfg) {
  using namespace blab;
  const auto model = make_model(cfg.model);
  const int m = model.dim();
  std::vector<double> ladder;
  if (cfg.sign == 0) {
    for (double e : cfg.ladder(+1)) ladder.push_back(e);
    for (double e : cfg.ladder(-1)) ladder.push_back(e);
  } else {
    ladder = cfg.ladder(cfg.sign);
  }
  std::vector<double> eta;
  const auto rep = expansion_fit(model, cfg.t, eta, ladder);
  const double d_m = fit_d_m(model, ladder, cfg.t, cfg.t_secondary);

  std::vector<Check> checks;
  checks.push_back(rel_check("fitted_leading_level", rep.coeffs.a_m,
                             a_m_constant(m), cfg.tolerances.count("fit_level")
                                                  ? cfg.tolerances.at("fit_level")
                                                  : 1e-6));
  checks.push_back(rel_check("log_ratio_b_over_d", rep.coeffs.b_m / d_m,
                             (m - 2.0) * (m - 2.0) / 8.0, 0.05));
  bool all = true;
  for (const auto& c : checks) all = all && c.pass;

  ensure_dir(cfg.output_dir);
  CsvTable table;
  table.columns = {"eps", "J_exact", "fit_residual"};
  for (size_t i = 0; i < rep.eps.size(); ++i)
    table.rows.push_back({rep.eps[i], rep.energy[i], rep.fit_residual[i]});
  write_csv(cfg.output_dir + "/expansion.csv", table);
  Json summary = {{"schema_version", 1},
                  {"command", "fit-expansion"},
                  {"m", m},
                  {"t", cfg.t},
                  {"coefficients",
                   {{"a_m", rep.coeffs.a_m},
                    {"b_m", rep.coeffs.b_m},
                    {"c_m", rep.coeffs.c_m},
                    {"d_m", d_m},
                    {"abs_eps_column", rep.coeffs.d_m_phi}}},
                  {"max_residual", rep.coeffs.max_residual},
                  {"rel_residual", rep.coeffs.rel_residual},
                  {"checks", checks_to_json(checks)},
                  {"all_pass", all}};
  write_json(cfg.output_dir + "/expansion.json", summary);
  PlotSeries s;
  s.label = "J vs |eps|";
  for (size_t i = 0; i < rep.eps.size(); ++i) {
    if (rep.eps[i] > 0) {
      s.x.push_back(rep.eps[i]);
      s.y.push_back(rep.energy[i]);
    }
  }
  write_svg_plot(cfg.output_dir + "/expansion.svg", "ansatz energy vs eps", {s},
                 true, false);
  return all ? 0 : 1;
}

int run_reduce(const blab::RunConfig& cfg, bool continuation) {
  using namespace blab;
  const auto model = make_model(cfg.model);
  const int m = model.dim();
  if (m < 9 && !cfg.low_dimension_override) {
    std::cerr << "reduction requires dimension >= 9 (standing hypothesis); "
                 "set reduce.low_dimension_override = 1 for demo runs\n";
    return 1;
  }
  const int sign_eps = cfg.sign;
  const double theta = concentration_threshold(model);
  if (!regime_admits_solution(theta, sign_eps)) {
    std::cerr << "regime mismatch: threshold " << theta << " with eps sign "
              << sign_eps
              << " admits no concentrating solution (solve refused)\n";
    return 1;
  }
  SolveOptions opt;
  opt.nodes_per_delta = cfg.nodes_per_delta;
  opt.L = cfg.domain_radius;
  opt.fp_tol = cfg.fp_tol;
  opt.newton_tol = cfg.newton_tol;
  opt.t_lo = cfg.t_lo;
  opt.t_hi = cfg.t_hi;
  RadialReduction reduction(model, opt);
  const auto fn = ReducedEnergyFn::from_model(model, sign_eps);
  const double t0 = critical_point(fn).t0;

  const auto ladder = cfg.ladder(sign_eps);
  std::vector<RadialReduction::ReducedSolve> solves(ladder.size());
  if (continuation || cfg.workers <= 1) {
    std::optional<double> guess;
    for (size_t i = 0; i < ladder.size(); ++i) {
      solves[i] = reduction.reduced_solve(ladder[i], guess);
      if (continuation) guess = solves[i].t_eps;
      log_info("eps=" + std::to_string(ladder[i]) +
               " t_eps=" + std::to_string(solves[i].t_eps));
    }
  } else {
    std::vector<std::future<RadialReduction::ReducedSolve>> futs;
    size_t next = 0;
    while (next < ladder.size()) {
      const size_t batch =
          std::min(size_t(cfg.workers), ladder.size() - next);
      futs.clear();
      for (size_t b = 0; b < batch; ++b)
        futs.push_back(std::async(std::launch::async, [&, i = next + b] {
          return reduction.reduced_solve(ladder[i]);
        }));
      for (size_t b = 0; b < batch; ++b) solves[next + b] = futs[b].get();
      next += batch;
    }
  }

  bool all = true;
  ensure_dir(cfg.output_dir);
  CsvTable table;
  table.columns = {"eps",       "t_eps",     "phi_norm_H", "multiplier0",
                   "iterations", "contraction", "residual_Kperp"};
  Json runs = Json::array();
  for (size_t i = 0; i < ladder.size(); ++i) {
    const auto& s = solves[i];
    all = all && s.state.converged;
    table.rows.push_back({ladder[i], s.t_eps, s.state.norm_phi_H,
                          s.state.multipliers[0], double(s.state.iterations),
                          s.state.contraction_ratio, s.state.residual_H});
    runs.push_back({{"eps", ladder[i]},
                    {"t_eps", s.t_eps},
                    {"eta_eps", s.state.eta},
                    {"iterations", s.state.iterations},
                    {"contraction_ratio", s.state.contraction_ratio},
                    {"phi_norm_H", s.state.norm_phi_H},
                    {"multipliers", s.state.multipliers},
                    {"residual_Kperp", s.state.residual_H},
                    {"orthogonality_rel", s.state.orthogonality_rel},
                    {"reduced_energy", s.state.reduced_energy},
                    {"converged", s.state.converged}});
  }
  write_csv(cfg.output_dir + "/reduction.csv", table);
  Json summary = {{"schema_version", 1},
                  {"command", continuation ? "continuation" : "reduce"},
                  {"m", m},
                  {"theta", theta},
                  {"t0", t0},
                  {"runs", runs},
                  {"all_converged", all}};
  write_json(cfg.output_dir + "/reduction.json", summary);

  PlotSeries s1, s2, s3;
  s1.label = "|Phi|_H vs eps|log eps|";
  s2.label = "t_eps vs eps";
  for (size_t i = 0; i < ladder.size(); ++i) {
    const double ae = std::abs(ladder[i]);
    s1.x.push_back(ae * std::abs(std::log(ae)));
    s1.y.push_back(solves[i].state.norm_phi_H);
    s2.x.push_back(ae);
    s2.y.push_back(solves[i].t_eps);
  }
  write_svg_plot(cfg.output_dir + "/phi_norm.svg",
                 "correction norm vs eps|log eps|", {s1}, true, true);
  write_svg_plot(cfg.output_dir + "/t_eps.svg", "concentration parameter",
                 {s2}, true, false);
  {
    const auto& last = solves.back();
    const auto g = reduction.grid_for(ladder.back(), last.t_eps);
    s3.label = "u(rho), smallest eps";
    for (int i = 0; i < g->n; i += std::max(1, g->n / 400)) {
      s3.x.push_back(g->rho[i]);
      s3.y.push_back(last.u[i]);
    }
    write_svg_plot(cfg.output_dir + "/solution.svg", "solution cross-section",
                   {s3}, false, false);
  }
  return all ? 0 : 1;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"bubble-concentration laboratory"};
  app.require_subcommand(1);
  std::string config_path, out_override;
  int workers_override = -1;
  long seed_override = -1;

  auto add_common = [&](CLI::App* sub) {
    sub->add_option("--config", config_path, "run configuration file")
        ->required();
    sub->add_option("--out", out_override, "output directory override");
    sub->add_option("--workers", workers_override, "worker count override");
    sub->add_option("--seed", seed_override, "seed override");
  };
  auto* verify = app.add_subcommand("verify-identities",
                                    "closed-form vs quadrature identity suite");
  auto* fit = app.add_subcommand("fit-expansion", "energy expansion fit");
  auto* reduce = app.add_subcommand("reduce", "reduction solve over a ladder");
  auto* cont = app.add_subcommand("continuation",
                                  "reduction ladder with warm-started t");
  for (auto* sub : {verify, fit, reduce, cont}) add_common(sub);

  CLI11_PARSE(app, argc, argv);

  blab::RunConfig cfg;
  try {
    cfg = blab::parse_config_file(config_path);
  } catch (const std::exception& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return 2;
  }
  if (!out_override.empty()) cfg.output_dir = out_override;
  if (workers_override > 0) cfg.workers = workers_override;
  if (seed_override >= 0) cfg.seed = unsigned(seed_override);

  try {
    if (app.got_subcommand(verify)) return run_verify_identities(cfg);
    if (app.got_subcommand(fit)) return run_fit(cfg);
    if (app.got_subcommand(reduce)) return run_reduce(cfg, false);
    return run_reduce(cfg, true);
  } catch (const std::ios_base::failure& e) {
    std::cerr << "i/o error: " << e.what() << "\n";
    return 3;
  } catch (const std::exception& e) {
    const std::string what = e.what();
    if (what.find("cannot write") != std::string::npos ||
        what.find("cannot create") != std::string::npos) {
      std::cerr << "i/o error: " << what << "\n";
      return 3;
    }
    std::cerr << "run failed: " << what << "\n";
    return 1;
  }
}
