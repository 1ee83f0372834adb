#include <CLI11.hpp>
#include <algorithm>
#include <cmath>
#include <iostream>

#include "config.hpp"
#include "dealer/asymptotics.hpp"
#include "dealer/cli.hpp"
#include "dealer/discrete_oracle.hpp"
#include "dealer/equilibrium.hpp"
#include "dealer/errors.hpp"
#include "dealer/parallel.hpp"
#include "dealer/scenarios.hpp"
#include "report.hpp"

#ifndef DEALERLAB_VERSION
#define DEALERLAB_VERSION "0.1.0-unknown"
#endif

namespace dealer::cli {

const char* version() { return DEALERLAB_VERSION; }

namespace {

using json = nlohmann::ordered_json;

struct Context {
  Settings& s;
  std::ostream& out;
  std::filesystem::path dir;
};

ReportMeta meta(const Context& c, std::string grid) {
  return {c.s.flags().command, c.s.flags().seed, std::move(grid), c.s.echo()};
}

void wrote(const Context& c, const std::filesystem::path& file) { c.out << "wrote " << file.string() << "\n"; }

LiquidationScenario liquidation_settings(Settings& s) {
  LiquidationScenario sc;
  sc.lambda = s.lambda(0.1);
  sc.rho_c = s.number("rho_c", 0.1);
  sc.rho_d = s.number("rho_d", 0.1);
  sc.T = s.number("T", 1.0);
  sc.xi_c = s.number("xi_c", -1.0);
  validate(sc);
  return sc;
}

std::string column_suffix(const DealerCount& m) { return "M" + m.label(); }

int cmd_liquidation(Context& c) {
  auto base = liquidation_settings(c.s);
  const auto dealers = c.s.dealers("dealers", "1,inf");
  const std::size_t steps = c.s.steps(1000);
  c.s.reject_unknown();
  if (steps < 1) throw ConfigError("steps must be at least 1");
  const Horizon grid = Horizon::uniform(base.T, steps);

  std::vector<std::string> kcols{"t"}, pcols{"t"};
  std::vector<LiquidationPaths> paths;
  json per_m = json::array();
  for (const auto& m : dealers) {
    LiquidationScenario sc = base;
    sc.M = m;
    paths.push_back(liquidation_closed_form(sc, grid));
    kcols.push_back("K_c_" + column_suffix(m));
    pcols.push_back("S_D_" + column_suffix(m));

    // Second route: the generic equilibrium solver on the same grid.
    const auto params = liquidation_market(sc, steps);
    const auto sol = solve_equilibrium(params);
    const auto& cf = paths.back();
    double gap = 0.0;
    for (std::size_t i = 0; i < grid.nodes(); ++i) {
      gap = std::max({gap, std::abs(cf.U_bar[i] - sol.U_bar[i]), std::abs(cf.price_dev[i] - sol.price_dev[i])});
      for (std::size_t a = 0; a < params.agents.size(); ++a)
        if (params.agents[a].access_cost.is_no_access()) gap = std::max(gap, std::abs(cf.K_c[i] - sol.agents[a].K[i]));
    }
    json e;
    e["M"] = m.label();
    e["delta"] = liquidation_mesh_rate(sc).value();
    e["K_c_0"] = cf.K_c.front();
    e["K_c_T"] = cf.K_c.back();
    e["price_dev_0"] = cf.price_dev.front();
    e["bulk_fraction"] = base.xi_c != 0.0 ? cf.K_c.front() / base.xi_c : 0.0;
    e["solver_max_gap"] = gap;
    per_m.push_back(e);
  }
  CsvTable ks(kcols), ps(pcols);
  for (std::size_t i = 0; i < grid.nodes(); ++i) {
    std::vector<double> kr{grid[i]}, pr{grid[i]};
    for (const auto& p : paths) {
      kr.push_back(p.K_c[i]);
      pr.push_back(p.price_dev[i]);
    }
    ks.add_row(kr);
    ps.add_row(pr);
  }
  const auto m = meta(c, "steps=" + std::to_string(steps));
  ks.write(c.dir / "fig1_strategies.csv", m);
  wrote(c, c.dir / "fig1_strategies.csv");
  ps.write(c.dir / "fig1_price.csv", m);
  wrote(c, c.dir / "fig1_price.csv");
  json doc = meta_json(m);
  doc["dealer_counts"] = per_m;
  write_json(c.dir / "liquidation_report.json", doc);
  wrote(c, c.dir / "liquidation_report.json");
  return kExitOk;
}

int cmd_diffusive(Context& c) {
  DiffusiveScenario base;
  base.lambda = c.s.lambda(0.1);
  base.rho_c = c.s.number("rho_c", 0.1);
  base.rho_d = c.s.number("rho_d", 0.1);
  base.T = c.s.number("T", 1.0);
  base.sigma_xi = c.s.number("sigma_xi", 1.0);
  base.steps = c.s.steps(1000);
  base.seed = c.s.flags().seed;
  const auto dealers = c.s.dealers("dealers", "1,inf");
  const double reg_T = c.s.number("regression_T", 10.0);
  const double reg_t_max = c.s.number("regression_t_max", 5.0);
  const std::size_t reg_steps = c.s.count("regression_steps", 2000);
  const std::size_t paths = c.s.paths(10000);
  c.s.reject_unknown();
  validate(base);
  if (paths < 1) throw ConfigError("paths must be at least 1");

  std::vector<std::string> cols{"t", "xi_c"};
  for (const auto& m : dealers) cols.push_back("K_c_" + column_suffix(m));
  for (const auto& m : dealers) cols.push_back("S_D_" + column_suffix(m));
  std::vector<DiffusivePath> runs;
  json per_m = json::array();
  const double share = base.rho_d / (base.rho_c + base.rho_d);
  for (const auto& m : dealers) {
    DiffusiveScenario sc = base;
    sc.M = m;
    runs.push_back(diffusive_simulate(sc, 0));
    const auto& p = runs.back();
    const auto mart = martingale_increments(p, liquidation_mesh_rate(as_liquidation(sc)));
    double err = 0.0;
    for (std::size_t i = 0; i < mart.size(); ++i) err = std::max(err, std::abs(mart[i] - share * (p.xi[i + 1] - p.xi[i])));

    DiffusiveScenario reg = sc;
    reg.T = reg_T;
    reg.steps = reg_steps;
    const auto ou = ou_regression(reg, paths, reg_t_max);
    json e;
    e["M"] = m.label();
    e["delta"] = liquidation_mesh_rate(as_liquidation(sc)).value();
    e["dealer_share"] = share;
    e["martingale_share_max_error"] = err;
    e["price_dev_T"] = p.price_dev.back();
    json r;
    r["horizon"] = reg_T;
    r["t_max"] = reg_t_max;
    r["steps"] = reg_steps;
    r["paths"] = ou.paths;
    r["observations"] = ou.observations;
    r["mean_reversion"] = ou.mean_reversion;
    r["mean_reversion_theory"] = ou.mean_reversion_theory;
    r["loading"] = ou.loading;
    r["loading_theory"] = ou.loading_theory;
    e["ou_regression"] = r;
    per_m.push_back(e);
  }
  CsvTable t(cols);
  for (std::size_t i = 0; i < runs.front().t.size(); ++i) {
    std::vector<double> row{runs.front().t[i], runs.front().xi[i]};
    for (const auto& p : runs) row.push_back(p.K_c[i]);
    for (const auto& p : runs) row.push_back(p.price_dev[i]);
    t.add_row(row);
  }
  const auto m = meta(c, "steps=" + std::to_string(base.steps));
  t.write(c.dir / "fig2_paths.csv", m);
  wrote(c, c.dir / "fig2_paths.csv");
  json doc = meta_json(m);
  doc["dealer_counts"] = per_m;
  write_json(c.dir / "diffusive_report.json", doc);
  wrote(c, c.dir / "diffusive_report.json");
  return kExitOk;
}

json welfare_json(const WelfareReport& w) {
  json j;
  j["J_c_segmented"] = w.J_c_segmented;
  j["J_c_integrated"] = w.J_c_integrated;
  j["ratio"] = w.ratio;
  j["asymptotic_J_c"] = w.asymptotic_J_c;
  j["asymptotic_J_c_int"] = w.asymptotic_J_c_int;
  j["asymptotic_ratio"] = w.asymptotic_ratio;
  return j;
}

int cmd_welfare(Context& c) {
  auto base = liquidation_settings(c.s);
  const std::size_t max_m = c.s.count("max_dealers", 20);
  const std::size_t panels = c.s.count("panels", 4096);
  c.s.reject_unknown();
  if (max_m < 1) throw ConfigError("max_dealers must be at least 1");
  if (panels < 2) throw ConfigError("panels must be at least 2");

  CsvTable t({"M", "J_c", "J_c_int", "ratio", "J_c_asymptotic", "J_c_int_asymptotic", "ratio_asymptotic"});
  json rows = json::array();
  bool ordered = true;
  for (std::size_t m = 1; m <= max_m; ++m) {
    LiquidationScenario sc = base;
    sc.M = DealerCount::finite(static_cast<unsigned>(m));
    const auto w = segmentation_welfare(sc, panels);
    ordered = ordered && w.J_c_integrated >= w.J_c_segmented;
    t.add_row({static_cast<double>(m), w.J_c_segmented, w.J_c_integrated, w.ratio, w.asymptotic_J_c,
               w.asymptotic_J_c_int, w.asymptotic_ratio});
    json r = welfare_json(w);
    r["M"] = m;
    rows.push_back(r);
  }
  const auto rep = representative_dealer_check(base);
  const auto m = meta(c, "panels=" + std::to_string(panels) + "x3");
  t.write(c.dir / "fig3_welfare.csv", m);
  wrote(c, c.dir / "fig3_welfare.csv");
  json doc = meta_json(m);
  doc["rows"] = rows;
  doc["integrated_dominates"] = ordered;
  json r;
  r["delta_infinite"] = rep.delta_infinite;
  r["delta_single_half_lambda"] = rep.delta_single_half;
  r["max_path_gap"] = rep.max_path_gap;
  r["welfare_infinite"] = welfare_json(rep.infinite);
  r["welfare_single_half_lambda"] = welfare_json(rep.single_half);
  doc["representative_dealer"] = r;
  write_json(c.dir / "welfare_report.json", doc);
  wrote(c, c.dir / "welfare_report.json");
  return kExitOk;
}

int cmd_scaling(Context& c, DemandFamily family) {
  ScalingConfig cfg;
  cfg.family = family;
  const bool smooth = family == DemandFamily::smooth;
  cfg.demand = parse_demand(c.s.text("demand", smooth ? "smooth(ou(1,1,0,1))" : "brownian(0,1)"));
  const std::size_t m = c.s.count("M", 2);
  if (m < 1 || m > 100000) throw ConfigError("M must lie in 1..100000");
  cfg.M = static_cast<unsigned>(m);
  cfg.rho_d = c.s.number("rho_d", 0.1);
  cfg.T = c.s.number("T", 1.0);
  cfg.lambdas = c.s.lambdas({1e-1, 1e-2, 1e-3, 1e-4, 1e-5});
  cfg.min_steps = c.s.steps(1000);
  cfg.paths = c.s.paths(10000);
  cfg.seed = c.s.flags().seed;
  const bool convergence = c.s.flag("convergence", false);
  c.s.reject_unknown();

  const auto rep = scaling_study(cfg);
  std::string grid = "steps=";
  json lambdas = json::array(), means = json::array(), ses = json::array(), paths = json::array(), steps = json::array();
  CsvTable t({"lambda", "mean", "stderr", "paths", "steps"});
  for (const auto& e : rep.estimates) {
    lambdas.push_back(e.lambda);
    means.push_back(e.mean);
    ses.push_back(e.std_error);
    paths.push_back(e.paths);
    steps.push_back(e.steps);
    grid += (grid.back() == '=' ? "" : ",") + std::to_string(e.steps);
    t.add_row({e.lambda, e.mean, e.std_error, static_cast<double>(e.paths), static_cast<double>(e.steps)});
  }
  const auto mt = meta(c, grid);
  json doc = meta_json(mt);
  doc["family"] = rep.family;
  doc["M"] = rep.M;
  doc["rho_d"] = rep.rho_d;
  doc["lambdas"] = lambdas;
  doc["means"] = means;
  doc["stderrs"] = ses;
  doc["paths"] = paths;
  doc["steps"] = steps;
  doc["slope"] = rep.slope;
  doc["slope_ci"] = json::array({number_or_null(rep.slope_ci_low), number_or_null(rep.slope_ci_high)});
  doc["prefactor"] = rep.prefactor;
  doc["prefactor_se"] = rep.prefactor_se;
  doc["prefactor_theory"] = rep.prefactor_theory;
  doc["warnings"] = rep.warnings;
  if (convergence) {
    const auto mono = convergence_check(cfg);
    json conv;
    json est = json::array();
    for (const auto& e : mono.estimates) est.push_back({{"lambda", e.lambda}, {"mean", e.mean}, {"stderr", e.std_error}, {"steps", e.steps}});
    conv["estimates"] = est;
    conv["decreasing"] = mono.decreasing;
    conv["reduction"] = mono.reduction;
    doc["tracking_error"] = conv;
  }
  for (const auto& w : rep.warnings) std::cerr << "warning: " << w << "\n";
  write_json(c.dir / "scaling_report.json", doc);
  wrote(c, c.dir / "scaling_report.json");
  t.write(c.dir / "scaling_report.csv", mt);
  wrote(c, c.dir / "scaling_report.csv");
  return kExitOk;
}

int cmd_oracle(Context& c) {
  auto sc = liquidation_settings(c.s);
  const std::size_t m = c.s.count("M", 1);
  if (m < 1 || m > 64) throw ConfigError("oracle-check: M must lie in 1..64");
  sc.M = DealerCount::finite(static_cast<unsigned>(m));
  std::vector<std::size_t> ladder;
  if (c.s.flags().steps) {
    for (std::size_t n = *c.s.flags().steps, k = 0; k < 4 && n >= 2; ++k, n /= 2) ladder.insert(ladder.begin(), n);
    c.s.record("scenario.steps", std::to_string(*c.s.flags().steps));
  } else {
    ladder = c.s.counts("steps", {250, 500, 1000, 2000});
  }
  c.s.reject_unknown();
  if (ladder.empty()) throw ConfigError("oracle-check needs at least one step count");

  std::vector<GapReport> runs;
  json jr = json::array();
  bool healthy = true;
  std::string grid = "steps=";
  for (std::size_t n : ladder) {
    if (n < 2) throw ConfigError("oracle-check: step counts must be at least 2");
    const auto params = liquidation_market(sc, n);
    const auto eq = assemble_and_solve(params, n);
    const auto cf = liquidation_closed_form(sc, params.horizon);
    ReferencePaths ref;
    ref.U_bar = cf.U_bar;
    ref.price_dev = cf.price_dev;
    std::vector<std::string> headline{"U_bar", "price_dev"};
    for (const auto& a : params.agents) {
      const bool client = a.access_cost.is_no_access();
      ref.K.push_back(client ? cf.K_c : std::vector<double>{});
      if (client) headline.push_back("K:" + a.id);
    }
    const auto gap = oracle_gap(eq, ref, headline);
    runs.push_back(gap);
    const double clearing = oracle_clearing_residual(eq, params);
    const double foc = oracle_foc_residual(eq, params);
    healthy = healthy && eq.relative_residual <= 1e-9 && clearing <= 1e-9 && foc <= 1e-9;
    json r;
    r["steps"] = n;
    r["assembly"] = eq.assembly == OracleAssembly::full ? "full" : "reduced";
    r["unknowns"] = eq.unknowns;
    r["relative_residual"] = eq.relative_residual;
    r["rcond"] = eq.rcond;
    r["clearing_residual"] = clearing;
    r["foc_residual"] = foc;
    r["max_gap"] = gap.max_gap;
    json q = json::object();
    for (const auto& g : gap.quantities) q[g.name] = {{"max", g.max}, {"l2", g.l2}};
    r["quantities"] = q;
    jr.push_back(r);
    grid += (grid.back() == '=' ? "" : ",") + std::to_string(n);
  }
  const auto conv = convergence_order(runs);
  json doc = meta_json(meta(c, grid));
  doc["scenario"] = "liquidation";
  doc["delta"] = liquidation_mesh_rate(sc).value();
  doc["runs"] = jr;
  doc["fitted_order"] = runs.size() >= 2 ? json(conv.fitted_order) : json(nullptr);
  doc["finest_max_gap"] = runs.back().max_gap;
  doc["system_checks_passed"] = healthy;
  write_json(c.dir / "oracle_gap.json", doc);
  wrote(c, c.dir / "oracle_gap.json");
  if (!healthy) throw NumericalError("oracle residual, clearing or first-order check exceeded 1e-9");
  return kExitOk;
}

int cmd_equilibrium(Context& c) {
  if (!c.s.flags().config) throw ConfigError("equilibrium needs --config <file>");
  const MarketParams params = market_from_ini(c.s);
  const EquilibriumSolver solver(params);
  const auto sol = solver.solve(NoiseKey{c.s.flags().seed, 0});

  std::vector<std::string> cols{"t", "K_N", "xi_bar", "u_bar", "U_bar", "mu", "price_dev"};
  for (const auto& a : sol.agents) {
    cols.push_back("K_" + a.id);
    cols.push_back("U_" + a.id);
    cols.push_back("u_" + a.id);
    cols.push_back("xi_" + a.id);
  }
  CsvTable t(cols);
  for (std::size_t i = 0; i < sol.grid.nodes(); ++i) {
    std::vector<double> row{sol.grid[i], sol.K_N[i], sol.xi_bar[i], sol.u_bar[i], sol.U_bar[i], sol.mu[i], sol.price_dev[i]};
    for (const auto& a : sol.agents) {
      row.push_back(a.K[i]);
      row.push_back(a.U[i]);
      row.push_back(a.u[i]);
      row.push_back(a.xi[i]);
    }
    t.add_row(row);
  }
  const auto m = meta(c, "steps=" + std::to_string(params.horizon.steps()));
  t.write(c.dir / "equilibrium.csv", m);
  wrote(c, c.dir / "equilibrium.csv");

  json doc = meta_json(m);
  doc["delta"] = sol.aggregates.delta.value();
  doc["rho_bar"] = sol.aggregates.rho_bar;
  doc["eta_bar"] = sol.aggregates.eta_bar;
  doc["deterministic"] = sol.deterministic;
  json chk;
  const double clearing = clearing_residual(sol, params);
  const double foc = foc_residual(sol, params);
  const double share = share_residual(sol);
  const double price = price_identity_residual(sol);
  chk["clearing"] = clearing;
  chk["first_order"] = foc;
  chk["inventory_share"] = share;
  chk["price_identity"] = price;
  if (sol.deterministic) chk["price_representation"] = check_price_representations(sol, params);
  doc["residuals"] = chk;
  json goals = json::object();
  for (std::size_t a = 0; a < sol.agents.size(); ++a) goals[sol.agents[a].id] = number_or_null(goal_functional(sol, params, a));
  doc["goal_functional"] = goals;
  write_json(c.dir / "equilibrium_report.json", doc);
  wrote(c, c.dir / "equilibrium_report.json");
  if (!(std::max({clearing, foc, share, price}) <= 1e-8)) throw NumericalError("equilibrium residual check exceeded 1e-8");
  return kExitOk;
}

}  // namespace

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Competitive dealer-market equilibrium: figures, scaling laws and oracle checks", "dealerlab"};
  app.require_subcommand(1);
  app.set_version_flag("--version", std::string(version()));
  Flags flags;
  std::string config_path;
  long long threads = 0;
  std::uint64_t seed = 0;
  std::size_t steps = 0, paths = 0;
  std::string lambda;

  const std::vector<std::pair<std::string, std::string>> commands{
      {"liquidation", "optimal liquidation paths (fig1_strategies.csv, fig1_price.csv)"},
      {"diffusive", "diffusive-target paths and OU regression (fig2_paths.csv)"},
      {"welfare", "client welfare with and without segmentation (fig3_welfare.csv)"},
      {"scaling-smooth", "liquidity-cost scaling for smooth noise demand"},
      {"scaling-diffusive", "liquidity-cost scaling for diffusive noise demand"},
      {"oracle-check", "discrete Nash oracle against the closed form"},
      {"equilibrium", "generic equilibrium for a config file"},
  };
  std::vector<CLI::App*> subs;
  for (const auto& [name, help] : commands) {
    auto* sub = app.add_subcommand(name, help);
    sub->add_option("--config", config_path, "INI config file");
    sub->add_option("--out", flags.out, "output directory");
    sub->add_option("--seed", seed, "64-bit seed for Monte Carlo draws");
    sub->add_option("--steps", steps, "time steps (grid size)")->check(CLI::PositiveNumber);
    sub->add_option("--paths", paths, "Monte Carlo paths")->check(CLI::PositiveNumber);
    sub->add_option("--lambda", lambda, "open-market cost (single value or comma list)");
    sub->add_option("--threads", threads, "worker threads (0 = runtime default)")->check(CLI::NonNegativeNumber);
    subs.push_back(sub);
  }

  std::vector<std::string> reversed(args.rbegin(), args.rend());
  try {
    app.parse(reversed);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? kExitOk : kExitConfig;
  }

  for (auto* sub : subs)
    if (sub->parsed()) flags.command = sub->get_name();
  auto* active = app.get_subcommands().front();
  if (!config_path.empty()) flags.config = config_path;
  flags.seed = seed;
  if (active->count("--steps")) flags.steps = steps;
  if (active->count("--paths")) flags.paths = paths;
  if (active->count("--lambda")) flags.lambda = lambda;
  flags.threads = static_cast<int>(threads);

  try {
    if (flags.threads > 0) set_worker_count(flags.threads);
    IniData ini = flags.config ? read_ini(*flags.config) : IniData{};
    Settings settings(flags, std::move(ini));
    Context ctx{settings, out, flags.out};
    const auto& cmd = flags.command;
    if (cmd == "liquidation") return cmd_liquidation(ctx);
    if (cmd == "diffusive") return cmd_diffusive(ctx);
    if (cmd == "welfare") return cmd_welfare(ctx);
    if (cmd == "scaling-smooth") return cmd_scaling(ctx, DemandFamily::smooth);
    if (cmd == "scaling-diffusive") return cmd_scaling(ctx, DemandFamily::diffusive);
    if (cmd == "oracle-check") return cmd_oracle(ctx);
    if (cmd == "equilibrium") return cmd_equilibrium(ctx);
    err << "unknown subcommand\n";
    return kExitConfig;
  } catch (const ConfigError& e) {
    err << "configuration error: " << e.what() << "\n";
    return kExitConfig;
  } catch (const DomainError& e) {
    err << "configuration error: " << e.what() << "\n";
    return kExitConfig;
  } catch (const NumericalError& e) {
    err << "numerical failure: " << e.what() << "\n";
    return kExitNumerical;
  } catch (const std::exception& e) {
    err << "numerical failure: " << e.what() << "\n";
    return kExitNumerical;
  }
}

}  // namespace dealer::cli
