// Acceptance runner: one PASS/FAIL line per criterion, nonzero exit if any fails.

#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <iostream>
#include <json.hpp>
#include <sstream>
#include <string>
#include <vector>

#include "dealer/asymptotics.hpp"
#include "dealer/cli.hpp"
#include "dealer/discrete_oracle.hpp"
#include "dealer/equilibrium.hpp"
#include "dealer/regression.hpp"
#include "dealer/scenarios.hpp"
#include "support.hpp"

using namespace dealer;
namespace fs = std::filesystem;

namespace {

struct Verdict {
  bool pass = true;
  std::ostringstream detail;

  void require(bool ok, const std::string& what) {
    if (!ok) {
      pass = false;
      detail << " [failed: " << what << "]";
    }
  }
};

std::string num(double v, int digits = 4) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.*g", digits, v);
  return buf;
}

double seconds_since(std::chrono::steady_clock::time_point t0) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

bool within(double value, double target, double rel) { return std::abs(value - target) <= rel * std::abs(target); }

// 1. Equilibrium identities on randomized deterministic markets.
void internal_consistency(Verdict& v) {
  const auto t0 = std::chrono::steady_clock::now();
  double clearing = 0, foc = 0, share = 0, price = 0;
  std::size_t agents = 0, no_access = 0;
  for (std::uint64_t seed = 1; seed <= 20; ++seed) {
    const auto p = testing::random_market(seed, 2000);
    const auto sol = solve_equilibrium(p);
    clearing = std::max(clearing, clearing_residual(sol, p));
    foc = std::max(foc, foc_residual(sol, p));
    share = std::max(share, share_residual(sol));
    price = std::max(price, price_identity_residual(sol));
    agents += p.agents.size();
    for (const auto& a : p.agents) no_access += a.access_cost.is_no_access();
  }
  const double secs = seconds_since(t0);
  v.detail << "20 markets, " << agents << " agents (" << no_access << " without access): clearing " << num(clearing)
           << ", FOC " << num(foc) << ", share " << num(share) << ", price identity " << num(price) << ", "
           << num(secs, 3) << " s";
  v.require(clearing <= 1e-8, "clearing");
  v.require(foc <= 1e-8, "first-order condition");
  v.require(share <= 1e-8, "inventory share");
  v.require(price <= 1e-8, "price identity");
  v.require(secs < 10.0, "runtime");
  v.require(no_access > 0, "roster lacks no-access agents");
}

// 2. Discrete Nash oracle against the liquidation closed form.
void oracle_equivalence(Verdict& v) {
  const auto t0 = std::chrono::steady_clock::now();
  const LiquidationScenario s;
  std::vector<GapReport> runs;
  double residual = 0.0;
  for (std::size_t n : {250u, 500u, 1000u, 2000u}) {
    const auto params = liquidation_market(s, n);
    const auto eq = assemble_and_solve(params, n);
    residual = std::max({residual, oracle_foc_residual(eq, params), oracle_clearing_residual(eq, params)});
    const auto cf = liquidation_closed_form(s, Horizon::uniform(s.T, n));
    ReferencePaths ref;
    ref.U_bar = cf.U_bar;
    ref.price_dev = cf.price_dev;
    ref.K = {{}, cf.K_c};
    runs.push_back(oracle_gap(eq, ref, {"U_bar", "price_dev", "K:client1"}));
  }
  const auto conv = convergence_order(runs);
  const double secs = seconds_since(t0);
  v.detail << "max gap";
  for (const auto& r : runs) v.detail << " N=" << r.steps << ":" << num(r.max_gap);
  v.detail << ", order " << num(conv.fitted_order) << ", oracle residual " << num(residual) << ", " << num(secs, 3)
           << " s";
  v.require(runs.back().max_gap <= 5e-3, "gap at N=2000");
  v.require(std::abs(conv.fitted_order - 1.0) <= 0.3, "convergence order");
  v.require(residual <= 1e-9, "oracle residual");
  v.require(secs < 60.0, "runtime");
}

// 3. Smooth demand: cost ~ lambda (M+1)/M E int (mu^N)^2 dt.
void smooth_law(Verdict& v) {
  const auto t0 = std::chrono::steady_clock::now();
  ScalingConfig c;
  c.family = DemandFamily::smooth;
  c.demand = parse_demand("smooth(ou(1,1,0,1))");
  c.paths = 10000;
  c.seed = 1;
  const auto reports = scaling_studies(c, {{1, 0.1}, {2, 0.1}, {10, 0.1}});
  for (const auto& r : reports) {
    const double err = r.prefactor / r.prefactor_theory - 1.0;
    v.detail << "M=" << r.M << ": slope " << num(r.slope) << ", prefactor " << num(r.prefactor, 5) << " vs "
             << num(r.prefactor_theory, 5) << " (" << num(100 * err, 2) << "%); ";
    v.require(std::abs(r.slope - 1.0) <= 0.05, "slope M=" + std::to_string(r.M));
    v.require(std::abs(err) <= 0.05, "prefactor M=" + std::to_string(r.M));
  }
  ScalingConfig d = c;
  d.demand = SmoothRateDemand{ConstantDemand{1.0}};
  v.detail << "deterministic:";
  for (unsigned M : {1u, 2u, 10u}) {
    d.M = M;
    const auto r = scaling_study(d);
    const double theory = (M + 1.0) / M * d.T;
    v.detail << " M=" << M << " " << num(r.prefactor, 5) << "/" << num(theory, 5);
    v.require(within(r.prefactor, theory, 0.02), "deterministic prefactor M=" + std::to_string(M));
    v.require(r.estimates.back().std_error == 0.0, "deterministic standard error");
  }
  const double secs = seconds_since(t0);
  v.detail << "; " << num(secs, 3) << " s";
  v.require(secs < 120.0, "runtime");
}

// 4. Brownian demand: cost ~ sqrt(lambda (M+1)/(M rho_d)) T, and the rho_d dependence.
void diffusive_law(Verdict& v) {
  const auto t0 = std::chrono::steady_clock::now();
  ScalingConfig c;
  c.family = DemandFamily::diffusive;
  c.demand = BrownianDemand{0.0, 1.0};
  c.paths = 10000;
  c.seed = 2;
  const std::vector<PanelChoice> sweep{{2, 0.05}, {2, 0.1}, {2, 0.2}};
  const auto reports = scaling_studies(c, sweep);
  const auto& main = reports[1];
  const double theory = std::sqrt(3.0 / (2.0 * 0.1));
  v.detail << "M=2 rho_d=0.1: slope " << num(main.slope) << " CI [" << num(main.slope_ci_low) << ","
           << num(main.slope_ci_high) << "], prefactor " << num(main.prefactor, 5) << " +- " << num(main.prefactor_se, 2)
           << " vs " << num(theory, 5) << "; sweep prefactor/theory:";
  v.require(std::abs(main.slope - 0.5) <= 0.05, "slope");
  v.require(std::abs(main.prefactor - theory) <= 0.05 * theory + 2.0 * main.prefactor_se, "prefactor");
  std::vector<double> log_rho, log_pref;
  for (std::size_t k = 0; k < reports.size(); ++k) {
    const auto& r = reports[k];
    v.detail << " " << num(r.rho_d, 2) << ":" << num(r.prefactor / r.prefactor_theory, 4);
    v.require(std::abs(r.slope - 0.5) <= 0.05, "sweep slope rho_d=" + num(r.rho_d, 2));
    // relative to the middle panel the prefactor should scale as (rho_d / 0.1)^(-1/2)
    v.require(within(r.prefactor / main.prefactor, std::sqrt(0.1 / r.rho_d), 0.10), "rho_d scaling " + num(r.rho_d, 2));
    log_rho.push_back(std::log(r.rho_d));
    log_pref.push_back(std::log(r.prefactor));
  }
  const auto fit = fit_line(log_rho, log_pref);
  const double secs = seconds_since(t0);
  v.detail << "; rho_d exponent " << num(fit.slope) << "; " << num(secs, 3) << " s";
  v.require(within(fit.slope, -0.5, 0.10), "rho_d exponent");
  v.require(secs < 600.0, "runtime");
}

// 5. Tracking error of the dealers' open-market inventory.
void tracking_proxy(Verdict& v) {
  const auto t0 = std::chrono::steady_clock::now();
  ScalingConfig c;
  c.demand = BrownianDemand{0.0, 1.0};
  c.lambdas = {1e-1, 1e-2, 1e-3, 1e-4};
  c.paths = 4000;
  c.seed = 3;
  const auto m = convergence_check(c);
  v.detail << "E int (K^N - U)^2 dt:";
  for (const auto& e : m.estimates) v.detail << " " << num(e.lambda, 1) << ":" << num(e.mean) << "+-" << num(e.std_error, 2);
  v.detail << ", reduction " << num(m.reduction, 3) << "x, " << num(seconds_since(t0), 3) << " s";
  v.require(m.decreasing, "monotone within two standard errors");
  v.require(m.reduction >= 10.0, "tenfold reduction");
}

// 6. Client welfare with and without segmentation.
void welfare(Verdict& v) {
  std::size_t cells = 0, ordered = 0;
  for (unsigned M = 1; M <= 20; ++M)
    for (double ratio : {0.5, 1.0, 2.0}) {
      LiquidationScenario s;
      s.M = DealerCount::finite(M);
      s.rho_c = ratio * s.rho_d;
      const auto w = segmentation_welfare(s);
      ++cells;
      ordered += w.J_c_integrated >= w.J_c_segmented;
    }
  LiquidationScenario small;
  small.lambda = 1e-6;
  const auto w = segmentation_welfare(small);
  const double target = 7.0 * std::sqrt(12.0) / 19.0;

  double worst = 0.0;
  for (unsigned M : {1u, 4u})
    for (bool integrated : {false, true}) {
      LiquidationScenario s;
      s.M = DealerCount::finite(M);
      const auto q = segmentation_welfare(s);
      const auto params = liquidation_market(s, 20000, integrated);
      const auto sol = solve_equilibrium(params);
      const double sim = goal_functional(sol, params, params.agents.size() - 1);
      const double quad = integrated ? q.J_c_integrated : q.J_c_segmented;
      worst = std::max(worst, std::abs(sim / quad - 1.0));
    }
  v.detail << "J_int >= J_c in " << ordered << "/" << cells << " cells; ratio at lambda=1e-6 " << num(w.ratio, 6)
           << " vs " << num(target, 6) << "; quadrature vs goal functional rel. gap " << num(worst);
  v.require(ordered == cells, "welfare ordering");
  v.require(within(w.ratio, target, 0.01), "small-lambda ratio");
  v.require(worst <= 1e-3, "quadrature vs goal functional");
}

int cli(const std::vector<std::string>& args) {
  std::ostringstream out, err;
  const int code = cli::run(args, out, err);
  if (code != 0) std::cerr << err.str();
  return code;
}

// 7. Figure files from the command-line tool.
void figures(Verdict& v) {
  const auto dir = testing::scratch_dir("accept_fig");
  v.require(cli({"liquidation", "--out", dir.string()}) == 0, "liquidation run");
  v.require(cli({"diffusive", "--out", dir.string()}) == 0, "diffusive run");
  v.require(cli({"welfare", "--out", dir.string()}) == 0, "welfare run");
  if (!v.pass) return;

  const auto k = testing::read_csv(dir / "fig1_strategies.csv");
  const auto p = testing::read_csv(dir / "fig1_price.csv");
  const double a = std::sqrt(50.0);
  const double sd1 = -std::tanh(a) / (0.2 * a), sdinf = -std::tanh(10.0) / (0.2 * 10.0);
  const auto& k0 = k.rows.front();
  const auto& p0 = p.rows.front();
  v.detail << "fig1 K_c(0)=" << num(k0[1], 8) << "/" << num(k0[2], 8) << ", (S-D)(0)=" << num(p0[1], 8) << "/"
           << num(p0[2], 8);
  v.require(std::abs(k0[1] + 0.5) <= 1e-6 && std::abs(k0[2] + 0.5) <= 1e-6, "fig1 bulk trade");
  v.require(std::abs(p0[1] - sd1) <= 1e-6 && std::abs(p0[1] + 0.7071) <= 5e-5, "fig1 price M=1");
  v.require(std::abs(p0[2] - sdinf) <= 1e-6 && std::abs(p0[2] + 0.5) <= 5e-5, "fig1 price M=inf");
  v.require(k.header.size() == 3 && k.rows.size() == 1001, "fig1 layout");

  std::ifstream js(dir / "diffusive_report.json");
  const auto doc = nlohmann::json::parse(js);
  double mart = 0.0;
  for (const auto& e : doc["dealer_counts"]) {
    mart = std::max(mart, e["martingale_share_max_error"].get<double>());
    v.require(e["dealer_share"].get<double>() == 0.5, "dealer share");
  }
  const auto f2 = testing::read_csv(dir / "fig2_paths.csv");
  v.detail << "; fig2 martingale share error " << num(mart) << " over " << f2.rows.size() - 1 << " steps";
  v.require(mart <= 1e-12, "fig2 martingale share");
  v.require(f2.header.size() == 6, "fig2 layout");

  const auto f3 = testing::read_csv(dir / "fig3_welfare.csv");
  bool ordered = true;
  for (const auto& r : f3.rows) ordered &= r[f3.column("J_c_int")] >= r[f3.column("J_c")];
  v.detail << "; fig3 " << f3.rows.size() << " rows";
  v.require(f3.rows.size() == 20 && ordered, "fig3 rows");
  fs::remove_all(dir);
}

// 8. Byte-identical outputs across runs and thread counts.
void determinism(Verdict& v) {
  const std::string configs = std::string(DEALERLAB_SOURCE_DIR) + "/configs/";
  const std::vector<std::vector<std::string>> commands{
      {"liquidation"},
      {"diffusive", "--paths", "400", "--seed", "5"},
      {"welfare"},
      {"scaling-smooth", "--paths", "200", "--seed", "7", "--lambda", "1e-1,1e-2,1e-3"},
      {"scaling-diffusive", "--paths", "200", "--seed", "7", "--lambda", "1e-1,1e-2,1e-3"},
      {"oracle-check", "--steps", "400"},
      {"equilibrium", "--config", configs + "mixed_market.ini"},
      {"equilibrium", "--config", configs + "diffusive_market.ini", "--seed", "11"},
  };
  std::size_t files = 0;
  for (const auto& cmd : commands) {
    std::vector<fs::path> dirs;
    for (const char* threads : {"1", "1", "3"}) {
      dirs.push_back(testing::scratch_dir("accept_det"));
      auto args = cmd;
      args.insert(args.end(), {"--out", dirs.back().string(), "--threads", threads});
      v.require(cli(args) == 0, cmd[0] + " run");
    }
    for (const auto& entry : fs::directory_iterator(dirs[0])) {
      const auto name = entry.path().filename();
      const auto ref = testing::slurp(entry.path());
      ++files;
      for (std::size_t k = 1; k < dirs.size(); ++k)
        v.require(testing::slurp(dirs[k] / name) == ref, cmd[0] + "/" + name.string());
    }
    for (const auto& d : dirs) fs::remove_all(d);
  }
  v.detail << commands.size() << " invocations, " << files << " files compared across 2 runs and 1 vs 3 threads";
}

}  // namespace

int main() {
  const std::vector<std::pair<std::string, std::function<void(Verdict&)>>> criteria{
      {"internal consistency", internal_consistency},
      {"oracle equivalence", oracle_equivalence},
      {"smooth-demand cost law", smooth_law},
      {"Brownian-demand cost law", diffusive_law},
      {"tracking error proxy", tracking_proxy},
      {"segmentation welfare", welfare},
      {"figure reproduction", figures},
      {"determinism", determinism},
  };
  int failed = 0;
  for (std::size_t i = 0; i < criteria.size(); ++i) {
    Verdict v;
    try {
      criteria[i].second(v);
    } catch (const std::exception& e) {
      v.pass = false;
      v.detail << " [exception: " << e.what() << "]";
    }
    failed += !v.pass;
    std::cout << "criterion " << i + 1 << " " << (v.pass ? "PASS" : "FAIL") << "  " << criteria[i].first << ": "
              << v.detail.str() << std::endl;
  }
  std::cout << (failed ? std::to_string(failed) + " criteria failed" : "all criteria passed") << std::endl;
  return failed ? 1 : 0;
}
