#include "dealer/equilibrium.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

#include "dealer/errors.hpp"
#include "dealer/quadrature.hpp"

namespace dealer {

namespace {

double max_abs(std::span<const double> v) {
  double m = 0.0;
  for (double x : v) m = std::max(m, std::abs(x));
  return m;
}

bool any_stochastic(const MarketParams& p) {
  if (!is_deterministic(p.noise_demand)) return true;
  return std::any_of(p.agents.begin(), p.agents.end(), [](const AgentSpec& a) { return !is_deterministic(a.target); });
}

}  // namespace

EquilibriumSolver::EquilibriumSolver(MarketParams params)
    : params_(std::move(params)),
      agg_(aggregate(params_)),
      driver_(combine(params_.noise_demand, 1.0, agg_.xi_bar, 1.0)),
      forward_(driver_, agg_.delta, params_.horizon) {}

EquilibriumSolution EquilibriumSolver::solve(std::optional<NoiseKey> key) const {
  const Horizon& grid = params_.horizon;
  const std::size_t n = grid.nodes();
  const bool stochastic = any_stochastic(params_);
  if (stochastic && !key) throw DomainError("stochastic drivers need a noise key");

  std::vector<double> z;
  if (stochastic) {
    z.resize(grid.steps());
    fill_standard_normals(*key, z);
  }

  EquilibriumSolution sol;
  sol.grid = grid;
  sol.aggregates = agg_;
  sol.deterministic = !stochastic;
  sol.K_N = generate(params_.noise_demand, grid, z).level;
  sol.xi_bar.assign(n, 0.0);
  sol.agents.resize(params_.agents.size());
  for (std::size_t a = 0; a < params_.agents.size(); ++a) {
    const auto& agent_spec = params_.agents[a];
    sol.agents[a].id = agent_spec.id;
    sol.agents[a].xi = generate(agent_spec.target, grid, z).level;
    for (std::size_t i = 0; i < n; ++i) sol.xi_bar[i] += agent_spec.mass * sol.agents[a].xi[i];
  }

  // Level from the individual paths keeps clearing exact; the rate (smooth
  // drivers) comes from the combined process on the same draws.
  RealizedPath x = generate(driver_, grid, z);
  for (std::size_t i = 0; i < n; ++i) x.level[i] = sol.K_N[i] + sol.xi_bar[i];

  FbsdePath fb = forward_.solve(x);
  sol.u_bar = std::move(fb.u);
  sol.U_bar = std::move(fb.U);

  const double rho_bar = agg_.rho_bar;
  const double sens = agg_.price_sensitivity();
  sol.mu.resize(n);
  sol.price_dev.resize(n);
  for (std::size_t i = 0; i < n; ++i) {
    sol.mu[i] = (sol.U_bar[i] - x.level[i]) / rho_bar;
    sol.price_dev[i] = sens * sol.u_bar[i];
  }

  for (std::size_t a = 0; a < params_.agents.size(); ++a) {
    const auto& agent_spec = params_.agents[a];
    auto& out = sol.agents[a];
    const double share = agg_.eta_a[a] / agg_.eta_bar;
    out.K.resize(n);
    out.U.resize(n);
    out.u.resize(n);
    for (std::size_t i = 0; i < n; ++i) {
      out.U[i] = share * sol.U_bar[i];
      out.u[i] = share * sol.u_bar[i];
      out.K[i] = out.xi[i] - out.U[i] + agent_spec.risk_tolerance * sol.mu[i];
    }
  }

  const double scale = 1.0 + max_abs(sol.K_N) + max_abs(sol.xi_bar);
  const double tol = (stochastic ? 1e-8 : 1e-10) * scale;
  if (const double r = clearing_residual(sol, params_); !(r <= tol)) {
    std::ostringstream msg;
    msg << "dealer market does not clear: residual " << r << " exceeds " << tol;
    throw NumericalError(msg.str());
  }
  return sol;
}

EquilibriumSolution solve_equilibrium(const MarketParams& params, std::optional<NoiseKey> key) {
  return EquilibriumSolver(params).solve(key);
}

double clearing_residual(const EquilibriumSolution& sol, const MarketParams& params) {
  double r = 0.0;
  for (std::size_t i = 0; i < sol.K_N.size(); ++i) {
    double s = sol.K_N[i];
    for (std::size_t a = 0; a < sol.agents.size(); ++a) s += params.agents[a].mass * sol.agents[a].K[i];
    r = std::max(r, std::abs(s));
  }
  return r;
}

double foc_residual(const EquilibriumSolution& sol, const MarketParams& params) {
  double r = 0.0;
  for (std::size_t a = 0; a < sol.agents.size(); ++a) {
    const auto& p = sol.agents[a];
    const double rho = params.agents[a].risk_tolerance;
    for (std::size_t i = 0; i < sol.mu.size(); ++i)
      r = std::max(r, std::abs(sol.mu[i] - (p.U[i] + p.K[i] - p.xi[i]) / rho));
  }
  return r;
}

double share_residual(const EquilibriumSolution& sol) {
  const auto& g = sol.aggregates;
  double r = 0.0;
  for (std::size_t a = 0; a < sol.agents.size(); ++a) {
    const double share = g.eta_a[a] / g.eta_bar;
    for (std::size_t i = 0; i < sol.U_bar.size(); ++i)
      r = std::max(r, std::abs(sol.agents[a].U[i] - share * sol.U_bar[i]));
  }
  return r;
}

double price_identity_residual(const EquilibriumSolution& sol) {
  const double sens = sol.aggregates.price_sensitivity();
  double r = 0.0;
  for (std::size_t i = 0; i < sol.u_bar.size(); ++i) r = std::max(r, std::abs(sol.price_dev[i] - sens * sol.u_bar[i]));
  return r;
}

double check_price_representations(const EquilibriumSolution& sol, const MarketParams&) {
  if (!sol.deterministic) throw DomainError("price representation check needs deterministic drivers");
  const auto t = sol.grid.times();
  const std::size_t n = t.size();
  double tail = 0.0;  // int_{t_i}^T mu ds
  double r = std::abs(sol.price_dev[n - 1]);
  for (std::size_t i = n - 1; i-- > 0;) {
    tail += 0.5 * (t[i + 1] - t[i]) * (sol.mu[i] + sol.mu[i + 1]);
    r = std::max(r, std::abs(-tail - sol.price_dev[i]));
  }
  return r;
}

AgentEnvironment environment(const EquilibriumSolution& sol, const MarketParams& params, std::size_t agent,
                             std::vector<double>& u_others) {
  const auto& agent_spec = params.agents.at(agent);
  const auto& own = sol.agents.at(agent);
  u_others.resize(sol.u_bar.size());
  for (std::size_t i = 0; i < u_others.size(); ++i) u_others[i] = sol.u_bar[i] - agent_spec.mass * own.u[i];
  AgentEnvironment env;
  env.t = sol.grid.times();
  env.mu = sol.mu;
  env.u_others = u_others;
  env.xi = own.xi;
  env.lambda = params.lambda;
  env.mass = agent_spec.mass;
  env.rho = agent_spec.risk_tolerance;
  env.access = agent_spec.access_cost;
  return env;
}

double goal_value(const AgentEnvironment& env, std::span<const double> K, std::span<const double> u,
                  std::span<const double> U) {
  const std::size_t n = env.t.size();
  if (K.size() != n || u.size() != n || U.size() != n) throw DomainError("goal_value: strategy does not match grid");
  if (env.access.is_no_access() && max_abs(u) > 0.0) return -std::numeric_limits<double>::infinity();
  const double quad = env.access.is_no_access() ? 0.0 : env.lambda * env.mass + 0.5 * env.access.value();
  std::vector<double> f(n);
  for (std::size_t i = 0; i < n; ++i) {
    const double gap = env.xi[i] - K[i] - U[i];
    f[i] = K[i] * env.mu[i] - (env.lambda * env.u_others[i] * u[i] + quad * u[i] * u[i]) - gap * gap / (2.0 * env.rho);
  }
  return trapezoid(env.t, f);
}

double goal_functional(const EquilibriumSolution& sol, const MarketParams& params, std::size_t agent) {
  std::vector<double> storage;
  const auto env = environment(sol, params, agent, storage);
  const auto& own = sol.agents.at(agent);
  return goal_value(env, own.K, own.u, own.U);
}

}  // namespace dealer
