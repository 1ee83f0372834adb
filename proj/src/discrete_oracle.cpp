#include "dealer/discrete_oracle.hpp"

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <sstream>

#include "dealer/errors.hpp"
#include "dealer/regression.hpp"
#include "dealer/sim_paths.hpp"

namespace dealer {

namespace {

struct Setup {
  Horizon grid;
  std::size_t N;
  std::vector<double> h;     // step sizes, N entries
  std::vector<double> tail;  // tail[j] = sum_{i >= j} h_i, N+1 entries
  std::vector<double> K_N;
  std::vector<std::vector<double>> xi;
  std::vector<double> xi_bar;
  double rho_bar = 0.0;
};

Setup prepare(const MarketParams& params, std::size_t steps) {
  if (auto d = validate(params); !d.ok()) throw ConfigError(d.joined());
  if (steps < 1) throw ConfigError("oracle needs at least one step");
  if (!is_deterministic(params.noise_demand)) throw DomainError("oracle supports deterministic demands only");
  for (const auto& a : params.agents)
    if (!is_deterministic(a.target)) throw DomainError("oracle supports deterministic demands only");

  Setup s{steps == params.horizon.steps() ? params.horizon : Horizon::uniform(params.horizon.T(), steps), steps, {}, {}, {}, {}, {}, 0.0};
  if (auto e = check_demand(params.noise_demand, s.grid.nodes()); !e.empty()) throw ConfigError(e);
  s.h.resize(steps);
  for (std::size_t i = 0; i < steps; ++i) s.h[i] = s.grid.step(i);
  s.tail.assign(steps + 1, 0.0);
  for (std::size_t j = steps; j-- > 0;) s.tail[j] = s.tail[j + 1] + s.h[j];
  s.K_N = generate(params.noise_demand, s.grid, NoiseKey{}).level;
  s.xi_bar.assign(steps + 1, 0.0);
  for (const auto& a : params.agents) {
    if (auto e = check_demand(a.target, s.grid.nodes()); !e.empty()) throw ConfigError(e);
    s.xi.push_back(generate(a.target, s.grid, NoiseKey{}).level);
    for (std::size_t i = 0; i <= steps; ++i) s.xi_bar[i] += a.mass * s.xi.back()[i];
    s.rho_bar += a.mass * a.risk_tolerance;
  }
  return s;
}

// Rate coefficient of an agent's own trading in its open-market condition.
double own_coefficient(const AgentSpec& a, double lambda) { return 2.0 * a.mass * lambda + a.access_cost.value(); }

struct Solved {
  Eigen::VectorXd x;
  double residual;
  double rcond;
};

Solved dense_solve(const Eigen::MatrixXd& A, const Eigen::VectorXd& b) {
  Solved out{Eigen::VectorXd::Zero(b.size()), 0.0, 1.0};
  if (b.size() == 0) return out;
  Eigen::PartialPivLU<Eigen::MatrixXd> lu(A);
  out.rcond = lu.rcond();
  if (!(out.rcond > 1e-14)) {
    std::ostringstream msg;
    msg << "oracle system is singular (reciprocal condition estimate " << out.rcond << ")";
    throw NumericalError(msg.str());
  }
  out.x = lu.solve(b);
  const double anorm = A.cwiseAbs().rowwise().sum().maxCoeff();
  const double xnorm = out.x.cwiseAbs().maxCoeff();
  const double r = (A * out.x - b).cwiseAbs().maxCoeff();
  out.residual = xnorm > 0.0 ? r / (anorm * xnorm) : r;
  return out;
}

void accumulate(DiscreteEquilibrium& eq, const MarketParams& params, const Setup& s) {
  const std::size_t N = s.N;
  const std::size_t A = params.agents.size();
  eq.U.assign(A, std::vector<double>(N + 1, 0.0));
  eq.u_bar.assign(N, 0.0);
  eq.U_bar.assign(N + 1, 0.0);
  for (std::size_t a = 0; a < A; ++a) {
    for (std::size_t i = 0; i < N; ++i) eq.U[a][i + 1] = eq.U[a][i] + eq.u[a][i] * s.h[i];
    const double m = params.agents[a].mass;
    for (std::size_t i = 0; i < N; ++i) eq.u_bar[i] += m * eq.u[a][i];
    for (std::size_t i = 0; i <= N; ++i) eq.U_bar[i] += m * eq.U[a][i];
  }
  eq.price_dev.assign(N, 0.0);
  double tail = 0.0;
  for (std::size_t i = N; i-- > 0;) {
    tail += eq.mu[i] * s.h[i];
    eq.price_dev[i] = -tail;
  }
}

DiscreteEquilibrium solve_full(const MarketParams& params, const Setup& s) {
  const std::size_t N = s.N;
  const std::size_t A = params.agents.size();
  const std::size_t n = N * (2 * A + 1);
  auto K = [&](std::size_t a, std::size_t i) { return a * 2 * N + i; };
  auto u = [&](std::size_t a, std::size_t i) { return a * 2 * N + N + i; };
  auto mu = [&](std::size_t i) { return 2 * N * A + i; };

  Eigen::MatrixXd M = Eigen::MatrixXd::Zero(n, n);
  Eigen::VectorXd b = Eigen::VectorXd::Zero(n);
  for (std::size_t a = 0; a < A; ++a) {
    const auto& ag = params.agents[a];
    for (std::size_t i = 0; i < N; ++i) {
      // dealer market: rho mu_i - U_i - K_i = -xi_i
      const std::size_t r = K(a, i);
      M(r, mu(i)) = ag.risk_tolerance;
      M(r, K(a, i)) = -1.0;
      for (std::size_t k = 0; k < i; ++k) M(r, u(a, k)) = -s.h[k];
      b(r) = -s.xi[a][i];
    }
    for (std::size_t i = 0; i < N; ++i) {
      const std::size_t r = u(a, i);
      if (ag.access_cost.is_no_access()) {
        M(r, u(a, i)) = 1.0;
        continue;
      }
      // open market: lambda u^{-a}_i + (2 m lambda + lambda^a) u_i
      //              + (1/rho) sum_{j>i} (K_j + U_j - xi_j) dt_j = 0
      for (std::size_t c = 0; c < A; ++c)
        if (c != a && !params.agents[c].access_cost.is_no_access()) M(r, u(c, i)) += params.lambda * params.agents[c].mass;
      M(r, u(a, i)) += own_coefficient(ag, params.lambda);
      const double inv = 1.0 / ag.risk_tolerance;
      double rhs = 0.0;
      for (std::size_t j = i + 1; j < N; ++j) {
        M(r, K(a, j)) += inv * s.h[j];
        rhs += inv * s.h[j] * s.xi[a][j];
      }
      for (std::size_t k = 0; k + 1 < N; ++k) M(r, u(a, k)) += inv * s.h[k] * s.tail[std::max(i, k) + 1];
      b(r) = rhs;
    }
  }
  for (std::size_t i = 0; i < N; ++i) {
    for (std::size_t a = 0; a < A; ++a) M(mu(i), K(a, i)) = params.agents[a].mass;
    b(mu(i)) = -s.K_N[i];
  }

  const auto sol = dense_solve(M, b);
  DiscreteEquilibrium eq;
  eq.K.assign(A, std::vector<double>(N));
  eq.u.assign(A, std::vector<double>(N));
  eq.mu.resize(N);
  for (std::size_t i = 0; i < N; ++i) {
    eq.mu[i] = sol.x(mu(i));
    for (std::size_t a = 0; a < A; ++a) {
      eq.K[a][i] = sol.x(K(a, i));
      eq.u[a][i] = sol.x(u(a, i));
    }
  }
  eq.relative_residual = sol.residual;
  eq.rcond = sol.rcond;
  eq.unknowns = n;
  eq.assembly = OracleAssembly::full;
  accumulate(eq, params, s);
  return eq;
}

DiscreteEquilibrium solve_reduced(const MarketParams& params, const Setup& s) {
  const std::size_t N = s.N;
  const std::size_t A = params.agents.size();
  std::vector<std::size_t> access;  // agents with open-market access
  for (std::size_t a = 0; a < A; ++a)
    if (!params.agents[a].access_cost.is_no_access()) access.push_back(a);
  const std::size_t P = access.size();
  const std::size_t n = N * P;

  // Substituting mu = (sum_b m_b U^b - K^N - xi_bar)/rho_bar and
  // K^a + U^a - xi^a = rho^a mu leaves, for each accessing agent a and step k,
  //   lambda u^{-a}_k + (2 m_a lambda + lambda^a) u^a_k + sum_{j>k} mu_j dt_j = 0.
  Eigen::MatrixXd M = Eigen::MatrixXd::Zero(n, n);
  Eigen::VectorXd b = Eigen::VectorXd::Zero(n);
  for (std::size_t p = 0; p < P; ++p) {
    const auto& ag = params.agents[access[p]];
    for (std::size_t k = 0; k < N; ++k) {
      const std::size_t r = p * N + k;
      for (std::size_t q = 0; q < P; ++q) {
        const double m = params.agents[access[q]].mass;
        M(r, q * N + k) += q == p ? own_coefficient(ag, params.lambda) : params.lambda * m;
        for (std::size_t l = 0; l + 1 < N; ++l) M(r, q * N + l) += m * s.h[l] * s.tail[std::max(k, l) + 1] / s.rho_bar;
      }
      double rhs = 0.0;
      for (std::size_t j = k + 1; j < N; ++j) rhs += s.h[j] * (s.K_N[j] + s.xi_bar[j]);
      b(r) = rhs / s.rho_bar;
    }
  }

  const auto sol = dense_solve(M, b);
  DiscreteEquilibrium eq;
  eq.u.assign(A, std::vector<double>(N, 0.0));
  for (std::size_t p = 0; p < P; ++p)
    for (std::size_t k = 0; k < N; ++k) eq.u[access[p]][k] = sol.x(p * N + k);
  eq.mu.resize(N);
  eq.K.assign(A, std::vector<double>(N));
  accumulate(eq, params, s);
  for (std::size_t i = 0; i < N; ++i) {
    eq.mu[i] = (eq.U_bar[i] - s.K_N[i] - s.xi_bar[i]) / s.rho_bar;
    for (std::size_t a = 0; a < A; ++a)
      eq.K[a][i] = params.agents[a].risk_tolerance * eq.mu[i] - eq.U[a][i] + s.xi[a][i];
  }
  accumulate(eq, params, s);  // price_dev needs mu
  eq.relative_residual = sol.residual;
  eq.rcond = sol.rcond;
  eq.unknowns = n;
  eq.assembly = OracleAssembly::reduced;
  return eq;
}

}  // namespace

DiscreteEquilibrium assemble_and_solve(const MarketParams& params, std::size_t steps, OracleAssembly assembly) {
  const Setup s = prepare(params, steps);
  const std::size_t full_size = steps * (2 * params.agents.size() + 1);
  if (assembly == OracleAssembly::automatic)
    assembly = full_size <= kFullAssemblyLimit ? OracleAssembly::full : OracleAssembly::reduced;
  DiscreteEquilibrium eq = assembly == OracleAssembly::full ? solve_full(params, s) : solve_reduced(params, s);
  eq.steps = steps;
  eq.t.assign(s.grid.times().begin(), s.grid.times().end());
  eq.K_N.assign(s.K_N.begin(), s.K_N.end() - 1);
  eq.xi_bar.assign(s.xi_bar.begin(), s.xi_bar.end() - 1);
  for (std::size_t a = 0; a < params.agents.size(); ++a) {
    eq.ids.push_back(params.agents[a].id);
    eq.xi.emplace_back(s.xi[a].begin(), s.xi[a].end() - 1);
  }
  return eq;
}

double oracle_foc_residual(const DiscreteEquilibrium& eq, const MarketParams& params) {
  double r = 0.0;
  for (std::size_t a = 0; a < eq.K.size(); ++a)
    for (std::size_t i = 0; i < eq.steps; ++i)
      r = std::max(r, std::abs(eq.mu[i] - (eq.U[a][i] + eq.K[a][i] - eq.xi[a][i]) / params.agents[a].risk_tolerance));
  return r;
}

double oracle_clearing_residual(const DiscreteEquilibrium& eq, const MarketParams& params) {
  double r = 0.0;
  for (std::size_t i = 0; i < eq.steps; ++i) {
    double s = eq.K_N[i];
    for (std::size_t a = 0; a < eq.K.size(); ++a) s += params.agents[a].mass * eq.K[a][i];
    r = std::max(r, std::abs(s));
  }
  return r;
}

GapReport oracle_gap(const DiscreteEquilibrium& eq, const ReferencePaths& ref, const std::vector<std::string>& headline) {
  GapReport rep;
  rep.steps = eq.steps;
  auto add = [&](std::string name, std::span<const double> ours, const std::vector<double>& theirs) {
    if (theirs.empty()) return;
    if (theirs.size() < eq.steps) throw DomainError("oracle_gap: reference path '" + name + "' is too short");
    QuantityGap g{std::move(name)};
    double ss = 0.0;
    for (std::size_t i = 0; i < eq.steps; ++i) {
      const double d = std::abs(ours[i] - theirs[i]);
      g.max = std::max(g.max, d);
      ss += d * d * (eq.t[i + 1] - eq.t[i]);
    }
    g.l2 = std::sqrt(ss);
    const bool counts = headline.empty() || std::find(headline.begin(), headline.end(), g.name) != headline.end();
    if (counts) rep.max_gap = std::max(rep.max_gap, g.max);
    rep.quantities.push_back(std::move(g));
  };
  add("U_bar", eq.U_bar, ref.U_bar);
  add("u_bar", eq.u_bar, ref.u_bar);
  add("mu", eq.mu, ref.mu);
  add("price_dev", eq.price_dev, ref.price_dev);
  for (std::size_t a = 0; a < ref.K.size() && a < eq.K.size(); ++a) add("K:" + eq.ids[a], eq.K[a], ref.K[a]);
  return rep;
}

ConvergenceReport convergence_order(std::vector<GapReport> runs) {
  ConvergenceReport c;
  c.runs = std::move(runs);
  if (c.runs.size() >= 2) {
    std::vector<double> x, y;
    for (const auto& r : c.runs) {
      x.push_back(std::log(static_cast<double>(r.steps)));
      y.push_back(std::log(r.max_gap));
    }
    c.fitted_order = -fit_line(x, y).slope;
  }
  return c;
}

double auxiliary_objective(std::span<const double> t, std::span<const double> X, double rho_bar, double kappa,
                           std::span<const double> u) {
  const std::size_t N = u.size();
  if (t.size() < N + 1 || X.size() < N) throw DomainError("auxiliary_objective: sizes do not match");
  double U = 0.0, v = 0.0;
  for (std::size_t i = 0; i < N; ++i) {
    const double h = t[i + 1] - t[i];
    const double gap = X[i] - U;
    v += (0.5 * kappa * u[i] * u[i] + gap * gap / (2.0 * rho_bar)) * h;
    U += u[i] * h;
  }
  return v;
}

}  // namespace dealer
