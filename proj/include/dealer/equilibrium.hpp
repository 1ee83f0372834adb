#pragma once

#include <cstddef>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "dealer/fbsde.hpp"
#include "dealer/market_model.hpp"
#include "dealer/sim_paths.hpp"

namespace dealer {

struct AgentPaths {
  std::string id;
  std::vector<double> K;   // dealer-market position
  std::vector<double> U;   // open-market inventory
  std::vector<double> u;   // open-market trading rate
  std::vector<double> xi;  // realized target
};

/// One realized equilibrium. Immutable once produced; every path lives on
/// `grid`.
struct EquilibriumSolution {
  Horizon grid = Horizon::uniform(1.0, 1);
  Aggregates aggregates;
  std::vector<double> u_bar;
  std::vector<double> U_bar;
  std::vector<double> mu;         // drift of the dealer-market price
  std::vector<double> price_dev;  // S - D
  std::vector<double> K_N;
  std::vector<double> xi_bar;
  std::vector<AgentPaths> agents;
  bool deterministic = true;
};

/// Precomputes the aggregates and the forward solver once so that many
/// realized paths can be solved concurrently with `solve(key)`.
class EquilibriumSolver {
 public:
  explicit EquilibriumSolver(MarketParams params);

  /// Deterministic drivers may omit the key; stochastic drivers require one.
  /// Throws NumericalError when the clearing condition fails.
  EquilibriumSolution solve(std::optional<NoiseKey> key = std::nullopt) const;

  const MarketParams& params() const noexcept { return params_; }
  const Aggregates& aggregates() const noexcept { return agg_; }
  const ForwardSolver& forward() const noexcept { return forward_; }

 private:
  MarketParams params_;
  Aggregates agg_;
  DemandProcess driver_;  // K^N + xi_bar
  ForwardSolver forward_;
};

EquilibriumSolution solve_equilibrium(const MarketParams& params, std::optional<NoiseKey> key = std::nullopt);

/// max_t |K^N_t + sum_a m(a) K^a_t|.
double clearing_residual(const EquilibriumSolution& sol, const MarketParams& params);

/// max over agents and nodes of |mu_t - (U^a_t + K^a_t - xi^a_t)/rho^a|.
double foc_residual(const EquilibriumSolution& sol, const MarketParams& params);

/// max over agents and nodes of |U^a_t - (eta^a/eta_bar) U_bar_t|.
double share_residual(const EquilibriumSolution& sol);

/// max_t |price_dev_t - (1/eta + 1/eta_bar) u_bar_t|.
double price_identity_residual(const EquilibriumSolution& sol);

/// max_t |-int_t^T mu_s ds - price_dev_t|, the integral taken by the
/// trapezoidal rule. Deterministic drivers only (DomainError otherwise): for
/// stochastic drivers the conditional expectation of future drifts is not a
/// plain path integral.
double check_price_representations(const EquilibriumSolution& sol, const MarketParams& params);

/// What agent a takes as given when choosing (K, u): the price drift, the
/// other agents' aggregate open-market rate and its own target.
struct AgentEnvironment {
  std::span<const double> t;
  std::span<const double> mu;
  std::span<const double> u_others;
  std::span<const double> xi;
  double lambda = 0.0;
  double mass = 1.0;
  double rho = 1.0;
  AccessCost access{};
};

AgentEnvironment environment(const EquilibriumSolution& sol, const MarketParams& params, std::size_t agent,
                             std::vector<double>& u_others_storage);

/// Trapezoidal value of the linear-quadratic goal functional for an arbitrary
/// strategy (K, u, U) in a fixed environment. A no-access agent with a
/// nonzero rate gets -infinity.
double goal_value(const AgentEnvironment& env, std::span<const double> K, std::span<const double> u,
                  std::span<const double> U);

/// Goal functional of agent `agent` along this realized path. For stochastic
/// drivers this is one sample; average over paths for the expectation.
double goal_functional(const EquilibriumSolution& sol, const MarketParams& params, std::size_t agent);

}  // namespace dealer
