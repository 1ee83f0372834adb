#pragma once

#include <cstddef>
#include <span>
#include <string>
#include <vector>

#include "dealer/market_model.hpp"

namespace dealer {

/// How the discrete first-order system is assembled.
///  full:    unknowns {K^a_i, u^a_i}_{a,i} and {mu_i}_i, one dense block.
///  reduced: the dealer-market conditions and clearing are eliminated by
///           hand, leaving the open-market rates of agents with access.
///  automatic: full while the stacked system stays small, else reduced.
enum class OracleAssembly { automatic, full, reduced };

/// Discrete-time Nash equilibrium on the left endpoints t_0..t_{N-1} of the
/// grid. U^a is accumulated by the left-endpoint rule, so U^a has N+1 nodes.
struct DiscreteEquilibrium {
  std::size_t steps = 0;
  std::vector<double> t;  // N+1 nodes
  std::vector<double> mu;
  std::vector<double> u_bar;
  std::vector<double> U_bar;      // N+1 nodes
  std::vector<double> price_dev;  // -sum_{j>=i} mu_j dt_j
  std::vector<std::string> ids;
  std::vector<std::vector<double>> K;
  std::vector<std::vector<double>> u;
  std::vector<std::vector<double>> U;  // N+1 nodes each
  std::vector<std::vector<double>> xi;
  std::vector<double> K_N;
  std::vector<double> xi_bar;
  double relative_residual = 0.0;  // |A x - b| / (|A| |x|), infinity norms
  double rcond = 0.0;              // reciprocal condition estimate
  std::size_t unknowns = 0;
  OracleAssembly assembly = OracleAssembly::full;
};

/// Largest stacked system assembled densely under `automatic`.
inline constexpr std::size_t kFullAssemblyLimit = 3000;

/// Solves the discrete first-order conditions with dense LU and partial
/// pivoting. Deterministic demands only (DomainError otherwise). Throws
/// NumericalError with the condition estimate when the system is singular.
DiscreteEquilibrium assemble_and_solve(const MarketParams& params, std::size_t steps,
                                       OracleAssembly assembly = OracleAssembly::automatic);

/// Max over agents and steps of |mu_i - (U^a_i + K^a_i - xi^a_i)/rho^a|.
double oracle_foc_residual(const DiscreteEquilibrium& eq, const MarketParams& params);
/// Max over steps of |K^N_i + sum_a m(a) K^a_i|.
double oracle_clearing_residual(const DiscreteEquilibrium& eq, const MarketParams& params);

/// Reference paths on the same grid, node aligned with the oracle's t_i. Empty
/// vectors are skipped (e.g. a closed form that only provides some agents).
struct ReferencePaths {
  std::vector<double> U_bar;
  std::vector<double> u_bar;
  std::vector<double> mu;
  std::vector<double> price_dev;
  std::vector<std::vector<double>> K;  // per agent
};

struct QuantityGap {
  std::string name;
  double max = 0.0;
  double l2 = 0.0;  // sqrt(sum gap^2 dt)
};

struct GapReport {
  std::size_t steps = 0;
  std::vector<QuantityGap> quantities;
  double max_gap = 0.0;  // over quantities flagged as headline
};

/// Gaps oracle vs. reference over nodes 0..N-1. `headline` names the
/// quantities that enter max_gap (all when empty).
GapReport oracle_gap(const DiscreteEquilibrium& eq, const ReferencePaths& ref,
                     const std::vector<std::string>& headline = {});

struct ConvergenceReport {
  std::vector<GapReport> runs;
  double fitted_order = 0.0;  // -slope of log max_gap on log N
};

/// Fits the convergence order of max_gap over the runs.
ConvergenceReport convergence_order(std::vector<GapReport> runs);

/// Discretized aggregate auxiliary objective
///   sum_i [ kappa u_i^2 / 2 + (X_i - U_i)^2 / (2 rho_bar) ] dt_i,  U_i = sum_{k<i} u_k dt_k,
/// whose minimizer is the aggregate open-market rate for kappa = 1/eta + 1/eta_bar.
double auxiliary_objective(std::span<const double> t, std::span<const double> X, double rho_bar, double kappa,
                           std::span<const double> u);

}  // namespace dealer
